"""Asymptotic checks for Bergman polynomials.

* Carleman's formula on ``Omega_rho``:
  ``h_n(z) = p_n(z) / (sqrt(n+1) phi(z)^n) - phi'(z) -> 0``;
* strong asymptotics on ``Sigma_1`` with ``Phi`` in place of ``phi``;
* the contour-integral representation of ``p_n`` on ``G_1``;
* nth-root growth ``|p_n(z)|^{1/n} -> r(z)``.

The measure is normalized (``dA / pi``), so the Carleman normalization is
``sqrt(n+1)`` rather than ``sqrt((n+1)/pi)``.
"""

import csv
import json
import math
from dataclasses import dataclass

import gmpy2
import numpy as np

from .errors import DomainError, PreconditionError, QuadratureError
from .gram import eval_poly
from .precision import PrecisionConfig, fmt, log_abs, mpc, to_complex
from .regions import Phi_prime, classify


@dataclass(frozen=True)
class RateFit:
    """Least-squares fit of ``log(residual) ~ intercept + slope * n``."""

    n_values: tuple
    residuals: tuple
    slope: float
    intercept: float

    @property
    def ratio(self):
        """Fitted decay factor per degree, ``exp(slope)``."""
        return math.exp(self.slope)

    def to_json(self):
        return {"slope": self.slope, "intercept": self.intercept, "n": list(self.n_values)}

    def save_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)
            fh.write("\n")


def fit_slope(ns, log_residuals):
    """Fit a line to ``(n, log|residual|)``, dropping infinite entries (underflow)."""
    ns = np.asarray(ns, dtype=float)
    y = np.asarray(log_residuals, dtype=float)
    keep = np.isfinite(y)
    if keep.sum() < 2:
        raise ValueError("need at least two finite residuals to fit a slope")
    slope, intercept = np.polyfit(ns[keep], y[keep], 1)
    return RateFit(tuple(int(n) for n in ns[keep]), tuple(y[keep]), float(slope), float(intercept))


def _sqrt_n1(n):
    return gmpy2.sqrt(gmpy2.mpfr(n + 1))


def carleman_residual(basis, z, n):
    """``h_n(z) = p_n(z) / (sqrt(n+1) phi(z)^n) - phi'(z)`` for ``z`` in ``Omega_rho``."""
    domain = basis.domain
    with domain._wp():
        z = mpc(z)
        w = domain.phi(z)
        return eval_poly(basis, n, z) / (_sqrt_n1(n) * w**n) - 1 / domain._psi_prime(w)


def carleman_residual_at(basis, w, n):
    """``h_n`` at ``z = psi(w)``, using the exact preimage ``w`` (``|w| > rho``)."""
    domain = basis.domain
    with domain._wp():
        w = mpc(w)
        if not abs(w) > domain.rho:
            raise DomainError("carleman residual needs |w| > rho")
        z = domain._psi(w)
        return eval_poly(basis, n, z) / (_sqrt_n1(n) * w**n) - 1 / domain._psi_prime(w)


def strong_residual(basis, z, n, sample=None):
    """``p_n(z) / (sqrt(n+1) Phi(z)^n) - Phi'(z)`` for ``z`` in ``Sigma_1``."""
    domain = basis.domain
    sample = sample or classify(domain, z)
    if sample.label != 1:
        raise PreconditionError(f"z={sample.z} has label {sample.label}; strong asymptotics need Sigma_1")
    with domain._wp():
        W = sample.phi_big
        z = sample.point if sample.point is not None else sample.z
        return eval_poly(basis, n, z) / (_sqrt_n1(n) * W**n) - Phi_prime(domain, sample)


def nth_root_growth(basis, z, n_range):
    """``max |p_n(z)|^{1/n}`` over the upper half of ``n_range``."""
    ns = sorted(n for n in n_range if n >= 1)
    if not ns:
        raise ValueError("n_range must contain a degree >= 1")
    top = ns[len(ns) // 2 :]
    return max(math.exp(log_abs(eval_poly(basis, n, z)) / n) for n in top)


def nth_root(basis, z, n):
    return math.exp(log_abs(eval_poly(basis, n, z)) / n)


def _contour_sum(domain, xi, n, M, offset):
    with domain._wp():
        two_pi = 2 * gmpy2.const_pi()
        acc = mpc(0)
        for l in range(M):
            t = two_pi * (2 * l + (1 if offset else 0)) / (2 * M)
            w = gmpy2.mpc(gmpy2.cos(t), gmpy2.sin(t))
            acc += w ** (n + 1) / (domain.h_phi(w) - xi)
        return acc


def integral_representation(basis, z, n, cfg=None, quad_nodes=None):
    """Main term of the contour-integral representation and the remainder.

    Returns ``(main, eps)`` with
    ``main = sqrt(n+1) phi'(z) / (2 pi i) ∮_{|w|=1} w^n dw / (h_phi(w) - phi(z))``
    evaluated by the trapezoidal rule with node doubling, and
    ``eps = p_n(z) - main``.  Needs a closed-form interior map (disk, cassini).
    """
    domain = basis.domain
    if not domain.has_interior_map:
        raise NotImplementedError(f"no closed-form interior map for {domain.family}")
    cfg = cfg or PrecisionConfig(precision_bits=basis.precision_bits)
    with domain._wp():
        z = mpc(z)
        if not domain.contains(z):
            raise DomainError(f"z={to_complex(z)} is not in G_1")
        xi = domain.phi_int(z)
        M = quad_nodes or 64
        while M < 2 * (n + 2):
            M *= 2
        S = _contour_sum(domain, xi, n, M, False)
        est = S / M
        while True:
            if 2 * M > cfg.max_quad_nodes:
                raise QuadratureError("contour integral did not converge", nodes=M)
            S = S + _contour_sum(domain, xi, n, M, True)
            M *= 2
            new = S / M
            delta = abs(new - est)
            est = new
            if delta <= cfg.quad_tol * max(abs(new), gmpy2.mpfr(1)):
                break
        main = _sqrt_n1(n) * domain.phi_int_prime(z) * est
        return main, eval_poly(basis, n, z) - main


def integral_main_residues(domain, z, n):
    """The same main term by residues: ``sqrt(n+1) phi'(z) sum omega^n / h_phi'(omega)``
    over the solutions of ``h_phi = phi(z)`` in ``|w| < 1`` (simple roots only)."""
    with domain._wp():
        z = mpc(z)
        xi = domain.phi_int(z)
        if domain.family == "disk":
            roots = [xi]
        elif domain.family == "cassini":
            roots = [w for w in domain.cubic_roots(xi) if abs(w) < 1]
        else:
            raise NotImplementedError(domain.family)
        acc = sum((w**n / domain.h_phi_prime(w) for w in roots), mpc(0))
        return _sqrt_n1(n) * domain.phi_int_prime(z) * acc


def save_residual_csv(path, rows):
    """Rows of ``(z, n, residual)`` as ``re(z), im(z), n, re, im, abs``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["re(z)", "im(z)", "n", "re(resid)", "im(resid)", "abs(resid)"])
        for z, n, r in rows:
            z = complex(z)
            r = mpc(r)
            w.writerow([repr(z.real), repr(z.imag), n, fmt(r.real), fmt(r.imag), fmt(abs(r))])
