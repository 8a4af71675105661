"""Zeros of Bergman polynomials and their counting measures.

Roots are found with the Aberth-Ehrlich iteration at working precision.  A
known multiple root (``z0`` for the disk, ``1`` for a Cassini oval) is first
detected exactly from the vanishing Taylor coefficients there and divided
out, so the iteration never has to resolve a high-order cluster.
"""

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
import mpmath
import numpy as np

from .errors import DomainError, RootFinderError, StructureError
from .polyutil import horner, horner_d, taylor_shift
from .precision import PrecisionConfig, fmt, mpc, mpf, to_complex, working_precision
from .regions import classify, exceptional_set, sigma1_boundary, sigma_cdf, sigma_segment

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RootSet:
    """Zeros of ``p_n`` as ``(root, multiplicity)`` pairs (mpc roots)."""

    n: int
    roots: tuple
    iterations: int = 0
    max_residual: float = 0.0
    deflated: int = 0

    def flat(self):
        """All zeros as a complex array, repeated by multiplicity."""
        out = []
        for r, m in self.roots:
            out.extend([to_complex(r)] * m)
        return np.array(out, dtype=complex)

    @property
    def sites(self):
        return len(self.roots)

    def save_csv(self, path, append=False):
        with open(path, "a" if append else "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if not append:
                w.writerow(["n", "re", "im", "multiplicity"])
            for r, m in self.roots:
                w.writerow([self.n, fmt(r.real), fmt(r.imag), m])


def taylor_at(coeffs, z0):
    """Taylor coefficients ``p^{(j)}(z0)/j!`` (ascending)."""
    return taylor_shift(list(coeffs), z0)


def multiplicity_at(coeffs, z0, rel_tol):
    """Number of leading Taylor coefficients at ``z0`` that vanish relative to the largest."""
    t = taylor_at(coeffs, z0)
    scale = max(abs(c) for c in t)
    k = 0
    while k < len(t) - 1 and abs(t[k]) <= rel_tol * scale:
        k += 1
    return k, t


def backward_error(coeffs, z):
    """``|p(z)| / sum |c_k| |z|^k``: relative residual of a computed root."""
    az = abs(z)
    scale = horner([abs(c) for c in coeffs], az)
    return float(abs(horner(coeffs, z)) / scale) if scale else 0.0


def _known_multiple_root(domain, n):
    """``(point, multiplicity)`` of the multiple root forced by symmetry, if any."""
    if domain.family == "disk":
        return domain.center, n
    if domain.family == "cassini":
        return mpc(1), n // 2
    return None, 0


def _initial_guesses(coeffs, rng):
    n = len(coeffs) - 1
    lead = coeffs[-1]
    centroid = -coeffs[-2] / (n * lead)
    shifted = taylor_shift(list(coeffs), centroid)
    c0 = abs(shifted[0])
    radius = (c0 / abs(lead)) ** (mpf(1) / n) if c0 != 0 else mpf(1)
    if radius == 0:
        radius = mpf(1)
    jitter = rng.uniform(-1e-3, 1e-3, size=(n, 2))
    out = np.empty(n, dtype=object)
    two_pi = 2 * gmpy2.const_pi()
    for k in range(n):
        t = two_pi * (mpf(k) + mpf("0.25")) / n + mpf(float(jitter[k, 0]))
        rr = radius * (1 + mpf(float(jitter[k, 1])))
        out[k] = centroid + rr * gmpy2.mpc(gmpy2.cos(t), gmpy2.sin(t))
    return out


def aberth(coeffs, tol, max_iter=500, seed=0):
    """All roots of a polynomial (ascending ``coeffs``, nonzero leading term).

    Synchronous Aberth-Ehrlich sweeps from jittered circle guesses; returns
    ``(roots, iterations)``.
    """
    coeffs = list(coeffs)
    n = len(coeffs) - 1
    if n < 1:
        return np.empty(0, dtype=object), 0
    if n == 1:
        return np.array([-coeffs[0] / coeffs[1]], dtype=object), 0
    rng = np.random.default_rng(seed)
    z = _initial_guesses(coeffs, rng)
    eye = np.eye(n, dtype=bool)
    for it in range(1, max_iter + 1):
        p, dp = horner_d(coeffs, z)
        ratio = p / dp
        D = z[:, None] - z[None, :]
        D[eye] = 1
        inv = 1 / D
        inv[eye] = 0
        S = inv.sum(axis=1)
        step = ratio / (1 - ratio * S)
        z = z - step
        worst = max(abs(s) / max(abs(x), 1) for s, x in zip(step, z))
        if worst <= tol:
            return z, it
    raise RootFinderError(
        f"Aberth iteration did not converge in {max_iter} sweeps", worst_residual=float(worst)
    )


def _cluster(roots, tol):
    """Merge roots closer than ``tol`` (relative) into ``(center, multiplicity)``."""
    remaining = sorted(roots, key=lambda r: (float(r.real), float(r.imag)))
    out = []
    used = [False] * len(remaining)
    for i, r in enumerate(remaining):
        if used[i]:
            continue
        group = [r]
        used[i] = True
        for j in range(i + 1, len(remaining)):
            if not used[j] and abs(remaining[j] - r) <= tol * max(abs(r), 1):
                group.append(remaining[j])
                used[j] = True
        out.append((sum(group, mpc(0)) / len(group), len(group)))
    return out


def find_zeros(basis, n, cfg=None, seed=0, max_iter=500):
    """Zeros of ``p_n`` with multiplicities."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cfg = cfg or PrecisionConfig(precision_bits=basis.precision_bits)
    domain = basis.domain
    with working_precision(basis.precision_bits):
        coeffs = list(basis.poly(n))
        roots = []
        z0, k = _known_multiple_root(domain, n)
        work = coeffs
        shift = mpc(0)
        if k:
            t = taylor_at(coeffs, z0)
            scale = max(abs(c) for c in t)
            if all(abs(c) <= cfg.ortho_tol * scale for c in t[:k]):
                # q(u) = p(z0 + u) / u^k, solved in u and shifted back
                work = t[k:]
                shift = z0
                roots.append((mpc(z0), k))
            else:
                log.warning("p_%d does not vanish to order %d at %s; solving undeflated", n, k, to_complex(z0))
                k = 0
        found, iters = aberth(work, cfg.root_tol, max_iter=max_iter, seed=seed)
        # residuals are measured on the polynomial actually solved (the
        # deflated factor when a multiple root was divided out)
        resid = max((backward_error(work, r) for r in found), default=0.0)
        if resid > cfg.root_tol:
            raise RootFinderError(f"root residual {resid:.3e} exceeds tolerance", worst_residual=resid)
        roots.extend(_cluster([r + shift for r in found], cfg.cluster_tol))
        roots.sort(key=lambda rm: (float(rm[0].real), float(rm[0].imag)))
        return RootSet(n=n, roots=tuple(roots), iterations=iters, max_residual=resid, deflated=k)


def reconstruct(basis, rootset):
    """``lead * prod (z - root)`` as coefficients (ascending)."""
    with working_precision(basis.precision_bits):
        c = [basis.leading(rootset.n)]
        for r, m in rootset.roots:
            for _ in range(m):
                nxt = [mpc(0)] * (len(c) + 1)
                for k, ck in enumerate(c):
                    nxt[k + 1] += ck
                    nxt[k] -= r * ck
                c = nxt
        return c


@dataclass
class StructureReport:
    """Outcome of the Cassini zero-structure checks, one entry per clause."""

    n: int
    clauses: dict = field(default_factory=dict)

    def add(self, name, passed, **detail):
        self.clauses[name] = {"passed": bool(passed), **detail}

    @property
    def passed(self):
        return all(c["passed"] for c in self.clauses.values())

    def failures(self):
        return [k for k, c in self.clauses.items() if not c["passed"]]

    def to_json(self):
        return {"n": self.n, "passed": self.passed, "clauses": self.clauses}


def _lambda_moment(q_real, k, beta, m, bits):
    """``∫_beta^1 q(x) f(x)^m dlambda_n`` and the same integral of ``|.|``."""
    with mpmath.workprec(bits):
        qc = [mpmath.mpf(str(c)) for c in reversed(q_real)]
        beta = mpmath.mpf(str(beta))
        R2 = 1 - beta**2

        def weight(x):
            return (1 - x) ** k * mpmath.sqrt((x * x - beta * beta) / (1 - x * x))

        def f(x):
            return R2 / (x * x - 1) + 1

        def integrand(x):
            return mpmath.polyval(qc, x) * f(x) ** m * weight(x)

        val = mpmath.quad(integrand, [beta, 1])
        mag = mpmath.quad(lambda x: abs(integrand(x)), [beta, 1])
        return float(abs(val)), float(mag)


def verify_cassini_structure(basis, n, cfg=None, deriv_tol=1e-20, seed=0, moments=(0,)):
    """Check the factorization ``p_n = (z-1)^{floor(n/2)} q_n`` and the zeros of ``q_n``.

    Clauses: ``derivatives`` (Taylor coefficients of ``p_n`` at 1 of order
    below ``floor(n/2)`` vanish relative to the largest), ``q_degree``,
    ``q_real``, ``q_simple``, ``q_in_segment`` and ``orthogonality_m`` for
    each requested moment ``m`` of ``q_n`` against ``lambda_n``.
    """
    domain = basis.domain
    if domain.family != "cassini":
        raise ValueError("expected a cassini basis")
    cfg = cfg or PrecisionConfig(precision_bits=basis.precision_bits)
    report = StructureReport(n=n)
    half = n // 2
    bits = basis.precision_bits
    with working_precision(bits):
        t = taylor_at(basis.poly(n), mpc(1))
        scale = max(abs(c) for c in t)
        rel = [float(abs(c) / scale) for c in t[:half]]
        worst = max(rel, default=0.0)
        report.add("derivatives", worst < deriv_tol, count=half, worst_relative=worst)
        q_u = t[half:]
        # q in powers of z, for the segment quadrature
        q_z = taylor_shift(list(q_u), mpc(-1))
        q_roots, _ = aberth(q_u, cfg.root_tol, seed=seed)
        q_roots = [r + 1 for r in q_roots]
        expected = n - half
        report.add("q_degree", len(q_roots) == expected, expected=expected, found=len(q_roots))
        imag = max((float(abs(r.imag)) for r in q_roots), default=0.0)
        report.add("q_real", imag < cfg.cluster_tol, max_imag=imag)
        xs = sorted(float(r.real) for r in q_roots)
        gap = min((b - a for a, b in zip(xs, xs[1:])), default=math.inf)
        report.add("q_simple", gap > cfg.cluster_tol, min_gap=gap)
        lo, hi = sigma_segment(domain)
        inside = all(lo < x < hi for x in xs)
        report.add("q_in_segment", inside, min=xs[0] if xs else None, max=xs[-1] if xs else None)
        beta = domain.segment[0]
        q_real = [c.real for c in q_z]
        for m in moments:
            val, mag = _lambda_moment(q_real, half, beta, m, bits)
            relv = val / mag if mag else 0.0
            report.add(f"orthogonality_m{m}", relv < cfg.ortho_tol, relative=relv)
    report.roots = xs
    return report


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Finite atomic measure; weights are exact fractions."""

    atoms: tuple

    @property
    def total(self):
        return sum((w for _, w in self.atoms), Fraction(0))

    def cdf_real(self, x):
        return float(sum((w for z, w in self.atoms if z.real <= x), Fraction(0)))


def counting_measure(roots):
    """Normalized zero counting measure ``nu_n`` from a RootSet or ``(root, mult)`` pairs."""
    pairs = roots.roots if isinstance(roots, RootSet) else roots
    pairs = [(to_complex(mpc(r)), int(m)) for r, m in pairs]
    n = sum(m for _, m in pairs)
    if n < 1:
        raise ValueError("need at least one root")
    return EmpiricalMeasure(tuple((z, Fraction(m, n)) for z, m in pairs))


def limit_cdf(domain, x):
    """CDF of ``sigma + delta_1 / 2`` on the real line."""
    lo, hi = sigma_segment(domain)
    if x <= lo:
        return 0.0
    if x >= hi:
        return 1.0
    return sigma_cdf(domain, x)


def kolmogorov_vs_limit(measure, domain, atom_tol=1e-6, grid=2000):
    """Kolmogorov distance between the projected measure and ``sigma + delta_1/2``."""
    if domain.family != "cassini":
        raise ValueError("the limit measure is known in closed form for the cassini family")
    lo, hi = sigma_segment(domain)
    xs_atoms = []
    for z, w in measure.atoms:
        if abs(z.imag) > atom_tol or not (lo - atom_tol <= z.real <= hi + atom_tol):
            raise StructureError(f"atom {z} is off the segment [{lo}, {hi}]")
        xs_atoms.append((min(max(z.real, lo), hi), w))
    xs_atoms.sort()
    total = float(measure.total)
    pts = np.linspace(lo, hi, grid)
    cand = set(pts.tolist()) | {x for x, _ in xs_atoms}
    worst = 0.0
    for x in sorted(cand):
        emp_right = float(sum((w for a, w in xs_atoms if a <= x), Fraction(0))) / total
        emp_left = float(sum((w for a, w in xs_atoms if a < x), Fraction(0))) / total
        F = limit_cdf(domain, x)
        F_left = sigma_cdf(domain, x) if lo < x else 0.0
        worst = max(worst, abs(emp_right - F), abs(emp_left - F_left))
    return worst


@dataclass
class AttractionReport:
    probes: list
    violations: list
    probe_radius: float
    margin: float

    @property
    def passed(self):
        return all(p["hit"] for p in self.probes) and not self.violations

    def to_json(self):
        return {
            "passed": self.passed,
            "probe_radius": self.probe_radius,
            "margin": self.margin,
            "probes": self.probes,
            "violations": self.violations,
        }


def zero_attraction_check(domain, roots_by_n, probes=None, probe_radius=0.05, n_floor=40, margin=0.05):
    """Zeros accumulate on ``dSigma_1 & G_1`` and avoid the interior of ``Sigma_1``.

    (i) every probe on ``dSigma_1 & G_1`` has a zero of some ``p_n`` within
    ``probe_radius``; (ii) no zero of ``p_n``, ``n >= n_floor``, lies in
    ``Sigma_1`` (or outside ``G_1``) at distance ``>= margin`` from
    ``dSigma_1 & G_1``.
    """
    if probes is None:
        probes = sigma1_boundary(domain, 20)
    flat = {n: (rs.flat() if isinstance(rs, RootSet) else np.asarray(rs, dtype=complex)) for n, rs in roots_by_n.items()}
    probe_rows = []
    for p in probes:
        best = (math.inf, None)
        for n, zs in flat.items():
            if len(zs):
                d = float(np.min(np.abs(zs - p)))
                if d < best[0]:
                    best = (d, n)
        probe_rows.append({"probe": [p.real, p.imag], "distance": best[0], "n": best[1], "hit": best[0] <= probe_radius})
    boundary = exceptional_set(domain)
    violations = []
    for n, zs in flat.items():
        if n < n_floor:
            continue
        for z in zs:
            d = float(np.min(np.abs(boundary - z)))
            if d < margin:
                continue
            try:
                label = classify(domain, complex(z)).label
            except DomainError:
                label = -1
            if label in (1, -1):
                violations.append({"n": n, "z": [z.real, z.imag], "label": label, "distance": d})
    return AttractionReport(probe_rows, violations, probe_radius, margin)


def save_report_json(path, data):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
        fh.write("\n")
