"""Area moments and orthonormal (Bergman) polynomial bases.

Area integrals over ``G_1`` are reduced to boundary integrals with Green's
formula,

    (1/pi) ∬ f conj(g) dA = (1 / 2 pi i) ∮ f conj(G) dz,    G' = g,

and the boundary integral is evaluated with the trapezoidal rule on
``z = psi(e^{i theta})``.  Because ``L_1`` is analytic the rule converges
geometrically, so node counts are doubled until the result stops changing.

Two independent constructions of the basis are provided:

* :func:`orthonormal_basis_cholesky` from the Hermitian moment matrix;
* :func:`orthonormal_basis_arnoldi`, a Stieltjes process on values at the
  quadrature nodes that never forms the moment matrix.

Both work with monomials in ``zeta = (z - c) / s``, where ``c`` is the constant
Laurent coefficient of ``psi`` and ``s = psi'(inf)``; the returned coefficients
are always in the raw ``z`` monomial basis.
"""

import csv
import json
import logging
from dataclasses import dataclass, field, replace
from math import comb

import gmpy2
import numpy as np

from .curves import JordanDomain, domain_from_dict
from .errors import CrossCheckError, IllConditionedError, QuadratureError
from .polyutil import horner
from .precision import PrecisionConfig, fmt, mpc, mpf, parse_mpc, working_precision

log = logging.getLogger(__name__)

_conj = np.frompyfunc(lambda z: z.conjugate(), 1, 1)
_norm = np.frompyfunc(gmpy2.norm, 1, 1)


def _cfg_for(domain, cfg):
    if cfg is None:
        return PrecisionConfig(precision_bits=domain.precision_bits)
    return cfg


def _domain_at(domain, cfg):
    if domain.precision_bits != cfg.precision_bits:
        return domain.with_precision(cfg.precision_bits)
    return domain


def boundary_nodes(domain, M, offset=False):
    """Nodes ``z_l = psi(w_l)`` and weights ``psi'(w_l) w_l`` on ``|w| = 1``.

    With ``offset`` the angles are shifted by half a step, i.e. the nodes
    added when going from ``M`` to ``2M`` points.
    """
    with domain._wp():
        two_pi = 2 * gmpy2.const_pi()
        zs = np.empty(M, dtype=object)
        dz = np.empty(M, dtype=object)
        for l in range(M):
            t = two_pi * (2 * l + (1 if offset else 0)) / (2 * M)
            w = gmpy2.mpc(gmpy2.cos(t), gmpy2.sin(t))
            zs[l] = domain._psi(w)
            dz[l] = domain._psi_prime(w) * w
        return zs, dz


def _powers(x, n):
    """``M x (n+1)`` object array with columns ``x**0 .. x**n``."""
    out = np.empty((len(x), n + 1), dtype=object)
    out[:, 0] = x * 0 + 1
    for k in range(1, n + 1):
        out[:, k] = out[:, k - 1] * x
    return out


@dataclass(frozen=True)
class MomentMatrix:
    """``entries[j, k] = (1/pi) ∬ zeta^j conj(zeta)^k dA`` with ``zeta = (z - center)/scale``."""

    n_max: int
    entries: np.ndarray
    quad_nodes: int
    center: object = 0
    scale: object = 1
    precision_bits: int = 512
    domain: JordanDomain = None


def _moment_sum(domain, n_max, M, offset, c, s):
    zs, dz = boundary_nodes(domain, M, offset)
    zeta = (zs - c) / s
    Z = _powers(zeta, n_max)
    Zc = _conj(Z) * _conj(zeta)[:, None] * dz[:, None]
    return Z.T.dot(Zc)


def _start_nodes(n_max):
    M = 32
    while M < 2 * (n_max + 2):
        M *= 2
    return M


def compute_moments(domain, n_max, cfg=None, *, centered=False):
    """Hermitian moment matrix by boundary quadrature with node doubling.

    With ``centered`` the monomials are taken in ``(z - c)/s`` (see module
    docstring); otherwise in ``z`` itself.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    cfg = _cfg_for(domain, cfg)
    domain = _domain_at(domain, cfg)
    with working_precision(cfg.precision_bits):
        if centered:
            c, s = mpc(domain.center), mpf(domain.capacity)
        else:
            c, s = mpc(0), mpf(1)
        col = np.array([s / (k + 1) for k in range(n_max + 1)], dtype=object)
        M = _start_nodes(n_max)
        S = _moment_sum(domain, n_max, M, False, c, s)
        est = S * col[None, :] / M
        worst = None
        while True:
            if 2 * M > cfg.max_quad_nodes:
                raise QuadratureError(
                    f"moments for n_max={n_max} did not converge within {cfg.max_quad_nodes} nodes",
                    worst_delta=None if worst is None else float(worst),
                    nodes=M,
                )
            S = S + _moment_sum(domain, n_max, M, True, c, s)
            M *= 2
            new = S * col[None, :] / M
            diag = np.array([abs(new[k, k]) for k in range(n_max + 1)], dtype=object)
            scale = _outer_sqrt(diag)
            worst = max(abs(a - b) / d for a, b, d in zip(new.flat, est.flat, scale.flat))
            est = new
            log.debug("moments n_max=%d nodes=%d delta=%.3e", n_max, M, float(worst))
            if worst < cfg.quad_tol:
                break
        entries = (est + _conj(est).T) / 2
        for k in range(n_max + 1):
            entries[k, k] = mpc(entries[k, k].real)
        return MomentMatrix(
            n_max=n_max,
            entries=entries,
            quad_nodes=M,
            center=c,
            scale=s,
            precision_bits=cfg.precision_bits,
            domain=domain,
        )


def _outer_sqrt(diag):
    r = np.array([gmpy2.sqrt(d) for d in diag], dtype=object)
    return np.outer(r, r)


def cholesky_lower(A, precision_bits):
    """Lower-triangular ``L`` with ``A = L L^H``.

    Raises :class:`IllConditionedError` when a pivot is nonpositive or has
    lost more than half of its significand relative to its diagonal entry.
    """
    n = A.shape[0]
    with working_precision(precision_bits):
        loss = mpf(2) ** (-precision_bits // 2)
        L = np.empty((n, n), dtype=object)
        L[:] = mpc(0)
        for k in range(n):
            akk = A[k, k].real
            d = akk - sum((gmpy2.norm(x) for x in L[k, :k]), mpf(0))
            if not d > 0 or d < akk * loss:
                raise IllConditionedError(k, precision_bits)
            lkk = gmpy2.sqrt(d)
            L[k, k] = mpc(lkk)
            if k + 1 < n:
                if k:
                    acc = L[k + 1 :, :k].dot(_conj(L[k, :k]))
                else:
                    acc = 0
                L[k + 1 :, k] = (A[k + 1 :, k] - acc) / lkk
        return L


def invert_lower(L):
    n = L.shape[0]
    C = np.empty((n, n), dtype=object)
    C[:] = L[0, 0] * 0
    for i in range(n):
        row = -L[i, :i].dot(C[:i, : i + 1]) if i else np.array([L[0, 0] * 0], dtype=object)
        row[i] = row[i] + 1
        C[i, : i + 1] = row / L[i, i]
    return C


def _unshift(C, c, s):
    """Map coefficient rows in ``zeta = (z - c)/s`` to rows in ``z``."""
    n = C.shape[0]
    T = np.empty((n, n), dtype=object)
    T[:] = mpc(0)
    mc = -c
    for k in range(n):
        sk = s**k
        for i in range(k + 1):
            T[k, i] = comb(k, i) * mc ** (k - i) / sk
    raw = C.dot(T)
    for k in range(n):
        raw[k, k + 1 :] = mpc(0)
        raw[k, k] = mpc(raw[k, k].real)
    return raw


@dataclass(frozen=True)
class OrthoBasis:
    """Orthonormal polynomials ``p_0 .. p_{n_max}``.

    ``coeffs[n, k]`` is the coefficient of ``z**k`` in ``p_n`` (zero for
    ``k > n``).
    """

    domain: JordanDomain
    n_max: int
    coeffs: np.ndarray
    precision_bits: int
    method: str = "cholesky"
    quad_nodes: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def poly(self, n):
        if not 0 <= n <= self.n_max:
            raise IndexError(f"degree {n} outside 0..{self.n_max}")
        return self.coeffs[n, : n + 1]

    def leading(self, n):
        return self.coeffs[n, n]

    def truncate(self, n_max):
        return replace(self, n_max=n_max, coeffs=self.coeffs[: n_max + 1, : n_max + 1])

    def to_json(self):
        return {
            "family": self.domain.family,
            "params": self.domain.params,
            "precision_bits": self.precision_bits,
            "method": self.method,
            "quad_nodes": self.quad_nodes,
            "n_max": self.n_max,
            "coeffs": [
                [[fmt(c.real), fmt(c.imag)] for c in self.poly(n)] for n in range(self.n_max + 1)
            ],
        }

    def save_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)
            fh.write("\n")

    def save_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "k", "re", "im"])
            for n in range(self.n_max + 1):
                for k, c in enumerate(self.poly(n)):
                    w.writerow([n, k, fmt(c.real), fmt(c.imag)])

    @classmethod
    def from_json(cls, data):
        bits = int(data["precision_bits"])
        domain = domain_from_dict({"family": data["family"], **data["params"]}, bits)
        rows = data["coeffs"]
        n_max = len(rows) - 1
        with working_precision(bits):
            C = np.empty((n_max + 1, n_max + 1), dtype=object)
            C[:] = mpc(0)
            for n, row in enumerate(rows):
                if len(row) != n + 1:
                    raise ValueError(f"p_{n} must have {n + 1} coefficients, got {len(row)}")
                for k, pair in enumerate(row):
                    C[n, k] = parse_mpc(pair)
        return cls(
            domain=domain,
            n_max=n_max,
            coeffs=C,
            precision_bits=bits,
            method=data.get("method", "file"),
            quad_nodes=int(data.get("quad_nodes", 0)),
        )

    @classmethod
    def load_json(cls, path):
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def orthonormal_basis_cholesky(moments):
    """Basis from the moment matrix: coefficient rows are ``L^{-1}`` for ``M = L L^H``."""
    bits = moments.precision_bits
    L = cholesky_lower(moments.entries, bits)
    with working_precision(bits):
        C = invert_lower(L)
        raw = _unshift(C, moments.center, moments.scale)
    return OrthoBasis(
        domain=moments.domain,
        n_max=moments.n_max,
        coeffs=raw,
        precision_bits=bits,
        method="cholesky",
        quad_nodes=moments.quad_nodes,
    )


def _node_count(domain, n_max, cfg):
    """Smallest doubled node count at which the extreme moments have converged."""
    with working_precision(cfg.precision_bits):
        c, s = mpc(domain.center), mpf(domain.capacity)
        degs = sorted({0, n_max // 2, n_max})

        def extremes(M, offset):
            zs, dz = boundary_nodes(domain, M, offset)
            zeta = (zs - c) / s
            vals = []
            for j in degs:
                zj = np.array([x**j for x in zeta], dtype=object)
                for k in degs:
                    zk = np.array([x.conjugate() ** (k + 1) for x in zeta], dtype=object)
                    vals.append((zj * zk * dz).sum())
            return np.array(vals, dtype=object)

        M = _start_nodes(n_max)
        S = extremes(M, False)
        while 2 * M <= cfg.max_quad_nodes:
            S2 = S + extremes(M, True)
            worst = max(abs(a / M - b / (2 * M)) for a, b in zip(S, S2))
            ref = max(abs(b / (2 * M)) for b in S2)
            S, M = S2, 2 * M
            if worst <= cfg.quad_tol * ref:
                return M
        raise QuadratureError("node budget exhausted while sizing the Arnoldi quadrature", nodes=M)


def orthonormal_basis_arnoldi(domain, n_max, cfg=None, *, reference=None, quad_nodes=None):
    """Stieltjes/Arnoldi construction of the same basis.

    Successive products ``zeta * q_k`` are orthogonalized (two Gram-Schmidt
    passes) in the boundary-quadrature inner product.  If ``reference`` is
    given the result is compared coefficientwise with it and
    :class:`CrossCheckError` is raised when they differ by more than
    ``cfg.ortho_tol``.
    """
    cfg = _cfg_for(domain, cfg)
    domain = _domain_at(domain, cfg)
    M = quad_nodes or _node_count(domain, n_max, cfg)
    with working_precision(cfg.precision_bits):
        c, s = mpc(domain.center), mpf(domain.capacity)
        zs, dz = boundary_nodes(domain, M)
        zeta = (zs - c) / s
        V = _powers(zeta, n_max + 1)
        wgt = dz * s / M
        Q = np.empty((n_max + 1, n_max + 1), dtype=object)
        Q[:] = mpc(0)
        # W[:, j] = wgt * conj(antiderivative of q_j at the nodes)
        W = np.empty((M, n_max + 1), dtype=object)

        def anti_vals(v, k):
            a = np.array([v[j] / (j + 1) for j in range(k + 1)], dtype=object)
            return V[:, 1 : k + 2].dot(a)

        def inner_self(v, k):
            vals = V[:, : k + 1].dot(v)
            return (vals * _conj(anti_vals(v, k)) * wgt).sum().real

        one = np.array([mpc(1)], dtype=object)
        nrm = gmpy2.sqrt(inner_self(one, 0))
        Q[0, 0] = mpc(1 / nrm)
        W[:, 0] = wgt * _conj(anti_vals(Q[0, :1], 0))
        for k in range(1, n_max + 1):
            v = np.empty(k + 1, dtype=object)
            v[0] = mpc(0)
            v[1:] = Q[k - 1, :k]
            for _ in range(2):
                vals = V[:, : k + 1].dot(v)
                h = vals.dot(W[:, :k])
                v[:k] = v[:k] - h.dot(Q[:k, :k])
            nrm = gmpy2.sqrt(inner_self(v, k))
            v = v / nrm
            Q[k, : k + 1] = v
            W[:, k] = wgt * _conj(anti_vals(v, k))
        raw = _unshift(Q, c, s)
    basis = OrthoBasis(
        domain=domain,
        n_max=n_max,
        coeffs=raw,
        precision_bits=cfg.precision_bits,
        method="arnoldi",
        quad_nodes=M,
    )
    if reference is not None:
        diff = coefficient_discrepancy(basis, reference)
        if diff > cfg.ortho_tol:
            raise CrossCheckError(
                f"Arnoldi and Cholesky bases differ by {diff:.3e} > ortho_tol={cfg.ortho_tol:.3e}",
                discrepancy=diff,
            )
    return basis


def coefficient_discrepancy(a, b):
    """Largest coefficientwise difference, relative to each polynomial's largest coefficient."""
    n = min(a.n_max, b.n_max)
    worst = 0.0
    with working_precision(max(a.precision_bits, b.precision_bits)):
        for k in range(n + 1):
            pa, pb = a.poly(k), b.poly(k)
            ref = max(abs(x) for x in pa)
            d = max(abs(x - y) for x, y in zip(pa, pb)) / ref
            worst = max(worst, float(d))
    return worst


def eval_poly(basis, n, z):
    """``p_n(z)`` by Horner's rule at the basis precision."""
    with working_precision(basis.precision_bits):
        return horner(basis.poly(n), mpc(z))


def eval_poly_array(basis, n, zs):
    with working_precision(basis.precision_bits):
        arr = np.array([mpc(z) for z in zs], dtype=object)
        return horner(basis.poly(n), arr)


def gram_matrix(basis, quad_nodes=None):
    """``(1/pi) ∬ p_j conj(p_k) dA`` recomputed by boundary quadrature.

    Defaults to twice the node count the basis was built with.
    """
    domain = basis.domain
    M = quad_nodes or 2 * max(basis.quad_nodes, _start_nodes(basis.n_max))
    n = basis.n_max
    with working_precision(basis.precision_bits):
        zs, dz = boundary_nodes(domain, M)
        V = _powers(zs, n + 1)
        C = basis.coeffs
        A = np.empty((n + 1, n + 2), dtype=object)
        A[:] = mpc(0)
        for k in range(n + 1):
            for j in range(k + 1):
                A[k, j + 1] = C[k, j] / (j + 1)
        P = V[:, : n + 1].dot(C.T)
        G = _conj(V.dot(A.T))
        return P.T.dot(G * (dz / M)[:, None])


def orthonormality_residual(basis, quad_nodes=None):
    """``max |<p_j, p_k> - delta_jk|`` from :func:`gram_matrix`."""
    G = gram_matrix(basis, quad_nodes)
    with working_precision(basis.precision_bits):
        worst = mpf(0)
        for j in range(G.shape[0]):
            for k in range(G.shape[1]):
                worst = max(worst, abs(G[j, k] - (1 if j == k else 0)))
    return float(worst)


def cancellation_bits(basis, n_nodes=64):
    """Bits lost evaluating ``p_n`` on ``L_1`` from raw ``z`` coefficients.

    ``max_n log2(sum_k |c_nk| r^k)`` with ``r = max |z|`` on ``L_1``; an
    orthonormal ``p_n`` is of order one there, so this is the cancellation
    the raw representation forces on every evaluation.
    """
    with working_precision(basis.precision_bits):
        zs, _ = boundary_nodes(basis.domain, n_nodes)
        r = max(abs(z) for z in zs)
        worst = mpf(1)
        for n in range(basis.n_max + 1):
            worst = max(worst, sum((abs(c) * r**k for k, c in enumerate(basis.poly(n))), mpf(0)))
        return float(gmpy2.log2(worst))


def build_basis(domain, n_max, cfg=None, method="cholesky", max_bits=4096):
    """Orthonormal basis with automatic precision escalation.

    The precision is doubled and the moments recomputed, up to ``max_bits``,
    when a Cholesky pivot loses half its significand or when evaluating the
    raw ``z`` coefficients on ``L_1`` would cancel more than half of it.
    """
    cfg = _cfg_for(domain, cfg)
    while True:
        dom = _domain_at(domain, cfg)
        try:
            if method == "cholesky":
                basis = orthonormal_basis_cholesky(compute_moments(dom, n_max, cfg, centered=True))
            elif method == "arnoldi":
                basis = orthonormal_basis_arnoldi(dom, n_max, cfg)
            else:
                raise ValueError(f"unknown method {method!r}")
            lost = cancellation_bits(basis)
            if lost > cfg.precision_bits / 2:
                raise IllConditionedError(
                    n_max,
                    cfg.precision_bits,
                    f"raw coefficients cancel {lost:.0f} of {cfg.precision_bits} bits on L_1",
                )
            return replace(basis, meta={**basis.meta, "cancellation_bits": lost})
        except IllConditionedError as exc:
            if 2 * cfg.precision_bits > max_bits:
                raise
            log.info("%s; escalating to %d bits", exc, 2 * cfg.precision_bits)
            cfg = cfg.with_bits(2 * cfg.precision_bits)
