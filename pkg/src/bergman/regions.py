"""The sets ``Sigma_0, Sigma_1, Sigma_2`` and the functions ``Phi`` and ``r``.

For ``z`` in ``G_1`` consider the solutions of ``h_phi(w) = phi(z)`` in the
annulus ``mu < |w| < 1``.  The label of ``z`` is the total multiplicity of the
solutions of largest modulus (0 when there are none); on label 1 the dominant
solution is ``Phi(z)``, and ``r(z)`` is its modulus (``mu`` on label 0).

Classification uses the closed forms available for each family:

* disk: ``Sigma_0 = {z0}`` and ``Phi(z) = (z - z0)/s`` elsewhere;
* ellipse: ``Sigma_0 = [-1, 1]`` and ``Phi = phi`` elsewhere;
* cassini: the two roots in ``|w| < 1`` of ``(1 - a w) w^2 = xi (w - a)``,
  ``xi = (z^2 - 1)/R``;
* joukowsky: the two solutions of ``psi(w) = z``.
"""

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import gmpy2
import numpy as np
from skimage import measure

from .curves import level_curve
from .errors import DomainError, PreconditionError, SolverError, StructureError
from .precision import PrecisionConfig, fmt, mpc, mpf, to_complex, working_precision
from .svg import Figure

log = logging.getLogger(__name__)

LABEL_COLORS = {0: "#f2c14e", 1: "#9ecae1", 2: "#d62728"}


@dataclass(frozen=True)
class RegionSample:
    """Classification of one point of ``G_1``.

    ``solutions`` lists the largest-modulus solutions as ``(w, multiplicity)``
    pairs; ``phi_big`` is ``Phi(z)`` (an mpc) when ``label == 1``.  ``point``
    keeps ``z`` at working precision.
    """

    z: complex
    label: int
    phi_big: object
    r: float
    solutions: tuple = ()
    point: object = field(default=None, repr=False, compare=False)

    @property
    def multiplicity(self):
        return sum(m for _, m in self.solutions)


def _cfg(domain, cfg):
    return cfg or PrecisionConfig(precision_bits=domain.precision_bits)


def mu(domain, cfg=None):
    """The number ``mu`` of the domain (an mpfr, or 0).

    For the Joukowsky family the closed form is cross-checked against the
    fixed point of ``w -> 1/(R - w)`` started at ``0.9``.
    """
    fam = domain.family
    if fam in ("disk", "cassini"):
        return mpf(0)
    if fam == "ellipse":
        return domain.rho
    if fam != "joukowsky":
        raise ValueError(f"unknown family {fam}")
    with domain._wp():
        closed = domain.mu_closed
        R = domain.R_value
        w = mpf("0.9")
        tol = mpf(2) ** (-domain.precision_bits // 2)
        for _ in range(100 * domain.precision_bits):
            nxt = 1 / (R - w)
            if abs(nxt - w) < tol:
                w = nxt
                break
            w = nxt
        if abs(w - closed) > mpf("1e-20"):
            raise StructureError(f"mu recursion {w} disagrees with closed form {closed}")
        return closed


def mu_recursion(domain, start="0.9", steps=None):
    """Iterates of ``w -> 1/(R - w)`` (Joukowsky), as a list of mpfr."""
    if domain.family != "joukowsky":
        raise ValueError("mu recursion is defined for the joukowsky family")
    with domain._wp():
        R = domain.R_value
        w = mpf(start)
        out = [w]
        for _ in range(steps or domain.precision_bits):
            w = 1 / (R - w)
            out.append(w)
        return out


def _sample(z, label, phi_big, r, solutions):
    return RegionSample(
        z=to_complex(z),
        label=label,
        phi_big=phi_big,
        r=float(r),
        solutions=tuple((to_complex(w), m) for w, m in solutions),
        point=z,
    )


def _tie(m0, m1, tie_tol):
    return m0 - m1 <= tie_tol * m0


def _classify_disk(domain, z, cfg):
    w = (z - domain.center) / domain.capacity
    if w == 0:
        return _sample(z, 0, None, 0, ())
    return _sample(z, 1, w, abs(w), [(w, 1)])


def _classify_ellipse(domain, z, cfg):
    if z.imag == 0 and -1 <= z.real <= 1:
        return _sample(z, 0, None, domain.rho, ())
    w = domain._phi(z)
    return _sample(z, 1, w, abs(w), [(w, 1)])


def _cubic_discriminant(a, b, c, d):
    return 18 * a * b * c * d - 4 * b**3 * d + b * b * c * c - 4 * a * c**3 - 27 * a * a * d * d


def _classify_cassini(domain, z, cfg):
    xi = (z * z - 1) / domain.R_value
    if xi == 0:
        # z = 1: double root at w = 0; Sigma_2 = [sqrt(1-R^2), 1] contains it
        return _sample(z, 2, None, 0, [(mpc(0), 2)])
    roots = domain.cubic_roots(xi)
    inside = sorted((w for w in roots if abs(w) < 1), key=abs, reverse=True)
    if len(inside) != 2:
        raise SolverError(f"expected two cubic roots in |w|<1 at z={to_complex(z)}, got {len(inside)}")
    w0, w1 = inside
    if xi.imag == 0:
        # real coefficients: the discriminant decides between three real
        # roots and a conjugate pair, which Cardano only resolves to rounding
        disc = _cubic_discriminant(-domain.a, 1, -xi.real, domain.a * xi.real)
        if disc > 0:
            w0, w1 = sorted((mpc(w0.real), mpc(w1.real)), key=abs, reverse=True)
        elif disc < 0:
            w0 = gmpy2.mpc(w0.real, abs(w0.imag))
            w1 = w0.conjugate()
    m0, m1 = abs(w0), abs(w1)
    if _tie(m0, m1, cfg.tie_tol):
        if abs(w0 - w1) <= cfg.cluster_tol * m0:
            return _sample(z, 2, None, m0, [((w0 + w1) / 2, 2)])
        return _sample(z, 2, None, m0, [(w0, 1), (w1, 1)])
    return _sample(z, 1, w0, m0, [(w0, 1)])


def _classify_joukowsky(domain, z, cfg):
    m = domain.mu_closed
    cands = sorted((w for w in domain.preimages(z) if m < abs(w) < 1), key=abs, reverse=True)
    if not cands:
        return _sample(z, 0, None, m, ())
    w0 = cands[0]
    m0 = abs(w0)
    if len(cands) == 2 and _tie(m0, abs(cands[1]), cfg.tie_tol):
        w1 = cands[1]
        if abs(w0 - w1) <= cfg.cluster_tol * m0:
            return _sample(z, 2, None, m0, [((w0 + w1) / 2, 2)])
        return _sample(z, 2, None, m0, [(w0, 1), (w1, 1)])
    return _sample(z, 1, w0, m0, [(w0, 1)])


_CLASSIFIERS = {
    "disk": _classify_disk,
    "ellipse": _classify_ellipse,
    "cassini": _classify_cassini,
    "joukowsky": _classify_joukowsky,
}


def classify(domain, z, cfg=None):
    """Label, ``Phi`` and ``r`` at a point ``z`` of ``G_1``."""
    cfg = _cfg(domain, cfg)
    with domain._wp():
        z = mpc(z)
        if not domain.contains(z):
            raise DomainError(f"z={to_complex(z)} is not in G_1")
        return _CLASSIFIERS[domain.family](domain, z, cfg)


def classify_cassini(domain, z, cfg=None):
    if domain.family != "cassini":
        raise ValueError("expected a cassini domain")
    return classify(domain, z, cfg)


def classify_joukowsky(domain, z, cfg=None):
    if domain.family != "joukowsky":
        raise ValueError("expected a joukowsky domain")
    return classify(domain, z, cfg)


def Phi_prime(domain, sample):
    """``Phi'(z)`` at a label-1 sample.

    Cassini uses ``phi_int'(z) / h_phi'(Phi(z))``; the other families have
    ``Phi`` equal to a branch of ``psi^{-1}``, so ``Phi' = 1/psi'(Phi)``.
    """
    if sample.label != 1:
        raise PreconditionError(f"Phi' is defined on Sigma_1 only (label {sample.label})")
    with domain._wp():
        W = sample.phi_big
        if domain.family == "cassini":
            z = sample.point if sample.point is not None else sample.z
            return domain.phi_int_prime(z) / domain.h_phi_prime(W)
        return 1 / domain._psi_prime(W)


def gamma_curve(domain, n_points=200):
    """Closed polyline ``Gamma_R = {|w| < 1 : -R <= h_phi(w) <= 0}`` (cassini).

    Runs from ``1/b`` through the upper half plane to ``0`` and back along
    the conjugate branch.
    """
    if domain.family != "cassini":
        raise ValueError("Gamma_R is defined for the cassini family")
    with domain._wp():
        R = domain.R_value
        pi = gmpy2.const_pi()
        upper = [to_complex(1 / domain.b)]
        for k in range(1, n_points - 1):
            t = mpf(k) / (n_points - 1)
            xi = -R * (1 + gmpy2.cos(pi * t)) / 2
            pair = [w for w in domain.cubic_roots(xi) if abs(w) < 1]
            w = max(pair, key=lambda v: v.imag)
            upper.append(complex(float(w.real), abs(float(w.imag))))
        upper.append(0j)
    up = np.array(upper)
    return np.concatenate([up, np.conj(up[-2::-1])])


def sigma_segment(domain):
    lo, hi = domain.segment
    return float(lo), float(hi)


def sigma_cdf(domain, x):
    """``sigma([sqrt(1 - R^2), x])`` for the limit zero measure of a Cassini oval.

    Equal to ``theta_x / (2 pi)``, where ``theta_x = 2 (pi - |arg omega|)`` is
    the angle at 0 between the rays to the conjugate solutions ``omega`` of
    ``h_phi(w) = (x^2 - 1)/R``, measured through the negative real axis.  It
    increases from 0 at the left end of the segment to 1/2 at ``x = 1``.
    """
    if domain.family != "cassini":
        raise ValueError("sigma is defined for the cassini family")
    with domain._wp():
        lo, hi = domain.segment
        x = mpf(x)
        # float end points from sigma_segment may round just outside
        slack = mpf(2) ** -50
        if x < lo - slack or x > hi + slack:
            raise DomainError(f"x={float(x)} outside [{float(lo)}, {float(hi)}]")
        if x <= lo:
            return 0.0
        if x >= hi:
            return 0.5
        xi = mpc((x * x - 1) / domain.R_value)
        pair = [w for w in domain.cubic_roots(xi) if abs(w) < 1]
        w = max(pair, key=lambda v: v.imag)
        if w.imag == 0:
            return 0.0
        arg = abs(gmpy2.phase(w))
        return float(1 - arg / gmpy2.const_pi())


def sigma_cdf_array(domain, xs):
    return np.array([sigma_cdf(domain, x) for x in xs])


def sigma1_boundary(domain, n_points=20):
    """Probe points on ``dSigma_1 & G_1`` (double precision).

    Joukowsky: the image of the arc of ``|w| = mu`` outside the disk
    ``|w - 1/R| < 1/R``, plus the segment ``[R^2 mu^2 - 2, 2]``; the probes
    are split evenly between the two.
    """
    fam = domain.family
    if fam == "disk":
        return np.array([], dtype=complex)
    if fam in ("ellipse", "cassini"):
        lo, hi = (-1.0, 1.0) if fam == "ellipse" else sigma_segment(domain)
        k = np.arange(1, n_points + 1)
        return lo + (hi - lo) * k / (n_points + 1) + 0j
    R = float(domain.R_value)
    m = float(domain.mu_closed)
    n_arc = n_points - n_points // 2
    n_seg = n_points // 2
    t0 = np.arccos(R * m / 2)
    ts = t0 + (2 * np.pi - 2 * t0) * (np.arange(n_arc) + 0.5) / n_arc
    arc = [to_complex(domain.psi(complex(m * np.cos(t), m * np.sin(t)))) for t in ts]
    left = R * R * m * m - 2
    seg = left + (2 - left) * (np.arange(n_seg) + 0.5) / n_seg
    return np.concatenate([np.array(arc), seg + 0j])


def exceptional_set(domain, n_points=4000):
    """Dense samples of ``dSigma_1 & G_1`` (``{z0}`` for the disk)."""
    if domain.family == "disk":
        return np.array([to_complex(domain.center)])
    return sigma1_boundary(domain, n_points)


def region_probes(domain, label, count, margin=None, resolution=41):
    """``count`` grid points with the given label, at least ``margin`` from ``dSigma_1 & G_1``.

    Candidates come from a ``resolution``-square region map in row-major
    order; the probes are evenly spaced through that list, so they spread
    over the whole region.  ``margin`` defaults to 5% of the domain width.
    """
    rm = region_map(domain, resolution=resolution)
    if margin is None:
        margin = 0.05 * (rm.xs[-1] - rm.xs[0])
    bnd = exceptional_set(domain)
    cands = [s for s in rm.samples if s.label == label and np.min(np.abs(bnd - s.z)) >= margin]
    if len(cands) < count:
        raise ValueError(f"only {len(cands)} label-{label} grid points satisfy the margin")
    idx = np.linspace(0, len(cands) - 1, count).round().astype(int)
    return [cands[i].z for i in idx]


@dataclass(frozen=True)
class PoleRecursion:
    """Two sequences ``w_{n+1} = 1/(R - conj(w_n))`` seeded at both preimages."""

    z: complex
    mu: object
    sequences: tuple
    residuals: tuple = field(repr=False)

    @property
    def max_modulus(self):
        return max(float(abs(w)) for seq in self.sequences for w in seq)

    @property
    def max_residual(self):
        return max((r for res in self.residuals for r in res), default=0.0)

    def distances(self, k):
        return [float(abs(w - self.mu)) for w in self.sequences[k]]

    @property
    def monotone(self):
        for k in range(len(self.sequences)):
            d = self.distances(k)
            if any(b > a for a, b in zip(d, d[1:])):
                return False
        return True


def pole_recursion(domain, z, n_terms=40, cfg=None):
    """Both recursion sequences from a point ``z`` of ``Sigma_0`` (joukowsky).

    Residuals are ``|psi(w_{n+1}) - psi(1/conj(w_n))|``, skipping steps where
    ``w_n = 0`` (both sides are then the pole of ``psi``).
    """
    if domain.family != "joukowsky":
        raise ValueError("the pole recursion is defined for the joukowsky family")
    s = classify(domain, z, cfg)
    if s.label != 0:
        raise PreconditionError(f"z={s.z} has label {s.label}, expected Sigma_0")
    with domain._wp():
        R = domain.R_value
        seqs, resids = [], []
        for seed in domain.preimages(z):
            seq, res = [seed], []
            w = seed
            for _ in range(n_terms - 1):
                nxt = 1 / (R - w.conjugate())
                if w != 0:
                    res.append(float(abs(domain._psi(nxt) - domain._psi(1 / w.conjugate()))))
                seq.append(nxt)
                w = nxt
            seqs.append(tuple(seq))
            resids.append(tuple(res))
        return PoleRecursion(to_complex(mpc(z)), domain.mu_closed, tuple(seqs), tuple(resids))


# region maps


def _grid(bbox, resolution):
    x0, x1, y0, y1 = bbox
    xs = np.linspace(x0, x1, resolution)
    ys = np.linspace(y0, y1, resolution)
    if y0 < 0 < y1:
        ys[np.argmin(np.abs(ys))] = 0.0
    return xs, ys


def _classify_row(domain, y, xs, cfg):
    out = []
    for x in xs:
        z = complex(x, y)
        with domain._wp():
            inside = domain.contains(z)
        out.append(classify(domain, z, cfg) if inside else None)
    return out


@dataclass(frozen=True)
class RegionMap:
    """Labels on a rectangular grid; ``labels[i, j]`` is at ``xs[j] + i ys[i]``.

    Points outside ``G_1`` have label ``-1``.  ``boundary`` holds the
    polylines of ``dSigma_1 & G_1`` extracted by marching squares.
    """

    domain: object
    xs: np.ndarray
    ys: np.ndarray
    labels: np.ndarray
    r: np.ndarray
    phi: np.ndarray
    samples: tuple = field(repr=False)
    boundary: tuple = field(repr=False)

    def label_counts(self):
        vals, counts = np.unique(self.labels, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, counts) if v >= 0}

    def components(self, label):
        """Number of 4-connected components of cells with ``label``."""
        return int(measure.label(self.labels == label, connectivity=1).max())

    def real_axis_labels(self):
        i = int(np.argmin(np.abs(self.ys)))
        return self.xs, self.labels[i]

    def save_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["re(z)", "im(z)", "label", "re(Phi)", "im(Phi)", "r"])
            for s in self.samples:
                if s.phi_big is None:
                    pr = pi = ""
                else:
                    pr, pi = fmt(s.phi_big.real), fmt(s.phi_big.imag)
                w.writerow([repr(s.z.real), repr(s.z.imag), s.label, pr, pi, repr(s.r)])

    def figure(self, title=None):
        xs, ys = self.xs, self.ys
        dx = xs[1] - xs[0] if len(xs) > 1 else 1.0
        dy = ys[1] - ys[0] if len(ys) > 1 else 1.0
        fig = Figure((xs[0] - dx, xs[-1] + dx), (ys[0] - dy, ys[-1] + dy), title=title)
        for i, y in enumerate(ys):
            row = self.labels[i]
            j = 0
            while j < len(xs):
                lab = row[j]
                k = j
                while k + 1 < len(xs) and row[k + 1] == lab:
                    k += 1
                if lab >= 0:
                    fig.rect(xs[j] - dx / 2, y - dy / 2, (k - j + 1) * dx, dy, LABEL_COLORS[int(lab)])
                j = k + 1
        fig.polyline(level_curve(self.domain, 1, 512).points, stroke="black", width=1.5)
        for line in self.boundary:
            fig.polyline(line, stroke="black", width=1.0)
        fig.axes()
        return fig

    def save_svg(self, path, title=None):
        self.figure(title).save(path)


def _boundary(xs, ys, labels):
    indicator = ((labels == 1) | (labels < 0)).astype(float)
    lines = []
    for c in measure.find_contours(indicator, 0.5):
        rows, cols = c[:, 0], c[:, 1]
        y = np.interp(rows, np.arange(len(ys)), ys)
        x = np.interp(cols, np.arange(len(xs)), xs)
        lines.append(x + 1j * y)
    return tuple(lines)


def region_map(domain, bbox=None, resolution=101, cfg=None, jobs=1, precision_bits=128):
    """Classify a ``resolution x resolution`` grid over ``bbox``.

    Classification is done at ``precision_bits`` (labels need far less
    precision than the bases).  The grid always contains the real axis when
    ``bbox`` straddles it, so the segment ``Sigma_2`` is sampled exactly.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    dom = domain.with_precision(precision_bits) if precision_bits != domain.precision_bits else domain
    cfg = cfg or PrecisionConfig(precision_bits=precision_bits)
    bbox = bbox or domain.bounding_box()
    xs, ys = _grid(bbox, resolution)
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_classify_row, [dom] * len(ys), ys, [xs] * len(ys), [cfg] * len(ys)))
    else:
        rows = [_classify_row(dom, y, xs, cfg) for y in ys]
    labels = np.full((len(ys), len(xs)), -1, dtype=np.int8)
    r = np.full(labels.shape, np.nan)
    phi = np.full(labels.shape, np.nan + 0j)
    samples = []
    for i, row in enumerate(rows):
        for j, s in enumerate(row):
            if s is None:
                continue
            samples.append(s)
            labels[i, j] = s.label
            r[i, j] = s.r
            if s.phi_big is not None:
                phi[i, j] = to_complex(s.phi_big)
    return RegionMap(
        domain=domain,
        xs=xs,
        ys=ys,
        labels=labels,
        r=r,
        phi=phi,
        samples=tuple(samples),
        boundary=_boundary(xs, ys, labels),
    )


def gamma_figure(domain, n_points=200, title=None):
    pts = gamma_curve(domain, n_points)
    fig = Figure((-1.05, 1.05), (-1.05, 1.05), width=420, title=title)
    t = np.linspace(0, 2 * np.pi, 257)
    fig.polyline(np.exp(1j * t), stroke="#777777", width=1.0)
    fig.polyline(pts, stroke="#d62728", width=1.5)
    fig.axes()
    return fig
