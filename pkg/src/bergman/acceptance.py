"""The acceptance suite: thirteen numerical criteria with fixed thresholds.

Each criterion is a function returning a :class:`CriterionResult`; they are
registered in :data:`CRITERIA` under a short key used by ``bergman verify
--only``.  Bases are cached per process, so running the whole suite builds
each basis once.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from functools import lru_cache

import gmpy2
import numpy as np
from skimage import measure

from . import asymptotics as asy
from . import regions, zeros
from .curves import Cassini, Disk, Ellipse, Joukowsky
from .gram import build_basis, orthonormality_residual
from .precision import PrecisionConfig, log_abs, mpc, working_precision

log = logging.getLogger(__name__)

CASSINI_A = "-0.26"
JOUKOWSKY_R = 2.5


@dataclass
class CriterionResult:
    id: int
    key: str
    title: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.id:2d} {self.key}: {self.title}"

    def to_json(self):
        return {
            "id": self.id,
            "key": self.key,
            "title": self.title,
            "passed": self.passed,
            "seconds": round(self.seconds, 3),
            "details": self.details,
        }


@lru_cache(maxsize=None)
def cassini(bits=512):
    return Cassini.from_a(CASSINI_A, bits)


@lru_cache(maxsize=None)
def joukowsky(bits=512):
    return Joukowsky(R=JOUKOWSKY_R, precision_bits=bits)


@lru_cache(maxsize=None)
def basis_for(family, n_max, bits=512):
    dom = {"cassini": cassini, "joukowsky": joukowsky}[family](bits)
    return build_basis(dom, n_max, PrecisionConfig(precision_bits=bits))


@lru_cache(maxsize=None)
def roots_for(family, n, bits=512):
    return zeros.find_zeros(basis_for(family, max(n, _NMAX[family]), bits), n)


_NMAX = {"cassini": 100, "joukowsky": 80}


def _f(x):
    return float(x)


# 1
def disk_closed_form(bits=512, n_max=60, tol=1e-30):
    worst = 0.0
    for z0, s in ((0, 1), (1, 2)):
        dom = Disk(z0=z0, s=s, precision_bits=bits)
        b = build_basis(dom, n_max, PrecisionConfig(precision_bits=bits))
        with working_precision(bits):
            z0m, sm = mpc(z0), dom.capacity
            for n in range(n_max + 1):
                # sqrt(n+1) s^{-n-1} (z - z0)^n, expanded
                c = [math.comb(n, k) * (-z0m) ** (n - k) for k in range(n + 1)]
                scale = gmpy2.sqrt(gmpy2.mpfr(n + 1)) / sm ** (n + 1)
                exact = [scale * x for x in c]
                ref = max(abs(x) for x in exact)
                err = max(abs(x - y) for x, y in zip(b.poly(n), exact)) / ref
                worst = max(worst, _f(err))
    return worst < tol, {"max_relative_error": worst, "tolerance": tol, "n_max": n_max}


# 2
def ellipse_chebyshev(bits=512, n_max=30, A=1.25, tol=1e-20):
    dom = Ellipse(A=A, precision_bits=bits)
    b = build_basis(dom, n_max, PrecisionConfig(precision_bits=bits))
    worst = 0.0
    with working_precision(bits):
        pi = gmpy2.const_pi()
        for n in range(1, n_max + 1):
            rs = zeros.find_zeros(b, n)
            got = sorted((r for r, m in rs.roots for _ in range(m)), key=lambda r: r.real)
            want = sorted(gmpy2.cos(k * pi / (n + 1)) for k in range(1, n + 1))
            worst = max(worst, max(_f(abs(g - w)) for g, w in zip(got, want)))
    return worst < tol, {"max_root_error": worst, "tolerance": tol, "A": A, "n_max": n_max}


# 3
def orthonormality(bits=512, n_max=60, tol=1e-20):
    out = {}
    for fam in ("cassini", "joukowsky"):
        b = basis_for(fam, _NMAX[fam], bits).truncate(n_max)
        out[fam] = orthonormality_residual(b)
    return all(v < tol for v in out.values()), {"residual": out, "tolerance": tol, "n_max": n_max}


# 4
def cassini_parameters(bits=512, tol=5e-4):
    dom = cassini(bits)
    R = _f(dom.R_value)
    left = _f(dom.segment[0])
    ok = abs(R - 0.8926) <= tol and abs(left - 0.4506) <= tol
    return ok, {"a": CASSINI_A, "R": R, "sqrt(1-R^2)": left, "tolerance": tol}


# 5
def carleman_rates(bits=512, ns=tuple(range(20, 61, 2)), n_theta=32, margin=0.25):
    b = basis_for("cassini", 100, bits)
    dom = b.domain
    rho = _f(dom.rho)
    ts = np.linspace(0, 2 * np.pi, n_theta, endpoint=False)
    out, ok = {}, True
    for name, r in (("L_1", 1.0), ("L_r", (1 + rho) / 2)):
        logs = []
        for n in ns:
            logs.append(max(log_abs(asy.carleman_residual_at(b, r * np.exp(1j * t), n)) for t in ts))
        fit = asy.fit_slope(ns, logs)
        theory = math.log(rho) if r == 1.0 else math.log(rho / r)
        bound = theory + margin * abs(theory)
        out[name] = {"r": r, "slope": fit.slope, "theory": theory, "bound": bound}
        ok &= fit.slope <= bound
    return ok, {"rho": rho, "fits": out, "n": [ns[0], ns[-1]]}


# 6
def strong_asymptotics(bits=512, ns=tuple(range(20, 81, 5)), n_probes=10, factor=1e3):
    out, ok = {}, True
    for fam in ("cassini", "joukowsky"):
        b = basis_for(fam, _NMAX[fam], bits)
        rows = []
        for z in regions.region_probes(b.domain, 1, n_probes):
            s = regions.classify(b.domain, z)
            logs = [log_abs(asy.strong_residual(b, z, n, s)) for n in ns]
            fit = asy.fit_slope(ns, logs)
            drop = logs[0] - logs[-1]
            good = fit.slope < 0 and drop >= math.log(factor)
            ok &= good
            rows.append({"z": [z.real, z.imag], "slope": fit.slope, "log10_drop": drop / math.log(10), "passed": good})
        out[fam] = rows
    return ok, {"probes": out, "n": [ns[0], ns[-1]], "required_drop": factor}


# 7
def nth_root_growth(bits=512, n=80, tol=0.02):
    probes = []
    for fam, label, count in (("cassini", 1, 7), ("joukowsky", 1, 7), ("joukowsky", 0, 6)):
        b = basis_for(fam, _NMAX[fam], bits)
        for z in regions.region_probes(b.domain, label, count):
            s = regions.classify(b.domain, z)
            v = asy.nth_root(b, z, n)
            probes.append(
                {"family": fam, "label": label, "z": [z.real, z.imag], "r": s.r, "value": v, "deviation": v - s.r}
            )
    worst = max(abs(p["deviation"]) for p in probes)
    failing = sum(abs(p["deviation"]) > tol for p in probes)
    return worst <= tol, {"n": n, "tolerance": tol, "max_deviation": worst, "failing": failing, "probes": probes}


# 8
def cassini_structure(bits=512, degrees=(10, 25, 50), tol=1e-20):
    b = basis_for("cassini", 100, bits)
    reports, ok = {}, True
    for n in degrees:
        rep = zeros.verify_cassini_structure(b, n, deriv_tol=tol)
        reports[n] = rep.to_json()
        ok &= rep.passed
    sites = roots_for("cassini", 50, bits).sites
    ok &= sites == 26
    return ok, {"reports": reports, "sites_n50": sites}


# 9
def zero_measure(bits=512, tol=0.08):
    dom = cassini(bits)
    d = {n: zeros.kolmogorov_vs_limit(zeros.counting_measure(roots_for("cassini", n, bits)), dom) for n in (50, 100)}
    return d[100] < tol and d[100] < d[50], {"ks_n50": d[50], "ks_n100": d[100], "tolerance": tol}


# 10
def joukowsky_geometry(bits=512, resolution=121):
    dom = joukowsky(bits)
    m = regions.mu(dom)
    exact = m == 0.5
    steps = regions.mu_recursion(dom)
    rec_err = _f(abs(steps[-1] - m))
    rm = regions.region_map(dom, resolution=resolution)
    xs, lab = rm.real_axis_labels()
    endpoint = _f(dom.R_value**2 * m * m - 2)
    bracket = None
    for j in range(len(xs) - 1):
        if lab[j] == 0 and lab[j + 1] == 2:
            bracket = (float(xs[j]), float(xs[j + 1]))
    found = bracket is not None and bracket[0] <= endpoint <= bracket[1]
    counts = rm.label_counts()
    topo = {
        "labels": sorted(counts),
        "sigma0_components": rm.components(0),
        "sigma1_components": rm.components(1),
        "complement_components": int(measure.label(rm.labels != 0, connectivity=2).max()),
    }
    topo_ok = (
        topo["labels"] == [0, 1, 2]
        and topo["sigma0_components"] == 1
        and topo["sigma1_components"] == 1
        and topo["complement_components"] == 1
    )
    ok = exact and rec_err < 1e-20 and found and topo_ok
    return ok, {
        "mu": _f(m),
        "mu_exact": exact,
        "recursion_error": rec_err,
        "sigma2_endpoint": endpoint,
        "bracket": bracket,
        "topology": topo,
    }


# 11
def zero_attraction(bits=512, ladder=(60, 70, 80), floor_ns=(40, 50, 60, 70, 80), radius=0.05, margin=0.05):
    dom = joukowsky(bits)
    roots = {n: roots_for("joukowsky", n, bits) for n in sorted(set(ladder) | set(floor_ns))}
    probe_rep = zeros.zero_attraction_check(dom, {n: roots[n] for n in ladder}, probe_radius=radius, n_floor=10**9)
    floor_rep = zeros.zero_attraction_check(dom, {n: roots[n] for n in floor_ns}, probes=[], n_floor=40, margin=margin)
    misses = [p for p in probe_rep.probes if not p["hit"]]
    ok = not misses and not floor_rep.violations
    return ok, {
        "probe_radius": radius,
        "probes": probe_rep.probes,
        "missed_probes": len(misses),
        "worst_probe_distance": max(p["distance"] for p in probe_rep.probes),
        "interior_violations": floor_rep.violations,
    }


# 12
def integral_representation(bits=512, ns=tuple(range(20, 61, 5)), margin=0.25):
    cas = basis_for("cassini", 100, bits)
    rho = _f(cas.domain.rho)
    rows, ok = [], True
    # the trapezoidal rule needs ~bits/(1 - r) nodes, so keep r(z) <= 0.8
    inner = [z for z in regions.region_probes(cas.domain, 1, 12) if regions.classify(cas.domain, z).r <= 0.8]
    for z in inner[:3] + regions.region_probes(cas.domain, 2, 2, margin=0):
        logs = [log_abs(asy.integral_representation(cas, z, n)[1]) for n in ns]
        fit = asy.fit_slope(ns, logs)
        tau = asy.nth_root_growth(cas, z, ns)
        bound = math.log(tau * rho) + margin * abs(math.log(tau * rho))
        good = fit.slope <= bound
        ok &= good
        rows.append({"z": [z.real, z.imag], "slope": fit.slope, "tau": tau, "bound": bound, "passed": good})
    cfg = PrecisionConfig(precision_bits=bits)
    disk = build_basis(Disk(z0=1, s=2, precision_bits=bits), 40, cfg)
    worst = 0.0
    for z in (1.5, 1 + 1j, 0.2 - 0.5j, 2.4, 1 - 1.8j):
        for n in range(0, 41):
            worst = max(worst, _f(abs(asy.integral_representation(disk, z, n, cfg)[1])))
    ok &= worst <= cfg.quad_tol
    return ok, {"cassini": rows, "disk_max_eps": worst, "disk_tolerance": cfg.quad_tol}


# 13
def pole_recursion(bits=512, n_terms=40, tol=1e-25):
    dom = joukowsky(bits)
    rows, ok = [], True
    for z in regions.region_probes(dom, 0, 3):
        rec = regions.pole_recursion(dom, z, n_terms)
        inside = rec.max_modulus <= _f(rec.mu) * (1 + 1e-30)
        good = inside and rec.max_residual < tol and rec.monotone
        ok &= good
        rows.append(
            {
                "z": [z.real, z.imag],
                "max_modulus": rec.max_modulus,
                "max_residual": rec.max_residual,
                "monotone": rec.monotone,
                "final_distance": max(rec.distances(0)[-1], rec.distances(1)[-1]),
            }
        )
    return ok, {"mu": _f(dom.mu_closed), "probes": rows, "tolerance": tol}


CRITERIA = [
    (1, "disk", "disk closed form to 1e-30", disk_closed_form),
    (2, "ellipse", "ellipse zeros equal cos(k pi/(n+1)) to 1e-20, n <= 30", ellipse_chebyshev),
    (3, "orthonormality", "Gram residual < 1e-20 at n_max = 60 (cassini, joukowsky)", orthonormality),
    (4, "cassini_params", "a = -0.26 gives R = 0.8926 and sqrt(1-R^2) = 0.4506 (+-5e-4)", cassini_parameters),
    (5, "carleman", "Carleman residual slopes on L_1 and L_r within 25% of theory", carleman_rates),
    (6, "strong", "strong residual drops 1e3 from n=20 to n=80 at Sigma_1 probes", strong_asymptotics),
    (7, "nth_root", "|p_80|^(1/80) within 0.02 of r(z) at 20 probes", nth_root_growth),
    (8, "cassini_structure", "p_n = (z-1)^floor(n/2) q_n with simple zeros of q_n on the segment", cassini_structure),
    (9, "zero_measure", "Kolmogorov distance to sigma + delta_1/2 < 0.08 at n=100 and decreasing", zero_measure),
    (10, "geometry", "mu(2.5) = 0.5, Sigma_2 endpoint -0.4375, three-region topology", joukowsky_geometry),
    (11, "attraction", "zeros within 0.05 of 20 boundary probes; none deep in Sigma_1", zero_attraction),
    (12, "integral", "integral representation remainder decays at the predicted rate", integral_representation),
    (13, "pole_recursion", "pole recursion stays in |w| <= mu, residual < 1e-25, monotone", pole_recursion),
]

KEYS = {key: (cid, title, fn) for cid, key, title, fn in CRITERIA}


def run_criterion(key, bits=512):
    cid, title, fn = KEYS[key]
    t0 = time.perf_counter()
    passed, details = fn(bits=bits)
    return CriterionResult(cid, key, title, bool(passed), details, time.perf_counter() - t0)


def run_all(only=None, bits=512, echo=None):
    keys = [k for _, k, _, _ in CRITERIA if not only or k in only]
    unknown = set(only or ()) - set(KEYS)
    if unknown:
        raise KeyError(f"unknown criteria: {sorted(unknown)}")
    results = []
    for k in keys:
        res = run_criterion(k, bits)
        if echo:
            echo(res.line())
        results.append(res)
    return results
