"""Command-line front end: ``bergman {basis,zeros,regions,asymptotics,verify}``.

Configuration comes from flags and an optional ``--config`` JSON file; flags
win.  Outputs go to ``<out>/<family>/<command>/``.  Exit codes: 0 success,
1 verification failure, 2 configuration error, 3 numerical failure.
"""

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, acceptance, regions, zeros
from . import asymptotics as asy
from .curves import level_curve, make_domain
from .errors import BergmanError, ConfigError, DomainError
from .gram import OrthoBasis, build_basis, orthonormality_residual
from .precision import PrecisionConfig, default_precision_bits, fmt
from .svg import Figure

log = logging.getLogger("bergman")

DEFAULT_PARAMS = {
    "disk": {"z0": 0, "s": 1},
    "ellipse": {"A": 1.25},
    "cassini": {"a": "-0.26"},
    "joukowsky": {"R": 2.5},
}
FAMILY_KEYS = {"disk": ("z0", "s"), "ellipse": ("A",), "cassini": ("R", "a"), "joukowsky": ("R",)}
ROOT_COLORS = ["#08519c", "#d62728", "#31a354", "#756bb1", "#e6550d"]


def parse_complex(text):
    """``"1.5"``, ``"1+2j"`` or ``"1.5,0.2"`` as a complex number."""
    if isinstance(text, (int, float, complex)):
        return complex(text)
    if isinstance(text, (list, tuple)):
        return complex(float(text[0]), float(text[1]))
    s = str(text).replace(" ", "")
    try:
        if "," in s:
            re, im = s.split(",")
            return complex(float(re), float(im))
        return complex(s)
    except ValueError:
        raise ConfigError(f"cannot parse {text!r} as a complex number") from None


def _degrees(text):
    """``"50"``, ``"10,25,50"`` or ``"20:80:5"`` (inclusive) as a list of ints."""
    if isinstance(text, int):
        return [text]
    if isinstance(text, list):
        return [int(n) for n in text]
    s = str(text)
    try:
        if ":" in s:
            parts = [int(p) for p in s.split(":")]
            lo, hi = parts[:2]
            step = parts[2] if len(parts) > 2 else 1
            return list(range(lo, hi + 1, step))
        return [int(p) for p in s.split(",") if p]
    except ValueError:
        raise ConfigError(f"cannot parse degrees {text!r}") from None


class RunConfig:
    """Merged configuration; attribute access with defaults."""

    def __init__(self, args):
        data = {}
        if getattr(args, "config", None):
            try:
                with open(args.config) as fh:
                    data = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {args.config}: {exc}") from None
            if not isinstance(data, dict):
                raise ConfigError("config file must hold a JSON object")
        for k, v in vars(args).items():
            if v is not None and k not in ("config", "func", "command"):
                data[k] = v
        self.data = data
        self.command = args.command
        self.family = data.get("family", "cassini")
        if self.family not in DEFAULT_PARAMS:
            raise ConfigError(f"unknown family {self.family!r}; expected one of {sorted(DEFAULT_PARAMS)}")
        bits = data.get("precision_bits")
        self.precision_bits = int(bits) if bits is not None else default_precision_bits()
        self.cfg = PrecisionConfig(precision_bits=self.precision_bits)
        self.n_max = int(data.get("n_max", 50))
        if self.n_max < 0:
            raise ConfigError("n_max must be >= 0")
        self.seed = int(data.get("seed", 0))
        self.jobs = int(data.get("jobs") or len(os.sched_getaffinity(0)))
        self.resolution = int(data.get("resolution", 101))
        self.out = data.get("out", "out")

    def get(self, key, default=None):
        return self.data.get(key, default)

    def params(self):
        given = {k: self.data[k] for k in FAMILY_KEYS[self.family] if k in self.data}
        if self.family == "disk" and "z0" in given:
            given["z0"] = parse_complex(given["z0"])
        return given or dict(DEFAULT_PARAMS[self.family])

    def domain(self):
        return make_domain(self.family, precision_bits=self.precision_bits, **self.params())

    def outdir(self, family=None):
        path = os.path.join(self.out, family or self.family, self.command)
        os.makedirs(path, exist_ok=True)
        return path


def _write_json(path, data):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _basis(rc):
    """Basis from ``--basis`` if given, otherwise built to ``n_max``."""
    path = rc.get("basis")
    if path:
        try:
            b = OrthoBasis.load_json(path)
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigError(f"cannot load basis {path}: {exc}") from None
        return b
    return build_basis(rc.domain(), rc.n_max, rc.cfg)


def cmd_basis(rc):
    b = build_basis(rc.domain(), rc.n_max, rc.cfg)
    d = rc.outdir()
    b.save_json(os.path.join(d, "basis.json"))
    b.save_csv(os.path.join(d, "basis.csv"))
    resid = orthonormality_residual(b)
    _write_json(
        os.path.join(d, "summary.json"),
        {
            "family": b.domain.family,
            "params": b.domain.params,
            "n_max": b.n_max,
            "precision_bits": b.precision_bits,
            "quad_nodes": b.quad_nodes,
            "orthonormality_residual": fmt(resid),
            "ortho_tol": rc.cfg.ortho_tol,
        },
    )
    print(f"orthonormality residual: {float(resid):.3e} (ortho_tol {rc.cfg.ortho_tol:.3e})")
    print(f"wrote {d}")
    return 0


def _zeros_job(args):
    basis, n, seed = args
    return zeros.find_zeros(basis, n, seed=seed)


def zeros_figure(domain, rootsets, title=None):
    outline = level_curve(domain, 1, 512).points
    pad = 0.08 * max(np.ptp(outline.real), np.ptp(outline.imag))
    fig = Figure(
        (outline.real.min() - pad, outline.real.max() + pad),
        (outline.imag.min() - pad, outline.imag.max() + pad),
        title=title,
    )
    fig.axes()
    fig.polyline(outline, stroke="black", width=1.5, closed=True)
    for i, rs in enumerate(rootsets):
        fig.points(np.array([complex(float(r.real), float(r.imag)) for r, _ in rs.roots]), fill=ROOT_COLORS[i % 5])
    return fig


def cmd_zeros(rc):
    degrees = _degrees(rc.get("n", rc.n_max))
    if min(degrees) < 1:
        raise ConfigError("zero degrees must be >= 1")
    rc.n_max = max(rc.n_max, max(degrees)) if not rc.get("basis") else rc.n_max
    b = _basis(rc)
    if max(degrees) > b.n_max:
        raise ConfigError(f"basis has n_max={b.n_max}, degree {max(degrees)} requested")
    jobs = [(b, n, rc.seed) for n in degrees]
    if rc.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(rc.jobs, len(jobs))) as ex:
            sets = list(ex.map(_zeros_job, jobs))
    else:
        sets = [_zeros_job(j) for j in jobs]
    d = rc.outdir(b.domain.family)
    path = os.path.join(d, "roots.csv")
    for i, rs in enumerate(sets):
        rs.save_csv(path, append=i > 0)
    summary = {
        "family": b.domain.family,
        "params": b.domain.params,
        "seed": rc.seed,
        "degrees": {str(rs.n): {"sites": rs.sites, "deflated": rs.deflated, "max_residual": rs.max_residual} for rs in sets},
    }
    _write_json(os.path.join(d, "summary.json"), summary)
    label = ", ".join(f"p_{rs.n}" for rs in sets)
    zeros_figure(b.domain, sets, title=f"Zeros of {label} ({b.domain.family})").save(os.path.join(d, "zeros.svg"))
    for rs in sets:
        print(f"n={rs.n}: {rs.sites} sites, {rs.deflated} deflated, residual {rs.max_residual:.2e}")
    print(f"wrote {d}")
    return 0


def cmd_regions(rc):
    dom = rc.domain()
    bbox = rc.get("bbox")
    if bbox is not None:
        bbox = tuple(float(v) for v in (bbox.split(",") if isinstance(bbox, str) else bbox))
        if len(bbox) != 4:
            raise ConfigError("bbox needs four numbers x0,x1,y0,y1")
    rm = regions.region_map(dom, bbox=bbox, resolution=rc.resolution, jobs=rc.jobs)
    d = rc.outdir()
    rm.save_csv(os.path.join(d, "regions.csv"))
    rm.save_svg(os.path.join(d, "regions.svg"), title=f"Regions Sigma_0/1/2 ({dom.family})")
    summary = {"family": dom.family, "params": dom.params, "resolution": rc.resolution, "labels": rm.label_counts()}
    summary["mu"] = fmt(regions.mu(dom))
    if dom.family == "cassini":
        regions.gamma_figure(dom, title=f"Gamma_R, R={float(dom.R_value):.4f}").save(os.path.join(d, "gamma.svg"))
        summary["segment"] = [float(x) for x in regions.sigma_segment(dom)]
    _write_json(os.path.join(d, "summary.json"), summary)
    print("label counts: " + ", ".join(f"{k}: {v}" for k, v in sorted(rm.label_counts().items())))
    print(f"wrote {d}")
    return 0


def cmd_asymptotics(rc):
    b = _basis(rc)
    dom = b.domain
    ns = [n for n in _degrees(rc.get("n", f"{min(20, b.n_max)}:{b.n_max}")) if 1 <= n <= b.n_max]
    if len(ns) < 2:
        raise ConfigError("need at least two degrees within the basis range")
    points = rc.get("points")
    if points:
        zs = [parse_complex(p) for p in (points.split(";") if isinstance(points, str) else points)]
    else:
        zs = regions.region_probes(dom, 1, 5) if dom.family != "disk" else [dom.psi(1.5)]
    rows, fits = [], []
    for z in zs:
        z = complex(z) if not hasattr(z, "real") else complex(float(z.real), float(z.imag))
        try:
            s = regions.classify(dom, z)
        except DomainError:
            s = None
        if s is None:
            kind = "carleman"
            res = [asy.carleman_residual(b, z, n) for n in ns]
        elif s.label == 1:
            kind = "strong"
            res = [asy.strong_residual(b, z, n, s) for n in ns]
        else:
            kind = None
            res = []
        entry = {"z": [z.real, z.imag], "label": None if s is None else s.label, "r": None if s is None else s.r}
        if kind:
            rows.extend((z, n, r) for n, r in zip(ns, res))
            fit = asy.fit_slope(ns, [asy.log_abs(r) for r in res])
            entry.update(kind=kind, **fit.to_json())
        entry["nth_root"] = asy.nth_root(b, z, ns[-1])
        fits.append(entry)
    d = rc.outdir(dom.family)
    asy.save_residual_csv(os.path.join(d, "residuals.csv"), rows)
    _write_json(os.path.join(d, "fits.json"), {"family": dom.family, "params": dom.params, "n": ns, "points": fits})
    for e in fits:
        slope = f"slope {e['slope']:+.4f} ({e['kind']})" if "slope" in e else "no residual (Sigma_0/Sigma_2)"
        print(f"z={e['z'][0]:+.4f}{e['z'][1]:+.4f}i: {slope}, |p_n|^(1/n)={e['nth_root']:.4f}")
    print(f"wrote {d}")
    return 0


def cmd_verify(rc):
    only = rc.get("only")
    if isinstance(only, str):
        only = [k for k in only.split(",") if k]
    unknown = set(only or ()) - set(acceptance.KEYS)
    if unknown:
        raise ConfigError(f"unknown criteria {sorted(unknown)}; expected some of {list(acceptance.KEYS)}")
    results = []
    path = rc.get("basis")
    if path:
        # a supplied basis is checked for orthonormality; other criteria only on request
        b = _basis(rc)
        resid = float(orthonormality_residual(b))
        res = acceptance.CriterionResult(
            3,
            "orthonormality",
            f"Gram residual of {os.path.basename(path)} < 1e-20",
            resid < 1e-20,
            {"file": path, "residual": resid, "tolerance": 1e-20},
        )
        print(res.line())
        results.append(res)
        only = [k for k in only or () if k != "orthonormality"]
        if only:
            results += acceptance.run_all(only, rc.precision_bits, echo=print)
    else:
        results = acceptance.run_all(only, rc.precision_bits, echo=print)
    passed = all(r.passed for r in results)
    d = rc.outdir("all")
    report = {
        "passed": passed,
        "precision_bits": rc.precision_bits,
        "criteria": [{k: v for k, v in r.to_json().items() if k != "seconds"} for r in results],
    }
    _write_json(os.path.join(d, "report.json"), report)
    print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed; wrote {d}")
    return 0 if passed else 1


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (flags override)")
    common.add_argument("--family", choices=sorted(DEFAULT_PARAMS))
    common.add_argument("--R", type=float, help="cassini or joukowsky parameter")
    common.add_argument("--a", help="cassini parameter a in (-1/3, 0), alternative to --R")
    common.add_argument("--A", type=float, help="ellipse semi-major axis (foci at -1 and 1)")
    common.add_argument("--z0", help="disk center, e.g. 1+0.5j or 1,0.5")
    common.add_argument("--s", type=float, help="disk radius")
    common.add_argument("--n-max", dest="n_max", type=int, help="highest degree (default 50)")
    common.add_argument("--precision-bits", dest="precision_bits", type=int, help="working precision")
    common.add_argument("--out", help="output root (default out)")
    common.add_argument("--seed", type=int, help="root-finder jitter seed (default 0)")
    common.add_argument("--jobs", type=int, help="worker processes (default: available CPUs)")
    common.add_argument("-v", "--verbose", action="store_true", default=None)

    p = argparse.ArgumentParser(prog="bergman", description="Bergman polynomials on analytic Jordan domains")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("basis", parents=[common], help="orthonormal basis to n_max (JSON + CSV)")
    s.set_defaults(func=cmd_basis)

    s = sub.add_parser("zeros", parents=[common], help="zeros of p_n (CSV + SVG)")
    s.add_argument("--n", help="degrees: 50, 60,70,80 or 20:80:10 (default n_max)")
    s.add_argument("--basis", help="reuse a basis JSON file")
    s.set_defaults(func=cmd_zeros)

    s = sub.add_parser("regions", parents=[common], help="Sigma_0/1/2 region map (CSV + SVG)")
    s.add_argument("--resolution", type=int, help="grid points per axis (default 101)")
    s.add_argument("--bbox", help="x0,x1,y0,y1 (default: padded bounding box of the curve)")
    s.set_defaults(func=cmd_regions)

    s = sub.add_parser("asymptotics", parents=[common], help="residual decay and nth-root growth")
    s.add_argument("--n", help="degrees (default 20:n_max)")
    s.add_argument("--points", help="points separated by ';' (default: five Sigma_1 probes)")
    s.add_argument("--basis", help="reuse a basis JSON file")
    s.set_defaults(func=cmd_asymptotics)

    s = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    s.add_argument("--only", help=f"comma-separated subset of: {','.join(acceptance.KEYS)}")
    s.add_argument("--basis", help="check orthonormality of this basis file instead")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(RunConfig(args))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BergmanError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
