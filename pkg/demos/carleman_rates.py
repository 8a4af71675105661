"""Geometric decay of the Carleman residual on level curves.

Outside the closure of G_1 the normalized polynomial
p_n / (sqrt(n+1) Phi^n Phi') tends to 1. On L_1 the residual decays at
least like rho^n, so the fitted ratio should not exceed rho (Cassini decays
faster). Inside the domain |p_n(z)|^(1/n) approaches r(z), slowly, because
of the factor (sqrt(n+1)|Phi'|)^(1/n).

    python3 demos/carleman_rates.py
"""

import cmath
import math

import numpy as np

from bergman import acceptance, regions
from bergman import asymptotics as asy
from bergman.precision import log_abs

for family in ("cassini", "joukowsky"):
    basis = acceptance.basis_for(family, 60)
    rho = float(basis.domain.rho)
    ns = list(range(20, 61, 4))
    worst = [max(log_abs(asy.carleman_residual_at(basis, cmath.rect(1, t), n))
                 for t in np.linspace(0, 2 * math.pi, 16, endpoint=False)) for n in ns]
    fit = asy.fit_slope(ns, worst)
    print(f"{family:9s} rho = {rho:.4f}  fitted ratio on L_1 = {fit.ratio:.4f}")

basis = acceptance.basis_for("joukowsky", 80)
dom = basis.domain
for z in regions.region_probes(dom, 1, 4):
    r = regions.classify(dom, z).r
    est = [asy.nth_root(basis, z, n) for n in (20, 40, 80)]
    print(f"z = {z:.3f}  r(z) = {r:.4f}  |p_n|^(1/n) at n = 20, 40, 80: " + ", ".join(f"{e:.4f}" for e in est))
