"""Zeros of Bergman polynomials on a Cassini oval.

The oval |z^2 - 1| < R, Re z > 0 is built from a = -0.26. Half of the
zeros of p_n pile up at z = 1 (a zero of order floor(n/2)), the rest are
simple, lie on the segment [sqrt(1 - R^2), 1] and distribute like the
measure sigma. Writes cassini_zeros.svg to the working directory.

    python3 demos/cassini_zeros.py
"""

import math

from bergman import acceptance, regions, zeros
from bergman.cli import zeros_figure

basis = acceptance.basis_for("cassini", 100)
dom = basis.domain
R = float(dom.R_value)
print(f"R = {R:.6f}, segment = [{math.sqrt(1 - R * R):.6f}, 1]")

sets = []
for n in (25, 50, 100):
    rs = zeros.find_zeros(basis, n)
    rep = zeros.verify_cassini_structure(basis, n)
    ks = zeros.kolmogorov_vs_limit(zeros.counting_measure(rs), dom)
    mult = max(m for _, m in rs.roots)
    print(f"n = {n:3d}: {rs.sites} sites, order at 1 = {mult}, structure ok = {rep.passed}, KS = {ks:.4f}")
    sets.append(rs)

lo, hi = regions.sigma_segment(dom)
for x in (lo + 0.1 * (hi - lo), 0.5 * (lo + hi), hi - 0.1 * (hi - lo)):
    print(f"sigma CDF at x = {x:.4f}: {regions.sigma_cdf(dom, x):.4f}")

zeros_figure(dom, sets[-1:], title="Cassini oval, zeros of p_100").save("cassini_zeros.svg")
print("wrote cassini_zeros.svg")
