"""Region structure and zeros for the Joukowsky level curve R = 2.5.

The domain splits into Sigma_0 (poles of the continued map, r = mu = 1/2),
Sigma_1 (analytic continuation of the exterior map) and the segment
Sigma_2 = (-0.4375, 2]. The pole recursion shows the iterates staying in
|w| <= mu, and the zeros of p_80 are overlaid on the region map.
Writes joukowsky_regions.svg and joukowsky_zeros.svg.

    python3 demos/joukowsky_regions.py
"""

from bergman import acceptance, regions, zeros
from bergman.cli import zeros_figure

dom = acceptance.joukowsky()
print(f"mu = {regions.mu(dom)}")
print(f"mu recursion tail: {[float(w) for w in regions.mu_recursion(dom)[-3:]]}")

rm = regions.region_map(dom, resolution=121)
print("label counts:", rm.label_counts())
print("components: Sigma_0 =", rm.components(0), " Sigma_1 =", rm.components(1))
rm.save_svg("joukowsky_regions.svg", title="Joukowsky R = 2.5: Sigma_0, Sigma_1, Sigma_2")

for z in (-1.6, -2.0 + 0.3j):
    rec = regions.pole_recursion(dom, z, 40)
    print(f"pole recursion at {z}: max |w| = {rec.max_modulus:.4f}, residual = {rec.max_residual:.1e}")

basis = acceptance.basis_for("joukowsky", 80)
rs = zeros.find_zeros(basis, 80)
print(f"p_80: {rs.sites} zeros, backward error {rs.max_residual:.1e}")
zeros_figure(dom, [rs], title="Joukowsky R = 2.5, zeros of p_80").save("joukowsky_zeros.svg")
print("wrote joukowsky_regions.svg, joukowsky_zeros.svg")
