import cmath
import math

import gmpy2
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bergman import asymptotics as asy
from bergman import regions
from bergman.curves import Disk, Ellipse
from bergman.errors import DomainError, PreconditionError
from bergman.gram import build_basis, eval_poly
from bergman.precision import PrecisionConfig, log_abs, mpc, working_precision

BITS = 256
CFG = PrecisionConfig(precision_bits=BITS)


@pytest.fixture(scope="module")
def disk_basis():
    return build_basis(Disk(z0=1, s=2, precision_bits=BITS), 30, CFG)


# Carleman


def test_disk_carleman_residual_vanishes(disk_basis):
    for z in (4 + 0j, 1 + 3j, -2.5 - 1j):
        for n in (0, 5, 30):
            assert abs(asy.carleman_residual(disk_basis, z, n)) < 1e-60


def test_cassini_carleman_rate_on_curve(cassini_basis):
    rho = float(cassini_basis.domain.rho)
    ns = list(range(10, 41, 2))
    worst = []
    for n in ns:
        worst.append(max(log_abs(asy.carleman_residual_at(cassini_basis, cmath.rect(1, t), n)) for t in np.linspace(0, 6, 8)))
    fit = asy.fit_slope(ns, worst)
    assert fit.slope <= math.log(rho) + 0.25 * abs(math.log(rho))


def test_carleman_needs_exterior_point(cassini_basis):
    with pytest.raises(DomainError):
        asy.carleman_residual_at(cassini_basis, 0.3, 10)


def test_strong_equals_carleman_on_overlap(joukowsky_basis):
    dom = joukowsky_basis.domain
    z = dom.psi(cmath.rect(0.97, 0.6))
    s = regions.classify(dom, z)
    assert s.label == 1
    for n in (10, 30):
        with working_precision(joukowsky_basis.precision_bits):
            diff = asy.strong_residual(joukowsky_basis, z, n, s) - asy.carleman_residual(joukowsky_basis, z, n)
            assert abs(diff) < 1e-60


def test_strong_residual_decays_off_axis(joukowsky_basis):
    z = -0.32 + 1.14j
    ns = list(range(10, 61, 5))
    fit = asy.fit_slope(ns, [log_abs(asy.strong_residual(joukowsky_basis, z, n)) for n in ns])
    assert fit.slope < 0


def test_strong_residual_rejects_sigma0(joukowsky_basis):
    with pytest.raises(PreconditionError):
        asy.strong_residual(joukowsky_basis, -1.6, 20)


def test_fit_slope_of_exact_geometric_sequence():
    ns = np.arange(5, 40)
    fit = asy.fit_slope(ns, ns * math.log(0.7) + 2)
    assert abs(fit.slope - math.log(0.7)) < 1e-12 and abs(fit.ratio - 0.7) < 1e-12


def test_fit_slope_drops_underflow():
    fit = asy.fit_slope([1, 2, 3, 4], [-1.0, -2.0, float("-inf"), -4.0])
    assert fit.n_values == (1, 2, 4) and abs(fit.slope + 1) < 1e-12
    with pytest.raises(ValueError):
        asy.fit_slope([1, 2], [float("-inf"), -1.0])


# nth-root growth


@given(st.floats(0, 2 * math.pi), st.floats(0.2, 1.8))
def test_disk_nth_root_is_distance_ratio(disk_basis, t, r):
    z = 1 + cmath.rect(r, t)
    est = asy.nth_root(disk_basis, z, 30)
    # |p_n|^(1/n) = (sqrt(n+1)/s)^(1/n) * |z - z0|/s exactly
    exact = (math.sqrt(31) / 2) ** (1 / 30) * r / 2
    assert abs(est - exact) < 1e-12


def test_nth_root_on_sigma0_bounded_by_mu(joukowsky_basis):
    for z in regions.region_probes(joukowsky_basis.domain, 0, 4):
        assert asy.nth_root_growth(joukowsky_basis, z, range(40, 81)) <= 0.5 + 0.05


def test_nth_root_joukowsky_sigma1(joukowsky_basis):
    dom = joukowsky_basis.domain
    for z in regions.region_probes(dom, 1, 5):
        assert abs(asy.nth_root(joukowsky_basis, z, 80) - regions.classify(dom, z).r) < 0.02


def test_nth_root_growth_uses_upper_half():
    with pytest.raises(ValueError):
        asy.nth_root_growth(None, 0, [0])


# integral representation


def test_disk_integral_main_term_is_p_n(disk_basis):
    for z in (1.5, 1 + 1j, 0.2 - 0.5j):
        for n in (0, 7, 30):
            main, eps = asy.integral_representation(disk_basis, z, n, CFG)
            assert abs(eps) <= CFG.quad_tol


def test_integral_degree_zero(cassini_basis):
    with working_precision(cassini_basis.precision_bits):
        p0 = eval_poly(cassini_basis, 0, 1.0)
        for z in (0.9, 1.1 + 0.1j):
            main, eps = asy.integral_representation(cassini_basis, z, 0)
            assert abs(main + eps - p0) < 1e-60


@pytest.mark.parametrize("z", [1.1 - 0.19j, 0.68 - 0.12j, 0.7])
def test_trapezoid_matches_residues(cassini_basis, z):
    for n in (5, 20, 40):
        main, _ = asy.integral_representation(cassini_basis, z, n)
        res = asy.integral_main_residues(cassini_basis.domain, z, n)
        with working_precision(cassini_basis.precision_bits):
            assert abs(main - res) < 1e-60 * max(1, abs(res))


def test_integral_remainder_decays(cassini_basis):
    z = 1.1 - 0.19j
    ns = list(range(20, 61, 5))
    fit = asy.fit_slope(ns, [log_abs(asy.integral_representation(cassini_basis, z, n)[1]) for n in ns])
    tau = asy.nth_root_growth(cassini_basis, z, ns)
    rho = float(cassini_basis.domain.rho)
    bound = math.log(tau * rho)
    assert fit.slope <= bound + 0.25 * abs(bound)


def test_disk_main_term_is_polynomial_of_degree_n(disk_basis):
    # vanishing (n+1)-st finite difference on n+2 equispaced points
    n = 6
    h = mpc("0.05")
    with working_precision(BITS):
        vals = [asy.integral_representation(disk_basis, mpc("0.8") + k * h, n, CFG)[0] for k in range(n + 2)]
        diff = sum(((-1) ** (n + 1 - k)) * math.comb(n + 1, k) * v for k, v in enumerate(vals))
        assert abs(diff) < 1e-60


def test_integral_needs_interior_map():
    b = build_basis(Ellipse(A=1.25, precision_bits=BITS), 4, CFG)
    with pytest.raises(NotImplementedError):
        asy.integral_representation(b, 0.1, 3)


def test_integral_outside_domain(disk_basis):
    with pytest.raises(DomainError):
        asy.integral_representation(disk_basis, 5, 3)


def test_residual_csv(tmp_path, disk_basis):
    path = tmp_path / "r.csv"
    asy.save_residual_csv(path, [(4 + 0j, n, asy.carleman_residual(disk_basis, 4, n)) for n in range(3)])
    lines = path.read_text().splitlines()
    assert lines[0] == "re(z),im(z),n,re(resid),im(resid),abs(resid)" and len(lines) == 4
