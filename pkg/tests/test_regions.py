import cmath
import math

import gmpy2
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bergman import regions
from bergman.curves import Cassini, Disk, Ellipse, Joukowsky
from bergman.errors import DomainError, PreconditionError
from bergman.precision import mpc, to_complex, working_precision

BITS = 256
CAS = Cassini(R=0.8926, precision_bits=BITS)
JOU = Joukowsky(R=2.5, precision_bits=BITS)
BETA = math.sqrt(1 - 0.8926**2)


def cubic_pair(dom, xi):
    """Solutions of ``(1 - a w) w^2 = xi (w - a)`` in ``|w| < 1`` via numpy (independent of the Cardano solver)."""
    a = float(dom.a)
    roots = np.roots([-a, 1, -xi, a * xi])
    return [w for w in roots if abs(w) < 1]


# mu


def test_mu_values():
    assert regions.mu(JOU) == 0.5
    assert regions.mu(CAS) == 0
    assert regions.mu(Disk(precision_bits=BITS)) == 0
    ell = Ellipse(A=1.25, precision_bits=BITS)
    assert regions.mu(ell) == ell.rho


@given(st.floats(2.05, 6))
def test_mu_recursion_reaches_fixed_point(R):
    dom = Joukowsky(R=R, precision_bits=BITS)
    w = regions.mu_recursion(dom)[-1]
    with working_precision(BITS):
        assert abs(w * w - dom.R_value * w + 1) < 1e-30
        assert abs(w - dom.mu_closed) < 1e-20


# cassini


@given(st.floats(BETA + 1e-6, 1 - 1e-6))
def test_cassini_segment_is_sigma2(x):
    s = regions.classify(CAS, x)
    assert s.label == 2
    (w0, m0), (w1, m1) = s.solutions
    assert abs(w0 - w1.conjugate()) < 1e-12 and abs(w0.imag) > 0


@pytest.mark.parametrize("x", [0.46, 0.7, 0.99])
def test_cassini_segment_solutions_match_numpy_roots(x):
    s = regions.classify(CAS, x)
    pair = cubic_pair(CAS, (x * x - 1) / 0.8926)
    got = sorted((w for w, _ in s.solutions), key=lambda w: w.imag)
    want = sorted(pair, key=lambda w: w.imag)
    assert np.allclose(got, want, atol=1e-10)


def test_cassini_point_one_is_sigma2():
    s = regions.classify(CAS, 1)
    assert s.label == 2 and s.r == 0


@pytest.mark.parametrize("x", [0.45, 1.2, 1.3])
def test_cassini_real_axis_off_segment_is_sigma1(x):
    assert regions.classify(CAS, x).label == 1


@given(st.floats(0, 2 * math.pi), st.floats(0.995, 0.999))
def test_cassini_near_curve_phi_big_is_phi(t, r):
    z = CAS.psi(cmath.rect(r, t))
    s = regions.classify(CAS, z)
    assert s.label == 1
    with working_precision(BITS):
        assert abs(s.phi_big - CAS.phi(z)) < 1e-40


@given(st.floats(0.5, 1.35), st.floats(-0.6, 0.6))
def test_cassini_phi_big_solves_defining_equation(x, y):
    z = complex(x, y)
    if not CAS.contains(z):
        return
    s = regions.classify(CAS, z)
    assert s.label in (1, 2)
    if s.label == 1:
        with working_precision(BITS):
            W = s.phi_big
            assert abs(CAS.h_phi(W) - CAS.phi_int(z)) < 1e-60
        assert 0 < abs(to_complex(W)) < 1


@given(st.floats(0, 2 * math.pi), st.floats(0.3, 3))
def test_cassini_reflection_identity(t, r):
    if abs(r - 1) < 1e-3:
        return
    w = cmath.rect(r, t)
    with working_precision(BITS):
        w = mpc(w)
        h = CAS.h_phi(w)
        hr = CAS.h_phi(1 / w.conjugate())
        assert abs(h * hr.conjugate() - 1) < 1e-50


def test_gamma_curve_endpoints_and_symmetry():
    pts = regions.gamma_curve(CAS, 101)
    assert abs(pts[0] - 1 / float(CAS.b)) < 1e-12
    assert abs(pts[len(pts) // 2]) < 1e-12
    assert np.allclose(np.sort_complex(pts), np.sort_complex(pts.conj()))
    # h_phi = -R at the double point 1/b, 0 at w = 0
    with working_precision(BITS):
        assert abs(CAS.h_phi(1 / CAS.b) + CAS.R_value) < 1e-60


def test_sigma_cdf_against_root_tracking():
    xs = np.linspace(BETA + 1e-4, 1 - 1e-4, 100)
    got = regions.sigma_cdf_array(CAS, xs)
    oracle = []
    for x in xs:
        w = max(cubic_pair(CAS, (x * x - 1) / 0.8926), key=lambda v: v.imag)
        oracle.append(1 - abs(cmath.phase(w)) / math.pi)
    assert np.allclose(got, oracle, atol=1e-9)
    assert np.all(np.diff(got) >= 0)


def test_sigma_cdf_endpoints():
    assert regions.sigma_cdf(CAS, BETA + 1e-12) < 1e-4
    assert abs(regions.sigma_cdf(CAS, 1 - 1e-12) - 0.5) < 1e-4
    assert regions.sigma_cdf(CAS, 1) == 0.5
    with pytest.raises(DomainError):
        regions.sigma_cdf(CAS, 0.2)


# joukowsky


@given(st.floats(-0.4375 + 1e-6, 1.99))
def test_joukowsky_sigma2_segment(x):
    s = regions.classify(JOU, x)
    assert s.label == 2
    assert abs(s.r - math.sqrt(x + 2) / 2.5) < 1e-12


def test_joukowsky_sigma2_endpoint():
    with working_precision(BITS):
        assert JOU.R_value**2 * JOU.mu_closed**2 - 2 == gmpy2.mpfr("-0.4375")
    assert regions.classify(JOU, -0.4375 - 1e-3).label == 0
    assert regions.classify(JOU, -0.4375 + 1e-3).label == 2


@pytest.mark.parametrize("z", [-1.6, -2.0 + 0.3j, -1.3 - 0.2j])
def test_joukowsky_sigma0_has_r_mu(z):
    s = regions.classify(JOU, z)
    assert s.label == 0 and s.r == 0.5
    assert all(abs(to_complex(v)) <= 0.5 for v in JOU.preimages(z))


@pytest.mark.parametrize("z", [-1.46 - 1.14j, -3.4, -0.32 + 1.14j])
def test_joukowsky_sigma1(z):
    s = regions.classify(JOU, z)
    assert s.label == 1 and 0.5 < abs(to_complex(s.phi_big)) < 1
    with working_precision(BITS):
        assert abs(JOU.psi(s.phi_big) - mpc(z)) < 1e-60


def test_outside_domain_rejected():
    with pytest.raises(DomainError):
        regions.classify(JOU, 10)
    with pytest.raises(DomainError):
        regions.classify(CAS, -1)


# disk and ellipse


def test_disk_regions():
    dom = Disk(z0=1, s=2, precision_bits=BITS)
    assert regions.classify(dom, 1).label == 0
    assert regions.classify(dom, 1.5 + 0.5j).label == 1
    assert len(regions.sigma1_boundary(dom)) == 0
    assert list(regions.exceptional_set(dom)) == [1]


def test_ellipse_regions():
    dom = Ellipse(A=1.25, precision_bits=BITS)
    assert regions.classify(dom, 0.3).label == 0
    assert regions.classify(dom, 0.3 + 0.2j).label == 1


# region maps


@pytest.fixture(scope="module")
def jmap():
    return regions.region_map(JOU, resolution=61)


@pytest.fixture(scope="module")
def cmap():
    return regions.region_map(CAS, resolution=61)


def test_joukowsky_map_three_regions(jmap):
    counts = jmap.label_counts()
    assert sorted(counts) == [0, 1, 2]
    assert jmap.components(0) == 1 and jmap.components(1) == 1
    assert len(jmap.boundary) >= 1


def test_cassini_map_has_no_sigma0(cmap):
    assert sorted(cmap.label_counts()) == [1, 2]
    xs, lab = cmap.real_axis_labels()
    seg = (xs > BETA + 0.02) & (xs < 0.98)
    assert np.all(lab[seg] == 2)


def test_region_map_every_interior_point_labelled(jmap):
    for i, y in enumerate(jmap.ys):
        for j, x in enumerate(jmap.xs):
            assert (jmap.labels[i, j] >= 0) == JOU.contains(complex(x, y))


def test_phi_big_injective_on_sigma1(jmap):
    vals = jmap.phi[jmap.labels == 1]
    d = np.abs(vals[:, None] - vals[None, :])
    np.fill_diagonal(d, np.inf)
    assert d.min() > 1e-6


def test_phi_big_modulus_range(jmap):
    r = np.abs(jmap.phi[jmap.labels == 1])
    assert np.all((r > 0.5) & (r < 1))


def _jumps(rm):
    r = np.where(rm.labels >= 0, rm.r, np.nan)
    jumps = np.concatenate([np.abs(np.diff(r, axis=0)).ravel(), np.abs(np.diff(r, axis=1)).ravel()])
    return jumps[np.isfinite(jumps)]


def test_r_continuous_under_refinement():
    coarse = _jumps(regions.region_map(JOU, resolution=31))
    fine = _jumps(regions.region_map(JOU, resolution=121))
    # r is Lipschitz away from z = 2, where it behaves like sqrt(z - 2)
    assert np.percentile(fine, 99) < 0.4 * np.percentile(coarse, 99)
    assert fine.max() < coarse.max()


def test_smallest_grid():
    rm = regions.region_map(JOU, resolution=2)
    assert rm.labels.shape == (2, 2)


def test_parallel_map_identical(jmap):
    par = regions.region_map(JOU, resolution=61, jobs=2)
    assert np.array_equal(par.labels, jmap.labels)


def test_region_probes_respect_label_and_margin():
    pts = regions.region_probes(JOU, 0, 6)
    bnd = regions.exceptional_set(JOU)
    for z in pts:
        assert regions.classify(JOU, z).label == 0
        assert np.min(np.abs(bnd - z)) >= 0.05 * 5.0 * 0.9


# pole recursion


@pytest.mark.parametrize("z", [-1.6, -2.0 + 0.3j])
def test_pole_recursion(z):
    rec = regions.pole_recursion(JOU, z, 40)
    assert rec.max_modulus <= 0.5 + 1e-30
    assert rec.max_residual < 1e-25
    assert rec.monotone
    assert max(rec.distances(0)[-1], rec.distances(1)[-1]) < 1e-10


@given(st.floats(-2.2, -1.2), st.floats(-0.3, 0.3))
def test_pole_recursion_seed_product(x, y):
    z = complex(x, y)
    v1, v2 = JOU.preimages(z)
    with working_precision(BITS):
        assert abs(v1 * v2 - (mpc(z) + 2) / JOU.R_value**2) < 1e-60


def test_pole_recursion_needs_sigma0():
    with pytest.raises(PreconditionError):
        regions.pole_recursion(JOU, -0.32 + 1.14j)
