import math

import gmpy2
import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bergman.curves import Cassini, Disk, Ellipse, Joukowsky
from bergman.errors import CrossCheckError, IllConditionedError
from bergman.gram import (
    OrthoBasis,
    build_basis,
    cholesky_lower,
    coefficient_discrepancy,
    compute_moments,
    eval_poly,
    orthonormal_basis_arnoldi,
    orthonormality_residual,
)
from bergman.precision import PrecisionConfig, mpc, to_complex, working_precision

BITS = 256
CFG = PrecisionConfig(precision_bits=BITS)


def _cassini_area_moments(R):
    """``(1/pi) * (area, int x dA)`` of ``|z^2 - 1| < R, Re z > 0`` by 1-D quadrature.

    For fixed ``x`` the half-height ``y`` solves
    ``y^4 + 2(x^2+1) y^2 + (x^2-1)^2 - R^2 = 0``.
    """
    with mpmath.workdps(40):
        R = mpmath.mpf(R)

        def height(x):
            u = -(x * x + 1) + mpmath.sqrt(4 * x * x + R * R)
            return 2 * mpmath.sqrt(max(u, 0))

        lo, hi = mpmath.sqrt(1 - R), mpmath.sqrt(1 + R)
        area = mpmath.quad(height, [lo, 1, hi])
        first = mpmath.quad(lambda x: x * height(x), [lo, 1, hi])
        return float(area / mpmath.pi), float(first / mpmath.pi)


# moments


def test_unit_disk_moments_are_diagonal():
    m = compute_moments(Disk(z0=0, s=1, precision_bits=BITS), 6, CFG).entries
    with working_precision(BITS):
        for j in range(7):
            for k in range(7):
                expected = gmpy2.mpfr(1) / (k + 1) if j == k else 0
                assert abs(m[j, k] - expected) < 1e-60


def test_shifted_disk_mass():
    m = compute_moments(Disk(z0=1, s=2, precision_bits=BITS), 3, CFG).entries
    with working_precision(BITS):
        assert abs(m[0, 0] - 4) < 1e-60
        # (1/pi) int z dA = z0 * area / pi
        assert abs(m[1, 0] - 4) < 1e-60


def test_cassini_moments_match_area_quadrature():
    m = compute_moments(Cassini(R=0.8926, precision_bits=BITS), 2, CFG).entries
    area, first = _cassini_area_moments("0.8926")
    assert abs(to_complex(m[0, 0]) - area) < 1e-25
    assert abs(to_complex(m[1, 0]) - first) < 1e-25


@pytest.mark.parametrize("dom", [Cassini(R=0.6, precision_bits=BITS), Joukowsky(R=3, precision_bits=BITS)])
def test_moments_hermitian_and_positive(dom):
    mm = compute_moments(dom, 8, CFG)
    m = mm.entries
    with working_precision(BITS):
        for j in range(9):
            assert m[j, j].imag == 0 and m[j, j].real > 0
            for k in range(9):
                assert m[j, k] == m[k, j].conjugate()
    cholesky_lower(m, BITS)


# closed forms


@pytest.mark.parametrize("z0, s", [(0, 1), (1, 2), (0.5 - 0.25j, 0.75)])
def test_disk_basis_closed_form(z0, s):
    b = build_basis(Disk(z0=z0, s=s, precision_bits=BITS), 12, CFG)
    with working_precision(BITS):
        zc, sc = mpc(z0), mpc(s)
        for n in range(13):
            scale = gmpy2.sqrt(gmpy2.mpfr(n + 1)) / sc ** (n + 1)
            for k, c in enumerate(b.poly(n)):
                exact = scale * math.comb(n, k) * (-zc) ** (n - k)
                assert abs(c - exact) < 1e-60 * (1 + abs(exact))


def test_disk_p3_value():
    b = build_basis(Disk(z0=0, s=1, precision_bits=BITS), 3, CFG)
    with working_precision(BITS):
        assert abs(eval_poly(b, 3, 0.5) - 0.25) < 1e-60


@pytest.mark.parametrize("dom", [Cassini(R=0.8926, precision_bits=BITS), Joukowsky(R=2.5, precision_bits=BITS)])
def test_p0_is_inverse_sqrt_mass(dom):
    b = build_basis(dom, 0, CFG)
    m00 = compute_moments(dom, 0, CFG).entries[0, 0]
    with working_precision(BITS):
        expected = 1 / gmpy2.sqrt(m00.real)
        for z in (0.9, 1.1 + 0.2j):
            assert abs(eval_poly(b, 0, z) - expected) < 1e-60


def test_ellipse_basis_proportional_to_chebyshev_u():
    b = build_basis(Ellipse(A=1.25, precision_bits=BITS), 12, CFG)
    with mpmath.workdps(60):
        xs = [mpmath.mpf(x) for x in ("0.13", "-0.41", "0.77", "1.9")]
        for n in range(1, 13):
            with working_precision(BITS):
                vals = [str(eval_poly(b, n, str(x)).real) for x in xs]
            ratios = [mpmath.mpf(v) / mpmath.chebyu(n, x) for v, x in zip(vals, xs)]
            for r in ratios[1:]:
                assert abs(r / ratios[0] - 1) < 1e-40


# structural invariants


@pytest.fixture(scope="module")
def small_bases():
    return {
        "cassini": build_basis(Cassini(R=0.8926, precision_bits=BITS), 20, CFG),
        "joukowsky": build_basis(Joukowsky(R=2.5, precision_bits=BITS), 20, CFG),
        "ellipse": build_basis(Ellipse(A=1.4, precision_bits=BITS), 20, CFG),
    }


@pytest.mark.parametrize("family", ["cassini", "joukowsky", "ellipse"])
def test_requadrature_orthonormality(small_bases, family):
    assert orthonormality_residual(small_bases[family]) < CFG.ortho_tol


@pytest.mark.parametrize("family", ["cassini", "joukowsky", "ellipse"])
def test_leading_positive_and_coefficients_real(small_bases, family):
    b = small_bases[family]
    for n in range(b.n_max + 1):
        lead = b.leading(n)
        assert lead.imag == 0 and lead.real > 0
        assert all(abs(c.imag) < CFG.ortho_tol for c in b.poly(n))


def test_arnoldi_agrees_with_cholesky():
    dom = Cassini(R=0.8926, precision_bits=BITS)
    chol = build_basis(dom, 6, CFG)
    arn = orthonormal_basis_arnoldi(dom, 6, CFG, reference=chol)
    assert coefficient_discrepancy(chol, arn) < CFG.ortho_tol
    rng = np.random.default_rng(7)
    for _ in range(10):
        z = complex(1 + 0.3 * rng.uniform(-1, 1), 0.3 * rng.uniform(-1, 1))
        with working_precision(BITS):
            for n in range(7):
                assert abs(eval_poly(chol, n, z) - eval_poly(arn, n, z)) < 1e-50


def test_arnoldi_cross_check_detects_mismatch():
    dom = Cassini(R=0.8926, precision_bits=BITS)
    wrong = build_basis(Cassini(R=0.85, precision_bits=BITS), 4, CFG)
    with pytest.raises(CrossCheckError):
        orthonormal_basis_arnoldi(dom, 4, CFG, reference=wrong)


@given(st.integers(0, 20), st.floats(0, 2 * math.pi))
def test_p_n_nonzero_on_boundary(small_bases, n, t):
    b = small_bases["joukowsky"]
    z = b.domain.psi(complex(math.cos(t), math.sin(t)))
    v = abs(to_complex(eval_poly(b, n, z)))
    assert math.isfinite(v) and v > 0


def test_precision_escalates_when_raw_coefficients_cancel():
    dom = Cassini(R=0.8926, precision_bits=128)
    b = build_basis(dom, 60, PrecisionConfig(precision_bits=128))
    assert b.precision_bits > 128
    assert b.meta["cancellation_bits"] < b.precision_bits / 2
    assert orthonormality_residual(b) < PrecisionConfig(precision_bits=b.precision_bits).ortho_tol


def test_escalation_ceiling_raises():
    with pytest.raises(IllConditionedError):
        build_basis(Cassini(R=0.8926, precision_bits=128), 60, PrecisionConfig(precision_bits=128), max_bits=128)


def test_json_round_trip_is_exact(small_bases, tmp_path):
    b = small_bases["cassini"]
    path = tmp_path / "b.json"
    b.save_json(path)
    back = OrthoBasis.load_json(path)
    assert back.n_max == b.n_max and back.precision_bits == b.precision_bits
    assert all(x == y for x, y in zip(back.coeffs.flat, b.coeffs.flat))
    b.save_json(tmp_path / "c.json")
    assert path.read_bytes() == (tmp_path / "c.json").read_bytes()
