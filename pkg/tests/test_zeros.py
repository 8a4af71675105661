import math
from fractions import Fraction

import gmpy2
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bergman import regions, zeros
from bergman.curves import Disk, Ellipse
from bergman.gram import build_basis
from bergman.precision import PrecisionConfig, mpc, working_precision

BITS = 256
CFG = PrecisionConfig(precision_bits=BITS)


def multiset_conj_invariant(rootset, tol=1e-30):
    roots = [(r, m) for r, m in rootset.roots]
    for r, m in roots:
        partner = [m2 for r2, m2 in roots if abs(complex(r2) - complex(r).conjugate()) < 1e-12]
        assert partner and partner[0] == m


# Aberth


@given(st.lists(st.tuples(st.floats(-2, 2), st.floats(-2, 2)), min_size=1, max_size=8, unique=True))
def test_aberth_recovers_prescribed_roots(pairs):
    roots = [complex(x, y) for x, y in pairs]
    if min((abs(a - b) for i, a in enumerate(roots) for b in roots[i + 1 :]), default=1) < 1e-2:
        return
    with working_precision(BITS):
        c = [mpc(1)]
        for r in roots:
            nxt = [mpc(0)] * (len(c) + 1)
            for k, ck in enumerate(c):
                nxt[k + 1] += ck
                nxt[k] -= mpc(r) * ck
            c = nxt
        found, _ = zeros.aberth(c, CFG.root_tol)
        for r in roots:
            assert min(abs(f - mpc(r)) for f in found) < 1e-30


# closed forms


def test_disk_single_site():
    b = build_basis(Disk(z0=1 + 0.5j, s=2, precision_bits=BITS), 20, CFG)
    rs = zeros.find_zeros(b, 20, CFG)
    assert rs.sites == 1 and rs.roots[0][1] == 20
    assert abs(complex(rs.roots[0][0]) - (1 + 0.5j)) < 1e-60
    m = zeros.counting_measure(rs)
    assert m.atoms == ((1 + 0.5j, Fraction(1)),)


def test_ellipse_zeros_are_chebyshev_nodes():
    b = build_basis(Ellipse(A=1.25, precision_bits=BITS), 20, CFG)
    with working_precision(BITS):
        pi = gmpy2.const_pi()
        for n in (1, 7, 20):
            got = sorted((r.real for r, m in zeros.find_zeros(b, n, CFG).roots for _ in range(m)))
            want = sorted(gmpy2.cos(k * pi / (n + 1)) for k in range(1, n + 1))
            assert max(abs(g - w) for g, w in zip(got, want)) < 1e-40


# cassini structure


def test_cassini_figure_site_count(cassini_basis):
    rs = zeros.find_zeros(cassini_basis, 50)
    assert rs.sites == 26 and rs.deflated == 25
    ones = [m for r, m in rs.roots if abs(complex(r) - 1) < 1e-30]
    assert ones == [25]
    beta = math.sqrt(1 - float(cassini_basis.domain.R_value) ** 2)
    simple = [complex(r) for r, m in rs.roots if m == 1]
    assert len(simple) == 25 and all(beta < z.real < 1 and z.imag == 0 or abs(z.imag) < 1e-40 for z in simple)


@pytest.mark.parametrize("n", [1, 2, 10, 25, 50])
def test_cassini_structure_report(cassini_basis, n):
    rep = zeros.verify_cassini_structure(cassini_basis, n)
    assert rep.passed, rep.failures()
    assert rep.clauses["q_degree"]["found"] == n - n // 2
    assert rep.clauses["derivatives"]["count"] == n // 2


def test_cassini_counting_measure_weights(cassini_basis):
    m = zeros.counting_measure(zeros.find_zeros(cassini_basis, 50))
    assert m.total == 1
    weights = sorted(w for _, w in m.atoms)
    assert weights[-1] == Fraction(1, 2) and weights[:-1] == [Fraction(1, 50)] * 25
    assert m.cdf_real(1.0) == 1.0


def test_kolmogorov_of_limit_against_itself(cassini):
    # quantile discretization of sigma + delta_1/2 with N atoms
    N = 400
    lo, hi = regions.sigma_segment(cassini)
    xs = np.linspace(lo, hi, 20001)
    F = regions.sigma_cdf_array(cassini, xs)
    atoms = [(complex(xs[np.searchsorted(F, (k + 0.5) / (2 * N))]), Fraction(1, 2 * N)) for k in range(N)]
    atoms.append((1 + 0j, Fraction(1, 2)))
    d = zeros.kolmogorov_vs_limit(zeros.EmpiricalMeasure(tuple(atoms)), cassini)
    assert d < 2 / N


def test_kolmogorov_decreases(cassini_basis):
    dom = cassini_basis.domain
    d50 = zeros.kolmogorov_vs_limit(zeros.counting_measure(zeros.find_zeros(cassini_basis, 50)), dom)
    d100 = zeros.kolmogorov_vs_limit(zeros.counting_measure(zeros.find_zeros(cassini_basis, 100)), dom)
    assert d100 < d50 < 0.08


# invariants


@pytest.mark.parametrize("n", [5, 20, 40])
def test_joukowsky_root_invariants(joukowsky_basis, n):
    rs = zeros.find_zeros(joukowsky_basis, n)
    assert rs.max_residual <= PrecisionConfig(precision_bits=joukowsky_basis.precision_bits).root_tol
    multiset_conj_invariant(rs)
    rec = zeros.reconstruct(joukowsky_basis, rs)
    with working_precision(joukowsky_basis.precision_bits):
        ref = max(abs(c) for c in joukowsky_basis.poly(n))
        assert max(abs(a - b) for a, b in zip(rec, joukowsky_basis.poly(n))) < 1e-40 * ref


def test_measure_totals(joukowsky_basis):
    for n in (3, 17, 40):
        m = zeros.counting_measure(zeros.find_zeros(joukowsky_basis, n))
        assert m.total == 1 and all(w == Fraction(1, n) for _, w in m.atoms)


def test_no_zeros_deep_in_sigma1(joukowsky_basis):
    roots = {n: zeros.find_zeros(joukowsky_basis, n) for n in (40, 60, 80)}
    rep = zeros.zero_attraction_check(joukowsky_basis.domain, roots, probes=[])
    assert rep.violations == []


def test_cassini_zeros_attracted_to_segment(cassini_basis):
    rep = zeros.zero_attraction_check(cassini_basis.domain, {100: zeros.find_zeros(cassini_basis, 100)})
    assert rep.passed


def test_seed_determinism(joukowsky_basis):
    a = zeros.find_zeros(joukowsky_basis, 30, seed=3)
    b = zeros.find_zeros(joukowsky_basis, 30, seed=3)
    assert a == b


def test_roots_csv(tmp_path, cassini_basis):
    path = tmp_path / "roots.csv"
    zeros.find_zeros(cassini_basis, 4).save_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "n,re,im,multiplicity" and len(lines) == 1 + 3
