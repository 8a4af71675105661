"""Small polynomial kernels on gmpy2 coefficients.

Coefficient vectors are ascending: ``c[k]`` multiplies ``z**k``.
"""

import gmpy2
import numpy as np


def horner(coeffs, z):
    """Evaluate a polynomial at ``z`` (scalar or object array)."""
    acc = coeffs[-1] * (z * 0 + 1)
    for c in coeffs[-2::-1]:
        acc = acc * z + c
    return acc


def horner_d(coeffs, z):
    """Value and first derivative at ``z``."""
    p = coeffs[-1] * (z * 0 + 1)
    dp = p * 0
    for c in coeffs[-2::-1]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def taylor_shift(coeffs, t):
    """Coefficients of ``p(t + u)`` in powers of ``u``."""
    c = list(coeffs)
    n = len(c) - 1
    for i in range(n):
        for k in range(n - 1, i - 1, -1):
            c[k] = c[k] + t * c[k + 1]
    return c


def antiderivative(coeffs):
    """Coefficients of the antiderivative vanishing at 0."""
    out = np.empty(len(coeffs) + 1, dtype=object)
    out[0] = coeffs[0] * 0
    for k, c in enumerate(coeffs):
        out[k + 1] = c / (k + 1)
    return out


def poly_from_roots(roots, lead):
    c = [lead]
    for r in roots:
        nxt = [c[0] * 0] * (len(c) + 1)
        for k, ck in enumerate(c):
            nxt[k + 1] = nxt[k + 1] + ck
            nxt[k] = nxt[k] - r * ck
        c = nxt
    return c


_OMEGA_CACHE = {}


def _cube_roots_of_unity():
    prec = gmpy2.get_context().precision
    if prec not in _OMEGA_CACHE:
        h = gmpy2.sqrt(gmpy2.mpfr(3)) / 2
        _OMEGA_CACHE[prec] = (
            gmpy2.mpc(1, 0),
            gmpy2.mpc(gmpy2.mpfr(-0.5), h),
            gmpy2.mpc(gmpy2.mpfr(-0.5), -h),
        )
    return _OMEGA_CACHE[prec]


def _ccbrt(z):
    if z == 0:
        return gmpy2.mpc(0, 0)
    # principal cube root via polar form
    r = gmpy2.cbrt(abs(z))
    t = gmpy2.phase(z) / 3
    return gmpy2.mpc(r * gmpy2.cos(t), r * gmpy2.sin(t))


def solve_cubic(c3, c2, c1, c0, polish=2):
    """Roots of ``c3 w^3 + c2 w^2 + c1 w + c0`` by Cardano plus Newton polish.

    Returns a list of three mpc roots (repeated roots are repeated).
    """
    a = c2 / c3
    b = c1 / c3
    c = c0 / c3
    shift = a / 3
    p = b - a * a / 3
    q = 2 * a * a * a / 27 - a * b / 3 + c
    disc = gmpy2.sqrt(q * q / 4 + p * p * p / 27)
    u1 = -q / 2 + disc
    u2 = -q / 2 - disc
    u3 = u1 if abs(u1) >= abs(u2) else u2
    u = _ccbrt(u3)
    roots = []
    for om in _cube_roots_of_unity():
        uk = u * om
        if uk == 0:
            t = gmpy2.mpc(0, 0)
        else:
            t = uk - p / (3 * uk)
        roots.append(t - shift)
    coeffs = [c0, c1, c2, c3]
    polished = []
    for w in roots:
        for _ in range(polish):
            f, df = horner_d(coeffs, w)
            if df == 0:
                break
            step = f / df
            w_new = w - step
            if not (abs(horner(coeffs, w_new)) <= abs(f)):
                break
            w = w_new
        polished.append(w)
    return polished
