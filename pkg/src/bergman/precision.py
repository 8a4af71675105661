"""Working precision, tolerances and conversions for gmpy2 numbers.

All heavy arithmetic in the package is done with ``gmpy2.mpc`` / ``gmpy2.mpfr``
scalars, stored in numpy object arrays when vectorized.  The gmpy2 context is
thread local, so every public operation enters :func:`working_precision`
itself rather than relying on the caller.
"""

import math
import os
from contextlib import contextmanager
from dataclasses import dataclass

import gmpy2
import numpy as np

from .errors import ConfigError

DEFAULT_PRECISION_BITS = 512
ENV_PRECISION = "BERGMAN_PRECISION_BITS"


def default_precision_bits():
    value = os.environ.get(ENV_PRECISION)
    if value is None:
        return DEFAULT_PRECISION_BITS
    try:
        bits = int(value)
    except ValueError:
        raise ConfigError(f"{ENV_PRECISION}={value!r} is not an integer") from None
    _check_bits(bits)
    return bits


def _check_bits(bits):
    if bits < 128 or bits % 64:
        raise ConfigError(f"precision_bits must be a multiple of 64 and >= 128, got {bits}")


@dataclass(frozen=True)
class PrecisionConfig:
    """Precision and tolerance policy.

    ``quad_tol`` and ``ortho_tol`` default to ``2**(-bits/2)`` and
    ``2**(-bits/4)``.
    """

    precision_bits: int = None
    quad_tol: float = None
    ortho_tol: float = None
    max_quad_nodes: int = 1 << 14

    def __post_init__(self):
        bits = self.precision_bits
        if bits is None:
            bits = default_precision_bits()
            object.__setattr__(self, "precision_bits", bits)
        _check_bits(bits)
        if self.quad_tol is None:
            object.__setattr__(self, "quad_tol", 2.0 ** (-bits / 2))
        if self.ortho_tol is None:
            object.__setattr__(self, "ortho_tol", 2.0 ** (-bits / 4))
        if self.ortho_tol < self.quad_tol:
            raise ConfigError("ortho_tol must be >= quad_tol")
        if self.max_quad_nodes < 16:
            raise ConfigError("max_quad_nodes must be at least 16")

    @property
    def tie_tol(self):
        return 2.0**-64

    @property
    def cluster_tol(self):
        return 2.0 ** (-self.precision_bits / 8)

    @property
    def root_tol(self):
        return 2.0 ** (-self.precision_bits / 2)

    def with_bits(self, bits):
        """Same policy at another precision (tolerances rescaled)."""
        return PrecisionConfig(precision_bits=bits, max_quad_nodes=self.max_quad_nodes)


@contextmanager
def working_precision(bits):
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        yield


def decimal_digits(bits):
    return int(math.ceil(bits * math.log10(2))) + 2


def mpc(x):
    """Convert ``x`` to ``gmpy2.mpc`` at the current precision.

    Python floats are read through their shortest repr so that ``0.8926``
    means the decimal number, not its binary approximation.  A negative
    zero imaginary part is normalized to ``+0`` so branch cuts behave
    consistently.
    """
    if isinstance(x, gmpy2.mpc):
        z = gmpy2.mpc(x)
    elif isinstance(x, (str, bytes)):
        z = gmpy2.mpc(gmpy2.mpfr(x), 0)
    elif isinstance(x, (tuple, list)):
        z = gmpy2.mpc(mpf(x[0]), mpf(x[1]))
    elif isinstance(x, complex) or isinstance(x, np.complexfloating):
        z = gmpy2.mpc(mpf(float(x.real)), mpf(float(x.imag)))
    else:
        z = gmpy2.mpc(mpf(x), 0)
    return gmpy2.mpc(z.real, z.imag + 0)


def mpf(x):
    if isinstance(x, float) or isinstance(x, np.floating):
        return gmpy2.mpfr(repr(float(x)))
    if isinstance(x, gmpy2.mpc):
        raise TypeError("expected a real number, got mpc")
    return gmpy2.mpfr(x)


def pi():
    return gmpy2.const_pi()


def to_complex(z):
    return complex(float(z.real), float(z.imag))


def to_complex_array(values):
    return np.array([to_complex(mpc(v)) for v in values], dtype=complex)


def as_mpc_array(values):
    arr = np.empty(len(values), dtype=object)
    for i, v in enumerate(values):
        arr[i] = mpc(v)
    return arr


def fmt(x):
    """Full-precision decimal string of an mpfr (at its own precision)."""
    if not isinstance(x, type(gmpy2.mpfr(0))):
        x = gmpy2.mpfr(x)
    return str(x)


def parse_mpc(pair):
    re, im = pair
    return gmpy2.mpc(gmpy2.mpfr(re), gmpy2.mpfr(im))


def log_abs(x):
    """Natural log of ``|x|`` as a float, ``-inf`` for zero.

    Works for magnitudes far below the double-precision underflow limit.
    """
    a = abs(x)
    if a == 0:
        return float("-inf")
    return float(gmpy2.log(a))
