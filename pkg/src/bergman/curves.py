"""Closed-form conformal geometry of the supported Jordan domains.

Four families are supported:

``disk``       ``|z - z0| < s``
``ellipse``    confocal ellipse with foci at -1 and 1 and semi-major axis ``A``
``cassini``    the Cassini oval ``|z^2 - 1| = R`` (``0 < R < 1``) around ``z = 1``
``joukowsky``  the image of ``|w| = R`` (``R > 2``) under ``w - 1 + 1/(w - 1)``

For each domain ``psi`` is the exterior map of ``|w| > 1`` onto the exterior of
the curve (``psi(inf) = inf``, ``psi'(inf) > 0``) and ``phi`` its inverse.
``rho`` is the radius of univalency of ``psi`` and ``rho_a`` the radius down
to which ``psi`` continues analytically.

Families with an elementary interior map (disk, cassini) also expose
``phi_int`` and its continuation ``h_phi = phi_int o psi``.
"""

from dataclasses import dataclass, field
from typing import ClassVar

import gmpy2
import numpy as np

from .errors import BranchPointError, ConfigError, DomainError, SolverError
from .polyutil import solve_cubic
from .precision import default_precision_bits, mpc, mpf, to_complex, working_precision

FAMILIES = ("disk", "ellipse", "cassini", "joukowsky")


def _sqrt_cut_segment(z, lo, hi):
    """``sqrt((z - lo)(z - hi))`` with the cut on ``[lo, hi]``, ~ ``z`` at infinity."""
    return gmpy2.sqrt(mpc(z - hi)) * gmpy2.sqrt(mpc(z - lo))


@dataclass(frozen=True)
class JordanDomain:
    """Base class; instantiate through :func:`make_domain` or a subclass."""

    family: ClassVar[str] = ""
    precision_bits: int = field(default=None, kw_only=True, compare=True)

    def __post_init__(self):
        if self.precision_bits is None:
            object.__setattr__(self, "precision_bits", default_precision_bits())
        with working_precision(self.precision_bits):
            self._validate()
            self._derive()

    def _validate(self):
        pass

    def _derive(self):
        pass

    def _set(self, name, value):
        object.__setattr__(self, name, value)

    @property
    def params(self):
        raise NotImplementedError

    def to_dict(self):
        return {"family": self.family, **self.params}

    def with_precision(self, bits):
        return type(self)(**self.params, precision_bits=bits)

    def _wp(self):
        return working_precision(self.precision_bits)

    # geometry hooks implemented by subclasses
    def _psi(self, w):
        raise NotImplementedError

    def _psi_prime(self, w):
        raise NotImplementedError

    def _phi(self, z):
        raise NotImplementedError

    def _phi_prime(self, z):
        return 1 / self._psi_prime(self._phi(z))

    def psi(self, w):
        with self._wp():
            return self._psi(mpc(w))

    def psi_prime(self, w):
        with self._wp():
            return self._psi_prime(mpc(w))

    def phi(self, z):
        """Inverse of the exterior map on ``Omega_rho``."""
        with self._wp():
            z = mpc(z)
            w = self._phi(z)
            if not abs(w) > self.rho:
                raise DomainError(f"z={to_complex(z)} is not exterior to L_rho")
            return w

    def phi_prime(self, z):
        with self._wp():
            z = mpc(z)
            w = self._phi(z)
            if not abs(w) > self.rho:
                raise DomainError(f"z={to_complex(z)} is not exterior to L_rho")
            return 1 / self._psi_prime(w)

    def contains(self, z):
        """True iff ``z`` lies in the open interior ``G_1``."""
        raise NotImplementedError

    def psi_array(self, ws):
        with self._wp():
            out = np.empty(len(ws), dtype=object)
            for i, w in enumerate(ws):
                out[i] = self._psi(mpc(w))
            return out

    def psi_prime_array(self, ws):
        with self._wp():
            out = np.empty(len(ws), dtype=object)
            for i, w in enumerate(ws):
                out[i] = self._psi_prime(mpc(w))
            return out

    # interior map, for families where it is elementary
    has_interior_map: ClassVar[bool] = False

    def phi_int(self, z):
        raise NotImplementedError(f"no closed-form interior map for {self.family}")

    def phi_int_prime(self, z):
        raise NotImplementedError(f"no closed-form interior map for {self.family}")

    def h_phi(self, w):
        raise NotImplementedError(f"no closed-form h_phi for {self.family}")

    def h_phi_prime(self, w):
        raise NotImplementedError(f"no closed-form h_phi for {self.family}")

    def bounding_box(self, pad=0.05, n=512):
        pts = level_curve(self, 1, n).points
        x0, x1 = pts.real.min(), pts.real.max()
        y1 = np.abs(pts.imag).max()
        dx = (x1 - x0) * pad
        dy = y1 * pad
        yc = float(np.mean(pts.imag)) if self.family == "disk" else 0.0
        return (x0 - dx, x1 + dx, yc - y1 - dy, yc + y1 + dy)


@dataclass(frozen=True)
class Disk(JordanDomain):
    family: ClassVar[str] = "disk"
    has_interior_map: ClassVar[bool] = True
    z0: complex = 0
    s: float = 1

    def _validate(self):
        if not mpf(self.s) > 0:
            raise ConfigError("disk radius s must be > 0")

    def _derive(self):
        self._set("_z0", mpc(self.z0))
        self._set("_s", mpf(self.s))

    @property
    def params(self):
        z0 = complex(self.z0)
        return {"z0": [z0.real, z0.imag], "s": float(self.s)}

    @property
    def rho(self):
        return 0

    @property
    def rho_a(self):
        return 0

    @property
    def capacity(self):
        return self._s

    @property
    def center(self):
        return self._z0

    def _psi(self, w):
        return self._z0 + self._s * w

    def _psi_prime(self, w):
        return mpc(self._s)

    def _phi(self, z):
        return (z - self._z0) / self._s

    def contains(self, z):
        with self._wp():
            return abs(mpc(z) - self._z0) < self._s

    def phi_int(self, z):
        with self._wp():
            return (mpc(z) - self._z0) / self._s

    def phi_int_prime(self, z):
        with self._wp():
            return mpc(1 / self._s)

    def h_phi(self, w):
        with self._wp():
            return mpc(w)

    def h_phi_prime(self, w):
        with self._wp():
            return mpc(1)


@dataclass(frozen=True)
class Ellipse(JordanDomain):
    """Ellipse with foci at -1 and 1 and semi-major axis ``A > 1``."""

    family: ClassVar[str] = "ellipse"
    A: float = 1.25

    def _validate(self):
        if not mpf(self.A) > 1:
            raise ConfigError("ellipse semi-major axis A must be > 1")

    def _derive(self):
        A = mpf(self.A)
        B = gmpy2.sqrt(A * A - 1)
        self._set("_A", A)
        self._set("_B", B)
        self._set("kappa", A + B)

    @property
    def params(self):
        return {"A": float(self.A)}

    @property
    def semi_minor(self):
        return self._B

    @property
    def rho(self):
        return 1 / self.kappa

    @property
    def rho_a(self):
        return 0

    @property
    def capacity(self):
        return self.kappa / 2

    @property
    def center(self):
        return mpc(0)

    def _psi(self, w):
        if w == 0:
            raise BranchPointError("psi has a pole at w=0")
        u = self.kappa * w
        return (u + 1 / u) / 2

    def _psi_prime(self, w):
        if w == 0:
            raise BranchPointError("psi has a pole at w=0")
        return (self.kappa - 1 / (self.kappa * w * w)) / 2

    def _phi(self, z):
        return (z + _sqrt_cut_segment(z, -1, 1)) / self.kappa

    def contains(self, z):
        with self._wp():
            z = mpc(z)
            return (z.real / self._A) ** 2 + (z.imag / self._B) ** 2 < 1


def cassini_quartic(x, R):
    return 27 * x**4 - 18 * x**2 - 4 * (R + 1 / R) * x - 1


def cassini_params(R, precision_bits=None):
    """``(a, b, c)`` for the Cassini oval ``|z^2 - 1| = R``.

    ``a`` is the root of ``27x^4 - 18x^2 - 4(R + 1/R)x - 1`` in ``(-1/3, 0)``,
    found by bisection and polished with Newton steps.
    """
    bits = precision_bits or default_precision_bits()
    with working_precision(bits):
        R = mpf(R)
        if not 0 < R < 1:
            raise ConfigError("cassini requires 0 < R < 1")
        lo, hi = mpf(-1) / 3, mpf(0)
        flo, fhi = cassini_quartic(lo, R), cassini_quartic(hi, R)
        if flo * fhi >= 0:
            raise SolverError("quartic root not bracketed in (-1/3, 0)")
        tol = mpf(2) ** (-bits // 2)
        while hi - lo > tol:
            mid = (lo + hi) / 2
            fm = cassini_quartic(mid, R)
            if fm == 0:
                lo = hi = mid
                break
            if (fm < 0) == (flo < 0):
                lo, flo = mid, fm
            else:
                hi = mid
        a = (lo + hi) / 2
        for _ in range(6):
            d = 108 * a**3 - 36 * a - 4 * (R + 1 / R)
            a = a - cassini_quartic(a, R) / d
        k = (3 * a * a + 1) / (2 * a)
        root = gmpy2.sqrt(k * k - 4)
        b = (k - root) / 2
        c = (1 - 3 * a * a) / (2 * a) + root
        return a, b, c


def cassini_R_from_a(a, precision_bits=None):
    """The ``R`` in ``(0, 1)`` whose Cassini parameter is ``a``."""
    with working_precision(precision_bits or default_precision_bits()):
        a = mpf(a)
        if not -mpf(1) / 3 < a < 0:
            raise ConfigError("a must lie in (-1/3, 0)")
        S = (27 * a**4 - 18 * a**2 - 1) / (4 * a)
        return (S - gmpy2.sqrt(S * S - 4)) / 2


@dataclass(frozen=True)
class Cassini(JordanDomain):
    """The Cassini oval ``|z^2 - 1| = R`` enclosing ``z = 1``."""

    family: ClassVar[str] = "cassini"
    has_interior_map: ClassVar[bool] = True
    R: float = 0.8926

    @classmethod
    def from_a(cls, a, precision_bits=None):
        bits = precision_bits or default_precision_bits()
        R = cassini_R_from_a(a, bits)
        with working_precision(bits):
            return cls(R=str(R), precision_bits=bits)

    def _validate(self):
        if not 0 < mpf(self.R) < 1:
            raise ConfigError(f"cassini requires 0 < R < 1, got R={self.R}")

    def _derive(self):
        R = mpf(self.R)
        a, b, c = cassini_params(R, self.precision_bits)
        self._set("_R", R)
        self._set("a", a)
        self._set("b", b)
        self._set("c", c)
        self._set("_K", gmpy2.sqrt(-a * R))
        # the factored form with the principal root is already normalized so
        # that psi'(inf) > 0; psi(1/a) = -1 then holds automatically
        if abs(self._psi(mpc(1 / a)) + 1) > mpf(2) ** (-self.precision_bits // 2):
            raise SolverError("Cassini branch normalization psi(1/a) = -1 failed")

    @property
    def params(self):
        return {"R": float(self.R) if not isinstance(self.R, str) else self.R}

    @property
    def R_value(self):
        return self._R

    @property
    def rho(self):
        return -1 / self.b

    @property
    def rho_a(self):
        return -self.c

    @property
    def capacity(self):
        return self._K

    @property
    def center(self):
        return mpc(self._K * ((self.a - self.c) / 2 - self.b))

    @property
    def segment(self):
        """End points of ``Sigma_2 = [sqrt(1 - R^2), 1]``."""
        return gmpy2.sqrt(1 - self._R**2), mpf(1)

    def _ratio_sqrt(self, w):
        if w == self.a:
            raise BranchPointError("psi has a branch point at w=a")
        if w.imag == 0 and self.c <= w.real <= self.a:
            raise BranchPointError(f"w={to_complex(w)} lies on the cut [c, a]")
        return gmpy2.sqrt(mpc((w - self.c) / (w - self.a)))

    def _psi(self, w):
        return self._K * (w - self.b) * self._ratio_sqrt(w)

    def _psi_prime(self, w):
        S = self._ratio_sqrt(w)
        dS = (self.c - self.a) / (2 * S * (w - self.a) ** 2)
        return self._K * (S + (w - self.b) * dS)

    def cubic_roots(self, xi):
        """The three solutions of ``h_phi(w) = xi``."""
        with self._wp():
            xi = mpc(xi)
            a = self.a
            return solve_cubic(-a, mpc(1), -xi, a * xi)

    def _phi(self, z):
        xi = (z * z - 1) / self._R
        best = None
        for w in self.cubic_roots(xi):
            if w.imag == 0 and self.c <= w.real <= self.a:
                continue
            if abs(w) <= self.rho:
                continue
            err = abs(self._psi(w) - z)
            if best is None or err < best[0]:
                best = (err, w)
        if best is None or best[0] > abs(z) * mpf(2) ** (-self.precision_bits // 4) + mpf(2) ** (
            -self.precision_bits // 4
        ):
            raise DomainError(f"z={to_complex(z)} is not exterior to L_rho")
        w = best[1]
        # Newton polish on psi(w) = z
        for _ in range(2):
            w = w - (self._psi(w) - z) / self._psi_prime(w)
        return w

    def contains(self, z):
        with self._wp():
            z = mpc(z)
            return z.real > 0 and abs(z * z - 1) < self._R

    def phi_int(self, z):
        with self._wp():
            z = mpc(z)
            return (z * z - 1) / self._R

    def phi_int_prime(self, z):
        with self._wp():
            return 2 * mpc(z) / self._R

    def h_phi(self, w):
        with self._wp():
            w = mpc(w)
            return (1 - self.a * w) * w * w / (w - self.a)

    def h_phi_prime(self, w):
        with self._wp():
            w = mpc(w)
            a = self.a
            num = (2 * w - 3 * a * w * w) * (w - a) - (1 - a * w) * w * w
            return num / (w - a) ** 2


@dataclass(frozen=True)
class Joukowsky(JordanDomain):
    """Image of ``|w| = R`` under ``w - 1 + 1/(w - 1)``, ``R > 2``."""

    family: ClassVar[str] = "joukowsky"
    R: float = 2.5

    def _validate(self):
        if not mpf(self.R) > 2:
            raise ConfigError(f"joukowsky requires R > 2, got R={self.R}")

    def _derive(self):
        R = mpf(self.R)
        self._set("_R", R)
        self._set("mu_closed", (R - gmpy2.sqrt(R * R - 4)) / 2)

    @property
    def params(self):
        return {"R": float(self.R) if not isinstance(self.R, str) else self.R}

    @property
    def R_value(self):
        return self._R

    @property
    def rho(self):
        return 2 / self._R

    @property
    def rho_a(self):
        return 1 / self._R

    @property
    def capacity(self):
        return self._R

    @property
    def center(self):
        return mpc(-1)

    def _psi(self, w):
        u = self._R * w - 1
        if u == 0:
            raise BranchPointError("psi has a pole at w=1/R")
        return u + 1 / u

    def _psi_prime(self, w):
        u = self._R * w - 1
        if u == 0:
            raise BranchPointError("psi has a pole at w=1/R")
        return self._R - self._R / (u * u)

    def preimages(self, z):
        """``(v1, v2)``: both solutions of ``psi(w) = z``.

        ``v1`` is the branch asymptotic to ``z / R`` at infinity, i.e. ``phi``
        on the exterior of ``L_rho``.
        """
        with self._wp():
            z = mpc(z)
            s = _sqrt_cut_segment(z, -2, 2)
            return (z + 2 + s) / (2 * self._R), (z + 2 - s) / (2 * self._R)

    def _phi(self, z):
        return self.preimages(z)[0]

    def contains(self, z):
        with self._wp():
            return abs(self.preimages(z)[0]) < 1


_CLASSES = {cls.family: cls for cls in (Disk, Ellipse, Cassini, Joukowsky)}


def make_domain(family, precision_bits=None, **params):
    """Build a domain from a family name and its parameters.

    Accepts the JSON-style spelling used in config files, e.g.
    ``make_domain("cassini", R=0.8926)`` or ``make_domain("cassini", a=-0.26)``.
    """
    if family not in _CLASSES:
        raise ConfigError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if family == "cassini" and "a" in params:
        if "R" in params:
            raise ConfigError("give either R or a for cassini, not both")
        return Cassini.from_a(params["a"], precision_bits)
    if family == "disk" and "z0" in params:
        z0 = params["z0"]
        if isinstance(z0, (list, tuple)):
            params = {**params, "z0": complex(z0[0], z0[1])}
    try:
        return _CLASSES[family](**params, precision_bits=precision_bits)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {family}: {exc}") from None


def domain_from_dict(d, precision_bits=None):
    d = dict(d)
    return make_domain(d.pop("family"), precision_bits=precision_bits, **d)


@dataclass(frozen=True)
class LevelCurve:
    domain: JordanDomain
    r: float
    points: np.ndarray


def level_curve(domain, r, n_points=256):
    """Closed polyline through ``psi(r e^{i theta})`` (double precision points)."""
    if r < float(domain.rho_a):
        raise DomainError(f"r={r} is below rho_a")
    theta = np.linspace(0, 2 * np.pi, n_points, endpoint=False)
    pts = []
    for t in theta:
        w = complex(r * np.cos(t), r * np.sin(t))
        pts.append(to_complex(domain.psi(w)))
    pts.append(pts[0])
    return LevelCurve(domain, r, np.array(pts))


def schwarz_reflect(domain, z):
    """Reflection ``psi(1 / conj(phi(z)))`` of ``z`` about ``L_1``."""
    with domain._wp():
        w = domain.phi(z)
        rho = domain.rho
        if rho != 0 and not abs(w) < 1 / rho:
            raise DomainError("z lies outside the band Omega_rho & G_{1/rho}")
        if w == 0:
            raise DomainError("reflection undefined at the center")
        return domain.psi(1 / w.conjugate())


def laurent_constant(domain, n=64):
    """Constant term of the Laurent expansion of ``psi`` at infinity (numerical check)."""
    with domain._wp():
        acc = mpc(0)
        for k in range(n):
            t = 2 * gmpy2.const_pi() * k / n
            w = 2 * gmpy2.mpc(gmpy2.cos(t), gmpy2.sin(t))
            acc += domain._psi(w)
        return acc / n


__all__ = [
    "FAMILIES",
    "Cassini",
    "Disk",
    "Ellipse",
    "JordanDomain",
    "Joukowsky",
    "LevelCurve",
    "cassini_R_from_a",
    "cassini_params",
    "cassini_quartic",
    "domain_from_dict",
    "laurent_constant",
    "level_curve",
    "make_domain",
    "schwarz_reflect",
]
