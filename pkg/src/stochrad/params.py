"""Physical parameters, the Abraham-Lorentz constant and unit scaling.

All numerical routines in the package work best in the scaled system where
the renormalized mass and the radiation-reaction constant are both one.  In
that system the runaway root sits at ``z1 = 1`` and the physical oscillator
frequencies become small dimensionless numbers, which keeps every exponential
representable.  Conversion back to SI happens only at the boundary.

Scaled base units
-----------------
time    tau = beta / m           (1 / tau is the frequency unit m / beta)
mass    mu  = m
length  ell = c * tau            (so c = 1 in scaled units)
charge  q   = |e|
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import constants as _sc

from .errors import InvalidParameterError

# CODATA defaults (scipy.constants ships the current CODATA set).
HBAR = _sc.hbar
EPS0 = _sc.epsilon_0
C_LIGHT = _sc.c
E_CHARGE = _sc.e
M_ELECTRON = _sc.m_e

#: Hydrogen ground-state scale 13.6 eV / h, i.e. about 3.29e15 s^-1.
OMEGA_HYDROGEN = 13.6 * _sc.eV / _sc.h

DEFAULT_LAMBDA = 1.0e-2  # [1/(m^2 s)]

# Dimension exponents (mass, length, time, charge) of each parameter.
_DIMENSIONS = {
    "m": (1, 0, 0, 0),
    "e": (0, 0, 0, 1),
    "kappa": (1, 0, -2, 0),
    "lam": (0, -2, -1, 0),
    "hbar": (1, 2, -1, 0),
    "eps0": (-1, -3, 2, 2),
    "c": (0, 1, -1, 0),
    "beta": (1, 0, 1, 0),
}

#: Dimensions of derived quantities used by other modules.
DIM_RATE = (0, 1, -1, 0)       # dGamma/dk: per second per inverse metre
DIM_FREQUENCY = (0, 0, -1, 0)
DIM_TIME = (0, 0, 1, 0)


def _check_finite(**values):
    for name, v in values.items():
        if not np.isfinite(v):
            raise InvalidParameterError(f"{name} must be finite, got {v!r}")


def derive_beta(e, eps0=EPS0, c=C_LIGHT):
    """Abraham-Lorentz coefficient ``e**2 / (6 pi eps0 c**3)`` in kg s.

    Examples
    --------
    >>> round(derive_beta(E_CHARGE) / 1e-54, 2)
    5.71
    """
    _check_finite(e=e, eps0=eps0, c=c)
    if e == 0:
        raise InvalidParameterError("charge must be nonzero")
    if eps0 <= 0 or c <= 0:
        raise InvalidParameterError("eps0 and c must be positive")
    return e * e / (6.0 * math.pi * eps0 * c ** 3)


@dataclass(frozen=True)
class PhysicalParams:
    """Particle and field constants.

    Units are whatever consistent system the numbers are expressed in; the
    defaults are SI.  ``beta`` defaults to the value derived from
    ``(e, eps0, c)``.  Passing ``beta=0`` explicitly switches off radiation
    reaction in ``H(z)`` while keeping the charge in the rate prefactor,
    which is how the lowest-order-in-``e`` results are obtained.
    """

    m: float = M_ELECTRON
    e: float = E_CHARGE
    kappa: float = 0.0
    lam: float = DEFAULT_LAMBDA
    hbar: float = HBAR
    eps0: float = EPS0
    c: float = C_LIGHT
    beta: Optional[float] = None

    def __post_init__(self):
        _check_finite(m=self.m, e=self.e, kappa=self.kappa, lam=self.lam,
                      hbar=self.hbar, eps0=self.eps0, c=self.c)
        if self.m <= 0:
            raise InvalidParameterError("mass must be positive")
        if self.e == 0:
            raise InvalidParameterError("charge must be nonzero")
        if self.lam < 0:
            raise InvalidParameterError("lambda must be non-negative")
        if self.kappa < 0:
            raise InvalidParameterError("kappa must be non-negative")
        if self.hbar <= 0 or self.eps0 <= 0 or self.c <= 0:
            raise InvalidParameterError("hbar, eps0 and c must be positive")
        if self.beta is None:
            object.__setattr__(self, "beta", derive_beta(self.e, self.eps0, self.c))
        else:
            _check_finite(beta=self.beta)
            if self.beta < 0:
                raise InvalidParameterError("beta must be non-negative")

    # -- constructors -------------------------------------------------------
    @classmethod
    def electron(cls, omega0=0.0, lam=DEFAULT_LAMBDA):
        """Electron with CODATA constants bound at frequency ``omega0``."""
        return cls(kappa=M_ELECTRON * omega0 ** 2, lam=lam)

    def with_omega0(self, omega0):
        return dataclasses.replace(self, kappa=self.m * omega0 ** 2)

    def first_order(self):
        """Copy with ``beta = 0`` (radiation reaction dropped from H)."""
        return dataclasses.replace(self, beta=0.0)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    # -- derived quantities -------------------------------------------------
    @property
    def omega0(self):
        return math.sqrt(self.kappa / self.m)

    @property
    def larmor_coefficient(self):
        """``e**2 / (6 pi eps0 c**3)``; independent of any ``beta`` override."""
        return derive_beta(self.e, self.eps0, self.c)

    @property
    def rate_prefactor(self):
        """``lam hbar e**2 / (2 pi**2 eps0 c**2)``, common to every rate."""
        return self.lam * self.hbar * self.e ** 2 / (
            2.0 * math.pi ** 2 * self.eps0 * self.c ** 2)

    @property
    def drive_amplitude(self):
        """Classical acceleration per unit noise, ``sqrt(lam) hbar / m``."""
        return math.sqrt(self.lam) * self.hbar / self.m

    def white_rate(self, omega):
        """White-noise reference rate ``lam hbar e^2 / (pi^2 eps0 c^2 m^2 omega)``."""
        omega = np.asarray(omega, dtype=float)
        return 2.0 * self.rate_prefactor / (self.m ** 2 * omega)

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: d[k] for k in d if k in _FIELDS})


_FIELDS = {f.name for f in dataclasses.fields(PhysicalParams)}


@dataclass(frozen=True)
class UnitScale:
    """Base units of a scaled system, expressed in SI.

    A value ``x_si`` of dimension ``M^a L^b T^c Q^d`` is represented in the
    scaled system as ``x_si / (mass^a length^b time^c charge^d)``.
    """

    time_unit: float = 1.0
    mass_unit: float = 1.0
    length_unit: float = 1.0
    charge_unit: float = 1.0
    mode: str = "scaled"

    @property
    def frequency_unit(self):
        return 1.0 / self.time_unit

    def factor(self, dims):
        a, b, c, d = dims
        return (self.mass_unit ** a * self.length_unit ** b
                * self.time_unit ** c * self.charge_unit ** d)

    def to_scaled_value(self, value, dims):
        return np.asarray(value) / self.factor(dims) if np.ndim(value) else value / self.factor(dims)

    def to_si_value(self, value, dims):
        return np.asarray(value) * self.factor(dims) if np.ndim(value) else value * self.factor(dims)

    def to_dict(self):
        return dataclasses.asdict(self)


SI = UnitScale(mode="SI")


def natural_scale(params: PhysicalParams) -> UnitScale:
    """Scale with ``m = 1``, ``beta = 1``, ``c = 1`` and ``|e| = 1``.

    Without radiation reaction (``beta = 0``) the time unit falls back to
    ``1 / omega0``, or to the current unit for a free particle.
    """
    if params.beta > 0:
        tau = params.beta / params.m
    elif params.kappa > 0:
        tau = 1.0 / params.omega0
    else:
        tau = 1.0
    return UnitScale(time_unit=tau, mass_unit=params.m,
                     length_unit=params.c * tau, charge_unit=abs(params.e))


def convert_params(params: PhysicalParams, scale: UnitScale, to_scaled=True):
    conv = scale.to_scaled_value if to_scaled else scale.to_si_value
    values = {name: conv(getattr(params, name), dims)
              for name, dims in _DIMENSIONS.items()}
    return PhysicalParams(**values)


def to_scaled(params: PhysicalParams):
    """Return ``(scaled_params, scale)`` for ``params``.

    Examples
    --------
    >>> p = PhysicalParams.electron(omega0=3.29e15)
    >>> sp, scale = to_scaled(p)
    >>> sp.m, sp.beta
    (1.0, 1.0)
    """
    scale = natural_scale(params)
    scaled = convert_params(params, scale, to_scaled=True)
    # Pin the normalisations exactly; the conversions are exact up to an ulp.
    exact = {"m": 1.0, "c": 1.0, "e": math.copysign(1.0, params.e)}
    if params.beta > 0:
        exact["beta"] = 1.0
    return scaled.replace(**exact), scale


def from_scaled(scaled_params: PhysicalParams, scale: UnitScale):
    """Inverse of :func:`to_scaled`."""
    return convert_params(scaled_params, scale, to_scaled=False)


def is_natural(params: PhysicalParams, rtol=1e-14):
    return (abs(params.m - 1.0) <= rtol and abs(params.c - 1.0) <= rtol
            and abs(abs(params.e) - 1.0) <= rtol
            and (params.beta == 0 or abs(params.beta - 1.0) <= rtol))


def natural_params(kappa=0.0, lam=1.0, hbar=1.0, beta=None, omega0=None):
    """Parameters directly in the scaled system (m = c = |e| = 1, beta = 1).

    ``eps0`` is set to ``1 / (6 pi)`` so the derived ``beta`` is one.
    """
    if omega0 is not None:
        kappa = omega0 ** 2
    return PhysicalParams(m=1.0, e=1.0, kappa=kappa, lam=lam, hbar=hbar,
                          eps0=1.0 / (6.0 * math.pi), c=1.0,
                          beta=1.0 if beta is None else beta)
