"""Noise correlator models.

Every correlator is even in time, has zero mean and is normalized so that
its Fourier transform ``f_tilde(0) = 1`` (tabulated spectra carry whatever
values they are given).  Three quantities are exposed:

``f(s)``
    the two-time correlation ``E[w_i(s) w_j(0)] / delta_ij``;
``f_tilde(omega)``
    ``integral f(s) exp(i omega s) ds``;
``moment(alpha, t)``
    the truncated Laplace moment ``F_t(alpha) = integral_0^t f(x) exp(alpha x) dx``.

White noise uses the symmetric-delta convention
``integral_0^t delta(x) dx = 1/2`` for ``t > 0``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .errors import (InvalidParameterError, OutOfRangeError,
                     OverflowGuardError, PointwiseEvaluationError)

#: Largest exponent accepted before an overflow error is raised.
OVERFLOW_GUARD = 700.0

_QUAD_RTOL = 1e-10


def _exprel_t(z, t):
    """``(exp(z t) - 1) / z`` with the ``z -> 0`` limit ``t``."""
    z = complex(z)
    zt = z * t
    if abs(zt) < 1e-8:
        return t * (1.0 + zt / 2.0 + zt * zt / 6.0)
    return np.expm1(zt) / z


def _guard(exponent, what):
    if exponent > OVERFLOW_GUARD:
        raise OverflowGuardError(
            f"{what}: growth exponent {exponent:.3g} exceeds guard {OVERFLOW_GUARD}")


def _quad_complex(fun, a, b, weight_freq=None, points=None, limit=400):
    """Integrate a complex-valued ``fun`` on ``[a, b]``.

    With ``weight_freq`` the integrand is ``fun(x) * exp(i weight_freq x)``
    and QUADPACK's oscillatory rules are used for the cosine/sine parts.
    """
    opts = dict(epsabs=0.0, epsrel=_QUAD_RTOL, limit=limit)
    if weight_freq is None or weight_freq == 0.0:
        re = integrate.quad(lambda x: fun(x).real, a, b, points=points, **opts)[0]
        im = integrate.quad(lambda x: fun(x).imag, a, b, points=points, **opts)[0]
        return complex(re, im)
    w = float(weight_freq)
    # exp(i w x) fun = (fr + i fi)(cos + i sin)
    rc = integrate.quad(lambda x: fun(x).real, a, b, weight="cos", wvar=w, **opts)[0]
    rs = integrate.quad(lambda x: fun(x).real, a, b, weight="sin", wvar=w, **opts)[0]
    ic = integrate.quad(lambda x: fun(x).imag, a, b, weight="cos", wvar=w, **opts)[0]
    is_ = integrate.quad(lambda x: fun(x).imag, a, b, weight="sin", wvar=w, **opts)[0]
    return complex(rc - is_, rs + ic)


class NoiseCorrelator:
    """Common interface; concrete models are frozen dataclasses below."""

    kind = "abstract"
    #: convention marker recorded in metadata
    normalization = "f_tilde(0) = 1"

    def f(self, s):
        raise NotImplementedError

    def f_tilde(self, omega):
        raise NotImplementedError

    def moment(self, alpha, t):
        raise NotImplementedError

    def weighted_moment(self, alpha, t, shift):
        """``exp(shift t) * F_t(alpha)`` evaluated without spurious overflow."""
        base = self.moment(alpha, t)
        expo = complex(shift).real * t
        if base == 0:
            return 0j
        _guard(expo + math.log(abs(base)), f"{self.kind} weighted moment")
        return np.exp(complex(shift) * t) * base

    @property
    def correlation_time(self):
        """Characteristic decay time of ``f`` (``0`` for white noise)."""
        raise NotImplementedError

    def rescaled(self, time_unit):
        """Same correlator with times measured in units of ``time_unit``."""
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True)
class WhiteNoise(NoiseCorrelator):
    """Delta-correlated noise, ``f_tilde = 1``."""

    kind = "white"

    def f(self, s):
        raise PointwiseEvaluationError("white noise has no pointwise correlation value")

    def f_tilde(self, omega):
        omega = np.asarray(omega, dtype=float)
        return np.ones_like(omega) if omega.ndim else 1.0

    def moment(self, alpha, t):
        if t < 0:
            raise InvalidParameterError("t must be non-negative")
        return 0j if t == 0 else 0.5 + 0j

    @property
    def correlation_time(self):
        return 0.0

    def rescaled(self, time_unit):
        return self

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class ExponentialOU(NoiseCorrelator):
    """Ornstein-Uhlenbeck correlator ``(gamma/2) exp(-gamma |s|)``.

    Parameters
    ----------
    gamma : float
        Decay rate of the correlation, in inverse time units.
    """

    gamma: float
    kind = "ou"

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise InvalidParameterError("gamma must be positive and finite")

    def f(self, s):
        s = np.asarray(s, dtype=float)
        out = 0.5 * self.gamma * np.exp(-self.gamma * np.abs(s))
        return out if out.ndim else float(out)

    def f_tilde(self, omega):
        omega = np.asarray(omega, dtype=float)
        g2 = self.gamma ** 2
        out = g2 / (g2 + omega ** 2)
        return out if out.ndim else float(out)

    def moment(self, alpha, t):
        if t < 0:
            raise InvalidParameterError("t must be non-negative")
        d = complex(alpha) - self.gamma
        _guard(d.real * t, "OU moment")
        return 0.5 * self.gamma * _exprel_t(d, t)

    def weighted_moment(self, alpha, t, shift):
        if t < 0:
            raise InvalidParameterError("t must be non-negative")
        d = complex(alpha) - self.gamma
        shift = complex(shift)
        # exp(shift t) (exp(d t) - 1) / d, both exponentials combined first
        _guard(max(shift.real * t, (shift + d).real * t), "OU weighted moment")
        if d.real > 0:
            return 0.5 * self.gamma * np.exp((shift + d) * t) * _exprel_t(-d, t)
        return 0.5 * self.gamma * np.exp(shift * t) * _exprel_t(d, t)

    @property
    def correlation_time(self):
        return 1.0 / self.gamma

    def rescaled(self, time_unit):
        return ExponentialOU(self.gamma * time_unit)

    def to_dict(self):
        return {"kind": self.kind, "gamma": self.gamma}


@dataclass(frozen=True)
class GaussianWindow(NoiseCorrelator):
    """Gaussian correlator ``exp(-s^2 / 2 tau^2) / (tau sqrt(2 pi))``."""

    tau: float
    kind = "gaussian"

    def __post_init__(self):
        if not (np.isfinite(self.tau) and self.tau > 0):
            raise InvalidParameterError("tau must be positive and finite")

    def f(self, s):
        s = np.asarray(s, dtype=float)
        out = np.exp(-0.5 * (s / self.tau) ** 2) / (self.tau * math.sqrt(2 * math.pi))
        return out if out.ndim else float(out)

    def f_tilde(self, omega):
        omega = np.asarray(omega, dtype=float)
        out = np.exp(-0.5 * (omega * self.tau) ** 2)
        return out if out.ndim else float(out)

    def moment(self, alpha, t):
        if t < 0:
            raise InvalidParameterError("t must be non-negative")
        if t == 0:
            return 0j
        alpha = complex(alpha)
        _guard(alpha.real * t, "Gaussian moment")
        # the Gaussian beats exp(Re(alpha) s) once s exceeds 2 tau^2 Re(alpha)
        upper = min(t, 2.0 * self.tau ** 2 * max(alpha.real, 0.0) + 40.0 * self.tau)
        fun = lambda x: complex(self.f(x) * math.exp(alpha.real * x))
        return _quad_complex(fun, 0.0, upper, weight_freq=alpha.imag)

    @property
    def correlation_time(self):
        return self.tau

    def rescaled(self, time_unit):
        return GaussianWindow(self.tau / time_unit)

    def to_dict(self):
        return {"kind": self.kind, "tau": self.tau}


@dataclass(frozen=True)
class TabulatedSpectrum(NoiseCorrelator):
    """Spectrum given on a grid of non-negative angular frequencies.

    ``f_tilde`` is the monotone cubic (PCHIP) interpolant of the samples and
    is even in ``omega``.  Queries outside the grid raise
    :class:`OutOfRangeError` unless they are within ``edge_rtol`` of an edge,
    where the edge value is used.  The time-domain quantities ``f`` and
    ``F_t`` treat the spectrum as band-limited to the tabulated interval.
    """

    omega: tuple
    values: tuple
    edge_rtol: float = 1e-9
    _interp: object = field(default=None, repr=False, compare=False)
    kind = "tabulated"

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if w.ndim != 1 or w.shape != v.shape or w.size < 2:
            raise InvalidParameterError("tabulated spectrum needs two equal-length columns")
        if np.any(np.diff(w) <= 0) or w[0] < 0:
            raise InvalidParameterError("omega grid must be non-negative and strictly increasing")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise InvalidParameterError("spectrum samples must be finite and non-negative")
        object.__setattr__(self, "omega", tuple(w))
        object.__setattr__(self, "values", tuple(v))
        object.__setattr__(self, "_interp", PchipInterpolator(w, v, extrapolate=False))

    @classmethod
    def from_csv(cls, path, **kw):
        """Load a two-column CSV (``omega``, ``f_tilde``) with a header row."""
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or len(header) < 2:
                raise InvalidParameterError(f"{path}: header row with two columns required")
            try:
                float(header[0])
            except ValueError:
                pass
            else:
                raise InvalidParameterError(f"{path}: header row required")
            rows = [(float(r[0]), float(r[1])) for r in reader if r]
        w, v = zip(*rows)
        return cls(w, v, **kw)

    @property
    def band(self):
        return self.omega[0], self.omega[-1]

    def f_tilde(self, omega):
        omega = np.abs(np.asarray(omega, dtype=float))
        lo, hi = self.band
        tol = self.edge_rtol * (hi - lo)
        if np.any(omega < lo - tol) or np.any(omega > hi + tol):
            raise OutOfRangeError(
                f"query outside tabulated band [{lo:g}, {hi:g}]")
        out = self._interp(np.clip(omega, lo, hi))
        return out if out.ndim else float(out)

    def _band_integral(self, kernel):
        lo, hi = self.band
        fun = lambda w: complex(self._interp(w)) * kernel(w)
        re = integrate.quad(lambda w: fun(w).real, lo, hi, points=self.omega[1:-1],
                            limit=max(400, 4 * len(self.omega)), epsabs=0, epsrel=_QUAD_RTOL)[0]
        im = integrate.quad(lambda w: fun(w).imag, lo, hi, points=self.omega[1:-1],
                            limit=max(400, 4 * len(self.omega)), epsabs=0, epsrel=_QUAD_RTOL)[0]
        return complex(re, im)

    def f(self, s):
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.array([self._band_integral(lambda w, si=si: math.cos(w * si)).real
                        for si in s_arr]) / math.pi
        return out if np.ndim(s) else float(out[0])

    def moment(self, alpha, t):
        if t < 0:
            raise InvalidParameterError("t must be non-negative")
        if t == 0:
            return 0j
        alpha = complex(alpha)
        _guard(alpha.real * t, "tabulated moment")
        # integral_0^t cos(w x) exp(alpha x) dx, in closed form
        kern = lambda w: 0.5 * (_exprel_t(alpha + 1j * w, t) + _exprel_t(alpha - 1j * w, t))
        return self._band_integral(kern) / math.pi

    @property
    def correlation_time(self):
        lo, hi = self.band
        return 2.0 * math.pi / (hi - lo)

    def rescaled(self, time_unit):
        return TabulatedSpectrum(tuple(np.asarray(self.omega) * time_unit), self.values,
                                 self.edge_rtol)

    def to_dict(self):
        return {"kind": self.kind, "omega": list(self.omega), "values": list(self.values)}


def correlator_from_dict(d):
    kind = d.get("kind")
    if kind == "white":
        return WhiteNoise()
    if kind == "ou":
        return ExponentialOU(float(d["gamma"]))
    if kind == "gaussian":
        return GaussianWindow(float(d["tau"]))
    if kind == "tabulated":
        if "path" in d:
            return TabulatedSpectrum.from_csv(d["path"])
        return TabulatedSpectrum(tuple(d["omega"]), tuple(d["values"]))
    raise InvalidParameterError(f"unknown correlator kind {kind!r}")


# Functional aliases mirroring the object methods.

def f(corr: NoiseCorrelator, s):
    return corr.f(s)


def f_tilde(corr: NoiseCorrelator, omega):
    return corr.f_tilde(omega)


def F_t(corr: NoiseCorrelator, alpha, t):
    return corr.moment(alpha, t)
