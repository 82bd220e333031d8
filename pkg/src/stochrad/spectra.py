"""Spectral photon-emission rates ``dGamma/dk`` for a noise-driven charge.

Every closed form is written as ``0.5 * Gamma_white(w) * shape`` with

    Gamma_white = lam hbar e^2 / (pi^2 eps0 c^2 m^2 w),
    x = beta w / m,   u = omega0 / w.

Rates are per unit wavenumber.  :meth:`RateSeries.per_angular_frequency`
converts to a density in ``omega_k`` by dividing by ``c``.

``rate_finite_time`` evaluates the full time-dependent rate.  With
``G_1^-(t) = sum_p A_p exp(p t)`` and ``G_1^+(t) = sum_q B_q exp(q t)`` the
time derivative of the double noise integral is

    sum_{p,q} A_p B_q exp((p + q) t) [F_t(-q) + F_t(-p)],

where ``F_t`` is the noise moment.  Pairs ``(p, q)`` fall into three
families: both from zeros of ``H`` (``"pair"``), one field pole and one
zero (``"cross"``), and both field poles (``"stationary"``).
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidParameterError, ResonanceError
from .kernels import _natural, g1_terms
from .noise import NoiseCorrelator
from .params import DIM_RATE, PhysicalParams, natural_scale

#: ``|w - omega0| / omega0`` below this is rejected by the perturbative formula.
RESONANCE_RTOL = 1e-9


@dataclass
class RateSeries:
    """Emission rate sampled on a grid of field frequencies.

    Attributes
    ----------
    omega : ndarray
        Angular frequencies ``omega_k = c k`` [1/s], strictly increasing.
    rate : ndarray
        ``dGamma/dk`` [m/s] (or per angular frequency when ``per == "omega"``).
    formula : str
        Tag of the expression that produced the values.
    t : float, optional
        Evaluation time for finite-time rates.
    """

    omega: np.ndarray
    rate: np.ndarray
    formula: str
    t: Optional[float] = None
    params: dict = field(default_factory=dict)
    correlator: dict = field(default_factory=dict)
    per: str = "k"

    def __post_init__(self):
        self.omega = np.atleast_1d(np.asarray(self.omega, dtype=float))
        self.rate = np.atleast_1d(np.asarray(self.rate, dtype=float))
        if self.omega.shape != self.rate.shape:
            raise InvalidParameterError("omega and rate must have the same shape")
        if self.omega.size > 1 and np.any(np.diff(self.omega) <= 0):
            raise InvalidParameterError("omega grid must be strictly increasing")

    def per_angular_frequency(self):
        """Same series as a density in ``omega_k`` (``dGamma/domega = dGamma/dk / c``)."""
        if self.per == "omega":
            return self
        c = self.params.get("c", 1.0)
        return RateSeries(self.omega, self.rate / c, self.formula, self.t,
                          dict(self.params), dict(self.correlator), per="omega")

    def to_csv(self, path=None):
        """Write columns ``omega_k, rate, formula, t``; returns the text."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["omega_k", "rate", "formula", "t"])
        t = "" if self.t is None else repr(float(self.t))
        for om, r in zip(self.omega, self.rate):
            w.writerow([repr(float(om)), repr(float(r)), self.formula, t])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def to_dict(self):
        return {"formula": self.formula, "t": self.t, "per": self.per,
                "omega_k": self.omega.tolist(), "rate": self.rate.tolist(),
                "params": self.params, "correlator": self.correlator}

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _grid(omega):
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    if not np.all(np.isfinite(w)):
        raise InvalidParameterError("omega_k must be finite")
    if np.any(w <= 0):
        raise InvalidParameterError("omega_k must be positive; the rate diverges at omega_k = 0")
    return w


def _series(w, values, formula, params, corr=None, t=None):
    return RateSeries(w, values, formula, t, params.to_dict(),
                      corr.to_dict() if corr is not None else {})


def _ft(corr, w):
    return np.asarray(corr.f_tilde(w), dtype=float) * np.ones_like(w)


def _ft0(corr):
    v = float(np.asarray(corr.f_tilde(0.0)))
    if not np.isfinite(v):
        raise InvalidParameterError("correlator has no finite f_tilde(0)")
    return v


def _half_white(w, params):
    return 0.5 * params.white_rate(w)


def rate_white_baseline(omega, params: PhysicalParams) -> RateSeries:
    """White-noise reference rate ``Gamma_white = lam hbar e^2 / (pi^2 eps0 c^2 m^2 w)``.

    Examples
    --------
    >>> from stochrad.params import natural_params
    >>> s = rate_white_baseline([1.0, 2.0], natural_params())
    >>> float(s.rate[0] / s.rate[1])
    2.0
    """
    w = _grid(omega)
    return _series(w, params.white_rate(w), "white", params)


def rate_free_exact(omega, corr: NoiseCorrelator, params: PhysicalParams) -> RateSeries:
    """Free particle, large-time limit taken last.

    ``0.5 Gamma_white [f_tilde(0) + f_tilde(w) / (1 + x^2)]``; ``kappa`` is
    ignored.
    """
    w = _grid(omega)
    x = params.beta * w / params.m
    shape = _ft0(corr) + _ft(corr, w) / (1.0 + x * x)
    return _series(w, _half_white(w, params) * shape, "free_exact", params, corr)


def rate_harmonic_asymptotic(omega, corr: NoiseCorrelator, params: PhysicalParams) -> RateSeries:
    """Bound particle in the large-time limit.

    ``C w^3 f_tilde(w) / (m^2 (omega0^2 - w^2)^2 + beta^2 w^6)`` with
    ``C = lam hbar e^2 / (2 pi^2 eps0 c^2)``.
    """
    w = _grid(omega)
    m, beta, kappa = params.m, params.beta, params.kappa
    denom = (kappa - m * w * w) ** 2 + (beta * w ** 3) ** 2
    if np.any(denom == 0):
        raise ResonanceError("undamped resonance: omega_k = omega0 with beta = 0")
    vals = params.rate_prefactor * w ** 3 * _ft(corr, w) / denom
    return _series(w, vals, "harmonic_asymptotic", params, corr)


def rate_free_limit_of_harmonic(omega, corr: NoiseCorrelator, params: PhysicalParams) -> RateSeries:
    """``omega0 -> 0`` of the bound-particle asymptotic rate: ``0.5 Gamma_white f_tilde(w) / (1 + x^2)``."""
    w = _grid(omega)
    x = params.beta * w / params.m
    vals = _half_white(w, params) * _ft(corr, w) / (1.0 + x * x)
    return _series(w, vals, "free_limit_of_harmonic", params, corr)


def rate_perturbative_harmonic(omega, corr: NoiseCorrelator, params: PhysicalParams) -> RateSeries:
    """Lowest order in the charge, bound particle.

    ``0.5 Gamma_white [(1 + u^2) f_tilde(omega0) + 2 f_tilde(w)] / (2 (1 - u^2)^2)``

    Raises
    ------
    ResonanceError
        If some ``|w - omega0| / omega0 < RESONANCE_RTOL``.
    """
    w = _grid(omega)
    w0 = params.omega0
    if w0 > 0 and np.any(np.abs(w - w0) / w0 < RESONANCE_RTOL):
        raise ResonanceError("perturbative rate diverges at omega_k = omega0")
    u2 = (w0 / w) ** 2
    ft0 = float(np.asarray(corr.f_tilde(w0)))
    shape = ((1.0 + u2) * ft0 + 2.0 * _ft(corr, w)) / (2.0 * (1.0 - u2) ** 2)
    return _series(w, _half_white(w, params) * shape, "perturbative_harmonic", params, corr)


def rate_perturbative_free(omega, corr: NoiseCorrelator, params: PhysicalParams) -> RateSeries:
    """Lowest order in the charge, free particle: ``0.5 Gamma_white [f_tilde(0)/2 + f_tilde(w)]``."""
    w = _grid(omega)
    shape = 0.5 * _ft0(corr) + _ft(corr, w)
    return _series(w, _half_white(w, params) * shape, "perturbative_free", params, corr)


# -- finite time --------------------------------------------------------------

@dataclass(frozen=True)
class RateOptions:
    """Term-family switches for :func:`rate_finite_time`.

    ``drop_oscillatory`` removes products whose exponent is purely
    imaginary and nonzero (they average to zero over long times);
    ``drop_runaway`` removes every product involving the runaway root;
    ``families`` restricts the sum to a subset of
    ``{"pair", "cross", "stationary"}``.
    """

    drop_oscillatory: bool = False
    drop_runaway: bool = True
    families: tuple = ("pair", "cross", "stationary")


def _is_oscillatory(s):
    return abs(s.real) <= 1e-14 * max(1.0, abs(s)) and s.imag != 0


def _check_simple(terms):
    for term in terms:
        if len(term.coeffs) > 1:
            raise ResonanceError("field frequency coincides with an undamped root; "
                                 "the finite-time rate grows secularly")


def _finite_time_scaled(ws, ts, corr, sp, roots, opts):
    tm = g1_terms("-", ws, sp, roots)
    tp = g1_terms("+", ws, sp, roots)
    _check_simple(tm)
    _check_simple(tp)
    field_m, field_p = 1j * ws, -1j * ws
    total = 0j
    for a in tm:
        if a.runaway and opts.drop_runaway:
            continue
        for b in tp:
            if b.runaway and opts.drop_runaway:
                continue
            p, q = a.exponent, b.exponent
            n_field = (p == field_m) + (q == field_p)
            family = ("pair", "cross", "stationary")[n_field]
            if family not in opts.families:
                continue
            s = p + q
            if opts.drop_oscillatory and _is_oscillatory(s):
                continue
            if ts == 0:
                continue
            coef = a.coeffs[0] * b.coeffs[0]
            total += coef * (corr.weighted_moment(-q, ts, s) + corr.weighted_moment(-p, ts, s))
    return sp.rate_prefactor * ws * total.real


def rate_finite_time(omega, t, corr: NoiseCorrelator, params: PhysicalParams,
                     opts: RateOptions = None):
    """Emission rate at finite time ``t`` with runaway terms dropped by default.

    Parameters
    ----------
    omega : float or array_like
        Field frequency ``omega_k > 0``.
    t : float
        Time since the field and noise were switched on, ``t >= 0``.
    opts : RateOptions, optional

    Returns
    -------
    float or ndarray
        ``dGamma/dk`` in the units of ``params``.

    Notes
    -----
    ``beta = 0`` in ``params`` gives the rate at lowest order in the charge.
    Computation happens in scaled units and is converted back at the end.
    """
    opts = opts or RateOptions()
    if t < 0:
        raise InvalidParameterError("t must be non-negative")
    w = _grid(omega)
    sp, roots, tau = _natural(params, None)
    c = corr.rescaled(tau)
    to_si = 1.0 if sp is params else natural_scale(params).factor(DIM_RATE)
    out = np.array([_finite_time_scaled(wi * tau, t / tau, c, sp, roots, opts) for wi in w])
    out = out * to_si
    return out if np.ndim(omega) else float(out[0])


def finite_time_series(omega, t, corr, params, opts=None) -> RateSeries:
    """:func:`rate_finite_time` on a grid, wrapped as a :class:`RateSeries`."""
    w = _grid(omega)
    vals = rate_finite_time(w, t, corr, params, opts)
    return _series(w, vals, "finite_time", params, corr, t=t)


FORMULAS = {
    "white": lambda w, corr, p: rate_white_baseline(w, p),
    "free_exact": rate_free_exact,
    "harmonic_asymptotic": rate_harmonic_asymptotic,
    "free_limit_of_harmonic": rate_free_limit_of_harmonic,
    "perturbative_harmonic": rate_perturbative_harmonic,
    "perturbative_free": rate_perturbative_free,
}
