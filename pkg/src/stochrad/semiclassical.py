"""Semiclassical emission: Larmor power of a classically noise-driven charge.

The drive on each Cartesian component is ``sqrt(lam) hbar / m * w_j(t)`` with
``E[w_j(t) w_j(s)] = f(t - s)``.  Radiated power per unit angular frequency
is the Larmor coefficient times the one-sided acceleration spectrum summed
over components, and ``P(w) dw = (hbar w / c) (dGamma/dk) dw`` turns it
into a photon rate.

Closed forms
------------
free:      0.5 Gamma_white f_tilde(w)
harmonic:  0.5 Gamma_white f_tilde(w) / (1 - u^2)^2,   u = omega0 / w

The Monte-Carlo pipeline simulates trajectories and estimates the same
spectra with segment-averaged periodograms (:func:`scipy.signal.welch`),
with jackknife errors across trajectories.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import signal

from .errors import (IntegratorError, InvalidParameterError, ResonanceError,
                     StatisticalValidityError)
from .noise import ExponentialOU, GaussianWindow, NoiseCorrelator, TabulatedSpectrum, WhiteNoise
from .params import PhysicalParams
from .spectra import RESONANCE_RTOL, RateSeries, _ft, _grid, _series

INTEGRATORS = ("exact-free", "exponential-oscillator")
WINDOWS = {"rectangular": "boxcar", "hann": "hann"}


def _resonance_guard(w, w0):
    if w0 > 0 and np.any(np.abs(np.abs(w) - w0) / w0 < RESONANCE_RTOL):
        raise ResonanceError("semiclassical harmonic response diverges at omega = omega0")


def rate_semiclassical_free(omega, corr: NoiseCorrelator, params: PhysicalParams) -> RateSeries:
    """``lam hbar e^2 f_tilde(w) / (2 pi^2 eps0 c^2 m^2 w)``; no ``f_tilde(0)`` term."""
    w = _grid(omega)
    vals = 0.5 * params.white_rate(w) * _ft(corr, w)
    return _series(w, vals, "semiclassical_free", params, corr)


def rate_semiclassical_harmonic(omega, corr: NoiseCorrelator, params: PhysicalParams) -> RateSeries:
    """``C w^3 f_tilde(w) / (m^2 (w^2 - omega0^2)^2)`` with ``C`` the rate prefactor.

    Identical to the bound-particle asymptotic rate without the
    radiation-reaction term in the denominator.
    """
    w = _grid(omega)
    _resonance_guard(w, params.omega0)
    m = params.m
    denom = (m * (w * w - params.omega0 ** 2)) ** 2
    vals = params.rate_prefactor * w ** 3 * _ft(corr, w) / denom
    return _series(w, vals, "semiclassical_harmonic", params, corr)


def ft_acceleration_harmonic(omega, omega0, noise_ft_value, params: PhysicalParams):
    """Fourier amplitude of the bound particle's acceleration.

    ``a(w) = sqrt(lam) hbar / m * w(w) * w^2 / (w^2 - omega0^2)``, where
    ``noise_ft_value`` is the noise amplitude ``w(w)``.
    """
    omega = np.asarray(omega, dtype=float)
    _resonance_guard(np.atleast_1d(omega), omega0)
    transfer = omega ** 2 / (omega ** 2 - omega0 ** 2)
    out = params.drive_amplitude * np.asarray(noise_ft_value, dtype=complex) * transfer
    return out if out.ndim else complex(out)


# -- Monte Carlo -------------------------------------------------------------

@dataclass(frozen=True)
class EnsembleSpec:
    """Monte-Carlo configuration; times in the units of the physical parameters.

    ``T / dt`` must be an integer multiple of ``n_segments``; each segment
    gives one periodogram.
    """

    dt: float
    T: float
    n_traj: int = 200
    master_seed: int = 0
    integrator: str = "exact-free"
    window: str = "rectangular"
    n_segments: int = 2

    def __post_init__(self):
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise InvalidParameterError("dt must be positive")
        if not self.T > self.dt:
            raise InvalidParameterError("T must exceed dt")
        n = self.T / self.dt
        if abs(n - round(n)) > 1e-9 * n:
            raise InvalidParameterError("T / dt must be an integer")
        if self.n_traj < 2:
            raise InvalidParameterError("n_traj must be at least 2 for error estimates")
        if self.integrator not in INTEGRATORS:
            raise InvalidParameterError(f"integrator must be one of {INTEGRATORS}")
        if self.window not in WINDOWS:
            raise InvalidParameterError(f"window must be one of {tuple(WINDOWS)}")
        if self.n_segments < 1 or self.n_steps % self.n_segments:
            raise InvalidParameterError("n_segments must divide T / dt")

    @property
    def n_steps(self):
        return int(round(self.T / self.dt))

    @property
    def segment_length(self):
        return self.n_steps // self.n_segments

    def to_dict(self):
        return asdict(self)


@dataclass
class EnsembleResult:
    """Ensemble-averaged rate estimate.

    ``samples`` holds the per-trajectory estimates (rows) used for the
    jackknife; ``resolved`` marks frequencies away from both the lowest
    bins and the discretization-biased top of the band.
    """

    omega: np.ndarray
    rate: np.ndarray
    stderr: np.ndarray
    n_traj: int
    bandwidth: float
    spec: EnsembleSpec
    mode: str
    resolved: np.ndarray
    samples: np.ndarray = field(repr=False, default=None)

    def band_average(self, omega_lo, omega_hi, n_bands):
        """Average the estimate over ``n_bands`` equal bands in ``[omega_lo, omega_hi]``.

        Returns ``(centers, mean, stderr, members)``; ``members`` lists the
        frequency indices of each band, so closed forms can be averaged the
        same way.
        """
        edges = np.linspace(omega_lo, omega_hi, n_bands + 1)
        centers, means, errs, members = [], [], [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            idx = np.nonzero((self.omega >= lo) & (self.omega < hi))[0]
            if idx.size == 0:
                raise StatisticalValidityError(f"band [{lo:.4g}, {hi:.4g}) contains no bins")
            per_traj = self.samples[:, idx].mean(axis=1)
            mean, se = _jackknife(per_traj[:, None])
            centers.append(self.omega[idx].mean())
            means.append(mean[0])
            errs.append(se[0])
            members.append(idx)
        return np.array(centers), np.array(means), np.array(errs), members

    def to_csv(self, path=None):
        lines = ["omega,rate,stderr"]
        lines += [f"{w!r},{r!r},{s!r}" for w, r, s in
                  zip(self.omega.tolist(), self.rate.tolist(), self.stderr.tolist())]
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def to_dict(self):
        return {"mode": self.mode, "n_traj": self.n_traj, "bandwidth": self.bandwidth,
                "spec": self.spec.to_dict(), "omega": self.omega.tolist(),
                "rate": self.rate.tolist(), "stderr": self.stderr.tolist(),
                "resolved": self.resolved.tolist()}

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _rng(master_seed, traj, component):
    return np.random.default_rng(np.random.SeedSequence([master_seed, traj, component]))


def _circulant_sample(eig, n, rng):
    """First ``n`` points of a stationary Gaussian series with circulant spectrum ``eig``."""
    M = eig.size
    z = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    y = np.fft.fft(np.sqrt(np.clip(eig, 0.0, None) / M) * z)
    return y.real[:n]


def _noise_component(corr, n, dt, rng):
    if isinstance(corr, WhiteNoise):
        return rng.standard_normal(n) / math.sqrt(dt)
    if isinstance(corr, ExponentialOU):
        var = 0.5 * corr.gamma
        phi = math.exp(-corr.gamma * dt)
        innov = rng.standard_normal(n) * math.sqrt(var * (1.0 - phi * phi))
        innov[0] = rng.standard_normal() * math.sqrt(var)
        return signal.lfilter([1.0], [1.0, -phi], innov)
    M = 2 * n
    if isinstance(corr, GaussianWindow):
        lag = np.minimum(np.arange(M), M - np.arange(M)) * dt
        eig = np.fft.fft(corr.f(lag)).real
        return _circulant_sample(eig, n, rng)
    if isinstance(corr, TabulatedSpectrum):
        nyquist = math.pi / dt
        if corr.band[0] > 0 or corr.band[1] < nyquist:
            raise InvalidParameterError(
                f"tabulated spectrum must cover [0, {nyquist:.4g}] for this dt")
        freqs = np.abs(np.fft.fftfreq(M, d=dt)) * 2.0 * math.pi
        eig = np.asarray(corr.f_tilde(freqs), dtype=float) / dt
        return _circulant_sample(eig, n, rng)
    raise InvalidParameterError(f"unsupported correlator {type(corr).__name__}")


def generate_colored_noise(corr: NoiseCorrelator, spec: EnsembleSpec, traj=0):
    """Three independent noise components, shape ``(3, n_steps)``.

    White noise has variance ``1/dt`` per sample, Ornstein-Uhlenbeck noise
    is the exact AR(1) discretization started in its stationary state, and
    Gaussian or tabulated spectra use circulant embedding on twice the
    record length.  The stream depends only on
    ``(master_seed, traj, component)``.
    """
    n = spec.n_steps
    return np.stack([_noise_component(corr, n, spec.dt, _rng(spec.master_seed, traj, j))
                     for j in range(3)])


def _oscillator_filter(omega0, dt):
    """Exact zero-order-hold map from a piecewise-constant force to ``x''``."""
    c = math.cos(omega0 * dt)
    # x'' = -omega0^2 x + F; the force-to-position map is k (z + 1) / (z^2 - 2cz + 1)
    return np.array([1.0, -(1.0 + c), c]), np.array([1.0, -2.0 * c, 1.0])


def simulate_trajectory(noise, spec: EnsembleSpec, params: PhysicalParams, initial=(0.0, 0.0)):
    """Acceleration series for a noise record of shape ``(..., n_steps)``.

    ``exact-free`` returns ``sqrt(lam) hbar / m * noise``.
    ``exponential-oscillator`` integrates ``x'' = -omega0^2 x + F`` exactly for
    a force held constant over each step; ``initial = (x0, v0)`` is a
    diagnostic starting state (the spectral estimator uses rest).

    Raises
    ------
    IntegratorError
        If ``|a - F|`` outgrows ``omega0 (sqrt(2 E0) + sum |F| dt)``, the
        energy bound of a driven undamped oscillator.
    """
    F = params.drive_amplitude * np.asarray(noise, dtype=float)
    if spec.integrator == "exact-free":
        return F
    w0 = params.omega0
    if w0 <= 0:
        raise InvalidParameterError("oscillator integrator needs omega0 > 0")
    b, a = _oscillator_filter(w0, spec.dt)
    x0, v0 = initial
    zi = None
    if x0 != 0 or v0 != 0:
        past = np.array([-1.0, -2.0]) * spec.dt
        y_past = -w0 ** 2 * (x0 * np.cos(w0 * past) + v0 / w0 * np.sin(w0 * past))
        zi = signal.lfiltic(b, a, y_past, [0.0, 0.0])
    if zi is None:
        acc = signal.lfilter(b, a, F, axis=-1)
    else:
        zi = np.broadcast_to(zi, F.shape[:-1] + (2,)).copy()
        acc = signal.lfilter(b, a, F, axis=-1, zi=zi)[0]
    bound = w0 * (math.sqrt(v0 * v0 + (w0 * x0) ** 2)
                  + np.cumsum(np.abs(F), axis=-1) * spec.dt)
    excess = np.abs(acc - F) - bound * (1.0 + 1e-8) - 1e-300
    if np.any(excess > 1e-9 * np.max(bound)):
        raise IntegratorError("oscillator energy exceeds the driven bound")
    return acc


def _jackknife(samples):
    """Mean over rows and its jackknife standard error."""
    n = samples.shape[0]
    mean = samples.mean(axis=0)
    loo = (samples.sum(axis=0) - samples) / (n - 1)
    se = np.sqrt((n - 1) / n * np.sum((loo - mean) ** 2, axis=0))
    return mean, se


def _acceleration_psd(acc, spec):
    """One-sided PSD per unit angular frequency, summed over components."""
    fs = 1.0 / spec.dt
    freqs, psd = signal.welch(acc, fs=fs, window=WINDOWS[spec.window],
                              nperseg=spec.segment_length, noverlap=0,
                              detrend=False, scaling="density", axis=-1)
    return 2.0 * math.pi * freqs, psd.sum(axis=0) / (2.0 * math.pi)


def estimate_rate_mc(spec: EnsembleSpec, corr: NoiseCorrelator, params: PhysicalParams,
                     mode="free") -> EnsembleResult:
    """Monte-Carlo estimate of ``dGamma/dk`` from simulated trajectories.

    Parameters
    ----------
    mode : {"free", "harmonic"}
        ``harmonic`` requires ``spec.integrator == "exponential-oscillator"``.

    Raises
    ------
    StatisticalValidityError
        If segments are too short for the noise correlation time or the
        oscillation period, or if no resolved frequencies remain.
    """
    if mode not in ("free", "harmonic"):
        raise InvalidParameterError("mode must be 'free' or 'harmonic'")
    expected = "exact-free" if mode == "free" else "exponential-oscillator"
    if spec.integrator != expected:
        raise InvalidParameterError(f"mode {mode!r} needs integrator {expected!r}")
    seg_T = spec.segment_length * spec.dt
    if spec.segment_length < 16:
        raise StatisticalValidityError("segments shorter than 16 samples")
    if seg_T < 10.0 * corr.correlation_time:
        raise StatisticalValidityError("segment length below ten noise correlation times")
    if mode == "harmonic" and seg_T < 10.0 * 2.0 * math.pi / params.omega0:
        raise StatisticalValidityError("segment length below ten oscillation periods")

    larmor = params.larmor_coefficient
    samples = None
    omega = None
    for traj in range(spec.n_traj):
        acc = simulate_trajectory(generate_colored_noise(corr, spec, traj), spec, params)
        om, psd = _acceleration_psd(acc, spec)
        if samples is None:
            omega = om[1:]
            samples = np.empty((spec.n_traj, omega.size))
        samples[traj] = larmor * psd[1:] * params.c / (params.hbar * omega)
    rate, se = _jackknife(samples)
    se = np.maximum(se, np.finfo(float).tiny)
    d_omega = omega[1] - omega[0]
    resolved = (omega >= 4.0 * d_omega) & (omega * spec.dt <= 0.25)
    if not np.any(resolved):
        raise StatisticalValidityError("no resolved frequencies; lengthen T or shrink dt")
    win = signal.get_window(WINDOWS[spec.window], spec.segment_length)
    enbw = spec.segment_length * np.sum(win ** 2) / np.sum(win) ** 2
    return EnsembleResult(omega, rate, se, spec.n_traj, float(d_omega * enbw), spec, mode,
                          resolved, samples)
