import math

import numpy as np
import pytest
from scipy import integrate
from hypothesis import given, settings, strategies as st

from stochrad.errors import (IntegratorError, InvalidParameterError, ResonanceError,
                             StatisticalValidityError)
from stochrad.noise import ExponentialOU, GaussianWindow, TabulatedSpectrum, WhiteNoise
from stochrad.params import natural_params
from stochrad.semiclassical import (EnsembleSpec, _acceleration_psd, estimate_rate_mc,
                                    ft_acceleration_harmonic, generate_colored_noise,
                                    rate_semiclassical_free, rate_semiclassical_harmonic,
                                    simulate_trajectory)
from stochrad.spectra import (rate_free_limit_of_harmonic, rate_harmonic_asymptotic,
                              rate_white_baseline)

W = np.geomspace(0.05, 20.0, 13)


def test_free_closed_form_is_half_white_times_spectrum():
    corr = ExponentialOU(0.8)
    p = natural_params()
    want = 0.5 * rate_white_baseline(W, p).rate * corr.f_tilde(W)
    assert np.allclose(rate_semiclassical_free(W, corr, p).rate, want, rtol=1e-15)


def test_free_closed_form_matches_quantum_at_zero_beta():
    corr = GaussianWindow(0.4)
    p = natural_params(beta=0.0)
    assert np.allclose(rate_semiclassical_free(W, corr, p).rate,
                       rate_free_limit_of_harmonic(W, corr, p).rate, rtol=1e-15)


def test_harmonic_equals_quantum_without_reaction():
    corr = ExponentialOU(1.7)
    p = natural_params(kappa=0.3)
    sc = rate_semiclassical_harmonic(W, corr, p).rate
    q = rate_harmonic_asymptotic(W, corr, p.replace(beta=0.0)).rate
    assert np.allclose(sc, q, rtol=1e-14)


def test_harmonic_resonance_raises():
    p = natural_params(kappa=0.25)
    with pytest.raises(ResonanceError):
        rate_semiclassical_harmonic([0.5], WhiteNoise(), p)
    with pytest.raises(ResonanceError):
        ft_acceleration_harmonic(0.5, 0.5, 1.0, p)


def test_harmonic_peak_next_to_resonance():
    p = natural_params(kappa=1.0)
    r = rate_semiclassical_harmonic([0.9, 0.99, 1.01, 1.1], WhiteNoise(), p).rate
    assert r[1] > r[0] and r[2] > r[3]


def test_zero_coupling():
    p = natural_params(kappa=0.3, lam=0.0)
    assert np.all(rate_semiclassical_harmonic(W, WhiteNoise(), p).rate == 0)
    assert np.all(rate_semiclassical_free(W, WhiteNoise(), p).rate == 0)


@settings(max_examples=30, deadline=None)
@given(w=st.floats(0.05, 20.0), kappa=st.floats(0.01, 4.0))
def test_acceleration_amplitude_gives_rate_ratio(w, kappa):
    p = natural_params(kappa=kappa)
    w0 = p.omega0
    if abs(w - w0) / w0 < 1e-3:
        return
    a = ft_acceleration_harmonic(w, w0, 1.0, p)
    ratio = abs(a / p.drive_amplitude) ** 2
    corr = WhiteNoise()
    r = rate_semiclassical_harmonic(w, corr, p).rate[0] / rate_semiclassical_free(w, corr, p).rate[0]
    assert r == pytest.approx(ratio, rel=1e-12)


def test_white_noise_sample_variance():
    spec = EnsembleSpec(dt=0.01, T=0.01 * 2 ** 17)
    x = generate_colored_noise(WhiteNoise(), spec)
    assert x.shape == (3, 2 ** 17)
    assert np.var(x) * spec.dt == pytest.approx(1.0, rel=0.01)


def test_ou_autocorrelation():
    g = 2.0
    spec = EnsembleSpec(dt=0.05, T=0.05 * 10 ** 6)
    x = generate_colored_noise(ExponentialOU(g), spec)[0]
    lag = int(round(1 / (g * spec.dt)))
    c0 = np.mean(x * x)
    c1 = np.mean(x[:-lag] * x[lag:])
    assert c0 == pytest.approx(0.5 * g, rel=0.02)
    assert c1 / c0 == pytest.approx(math.exp(-1.0), abs=0.02)


def test_gaussian_noise_variance():
    corr = GaussianWindow(0.5)
    spec = EnsembleSpec(dt=0.05, T=0.05 * 2 ** 18)
    x = generate_colored_noise(corr, spec)
    assert np.var(x) == pytest.approx(corr.f(0.0), rel=0.03)


def test_tabulated_noise_band_check():
    corr = TabulatedSpectrum(omega=(0.0, 1.0, 10.0), values=(1.0, 1.0, 0.0))
    with pytest.raises(InvalidParameterError):
        generate_colored_noise(corr, EnsembleSpec(dt=0.01, T=10.0))
    x = generate_colored_noise(corr, EnsembleSpec(dt=0.5, T=0.5 * 2 ** 16))
    # band-limited spectrum: variance = int_0^{pi/dt} f_tilde dw / pi
    want = integrate.quad(corr.f_tilde, 0.0, math.pi / 0.5, points=[1.0])[0] / math.pi
    assert np.var(x) == pytest.approx(want, rel=0.05)


def test_noise_determinism():
    spec = EnsembleSpec(dt=0.1, T=10.0, master_seed=7)
    a = generate_colored_noise(ExponentialOU(1.0), spec, traj=3)
    b = generate_colored_noise(ExponentialOU(1.0), spec, traj=3)
    c = generate_colored_noise(ExponentialOU(1.0), spec, traj=4)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_free_integrator_is_scaled_noise():
    p = natural_params(lam=4.0)
    spec = EnsembleSpec(dt=0.1, T=10.0)
    noise = generate_colored_noise(WhiteNoise(), spec)
    assert np.array_equal(simulate_trajectory(noise, spec, p), 2.0 * noise)


def test_oscillator_invariant_over_many_periods():
    p = natural_params(kappa=1.0)
    dt = 0.1
    n = int(1e4 * 2 * math.pi / dt)
    spec = EnsembleSpec(dt=dt, T=dt * n, integrator="exponential-oscillator")
    acc = simulate_trajectory(np.zeros(n), spec, p, initial=(1.0, 0.5))
    inv = acc[1:-1] ** 2 - acc[:-2] * acc[2:]
    want = (1.0 + 0.25) * math.sin(dt) ** 2
    assert np.max(np.abs(inv / want - 1)) < 1e-10


def test_oscillator_homogeneous_solution():
    p = natural_params(kappa=4.0)
    dt = 0.01
    spec = EnsembleSpec(dt=dt, T=10.0, integrator="exponential-oscillator")
    acc = simulate_trajectory(np.zeros(1000), spec, p, initial=(0.3, -1.0))
    t = np.arange(1000) * dt
    x = 0.3 * np.cos(2 * t) - 0.5 * np.sin(2 * t)
    assert np.allclose(acc, -4 * x, atol=1e-12)


def test_oscillator_step_response():
    # constant force F from rest: a = F cos(omega0 t)
    p = natural_params(kappa=1.0)
    dt = 0.05
    spec = EnsembleSpec(dt=dt, T=20.0, integrator="exponential-oscillator")
    acc = simulate_trajectory(np.ones(400), spec, p)
    assert np.allclose(acc, np.cos(np.arange(400) * dt), atol=1e-12)


def test_oscillator_requires_binding():
    spec = EnsembleSpec(dt=0.1, T=10.0, integrator="exponential-oscillator")
    with pytest.raises(InvalidParameterError):
        simulate_trajectory(np.zeros(100), spec, natural_params())


def test_integrator_bound_detects_blow_up(monkeypatch):
    import stochrad.semiclassical as sc
    spec = EnsembleSpec(dt=0.1, T=10.0, integrator="exponential-oscillator")
    monkeypatch.setattr(sc, "_oscillator_filter",
                        lambda w0, dt: (np.array([1.0, 0.0, 0.0]), np.array([1.0, -2.1, 1.0])))
    with pytest.raises(IntegratorError):
        sc.simulate_trajectory(np.ones(100), spec, natural_params(kappa=1.0))


def test_parseval():
    spec = EnsembleSpec(dt=0.05, T=0.05 * 2 ** 15)
    p = natural_params()
    acc = simulate_trajectory(generate_colored_noise(ExponentialOU(1.0), spec), spec, p)
    om, psd = _acceleration_psd(acc, spec)
    integral = np.sum(psd) * (om[1] - om[0])
    assert integral == pytest.approx(np.sum(np.mean(acc ** 2, axis=1)), rel=0.02)


def test_ensemble_spec_validation():
    with pytest.raises(InvalidParameterError):
        EnsembleSpec(dt=0.1, T=1.05)
    with pytest.raises(InvalidParameterError):
        EnsembleSpec(dt=0.1, T=10.0, n_traj=1)
    with pytest.raises(InvalidParameterError):
        EnsembleSpec(dt=0.1, T=10.0, integrator="euler")
    with pytest.raises(InvalidParameterError):
        EnsembleSpec(dt=0.1, T=10.0, n_segments=3)


def test_mc_statistical_validity():
    p = natural_params(kappa=1.0)
    with pytest.raises(StatisticalValidityError):
        estimate_rate_mc(EnsembleSpec(dt=0.1, T=1.0, n_traj=2), WhiteNoise(), p)
    with pytest.raises(StatisticalValidityError):
        estimate_rate_mc(EnsembleSpec(dt=0.1, T=20.0, n_traj=2), ExponentialOU(0.01), p)
    with pytest.raises(StatisticalValidityError):
        estimate_rate_mc(EnsembleSpec(dt=0.1, T=20.0, n_traj=2,
                                      integrator="exponential-oscillator"),
                         WhiteNoise(), natural_params(kappa=0.01), mode="harmonic")
    with pytest.raises(InvalidParameterError):
        estimate_rate_mc(EnsembleSpec(dt=0.1, T=20.0, n_traj=2), WhiteNoise(), p, mode="harmonic")


def test_mc_free_band_agreement():
    p = natural_params()
    corr = ExponentialOU(1.0)
    spec = EnsembleSpec(dt=0.05, T=0.05 * 2 ** 13, n_traj=60, master_seed=11)
    res = estimate_rate_mc(spec, corr, p)
    lo, hi = res.omega[res.resolved][[0, -1]]
    centers, mean, se, members = res.band_average(lo, hi, 4)
    exact = rate_semiclassical_free(res.omega, corr, p).rate
    for m, s, idx in zip(mean, se, members):
        assert abs(m - exact[idx].mean()) < 4 * s
        assert s / m < 0.05


def test_mc_harmonic_transfer_ratio():
    p = natural_params(kappa=1.0)
    corr = WhiteNoise()
    base = dict(dt=0.05, T=0.05 * 2 ** 13, n_traj=20, master_seed=3, window="hann")
    free = estimate_rate_mc(EnsembleSpec(**base), corr, p)
    harm = estimate_rate_mc(EnsembleSpec(integrator="exponential-oscillator", **base),
                            corr, p, mode="harmonic")
    sel = (free.omega > 2.0) & (free.omega < 4.5)
    ratio = harm.rate[sel] / free.rate[sel]
    w = free.omega[sel]
    want = (w * w / (w * w - 1.0)) ** 2
    assert np.median(np.abs(ratio / want - 1)) < 0.02


def test_mc_determinism_and_csv(tmp_path):
    p = natural_params()
    spec = EnsembleSpec(dt=0.1, T=0.1 * 512, n_traj=4, master_seed=5)
    a = estimate_rate_mc(spec, ExponentialOU(1.0), p)
    b = estimate_rate_mc(spec, ExponentialOU(1.0), p)
    assert a.to_csv() == b.to_csv()
    a.to_csv(tmp_path / "mc.csv")
    assert (tmp_path / "mc.csv").read_text().startswith("omega,rate,stderr\n")
    assert '"mode": "free"' in a.to_json()
