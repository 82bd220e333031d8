import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stochrad.errors import InvalidParameterError, NearResonanceWarning, ResonanceError
from stochrad.noise import ExponentialOU, GaussianWindow, TabulatedSpectrum, WhiteNoise
from stochrad.params import PhysicalParams, natural_params
from stochrad.spectra import (RateOptions, RateSeries, finite_time_series, rate_finite_time,
                              rate_free_exact, rate_free_limit_of_harmonic,
                              rate_harmonic_asymptotic, rate_perturbative_free,
                              rate_perturbative_harmonic, rate_white_baseline)

W = np.geomspace(0.01, 5.0, 9)
WHITE = WhiteNoise()
BANDPASS = TabulatedSpectrum(omega=(0.0, 0.5, 1.0, 2.0, 3.0, 50.0),
                             values=(0.0, 0.6, 1.0, 0.4, 0.0, 0.0))


def _half(w, p):
    return 0.5 * rate_white_baseline(w, p).rate


def test_white_baseline_laws():
    p = natural_params()
    s = rate_white_baseline(W, p)
    assert np.allclose(s.rate * W, s.rate[0] * W[0], rtol=1e-14)
    assert np.all(rate_white_baseline(W, natural_params(lam=0.0)).rate == 0)


def test_white_baseline_electron_direct_substitution():
    p = PhysicalParams.electron()
    w = 1e19
    direct = p.lam * p.hbar * p.e ** 2 / (np.pi ** 2 * p.eps0 * p.c ** 2 * p.m ** 2 * w)
    assert rate_white_baseline(w, p).rate[0] == pytest.approx(direct, rel=1e-14)


@pytest.mark.parametrize("w", [0.0, -1.0, np.nan])
def test_rejects_bad_frequency(w):
    with pytest.raises(InvalidParameterError):
        rate_white_baseline([w], natural_params())


def test_free_exact_white_small_beta_is_white_rate():
    p = natural_params(beta=0.0)
    assert np.allclose(rate_free_exact(W, WHITE, p).rate, 2 * _half(W, p), rtol=1e-15)


def test_free_exact_without_zero_frequency_weight():
    p = natural_params()
    x2 = W ** 2
    want = _half(W, p) * BANDPASS.f_tilde(np.minimum(W, 50.0)) / (1 + x2)
    assert np.allclose(rate_free_exact(W, BANDPASS, p).rate, want, rtol=1e-14)


def test_harmonic_free_limit_pointwise():
    corr = ExponentialOU(0.7)
    p = natural_params()
    a = rate_harmonic_asymptotic(W, corr, p).rate
    b = rate_free_limit_of_harmonic(W, corr, p).rate
    assert np.allclose(a, b, rtol=1e-14)


def test_harmonic_at_resonance():
    p = natural_params(kappa=0.04)
    corr = GaussianWindow(0.8)
    w0 = p.omega0
    got = rate_harmonic_asymptotic([w0], corr, p).rate[0]
    want = p.rate_prefactor * corr.f_tilde(w0) / (p.beta ** 2 * w0 ** 3)
    assert got == pytest.approx(want, rel=1e-12)


def test_harmonic_half_resonance_undamped():
    p = natural_params(kappa=1.0, beta=0.0)
    w = np.array([2.0])
    assert rate_harmonic_asymptotic(w, WHITE, p).rate[0] == pytest.approx(
        _half(w, p)[0] * 16 / 9, rel=1e-14)


def test_harmonic_undamped_resonance_raises():
    with pytest.raises(ResonanceError):
        rate_harmonic_asymptotic([1.0], WHITE, natural_params(kappa=1.0, beta=0.0))


def test_harmonic_argmax_at_resonance():
    p = natural_params(kappa=1e-4)
    w = np.linspace(0.005, 0.02, 3001)
    r = rate_harmonic_asymptotic(w, WHITE, p).rate
    assert abs(w[np.argmax(r)] - 0.01) <= w[1] - w[0]


def test_free_limit_cutoff():
    p = natural_params()
    r = rate_free_limit_of_harmonic([3.5, 10.0], BANDPASS, p).rate
    assert np.all(r == 0)


def test_unphysical_term_difference():
    p = natural_params()
    for corr in (ExponentialOU(0.3), GaussianWindow(2.0)):
        diff = rate_free_exact(W, corr, p).rate - rate_free_limit_of_harmonic(W, corr, p).rate
        assert np.allclose(diff, _half(W, p) * corr.f_tilde(0.0), rtol=1e-12)


def test_csl_value_and_factor_two():
    p = natural_params(beta=0.0)
    lim = rate_free_limit_of_harmonic(W, WHITE, p).rate
    assert np.allclose(lim, _half(W, p), rtol=1e-15)
    assert np.allclose(rate_free_exact(W, WHITE, p).rate / lim, 2.0, rtol=1e-14)


def test_perturbative_free_white():
    p = natural_params()
    r = rate_perturbative_free(W, WHITE, p).rate
    assert np.allclose(r, 0.75 * 2 * _half(W, p), rtol=1e-15)
    assert np.all(r > _half(W, p)) and np.all(r < rate_free_exact(W, WHITE, natural_params(beta=0.0)).rate)


def test_perturbative_free_band_pass():
    p = natural_params(beta=0.0)
    assert np.allclose(rate_perturbative_free(W, BANDPASS, p).rate,
                       rate_free_limit_of_harmonic(W, BANDPASS, p).rate, rtol=1e-14)
    assert np.all(rate_perturbative_free(W, WHITE, natural_params(lam=0.0)).rate == 0)


def test_perturbative_harmonic_white_reduction():
    p = natural_params(kappa=0.25, beta=0.0)
    w = np.array([0.1, 0.3, 0.9, 4.0])
    u2 = (0.5 / w) ** 2
    want = _half(w, p) * ((1 + u2) + 2) / (2 * (1 - u2) ** 2)
    assert np.allclose(rate_perturbative_harmonic(w, WHITE, p).rate, want, rtol=1e-14)


def test_perturbative_harmonic_minus_asymptotic():
    corr = ExponentialOU(1.3)
    p = natural_params(kappa=0.25, beta=0.0)
    w = np.array([0.1, 0.3, 0.9, 4.0])
    u2 = (0.5 / w) ** 2
    diff = rate_perturbative_harmonic(w, corr, p).rate - rate_harmonic_asymptotic(w, corr, p).rate
    want = _half(w, p) * (1 + u2) * corr.f_tilde(0.5) / (2 * (1 - u2) ** 2)
    assert np.allclose(diff, want, rtol=1e-12)


def test_perturbative_harmonic_free_limit():
    corr = GaussianWindow(1.5)
    p = natural_params(beta=0.0)
    assert np.allclose(rate_perturbative_harmonic(W, corr, p).rate,
                       rate_perturbative_free(W, corr, p).rate, rtol=1e-14)


def test_perturbative_harmonic_resonance():
    p = natural_params(kappa=0.25, beta=0.0)
    with pytest.raises(ResonanceError):
        rate_perturbative_harmonic([0.5 * (1 + 1e-12)], WHITE, p)


def test_finite_time_zero():
    p = natural_params(kappa=0.01)
    assert rate_finite_time(0.1, 0.0, ExponentialOU(1.0), p) == 0.0


@pytest.mark.parametrize("corr", [WHITE, ExponentialOU(0.05), GaussianWindow(3.0)])
def test_finite_time_long_limit_harmonic(corr):
    p = natural_params(kappa=0.01)
    w = np.array([0.03, 0.13, 0.2])
    t = 30 * 2 / 0.01
    assert np.allclose(rate_finite_time(w, t, corr, p),
                       rate_harmonic_asymptotic(w, corr, p).rate, rtol=1e-6)


def test_finite_time_envelope():
    p = natural_params(kappa=0.01)
    w = 0.13
    asym = rate_harmonic_asymptotic(w, WHITE, p).rate[0]
    devs = [abs(rate_finite_time(w, t, WHITE, p) / asym - 1) for t in (400.0, 800.0, 1600.0)]
    assert devs[2] < devs[1] < devs[0]


@pytest.mark.parametrize("corr", [WHITE, GaussianWindow(3.0), ExponentialOU(2.0)])
def test_finite_time_free_first_limit(corr):
    p = natural_params(kappa=0.0)
    opts = RateOptions(drop_oscillatory=True)
    got = rate_finite_time(W, 200.0, corr, p, opts)
    assert np.allclose(got, rate_free_exact(W, corr, p).rate, rtol=1e-10)


@pytest.mark.parametrize("corr", [WHITE, GaussianWindow(3.0), ExponentialOU(2.0)])
def test_finite_time_lowest_order(corr):
    p = natural_params(kappa=0.01, beta=0.0)
    w = np.array([0.03, 0.13, 0.2])
    got = rate_finite_time(w, 500.0, corr, p, RateOptions(drop_oscillatory=True))
    assert np.allclose(got, rate_perturbative_harmonic(w, corr, p).rate, rtol=1e-10)


def test_limits_do_not_commute():
    corr = ExponentialOU(0.5)
    p = natural_params(beta=0.0)
    late = rate_free_limit_of_harmonic(W, corr, p).rate
    early = rate_finite_time(W, 300.0, corr, natural_params(beta=0.0),
                             RateOptions(drop_oscillatory=True))
    assert np.allclose(early - late, _half(W, p) * corr.f_tilde(0.0), rtol=1e-10)


def test_finite_time_si_matches_scaled():
    pe = PhysicalParams.electron(omega0=3.29e15)
    w = np.array([1e15, 3e15, 1e16])
    t = 30 * 2 * pe.m / (pe.kappa * pe.beta)
    got = rate_finite_time(w, t, WHITE, pe)
    assert np.allclose(got, rate_harmonic_asymptotic(w, WHITE, pe).rate, rtol=1e-6)


def test_finite_time_families_add_up():
    p = natural_params(kappa=0.02)
    corr = ExponentialOU(0.4)
    total = rate_finite_time(0.2, 15.0, corr, p)
    parts = sum(rate_finite_time(0.2, 15.0, corr, p, RateOptions(families=(f,)))
                for f in ("pair", "cross", "stationary"))
    assert parts == pytest.approx(total, rel=1e-12)


def test_finite_time_resonance_without_damping():
    p = natural_params(kappa=0.25, beta=0.0)
    with pytest.raises(ResonanceError), pytest.warns(NearResonanceWarning):
        rate_finite_time(0.5, 10.0, WHITE, p)


def test_finite_time_negative_t():
    with pytest.raises(InvalidParameterError):
        rate_finite_time(0.5, -1.0, WHITE, natural_params())


@settings(max_examples=25, deadline=None)
@given(w=st.floats(0.01, 10.0), scale=st.floats(0.1, 10.0))
def test_rates_scale_with_lambda(w, scale):
    p1, p2 = natural_params(kappa=0.1), natural_params(kappa=0.1, lam=scale)
    corr = GaussianWindow(1.0)
    for fn in (rate_free_exact, rate_harmonic_asymptotic, rate_perturbative_free):
        assert fn(w, corr, p2).rate[0] == pytest.approx(scale * fn(w, corr, p1).rate[0], rel=1e-13)


def test_series_roundtrip(tmp_path):
    p = natural_params(kappa=0.01)
    s = finite_time_series([0.1, 0.2], 5.0, ExponentialOU(1.0), p)
    text = s.to_csv(tmp_path / "s.csv")
    rows = text.strip().splitlines()
    assert rows[0] == "omega_k,rate,formula,t"
    assert float(rows[1].split(",")[1]) == s.rate[0]
    d = json.loads(s.to_json(tmp_path / "s.json"))
    assert d["formula"] == "finite_time" and d["t"] == 5.0
    assert d["correlator"]["kind"] == "ou"


def test_series_per_omega():
    p = PhysicalParams.electron()
    s = rate_white_baseline([1e18], p)
    assert s.per_angular_frequency().rate[0] == pytest.approx(s.rate[0] / p.c, rel=1e-15)


def test_series_validates_grid():
    with pytest.raises(InvalidParameterError):
        RateSeries([2.0, 1.0], [0.0, 0.0], "x")
