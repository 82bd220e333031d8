import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stochrad.errors import InvalidParameterError, NearResonanceWarning, OverflowGuardError
from stochrad.kernels import KernelOptions, eval_F, eval_G, eval_Gpm, g1_terms
from stochrad.params import PhysicalParams, natural_params
from stochrad.roots import solve_roots

FULL = KernelOptions(include_runaway=True)


def _setup(kappa):
    p = natural_params(kappa=kappa)
    return p, solve_roots(p)


def test_F0_vanishes_at_zero_with_all_residues():
    p, r = _setup(1e-3)
    assert abs(eval_F(0, 0.0, r, p, FULL)) < 1e-14


def test_F0_curvature_at_zero():
    p, r = _setup(1e-3)
    h = 1e-3
    vals = eval_F(0, np.array([0.0, h, 2 * h]), r, p, FULL)
    second = (vals[2] - 2 * vals[1] + vals[0]) / h ** 2
    assert second.real == pytest.approx(-1.0, rel=5e-3)


def test_free_F0_closed_form():
    p, r = _setup(0.0)
    t = np.linspace(0, 5, 11)
    assert np.allclose(eval_F(0, t, r, p), t + 1.0, rtol=1e-14, atol=1e-14)
    assert np.allclose(eval_F(0, t, r, p, FULL), t + 1.0 - np.exp(t), rtol=1e-13, atol=1e-13)


def test_free_F2_taylor():
    # 1/(z^4 (1 - z)) minus the runaway residue: t^3/6 + t^2/2 + t + 1
    p, r = _setup(0.0)
    t = np.array([0.5, 2.0])
    assert np.allclose(eval_F(2, t, r, p), t ** 3 / 6 + t ** 2 / 2 + t + 1, rtol=1e-14)


@pytest.mark.parametrize("kappa", [0.0, 1e-6, 0.3])
def test_derivative_chain(kappa):
    p, r = _setup(kappa)
    h = 1e-4
    for t in (0.5, 3.0, 8.0):
        for n in (1, 2):
            d = (eval_F(n, t + h, r, p) - eval_F(n, t - h, r, p)) / (2 * h)
            assert abs(d - eval_F(n - 1, t, r, p)) <= 1e-6 * max(1.0, abs(d))


@settings(max_examples=40, deadline=None)
@given(kappa=st.floats(0.0, 1.0), w=st.floats(1e-3, 10.0), t=st.floats(0.0, 30.0))
def test_conjugation_symmetry(kappa, w, t):
    p, r = _setup(kappa)
    gp, gm = eval_G(1, "+", w, t, r, p), eval_G(1, "-", w, t, r, p)
    assert abs(gm - np.conj(gp)) <= 1e-12 * max(1.0, abs(gp))
    a = eval_Gpm(("+", "+"), w, 1.3 * w, t, r, p)
    b = eval_Gpm(("-", "-"), w, 1.3 * w, t, r, p)
    assert abs(b - np.conj(a)) <= 1e-12 * max(1.0, abs(a))


def test_F_real():
    p, r = _setup(0.02)
    vals = eval_F(1, np.linspace(0, 20, 7), r, p)
    assert np.max(np.abs(vals.imag)) <= 1e-12 * np.max(np.abs(vals))


def test_free_G1_terms_match_closed_form():
    p, r = _setup(0.0)
    w = 0.4
    for sign, s in (("+", 1), ("-", -1)):
        terms = g1_terms(sign, w, p, r)

        def at(z):
            return min(terms, key=lambda t: abs(t.exponent - z))

        assert at(0).coeffs[0] == pytest.approx(-s * 1j / w, rel=1e-14)
        assert at(-s * 1j * w).coeffs[0] == pytest.approx(s * 1j / (w * (1 + s * 1j * w)), rel=1e-14)
        runaway = [t for t in terms if t.runaway][0]
        assert runaway.coeffs[0] == pytest.approx(-1 / (1 + s * 1j * w), rel=1e-14)


def test_free_G1_residues_cancel_at_zero():
    p, r = _setup(0.0)
    assert abs(eval_G(1, "+", 0.7, 0.0, r, p, FULL)) < 1e-15


def test_Gpm_vanishes_at_zero():
    p, r = _setup(1e-2)
    for signs in (("+", "+"), ("+", "-")):
        assert abs(eval_Gpm(signs, 0.3, 0.5, 0.0, r, p, FULL)) < 1e-10


def test_Gpm_equal_frequencies_double_pole():
    p, r = _setup(1e-2)
    t, w, h = 2.0, 0.4, 1e-5
    exact = eval_Gpm(("+", "+"), w, w, t, r, p)
    near = 0.5 * (eval_Gpm(("+", "+"), w, w + h, t, r, p)
                  + eval_Gpm(("+", "+"), w, w - h, t, r, p))
    assert abs(exact - near) <= 1e-8 * abs(exact)


def test_continuity_in_kappa():
    p0, r0 = _setup(0.0)
    diffs = []
    for eps in (1e-6, 5e-7, 2.5e-7):
        p, r = _setup(eps)
        diffs.append(abs(eval_F(0, 2.0, r, p) - eval_F(0, 2.0, r0, p0)))
    for a, b in zip(diffs, diffs[1:]):
        assert a / b == pytest.approx(2.0, rel=0.2)


def test_runaway_option_difference_is_runaway_residue():
    p, r = _setup(0.1)
    t = 0.7
    diff = eval_F(0, t, r, p, FULL) - eval_F(0, t, r, p)
    z1 = r.z1
    assert diff == pytest.approx(np.exp(z1 * t) / (-3 * z1 ** 2 + 2 * z1), rel=1e-12)


def test_runaway_overflow_guard():
    p, r = _setup(0.1)
    with pytest.raises(OverflowGuardError):
        eval_F(0, 1000.0, r, p, FULL)


def test_si_units_match_scaled():
    p = PhysicalParams.electron(omega0=3.29e15)
    r = solve_roots(p)
    tau = p.beta / p.m
    sp = natural_params(omega0=p.omega0 * tau)
    sr = solve_roots(sp)
    t = 1e-15
    si = eval_G(1, "+", 2e15, t, r, p)
    sc = eval_G(1, "+", 2e15 * tau, t / tau, sr, sp)
    assert si == pytest.approx(sc * tau / p.m, rel=1e-10)


def test_near_resonance_warning_without_reaction():
    p = natural_params(kappa=0.25, beta=0.0)
    r = solve_roots(p)
    with pytest.warns(NearResonanceWarning):
        eval_G(1, "+", 0.5 * (1 + 1e-10), 1.0, r, p)


def test_resonant_double_pole_without_reaction():
    p = natural_params(kappa=0.25, beta=0.0)
    r = solve_roots(p)
    t, h = 3.0, 1e-6
    with pytest.warns(NearResonanceWarning):
        exact = eval_G(1, "+", 0.5, t, r, p)
    near = 0.5 * (eval_G(1, "+", 0.5 + h, t, r, p) + eval_G(1, "+", 0.5 - h, t, r, p))
    assert abs(exact - near) <= 1e-6 * abs(exact)


@pytest.mark.parametrize("call", [
    lambda p, r: eval_F(3, 1.0, r, p),
    lambda p, r: eval_G(1, "+", -1.0, 1.0, r, p),
    lambda p, r: eval_G(1, "x", 1.0, 1.0, r, p),
    lambda p, r: eval_F(0, -1.0, r, p),
])
def test_invalid_arguments(call):
    p, r = _setup(0.1)
    with pytest.raises(InvalidParameterError):
        call(p, r)
