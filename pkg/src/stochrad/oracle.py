"""Brute-force verifiers that share no algebra with the closed forms.

``bromwich_numeric`` inverts the Laplace-domain definitions of the kernels by
trapezoid quadrature along a vertical contour; the poles it needs to avoid
come from ``numpy.roots`` rather than from :mod:`stochrad.roots`.

``rate_quadrature`` evaluates the defining double time integral of the
emission rate on a tensor grid and differentiates it in ``t`` by finite
differences, with Richardson extrapolation in both the grid spacing and the
difference step.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import InvalidContourError, InvalidParameterError, ToleranceNotMetError
from .kernels import _natural, eval_G
from .noise import NoiseCorrelator, WhiteNoise
from .params import DIM_RATE, PhysicalParams, natural_scale

_KERNELS = ("F0", "F1", "F2", "G0", "G1", "Gpm")


def _sign(s):
    return 1 if s in ("+", 1) else -1


def _transform(kernel_id, args, p: PhysicalParams):
    """Laplace-domain integrand ``z^n / (prod(z - e_j) H(z))``, scaled units.

    Returns the integrand, its second derivative and the extra (non-H)
    poles ``e_j``.  The derivative comes from the logarithmic derivative
    of the explicit product, so no root of ``H`` is needed.
    """
    m, beta, kappa = p.m, p.beta, p.kappa
    if kernel_id in ("F0", "F1", "F2"):
        n, extra = -int(kernel_id[1]), []
    elif kernel_id in ("G0", "G1"):
        n = int(kernel_id[1])
        extra = [-_sign(args["sign"]) * 1j * args["omega"]]
    elif kernel_id == "Gpm":
        s1, s2 = (_sign(s) for s in args["signs"])
        n, extra = 2, [-s1 * 1j * args["omega"], -s2 * 1j * args["omega_prime"]]
    else:
        raise InvalidParameterError(f"unknown kernel {kernel_id!r}; expected one of {_KERNELS}")

    def fn(z):
        den = kappa + z * z * (m - beta * z)
        for e in extra:
            den = den * (z - e)
        return z ** n / den

    def fn2(z):
        H = kappa + z * z * (m - beta * z)
        r1 = (2 * m * z - 3 * beta * z * z) / H
        r2 = (2 * m - 6 * beta * z) / H
        d1 = n / z - r1
        d2 = -n / (z * z) - r2 + r1 * r1
        for e in extra:
            d1 = d1 - 1.0 / (z - e)
            d2 = d2 + 1.0 / (z - e) ** 2
        return fn(z) * (d1 * d1 + d2)

    poles = list(extra) + ([0j] * -n if n < 0 else [])
    return fn, fn2, poles


def _kernel_dimension(kernel_id):
    """Exponent ``d`` with kernel [time^d / mass]."""
    return {"F0": 1, "F1": 2, "F2": 3, "G0": 2, "G1": 1, "Gpm": 1}[kernel_id]


def _scale_args(args, tau):
    out = dict(args)
    for key in ("omega", "omega_prime"):
        if key in out:
            out[key] = out[key] * tau
    return out


def bromwich_numeric(kernel_id, args, t, params: PhysicalParams, contour_abscissa=None,
                     n_points=None, exclude_runaway=False, rtol=1e-13,
                     max_points=2 ** 25, full_output=False):
    """Numerical inverse Laplace transform of a kernel definition.

    Parameters
    ----------
    kernel_id : {"F0", "F1", "F2", "G0", "G1", "Gpm"}
    args : dict
        ``sign`` and ``omega`` for ``G0``/``G1``; ``signs``, ``omega`` and
        ``omega_prime`` for ``Gpm``.
    t : float
        Time, ``t >= 0``.
    contour_abscissa : float, optional
        ``Re z`` of the contour, in scaled units.  Must lie right of every
        singularity, or, with ``exclude_runaway``, strictly between the
        runaway root and all other singularities (the inversion then omits
        the runaway residue).
    n_points : int, optional
        Fixed half-width of the trapezoid grid in points; when omitted the
        truncation ``|Im z| <= L`` is doubled until the sum settles.

    Notes
    -----
    The default contour sits ``min(1/2, 2/t)`` right of the dominant
    singularity, which keeps the ``exp(a t)`` round-off amplification
    bounded.  For ``t >= 1`` (scaled) the transform is differentiated twice
    and the result divided by ``t^2``, using ``L^{-1}[F''](t) = t^2 f(t)``.

    Returns
    -------
    value : complex
        Kernel value in the units of ``params``.
    error : float
        Truncation/discretization error estimate (with ``full_output``).
    """
    if t < 0:
        raise InvalidParameterError("t must be non-negative")
    sp, _, tau = _natural(params, None)
    ts = t / tau
    fn, fn2, extra = _transform(kernel_id, _scale_args(args, tau), sp)
    hroots = np.roots([-sp.beta, sp.m, 0.0, sp.kappa]) if sp.beta > 0 \
        else np.roots([sp.m, 0.0, sp.kappa])
    hroots = [complex(z) for z in np.atleast_1d(hroots)]
    sing = hroots + list(extra)
    # a contour far right of the dominant pole costs exp((a - lo) t) in round-off
    gap = 2.0 / ts if ts > 0 else math.inf
    # for t >= 1 invert F'' and divide by t^2: the tail then decays two powers faster
    ibp = ts >= 1.0
    integrand = fn2 if ibp else fn
    if exclude_runaway:
        if sp.beta == 0:
            raise InvalidContourError("no runaway root without radiation reaction")
        z1 = max(hroots, key=lambda z: z.real)
        others = [z.real for z in sing if abs(z - z1) > 1e-9]
        lo, hi = max(others), z1.real
        a = lo + min(0.5 * (hi - lo), gap) if contour_abscissa is None else contour_abscissa
        if not lo < a < hi:
            raise InvalidContourError(
                f"abscissa {a} must separate the runaway root from the other poles")
    else:
        lo = max(z.real for z in sing)
        a = lo + min(0.5, gap) if contour_abscissa is None else contour_abscissa
        if not a > lo:
            raise InvalidContourError(f"abscissa {a} lies left of a singularity at Re z = {lo}")
    d = min(abs(a - z.real) for z in sing)
    # trapezoid on an analytic strip: error ~ exp(-2 pi d / h + d t)
    h = 2.0 * math.pi * d / (40.0 + d * ts)

    def chunk_sum(k0, k1):
        """Sum of the integrand over ``k0 <= |k| < k1`` (y = k h); also even k only."""
        total = even = 0j
        if k0 == 0:
            total = even = complex(integrand(a + 0j))
            k0 = 1
        for start in range(k0, k1, 2 ** 20):
            k = np.arange(start, min(k1, start + 2 ** 20))
            y = k * h
            vals = (integrand(a + 1j * y) * np.exp(1j * y * ts)
                    + integrand(a - 1j * y) * np.exp(-1j * y * ts))
            total += vals.sum()
            even += vals[k % 2 == 0].sum()
        return total, even

    if n_points is not None:
        K = int(n_points)
        s, s_even = chunk_sum(0, K + 1)
        err = abs(h * s - 2 * h * s_even)
    else:
        K = max(64, int(math.ceil(200.0 / h)))
        s, s_even = chunk_sum(0, K + 1)
        prev = h * s
        err = math.inf
        while True:
            add, add_even = chunk_sum(K + 1, 2 * K + 1)
            s += add
            s_even += add_even
            K *= 2
            cur = h * s
            trunc = abs(cur - prev)
            disc = abs(cur - 2 * h * s_even)
            err = max(trunc, disc * 1e-3)
            if trunc <= rtol * abs(cur) or trunc <= 1e-300:
                break
            if 2 * K + 1 > max_points:
                break
            prev = cur
    scale = math.exp(a * ts) / (2.0 * math.pi) / (ts * ts if ibp else 1.0)
    value = scale * h * s
    error = scale * err
    factor = tau ** _kernel_dimension(kernel_id) / params.m
    value, error = complex(value * factor), float(error * factor)
    return (value, error) if full_output else value


def _trapezoid_weights(n, T):
    w = np.full(n + 1, T / n)
    w[0] = w[-1] = 0.5 * T / n
    return w


def _double_integral(omega, T, n, corr, sp, roots):
    """``int_0^T int_0^T G1^-(u) G1^+(v) f(u - v) du dv`` by tensor trapezoid."""
    u = np.linspace(0.0, T, n + 1)
    gm = eval_G(1, "-", omega, u, roots, sp)
    gp = eval_G(1, "+", omega, u, roots, sp)
    w = _trapezoid_weights(n, T)
    F = corr.f(u[:, None] - u[None, :])
    # pairwise-summed, fixed-order reduction
    inner = (F * (w * gp)[None, :]).sum(axis=1)
    return complex(np.sum(w * gm * inner))


def rate_quadrature(omega, t, corr: NoiseCorrelator, params: PhysicalParams, grid_n=512,
                    rtol=1e-4, delta=None, full_output=False):
    """Emission rate from the defining double time integral.

    The integral is differentiated by a centered difference of step
    ``delta`` and extrapolated (Richardson) over grids ``grid_n/2`` and
    ``grid_n`` and steps ``delta`` and ``delta/2``.  Runaway terms are
    dropped from the kernels.

    Raises
    ------
    ToleranceNotMetError
        If the extrapolation ladder disagrees by more than ``rtol``.
    """
    if isinstance(corr, WhiteNoise):
        raise InvalidParameterError("white noise has no pointwise correlator to integrate")
    if t <= 0:
        raise InvalidParameterError("t must be positive")
    if grid_n < 64 or grid_n % 4:
        raise InvalidParameterError("grid_n must be a multiple of 4 and at least 64")
    sp, roots, tau = _natural(params, None)
    ts, ws = t / tau, omega * tau
    c = corr.rescaled(tau)
    if delta is None:
        delta = 1e-3 * ts
    else:
        delta = delta / tau

    def D(n, dl):
        hi = _double_integral(ws, ts + dl, n, c, sp, roots)
        lo = _double_integral(ws, ts - dl, n, c, sp, roots)
        return (hi - lo) / (2.0 * dl)

    levels = (grid_n // 4, grid_n // 2, grid_n)
    d_full = [D(n, delta) for n in levels]
    d_half = [D(n, delta / 2) for n in levels[1:]]
    rich_full = (4 * d_full[2] - d_full[1]) / 3
    rich_coarse = (4 * d_full[1] - d_full[0]) / 3
    rich_half = (4 * d_half[1] - d_half[0]) / 3
    value = (4 * rich_half - rich_full) / 3
    e1 = abs(d_full[0] - d_full[1])
    e2 = abs(d_full[1] - d_full[2])
    order = math.log2(e1 / e2) if e1 > 0 and e2 > 0 else float("nan")
    err = max(abs(rich_full - rich_coarse), abs(rich_half - rich_full))
    prefactor = sp.rate_prefactor * ws
    rate = prefactor * value.real
    scale = natural_scale(params) if tau != 1.0 else None
    to_si = scale.factor(DIM_RATE) if scale is not None else 1.0
    rate *= to_si
    err_rate = abs(prefactor) * err * to_si
    info = {"observed_order": order, "error_estimate": err_rate,
            "raw": prefactor * d_full[2].real * to_si, "imag": prefactor * value.imag * to_si}
    if err_rate > rtol * abs(rate) and rate != 0:
        raise ToleranceNotMetError(
            f"Richardson ladder did not settle: error {err_rate:.3g} vs rate {rate:.3g}",
            estimate=rate)
    return (rate, info) if full_output else rate
