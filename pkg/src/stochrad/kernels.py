"""Response kernels as residue sums over the zeros of ``H(z)``.

Each kernel is an inverse Laplace transform of a rational function

    R(z) = z^n / ( prod_j (z - p_j) * H(z) )

so it equals the sum of residues of ``R(z) exp(z t)``.  A pole ``p`` of
multiplicity ``M`` contributes ``exp(p t) * P(t)`` with ``P`` a polynomial of
degree ``M - 1`` whose coefficients are Taylor coefficients of
``(z - p)^M R(z)`` at ``p``.  Double and higher poles (``kappa = 0``, equal
field frequencies) are therefore handled analytically.

Poles that are close but distinct (small ``kappa`` puts ``z2, z3`` next to
the origin) have large residues of nearly opposite sign.  Such clusters are
summed as one divided difference, expanded about the cluster centroid, for
``t`` up to the inverse cluster radius; beyond that the individual residues
no longer cancel and are summed directly.

The runaway root ``z1`` is dropped unless ``KernelOptions.include_runaway``.
All evaluation happens in scaled units; inputs and outputs use the units of
the supplied parameters.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, NearResonanceWarning, OverflowGuardError
from .noise import OVERFLOW_GUARD
from .params import PhysicalParams, is_natural, natural_scale, convert_params
from .roots import CONFLUENCE_RTOL, RootSet, solve_roots


@dataclass(frozen=True)
class KernelOptions:
    include_runaway: bool = False


DEFAULT_OPTIONS = KernelOptions()


@dataclass(frozen=True)
class ExpTerm:
    """One residue contribution ``exp(exponent t) * sum_j coeffs[j] t^j``."""

    exponent: complex
    coeffs: tuple
    runaway: bool = False

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        poly = np.zeros_like(t, dtype=complex)
        for c in reversed(self.coeffs):
            poly = poly * t + c
        return np.exp(self.exponent * t) * poly


def _sign(sign):
    if sign in ("+", 1, +1.0):
        return 1
    if sign in ("-", -1, -1.0):
        return -1
    raise InvalidParameterError(f"sign must be '+' or '-', got {sign!r}")


def _h_poles(params: PhysicalParams, roots: RootSet):
    """Leading coefficient and ``[(pole, multiplicity)]`` of ``H``.

    Only an exactly repeated pair is treated as a double pole; a nearly
    repeated pair is summed accurately by the cluster expansion instead.
    """
    pair = [(0j, 2)] if roots.z2 == roots.z3 else [(roots.z2, 1), (roots.z3, 1)]
    if params.beta == 0:
        return params.m, pair, None
    return -params.beta, [(roots.z1, 1)] + pair, roots.z1


#: Poles closer than this (relative to their size) are merged into one.
MERGE_RTOL = 1e-12


def _merge(poles, n_roots):
    """Merge coincident poles.

    ``poles`` is a list of ``(position, multiplicity)``; the first
    ``n_roots`` entries belong to ``H``.  Returns the merged list and whether
    an external pole lies within the confluence threshold of a root.
    """
    merged = []
    resonant = False
    for idx, (p, mult) in enumerate(poles):
        if idx >= n_roots:
            for q, _ in merged[:n_roots]:
                if q != 0 and abs(p - q) <= CONFLUENCE_RTOL * abs(q):
                    resonant = True
        for j, (q, mq) in enumerate(merged):
            if abs(p - q) <= MERGE_RTOL * max(abs(p), abs(q)):
                # keep exact zeros exact so numerator cancellation still works
                pos = q if q == 0 else (p if p == 0 else (p * mult + q * mq) / (mult + mq))
                merged[j] = (pos, mq + mult)
                break
        else:
            merged.append((complex(p), mult))
    return merged, resonant


def _taylor_inverse_power(d, m, order):
    """Coefficients of ``(d + e)^(-m)`` in powers of ``e`` up to ``order``."""
    out = np.empty(order, dtype=complex)
    for k in range(order):
        out[k] = (-1) ** k * math.comb(m + k - 1, k) * d ** (-m - k)
    return out


def _taylor_power(p, n, order):
    """Coefficients of ``(p + e)^n`` up to ``order``."""
    return np.array([math.comb(n, k) * p ** (n - k) if k <= n else 0.0
                     for k in range(order)], dtype=complex)


def _cleaned_poles(numer_power, extra_poles, params, roots, warn):
    """Merged poles of ``z^n / (prod (z - p_j) H(z))`` after cancelling ``z^n``."""
    if roots is None:
        roots = solve_roots(params)
    lead, hpoles, z1 = _h_poles(params, roots)
    poles = list(hpoles) + [(complex(p), 1) for p in extra_poles]
    poles, resonant = _merge(poles, len(hpoles))
    if resonant and warn:
        warnings.warn("field frequency is nearly resonant with an undamped root of H",
                      NearResonanceWarning, stacklevel=4)
    n = numer_power
    cleaned = []
    for p, mult in poles:
        if p == 0 and n > 0:
            cancel = min(n, mult)
            n -= cancel
            mult -= cancel
        if mult > 0:
            cleaned.append((p, mult))
    return lead, n, cleaned, z1


def _residue_terms(cleaned, n, lead, z1):
    terms = []
    for i, (p, mult) in enumerate(cleaned):
        g = _taylor_power(p, n, mult) / lead
        for j, (q, mq) in enumerate(cleaned):
            if j != i:
                g = np.convolve(g, _taylor_inverse_power(p - q, mq, mult))[:mult]
        # residue of g(z) exp(zt) / (z-p)^M: sum_k g_k t^(M-1-k) / (M-1-k)!
        coeffs = tuple(g[mult - 1 - j] / math.factorial(j) for j in range(mult))
        terms.append(ExpTerm(p, coeffs, runaway=(z1 is not None and p == z1)))
    return terms


def pole_expansion(numer_power, extra_poles, params: PhysicalParams, roots: RootSet = None,
                   warn=True):
    """Residue terms of ``z^n exp(zt) / (prod (z - p_j) H(z))``.

    Works in the units of ``params``.  Runaway terms are flagged, not
    removed.
    """
    lead, n, cleaned, z1 = _cleaned_poles(numer_power, extra_poles, params, roots, warn)
    return _residue_terms(cleaned, n, lead, z1)


# A cluster of nearby poles is summed as one divided difference when its
# diameter is below this fraction of the distance to the nearest other pole.
_CLUSTER_RATIO = 0.1
_SERIES_ORDER = 40


def _clusters(cleaned, z1):
    """Group nearby non-runaway poles; returns lists of indices into ``cleaned``."""
    groups = [[i] for i, (p, _) in enumerate(cleaned) if not (z1 is not None and p == z1)]
    pos = [p for p, _ in cleaned]

    def diameter(g):
        return max((abs(pos[i] - pos[j]) for i in g for j in g), default=0.0)

    def gap(g):
        c = np.mean([pos[i] for i in g])
        return min((abs(pos[j] - c) for j in range(len(pos)) if j not in g), default=math.inf)

    # single-linkage dendrogram; keep the largest well-separated nodes
    nodes = []
    while len(groups) > 1:
        best = None
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                d = min(abs(pos[x] - pos[y]) for x in groups[i] for y in groups[j])
                if best is None or d < best[0]:
                    best = (d, i, j)
        _, i, j = best
        groups[i] = groups[i] + groups.pop(j)
        nodes.append(list(groups[i]))
    valid = [g for g in nodes if diameter(g) <= _CLUSTER_RATIO * gap(g)]
    chosen = []
    for g in sorted(valid, key=len, reverse=True):
        if not any(set(g) & set(h) for h in chosen):
            chosen.append(g)
    return chosen


def _cluster_series(group, cleaned, n, lead):
    """Divided-difference form of the summed residues of a pole cluster.

    Returns ``(c, coeffs, radius)``: the cluster contributes
    ``exp(c t) sum_j coeffs[j] t^j`` for ``radius * t <= 1``.  Expanding
    about the centroid avoids the cancellation between the large,
    nearly opposite residues of individual poles.
    """
    nodes = [cleaned[i][0] for i in group for _ in range(cleaned[i][1])]
    N = len(nodes)
    c = complex(np.mean(nodes))
    delta = [p - c for p in nodes]
    J = _SERIES_ORDER
    order = J + N + _SERIES_ORDER
    b = _taylor_power(c, n, order) / lead
    for i, (q, mq) in enumerate(cleaned):
        if i not in group:
            b = np.convolve(b, _taylor_inverse_power(c - q, mq, order))[:order]
    # complete homogeneous symmetric polynomials of the offsets
    K = order + J
    h = np.zeros(K, dtype=complex)
    h[0] = 1.0
    for d in delta:
        for k in range(1, K):
            h[k] += d * h[k - 1]
    coeffs = np.zeros(J, dtype=complex)
    for j in range(J):
        i0 = max(0, N - 1 - j)
        idx = np.arange(i0, order)
        coeffs[j] = np.sum(b[idx] * h[idx + j - N + 1]) / math.factorial(j)
    radius = max(abs(d) for d in delta)
    return c, coeffs, radius


def _sum_terms(numer_power, extra_poles, ts, params, roots, include_runaway):
    lead, n, cleaned, z1 = _cleaned_poles(numer_power, extra_poles, params, roots, True)
    groups = _clusters(cleaned, z1)
    grouped = {i for g in groups for i in g}
    out = np.zeros_like(ts, dtype=complex)
    plain = _residue_terms(cleaned, n, lead, z1)
    for i, term in enumerate(plain):
        if i in grouped:
            continue
        if term.runaway:
            if not include_runaway:
                continue
            if term.exponent.real * np.max(ts, initial=0.0) > OVERFLOW_GUARD:
                raise OverflowGuardError("runaway term overflows; reduce t or drop it")
        out = out + term(ts)
    for g in groups:
        c, coeffs, radius = _cluster_series(g, cleaned, n, lead)
        near = radius * ts <= 1.0
        part = np.zeros_like(ts, dtype=complex)
        tn = ts[near]
        part[near] = np.exp(c * tn) * np.polynomial.polynomial.polyval(tn, coeffs)
        far = ~near
        if np.any(far):
            part[far] = sum(plain[i](ts[far]) for i in g)
        out = out + part
    return out


def _natural(params, roots):
    if is_natural(params):
        return params, (roots if roots is not None else solve_roots(params)), 1.0
    scale = natural_scale(params)
    sp = convert_params(params, scale, to_scaled=True)
    sp = sp.replace(m=1.0, c=1.0, e=math.copysign(1.0, params.e),
                    beta=1.0 if params.beta > 0 else 0.0)
    if roots is None:
        sroots = solve_roots(sp)
    else:
        sroots = roots.scaled(scale.time_unit)
    return sp, sroots, scale.time_unit


def _evaluate(numer_power, extra_poles, t, params, roots, opts):
    """Evaluate a kernel; ``extra_poles`` given in the units of ``params``."""
    opts = opts or DEFAULT_OPTIONS
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise InvalidParameterError("t must be non-negative")
    sp, sroots, tau = _natural(params, roots)
    ts = t / tau
    out = _sum_terms(numer_power, [p * tau for p in extra_poles], ts, sp, sroots,
                     opts.include_runaway)
    # kernel dimension: tau^(1 - n + E) / mass
    factor = tau ** (1 - numer_power + len(extra_poles)) / params.m
    out = out * factor
    return out if out.ndim else complex(out)


def eval_F(n, t, roots, params, opts=None):
    """``F_n(t)``, the inverse transform of ``1 / (z^n H(z))``, ``n = 0, 1, 2``."""
    if n not in (0, 1, 2):
        raise InvalidParameterError("n must be 0, 1 or 2")
    return _evaluate(0, [0.0] * n, t, params, roots, opts)


def eval_G(n, sign, omega, t, roots, params, opts=None):
    """``G_n^{+-}(k, t)``, inverse transform of ``z^n / ((z +- i omega) H(z))``."""
    if n not in (0, 1):
        raise InvalidParameterError("n must be 0 or 1")
    if omega <= 0:
        raise InvalidParameterError("omega_k must be positive")
    s = _sign(sign)
    return _evaluate(n, [-s * 1j * omega], t, params, roots, opts)


def eval_Gpm(signs, omega, omega_prime, t, roots, params, opts=None):
    """``G^{s1}_{s2}(k, k', t)`` for ``z^2 / ((z + s1 i w)(z + s2 i w') H(z))``.

    ``signs = (s1, s2)``; the first refers to ``omega``, the second to
    ``omega_prime``.
    """
    if omega <= 0 or omega_prime <= 0:
        raise InvalidParameterError("frequencies must be positive")
    s1, s2 = (_sign(s) for s in signs)
    return _evaluate(2, [-s1 * 1j * omega, -s2 * 1j * omega_prime], t, params, roots, opts)


def g1_terms(sign, omega, params, roots=None):
    """Exponential expansion of ``G_1^{+-}`` in the units of ``params``."""
    s = _sign(sign)
    return pole_expansion(1, [-s * 1j * omega], params, roots)
