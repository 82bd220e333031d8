"""Zeros of the renormalized characteristic function ``H(z) = kappa + z^2 (m - beta z)``.

For ``beta > 0`` the cubic has a real runaway root ``z1 ~ m/beta`` and, for
``kappa > 0``, a conjugate pair ``z2, z3 ~ -omega0^2 beta / 2m +- i omega0``
in the left half plane.  Without radiation reaction (``beta = 0``) ``H`` is
quadratic and only the undamped pair ``+- i omega0`` remains.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .params import PhysicalParams

#: |z2 - z3| below this fraction of |z1| (scaled units) marks a double root.
CONFLUENCE_RTOL = 1e-8


@dataclass(frozen=True)
class RootSet:
    """The three zeros of ``H`` (``z1`` is ``None`` when ``beta = 0``).

    ``z2`` carries the positive imaginary part.  ``confluent`` flags a
    (numerically) double root, which downstream residue sums treat as
    exactly double.
    """

    z1: Optional[complex]
    z2: complex
    z3: complex
    confluent: bool = False

    @property
    def runaway(self):
        return self.z1

    @property
    def pair(self):
        return self.z2, self.z3

    def as_tuple(self):
        return tuple(z for z in (self.z1, self.z2, self.z3) if z is not None)

    def decay_rate(self):
        """``-Re(z2)``, the damping rate of the bound pair."""
        return -self.z2.real

    def scaled(self, factor):
        """Roots multiplied by ``factor`` (unit conversion of frequencies)."""
        z1 = None if self.z1 is None else self.z1 * factor
        return RootSet(z1, self.z2 * factor, self.z3 * factor, self.confluent)


def H(z, params: PhysicalParams):
    z = np.asarray(z, dtype=complex)
    return params.kappa + z * z * (params.m - params.beta * z)


def dH(z, params: PhysicalParams):
    z = np.asarray(z, dtype=complex)
    return 2.0 * params.m * z - 3.0 * params.beta * z * z


def _monic_cubic_roots(k):
    """Roots of ``z^3 - z^2 - k = 0`` for ``k >= 0`` (the scaled ``H = 0``).

    Closed form: substitute ``z = y + 1/3`` to get ``y^3 + p y + q = 0`` and
    use Cardano (one real root) or the trigonometric form (three real).
    """
    p = -1.0 / 3.0
    q = -2.0 / 27.0 - k
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc >= 0:
        s = math.sqrt(disc)
        u = np.cbrt(-q / 2.0 + s)
        v = np.cbrt(-q / 2.0 - s)
        y1 = u + v
        re = -(u + v) / 2.0
        im = (u - v) * math.sqrt(3.0) / 2.0
        roots = [y1, complex(re, im), complex(re, -im)]
    else:
        r = 2.0 * math.sqrt(-p / 3.0)
        phi = math.acos(3.0 * q / (p * r))
        roots = [r * math.cos((phi - 2.0 * math.pi * j) / 3.0) for j in range(3)]
    return [complex(y) + 1.0 / 3.0 for y in roots]


def _small_k_roots(k):
    """Series start values for ``k << 1``: ``z1 = 1 + k``, ``z2,3 = +-i sqrt(k) - k/2``."""
    s = math.sqrt(k)
    return [complex(1.0 + k), complex(-k / 2.0, s), complex(-k / 2.0, -s)]


def _polish(z, k, max_steps=6):
    """Newton iterations on ``k + z^2 (1 - z)`` until the step stalls."""
    for _ in range(max_steps):
        h = k + z * z * (1.0 - z)
        dh = 2.0 * z - 3.0 * z * z
        if dh == 0:
            break
        step = h / dh
        z -= step
        if abs(step) <= 1e-17 * abs(z):
            break
    return z


def solve_roots(params: PhysicalParams) -> RootSet:
    """Exact zeros of ``H(z)`` in the units of ``params``.

    The cubic is solved in scaled units (``m = beta = 1``) where it reads
    ``z^3 - z^2 - kappa' = 0``.  Start values come from the closed form
    (or its small-``kappa'`` series) and are Newton-polished before
    conversion back.

    Examples
    --------
    >>> from stochrad.params import natural_params
    >>> solve_roots(natural_params(kappa=0.0)).as_tuple()
    ((1+0j), 0j, 0j)
    """
    m, beta, kappa = params.m, params.beta, params.kappa
    if beta == 0:
        w0 = math.sqrt(kappa / m)
        return RootSet(None, complex(0.0, w0), complex(0.0, -w0), confluent=(w0 == 0))
    if kappa == 0:
        return RootSet(complex(m / beta), 0j, 0j, confluent=True)
    tau = beta / m
    k = kappa * tau * tau / m
    # Cardano loses the small pair to cancellation when k is tiny.
    start = _small_k_roots(k) if k < 1e-6 else _monic_cubic_roots(k)
    roots = [_polish(z, k) for z in start]
    real = [z for z in roots if z.real > 0.5]
    if len(real) != 1:
        raise ArithmeticError("runaway root not isolated")
    z1 = complex(real[0].real, 0.0)
    rest = [z for z in roots if z is not real[0]]
    rest.sort(key=lambda z: -z.imag)
    z2, z3 = rest
    if z2.imag > 0:
        z3 = z2.conjugate()
    confluent = abs(z2 - z3) < CONFLUENCE_RTOL * abs(z1)
    return RootSet(z1 / tau, z2 / tau, z3 / tau, confluent)


def approx_roots(params: PhysicalParams) -> RootSet:
    """Small-``omega0`` approximation ``z1 = m/beta``, ``z2,3 = -w0^2 beta/2m +- i w0``."""
    m, beta = params.m, params.beta
    w0 = params.omega0
    re = -w0 * w0 * beta / (2.0 * m)
    z1 = None if beta == 0 else complex(m / beta)
    return RootSet(z1, complex(re, w0), complex(re, -w0), confluent=(w0 == 0))


def decay_rate_analytic(params: PhysicalParams):
    """``omega0^2 beta / 2m``."""
    return params.kappa * params.beta / (2.0 * params.m * params.m)
