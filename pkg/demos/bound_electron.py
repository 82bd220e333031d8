"""A bound electron relaxes to its stationary emission spectrum.

The zeros of H(z) give a pair of damped roots whose decay rate is
omega0^2 beta / 2m.  The finite-time rate approaches the stationary
spectrum with that envelope, and only then is the large-time result valid.
"""
import numpy as np

from stochrad import (PhysicalParams, WhiteNoise, convergence_scan, decay_timescale,
                      rate_harmonic_asymptotic, solve_roots)
from stochrad.params import to_scaled

electron = PhysicalParams.electron(omega0=3.29e15)
roots = solve_roots(electron)
decay = decay_timescale(electron)
print(f"runaway root z1 = {roots.z1.real:.4e} 1/s")
print(f"bound pair      z2 = {roots.z2.real:.4e} {roots.z2.imag:+.6e}i 1/s")
print(f"damping rate: analytic {decay['rate']:.4e} 1/s, exact {decay['exact_rate']:.4e} 1/s")
print(f"relaxation time 1/rate = {decay['time']:.3e} s")

# the relaxation takes ~1e8 optical periods, so scan in scaled units
scaled, scale = to_scaled(electron)
w0 = scaled.omega0
print(f"\nscaled binding omega0 = {w0:.3e}; using a stiffer kappa = 0.01 to keep the scan short")
bound = scaled.replace(kappa=0.01)
t = np.linspace(0.0, 1500.0, 301)
for w in (0.05, 0.1, 0.3):
    scan = convergence_scan(w, WhiteNoise(), bound, t)
    print(f"omega_k = {w:4.2f}: fitted envelope rate {scan.envelope_rate:.5f}, "
          f"expected {decay_timescale(bound)['rate']:.5f}")

peak = rate_harmonic_asymptotic(np.array([0.5, 1.0, 2.0]) * electron.omega0,
                                WhiteNoise(), electron).rate
print(f"\nstationary spectrum at 0.5, 1, 2 x omega0: {peak}")
