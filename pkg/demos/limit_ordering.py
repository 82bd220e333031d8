"""Free-particle emission rates depend on the order of limits.

Taking the large-time limit before removing the binding gives a rate
proportional to f_tilde(w).  Removing the binding first keeps an extra
term 0.5 * Gamma_white * f_tilde(0), which doubles the white-noise rate.
The lowest-order-in-charge calculation lands in between, and the
semiclassical Larmor estimate sides with the large-time-first result.
"""
import numpy as np

from stochrad import ExponentialOU, PhysicalParams, WhiteNoise, compare_orders

omega = np.geomspace(1e14, 1e19, 6)
electron = PhysicalParams.electron().first_order()

for label, corr in (("white noise", WhiteNoise()),
                    ("OU noise, 1/gamma = 1 fs", ExponentialOU(1e15))):
    rec = compare_orders(omega, corr, electron)
    print(f"\n{label}: rates normalized by the large-time-first free rate")
    print(f"{'omega_k [1/s]':>14} {'exact free':>11} {'lowest order':>13} {'Larmor':>8}")
    for i, w in enumerate(omega):
        print(f"{w:14.3e} {rec['ratio_exact_to_limit'][i]:11.4f} "
              f"{rec['ratio_perturbative_to_limit'][i]:13.4f} "
              f"{rec['ratio_semiclassical_to_limit'][i]:8.4f}")
    gap = np.max(np.abs(rec["exact_minus_limit"] / rec["unphysical_term"] - 1))
    print(f"exact minus limit equals 0.5 Gamma_white f_tilde(0) to {gap:.1e}")
