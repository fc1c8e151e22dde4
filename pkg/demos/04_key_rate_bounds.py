"""
Closed-form key-rate bounds
===========================

Eve's information is bounded by a function of the CHSH value. The bound
``g`` on the device-independent key rate becomes positive once the violation
passes ``threshold()``.
"""

import math

import numpy as np

from nlkit import eve_bound, g, g_prime, make_theta_family, r0_theta_bound, rate_report, threshold
from nlkit.rates import N_MAX, r0_positivity_edge

print("threshold n* =", threshold())
print("g' just below/above:", g_prime(threshold() - 1e-3), g_prime(threshold() + 1e-3))
print("g at maximal violation:", g(N_MAX))
print("eve_bound at S=2 and S=2sqrt2:", eve_bound(2.0), eve_bound(2 * math.sqrt(2)))

####################################################################
# Sweep of the theta family
# -------------------------

print(f"{'theta':>7} {'S':>9} {'N':>9} {'I':>9} {'eve':>9} {'g(N)':>9}")
for th in np.linspace(0, math.pi / 4, 9):
    rep = rate_report(make_theta_family(th))
    print(f"{th:7.4f} {rep.S:9.5f} {rep.N_tilde:9.5f} {rep.mutual_info:9.5f} {rep.eve_bound:9.5f} {rep.g_of_N:9.5f}")

####################################################################
# The substituted-tuple bound stays positive up to a finite angle.

edge = r0_positivity_edge()
print("positive up to theta =", edge)
print([round(r0_theta_bound(t), 4) for t in (0.2, 0.6, 1.0, edge + 0.01)])
