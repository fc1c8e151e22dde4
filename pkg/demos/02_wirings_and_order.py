"""
Wirings and the nonlocality order
=================================

Wirings relabel and substitute inputs and relabel or merge outputs. One tuple
is *not less nonlocal* than another when the second is a mixture of a local
tuple and wired images of the first. ``check_order`` decides this by linear
programming over every distinct wired image.
"""

from nlkit import apply_elementary, apply_wiring, check_order, chsh_scenario, make_theta_family, pr_box, uniform_tuple
from nlkit.transforms import InputSubstitution, OutputRelabeling, compose_moves, wiring_count

####################################################################
# Elementary moves compose into one canonical wiring.

s = chsh_scenario()
moves = [OutputRelabeling("A", 1, {-1: 1, 1: -1}), InputSubstitution("B", 0, 1)]
W = compose_moves(s, moves)
print(W)

Q = pr_box()
for mv in moves:
    Q = apply_elementary(Q, mv)
print("path vs wiring:", apply_wiring(pr_box(), W).distance(Q))
print("canonical wirings in the 2x2 case:", wiring_count(s))

####################################################################
# The theta pair
# --------------
# Giving Alice's third input the statistics of her first is a single input
# substitution, so the certificate needs one wiring term.

theta = 0.6
P = make_theta_family(theta, extended=True)
P_primed = make_theta_family(theta, extended=True, primed=True)
cert = check_order(P, P_primed)
print("feasible:", cert.feasible, " residual:", cert.residual)
for weight, wiring, index in cert.terms:
    print(f"  weight {weight:.3f}  wiring #{index}: z={wiring.z} t={wiring.t}")

####################################################################
# The reverse direction goes through the same LP. Going from local noise to
# the PR box is impossible, and the solver returns a witness functional.

res = check_order(uniform_tuple(s), pr_box())
print("uniform -> PR feasible:", res.feasible, " gap:", round(res.gap, 6))

####################################################################
# The reverse holds as well. Alice's third input in ``P`` is uncorrelated with
# Bob, and averaging wired copies of ``P'`` that flip her output there
# reproduces it.

back = check_order(P_primed, P)
print(f"P' -> P feasible: {back.feasible}  residual: {back.residual:.1e}  local weight: {back.p0:.3f}")
