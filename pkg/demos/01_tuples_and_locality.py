"""
Distribution tuples and the local polytope
==========================================

A tuple ``P[x, y, a, b]`` holds the joint outcome probabilities of a two-party
experiment. We build the theta family, check that it is a valid no-signaling
tuple, and ask whether it lies inside the local polytope.
"""

import math

import numpy as np

from nlkit import chsh_scenario, chsh_value, is_local, local_fraction, make_theta_family, pr_box, uniform_tuple, validate
from nlkit.transforms import mix_with_local

####################################################################
# Build and validate
# ------------------
# Inputs are 0-based and outputs default to ``(-1, 1)``.

P = make_theta_family(math.pi / 4)
print(P.scenario)
print(validate(P).to_dict())

####################################################################
# Membership
# ----------
# ``is_local`` either returns a convex decomposition into deterministic
# vertices or a Bell functional that separates ``P`` from every vertex.

for theta in (0.0, math.pi / 8, math.pi / 4):
    verdict = is_local(make_theta_family(theta))
    print(f"theta={theta:.4f}  S={chsh_value(make_theta_family(theta)):.6f}  local={verdict.is_local}")

verdict = is_local(P)
print("separating value", verdict.value, "vs local maximum", verdict.local_max)

####################################################################
# A local decomposition can be rebuilt exactly.

dec = is_local(make_theta_family(0.0))
print({str(v): round(w, 6) for v, w in dec.weights.items()})
print("rebuild error", dec.to_tuple().distance(make_theta_family(0.0)))

####################################################################
# Local fraction along the PR line
# --------------------------------
# Mixing the PR box with white noise stays local up to ``p = 1/2``;
# beyond it the local weight drops linearly as ``2 - 2p``.

U = uniform_tuple(chsh_scenario())
for p in np.linspace(0, 1, 6):
    print(f"p={p:.1f}  local fraction={local_fraction(mix_with_local(pr_box(), U, p)):.4f}")
