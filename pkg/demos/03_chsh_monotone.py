"""
The CHSH violation as a monotone
================================

``chsh_measure`` is the amount by which the best CHSH expression exceeds the
local bound 2. It vanishes exactly on local 2x2 tuples and never grows under
wirings or mixing with local noise.
"""

import math

import numpy as np

from nlkit import chsh_measure, make_theta_family, monotonicity_probe, pr_box, select_inputs
from nlkit.monotones import NU_MAPS, chsh_measure_batch
from nlkit.transforms import wiring_images

P = make_theta_family(math.pi / 4)
print("Tsirelson point:", chsh_measure(P), "PR box:", chsh_measure(pr_box()))
print("sign tables:\n", NU_MAPS)

####################################################################
# All 4096 wired images of ``P`` at once.

vals = chsh_measure_batch(wiring_images(P))
print(f"max over images {vals.max():.12f}, fraction that kill the violation {np.mean(vals == 0):.3f}")

####################################################################
# The seeded probe mixes random wirings with random local mixtures.

print(monotonicity_probe(P, trials=500, seed=3, exhaustive=True).to_dict())

####################################################################
# Larger scenarios go through input selection first.

P3 = make_theta_family(0.5, extended=True)
sel = select_inputs(P3, "max_chsh")
print(sel.alice_inputs, sel.bob_inputs, round(sel.value, 6))
