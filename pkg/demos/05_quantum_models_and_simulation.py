"""
Quantum realizations and raw-key simulation
===========================================

A maximally entangled two-qubit model reproduces the theta family through the
Born rule. The simulator then draws raw-key rounds from the tuple with a
counter-based generator, so the result depends only on the seed.
"""

import math

import numpy as np

from nlkit import ProtocolSpec, born_tuple, check_order, make_paper_model, make_theta_family, run_lemma_protocol, run_protocol
from nlkit.protocols import analytic_correlator

theta = math.pi / 4
model = make_paper_model(theta)
P = born_tuple(model)
print("max deviation from the closed form:", np.abs(P.p - make_theta_family(theta, extended=True).p).max())
print("defects:", model.defects())

####################################################################
# Masked protocol
# ---------------
# Alice flips her output by ``nu(x, y)`` and both parties XOR in a shared
# random sign, so both raw bits are unbiased.

P2 = P.restrict([0, 1], [0, 1])
spec = ProtocolSpec.nu_masked()
res = run_protocol(P2, spec, 10**6, seed=1, workers=4)
print("joint table:\n", res.joint_ab)
print(f"<AB> = {res.empirical_correlator:.5f} +- {res.correlator_stderr:.5f} (exact {analytic_correlator(P2, spec):.5f})")
print(f"I(A:B) = {res.empirical_mi:.5f} +- {res.mi_stderr:.5f}")
print("same seed, one thread:", run_protocol(P2, spec, 10**6, seed=1) == res)

####################################################################
# Running a certificate as a protocol
# -----------------------------------
# Each round picks a component of the order certificate and routes inputs and
# outputs through its wiring; the output statistics are those of the target.

P_primed = make_theta_family(theta, extended=True, primed=True)
cert = check_order(P, P_primed)
table = run_lemma_protocol(P, cert, 2, 0, 10**6, seed=5)
print("simulated:\n", table)
print("target:\n", P_primed.p[2, 0])
