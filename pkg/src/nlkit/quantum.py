"""Finite-dimensional Born-rule realizations of distribution tuples.

Operators are stored as arrays ``alice_ops[x, i]`` (the POVM element for
output ``outputs_a[i]`` of input ``x``), one qubit per party by default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import PM, BellScenario, DistributionTuple

NORM_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


def _defects(ops):
    """(completeness defect, worst hermiticity defect, min eigenvalue, max eigenvalue)."""
    d = ops.shape[-1]
    comp = float(np.max(np.abs(ops.sum(axis=1) - np.eye(d))))
    herm = float(np.max(np.abs(ops - np.conj(np.swapaxes(ops, -1, -2)))))
    ev = np.linalg.eigvalsh(ops.reshape(-1, d, d))
    return comp, herm, float(ev.min()), float(ev.max())


@dataclass(frozen=True, eq=False)
class TwoQubitModel:
    """Pure state ``psi`` (or an ensemble of pure states) with local POVMs.

    ``states`` is a tuple of ``(weight, vector)`` pairs; a single pure state is
    the one-element ensemble.
    """

    states: tuple
    alice_ops: np.ndarray  # (m, |A|, dA, dA)
    bob_ops: np.ndarray  # (n, |B|, dB, dB)
    outputs_a: tuple = PM
    outputs_b: tuple = PM

    def __post_init__(self):
        sts = tuple((float(w), np.asarray(v, dtype=complex)) for w, v in self.states)
        object.__setattr__(self, "states", sts)
        object.__setattr__(self, "alice_ops", np.asarray(self.alice_ops, dtype=complex))
        object.__setattr__(self, "bob_ops", np.asarray(self.bob_ops, dtype=complex))
        self.check()

    @classmethod
    def pure(cls, psi, alice_ops, bob_ops, outputs_a=PM, outputs_b=PM):
        return cls(((1.0, psi),), alice_ops, bob_ops, outputs_a, outputs_b)

    @property
    def psi(self) -> np.ndarray:
        if len(self.states) != 1:
            raise ValueError("model holds an ensemble, not a single pure state")
        return self.states[0][1]

    @property
    def scenario(self) -> BellScenario:
        return BellScenario(self.alice_ops.shape[0], self.bob_ops.shape[0], self.outputs_a, self.outputs_b)

    def defects(self) -> dict:
        ca, ha, lo_a, hi_a = _defects(self.alice_ops)
        cb, hb, lo_b, hi_b = _defects(self.bob_ops)
        return {
            "norm": max(abs(np.vdot(v, v).real - 1.0) for _, v in self.states),
            "weights": abs(sum(w for w, _ in self.states) - 1.0),
            "completeness": max(ca, cb),
            "hermiticity": max(ha, hb),
            "min_eigenvalue": min(lo_a, lo_b),
            "max_eigenvalue": max(hi_a, hi_b),
        }

    def check(self):
        dA, dB = self.alice_ops.shape[-1], self.bob_ops.shape[-1]
        if self.alice_ops.shape[1] != len(self.outputs_a) or self.bob_ops.shape[1] != len(self.outputs_b):
            raise ValueError("operator count per input must match the output alphabet")
        for w, v in self.states:
            if v.shape != (dA * dB,):
                raise ValueError(f"state of shape {v.shape} does not fit {dA}x{dB} operators")
            if w < 0:
                raise ValueError("ensemble weights must be nonnegative")
        d = self.defects()
        bad = (
            d["norm"] > NORM_TOL
            or d["weights"] > NORM_TOL
            or d["completeness"] > NORM_TOL
            or d["hermiticity"] > NORM_TOL
            or d["min_eigenvalue"] < -NORM_TOL
            or d["max_eigenvalue"] > 1 + NORM_TOL
        )
        if bad:
            raise ValueError(f"model violates POVM/state invariants: {d}")

    def to_dict(self) -> dict:
        def cx(a):
            a = np.asarray(a)
            return np.stack([a.real, a.imag], axis=-1).tolist()

        return {
            "states": [{"weight": w, "vector": cx(v)} for w, v in self.states],
            "alice_ops": cx(self.alice_ops),
            "bob_ops": cx(self.bob_ops),
            "outputs_a": list(self.outputs_a),
            "outputs_b": list(self.outputs_b),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TwoQubitModel":
        def cx(a):
            a = np.asarray(a, dtype=float)
            return a[..., 0] + 1j * a[..., 1]

        return cls(
            tuple((s["weight"], cx(s["vector"])) for s in d["states"]),
            cx(d["alice_ops"]),
            cx(d["bob_ops"]),
            tuple(d["outputs_a"]),
            tuple(d["outputs_b"]),
        )


def born_tuple(model: TwoQubitModel) -> DistributionTuple:
    """``P_{x,y}(a,b) = sum_w w <psi| M_{x,a} (x) N_{y,b} |psi>``."""
    dA, dB = model.alice_ops.shape[-1], model.bob_ops.shape[-1]
    p = 0.0
    for w, v in model.states:
        psi = v.reshape(dA, dB)
        p = p + w * np.einsum("ij,xaik,ybjl,kl->xyab", psi.conj(), model.alice_ops, model.bob_ops, psi).real
    return DistributionTuple(model.scenario, p)


def ket_projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def binary_measurement(proj_plus) -> np.ndarray:
    """Ops ordered like the (-1, +1) alphabet: ``[I - Pi, Pi]``."""
    return np.stack([I2 - proj_plus, proj_plus])


def bloch_measurement(direction) -> np.ndarray:
    """Projective +-1 qubit measurement along a Bloch vector."""
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    return binary_measurement((I2 + np.einsum("k,kij->ij", n, PAULI)) / 2)


def make_paper_model(theta: float, primed: bool = False) -> TwoQubitModel:
    """Maximally entangled two-qubit model realizing the extended theta family.

    ``|psi> = (|00> + |11>)/sqrt 2`` with Alice's ``+1`` projectors on
    ``cos(t/2)|0> + sin(t/2)|1>``, ``cos(t/2)|0> - sin(t/2)|1>`` and
    ``(|0> + i|1>)/sqrt 2``; Bob's on ``|0>`` and ``(|0> + |1>)/sqrt 2``.
    ``primed`` lets Alice's third input reuse her first projector.
    """
    phi = theta / 2.0
    k0, k1 = np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
    psi = (np.kron(k0, k0) + np.kron(k1, k1)) / np.sqrt(2)
    ka = [
        np.cos(phi) * k0 + np.sin(phi) * k1,
        np.cos(phi) * k0 - np.sin(phi) * k1,
        (k0 + 1j * k1) / np.sqrt(2),
    ]
    z = (0, 1, 0) if primed else (0, 1, 2)
    alice = np.stack([binary_measurement(ket_projector(ka[z[x]])) for x in range(3)])
    kb = [k0, (k0 + k1) / np.sqrt(2)]
    bob = np.stack([binary_measurement(ket_projector(k)) for k in kb])
    return TwoQubitModel.pure(psi, alice, bob)


def random_state(rng: np.random.Generator, dim: int = 4) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_model(rng: np.random.Generator, m: int = 2, n: int = 2) -> TwoQubitModel:
    """Haar-random pure two-qubit state with random projective +-1 measurements."""
    alice = np.stack([bloch_measurement(rng.normal(size=3)) for _ in range(m)])
    bob = np.stack([bloch_measurement(rng.normal(size=3)) for _ in range(n)])
    return TwoQubitModel.pure(random_state(rng), alice, bob)
