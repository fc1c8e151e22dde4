"""The Bell-local set: deterministic vertices, membership and local fraction.

Vertices are enumerated lexicographically: Alice's assignment varies slowest,
each assignment itself in ``itertools.product`` order over the scenario's
alphabet order. Certificates refer to vertices by their position in this
order, so the ordering is part of the public contract.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import EnumerationCapError, ShapeError
from .scenario import DEFAULT_TOL, BellScenario, DistributionTuple
from .simplex import solve_lp

VERTEX_CAP = 10**6


@dataclass(frozen=True)
class DeterministicVertex:
    a_assign: tuple[int, ...]  # output a_x for each Alice input x
    b_assign: tuple[int, ...]

    def to_tuple(self, scenario: BellScenario) -> DistributionTuple:
        if len(self.a_assign) != scenario.m or len(self.b_assign) != scenario.n:
            raise ShapeError("vertex assignment length does not match scenario inputs")
        p = np.zeros(scenario.shape)
        for x, a in enumerate(self.a_assign):
            i = scenario.outputs_a.index(a)
            for y, b in enumerate(self.b_assign):
                p[x, y, i, scenario.outputs_b.index(b)] = 1.0
        return DistributionTuple(scenario, p)


def vertex_count(s: BellScenario) -> int:
    return len(s.outputs_a) ** s.m * len(s.outputs_b) ** s.n


def _check_cap(s, cap):
    count = vertex_count(s)
    if count > cap:
        raise EnumerationCapError("local vertices", count, cap)


def enumerate_vertices(s: BellScenario, cap: int = VERTEX_CAP) -> list[DeterministicVertex]:
    _check_cap(s, cap)
    return [
        DeterministicVertex(a, b)
        for a in itertools.product(s.outputs_a, repeat=s.m)
        for b in itertools.product(s.outputs_b, repeat=s.n)
    ]


@lru_cache(maxsize=64)
def _vertex_matrix_cached(s: BellScenario) -> np.ndarray:
    m, n, ka, kb = s.shape
    ai = np.array(list(itertools.product(range(ka), repeat=m)), dtype=np.intp).reshape(-1, m)
    bj = np.array(list(itertools.product(range(kb), repeat=n)), dtype=np.intp).reshape(-1, n)
    nv = len(ai) * len(bj)
    V = np.zeros((nv,) + s.shape)
    va = np.repeat(np.arange(len(ai)), len(bj))
    vb = np.tile(np.arange(len(bj)), len(ai))
    k = np.arange(nv)
    for x in range(m):
        for y in range(n):
            V[k, x, y, ai[va, x], bj[vb, y]] = 1.0
    M = V.reshape(nv, -1).T.copy()
    M.setflags(write=False)
    return M


def vertex_matrix(s: BellScenario, cap: int = VERTEX_CAP) -> np.ndarray:
    """Columns are the flattened vertex tuples, in enumeration order."""
    _check_cap(s, cap)
    return _vertex_matrix_cached(s)


@dataclass(frozen=True)
class LocalDecomposition:
    scenario: BellScenario
    weights: dict  # DeterministicVertex -> probability
    residual: float
    indices: dict = field(default_factory=dict, compare=False)  # vertex -> enumeration index

    is_local = True

    def to_tuple(self) -> DistributionTuple:
        p = np.zeros(self.scenario.shape)
        for v, q in self.weights.items():
            p += q * v.to_tuple(self.scenario).p
        return DistributionTuple(self.scenario, p)

    def to_dict(self) -> dict:
        return {
            "kind": "local",
            "weights": {str(self.indices[v]): q for v, q in self.weights.items()},
            "residual": self.residual,
        }


@dataclass(frozen=True)
class NonlocalVerdict:
    """Separating functional: ``beta . P`` exceeds ``beta . D`` for every vertex ``D``."""

    scenario: BellScenario
    bell_functional: np.ndarray
    value: float
    local_max: float

    is_local = False

    @property
    def gap(self) -> float:
        return self.value - self.local_max

    def to_dict(self) -> dict:
        return {
            "kind": "nonlocal",
            "bell_functional": self.bell_functional.tolist(),
            "value": self.value,
            "local_max": self.local_max,
            "gap": self.gap,
        }


def decomposition_from_weights(s: BellScenario, q: np.ndarray, residual: float, tol: float = 0.0):
    verts = enumerate_vertices(s)
    nz = np.flatnonzero(q > tol)
    return LocalDecomposition(
        s,
        {verts[k]: float(q[k]) for k in nz},
        residual,
        {verts[k]: int(k) for k in nz},
    )


def is_local(P: DistributionTuple, tol: float = DEFAULT_TOL, cap: int = VERTEX_CAP):
    """Decide membership of ``P`` in the local polytope by phase-1 LP.

    Returns a :class:`LocalDecomposition` (tuples on a facet count as local
    when the residual is within ``tol``) or a :class:`NonlocalVerdict`
    carrying the dual certificate of the final phase-1 basis.
    """
    s = P.scenario
    V = vertex_matrix(s, cap)
    A = np.vstack([V, np.ones((1, V.shape[1]))])
    b = np.r_[P.p.ravel(), 1.0]
    res = solve_lp(A, b, tol=tol)
    if res.feasible:
        return decomposition_from_weights(s, res.x, res.residual)
    beta = res.duals[:-1].reshape(s.shape)
    return NonlocalVerdict(s, beta, float(np.sum(beta * P.p)), float(np.max(beta.ravel() @ V)))


def local_fraction(P: DistributionTuple, cap: int = VERTEX_CAP) -> float:
    """Largest ``w`` with ``P = w L + (1 - w) Q``, ``L`` local, ``Q`` no-signaling.

    For a no-signaling ``P`` the remainder ``P - sum q D`` is automatically
    no-signaling and block-normalized, so the LP is ``max sum q`` subject to
    ``sum q D <= P`` entrywise.
    """
    V = vertex_matrix(P.scenario, cap)
    rows, nv = V.shape
    A = np.hstack([V, np.eye(rows)])
    c = np.r_[-np.ones(nv), np.zeros(rows)]
    res = solve_lp(A, P.p.ravel(), c)
    return float(np.clip(res.x[:nv].sum(), 0.0, 1.0))
