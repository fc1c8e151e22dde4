"""Allowed transformations of the nonlocality resource theory.

Every deterministic composition of input substitutions/relabelings and output
relabelings/coarse grainings reduces to a canonical :class:`Wiring`: Alice's
input ``x`` reads the box at input ``z[x]`` and post-processes the output with
a self-map ``F[x]`` of her alphabet; likewise ``t``/``G`` for Bob. Self-maps
are stored as tuples of alphabet *indices* (``F[x][i]`` is the index of the
image of ``outputs_a[i]``).

The canonical enumeration is ``itertools.product`` order over
``(z, t, F, G)`` with each component itself in product order; certificates
cite wirings by their position in it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import EnumerationCapError, ShapeError
from .polytope import LocalDecomposition, decomposition_from_weights, vertex_matrix
from .scenario import DEFAULT_TOL, BellScenario, DistributionTuple

WIRING_CAP = 10**7
_CHUNK = 1 << 16


@dataclass(frozen=True)
class Wiring:
    z: tuple[int, ...]
    t: tuple[int, ...]
    F: tuple[tuple[int, ...], ...]
    G: tuple[tuple[int, ...], ...]

    def check(self, s: BellScenario):
        m, n, ka, kb = s.shape
        ok = (
            len(self.z) == m
            and len(self.t) == n
            and all(0 <= v < m for v in self.z)
            and all(0 <= v < n for v in self.t)
            and len(self.F) == m
            and len(self.G) == n
            and all(len(f) == ka and all(0 <= v < ka for v in f) for f in self.F)
            and all(len(g) == kb and all(0 <= v < kb for v in g) for g in self.G)
        )
        if not ok:
            raise ShapeError(f"wiring is not well formed for scenario {s.shape}: {self}")

    def then(self, other: "Wiring") -> "Wiring":
        """Composite ``other o self`` (``self`` applied first)."""
        z = tuple(self.z[other.z[x]] for x in range(len(other.z)))
        t = tuple(self.t[other.t[y]] for y in range(len(other.t)))
        F = tuple(tuple(other.F[x][i] for i in self.F[other.z[x]]) for x in range(len(other.z)))
        G = tuple(tuple(other.G[y][j] for j in self.G[other.t[y]]) for y in range(len(other.t)))
        return Wiring(z, t, F, G)

    def to_dict(self, s: BellScenario) -> dict:
        """Explicit map tables with output values (not indices)."""
        A, B = s.outputs_a, s.outputs_b
        return {
            "z": list(self.z),
            "t": list(self.t),
            "F": [{str(A[i]): A[f[i]] for i in range(len(A))} for f in self.F],
            "G": [{str(B[j]): B[g[j]] for j in range(len(B))} for g in self.G],
        }

    @classmethod
    def from_dict(cls, d: dict, s: BellScenario) -> "Wiring":
        A, B = s.outputs_a, s.outputs_b
        F = tuple(tuple(A.index(int(f[str(a)])) for a in A) for f in d["F"])
        G = tuple(tuple(B.index(int(g[str(b)])) for b in B) for g in d["G"])
        return cls(tuple(d["z"]), tuple(d["t"]), F, G)


def identity_wiring(s: BellScenario) -> Wiring:
    m, n, ka, kb = s.shape
    return Wiring(
        tuple(range(m)),
        tuple(range(n)),
        (tuple(range(ka)),) * m,
        (tuple(range(kb)),) * n,
    )


def _onehot(f, k):
    M = np.zeros((k, k))
    M[np.arange(k), list(f)] = 1.0
    return M


def apply_wiring(P: DistributionTuple, W: Wiring) -> DistributionTuple:
    """``P'_{x,y}(a,b) = sum over F_x(a')=a, G_y(b')=b of P_{z(x),t(y)}(a',b')``."""
    s = P.scenario
    W.check(s)
    ka, kb = s.shape[2:]
    MF = [_onehot(f, ka) for f in W.F]
    MG = [_onehot(g, kb) for g in W.G]
    out = np.empty(s.shape)
    for x in range(s.m):
        for y in range(s.n):
            out[x, y] = MF[x].T @ P.p[W.z[x], W.t[y]] @ MG[y]
    return DistributionTuple(s, out)


# -- elementary moves -------------------------------------------------------


@dataclass(frozen=True)
class InputSubstitution:
    """Replace every block of input ``target`` by that of input ``source``."""

    party: str  # "A" or "B"
    source: int
    target: int


@dataclass(frozen=True)
class InputTransposition:
    party: str
    i: int
    j: int


@dataclass(frozen=True)
class OutputRelabeling:
    """``P_{x,y}(a,b) -> P_{x,y}(perm[a], b)`` for one input; ``perm`` maps values to values."""

    party: str
    input: int
    perm: dict


@dataclass(frozen=True)
class OutputCoarseGraining:
    """Merge the outputs in ``subset`` onto ``representative`` for one input."""

    party: str
    input: int
    subset: frozenset
    representative: int


Move = Union[InputSubstitution, InputTransposition, OutputRelabeling, OutputCoarseGraining]


def _party(move):
    if move.party not in ("A", "B"):
        raise ValueError(f"party must be 'A' or 'B', got {move.party!r}")
    return move.party == "A"


def apply_elementary(P: DistributionTuple, move: Move) -> DistributionTuple:
    """Apply one elementary move directly on the tensor (independent of :func:`apply_wiring`)."""
    s = P.scenario
    alice = _party(move)
    # work in Alice's frame: swap parties for Bob's moves
    p = P.p.copy() if alice else P.p.transpose(1, 0, 3, 2).copy()
    n_inputs = s.m if alice else s.n
    alphabet = s.outputs_a if alice else s.outputs_b

    def _check_input(v):
        if not 0 <= v < n_inputs:
            raise ValueError(f"input index {v} out of range for party {move.party}")

    if isinstance(move, InputSubstitution):
        _check_input(move.source)
        _check_input(move.target)
        p[move.target] = p[move.source]
    elif isinstance(move, InputTransposition):
        _check_input(move.i)
        _check_input(move.j)
        p[[move.i, move.j]] = p[[move.j, move.i]]
    elif isinstance(move, OutputRelabeling):
        _check_input(move.input)
        if sorted(move.perm) != sorted(alphabet) or sorted(move.perm.values()) != sorted(alphabet):
            raise ValueError(f"perm {move.perm} is not a permutation of {alphabet}")
        idx = [alphabet.index(move.perm[a]) for a in alphabet]
        p[move.input] = p[move.input][:, idx, :]
    elif isinstance(move, OutputCoarseGraining):
        _check_input(move.input)
        sub = set(move.subset)
        if not sub <= set(alphabet):
            raise ValueError(f"subset {sorted(sub)} not inside alphabet {alphabet}")
        if move.representative not in sub:
            raise ValueError("coarse-graining representative must lie in the subset")
        idx = [alphabet.index(a) for a in sorted(sub)]
        rep = alphabet.index(move.representative)
        blk = p[move.input]
        merged = blk[:, idx, :].sum(axis=1)
        blk[:, idx, :] = 0.0
        blk[:, rep, :] = merged
    else:
        raise TypeError(f"unknown move {move!r}")
    if not alice:
        p = p.transpose(1, 0, 3, 2)
    return DistributionTuple(s, p)


def move_as_wiring(s: BellScenario, move: Move) -> Wiring:
    """Canonical wiring equivalent to one elementary move."""
    m, n, ka, kb = s.shape
    alice = _party(move)
    k = m if alice else n
    alphabet = s.outputs_a if alice else s.outputs_b
    inp = list(range(k))
    maps = [tuple(range(len(alphabet)))] * k
    if isinstance(move, InputSubstitution):
        inp[move.target] = move.source
    elif isinstance(move, InputTransposition):
        inp[move.i], inp[move.j] = move.j, move.i
    elif isinstance(move, OutputRelabeling):
        # new P(a) = old P(perm a): the output variable is pushed through perm^-1
        inv = {v: a for a, v in move.perm.items()}
        maps[move.input] = tuple(alphabet.index(inv[a]) for a in alphabet)
    elif isinstance(move, OutputCoarseGraining):
        rep = alphabet.index(move.representative)
        maps[move.input] = tuple(rep if a in move.subset else i for i, a in enumerate(alphabet))
    else:
        raise TypeError(f"unknown move {move!r}")
    ident = identity_wiring(s)
    if alice:
        return Wiring(tuple(inp), ident.t, tuple(maps), ident.G)
    return Wiring(ident.z, tuple(inp), ident.F, tuple(maps))


# -- enumeration ------------------------------------------------------------


def wiring_count(s: BellScenario) -> int:
    m, n, ka, kb = s.shape
    return m**m * n**n * ka ** (ka * m) * kb ** (kb * n)


def _dims(s):
    m, n, ka, kb = s.shape
    return (m,) * m + (n,) * n + (ka**ka,) * m + (kb**kb,) * n


def _check_wiring_cap(s, cap):
    count = wiring_count(s)
    if count > cap:
        raise EnumerationCapError("wirings", count, cap)


def wiring_at(s: BellScenario, index: int) -> Wiring:
    m, n, ka, kb = s.shape
    d = [int(v) for v in np.unravel_index(index, _dims(s))]
    z, t = d[:m], d[m : m + n]
    fi, gi = d[m + n : 2 * m + n], d[2 * m + n :]
    F = tuple(tuple(int(v) for v in np.unravel_index(f, (ka,) * ka)) for f in fi)
    G = tuple(tuple(int(v) for v in np.unravel_index(g, (kb,) * kb)) for g in gi)
    return Wiring(tuple(z), tuple(t), F, G)


def wiring_index(s: BellScenario, W: Wiring) -> int:
    m, n, ka, kb = s.shape
    fi = [int(np.ravel_multi_index(f, (ka,) * ka)) for f in W.F]
    gi = [int(np.ravel_multi_index(g, (kb,) * kb)) for g in W.G]
    return int(np.ravel_multi_index(list(W.z) + list(W.t) + fi + gi, _dims(s)))


def enumerate_wirings(s: BellScenario, cap: int = WIRING_CAP) -> list[Wiring]:
    _check_wiring_cap(s, cap)
    m, n, ka, kb = s.shape
    zs = itertools.product(range(m), repeat=m)
    ts = list(itertools.product(range(n), repeat=n))
    fmaps = list(itertools.product(range(ka), repeat=ka))
    gmaps = list(itertools.product(range(kb), repeat=kb))
    Fs = list(itertools.product(fmaps, repeat=m))
    Gs = list(itertools.product(gmaps, repeat=n))
    return [Wiring(z, t, F, G) for z in zs for t in ts for F in Fs for G in Gs]


def _block_table(P):
    """All wired 2-party blocks: ``tab[z, f, t, g] = M_f^T P[z, t] M_g``."""
    m, n, ka, kb = P.scenario.shape
    fmaps = np.array(list(itertools.product(range(ka), repeat=ka)), dtype=np.intp)
    gmaps = np.array(list(itertools.product(range(kb), repeat=kb)), dtype=np.intp)
    MF = np.zeros((len(fmaps), ka, ka))
    MF[np.arange(len(fmaps))[:, None], np.arange(ka)[None, :], fmaps] = 1.0
    MG = np.zeros((len(gmaps), kb, kb))
    MG[np.arange(len(gmaps))[:, None], np.arange(kb)[None, :], gmaps] = 1.0
    return np.einsum("fia,ztij,gjb->zftgab", MF, P.p, MG)


def iter_wiring_images(P: DistributionTuple, cap: int = WIRING_CAP, chunk: int = _CHUNK):
    """Yield ``(start, images)`` with ``images[k - start] = W_k(P).p`` in canonical order."""
    s = P.scenario
    _check_wiring_cap(s, cap)
    m, n = s.m, s.n
    tab = _block_table(P)
    dims = _dims(s)
    total = wiring_count(s)
    xs, ys = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
    for start in range(0, total, chunk):
        k = np.arange(start, min(total, start + chunk))
        d = np.unravel_index(k, dims)
        z = np.stack(d[:m], axis=1)
        t = np.stack(d[m : m + n], axis=1)
        f = np.stack(d[m + n : 2 * m + n], axis=1)
        g = np.stack(d[2 * m + n :], axis=1)
        imgs = tab[z[:, xs], f[:, xs], t[:, ys], g[:, ys]]  # (K, m, n, ka, kb)
        yield start, imgs


def wiring_images(P: DistributionTuple, cap: int = WIRING_CAP) -> np.ndarray:
    """All images ``W_k(P).p`` stacked in canonical order."""
    return np.concatenate([imgs for _, imgs in iter_wiring_images(P, cap)])


def unique_wiring_images(P: DistributionTuple, cap: int = WIRING_CAP, decimals: int = 12):
    """Deduplicated images. Returns ``(indices, images)``; each index is the
    smallest canonical wiring index producing that image."""
    seen: dict[bytes, int] = {}
    rows: list[np.ndarray] = []
    for start, imgs in iter_wiring_images(P, cap):
        flat = imgs.reshape(len(imgs), -1)
        key = np.round(flat, decimals) + 0.0  # +0.0 folds -0.0 into 0.0
        _, first = np.unique(key, axis=0, return_index=True)
        for i in np.sort(first):
            b = key[i].tobytes()
            if b not in seen:
                seen[b] = start + int(i)
                rows.append(flat[i])
    return np.fromiter(seen.values(), dtype=np.int64), np.array(rows)


# -- mixing and the order ---------------------------------------------------


def mix_with_local(P: DistributionTuple, L: DistributionTuple, p: float, check: bool = False) -> DistributionTuple:
    """``p P + (1 - p) L``. With ``check=True`` ``L`` is verified to be local."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mixing weight must be in [0, 1], got {p}")
    if P.scenario != L.scenario:
        raise ShapeError("P and L must share a scenario")
    if check:
        from .polytope import is_local

        if not is_local(L).is_local:
            raise ValueError("L is not Bell local")
    return DistributionTuple(P.scenario, p * P.p + (1.0 - p) * L.p)


@dataclass(frozen=True)
class OrderCertificate:
    """Witness that ``P`` is not less nonlocal than the target:
    ``target = p0 L + sum_k p_k W_k(P)``."""

    scenario: BellScenario
    p0: float
    local_part: LocalDecomposition | None
    terms: tuple  # of (p_k, Wiring, canonical index)
    residual: float

    feasible = True

    def reconstruct(self, P: DistributionTuple) -> DistributionTuple:
        out = np.zeros(self.scenario.shape)
        if self.local_part is not None and self.p0 > 0:
            out += self.p0 * self.local_part.to_tuple().p
        for pk, W, _ in self.terms:
            out += pk * apply_wiring(P, W).p
        return DistributionTuple(self.scenario, out)

    def to_dict(self) -> dict:
        return {
            "kind": "feasible",
            "p0": self.p0,
            "local_part": None if self.local_part is None else self.local_part.to_dict(),
            "terms": [
                {"p": pk, "wiring_index": idx, "wiring": W.to_dict(self.scenario)}
                for pk, W, idx in self.terms
            ],
            "residual": self.residual,
        }


@dataclass(frozen=True)
class OrderInfeasible:
    """Functional ``beta`` with ``beta . target`` above every reachable value."""

    scenario: BellScenario
    bell_functional: np.ndarray
    value: float
    reachable_max: float

    feasible = False

    @property
    def gap(self) -> float:
        return self.value - self.reachable_max

    def to_dict(self) -> dict:
        return {
            "kind": "infeasible",
            "bell_functional": self.bell_functional.tolist(),
            "value": self.value,
            "reachable_max": self.reachable_max,
            "gap": self.gap,
        }


def check_order(P: DistributionTuple, P_target: DistributionTuple, tol: float = DEFAULT_TOL, cap: int = WIRING_CAP):
    """Decide whether ``P`` is not less nonlocal than ``P_target``.

    LP over local vertices (which absorb ``p0 L``) and every distinct wired
    image of ``P``; returns :class:`OrderCertificate` or :class:`OrderInfeasible`.
    """
    from .simplex import solve_lp

    s = P.scenario
    if P_target.scenario != s:
        raise ShapeError("both tuples must share a scenario")
    V = vertex_matrix(s)
    idx, imgs = unique_wiring_images(P, cap)
    cols = np.hstack([V, imgs.T])
    A = np.vstack([cols, np.ones((1, cols.shape[1]))])
    b = np.r_[P_target.p.ravel(), 1.0]
    res = solve_lp(A, b, tol=tol)
    nv = V.shape[1]
    if not res.feasible:
        beta = res.duals[:-1].reshape(s.shape)
        return OrderInfeasible(s, beta, float(np.sum(beta * P_target.p)), float(np.max(beta.ravel() @ cols)))
    q, pw = res.x[:nv], res.x[nv:]
    p0 = float(q.sum())
    local = decomposition_from_weights(s, q / p0, 0.0) if p0 > 0 else None
    terms = tuple(
        (float(pw[k]), wiring_at(s, int(idx[k])), int(idx[k])) for k in np.flatnonzero(pw > 0)
    )
    cert = OrderCertificate(s, p0, local, terms, 0.0)
    resid = cert.reconstruct(P).distance(P_target)
    return OrderCertificate(s, p0, local, terms, resid)


def compose_moves(s: BellScenario, moves: Sequence[Move]) -> Wiring:
    """Single canonical wiring equal to applying ``moves`` in order."""
    W = identity_wiring(s)
    for mv in moves:
        W = W.then(move_as_wiring(s, mv))
    return W
