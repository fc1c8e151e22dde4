"""Seeded Monte Carlo simulation of raw-key protocols.

Rounds are cut into fixed blocks of ``BLOCK`` rounds. Block ``b`` of a run
with seed ``s`` draws from ``Philox(SeedSequence(s, spawn_key=(b,)))``, so the
result does not depend on how blocks are spread over worker threads.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedScenarioError
from .scenario import DistributionTuple, correlator
from .transforms import OrderCertificate

BLOCK = 1 << 16
KINDS = ("measure_and_mask", "nu_masked", "wiring_lemma")
TRACE_COLUMNS = ("round", "k", "x", "y", "e", "u", "v", "a", "b")


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _cdf(P):
    m, n, ka, kb = P.scenario.shape
    return np.cumsum(P.p.reshape(m, n, ka * kb), axis=-1)


def _sample_indices(cdf, xs, ys, u):
    """Inverse-CDF draw of flattened outcome indices for input arrays ``xs``, ``ys``."""
    k = (cdf[xs, ys] <= u[:, None]).sum(axis=1)
    return np.minimum(k, cdf.shape[-1] - 1)


def sample_round(P: DistributionTuple, x: int, y: int, rng: np.random.Generator) -> tuple[int, int]:
    """One draw ``(a, b)`` from ``P_{x,y}`` by inverse CDF."""
    kb = len(P.scenario.outputs_b)
    k = int(_sample_indices(_cdf(P), np.array([x]), np.array([y]), np.array([rng.random()]))[0])
    return P.scenario.outputs_a[k // kb], P.scenario.outputs_b[k % kb]


@dataclass(frozen=True)
class ProtocolSpec:
    kind: str
    xi: int = 0
    zeta: int = 0
    nu: tuple = ((1, 1), (1, -1))
    certificate: OrderCertificate | None = None
    x_out: int = 0
    y_out: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown protocol kind {self.kind!r}")
        nu = np.asarray(self.nu)
        if self.kind == "nu_masked" and (nu.shape != (2, 2) or set(nu.ravel()) - {-1, 1} or (nu == -1).sum() != 1):
            raise ValueError("nu must be a 2x2 +-1 table with exactly one -1")
        if self.kind == "wiring_lemma" and self.certificate is None:
            raise ValueError("wiring_lemma protocol needs an order certificate")

    @classmethod
    def measure_and_mask(cls, xi, zeta):
        return cls("measure_and_mask", xi=xi, zeta=zeta)

    @classmethod
    def nu_masked(cls, nu=((1, 1), (1, -1))):
        return cls("nu_masked", nu=tuple(tuple(int(v) for v in row) for row in nu))

    @classmethod
    def wiring_lemma(cls, certificate, x_out, y_out):
        return cls("wiring_lemma", certificate=certificate, x_out=x_out, y_out=y_out)


@dataclass
class SimResult:
    rounds: int
    counts: np.ndarray
    outputs_a: tuple
    outputs_b: tuple
    trace: dict | None = field(default=None, repr=False)

    @property
    def joint_ab(self) -> np.ndarray:
        return self.counts / self.rounds

    @property
    def empirical_correlator(self) -> float:
        return float(np.sum(np.outer(self.outputs_a, self.outputs_b) * self.joint_ab))

    @property
    def empirical_mi(self) -> float:
        """Plug-in mutual information in bits (``0 log 0 = 0``, no bias correction)."""
        J = self.joint_ab
        pa, pb = J.sum(axis=1), J.sum(axis=0)
        nz = J > 0
        return float(np.sum(J[nz] * np.log2(J[nz] / np.outer(pa, pb)[nz])))

    @property
    def correlator_stderr(self) -> float:
        c = self.empirical_correlator
        return math.sqrt(max(0.0, 1.0 - c * c) / self.rounds)

    @property
    def mi_stderr(self) -> float:
        J = self.joint_ab
        nz = J > 0
        lr = np.log2(J[nz] / np.outer(J.sum(axis=1), J.sum(axis=0))[nz])
        var = np.sum(J[nz] * lr**2) - np.sum(J[nz] * lr) ** 2
        return math.sqrt(max(0.0, var) / self.rounds)

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "counts": self.counts.tolist(),
            "joint_ab": self.joint_ab.tolist(),
            "empirical_correlator": self.empirical_correlator,
            "correlator_stderr": self.correlator_stderr,
            "empirical_mi": self.empirical_mi,
            "mi_stderr": self.mi_stderr,
        }

    def __eq__(self, other):
        if not isinstance(other, SimResult):
            return NotImplemented
        return self.rounds == other.rounds and np.array_equal(self.counts, other.counts)


def analytic_correlator(P: DistributionTuple, spec: ProtocolSpec) -> float:
    if spec.kind == "measure_and_mask":
        return correlator(P, spec.xi, spec.zeta)
    if spec.kind == "nu_masked":
        nu = np.asarray(spec.nu)
        return 0.25 * sum(nu[x, y] * correlator(P, x, y) for x in range(2) for y in range(2))
    target = spec.certificate.reconstruct(P)
    return correlator(target, spec.x_out, spec.y_out)


def _masked_block(P, spec, rng, size):
    s = P.scenario
    kb = len(s.outputs_b)
    cdf = _cdf(P)
    A = np.asarray(s.outputs_a)
    B = np.asarray(s.outputs_b)
    if spec.kind == "measure_and_mask":
        xs = np.full(size, spec.xi)
        ys = np.full(size, spec.zeta)
        e = 2 * rng.integers(2, size=size) - 1
        k = _sample_indices(cdf, xs, ys, rng.random(size))
        u, v = A[k // kb], B[k % kb]
        a, b = e * u, e * v
    else:
        xs = rng.integers(2, size=size)
        ys = rng.integers(2, size=size)
        e = 2 * rng.integers(2, size=size) - 1
        k = _sample_indices(cdf, xs, ys, rng.random(size))
        u, v = A[k // kb], B[k % kb]
        a, b = np.asarray(spec.nu)[xs, ys] * e * u, e * v
    cols = {"k": np.zeros(size, dtype=int), "x": xs, "y": ys, "e": e, "u": u, "v": v, "a": a, "b": b}
    return a, b, cols


def _lemma_tables(P, cert, x_out, y_out):
    """Flatten the certificate into components: local vertices then wiring terms."""
    s = P.scenario
    weights, comp_x, comp_y, fmap, gmap, fixed_a, fixed_b, comp_k = [], [], [], [], [], [], [], []
    ident_a = tuple(range(len(s.outputs_a)))
    ident_b = tuple(range(len(s.outputs_b)))
    if cert.local_part is not None and cert.p0 > 0:
        for v, q in cert.local_part.weights.items():
            weights.append(cert.p0 * q)
            comp_x.append(0)
            comp_y.append(0)
            fmap.append(ident_a)
            gmap.append(ident_b)
            fixed_a.append(s.outputs_a.index(v.a_assign[x_out]))
            fixed_b.append(s.outputs_b.index(v.b_assign[y_out]))
            comp_k.append(0)
    for i, (pk, W, _) in enumerate(cert.terms):
        weights.append(pk)
        comp_x.append(W.z[x_out])
        comp_y.append(W.t[y_out])
        fmap.append(W.F[x_out])
        gmap.append(W.G[y_out])
        fixed_a.append(-1)
        fixed_b.append(-1)
        comp_k.append(i + 1)
    w = np.asarray(weights, dtype=float)
    return (
        np.cumsum(w / w.sum()),
        np.asarray(comp_x),
        np.asarray(comp_y),
        np.asarray(fmap),
        np.asarray(gmap),
        np.asarray(fixed_a),
        np.asarray(fixed_b),
        np.asarray(comp_k),
    )


def _lemma_block(P, tables, rng, size):
    s = P.scenario
    kb = len(s.outputs_b)
    cum, cx, cy, fmap, gmap, fa, fb, ck = tables
    c = np.minimum(np.searchsorted(cum, rng.random(size), side="right"), len(cum) - 1)
    xs, ys = cx[c], cy[c]
    k = _sample_indices(_cdf(P), xs, ys, rng.random(size))
    ui, vi = k // kb, k % kb
    ai = np.where(fa[c] >= 0, fa[c], fmap[c, ui])
    bi = np.where(fb[c] >= 0, fb[c], gmap[c, vi])
    A = np.asarray(s.outputs_a)
    B = np.asarray(s.outputs_b)
    cols = {"k": ck[c], "x": xs, "y": ys, "e": np.zeros(size, dtype=int), "u": A[ui], "v": B[vi], "a": A[ai], "b": B[bi]}
    return ai, bi, cols


def _run_blocks(P, rounds, seed, workers, trace, draw):
    s = P.scenario
    ka, kb = len(s.outputs_a), len(s.outputs_b)
    nblocks = -(-rounds // BLOCK)

    def one(bidx):
        size = min(BLOCK, rounds - bidx * BLOCK)
        ai, bi, cols = draw(block_rng(seed, bidx), size)
        counts = np.zeros((ka, kb), dtype=np.int64)
        np.add.at(counts, (ai, bi), 1)
        return counts, (cols if trace else None)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(one, range(nblocks)))
    else:
        parts = [one(b) for b in range(nblocks)]
    counts = sum(c for c, _ in parts)
    tr = None
    if trace:
        tr = {key: np.concatenate([cols[key] for _, cols in parts]) for key in TRACE_COLUMNS[1:]}
        tr["round"] = np.arange(rounds)
    return counts, tr


def _index_of(values, alphabet):
    alph = np.asarray(alphabet)
    order = np.argsort(alph)
    return order[np.searchsorted(alph[order], values)]


def run_protocol(P: DistributionTuple, spec: ProtocolSpec, rounds: int, seed: int, workers: int = 1, trace: bool = False) -> SimResult:
    """Simulate ``rounds`` independent rounds and tabulate the raw-key pair ``(A, B)``."""
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    s = P.scenario
    if spec.kind == "wiring_lemma":
        counts, tr = _lemma_counts(P, spec.certificate, spec.x_out, spec.y_out, rounds, seed, workers, trace)
        return SimResult(rounds, counts, s.outputs_a, s.outputs_b, tr)
    s.require_pm_binary(spec.kind)
    if spec.kind == "measure_and_mask" and not (0 <= spec.xi < s.m and 0 <= spec.zeta < s.n):
        raise UnsupportedScenarioError(f"inputs ({spec.xi}, {spec.zeta}) not in scenario")
    if spec.kind == "nu_masked" and (s.m < 2 or s.n < 2):
        raise UnsupportedScenarioError("nu_masked protocol needs two inputs per party")

    def draw(rng, size):
        a, b, cols = _masked_block(P, spec, rng, size)
        return _index_of(a, s.outputs_a), _index_of(b, s.outputs_b), cols

    counts, tr = _run_blocks(P, rounds, seed, workers, trace, draw)
    return SimResult(rounds, counts, s.outputs_a, s.outputs_b, tr)


def _lemma_counts(P, cert, x_out, y_out, rounds, seed, workers, trace, tol=1e-8):
    s = P.scenario
    if cert.residual > tol:
        raise ValueError(f"certificate residual {cert.residual:.3g} above tolerance {tol:g}")
    if not (0 <= x_out < s.m and 0 <= y_out < s.n):
        raise ValueError(f"inputs ({x_out}, {y_out}) not in scenario")
    tables = _lemma_tables(P, cert, x_out, y_out)
    return _run_blocks(P, rounds, seed, workers, trace, lambda rng, size: _lemma_block(P, tables, rng, size))


def run_lemma_protocol(P: DistributionTuple, cert: OrderCertificate, x_out: int, y_out: int, rounds: int, seed: int, workers: int = 1) -> np.ndarray:
    """Empirical table of ``(A'_x', B'_y')`` produced by the certificate's wiring protocol.

    Per round a component is drawn with the certificate's weights: a local
    vertex yields its fixed outputs, a wiring term routes the inputs through
    ``(z, t)``, samples ``(u, v)`` from ``P`` and outputs ``(F(u), G(v))``.
    """
    counts, _ = _lemma_counts(P, cert, x_out, y_out, rounds, seed, workers, False)
    return counts / rounds


def write_trace(path, trace: dict):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for row in zip(*(trace[c] for c in TRACE_COLUMNS)):
            w.writerow([int(v) for v in row])
