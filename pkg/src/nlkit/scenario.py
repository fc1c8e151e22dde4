"""Bell scenarios and distribution tuples.

A distribution tuple (behavior) is stored as a float tensor ``p[x, y, i, j]``
where ``x``/``y`` are zero-based input indices and ``i``/``j`` index the
ordered output alphabets, so ``p[x, y, i, j] = P_{x,y}(outputs_a[i], outputs_b[j])``.
The same layout is used on disk.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ShapeError, UnsupportedScenarioError

DEFAULT_TOL = 1e-9
PM = (-1, 1)


@dataclass(frozen=True)
class BellScenario:
    m: int
    n: int
    outputs_a: tuple[int, ...] = PM
    outputs_b: tuple[int, ...] = PM

    def __post_init__(self):
        object.__setattr__(self, "outputs_a", tuple(int(a) for a in self.outputs_a))
        object.__setattr__(self, "outputs_b", tuple(int(b) for b in self.outputs_b))
        if self.m < 1 or self.n < 1:
            raise ValueError(f"need m, n >= 1, got m={self.m}, n={self.n}")
        for name, alph in (("outputs_a", self.outputs_a), ("outputs_b", self.outputs_b)):
            if not alph:
                raise ValueError(f"{name} is empty")
            if len(set(alph)) != len(alph):
                raise ValueError(f"{name} has duplicates: {alph}")

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.m, self.n, len(self.outputs_a), len(self.outputs_b))

    @property
    def is_pm_binary(self) -> bool:
        return set(self.outputs_a) == {-1, 1} and set(self.outputs_b) == {-1, 1}

    def require_pm_binary(self, what="operation"):
        if not self.is_pm_binary:
            raise UnsupportedScenarioError(
                f"{what} needs output alphabets {{-1, +1}}, got "
                f"{self.outputs_a} / {self.outputs_b}"
            )


def chsh_scenario(m=2, n=2) -> BellScenario:
    return BellScenario(m, n, PM, PM)


class DistributionTuple:
    """Immutable behavior ``P_{x,y}(a,b)`` attached to a :class:`BellScenario`.

    Construction only checks shapes; probabilistic validity is reported by
    :func:`validate`, so deliberately broken tuples can still be inspected.
    """

    __slots__ = ("scenario", "p")

    def __init__(self, scenario: BellScenario, p):
        arr = np.array(p, dtype=float)
        if arr.shape != scenario.shape:
            raise ShapeError(f"tensor shape {arr.shape} does not match scenario {scenario.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "scenario", scenario)
        object.__setattr__(self, "p", arr)

    def __setattr__(self, name, value):
        raise AttributeError("DistributionTuple is immutable")

    def __eq__(self, other):
        if not isinstance(other, DistributionTuple):
            return NotImplemented
        return self.scenario == other.scenario and np.array_equal(self.p, other.p)

    def __hash__(self):
        return hash((self.scenario, self.p.tobytes()))

    def __repr__(self):
        m, n, ka, kb = self.scenario.shape
        return f"DistributionTuple(m={m}, n={n}, |A|={ka}, |B|={kb})"

    def block(self, x: int, y: int) -> np.ndarray:
        return self.p[x, y]

    def marginal_a(self, x: int, y: int = 0) -> np.ndarray:
        return self.p[x, y].sum(axis=1)

    def marginal_b(self, y: int, x: int = 0) -> np.ndarray:
        return self.p[x, y].sum(axis=0)

    def restrict(self, xs: Sequence[int], ys: Sequence[int]) -> "DistributionTuple":
        """Sub-tuple keeping Alice inputs ``xs`` and Bob inputs ``ys`` in the given order."""
        s = self.scenario
        sub = BellScenario(len(xs), len(ys), s.outputs_a, s.outputs_b)
        return DistributionTuple(sub, self.p[np.ix_(list(xs), list(ys))])

    def distance(self, other: "DistributionTuple") -> float:
        """Largest absolute entry difference."""
        return float(np.max(np.abs(self.p - other.p)))

    def to_dict(self) -> dict:
        s = self.scenario
        return {
            "m": s.m,
            "n": s.n,
            "outputs_a": list(s.outputs_a),
            "outputs_b": list(s.outputs_b),
            "p": self.p.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DistributionTuple":
        s = BellScenario(int(d["m"]), int(d["n"]), tuple(d["outputs_a"]), tuple(d["outputs_b"]))
        return cls(s, d["p"])

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "DistributionTuple":
        return cls.from_dict(json.loads(Path(path).read_text()))


def mixture(weights: Sequence[float], tuples: Sequence[DistributionTuple]) -> DistributionTuple:
    """Convex combination ``sum_i w_i P_i`` of tuples sharing one scenario."""
    if len(weights) != len(tuples) or not tuples:
        raise ValueError("weights and tuples must be non-empty and of equal length")
    s = tuples[0].scenario
    if any(t.scenario != s for t in tuples):
        raise ShapeError("all tuples in a mixture must share a scenario")
    p = np.tensordot(np.asarray(weights, dtype=float), np.stack([t.p for t in tuples]), axes=1)
    return DistributionTuple(s, p)


def uniform_tuple(scenario: BellScenario) -> DistributionTuple:
    m, n, ka, kb = scenario.shape
    return DistributionTuple(scenario, np.full(scenario.shape, 1.0 / (ka * kb)))


def pr_box() -> DistributionTuple:
    """PR box: ``P_{x,y}(a,b) = 1/2`` iff ``a*b = (-1)^(x*y)`` (zero-based inputs)."""
    s = chsh_scenario()
    p = np.zeros(s.shape)
    for x in range(2):
        for y in range(2):
            for i, a in enumerate(PM):
                for j, b in enumerate(PM):
                    if a * b == (-1) ** (x * y):
                        p[x, y, i, j] = 0.5
    return DistributionTuple(s, p)


def _correlated_block(c: float) -> np.ndarray:
    """2x2 block ``(1 + a*b*c)/4`` over the ordered alphabet (-1, +1)."""
    ab = np.outer(PM, PM)
    return (1.0 + ab * c) / 4.0


def make_theta_family(theta: float, extended: bool = False, primed: bool = False) -> DistributionTuple:
    """The one-parameter family used to show that a single-protocol rate is not monotone.

    ``P_{0,0} = P_{1,0} = (1 + ab cos t)/4``, ``P_{0,1} = (1 + ab sin t)/4``,
    ``P_{1,1} = (1 - ab sin t)/4`` and, if ``extended``, a third Alice input with
    uniform blocks. ``primed`` (requires ``extended``) returns the substituted
    tuple whose third Alice input copies the first.
    """
    if primed and not extended:
        raise ValueError("primed tuple is only defined for the extended (m=3) family")
    c, s = np.cos(theta), np.sin(theta)
    blocks = [
        [_correlated_block(c), _correlated_block(s)],
        [_correlated_block(c), _correlated_block(-s)],
    ]
    if extended:
        third = [_correlated_block(c), _correlated_block(s)] if primed else [_correlated_block(0.0)] * 2
        blocks.append(third)
    scen = chsh_scenario(len(blocks), 2)
    return DistributionTuple(scen, np.array(blocks))


@dataclass(frozen=True)
class ValidationReport:
    nonnegative: bool
    normalized: bool
    no_signaling: bool
    max_negative: float
    max_normalization_error: float
    max_signaling: float
    tol: float

    @property
    def ok(self) -> bool:
        return self.nonnegative and self.normalized and self.no_signaling

    def to_dict(self) -> dict:
        return {
            "nonnegative": self.nonnegative,
            "normalized": self.normalized,
            "no_signaling": self.no_signaling,
            "max_negative": self.max_negative,
            "max_normalization_error": self.max_normalization_error,
            "max_signaling": self.max_signaling,
            "tol": self.tol,
            "ok": self.ok,
        }


def signaling_violation(p: np.ndarray) -> float:
    """Worst dependence of a party's marginal on the other party's input."""
    ma = p.sum(axis=3)  # [x, y, a]
    mb = p.sum(axis=2)  # [x, y, b]
    dev_a = np.max(np.abs(ma - ma[:, :1, :])) if p.shape[1] > 1 else 0.0
    dev_b = np.max(np.abs(mb - mb[:1, :, :])) if p.shape[0] > 1 else 0.0
    return float(max(dev_a, dev_b))


def validate(P: DistributionTuple, tol: float = DEFAULT_TOL) -> ValidationReport:
    if P.p.shape != P.scenario.shape:
        raise ShapeError(f"tensor shape {P.p.shape} does not match scenario {P.scenario.shape}")
    p = P.p
    neg = float(max(0.0, -p.min()))
    over = float(max(0.0, p.max() - 1.0))
    norm_err = float(np.max(np.abs(p.sum(axis=(2, 3)) - 1.0)))
    sig = signaling_violation(p)
    return ValidationReport(
        nonnegative=neg <= tol and over <= tol,
        normalized=norm_err <= tol,
        no_signaling=sig <= tol,
        max_negative=max(neg, over),
        max_normalization_error=norm_err,
        max_signaling=sig,
        tol=tol,
    )


def correlator(P: DistributionTuple, x: int, y: int) -> float:
    """Expectation ``<A_x B_y> = sum_{a,b} a b P_{x,y}(a,b)``."""
    P.scenario.require_pm_binary("correlator")
    ab = np.outer(P.scenario.outputs_a, P.scenario.outputs_b)
    return float(np.sum(ab * P.p[x, y]))


def correlators(P: DistributionTuple) -> np.ndarray:
    """All correlators as an ``m x n`` matrix."""
    P.scenario.require_pm_binary("correlators")
    ab = np.outer(P.scenario.outputs_a, P.scenario.outputs_b)
    return np.einsum("xyab,ab->xy", P.p, ab)
