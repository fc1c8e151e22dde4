"""Bell functionals and the CHSH-violation monotone.

``chsh_measure`` is ``max(0, max_nu |sum_{x,y} nu(x,y) <A_x B_y>| - 2)`` where
``nu`` runs over the four sign tables on ``{0,1}^2`` with exactly one ``-1``.
It is defined for 2x2 binary scenarios only; wider tuples go through
:func:`select_inputs` first.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, UnsupportedScenarioError
from .polytope import vertex_matrix
from .scenario import BellScenario, DistributionTuple, chsh_scenario, correlators
from .transforms import apply_wiring, iter_wiring_images, wiring_at, wiring_count

LOCAL_BOUND = 2.0
TSIRELSON = 2.0 * np.sqrt(2.0)

# nu tables with a single -1, ordered by the position of that -1: (0,0), (0,1), (1,0), (1,1)
NU_MAPS = np.array([np.where(np.arange(4).reshape(2, 2) == k, -1.0, 1.0) for k in range(4)])
S_NU = NU_MAPS[3]  # (-1)^(x*y): the usual S expression


@dataclass(frozen=True)
class BellFunctional:
    coefficients: np.ndarray  # indexed [x, y, i, j] like a tuple
    offset: float = 0.0

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float)
        if not np.all(np.isfinite(c)):
            raise ValueError("Bell functional coefficients must be finite")
        object.__setattr__(self, "coefficients", c)


def chsh_functional(nu=S_NU, scenario: BellScenario | None = None, offset: float = 0.0) -> BellFunctional:
    """``beta[x,y,a,b] = nu(x,y) * a * b`` on a 2x2 +-1 scenario."""
    s = scenario or chsh_scenario()
    s.require_pm_binary("chsh_functional")
    ab = np.outer(s.outputs_a, s.outputs_b)
    return BellFunctional(np.asarray(nu, dtype=float)[:, :, None, None] * ab, offset)


def bell_value(P: DistributionTuple, f: BellFunctional) -> float:
    if f.coefficients.shape != P.p.shape:
        raise ShapeError(f"functional shape {f.coefficients.shape} vs tuple shape {P.p.shape}")
    return float(np.sum(f.coefficients * P.p) - f.offset)


def _require_chsh(P):
    s = P.scenario
    if s.m != 2 or s.n != 2:
        raise UnsupportedScenarioError(
            f"CHSH measure needs m = n = 2 (got m={s.m}, n={s.n}); use select_inputs"
        )
    s.require_pm_binary("CHSH measure")


def chsh_values_from_correlators(E: np.ndarray) -> np.ndarray:
    """``max_nu |sum nu E|`` for a stack of 2x2 correlator matrices ``E[..., x, y]``."""
    vals = np.abs(np.einsum("kxy,...xy->...k", NU_MAPS, E))
    return vals.max(axis=-1)


def chsh_value(P: DistributionTuple) -> float:
    """Largest absolute CHSH expression over the four sign tables."""
    _require_chsh(P)
    return float(chsh_values_from_correlators(correlators(P)))


def chsh_measure(P: DistributionTuple) -> float:
    return max(0.0, chsh_value(P) - LOCAL_BOUND)


def chsh_measure_batch(p: np.ndarray, outputs_a=(-1, 1), outputs_b=None) -> np.ndarray:
    """Vectorized measure on tensors of shape ``(..., 2, 2, 2, 2)``."""
    ab = np.outer(outputs_a, outputs_a if outputs_b is None else outputs_b)
    E = np.einsum("...xyab,ab->...xy", p, ab)
    return np.maximum(0.0, chsh_values_from_correlators(E) - LOCAL_BOUND)


@dataclass(frozen=True)
class InputSelection:
    alice_inputs: tuple[int, ...]
    bob_inputs: tuple[int, ...]
    restricted: DistributionTuple
    value: float  # |correlator| or CHSH measure, depending on the strategy


def select_inputs(P: DistributionTuple, strategy: str = "max_correlator") -> InputSelection:
    """Pick inputs for the CHSH machinery; ties go to the lexicographically first.

    ``max_correlator`` returns the single pair ``(xi, zeta)`` maximizing
    ``|<A_xi B_zeta>|`` with its 1x1 restriction. ``max_chsh`` returns the
    2x2 restriction (input pairs ``x1 < x2``, ``y1 < y2``) maximizing the
    CHSH measure.
    """
    P.scenario.require_pm_binary("select_inputs")
    s = P.scenario
    if strategy == "max_correlator":
        E = np.abs(correlators(P))
        x, y = np.unravel_index(int(np.argmax(E)), E.shape)
        return InputSelection((int(x),), (int(y),), P.restrict([x], [y]), float(E[x, y]))
    if strategy == "max_chsh":
        if s.m < 2 or s.n < 2:
            raise UnsupportedScenarioError("max_chsh needs at least two inputs per party")
        best = None
        for xs in itertools.combinations(range(s.m), 2):
            for ys in itertools.combinations(range(s.n), 2):
                sub = P.restrict(xs, ys)
                val = chsh_measure(sub)
                if best is None or val > best.value:
                    best = InputSelection(xs, ys, sub, val)
        return best
    raise ValueError(f"unknown strategy {strategy!r}")


def chsh_restricted(P: DistributionTuple) -> DistributionTuple:
    """``P`` itself for 2x2 tuples, else its best 2x2 restriction."""
    if P.scenario.m == 2 and P.scenario.n == 2:
        return P
    return select_inputs(P, "max_chsh").restricted


# -- monotonicity probe -----------------------------------------------------


@dataclass
class ProbeReport:
    base_value: float
    trials: int
    max_increase: float
    worst_kind: str | None = None
    worst_wiring: dict | None = None
    worst_weight: float | None = None

    def to_dict(self) -> dict:
        return {
            "base_value": self.base_value,
            "trials": self.trials,
            "max_increase": self.max_increase,
            "worst_kind": self.worst_kind,
            "worst_wiring": self.worst_wiring,
            "worst_weight": self.worst_weight,
        }


def random_local_tuple(s: BellScenario, rng: np.random.Generator) -> DistributionTuple:
    V = vertex_matrix(s)
    w = rng.dirichlet(np.full(V.shape[1], 0.5))
    return DistributionTuple(s, (V @ w).reshape(s.shape))


def monotonicity_probe(P: DistributionTuple, trials: int = 1000, seed: int = 0, exhaustive: bool = False) -> ProbeReport:
    """Largest observed increase of the CHSH measure under random allowed maps.

    Each trial draws from its own stream ``SeedSequence(seed).spawn(trials)[i]``:
    with probability 1/2 a uniformly random canonical wiring, otherwise a mixture
    ``w P + (1 - w) L`` with a random local ``L``. ``exhaustive=True`` also
    evaluates every canonical wiring image.
    """
    _require_chsh(P)
    s = P.scenario
    base = chsh_measure(P)
    report = ProbeReport(base, trials, -np.inf)

    def consider(inc, kind, wiring=None, weight=None):
        if inc > report.max_increase:
            report.max_increase = float(inc)
            report.worst_kind = kind
            report.worst_wiring = wiring
            report.worst_weight = weight

    if exhaustive:
        for start, imgs in iter_wiring_images(P):
            vals = chsh_measure_batch(imgs, s.outputs_a, s.outputs_b)
            k = int(np.argmax(vals))
            consider(vals[k] - base, "wiring", wiring_at(s, start + k).to_dict(s))

    nw = wiring_count(s)
    for child in np.random.SeedSequence(seed).spawn(trials):
        rng = np.random.default_rng(child)
        if rng.random() < 0.5:
            W = wiring_at(s, int(rng.integers(nw)))
            consider(chsh_measure(apply_wiring(P, W)) - base, "wiring", W.to_dict(s))
        else:
            w = float(rng.random())
            L = random_local_tuple(s, rng)
            Q = DistributionTuple(s, w * P.p + (1 - w) * L.p)
            consider(chsh_measure(Q) - base, "mixture", weight=w)
    return report
