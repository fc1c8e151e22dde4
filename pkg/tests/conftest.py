import itertools

import numpy as np
import pytest

from nlkit.scenario import PM, DistributionTuple, chsh_scenario


def pr_family():
    """The eight PR boxes: ab = (-1)^(xy + alpha x + beta y + gamma)."""
    s = chsh_scenario()
    boxes = []
    for al, be, ga in itertools.product((0, 1), repeat=3):
        p = np.zeros(s.shape)
        for x, y in itertools.product((0, 1), repeat=2):
            sign = (-1) ** (x * y + al * x + be * y + ga)
            for i, a in enumerate(PM):
                for j, b in enumerate(PM):
                    if a * b == sign:
                        p[x, y, i, j] = 0.5
        boxes.append(p)
    return np.array(boxes)


def vertex_tensors(s):
    """Deterministic tuples built independently of nlkit.polytope."""
    out = []
    m, n, ka, kb = s.shape
    for ai in itertools.product(range(ka), repeat=m):
        for bj in itertools.product(range(kb), repeat=n):
            p = np.zeros(s.shape)
            for x in range(m):
                for y in range(n):
                    p[x, y, ai[x], bj[y]] = 1.0
            out.append(p)
    return np.array(out)


EXTREMAL_2222 = np.concatenate([vertex_tensors(chsh_scenario()), pr_family()])


def random_ns_tuple(rng, concentration=0.3):
    """Random no-signaling 2x2 binary tuple: Dirichlet mixture of all 24 extremal boxes."""
    w = rng.dirichlet(np.full(len(EXTREMAL_2222), concentration))
    return DistributionTuple(chsh_scenario(), np.tensordot(w, EXTREMAL_2222, axes=1))


def random_local_tuple(rng, s=None):
    s = s or chsh_scenario()
    V = vertex_tensors(s)
    w = rng.dirichlet(np.full(len(V), 0.5))
    return DistributionTuple(s, np.tensordot(w, V, axes=1))


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS):
        terminalreporter.write_line(line)
