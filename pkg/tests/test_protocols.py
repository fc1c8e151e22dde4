import math

import numpy as np
import pytest

from nlkit.errors import UnsupportedScenarioError
from nlkit.protocols import (
    BLOCK,
    TRACE_COLUMNS,
    ProtocolSpec,
    analytic_correlator,
    block_rng,
    run_lemma_protocol,
    run_protocol,
    sample_round,
    write_trace,
)
from nlkit.rates import mutual_information_unbiased
from nlkit.scenario import DistributionTuple, chsh_scenario, make_theta_family, pr_box, uniform_tuple
from nlkit.transforms import check_order

S22 = chsh_scenario()


def test_sample_round_deterministic_blocks():
    p = np.zeros(S22.shape)
    p[:, :, 1, 0] = 1.0
    P = DistributionTuple(S22, p)
    rng = np.random.default_rng(0)
    assert all(sample_round(P, x, y, rng) == (1, -1) for x in range(2) for y in range(2))


def test_sample_round_frequencies():
    P = make_theta_family(0.3)
    rng = np.random.default_rng(1)
    n = 20000
    draws = [sample_round(P, 0, 1, rng) for _ in range(n)]
    freq = np.mean([a * b for a, b in draws])
    assert abs(freq - math.sin(0.3)) < 4 * math.sqrt(1 / n)


def test_block_streams_are_independent_of_each_other():
    a = block_rng(7, 0).random(5)
    b = block_rng(7, 1).random(5)
    assert not np.allclose(a, b)
    assert np.array_equal(a, block_rng(7, 0).random(5))


def test_spec_validation():
    with pytest.raises(ValueError):
        ProtocolSpec("bogus")
    with pytest.raises(ValueError):
        ProtocolSpec.nu_masked([[1, 1], [1, 1]])
    with pytest.raises(ValueError):
        ProtocolSpec("wiring_lemma")
    with pytest.raises(UnsupportedScenarioError):
        run_protocol(pr_box(), ProtocolSpec.measure_and_mask(2, 0), 10, 0)
    with pytest.raises(ValueError):
        run_protocol(pr_box(), ProtocolSpec.nu_masked(), 0, 0)


@pytest.mark.parametrize("workers", [2, 4])
def test_thread_count_does_not_change_results(workers):
    P = make_theta_family(0.7)
    spec = ProtocolSpec.nu_masked()
    rounds = 3 * BLOCK + 123
    base = run_protocol(P, spec, rounds, seed=11)
    assert run_protocol(P, spec, rounds, seed=11, workers=workers) == base
    assert run_protocol(P, spec, rounds, seed=12) != base
    assert base.counts.sum() == rounds


@pytest.mark.parametrize("nu_pos", range(4))
def test_nu_masked_statistics(nu_pos):
    P = make_theta_family(0.5)
    nu = np.ones((2, 2), dtype=int)
    nu.flat[nu_pos] = -1
    spec = ProtocolSpec.nu_masked(nu)
    res = run_protocol(P, spec, 200_000, seed=nu_pos)
    expect = analytic_correlator(P, spec)
    assert abs(res.empirical_correlator - expect) < 4 * res.correlator_stderr
    assert abs(res.empirical_mi - mutual_information_unbiased(expect)) < 0.01
    # masking makes both outputs unbiased
    assert np.allclose(res.joint_ab.sum(axis=1), 0.5, atol=0.01)


def test_measure_and_mask_statistics():
    P = make_theta_family(0.4)
    spec = ProtocolSpec.measure_and_mask(1, 1)
    res = run_protocol(P, spec, 200_000, seed=3)
    assert analytic_correlator(P, spec) == pytest.approx(-math.sin(0.4))
    assert abs(res.empirical_correlator + math.sin(0.4)) < 4 * res.correlator_stderr


def test_pr_box_nu_masked_is_perfect():
    res = run_protocol(pr_box(), ProtocolSpec.nu_masked(), 10_000, seed=0)
    assert res.empirical_correlator == 1.0
    assert res.empirical_mi == pytest.approx(1.0, abs=1e-3)


def test_trace_consistency(tmp_path):
    res = run_protocol(make_theta_family(0.2), ProtocolSpec.nu_masked(), 500, seed=4, trace=True)
    tr = res.trace
    nu = np.array([[1, 1], [1, -1]])
    assert np.array_equal(tr["a"], nu[tr["x"], tr["y"]] * tr["e"] * tr["u"])
    assert np.array_equal(tr["b"], tr["e"] * tr["v"])
    path = tmp_path / "t.csv"
    write_trace(path, tr)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(TRACE_COLUMNS)
    assert len(lines) == 501


def test_lemma_protocol_reproduces_target():
    th = 0.5
    P = make_theta_family(th, extended=True)
    Pp = make_theta_family(th, extended=True, primed=True)
    cert = check_order(P, Pp)
    for x in range(3):
        for y in range(2):
            table = run_lemma_protocol(P, cert, x, y, 100_000, seed=10 * x + y, workers=2)
            tv = 0.5 * np.abs(table - Pp.p[x, y]).sum()
            assert tv < 0.01


def test_lemma_protocol_with_local_part():
    P = pr_box()
    target = DistributionTuple(S22, 0.5 * P.p + 0.5 * uniform_tuple(S22).p)
    cert = check_order(P, target)
    spec = ProtocolSpec.wiring_lemma(cert, 1, 1)
    res = run_protocol(P, spec, 100_000, seed=2)
    assert abs(res.empirical_correlator - analytic_correlator(P, spec)) < 4 * res.correlator_stderr
    assert analytic_correlator(P, spec) == pytest.approx(-0.5, abs=1e-9)


@pytest.mark.parametrize("kind", ["measure_and_mask", "nu_masked", "wiring_lemma"])
def test_seeded_repetitions_within_five_sigma(kind):
    if kind == "wiring_lemma":
        P = make_theta_family(0.6, extended=True)
        cert = check_order(P, make_theta_family(0.6, extended=True, primed=True))
        spec = ProtocolSpec.wiring_lemma(cert, 2, 1)
    else:
        P = make_theta_family(0.6)
        spec = ProtocolSpec.measure_and_mask(0, 1) if kind == "measure_and_mask" else ProtocolSpec.nu_masked()
    expect = analytic_correlator(P, spec)
    inside = 0
    for seed in range(100):
        res = run_protocol(P, spec, 20_000, seed=seed)
        inside += abs(res.empirical_correlator - expect) <= 5 * res.correlator_stderr
    assert inside >= 99
