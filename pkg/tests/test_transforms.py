import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlkit.errors import EnumerationCapError, ShapeError
from nlkit.polytope import is_local
from nlkit.scenario import BellScenario, DistributionTuple, chsh_scenario, make_theta_family, pr_box, uniform_tuple, validate
from nlkit.transforms import (
    InputSubstitution,
    InputTransposition,
    OutputCoarseGraining,
    OutputRelabeling,
    Wiring,
    apply_elementary,
    apply_wiring,
    check_order,
    compose_moves,
    enumerate_wirings,
    identity_wiring,
    mix_with_local,
    move_as_wiring,
    unique_wiring_images,
    wiring_at,
    wiring_count,
    wiring_images,
    wiring_index,
)

from conftest import random_local_tuple, random_ns_tuple

S22 = chsh_scenario()
S32 = chsh_scenario(3, 2)
TERNARY = BellScenario(2, 2, (0, 1, 2), (0, 1))


def _random_tuple(rng, s):
    """Random no-signaling tuple: a local mixture, plus a PR part in the binary 2x2 case."""
    if s == S22:
        return random_ns_tuple(rng)
    return random_local_tuple(rng, s)


def _random_move(rng, s):
    party = "A" if rng.random() < 0.5 else "B"
    k = s.m if party == "A" else s.n
    alphabet = s.outputs_a if party == "A" else s.outputs_b
    kind = rng.integers(4)
    if kind == 0:
        return InputSubstitution(party, int(rng.integers(k)), int(rng.integers(k)))
    if kind == 1:
        return InputTransposition(party, int(rng.integers(k)), int(rng.integers(k)))
    if kind == 2:
        perm = rng.permutation(len(alphabet))
        return OutputRelabeling(party, int(rng.integers(k)), {a: alphabet[perm[i]] for i, a in enumerate(alphabet)})
    size = int(rng.integers(1, len(alphabet) + 1))
    sub = [alphabet[i] for i in rng.choice(len(alphabet), size, replace=False)]
    return OutputCoarseGraining(party, int(rng.integers(k)), frozenset(sub), sub[0])


@pytest.mark.parametrize("s, count", [(S22, 4096), (S32, 110592), (BellScenario(1, 1, (0,), (0,)), 1), (BellScenario(1, 1, (0, 1), (0,)), 4)])
def test_wiring_count(s, count):
    assert wiring_count(s) == count


def test_enumeration_order_and_indexing():
    ws = enumerate_wirings(S22)
    assert len(ws) == 4096 == len(set(ws))
    assert ws[0] == Wiring((0, 0), (0, 0), ((0, 0), (0, 0)), ((0, 0), (0, 0)))
    for k in (0, 1, 17, 1000, 4095):
        assert wiring_at(S22, k) == ws[k]
        assert wiring_index(S22, ws[k]) == k
    assert wiring_index(S22, identity_wiring(S22)) in range(4096)


def test_enumeration_cap():
    with pytest.raises(EnumerationCapError):
        enumerate_wirings(S32, cap=1000)


def test_image_table_matches_direct_application(rng):
    P = random_ns_tuple(rng)
    imgs = wiring_images(P)
    for k in rng.integers(4096, size=200):
        assert np.allclose(imgs[k], apply_wiring(P, wiring_at(S22, int(k))).p, atol=1e-15)
    P3 = random_local_tuple(rng, S32)
    idx, uniq = unique_wiring_images(P3)
    for k, row in zip(idx[:50], uniq[:50]):
        assert np.allclose(row, apply_wiring(P3, wiring_at(S32, int(k))).p.ravel(), atol=1e-15)


def test_identity_wiring_is_identity(rng):
    for s in (S22, S32, TERNARY):
        P = _random_tuple(rng, s)
        assert apply_wiring(P, identity_wiring(s)) == P


def test_malformed_wiring_rejected():
    with pytest.raises(ShapeError):
        apply_wiring(pr_box(), Wiring((0, 2), (0, 1), ((0, 1), (0, 1)), ((0, 1), (0, 1))))


def test_wiring_json_roundtrip():
    W = wiring_at(S22, 2345)
    d = W.to_dict(S22)
    assert set(d["F"][0]) == {"-1", "1"}
    assert Wiring.from_dict(d, S22) == W


def test_input_substitution_copies_block(rng):
    P = random_ns_tuple(rng)
    Q = apply_elementary(P, InputSubstitution("A", 0, 1))
    assert np.array_equal(Q.p[1], P.p[0]) and np.array_equal(Q.p[0], P.p[0])
    Q = apply_elementary(P, InputSubstitution("B", 1, 0))
    assert np.array_equal(Q.p[:, 0], P.p[:, 1])


def test_output_relabeling_flips_correlator():
    P = pr_box()
    Q = apply_elementary(P, OutputRelabeling("A", 1, {-1: 1, 1: -1}))
    assert np.allclose(Q.p[1], P.p[1][::-1, :])
    assert np.allclose(Q.p[0], P.p[0])


def test_coarse_graining_everything_leaves_bob_marginal(rng):
    P = random_ns_tuple(rng)
    Q = apply_elementary(P, OutputCoarseGraining("A", 0, frozenset({-1, 1}), 1))
    assert np.allclose(Q.p[0, :, 0, :], 0.0)
    assert np.allclose(Q.p[0, :, 1, :], P.p[0].sum(axis=1))


def test_elementary_move_validation():
    P = pr_box()
    with pytest.raises(ValueError):
        apply_elementary(P, InputSubstitution("A", 0, 2))
    with pytest.raises(ValueError):
        apply_elementary(P, OutputRelabeling("B", 0, {-1: -1, 1: -1}))
    with pytest.raises(ValueError):
        apply_elementary(P, OutputCoarseGraining("A", 0, frozenset({-1}), 1))
    with pytest.raises(ValueError):
        apply_elementary(P, InputTransposition("C", 0, 1))


@pytest.mark.parametrize("s", [S22, S32, TERNARY], ids=["2222", "3222", "ternary"])
def test_move_path_equals_composed_wiring(rng, s):
    for _ in range(200):
        P = _random_tuple(rng, s)
        moves = [_random_move(rng, s) for _ in range(int(rng.integers(1, 6)))]
        direct = P
        for mv in moves:
            direct = apply_elementary(direct, mv)
        W = compose_moves(s, moves)
        assert apply_wiring(P, W).distance(direct) < 1e-14


@pytest.mark.parametrize("s", [S22, TERNARY], ids=["2222", "ternary"])
def test_single_move_wiring(rng, s):
    for _ in range(200):
        P = _random_tuple(rng, s)
        mv = _random_move(rng, s)
        assert apply_wiring(P, move_as_wiring(s, mv)).distance(apply_elementary(P, mv)) < 1e-14


def test_composition_is_closed_in_enumeration(rng):
    # composite of two canonical wirings is itself canonical and acts the same
    P = random_ns_tuple(rng)
    imgs = wiring_images(P)
    for _ in range(500):
        W1, W2 = (wiring_at(S22, int(k)) for k in rng.integers(4096, size=2))
        W = W1.then(W2)
        two_step = apply_wiring(apply_wiring(P, W1), W2)
        assert np.allclose(imgs[wiring_index(S22, W)], two_step.p, atol=1e-14)


def test_wirings_preserve_validity(rng):
    for s in (S22, S32, TERNARY):
        for _ in range(1000 if s == S22 else 300):
            P = _random_tuple(rng, s)
            W = wiring_at(s, int(rng.integers(wiring_count(s))))
            rep = validate(apply_wiring(P, W), tol=1e-12)
            assert rep.ok


def test_wirings_map_local_to_local(rng):
    for _ in range(200):
        P = random_local_tuple(rng)
        W = wiring_at(S22, int(rng.integers(4096)))
        assert is_local(apply_wiring(P, W)).is_local


def test_mix_with_local():
    P, L = pr_box(), uniform_tuple(S22)
    assert mix_with_local(P, L, 1.0) == P
    assert mix_with_local(P, L, 0.0) == L
    with pytest.raises(ValueError):
        mix_with_local(P, L, 1.5)
    with pytest.raises(ValueError):
        mix_with_local(L, P, 0.5, check=True)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_order_is_reflexive(seed):
    P = random_ns_tuple(np.random.default_rng(seed))
    cert = check_order(P, P)
    assert cert.feasible and cert.residual < 1e-8
    assert cert.reconstruct(P).distance(P) < 1e-8


def test_order_is_transitive(rng):
    for _ in range(10):
        P = random_ns_tuple(rng)
        W1, W2 = (wiring_at(S22, int(k)) for k in rng.integers(4096, size=2))
        Q = mix_with_local(apply_wiring(P, W1), random_local_tuple(rng), rng.uniform(0.3, 1.0))
        R = mix_with_local(apply_wiring(Q, W2), random_local_tuple(rng), rng.uniform(0.3, 1.0))
        for a, b in ((P, Q), (Q, R), (P, R)):
            cert = check_order(a, b)
            assert cert.feasible and cert.residual < 1e-8


def test_everything_dominates_local(rng):
    for _ in range(20):
        P, L = random_ns_tuple(rng), random_local_tuple(rng)
        cert = check_order(P, L)
        assert cert.feasible and cert.reconstruct(P).distance(L) < 1e-8


def test_local_does_not_reach_pr():
    res = check_order(uniform_tuple(S22), pr_box())
    assert not res.feasible
    assert res.gap > 1e-6
    # independent check of the witness against every wired image and vertex
    from conftest import vertex_tensors

    beta = res.bell_functional
    reach = np.concatenate([wiring_images(uniform_tuple(S22)), vertex_tensors(S22)])
    assert np.max(np.einsum("kxyab,xyab->k", reach, beta)) < np.sum(beta * pr_box().p) - 1e-6


def test_theta_pair_certificate():
    P = make_theta_family(0.4, extended=True)
    Pp = make_theta_family(0.4, extended=True, primed=True)
    cert = check_order(P, Pp)
    assert cert.feasible and cert.residual < 1e-8
    assert cert.reconstruct(P).distance(Pp) < 1e-8
    d = cert.to_dict()
    assert d["kind"] == "feasible"
    assert abs(d["p0"] + sum(t["p"] for t in d["terms"]) - 1.0) < 1e-9


def test_move_paths_land_in_enumerated_images(rng):
    hits = 0
    for _ in range(500):
        P = random_ns_tuple(rng)
        Q = P
        for _ in range(int(rng.integers(1, 6))):
            Q = apply_elementary(Q, _random_move(rng, S22))
        diff = np.abs(wiring_images(P) - Q.p).reshape(4096, -1).max(axis=1)
        hits += diff.min() < 1e-12
    assert hits == 500


def test_no_signaling_preserved_tightly(rng):
    for _ in range(1000):
        P = random_ns_tuple(rng)
        W = wiring_at(S22, int(rng.integers(4096)))
        assert validate(apply_wiring(P, W)).max_signaling < 1e-10
