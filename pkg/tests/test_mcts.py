import math

import numpy as np
import pytest

from partrot.circuit import CNOT_MATRIX, circuit_to_matrix
from partrot.fit import aligned_error
from partrot.mcts import (
    SynthCache,
    SynthConfig,
    SynthResult,
    check_visit_counts,
    fingerprint,
    legal_actions,
    random_completion,
    reward,
    rollout,
    synthesize,
    synthesize_cached,
    uct_score,
)
from partrot.numerics import embed, expm_i_hermitian
from partrot.pauli import PauliTerm, to_matrix


def heis2(dt):
    h = to_matrix([PauliTerm(1, "XX"), PauliTerm(1, "YY"), PauliTerm(1, "ZZ")], [0, 1])
    return expm_i_hermitian(h, dt)


def test_uct_examples():
    assert uct_score(-6, 1, 2, 0.5) == pytest.approx(-5.5838, abs=1e-4)
    assert uct_score(-6, 3, 10, 0.0) == pytest.approx(-2.0)
    assert uct_score(-4, 2, 10, 0.5) > uct_score(-8, 4, 10, 0.5)
    assert uct_score(0, 0, 5, 0.5) == math.inf


def test_reward_examples():
    assert reward(1e-9, 6, 1e-8) == -6
    assert reward(0.3, 6, 1e-8) == -0.3
    assert reward(0.0, 0, 1e-8) == 0
    # winners always beat non-winners with bounded error, fewer CNOTs win
    assert reward(1e-9, 3, 1e-8) > reward(1e-9, 4, 1e-8)


def test_actions_skip_immediate_repeat(rng):
    assert (0, 1) not in legal_actions(3, ((0, 1),))
    assert len(legal_actions(3, ())) == 6
    seq = random_completion(3, ((0, 1),), 12, rng)
    assert len(seq) == 12 and all(a != b for a, b in zip(seq, seq[1:]))


def test_identity_needs_no_cnots():
    r = synthesize(np.eye(8), SynthConfig(iterations=4))
    assert r.converged and r.cnot_count == 0 and r.iterations_used == 0


def test_embedded_cnot_one_cnot():
    target = embed(CNOT_MATRIX, [0, 1], 3)
    r = synthesize(target, SynthConfig(iterations=48, seed=3))
    assert r.converged and r.cnot_count == 1
    err, _ = aligned_error(circuit_to_matrix(r.circuit), target)
    assert err < 1e-8


def test_two_qubit_heisenberg_within_three_cnots():
    target = heis2(0.1)
    r = synthesize(target, SynthConfig(iterations=24, seed=1))
    assert r.converged and r.cnot_count <= 3
    # accepted results are re-verified outside the optimizer
    err, _ = aligned_error(circuit_to_matrix(r.circuit), target)
    assert err < 1e-8
    assert check_visit_counts(r.tree)
    assert r.tree.N_visits == r.iterations_used


def test_visit_counts_full_budget():
    rng = np.random.default_rng(7)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    target, _ = np.linalg.qr(a)
    cfg = SynthConfig(iterations=12, seed=2, gn_restarts=3, early_stop_cnots=0, epsilon=1e-30)
    r = synthesize(target, cfg)
    assert r.iterations_used == 12 and r.tree.N_visits == 12
    assert check_visit_counts(r.tree)
    assert not r.converged


def test_deterministic_for_seed():
    target = heis2(0.23)
    cfg = SynthConfig(iterations=8, seed=5)
    a, b = synthesize(target, cfg), synthesize(target, cfg)
    assert a == b


def test_rejects_non_unitary():
    with pytest.raises(ValueError):
        synthesize(np.ones((4, 4)), SynthConfig())


def test_rollout_respects_budget(rng):
    with pytest.raises(ValueError):
        rollout(((0, 1),) * 4, heis2(0.1), SynthConfig(), rng)
    c, err = rollout(((0, 1), (1, 0), (0, 1)), heis2(0.1), SynthConfig(), rng)
    assert err < 1e-8 and c.cnot_count <= 3


def test_fingerprint_phase_and_dt():
    u = heis2(0.1)
    assert fingerprint(u) == fingerprint(np.exp(0.77j) * u)
    assert fingerprint(u) != fingerprint(heis2(0.2))


def test_cache_hit_and_phase(tmp_path):
    cache = SynthCache(tmp_path / "c.pkl")
    cfg = SynthConfig(iterations=16, seed=0)
    u = heis2(0.1)
    r1 = synthesize_cached(u, cfg, cache)
    assert cache.misses == 1 and cache.hits == 0
    r2 = synthesize_cached(u, cfg, cache)
    assert cache.hits == 1 and r2.cnot_count == r1.cnot_count
    rotated = np.exp(1.3j) * u
    r3 = synthesize_cached(rotated, cfg, cache)
    assert cache.hits == 2
    # exact phase survives the cache: the circuit matches the rotated target itself
    assert np.linalg.norm(circuit_to_matrix(r3.circuit) - rotated) < 1e-7
    cache.save()
    again = SynthCache(tmp_path / "c.pkl")
    assert len(again) == 1 and again.lookup(u) is not None


def test_cache_store_idempotent():
    cache = SynthCache()
    r = synthesize(np.eye(2), SynthConfig())
    cache.store(np.eye(2), r)
    cache.store(np.eye(2), SynthResult(r.circuit, 1.0, 5, 0, False))
    assert len(cache) == 1 and cache.lookup(np.eye(2)).converged


def test_config_validation():
    with pytest.raises(ValueError):
        SynthConfig(epsilon=0)
    with pytest.raises(ValueError):
        SynthConfig(gn_restarts=0)
    assert SynthConfig().budget(3) == 19 and SynthConfig().budget(1) == 0
    with pytest.raises(ValueError):
        SynthConfig().budget(5)
