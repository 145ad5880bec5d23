import copy

import numpy as np
import pytest

from dualsyll.interpret import (
    OAC,
    AblationRow,
    GateSummary,
    ablate,
    canonical_run,
    classify_roles,
    gate_summary,
    oac_leaning_state,
    seed_sweep,
    state_probe,
    strongest_ablation_state,
)
from dualsyll.models import (
    N_STATES,
    TrainConfig,
    build_dualpath,
    predict_dualpath,
    predict_with_gate_override,
)
from dualsyll.syllogism import canonical_codes, encode_all

X = encode_all()
CODES = canonical_codes()


def forced_gate(state: int, seed: int = 3, margin: float = 40.0):
    """A model whose gate always picks ``state`` by a wide margin."""
    m = build_dualpath(seed)
    m.gate.weights[:] = 0.0
    m.gate.biases[:] = 0.0
    m.gate.biases[state] = margin
    return m


def symmetric_heads(seed: int = 4):
    """Identical candidate heads, a uniform gate and identical output blocks."""
    m = build_dualpath(seed)
    for h in m.candidate_heads[1:]:
        h.weights[:] = m.candidate_heads[0].weights
        h.biases[:] = m.candidate_heads[0].biases
    m.gate.weights[:] = 0.0
    m.gate.biases[:] = 0.0
    block = m.delib_out.weights[:, :4].copy()
    for k in range(1, N_STATES):
        m.delib_out.weights[:, 4 * k: 4 * k + 4] = block
    return m


def test_forced_gate_summary():
    m = forced_gate(2)
    train, test = np.arange(51), np.arange(51, 64)
    gs = gate_summary(m, X, train, test, CODES)
    assert gs.train_counts == [0, 0, 51, 0, 0]
    assert gs.test_counts == [0, 0, 13, 0, 0]
    assert gs.dominant_test_state == 2
    assert gs.dead_states == [0, 1, 3, 4]
    assert set(gs.winners.values()) == {2} and len(gs.winners) == 64


def test_gate_summary_tie_break_is_lowest_index():
    gs = GateSummary([3, 3, 0, 0, 0], [2, 2, 0, 0, 1], {})
    assert gs.dominant_test_state == 0
    assert gs.dead_states == [2, 3]


def test_symmetric_heads_give_equal_probes_and_no_ablation_effect():
    m = symmetric_heads()
    probes = [state_probe(m, X, k) for k in range(N_STATES)]
    for p in probes[1:]:
        np.testing.assert_allclose(p.mean, probes[0].mean, atol=1e-12)
    assert oac_leaning_state(probes) == 0
    rows = ablate(m, X, predict_dualpath(m, X)[1].dist * 0.5 + 1 / 18)
    for r in rows[1:]:
        assert r.drop == pytest.approx(0.0, abs=1e-12)


def test_probe_rows_are_distributions():
    m = build_dualpath(8)
    for k in range(N_STATES):
        p = state_probe(m, X, k)
        np.testing.assert_allclose(p.per_item.sum(axis=1), 1.0, atol=1e-12)
        assert p.mean.shape == (9,) and p.mean.sum() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        state_probe(m, X, 5)


def test_probe_forces_single_state():
    m = build_dualpath(9)
    p = state_probe(m, X[:7], 3).per_item
    by_hand = m.forward_deliberation(X[:7], keep=np.eye(N_STATES)[3])["p"]
    np.testing.assert_array_equal(p, by_hand)


def test_ablation_baseline_is_plain_prediction():
    m = build_dualpath(5)
    rng = np.random.default_rng(0)
    human = rng.dirichlet(np.ones(9), size=13)
    rows = ablate(m, X[:13], human)
    assert len(rows) == 6 and rows[0].removed is None and rows[0].label == "none"
    assert [r.label for r in rows[1:]] == [f"remove state {k}" for k in range(1, 6)]
    np.testing.assert_array_equal(predict_with_gate_override(m, X[:13], range(5)),
                                  predict_dualpath(m, X[:13])[1].dist)


def test_ablating_an_unused_state_is_harmless_and_the_used_one_is_not():
    m = forced_gate(1)
    human = predict_dualpath(m, X)[1].dist  # model is exact on its own output
    rows = ablate(m, X, human)
    assert rows[0].r == pytest.approx(1.0)
    for r in rows[1:]:
        if r.removed != 1:
            assert abs(r.drop) < 1e-9
    assert strongest_ablation_state(rows) == 1
    assert rows[2].rmse_increase > 0


def test_oac_leaning_probe():
    m = build_dualpath(6)
    probes = [state_probe(m, X, k) for k in range(N_STATES)]
    probes[4].mean[:] = 0.0
    probes[4].mean[OAC] = 1.0
    assert oac_leaning_state(probes) == 4


def test_classify_roles():
    gate = GateSummary([10, 0, 41, 0, 0], [3, 0, 10, 0, 0], {})
    m = build_dualpath(6)
    probes = [state_probe(m, X, k) for k in range(N_STATES)]
    probes[3].mean[:] = 0.0
    probes[3].mean[OAC] = 1.0
    ablation = [AblationRow(None, 0.8, 0.0, 0.1, 0.0)] + [
        AblationRow(k, 0.8 - d, d, 0.1, 0.0)
        for k, d in enumerate([0.005, 0.0, 0.2, 0.03, -0.009])
    ]
    roles = classify_roles(gate, probes, ablation)
    assert roles[2] == ["dominant", "load-bearing"]
    assert roles[1] == ["dead", "dispensable"]
    assert roles[3] == ["dead", "Oac-leaning"]
    assert roles[0] == ["dispensable"]
    assert roles[4] == ["dead", "dispensable"]


def test_canonical_run_and_sweep(synthetic_pct):
    human = synthetic_pct / synthetic_pct.sum(1, keepdims=True)
    cfg = TrainConfig(epochs=40, seed=2)
    run = canonical_run(X, human, CODES, cfg)
    assert len(run.train_idx) == 51 and len(run.test_idx) == 13
    assert sum(run.gate.test_counts) == 13 and sum(run.gate.train_counts) == 51
    assert len(run.ablation) == 6
    rows = seed_sweep([2, 3], X, human, CODES, cfg)
    again = seed_sweep([2, 3], X, human, CODES, cfg)
    assert rows == again
    assert rows[0].deliberation_r == run.deliberation.r
    assert rows[0].gain == pytest.approx(run.deliberation.r - run.intuition.r)
    assert rows[0].seed == 2 and rows[1].seed == 3 and all(r.ok for r in rows)


def test_sweep_flags_failed_seed(synthetic_pct):
    human = synthetic_pct / synthetic_pct.sum(1, keepdims=True)
    bad = copy.deepcopy(human)
    bad[:] = 1 / 9  # constant targets make test correlation undefined
    rows = seed_sweep([1], X, bad, CODES, TrainConfig(epochs=5))
    assert not rows[0].ok and rows[0].dominant_state == -1
    assert np.isnan(rows[0].gain)
    with pytest.raises(ValueError):
        seed_sweep([], X, human, CODES)
