"""Gate-winner summaries, per-state probes, inference-time ablation, seed sweeps."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .models import (
    N_STATES,
    DualPathModel,
    TrainConfig,
    predict_dualpath,
    predict_with_gate_override,
    train_dualpath,
)
from .stats import Metrics, aggregate_metrics, holdout_split
from .syllogism import RESPONSES

OAC = RESPONSES.index("Oac")
DISPENSABLE_DROP = 0.01
LOAD_BEARING_DROP = 0.05


def _argmax_first(values) -> int:
    values = list(values)
    return values.index(max(values))


@dataclass
class GateSummary:
    train_counts: list[int]
    test_counts: list[int]
    winners: dict[str, int]  # code -> 0-based state

    @property
    def dominant_test_state(self) -> int:
        return _argmax_first(self.test_counts)

    @property
    def dead_states(self) -> list[int]:
        return [k for k in range(N_STATES)
                if self.train_counts[k] == 0 and self.test_counts[k] == 0]


def gate_summary(model: DualPathModel, X, train_idx, test_idx, codes) -> GateSummary:
    _, trace = predict_dualpath(model, np.asarray(X, dtype=float))
    winners = trace.winner
    train_counts = np.bincount(winners[np.asarray(train_idx, dtype=int)], minlength=N_STATES)
    test_counts = np.bincount(winners[np.asarray(test_idx, dtype=int)], minlength=N_STATES)
    return GateSummary(
        [int(c) for c in train_counts],
        [int(c) for c in test_counts],
        {codes[i]: int(w) for i, w in enumerate(winners)},
    )


@dataclass
class StateProbe:
    state: int
    mean: np.ndarray
    per_item: np.ndarray = field(repr=False)


def state_probe(model: DualPathModel, X, k: int) -> StateProbe:
    """Average deliberation output with the gate forced onto state ``k`` alone."""
    if not 0 <= k < N_STATES:
        raise ValueError(f"state index must lie in 0..{N_STATES - 1}")
    dists = predict_with_gate_override(model, np.atleast_2d(np.asarray(X, dtype=float)), [k])
    return StateProbe(k, dists.mean(axis=0), dists)


def oac_leaning_state(probes: list[StateProbe]) -> int:
    return _argmax_first(p.mean[OAC] for p in probes)


@dataclass(frozen=True)
class AblationRow:
    removed: int | None
    r: float
    drop: float
    rmse: float
    rmse_increase: float

    @property
    def label(self) -> str:
        return "none" if self.removed is None else f"remove state {self.removed + 1}"


def ablate(model: DualPathModel, X_test, human_test) -> list[AblationRow]:
    """Baseline row plus one row per removed state; no retraining."""
    X_test = np.asarray(X_test, dtype=float)
    base_pred = predict_dualpath(model, X_test)[1].dist
    base = aggregate_metrics(base_pred, human_test)
    rows = [AblationRow(None, base.r, 0.0, base.rmse, 0.0)]
    for k in range(N_STATES):
        keep = [j for j in range(N_STATES) if j != k]
        m = aggregate_metrics(predict_with_gate_override(model, X_test, keep), human_test)
        rows.append(AblationRow(k, m.r, base.r - m.r, m.rmse, m.rmse - base.rmse))
    return rows


def strongest_ablation_state(rows: list[AblationRow]) -> int:
    removed = [r for r in rows if r.removed is not None]
    return removed[_argmax_first(r.drop for r in removed)].removed


def classify_roles(gate: GateSummary, probes: list[StateProbe],
                   ablation: list[AblationRow]) -> dict[int, list[str]]:
    """Role labels per state; one state may carry several labels."""
    roles: dict[int, list[str]] = {k: [] for k in range(N_STATES)}
    roles[gate.dominant_test_state].append("dominant")
    for k in gate.dead_states:
        roles[k].append("dead")
    roles[oac_leaning_state(probes)].append("Oac-leaning")
    for row in ablation:
        if row.removed is None:
            continue
        if abs(row.drop) < DISPENSABLE_DROP:
            roles[row.removed].append("dispensable")
        elif row.drop >= LOAD_BEARING_DROP:
            roles[row.removed].append("load-bearing")
    return roles


@dataclass
class CanonicalRun:
    seed: int
    train_idx: np.ndarray
    test_idx: np.ndarray
    model: DualPathModel
    curves: dict
    intuition: Metrics
    deliberation: Metrics
    intuition_pred: np.ndarray
    deliberation_pred: np.ndarray
    gate: GateSummary
    probes: list[StateProbe]
    test_probes: list[StateProbe]
    ablation: list[AblationRow]
    roles: dict[int, list[str]]


def canonical_run(X, human, codes, cfg: TrainConfig, test_fraction: float = 0.2) -> CanonicalRun:
    """Seeded 80:20 split, dual-path training, and the full interpretability suite.

    ``cfg.seed`` drives both the split membership and the initialization.
    Probes used for role labels are averaged over the training partition.
    """
    X = np.asarray(X, dtype=float)
    human = np.asarray(human, dtype=float)
    train_idx, test_idx = holdout_split(len(X), test_fraction, cfg.seed)
    model, curves = train_dualpath(X, human, cfg, train_idx=train_idx)
    p_int, trace = predict_dualpath(model, X[test_idx])
    gate = gate_summary(model, X, train_idx, test_idx, codes)
    probes = [state_probe(model, X[train_idx], k) for k in range(N_STATES)]
    test_probes = [state_probe(model, X[test_idx], k) for k in range(N_STATES)]
    ablation = ablate(model, X[test_idx], human[test_idx])
    return CanonicalRun(
        seed=cfg.seed,
        train_idx=train_idx,
        test_idx=test_idx,
        model=model,
        curves=curves,
        intuition=aggregate_metrics(p_int, human[test_idx]),
        deliberation=aggregate_metrics(trace.dist, human[test_idx]),
        intuition_pred=p_int,
        deliberation_pred=trace.dist,
        gate=gate,
        probes=probes,
        test_probes=test_probes,
        ablation=ablation,
        roles=classify_roles(gate, probes, ablation),
    )


@dataclass(frozen=True)
class SweepRow:
    seed: int
    intuition_r: float
    deliberation_r: float
    gain: float
    dominant_state: int
    dead_states: tuple[int, ...]
    oac_state: int
    strongest_ablation: int
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


def sweep_row(run: CanonicalRun) -> SweepRow:
    return SweepRow(
        seed=run.seed,
        intuition_r=run.intuition.r,
        deliberation_r=run.deliberation.r,
        gain=run.deliberation.r - run.intuition.r,
        dominant_state=run.gate.dominant_test_state,
        dead_states=tuple(run.gate.dead_states),
        oac_state=oac_leaning_state(run.probes),
        strongest_ablation=strongest_ablation_state(run.ablation),
    )


def seed_sweep(seeds, X, human, codes, cfg: TrainConfig = TrainConfig(),
               test_fraction: float = 0.2) -> list[SweepRow]:
    """One fresh split + initialization + training per seed; failures are flagged."""
    seeds = list(seeds)
    if not seeds:
        raise ValueError("at least one seed is required")
    rows = []
    for seed in seeds:
        try:
            run = canonical_run(X, human, codes, replace(cfg, seed=int(seed)), test_fraction)
            rows.append(sweep_row(run))
        except Exception as exc:  # noqa: BLE001 - a failed seed must not end the sweep
            nan = float("nan")
            rows.append(SweepRow(int(seed), nan, nan, nan, -1, (), -1, -1,
                                 error=f"{type(exc).__name__}: {exc}"))
    return rows
