"""Command implementations: run experiments and write archive directories."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import tables
from .config import ConfigError, RunConfig
from .dataset import HumanMatrix, load_table, to_targets
from .interpret import CanonicalRun, ablate, canonical_run, seed_sweep
from .models import N_STATES, build_dualpath, predict_dualpath
from .stats import (
    bootstrap_ci,
    cross_validate,
    holdout_split,
    item_rmse_delta,
    kfold_split,
    paired_t_test,
    per_type_report,
)
from .svg import render_bars, render_heatmap, render_triptych
from .syllogism import RESPONSES, encode_all, enumerate_syllogisms

MODELS = ("direct", "intuition", "deliberation")
COMPARISONS = (
    ("deliberation vs intuition", "deliberation", "intuition"),
    ("deliberation vs direct", "deliberation", "direct"),
    ("intuition vs direct", "intuition", "direct"),
)
STATE_NAMES = [f"state {k + 1}" for k in range(N_STATES)]


def load_data(cfg: RunConfig) -> HumanMatrix:
    if not cfg.data:
        raise ConfigError("no data file given (use --data or [data] path)")
    if not Path(cfg.data).is_file():
        raise ConfigError(f"data file not found: {cfg.data}")
    return load_table(cfg.data)


def _prepare(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.ini").write_text(cfg.to_ini(include_paths=False), encoding="utf-8")
    return out


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


# -- cv ------------------------------------------------------------------------------

def cmd_cv(cfg: RunConfig, log=print) -> dict:
    m = load_data(cfg)
    X, human = m.features, to_targets(m)
    h = cfg.hash()
    out = _prepare(cfg)
    plan = kfold_split(len(human), cfg.k, cfg.seed)
    tcfg = cfg.train_config()
    log(f"cv: k={cfg.k}, fold sizes {plan.sizes}, epochs={cfg.epochs}")
    results = cross_validate("direct", X, human, tcfg, plan)
    results.update(cross_validate("dualpath", X, human, tcfg, plan))
    assert all(results[name].plan == plan for name in MODELS)

    boots = {name: bootstrap_ci(results[name].heldout_predictions, human,
                                cfg.resamples, cfg.seed) for name in MODELS}
    tests = {label: paired_t_test(results[a].fold_correlations, results[b].fold_correlations)
             for label, a, b in COMPARISONS}

    summary = {}
    for name in MODELS:
        res, bs = results[name], boots[name]
        fr = np.array(res.fold_correlations)
        summary[name] = {
            "aggregate_r": res.aggregate.r,
            "aggregate_rmse": res.aggregate.rmse,
            "aggregate_mae": res.aggregate.mae,
            "bootstrap_ci": [bs.lo, bs.hi],
            "fold_mean_r": float(fr.mean()),
            "fold_sd_r": float(fr.std(ddof=1)),
        }
        log(f"  {name:12s} r={res.aggregate.r:.4f} CI=[{bs.lo:.4f}, {bs.hi:.4f}] "
            f"rmse={res.aggregate.rmse:.4f} mae={res.aggregate.mae:.4f}")
    tables.write_json(out / "cv_metrics.json", {
        "fold_plan": {"k": plan.k, "seed": plan.seed, "assignments": list(plan.assignments),
                      "models": list(MODELS)},
        "models": summary,
    }, h)
    tables.write_csv(out / "fold_correlations.csv", ["fold", *MODELS],
                     [[f + 1, *(results[n].fold_correlations[f] for n in MODELS)]
                      for f in range(plan.k)], h)
    reports = {n: per_type_report(results[n].heldout_predictions, human) for n in MODELS}
    tables.write_csv(out / "per_type.csv",
                     ["response", *MODELS, "deliberation_minus_intuition", "note"],
                     [[lab, *(reports[n][lab][0] for n in MODELS),
                       reports["deliberation"][lab][0] - reports["intuition"][lab][0],
                       " ".join(reports[n][lab][1] for n in MODELS).strip()]
                      for lab in RESPONSES], h)
    tables.write_csv(out / "bootstrap.csv",
                     ["model", "estimate", "lo", "hi", "resamples", "redraws", "seed"],
                     [[n, boots[n].estimate, boots[n].lo, boots[n].hi, boots[n].resamples,
                       boots[n].redraws, cfg.seed] for n in MODELS], h)
    tables.write_ttests(out / "ttests.csv", tests, h)
    for label, t in tests.items():
        log(f"  {label}: t={t.t:.4f} p={t.p:.4f} df={t.df}")
    deltas = item_rmse_delta(results["intuition"].heldout_predictions,
                             results["deliberation"].heldout_predictions, human, m.codes)
    tables.write_csv(out / "item_deltas.csv",
                     ["code", "rmse_intuition", "rmse_deliberation", "delta"],
                     [[d.code, d.rmse_a, d.rmse_b, d.delta] for d in deltas], h)
    tables.write_matrix(out / "human.csv", m.codes, human, h)
    for n in MODELS:
        tables.write_matrix(out / f"heldout_{n}.csv", m.codes, results[n].heldout_predictions, h)
    render_archive(out)
    tables.write_manifest(out, h, "cv")
    return {"results": results, "bootstrap": boots, "ttests": tests, "plan": plan}


# -- canonical -----------------------------------------------------------------------

def _write_checkpoint(path: Path, run: CanonicalRun, cfg: RunConfig, codes, h: str) -> None:
    doc = {
        "format": "dualsyll-checkpoint/1",
        "family": "dualpath",
        "seed": run.seed,
        "train_config": {"lr": cfg.lr, "epochs": cfg.epochs,
                         "loss_weights": list(cfg.loss_weights)},
        "split": {"train": [codes[i] for i in run.train_idx],
                  "test": [codes[i] for i in run.test_idx]},
        "parameters": run.model.to_dict(),
    }
    tables.write_json(path, doc, h)


def load_checkpoint(path):
    doc = tables.read_json(path)
    if doc.get("format") != "dualsyll-checkpoint/1":
        raise ValueError(f"{path}: unrecognised checkpoint format")
    model = build_dualpath(doc["seed"])
    model.load_dict(doc["parameters"])
    return model, doc


def cmd_canonical(cfg: RunConfig, log=print) -> CanonicalRun:
    m = load_data(cfg)
    X, human = m.features, to_targets(m)
    h = cfg.hash()
    out = _prepare(cfg)
    run = canonical_run(X, human, m.codes, cfg.train_config(), cfg.test_fraction)
    codes = list(m.codes)
    test_codes = [codes[i] for i in run.test_idx]
    log(f"canonical: {len(run.train_idx)} train / {len(run.test_idx)} test")
    log(f"  intuition    r={run.intuition.r:.4f} rmse={run.intuition.rmse:.4f}")
    log(f"  deliberation r={run.deliberation.r:.4f} rmse={run.deliberation.rmse:.4f}")

    tables.write_json(out / "split.json", {
        "seed": run.seed,
        "train": [codes[i] for i in run.train_idx],
        "test": test_codes,
    }, h)
    tables.write_json(out / "metrics.json", {
        name: {"r": mt.r, "rmse": mt.rmse, "mae": mt.mae}
        for name, mt in (("intuition", run.intuition), ("deliberation", run.deliberation))
    }, h)
    tables.write_matrix(out / "human_test.csv", test_codes, human[run.test_idx], h)
    tables.write_matrix(out / "predictions_intuition.csv", test_codes, run.intuition_pred, h)
    tables.write_matrix(out / "predictions_deliberation.csv", test_codes,
                        run.deliberation_pred, h)
    tables.write_csv(out / "gate_winners.csv", ["state", "train_winners", "test_winners"],
                     [[STATE_NAMES[k], run.gate.train_counts[k], run.gate.test_counts[k]]
                      for k in range(N_STATES)], h)
    tables.write_csv(out / "item_winners.csv", ["code", "partition", "winner"],
                     [[c, "test" if i in set(run.test_idx.tolist()) else "train",
                       STATE_NAMES[run.gate.winners[c]]] for i, c in enumerate(codes)], h)
    probe_rows = []
    for part, probes in (("train", run.probes), ("test", run.test_probes)):
        probe_rows += [[STATE_NAMES[p.state], part, *p.mean] for p in probes]
    tables.write_csv(out / "state_probes.csv", ["state", "partition", *RESPONSES], probe_rows, h)
    tables.write_ablation(out / "ablation.csv", run.ablation, h)
    tables.write_csv(out / "roles.csv", ["state", "roles"],
                     [[STATE_NAMES[k], "; ".join(run.roles[k]) or "-"]
                      for k in range(N_STATES)], h)
    _, trace = predict_dualpath(run.model, X[run.test_idx])
    tables.write_matrix(out / "gate_weights.csv", test_codes, trace.g, h, columns=STATE_NAMES)
    act_cols = [f"d{j + 1}" for j in range(4)] + [
        f"s{k + 1}_{j + 1}" for k in range(N_STATES) for j in range(4)]
    acts = np.concatenate([trace.d, trace.s.reshape(len(trace.d), -1)], axis=1)
    tables.write_matrix(out / "delib_states.csv", test_codes, acts, h, columns=act_cols)
    tables.write_csv(out / "loss_curves.csv", ["epoch", "intuition", "deliberation", "total"],
                     [[e + 1, run.curves["intuition"][e], run.curves["deliberation"][e],
                       run.curves["total"][e]] for e in range(len(run.curves["total"]))], h)
    _write_checkpoint(out / "checkpoint.json", run, cfg, codes, h)
    for row in run.ablation:
        log(f"  {row.label:15s} r={row.r:.4f} drop={row.drop:.4f} rmse={row.rmse:.4f}")
    render_archive(out)
    tables.write_manifest(out, h, "canonical")
    return run


def cmd_ablate(cfg: RunConfig, log=print):
    """Ablation table for the canonical model; reuses a matching checkpoint."""
    m = load_data(cfg)
    X, human = m.features, to_targets(m)
    h = cfg.hash()
    out = _prepare(cfg)
    ckpt = out / "checkpoint.json"
    model = None
    if ckpt.is_file():
        model, doc = load_checkpoint(ckpt)
        if doc.get("config_hash") != h:
            model = None
    if model is None:
        model = canonical_run(X, human, m.codes, cfg.train_config(), cfg.test_fraction).model
    _, test_idx = holdout_split(len(X), cfg.test_fraction, cfg.seed)
    rows = ablate(model, X[test_idx], human[test_idx])
    tables.write_ablation(out / "ablation.csv", rows, h)
    for row in rows:
        log(f"  {row.label:15s} r={row.r:.4f} drop={row.drop:.4f} rmse={row.rmse:.4f}")
    tables.write_manifest(out, h, "ablate")
    return rows


def cmd_sweep(cfg: RunConfig, log=print):
    m = load_data(cfg)
    X, human = m.features, to_targets(m)
    h = cfg.hash()
    out = _prepare(cfg)
    rows = seed_sweep(cfg.seeds, X, human, m.codes, cfg.train_config(), cfg.test_fraction)
    tables.write_sweep(out / "sweep.csv", rows, h)
    for r in rows:
        if r.ok:
            log(f"  seed {r.seed}: intuition r={r.intuition_r:.4f} deliberation "
                f"r={r.deliberation_r:.4f} gain={r.gain:+.4f} "
                f"dominant={tables.state_label(r.dominant_state)} "
                f"dead={tables.states_label(r.dead_states)}")
        else:
            log(f"  seed {r.seed}: FAILED {r.error}")
    tables.write_manifest(out, h, "sweep")
    return rows


def cmd_encode(cfg: RunConfig, log=print) -> np.ndarray:
    if cfg.data:
        m = load_data(cfg)
        items, codes = list(m.syllogisms), list(m.codes)
    else:
        items = enumerate_syllogisms()
        codes = [s.code for s in items]
    X = encode_all(items)
    h = cfg.hash()
    out = _prepare(cfg)
    tables.write_matrix(out / "encoding.csv", codes, X, h,
                        columns=[f"f{j + 1}" for j in range(X.shape[1])])
    log(f"encode: wrote {X.shape[0]} x {X.shape[1]} feature matrix")
    tables.write_manifest(out, h, "encode")
    return X


# -- figures ---------------------------------------------------------------------------

def render_archive(out) -> list[str]:
    """(Re)render every figure whose source tables exist in ``out``."""
    out = Path(out)
    written = []

    def emit(name, text):
        _write(out / name, text)
        written.append(name)

    if (out / "human.csv").is_file():
        codes, human, cols = tables.read_matrix(out / "human.csv")
        for n in MODELS:
            src = out / f"heldout_{n}.csv"
            if src.is_file():
                _, pred, _ = tables.read_matrix(src)
                emit(f"cv_{n}_triptych.svg", render_triptych(human, pred, codes, cols))
    if (out / "human_test.csv").is_file():
        codes, human, cols = tables.read_matrix(out / "human_test.csv")
        emit("canonical_human.svg", render_heatmap(human, codes, cols, "absolute", "human"))
        for n in ("intuition", "deliberation"):
            src = out / f"predictions_{n}.csv"
            if not src.is_file():
                continue
            _, pred, _ = tables.read_matrix(src)
            emit(f"canonical_{n}_human.svg",
                 render_heatmap(human, codes, cols, "absolute", "human"))
            emit(f"canonical_{n}_pred.svg",
                 render_heatmap(pred, codes, cols, "absolute", f"{n} prediction"))
            emit(f"canonical_{n}_diff.svg",
                 render_heatmap(pred - human, codes, cols, "diverging", f"{n} - human"))
            emit(f"canonical_{n}_triptych.svg", render_triptych(human, pred, codes, cols))
    for name, title in (("gate_weights", "held-out gate weights"),
                        ("delib_states", "held-out deliberation activations")):
        if (out / f"{name}.csv").is_file():
            codes, mat, cols = tables.read_matrix(out / f"{name}.csv")
            scale = max(1.0, float(np.max(mat))) if name == "delib_states" else 1.0
            emit(f"{name}.svg", render_heatmap(mat / scale, codes, cols, "absolute", title))
    if (out / "metrics.json").is_file():
        metrics = tables.read_json(out / "metrics.json")
        groups = {"correlation": {}, "RMSE": {}}
        for n in ("intuition", "deliberation"):
            groups["correlation"][n] = metrics[n]["r"]
            groups["RMSE"][n] = metrics[n]["rmse"]
        emit("performance.svg", render_bars(groups, "canonical split: held-out performance"))
    if (out / "cv_metrics.json").is_file():
        metrics = tables.read_json(out / "cv_metrics.json")["models"]
        groups = {"aggregate r": {n: v["aggregate_r"] for n, v in metrics.items()},
                  "RMSE": {n: v["aggregate_rmse"] for n, v in metrics.items()}}
        emit("cv_performance.svg", render_bars(groups, "cross-validation"))
    return written


def cmd_report(cfg: RunConfig, log=print) -> list[str]:
    out = Path(cfg.out)
    if not out.is_dir():
        raise ConfigError(f"archive directory not found: {out}")
    written = render_archive(out)
    log(f"report: rendered {len(written)} figure(s) in {out}")
    manifest = out / tables.MANIFEST
    if manifest.is_file():
        doc = json.loads(manifest.read_text(encoding="utf-8"))
        tables.write_manifest(out, doc.get("config_hash", ""), doc.get("command", "report"))
    return written
