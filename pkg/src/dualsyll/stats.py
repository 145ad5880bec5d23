"""Evaluation statistics: correlations, errors, folds, bootstrap, paired t-tests."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .models import TrainConfig, predict_direct, train_direct, train_dualpath
from .nnkit import RngStream, mix_seed
from .syllogism import RESPONSES


class UndefinedCorrelationError(ValueError):
    """Pearson r requested for a constant input."""


class DegenerateTestError(ValueError):
    """Paired differences have zero variance."""


# -- metrics ------------------------------------------------------------------

def pearson(a, b) -> float:
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape or a.size < 2:
        raise ValueError("pearson needs two equal-length inputs of length >= 2")
    # exact test: the mean of a constant float vector is not always exact
    if np.all(a == a[0]) or np.all(b == b[0]):
        raise UndefinedCorrelationError("correlation undefined for a constant input")
    da = a - a.mean()
    db = b - b.mean()
    saa = float(np.dot(da, da))
    sbb = float(np.dot(db, db))
    r = float(np.dot(da, db)) / math.sqrt(saa * sbb)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class Metrics:
    r: float
    rmse: float
    mae: float


def _check_pair(pred, human):
    pred = np.asarray(pred, dtype=float)
    human = np.asarray(human, dtype=float)
    if pred.shape != human.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {human.shape}")
    return pred, human


def aggregate_metrics(pred, human) -> Metrics:
    pred, human = _check_pair(pred, human)
    err = pred - human
    return Metrics(
        r=pearson(pred, human),
        rmse=float(np.sqrt(np.mean(err**2))),
        mae=float(np.mean(np.abs(err))),
    )


def per_type_correlations(pred, human) -> dict[str, float]:
    """Column-wise Pearson r over items; constant columns map to ``nan``.

    :func:`per_type_report` carries the per-column error messages.
    """
    return {k: v for k, (v, _) in per_type_report(pred, human).items()}


def per_type_report(pred, human) -> dict[str, tuple[float, str]]:
    pred, human = _check_pair(pred, human)
    out = {}
    for j, label in enumerate(RESPONSES):
        try:
            out[label] = (pearson(pred[:, j], human[:, j]), "")
        except UndefinedCorrelationError as exc:
            out[label] = (float("nan"), f"{label}: {exc}")
    return out


@dataclass(frozen=True)
class ItemDelta:
    code: str
    rmse_a: float
    rmse_b: float
    delta: float


def item_rmse_delta(pred_a, pred_b, human, codes) -> list[ItemDelta]:
    """Per-item RMSE(A) - RMSE(B), sorted by delta descending (ties by row order)."""
    pred_a, human = _check_pair(pred_a, human)
    pred_b, _ = _check_pair(pred_b, human)
    if len(codes) != len(human):
        raise ValueError("one code per row required")
    ra = np.sqrt(np.mean((pred_a - human) ** 2, axis=1))
    rb = np.sqrt(np.mean((pred_b - human) ** 2, axis=1))
    rows = [ItemDelta(c, float(a), float(b), float(a - b)) for c, a, b in zip(codes, ra, rb)]
    order = sorted(range(len(rows)), key=lambda i: (-rows[i].delta, i))
    return [rows[i] for i in order]


# -- folds and cross-validation --------------------------------------------------

@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    assignments: tuple[int, ...]

    def test_indices(self, fold: int) -> np.ndarray:
        return np.array([i for i, f in enumerate(self.assignments) if f == fold], dtype=int)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.array([i for i, f in enumerate(self.assignments) if f != fold], dtype=int)

    @property
    def sizes(self) -> list[int]:
        return [self.assignments.count(f) for f in range(self.k)]


def kfold_split(n: int = 64, k: int = 5, seed: int = 1) -> FoldPlan:
    """Seeded shuffle, then contiguous chunks; earlier folds take the remainder."""
    if not 2 <= k <= n:
        raise ValueError(f"k must satisfy 2 <= k <= n (got k={k}, n={n})")
    perm = RngStream(mix_seed(seed, "kfold")).permutation(n)
    base, extra = divmod(n, k)
    assignments = [0] * n
    start = 0
    for fold in range(k):
        size = base + (1 if fold < extra else 0)
        for i in perm[start:start + size]:
            assignments[int(i)] = fold
        start += size
    return FoldPlan(k, seed, tuple(assignments))


def holdout_split(n: int = 64, test_fraction: float = 0.2, seed: int = 1):
    """Seeded 80:20-style split: (train indices, test indices), each sorted."""
    n_test = int(round(n * test_fraction))
    if not 0 < n_test < n:
        raise ValueError("split leaves an empty partition")
    perm = RngStream(mix_seed(seed, "holdout")).permutation(n)
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


@dataclass
class CVResult:
    name: str
    plan: FoldPlan
    heldout_predictions: np.ndarray
    fold_correlations: list[float]
    aggregate: Metrics
    per_type: dict[str, float]
    fold_models: list = field(default_factory=list, repr=False)


FAMILIES = ("direct", "dualpath", "oracle")


def _assemble(name, plan, human, fold_preds, models):
    pred = np.full_like(human, np.nan)
    fold_r = []
    for fold, p in enumerate(fold_preds):
        idx = plan.test_indices(fold)
        pred[idx] = p
        try:
            fold_r.append(pearson(p, human[idx]))
        except UndefinedCorrelationError as exc:
            raise UndefinedCorrelationError(f"{name}, fold {fold + 1}: {exc}") from None
    return CVResult(name, plan, pred, fold_r, aggregate_metrics(pred, human),
                    per_type_correlations(pred, human), models)


def fold_config(cfg: TrainConfig, fold: int) -> TrainConfig:
    """Each fold trains from its own documented seed substream."""
    return TrainConfig(lr=cfg.lr, epochs=cfg.epochs, loss_weights=cfg.loss_weights,
                       seed=mix_seed(cfg.seed, "fold", fold))


def cross_validate(family: str, X, human, cfg: TrainConfig, plan: FoldPlan) -> dict[str, CVResult]:
    """Train on each fold's complement and predict its held-out rows.

    ``dualpath`` yields two results (``intuition`` and ``deliberation``) from
    the same fold models; ``oracle`` returns the targets themselves.
    """
    X = np.asarray(X, dtype=float)
    human = np.asarray(human, dtype=float)
    if len(plan.assignments) != len(human):
        raise ValueError("fold plan does not cover the data")
    if family not in FAMILIES:
        raise ValueError(f"unknown model family {family!r}; choose from {FAMILIES}")

    preds: dict[str, list] = {}
    models = []
    for fold in range(plan.k):
        tr, te = plan.train_indices(fold), plan.test_indices(fold)
        fcfg = fold_config(cfg, fold)
        try:
            if family == "oracle":
                preds.setdefault("oracle", []).append(human[te].copy())
            elif family == "direct":
                model, _ = train_direct(X, human, fcfg, train_idx=tr)
                models.append(model)
                preds.setdefault("direct", []).append(predict_direct(model, X[te]))
            else:
                model, _ = train_dualpath(X, human, fcfg, train_idx=tr)
                models.append(model)
                preds.setdefault("intuition", []).append(model.forward_intuition(X[te])["p"])
                preds.setdefault("deliberation", []).append(model.forward_deliberation(X[te])["p"])
        except Exception as exc:
            raise RuntimeError(f"{family}: fold {fold + 1} failed: {exc}") from exc
    return {name: _assemble(name, plan, human, p, models) for name, p in preds.items()}


# -- bootstrap ---------------------------------------------------------------------

@dataclass
class BootstrapResult:
    estimate: float
    lo: float
    hi: float
    resamples: int
    redraws: int
    distribution: np.ndarray = field(repr=False)

    def interval(self, level: float = 0.95) -> tuple[float, float]:
        return percentile_interval(self.distribution, level)


def percentile_interval(values, level: float = 0.95) -> tuple[float, float]:
    """Central interval via linear interpolation between order statistics."""
    tail = (1.0 - level) / 2.0 * 100.0
    lo, hi = np.percentile(np.asarray(values, dtype=float), [tail, 100.0 - tail], method="linear")
    return float(lo), float(hi)


def bootstrap_ci(pred, human, resamples: int = 5000, seed: int = 1,
                 level: float = 0.95, max_redraws: int = 100_000) -> BootstrapResult:
    """Percentile CI for aggregate r, resampling whole rows with replacement.

    A resample whose cells are constant is redrawn and counted in ``redraws``.
    """
    pred, human = _check_pair(pred, human)
    if resamples < 1:
        raise ValueError("resamples must be >= 1")
    n = len(human)
    rng = RngStream(mix_seed(seed, "bootstrap"))
    stats = np.empty(resamples)
    redraws = 0
    i = 0
    while i < resamples:
        idx = rng.integers(n, n)
        try:
            stats[i] = pearson(pred[idx], human[idx])
        except UndefinedCorrelationError:
            redraws += 1
            if redraws > max_redraws:
                raise
            continue
        i += 1
    lo, hi = percentile_interval(stats, level)
    return BootstrapResult(pearson(pred, human), lo, hi, resamples, redraws, stats)


# -- paired t-test -------------------------------------------------------------------

def _betacf(a: float, b: float, x: float, max_iter: int = 300, eps: float = 1e-15) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc_regularized(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x in (0.0, 1.0):
        return x
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_tailed(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("df must be positive")
    return betainc_regularized(df / 2.0, 0.5, df / (df + t * t))


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float
    df: int


def paired_t_test(xs, ys) -> TTestResult:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1 or xs.size < 2:
        raise ValueError("paired_t_test needs two equal-length 1-D samples with n >= 2")
    d = xs - ys
    n = d.size
    sd = float(np.std(d, ddof=1))
    # exact-constant shifts leave rounding-level spread in d
    if sd <= 1e-12 * max(1.0, abs(float(np.mean(d)))):
        raise DegenerateTestError("differences have zero variance")
    t = float(np.mean(d)) / (sd / math.sqrt(n))
    return TTestResult(t, student_t_two_tailed(t, n - 1), n - 1)
