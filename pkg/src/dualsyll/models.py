"""Direct MLP baseline and the bounded intuition/deliberation network.

Deliberation wiring (the only composition matching the 470-parameter budget)::

    d      = relu(W_enc x + b)                  4    (29*4 + 4   = 120)
    s_k    = relu(W_k d + b_k),  k = 1..5       5x4  (5 * 20     = 100)
    g      = softmax(W_gate d + b)              5    (4*5 + 5    =  25)
    z      = [g_1 s_1, ..., g_5 s_5, d]         24
    p_delib = softmax(W_out z + b)              9    (24*9 + 9   = 225)

The intuition pathway is relu(29 -> 4) then softmax(4 -> 9), 165 parameters,
and never sees deliberation activations. Gate state indices are 0-based in
this API; emitted tables label them ``state 1`` .. ``state 5``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .nnkit import (
    AdamState,
    DenseLayer,
    RngStream,
    adam_step,
    dense_backward,
    dense_forward,
    init_dense,
    kl_terms,
    mix_seed,
    relu,
    softmax,
    softmax_kl_grad,
)
from .syllogism import N_FEATURES, RESPONSES

N_OUT = len(RESPONSES)
N_STATES = 5
STATE_DIM = 4


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    epochs: int = 4000
    loss_weights: tuple[float, float] = (0.5, 0.5)
    seed: int = 1

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.lr < 0:
            raise ValueError("lr must be non-negative")
        if len(self.loss_weights) != 2 or min(self.loss_weights) < 0:
            raise ValueError("loss_weights must be two non-negative numbers")


def _as_batch(x):
    x = np.asarray(x, dtype=float)
    return (x[None, :], True) if x.ndim == 1 else (x, False)


class _Network:
    """Shared parameter plumbing for the layer containers below."""

    def layers(self) -> dict[str, DenseLayer]:
        raise NotImplementedError

    def parameters(self) -> dict[str, np.ndarray]:
        out = {}
        for name, layer in self.layers().items():
            out[f"{name}.weights"] = layer.weights
            out[f"{name}.biases"] = layer.biases
        return out

    @property
    def parameter_count(self) -> int:
        return sum(layer.parameter_count for layer in self.layers().values())

    def to_dict(self) -> dict:
        return {
            name: {"shape": list(p.shape), "values": [float(v) for v in p.ravel()]}
            for name, p in self.parameters().items()
        }

    def load_dict(self, data: dict) -> None:
        for name, p in self.parameters().items():
            entry = data[name]
            values = np.array(entry["values"], dtype=float).reshape(entry["shape"])
            if values.shape != p.shape:
                raise ValueError(f"{name}: checkpoint shape {values.shape} != {p.shape}")
            p[...] = values


@dataclass(eq=False)
class DirectMLP(_Network):
    hidden: DenseLayer
    out: DenseLayer

    def layers(self):
        return {"hidden": self.hidden, "out": self.out}

    def forward(self, X):
        h_pre = dense_forward(self.hidden, X)
        h = relu(h_pre)
        return {"X": X, "h_pre": h_pre, "h": h, "p": softmax(dense_forward(self.out, h))}

    def loss_and_grads(self, X, T, weight: float = 1.0):
        c = self.forward(X)
        loss = weight * float(np.mean(kl_terms(T, c["p"])))
        dz = softmax_kl_grad(T, c["p"], weight)
        dWo, dbo, dh = dense_backward(self.out, c["h"], dz)
        dh = dh * (c["h_pre"] > 0)
        dWh, dbh, _ = dense_backward(self.hidden, X, dh)
        grads = {
            "hidden.weights": dWh,
            "hidden.biases": dbh,
            "out.weights": dWo,
            "out.biases": dbo,
        }
        return loss, grads


@dataclass(eq=False)
class DeliberationTrace:
    d: np.ndarray  # (n, 4)
    s: np.ndarray  # (n, 5, 4)
    g: np.ndarray  # (n, 5)
    winner: np.ndarray  # (n,) argmax of g, lowest index on ties
    dist: np.ndarray  # (n, 9)


@dataclass(eq=False)
class DualPathModel(_Network):
    intuition_enc: DenseLayer
    intuition_out: DenseLayer
    delib_enc: DenseLayer
    candidate_heads: list[DenseLayer]
    gate: DenseLayer
    delib_out: DenseLayer

    def layers(self):
        out = {"intuition_enc": self.intuition_enc, "intuition_out": self.intuition_out,
               "delib_enc": self.delib_enc}
        for k, head in enumerate(self.candidate_heads):
            out[f"candidate{k}"] = head
        out["gate"] = self.gate
        out["delib_out"] = self.delib_out
        return out

    def intuition_parameters(self) -> dict[str, np.ndarray]:
        return {k: v for k, v in self.parameters().items() if k.startswith("intuition")}

    def deliberation_parameters(self) -> dict[str, np.ndarray]:
        return {k: v for k, v in self.parameters().items() if not k.startswith("intuition")}

    @property
    def intuition_parameter_count(self) -> int:
        return sum(p.size for p in self.intuition_parameters().values())

    @property
    def deliberation_parameter_count(self) -> int:
        return sum(p.size for p in self.deliberation_parameters().values())

    def forward_intuition(self, X):
        h_pre = dense_forward(self.intuition_enc, X)
        h = relu(h_pre)
        return {"h_pre": h_pre, "h": h, "p": softmax(dense_forward(self.intuition_out, h))}

    def forward_deliberation(self, X, keep=None):
        """Deliberation pass; ``keep`` (bool mask over states) renormalizes the gate."""
        d_pre = dense_forward(self.delib_enc, X)
        d = relu(d_pre)
        W = np.stack([h.weights for h in self.candidate_heads])  # (5, 4, 4)
        b = np.stack([h.biases for h in self.candidate_heads])  # (5, 4)
        s_pre = np.einsum("kij,nj->nki", W, d) + b
        s = relu(s_pre)
        g_raw = softmax(dense_forward(self.gate, d))
        g = g_raw
        if keep is not None:
            masked = g_raw * keep
            total = masked.sum(axis=1, keepdims=True)
            uniform = keep / keep.sum()
            g = np.where(total > 0, masked / np.where(total > 0, total, 1.0), uniform)
        z = np.concatenate([(g[:, :, None] * s).reshape(len(X), -1), d], axis=1)
        p = softmax(dense_forward(self.delib_out, z))
        return {"d_pre": d_pre, "d": d, "s_pre": s_pre, "s": s, "g": g, "z": z, "p": p}

    def loss_and_grads(self, X, T, weights=(0.5, 0.5)):
        """Weighted sum of the two mean-KL losses and its exact gradient."""
        w_int, w_del = weights
        ci = self.forward_intuition(X)
        cd = self.forward_deliberation(X)
        kl_int = float(np.mean(kl_terms(T, ci["p"])))
        kl_del = float(np.mean(kl_terms(T, cd["p"])))
        grads = {}

        dz = softmax_kl_grad(T, ci["p"], w_int)
        dW, db, dh = dense_backward(self.intuition_out, ci["h"], dz)
        grads["intuition_out.weights"], grads["intuition_out.biases"] = dW, db
        dW, db, _ = dense_backward(self.intuition_enc, X, dh * (ci["h_pre"] > 0))
        grads["intuition_enc.weights"], grads["intuition_enc.biases"] = dW, db

        n = len(X)
        dlog = softmax_kl_grad(T, cd["p"], w_del)
        dW, db, dzcat = dense_backward(self.delib_out, cd["z"], dlog)
        grads["delib_out.weights"], grads["delib_out.biases"] = dW, db
        dgs = dzcat[:, : N_STATES * STATE_DIM].reshape(n, N_STATES, STATE_DIM)
        dd = dzcat[:, N_STATES * STATE_DIM:].copy()
        g, s, d = cd["g"], cd["s"], cd["d"]
        ds_pre = dgs * g[:, :, None] * (cd["s_pre"] > 0)
        dg = np.sum(dgs * s, axis=2)
        dgate = g * (dg - np.sum(g * dg, axis=1, keepdims=True))
        for k, head in enumerate(self.candidate_heads):
            dW, db, dd_k = dense_backward(head, d, ds_pre[:, k, :])
            grads[f"candidate{k}.weights"], grads[f"candidate{k}.biases"] = dW, db
            dd += dd_k
        dW, db, dd_g = dense_backward(self.gate, d, dgate)
        grads["gate.weights"], grads["gate.biases"] = dW, db
        dd += dd_g
        dW, db, _ = dense_backward(self.delib_enc, X, dd * (cd["d_pre"] > 0))
        grads["delib_enc.weights"], grads["delib_enc.biases"] = dW, db

        loss = w_int * kl_int + w_del * kl_del
        return loss, grads, (kl_int, kl_del)


# -- construction -------------------------------------------------------------

def build_direct(seed: int, hidden: int = 64) -> DirectMLP:
    rng = RngStream(mix_seed(seed, "init", "direct"))
    return DirectMLP(init_dense(N_FEATURES, hidden, rng), init_dense(hidden, N_OUT, rng))


def build_dualpath(seed: int) -> DualPathModel:
    # draw order: intuition_enc, intuition_out, delib_enc, candidates 0..4, gate, delib_out
    rng = RngStream(mix_seed(seed, "init", "dualpath"))
    return DualPathModel(
        intuition_enc=init_dense(N_FEATURES, STATE_DIM, rng),
        intuition_out=init_dense(STATE_DIM, N_OUT, rng),
        delib_enc=init_dense(N_FEATURES, STATE_DIM, rng),
        candidate_heads=[init_dense(STATE_DIM, STATE_DIM, rng) for _ in range(N_STATES)],
        gate=init_dense(STATE_DIM, N_STATES, rng),
        delib_out=init_dense(N_STATES * STATE_DIM + STATE_DIM, N_OUT, rng),
    )


# -- prediction -----------------------------------------------------------------

def predict_direct(m: DirectMLP, x) -> np.ndarray:
    X, single = _as_batch(x)
    p = m.forward(X)["p"]
    return p[0] if single else p


def _trace(c) -> DeliberationTrace:
    return DeliberationTrace(c["d"], c["s"], c["g"], np.argmax(c["g"], axis=1), c["p"])


def predict_dualpath(m: DualPathModel, x):
    """Return (intuition distribution, DeliberationTrace)."""
    X, single = _as_batch(x)
    p_int = m.forward_intuition(X)["p"]
    tr = _trace(m.forward_deliberation(X))
    if single:
        return p_int[0], DeliberationTrace(tr.d[0], tr.s[0], tr.g[0], tr.winner[0], tr.dist[0])
    return p_int, tr


def keep_mask(keep) -> np.ndarray:
    """Boolean-valued float mask from an index, an iterable of indices or a mask."""
    if isinstance(keep, (int, np.integer)):
        keep = [int(keep)]
    keep = np.asarray(list(keep))
    if keep.size == 0:
        raise ValueError("keep must name at least one state")
    if keep.dtype == bool:
        if keep.shape != (N_STATES,) or not keep.any():
            raise ValueError("keep mask must have 5 entries with at least one True")
        return keep.astype(float)
    if np.any((keep < 0) | (keep >= N_STATES)):
        raise ValueError(f"state indices must lie in 0..{N_STATES - 1}")
    mask = np.zeros(N_STATES)
    mask[keep] = 1.0
    return mask


def predict_with_gate_override(m: DualPathModel, x, keep) -> np.ndarray:
    """Deliberation output with gate entries outside ``keep`` zeroed and renormalized.

    Keeping all states skips renormalization so the result equals the plain
    deliberation output exactly.
    """
    mask = keep_mask(keep)
    X, single = _as_batch(x)
    c = m.forward_deliberation(X, keep=None if mask.all() else mask)
    return c["p"][0] if single else c["p"]


def trace_with_gate_override(m: DualPathModel, x, keep) -> DeliberationTrace:
    mask = keep_mask(keep)
    X, _ = _as_batch(x)
    return _trace(m.forward_deliberation(X, keep=None if mask.all() else mask))


# -- training -------------------------------------------------------------------

def _select(X, T, train_idx):
    X = np.asarray(X, dtype=float)
    T = np.asarray(T, dtype=float)
    if train_idx is not None:
        idx = np.asarray(train_idx, dtype=int)
        X, T = X[idx], T[idx]
    if len(X) == 0:
        raise ValueError("training set is empty")
    if X.shape[0] != T.shape[0]:
        raise ValueError("features and targets have different row counts")
    return X, T


def train_direct(X, T, cfg: TrainConfig = TrainConfig(), train_idx=None, hidden: int = 64):
    """Full-batch Adam on mean KL; returns (model, per-epoch loss before each step)."""
    X, T = _select(X, T, train_idx)
    model = build_direct(cfg.seed, hidden)
    params = model.parameters()
    state = AdamState(lr=cfg.lr)
    curve = np.empty(cfg.epochs)
    for epoch in range(cfg.epochs):
        curve[epoch], grads = model.loss_and_grads(X, T)
        adam_step(params, grads, state)
    return model, curve


def train_dualpath(X, T, cfg: TrainConfig = TrainConfig(), train_idx=None):
    """Train both pathways on ``w_int * KL_int + w_del * KL_del``.

    Returns (model, curves) where curves holds per-epoch ``intuition``,
    ``deliberation`` and weighted ``total`` losses.
    """
    X, T = _select(X, T, train_idx)
    model = build_dualpath(cfg.seed)
    params = model.parameters()
    state = AdamState(lr=cfg.lr)
    curves = {k: np.empty(cfg.epochs) for k in ("intuition", "deliberation", "total")}
    for epoch in range(cfg.epochs):
        total, grads, (kl_i, kl_d) = model.loss_and_grads(X, T, cfg.loss_weights)
        curves["total"][epoch] = total
        curves["intuition"][epoch] = kl_i
        curves["deliberation"][epoch] = kl_d
        adam_step(params, grads, state)
    return model, curves


# -- estimator wrappers -----------------------------------------------------------

def _check_X(X):
    X = check_array(X, dtype=float)
    if X.shape[1] != N_FEATURES:
        raise ValueError(f"expected {N_FEATURES} features, got {X.shape[1]}")
    return X


def _check_Y(Y, n):
    Y = check_array(Y, dtype=float)
    if Y.shape != (n, N_OUT):
        raise ValueError(f"targets must have shape ({n}, {N_OUT}), got {Y.shape}")
    if np.any(Y < 0) or not np.allclose(Y.sum(axis=1), 1.0, atol=1e-6):
        raise ValueError("each target row must be a probability distribution")
    return Y


class DirectMLPRegressor(BaseEstimator):
    """Distribution regressor: 29 -> 64 ReLU -> 9 softmax, trained on KL."""

    def __init__(self, hidden=64, lr=1e-3, epochs=4000, seed=1):
        self.hidden = hidden
        self.lr = lr
        self.epochs = epochs
        self.seed = seed

    def fit(self, X, Y):
        X = _check_X(X)
        Y = _check_Y(Y, len(X))
        cfg = TrainConfig(lr=self.lr, epochs=self.epochs, seed=self.seed)
        self.network_, self.loss_curve_ = train_direct(X, Y, cfg, hidden=self.hidden)
        return self

    def predict(self, X):
        check_is_fitted(self, "network_")
        return predict_direct(self.network_, _check_X(X))


class DualPathRegressor(BaseEstimator):
    """Bounded intuition + gated five-state deliberation pathways.

    ``predict`` returns the deliberation distribution; the intuition output is
    available via ``predict_intuition``.
    """

    def __init__(self, lr=1e-3, epochs=4000, loss_weights=(0.5, 0.5), seed=1):
        self.lr = lr
        self.epochs = epochs
        self.loss_weights = loss_weights
        self.seed = seed

    def fit(self, X, Y):
        X = _check_X(X)
        Y = _check_Y(Y, len(X))
        cfg = TrainConfig(lr=self.lr, epochs=self.epochs,
                          loss_weights=tuple(self.loss_weights), seed=self.seed)
        self.network_, self.loss_curves_ = train_dualpath(X, Y, cfg)
        return self

    def predict(self, X):
        return self.trace(X).dist

    def predict_intuition(self, X):
        check_is_fitted(self, "network_")
        return self.network_.forward_intuition(_check_X(X))["p"]

    def trace(self, X) -> DeliberationTrace:
        check_is_fitted(self, "network_")
        return predict_dualpath(self.network_, _check_X(X))[1]

    def predict_with_gate_override(self, X, keep):
        check_is_fitted(self, "network_")
        return predict_with_gate_override(self.network_, _check_X(X), keep)
