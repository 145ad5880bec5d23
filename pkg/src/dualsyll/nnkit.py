"""Small deterministic neural kernel: dense layers, softmax/KL, Adam, seeded RNG.

Only batched (n, features) arrays are handled internally; helpers accept a
single vector and return a vector.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

LOG_CLAMP = 1e-12
_MASK64 = (1 << 64) - 1


class ShapeError(ValueError):
    pass


# -- random numbers --------------------------------------------------------

def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix_seed(seed: int, *names) -> int:
    """Derive a 64-bit child seed: blake2b-64 of ``"seed/name1/name2..."``."""
    key = "/".join([str(int(seed) & _MASK64)] + [str(n) for n in names])
    return int.from_bytes(hashlib.blake2b(key.encode(), digest_size=8).digest(), "little")


class RngStream:
    """xorshift64* (Vigna 2016; shifts 12/25/27, multiplier 0x2545F4914F6CDD1D).

    The state is seeded through splitmix64 so that small integer seeds give
    well-mixed, nonzero states. Pure-integer arithmetic keeps streams
    identical on every platform.
    """

    MULTIPLIER = 0x2545F4914F6CDD1D

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self.state = splitmix64(self.seed) or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & _MASK64
        x ^= x >> 27
        self.state = x
        return (x * self.MULTIPLIER) & _MASK64

    def random(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, low: float, high: float, size: int) -> np.ndarray:
        return np.array([low + (high - low) * self.random() for _ in range(size)])

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def integers(self, n: int, size: int) -> np.ndarray:
        return np.array([self.randbelow(n) for _ in range(size)], dtype=np.int64)

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates shuffle of range(n), swapping from the top down."""
        perm = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.randbelow(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return np.array(perm, dtype=np.int64)

    def substream(self, *names) -> "RngStream":
        return RngStream(mix_seed(self.seed, *names))


# -- layers and activations --------------------------------------------------

@dataclass
class DenseLayer:
    weights: np.ndarray  # (fan_out, fan_in)
    biases: np.ndarray  # (fan_out,)

    @property
    def fan_in(self) -> int:
        return self.weights.shape[1]

    @property
    def fan_out(self) -> int:
        return self.weights.shape[0]

    @property
    def parameter_count(self) -> int:
        return self.weights.size + self.biases.size

    def copy(self) -> "DenseLayer":
        return DenseLayer(self.weights.copy(), self.biases.copy())


def init_dense(fan_in: int, fan_out: int, rng: RngStream) -> DenseLayer:
    """Weights U(-1/sqrt(fan_in), +1/sqrt(fan_in)) drawn row-major; zero biases."""
    if fan_in <= 0 or fan_out <= 0:
        raise ShapeError("layer dimensions must be positive")
    bound = np.sqrt(1.0 / fan_in)
    w = rng.uniform(-bound, bound, fan_in * fan_out).reshape(fan_out, fan_in)
    return DenseLayer(w, np.zeros(fan_out))


def dense_forward(layer: DenseLayer, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != layer.fan_in:
        raise ShapeError(f"input width {x.shape[-1]} != fan_in {layer.fan_in}")
    return x @ layer.weights.T + layer.biases


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def softmax(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def kl_terms(target: np.ndarray, pred: np.ndarray) -> np.ndarray:
    """Per-row KL(target || pred) with 0 log 0 = 0 and pred clamped at 1e-12."""
    target = np.asarray(target, dtype=float)
    pred = np.maximum(np.asarray(pred, dtype=float), LOG_CLAMP)
    safe_t = np.where(target > 0, target, 1.0)
    return np.sum(np.where(target > 0, target * (np.log(safe_t) - np.log(pred)), 0.0), axis=-1)


def kl_loss(target, pred) -> float:
    """Mean KL(human || model) over rows (or the single KL for vectors)."""
    return float(np.mean(kl_terms(target, pred)))


def softmax_kl_grad(target: np.ndarray, pred: np.ndarray, weight: float = 1.0) -> np.ndarray:
    """Gradient of ``weight * mean_rows KL`` w.r.t. the logits feeding softmax.

    Uses d/dz KL = pred - target (targets sum to one); the log clamp only
    binds below 1e-12 and is ignored here.
    """
    n = target.shape[0]
    return weight * (pred - target) / n


def dense_backward(layer: DenseLayer, x: np.ndarray, dout: np.ndarray):
    """Return (dW, db, dx) for ``out = x W^T + b``."""
    return dout.T @ x, dout.sum(axis=0), dout @ layer.weights


# -- optimizer --------------------------------------------------------------

@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(params: dict, grads: dict, state: AdamState):
    """In-place Adam update with bias correction; increments ``state.t``."""
    if params.keys() != grads.keys():
        raise ShapeError("parameter and gradient names differ")
    state.t += 1
    c1 = 1.0 - state.beta1**state.t
    c2 = 1.0 - state.beta2**state.t
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ShapeError(f"{name}: gradient shape {g.shape} != parameter shape {p.shape}")
        m = state.m.get(name)
        if m is None:
            m = state.m[name] = np.zeros_like(p)
            state.v[name] = np.zeros_like(p)
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.epsilon)
    return params, state
