"""Central finite-difference oracle for network gradients."""
import numpy as np

H = 1e-5
FLOOR = 1e-6


def relative_errors(loss_fn, params: dict, grads: dict, h: float = H) -> dict:
    """Max relative error per parameter array.

    Relative error is |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
    """
    out = {}
    for name, p in params.items():
        worst = 0.0
        for idx in np.ndindex(p.shape):
            orig = p[idx]
            p[idx] = orig + h
            up = loss_fn()
            p[idx] = orig - h
            down = loss_fn()
            p[idx] = orig
            num = (up - down) / (2 * h)
            ana = grads[name][idx]
            worst = max(worst, abs(ana - num) / max(abs(ana), abs(num), FLOOR))
        out[name] = worst
    return out


def gradcheck_batch(seed=0, n=6):
    rng = np.random.default_rng(seed)
    X = (rng.random((n, 29)) < 0.35).astype(float)
    X[:, 28] = 1.0
    T = rng.dirichlet(np.ones(9), size=n)
    T[0, 3] = 0.0
    T[0] /= T[0].sum()
    return X, T


def perturb(model, seed=1, scale=0.3):
    """Move parameters off the zero-bias init so no ReLU sits on a kink."""
    rng = np.random.default_rng(seed)
    for p in model.parameters().values():
        p += scale * rng.standard_normal(p.shape)
    return model
