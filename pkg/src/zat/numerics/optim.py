from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def global_norm(grads: dict) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))


def clip_global_norm(grads: dict, max_norm: float) -> dict:
    """Rescale all gradients together so their joint L2 norm is at most ``max_norm``."""
    if max_norm <= 0:
        raise ValueError("max_norm must be positive")
    norm = global_norm(grads)
    if norm <= max_norm:
        return dict(grads)
    factor = max_norm / norm
    return {k: g * factor for k, g in grads.items()}


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(params: dict, grads: dict, state: AdamState) -> tuple[dict, AdamState]:
    """One bias-corrected Adam update.

    Only names present in ``grads`` move. Returns a new parameter dict; the
    arrays of the input dict are never written to.
    """
    state.t += 1
    t = state.t
    b1, b2 = state.beta1, state.beta2
    new = dict(params)
    for name, g in grads.items():
        p = params[name]
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter {name!r} {p.shape}")
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros_like(p)
            v = np.zeros_like(p)
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        state.m[name], state.v[name] = m, v
        m_hat = m / (1.0 - b1 ** t)
        v_hat = v / (1.0 - b2 ** t)
        new[name] = p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return new, state
