"""Finite-difference verification of tape gradients."""
from __future__ import annotations

import numpy as np

from .init import make_rng
from .tape import Tape, backward


def _evaluate(closure, params):
    tape = Tape()
    nodes = {k: tape.leaf(v, name=k) for k, v in params.items()}
    loss = closure(tape, nodes)
    return tape, nodes, loss


def relative_error(analytic, numeric, floor=1e-6):
    return abs(analytic - numeric) / max(abs(analytic) + abs(numeric), floor)


def grad_check(closure, params: dict, eps: float = 1e-5, n_coords: int = 50, seed: int = 0,
               names=None) -> float:
    """Max relative error between backward and central differences.

    ``closure(tape, nodes)`` must build a scalar loss from ``nodes`` (one leaf
    per entry of ``params``). Up to ``n_coords`` coordinates per tensor are
    probed, all of them when the tensor is smaller.
    """
    tape, nodes, loss = _evaluate(closure, params)
    if not np.all(np.isfinite(loss.value)):
        raise FloatingPointError(f"non-finite loss {loss.value}")
    grads = backward(tape, loss)
    rng = make_rng(seed, "grad_check")

    worst = 0.0
    for name in names or sorted(params):
        value = params[name]
        analytic = grads[nodes[name].id]
        size = value.size
        coords = np.arange(size) if size <= n_coords else rng.choice(size, n_coords, replace=False)
        for flat in coords:
            idx = np.unravel_index(int(flat), value.shape)
            numeric = 0.0
            for sign in (1.0, -1.0):
                shifted = dict(params)
                shifted[name] = value.copy()
                shifted[name][idx] += sign * eps
                f = float(_evaluate(closure, shifted)[2].value)
                if not np.isfinite(f):
                    raise FloatingPointError(f"non-finite loss while probing {name}{idx}")
                numeric += sign * f
            numeric /= 2.0 * eps
            worst = max(worst, relative_error(float(analytic[idx]), numeric))
    return worst
