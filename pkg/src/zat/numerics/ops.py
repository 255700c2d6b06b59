"""Differentiable primitives recorded on a :class:`~zat.numerics.tape.Tape`.

Every function takes and returns :class:`Node` objects. Shapes follow numpy
conventions with a leading batch axis where relevant. Broadcasting is
supported only as far as the models need it (trailing-axis alignment).
"""
from __future__ import annotations

import numpy as np

from .tape import Node

NEG_INF = -np.inf
# Large negative score used to blank out padded positions before a softmax.
MASK_SCORE = -1e9


def _unbroadcast(g, shape):
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def add(a: Node, b: Node) -> Node:
    sa, sb = a.shape, b.shape
    return a.tape.record(a.value + b.value, (a, b),
                         lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))


def sub(a: Node, b: Node) -> Node:
    sa, sb = a.shape, b.shape
    return a.tape.record(a.value - b.value, (a, b),
                         lambda g: (_unbroadcast(g, sa), -_unbroadcast(g, sb)))


def mul(a: Node, b: Node) -> Node:
    av, bv = a.value, b.value
    return a.tape.record(av * bv, (a, b),
                         lambda g: (_unbroadcast(g * bv, av.shape), _unbroadcast(g * av, bv.shape)))


def scale(a: Node, c: float) -> Node:
    return a.tape.record(a.value * c, (a,), lambda g: (g * c,))


def mul_const(a: Node, c: np.ndarray) -> Node:
    """Multiply by a fixed array (dropout masks, padding masks)."""
    return a.tape.record(a.value * c, (a,), lambda g: (_unbroadcast(g * c, a.shape),))


def matmul(a: Node, b: Node) -> Node:
    """``a @ b`` for ``(..., k) @ (k, m)``, ``(..., k) @ (k,)`` or batched ``(B, n, k) @ (B, k, m)``."""
    av, bv = a.value, b.value
    out = av @ bv

    def vjp(g):
        if bv.ndim == 1:
            ga = g[..., None] * bv
            gb = (av * g[..., None]).reshape(-1, bv.shape[0]).sum(axis=0)
            return ga, gb
        ga = g @ np.swapaxes(bv, -1, -2)
        if bv.ndim == 2:
            gb = av.reshape(-1, av.shape[-1]).T @ g.reshape(-1, g.shape[-1])
        else:
            gb = np.swapaxes(av, -1, -2) @ g
        return ga, gb

    return a.tape.record(out, (a, b), vjp)


def swapaxes(a: Node, ax1=-1, ax2=-2) -> Node:
    return a.tape.record(np.swapaxes(a.value, ax1, ax2), (a,),
                         lambda g: (np.swapaxes(g, ax1, ax2),))


def reshape(a: Node, shape) -> Node:
    old = a.shape
    return a.tape.record(a.value.reshape(shape), (a,), lambda g: (g.reshape(old),))


def concat(nodes, axis=-1) -> Node:
    sizes = [n.shape[axis] for n in nodes]
    splits = np.cumsum(sizes)[:-1]
    out = np.concatenate([n.value for n in nodes], axis=axis)
    return nodes[0].tape.record(out, tuple(nodes),
                                lambda g: tuple(np.split(g, splits, axis=axis)))


def index(a: Node, key) -> Node:
    """``a[key]`` for any numpy index (slices, integer arrays)."""
    shape = a.shape

    def vjp(g):
        ga = np.zeros(shape)
        np.add.at(ga, key, g)
        return (ga,)

    return a.tape.record(a.value[key], (a,), vjp)


def embed(table: Node, ids: np.ndarray) -> Node:
    """Row lookup ``table[ids]``; repeated ids accumulate gradient."""
    ids = np.asarray(ids)
    shape = table.shape

    def vjp(g):
        gt = np.zeros(shape)
        np.add.at(gt, ids.reshape(-1), g.reshape(-1, shape[-1]))
        return (gt,)

    return table.tape.record(table.value[ids], (table,), vjp)


def tanh(a: Node) -> Node:
    y = np.tanh(a.value)
    return a.tape.record(y, (a,), lambda g: (g * (1.0 - y * y),))


def sigmoid(a: Node) -> Node:
    y = _sigmoid(a.value)
    return a.tape.record(y, (a,), lambda g: (g * y * (1.0 - y),))


def _sigmoid(x):
    return 0.5 * (np.tanh(0.5 * x) + 1.0)


def total(a: Node, axis=None) -> Node:
    """Sum over ``axis`` (all axes when ``None``)."""
    shape = a.shape

    def vjp(g):
        if axis is None:
            return (np.broadcast_to(g, shape).copy(),)
        return (np.broadcast_to(np.expand_dims(g, axis), shape).copy(),)

    return a.tape.record(np.sum(a.value, axis=axis), (a,), vjp)


def mean(a: Node) -> Node:
    return scale(total(a), 1.0 / a.value.size)


def _lse(x, axis):
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True)) + m
    return np.squeeze(out, axis=axis)


def logsumexp(a: Node, axis=-1) -> Node:
    x = a.value
    y = _lse(x, axis)

    def vjp(g):
        p = np.exp(x - np.expand_dims(y, axis))
        return (p * np.expand_dims(g, axis),)

    return a.tape.record(y, (a,), vjp)


def softmax(a: Node, axis=-1, mask=None) -> Node:
    """Softmax along ``axis``; positions where ``mask`` is 0 get probability 0."""
    x = a.value
    if mask is not None:
        x = np.where(mask > 0, x, MASK_SCORE)
    e = np.exp(x - x.max(axis=axis, keepdims=True))
    y = e / e.sum(axis=axis, keepdims=True)

    def vjp(g):
        return (y * (g - (g * y).sum(axis=axis, keepdims=True)),)

    return a.tape.record(y, (a,), vjp)


def max_pool(a: Node, axis, valid=None) -> Node:
    """Max over ``axis``. Gradient goes to the first maximal index on ties.

    ``valid`` (broadcastable to ``a`` with ``axis`` kept) excludes positions.
    """
    x = a.value
    if valid is not None:
        x = np.where(valid > 0, x, -np.inf)
    idx = np.argmax(x, axis=axis)
    y = np.take_along_axis(x, np.expand_dims(idx, axis), axis=axis)
    y = np.squeeze(y, axis=axis)
    shape = a.shape

    def vjp(g):
        ga = np.zeros(shape)
        np.put_along_axis(ga, np.expand_dims(idx, axis), np.expand_dims(g, axis), axis=axis)
        return (ga,)

    return a.tape.record(y, (a,), vjp)


def softmax_cross_entropy(logits: Node, targets: np.ndarray, mask: np.ndarray) -> Node:
    """Per-sequence summed token cross-entropy.

    ``logits`` is ``(B, T, C)``, ``targets`` integer ``(B, T)``, ``mask``
    ``(B, T)``; returns ``(B,)``.
    """
    x = logits.value
    lse = _lse(x, -1)
    logp = x - lse[..., None]
    picked = np.take_along_axis(logp, targets[..., None], axis=-1)[..., 0]
    out = -(picked * mask).sum(axis=1)

    def vjp(g):
        p = np.exp(logp)
        onehot = np.zeros_like(p)
        np.put_along_axis(onehot, targets[..., None], 1.0, axis=-1)
        return ((p - onehot) * (mask * g[:, None])[..., None],)

    return logits.tape.record(out, (logits,), vjp)


# ---------------------------------------------------------------------------
# Fused recurrent layer
# ---------------------------------------------------------------------------

def lstm(x: Node, Wx: Node, Wh: Node, b: Node, mask: np.ndarray, reverse=False) -> Node:
    """Single-direction LSTM over ``x`` of shape ``(B, T, D)``.

    Gate blocks in ``Wx (D, 4H)``, ``Wh (H, 4H)`` and ``b (4H,)`` are ordered
    input, forget, output, candidate. Zero initial state. ``mask`` is
    ``(B, T)`` with 1 on real tokens; on padded steps the state is carried
    unchanged and the output is zero, so each row is processed exactly as if
    it were alone. ``reverse`` runs right to left.
    """
    xv, Wxv, Whv, bv = x.value, Wx.value, Wh.value, b.value
    B, T, D = xv.shape
    H = Whv.shape[0]
    xp = (xv.reshape(-1, D) @ Wxv).reshape(B, T, 4 * H) + bv
    order = range(T - 1, -1, -1) if reverse else range(T)

    h = np.zeros((B, H))
    c = np.zeros((B, H))
    out = np.zeros((B, T, H))
    cache = [None] * T
    for t in order:
        z = xp[:, t] + h @ Whv
        i = _sigmoid(z[:, :H])
        f = _sigmoid(z[:, H:2 * H])
        o = _sigmoid(z[:, 2 * H:3 * H])
        gc = np.tanh(z[:, 3 * H:])
        c_new = f * c + i * gc
        tc = np.tanh(c_new)
        h_new = o * tc
        m = mask[:, t, None]
        cache[t] = (h, c, i, f, o, gc, tc, m)
        out[:, t] = m * h_new
        h = m * h_new + (1.0 - m) * h
        c = m * c_new + (1.0 - m) * c

    def vjp(dout):
        dxp = np.zeros((B, T, 4 * H))
        dWh = np.zeros_like(Whv)
        dh_next = np.zeros((B, H))
        dc_next = np.zeros((B, H))
        for t in reversed(list(order)):
            h_prev, c_prev, i, f, o, gc, tc, m = cache[t]
            dh_new = m * (dout[:, t] + dh_next)
            dc_new = m * dc_next + dh_new * o * (1.0 - tc * tc)
            dz = np.concatenate([
                dc_new * gc * i * (1.0 - i),
                dc_new * c_prev * f * (1.0 - f),
                dh_new * tc * o * (1.0 - o),
                dc_new * i * (1.0 - gc * gc),
            ], axis=1)
            dxp[:, t] = dz
            dWh += h_prev.T @ dz
            dh_next = dz @ Whv.T + (1.0 - m) * dh_next
            dc_next = dc_new * f + (1.0 - m) * dc_next
        flat = dxp.reshape(-1, 4 * H)
        dx = (flat @ Wxv.T).reshape(B, T, D)
        dWx = xv.reshape(-1, D).T @ flat
        db = flat.sum(axis=0)
        return dx, dWx, dWh, db

    return x.tape.record(out, (x, Wx, Wh, b), vjp)


# ---------------------------------------------------------------------------
# Fused linear-chain CRF negative log-likelihood
# ---------------------------------------------------------------------------

def crf_forward(U, trans, start, end, mask):
    """Masked forward recursion. Returns per-step alphas ``(B, T, L)`` and log Z ``(B,)``."""
    B, T, L = U.shape
    alphas = np.empty((B, T, L))
    alpha = start + U[:, 0]
    alphas[:, 0] = alpha
    for t in range(1, T):
        s = alpha[:, :, None] + trans[None] + U[:, t, None, :]
        new = _lse(s, 1)
        m = mask[:, t, None]
        alpha = np.where(m > 0, new, alpha)
        alphas[:, t] = alpha
    return alphas, _lse(alpha + end, 1)


def crf_backward_scores(U, trans, end, mask):
    B, T, L = U.shape
    betas = np.empty((B, T, L))
    beta = np.broadcast_to(end, (B, L)).copy()
    betas[:, T - 1] = beta
    for t in range(T - 2, -1, -1):
        s = trans[None] + (U[:, t + 1] + beta)[:, None, :]
        new = _lse(s, 2)
        m = mask[:, t + 1, None]
        beta = np.where(m > 0, new, beta)
        betas[:, t] = beta
    return betas


def gold_path_score(U, trans, start, end, tags, mask):
    B, T, L = U.shape
    lengths = mask.sum(axis=1).astype(int)
    rows = np.arange(B)
    emit = (np.take_along_axis(U, tags[..., None], axis=-1)[..., 0] * mask).sum(axis=1)
    pair = trans[tags[:, :-1], tags[:, 1:]]
    with np.errstate(invalid="ignore"):
        pair = np.where(mask[:, 1:] > 0, pair, 0.0).sum(axis=1)
    last = tags[rows, lengths - 1]
    return start[tags[:, 0]] + emit + pair + end[last]


def crf_nll(U: Node, trans: Node, start: Node, end: Node, tags: np.ndarray, mask: np.ndarray,
            trans_mask=None, start_mask=None) -> Node:
    """Per-sequence ``log Z - score(gold)`` for emissions ``U (B, T, L)``.

    ``trans_mask``/``start_mask`` are additive constants (0 or -inf) that
    forbid transitions; they receive no gradient and keep the learned
    parameters finite.
    """
    Uv = U.value
    B, T, L = Uv.shape
    tr = trans.value if trans_mask is None else trans.value + trans_mask
    st = start.value if start_mask is None else start.value + start_mask
    en = end.value
    alphas, logz = crf_forward(Uv, tr, st, en, mask)
    gold = gold_path_score(Uv, tr, st, en, tags, mask)
    out = logz - gold
    lengths = mask.sum(axis=1).astype(int)
    rows = np.arange(B)

    def vjp(g):
        betas = crf_backward_scores(Uv, tr, en, mask)
        with np.errstate(invalid="ignore"):
            marg = np.exp(alphas + betas - logz[:, None, None]) * mask[..., None]
        onehot = np.zeros_like(marg)
        np.put_along_axis(onehot, tags[..., None], 1.0, axis=-1)
        onehot *= mask[..., None]
        gU = (marg - onehot) * g[:, None, None]

        if T > 1:
            s = alphas[:, :-1, :, None] + tr[None, None] + (Uv[:, 1:] + betas[:, 1:])[:, :, None, :]
            pair = np.exp(s - logz[:, None, None, None]) * mask[:, 1:, None, None]
            gold_pair = np.zeros((B, T - 1, L, L))
            bi, ti = np.meshgrid(rows, np.arange(T - 1), indexing="ij")
            gold_pair[bi, ti, tags[:, :-1], tags[:, 1:]] = 1.0
            gold_pair *= mask[:, 1:, None, None]
            gT = np.einsum("b,btij->ij", g, pair - gold_pair)
        else:
            gT = np.zeros((L, L))

        first = np.eye(L)[tags[:, 0]]
        gS = (g[:, None] * (marg[:, 0] - first)).sum(axis=0)
        last_alpha = alphas[rows, lengths - 1]
        p_end = np.exp(last_alpha + en - logz[:, None])
        gE = (g[:, None] * (p_end - np.eye(L)[tags[rows, lengths - 1]])).sum(axis=0)
        return gU, gT, gS, gE

    return U.tape.record(out, (U, trans, start, end), vjp)
