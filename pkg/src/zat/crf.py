"""Linear-chain CRF over the per-slot tagset {B, I, O}.

Single-instance functions take emission scores ``U`` laid out as
``(L, T)``: one row per label, one column per token. Batched helpers used by
the models take ``(B, T, L)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .numerics.ops import _lse, crf_forward

LABELS = ("B", "I", "O")
B, I, O = 0, 1, 2
NUM_LABELS = 3
MAX_BRUTE_FORCE_T = 10


def transition_mask(enabled: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Additive masks forbidding O->I and start->I."""
    trans = np.zeros((NUM_LABELS, NUM_LABELS))
    start = np.zeros(NUM_LABELS)
    if enabled:
        trans[O, I] = -np.inf
        start[I] = -np.inf
    return trans, start


@dataclass
class CrfParams:
    transitions: np.ndarray
    start: np.ndarray
    end: np.ndarray
    masked: bool = True

    @classmethod
    def zeros(cls, masked=True):
        return cls(np.zeros((3, 3)), np.zeros(3), np.zeros(3), masked)

    @classmethod
    def from_params(cls, params: dict, prefix="crf", masked=True):
        return cls(params[f"{prefix}_trans"], params[f"{prefix}_start"], params[f"{prefix}_end"], masked)

    def effective(self):
        """Transition, start and end scores with the structural mask applied."""
        tm, sm = transition_mask(self.masked)
        return self.transitions + tm, self.start + sm, self.end


def tags_to_ids(tags) -> np.ndarray:
    return np.array([t if isinstance(t, (int, np.integer)) else LABELS.index(t) for t in tags], dtype=int)


def ids_to_tags(ids) -> list[str]:
    return [LABELS[int(i)] for i in ids]


def is_valid(tags) -> bool:
    """True when no I starts the sequence or follows an O."""
    prev = O
    for t in tags_to_ids(tags):
        if t == I and prev == O:
            return False
        prev = t
    return True


def _check(U, y=None):
    U = np.asarray(U, dtype=np.float64)
    if U.ndim != 2 or U.shape[0] != NUM_LABELS or U.shape[1] < 1:
        raise ValueError(f"emission scores must be (3, T) with T >= 1, got {U.shape}")
    if y is not None and len(y) != U.shape[1]:
        raise ValueError(f"tag sequence length {len(y)} does not match T={U.shape[1]}")
    return U


def sequence_score(U, crf: CrfParams, y) -> float:
    U = _check(U, y)
    trans, start, end = crf.effective()
    y = tags_to_ids(y)
    score = start[y[0]] + end[y[-1]] + U[y, np.arange(len(y))].sum()
    score += sum(trans[a, b] for a, b in zip(y[:-1], y[1:]))
    return float(score)


def log_partition(U, crf: CrfParams) -> float:
    U = _check(U)
    trans, start, end = crf.effective()
    _, logz = crf_forward(U.T[None], trans, start, end, np.ones((1, U.shape[1])))
    return float(logz[0])


def crf_nll(U, crf: CrfParams, gold) -> float:
    """Negative log-likelihood ``log Z - score(gold)``; gold must be a valid BIO sequence."""
    if not is_valid(gold):
        raise ValueError(f"invalid BIO gold sequence: {ids_to_tags(tags_to_ids(gold))}")
    return log_partition(U, crf) - sequence_score(U, crf, gold)


def viterbi_batch(U, trans, start, end, mask):
    """Batched max-decoding on ``U (B, T, L)``; ties go to the lowest label index."""
    Bn, T, L = U.shape
    delta = start + U[:, 0]
    backptr = np.zeros((Bn, T, L), dtype=int)
    for t in range(1, T):
        s = delta[:, :, None] + trans[None]
        bp = np.argmax(s, axis=1)
        new = np.take_along_axis(s, bp[:, None, :], axis=1)[:, 0] + U[:, t]
        m = mask[:, t, None] > 0
        delta = np.where(m, new, delta)
        backptr[:, t] = np.where(m, bp, np.arange(L)[None])
    final = delta + end
    best = np.argmax(final, axis=1)
    scores = final[np.arange(Bn), best]
    paths = np.zeros((Bn, T), dtype=int)
    paths[:, T - 1] = best
    for t in range(T - 1, 0, -1):
        paths[:, t - 1] = backptr[np.arange(Bn), t, paths[:, t]]
    return paths, scores


def viterbi_decode(U, crf: CrfParams) -> tuple[list[str], float]:
    U = _check(U)
    trans, start, end = crf.effective()
    paths, scores = viterbi_batch(U.T[None], trans, start, end, np.ones((1, U.shape[1])))
    return ids_to_tags(paths[0]), float(scores[0])


def _enumerate(U):
    T = U.shape[1]
    if T > MAX_BRUTE_FORCE_T:
        raise ValueError(f"brute force limited to T <= {MAX_BRUTE_FORCE_T}, got {T}")
    return itertools.product(range(NUM_LABELS), repeat=T)


def brute_force_decode(U, crf: CrfParams) -> tuple[list[str], float]:
    U = _check(U)
    best, best_score = None, -np.inf
    for y in _enumerate(U):
        s = sequence_score(U, crf, y)
        if s > best_score:
            best, best_score = y, s
    return ids_to_tags(best), best_score


def brute_force_logZ(U, crf: CrfParams) -> float:
    U = _check(U)
    scores = np.array([sequence_score(U, crf, y) for y in _enumerate(U)])
    return float(_lse(scores, 0))


def repair(ids) -> np.ndarray:
    """Turn every orphan I (at the start or after O) into B."""
    ids = np.array(ids, dtype=int)
    prev = O
    for t, label in enumerate(ids):
        if label == I and prev == O:
            ids[t] = B
        prev = ids[t]
    return ids
