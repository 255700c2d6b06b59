"""Intent-stratified splitting and subsampling."""
from __future__ import annotations

from collections import defaultdict

import numpy as np


def by_intent(utterances) -> dict:
    groups = defaultdict(list)
    for u in utterances:
        groups[u.intent].append(u)
    return dict(sorted(groups.items()))


def largest_remainder(weights, total) -> list[int]:
    """Integer allocation of ``total`` proportional to ``weights`` (Hamilton's method)."""
    weights = np.asarray(weights, dtype=float)
    quotas = weights / weights.sum() * total
    alloc = np.floor(quotas).astype(int)
    rest = int(total - alloc.sum())
    # stable sort keeps ties in stratum order
    order = np.argsort(-(quotas - alloc), kind="stable")
    alloc[order[:rest]] += 1
    return alloc.tolist()


def split_dataset(utterances, rng, ratios=(0.8, 0.1, 0.1)):
    """Disjoint, exhaustive (train, dev, test) split, stratified by intent."""
    if not utterances:
        raise ValueError("cannot split an empty dataset")
    if abs(sum(ratios) - 1.0) > 1e-9 or any(r < 0 for r in ratios):
        raise ValueError(f"ratios must be non-negative and sum to 1, got {ratios}")
    parts = ([], [], [])
    for intent, group in by_intent(utterances).items():
        order = rng.permutation(len(group))
        sizes = largest_remainder(ratios, len(group))
        bounds = np.cumsum([0] + sizes)
        for k in range(3):
            parts[k].extend(group[i] for i in order[bounds[k]:bounds[k + 1]])
    return parts


def stratified_sample(train, n, rng):
    """Intent-proportional subset of size ``n``.

    Each stratum is permuted once by ``rng`` and its first ``k`` members are
    taken, so with equal seeds a larger sample contains a smaller one whenever
    the per-intent allocation grows with ``n``.
    """
    if n > len(train):
        raise ValueError(f"cannot sample {n} from {len(train)} utterances")
    if n < 0:
        raise ValueError("sample size must be non-negative")
    groups = by_intent(train)
    counts = largest_remainder([len(g) for g in groups.values()], n) if n else [0] * len(groups)
    chosen = set()
    for (intent, group), k in zip(groups.items(), counts):
        order = rng.permutation(len(group))
        chosen.update(group[i].id for i in order[:k])
    return [u for u in train if u.id in chosen]
