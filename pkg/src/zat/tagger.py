"""Per-slot zero-shot tagging: BIO/span conversion, prediction, merging, example sampling."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import crf
from .numerics import make_rng

log = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class SlotSpan:
    slot_id: str
    start: int
    end: int
    utterance_id: str | None = None

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"bad span [{self.start}, {self.end})")

    def overlaps(self, other) -> bool:
        return self.start < other.end and other.start < self.end

    def __len__(self):
        return self.end - self.start


@dataclass(frozen=True)
class SlotDescription:
    slot_id: str
    description_tokens: tuple
    domain: str = ""

    def __post_init__(self):
        object.__setattr__(self, "description_tokens", tuple(self.description_tokens))
        if not self.description_tokens:
            raise ValueError(f"slot {self.slot_id!r} has an empty description")


@dataclass
class SlotExample:
    utterance: object
    slot: SlotDescription
    tags: np.ndarray = field(repr=False)
    polarity: str = "positive"

    @property
    def tokens(self):
        return self.utterance.tokens


def spans_to_bio(spans, T) -> list[str]:
    ids = np.full(T, crf.O, dtype=int)
    for s in sorted(spans, key=lambda s: (s.start, s.end)):
        if s.end > T:
            raise ValueError(f"span {s} exceeds sequence length {T}")
        if (ids[s.start:s.end] != crf.O).any():
            raise ValueError(f"overlapping span {s}")
        ids[s.start] = crf.B
        ids[s.start + 1:s.end] = crf.I
    return crf.ids_to_tags(ids)


def bio_to_spans(tags, slot_id="", utterance_id=None) -> list[SlotSpan]:
    """Maximal ``B I*`` runs; an I after O or at the start opens a span like a B."""
    ids = crf.repair(crf.tags_to_ids(tags))
    spans, start = [], None
    for t, label in enumerate(ids):
        if label != crf.I and start is not None:
            spans.append(SlotSpan(slot_id, start, t, utterance_id))
            start = None
        if label == crf.B:
            start = t
    if start is not None:
        spans.append(SlotSpan(slot_id, start, len(ids), utterance_id))
    return spans


def merge_slot_predictions(per_slot: dict, rng, utterance_id=None) -> list[SlotSpan]:
    """Union of per-slot spans with overlaps resolved at random.

    Spans are sorted canonically, grouped into overlap-connected components,
    and one span per multi-span component survives, drawn uniformly.
    """
    lengths = {len(tags) for tags in per_slot.values()}
    if len(lengths) > 1:
        raise ValueError(f"per-slot predictions disagree on length: {sorted(lengths)}")
    spans = sorted(
        (s for slot_id, tags in per_slot.items() for s in bio_to_spans(tags, slot_id, utterance_id)),
        key=lambda s: (s.start, s.end, s.slot_id),
    )
    merged, component, reach = [], [], -1
    for s in spans + [None]:
        if s is not None and component and s.start < reach:
            component.append(s)
            reach = max(reach, s.end)
            continue
        if len(component) == 1:
            merged.append(component[0])
        elif component:
            merged.append(component[int(rng.integers(len(component)))])
        if s is not None:
            component, reach = [s], s.end
    return merged


def build_slot_examples(utterances, catalog, rng, neg_ratio=3) -> list[SlotExample]:
    """Every positive (utterance, slot) pair plus sampled negatives at ``neg_ratio`` per positive."""
    if neg_ratio < 0:
        raise ValueError("neg_ratio must be >= 0")
    examples = []
    for slot in catalog:
        pos = [u for u in utterances if slot.slot_id in u.slots()]
        if not pos:
            log.info("slot %s has no positive utterances; no examples built", slot.slot_id)
            continue
        cands = [u for u in utterances if slot.slot_id not in u.slots()]
        k = min(int(neg_ratio * len(pos)), len(cands))
        picked = np.sort(rng.choice(len(cands), size=k, replace=False)) if k else []
        for u in pos:
            ids = crf.tags_to_ids(spans_to_bio(u.spans_for(slot.slot_id), len(u)))
            examples.append(SlotExample(u, slot, ids, "positive"))
        for i in picked:
            u = cands[int(i)]
            examples.append(SlotExample(u, slot, np.full(len(u), crf.O, dtype=int), "negative"))
    return examples


def predict_slot(utterance, slot: SlotDescription, model) -> list[str]:
    tokens = getattr(utterance, "tokens", utterance)
    if len(tokens) == 0:
        raise ValueError("cannot tag an empty utterance")
    return crf.ids_to_tags(model.predict_tags([(list(tokens), slot)])[0])


def predict_spans(model, utterances, catalog, seed=0) -> dict:
    """Tag every utterance with every catalog slot and merge, keyed by utterance id."""
    pairs = [(u.tokens, slot) for u in utterances for slot in catalog]
    tags = model.predict_tags(pairs)
    out, k = {}, 0
    for u in utterances:
        per_slot = {}
        for slot in catalog:
            per_slot[slot.slot_id] = tags[k]
            k += 1
        out[u.id] = merge_slot_predictions(per_slot, make_rng(seed, "merge", u.id), u.id)
    return out
