"""Utterance and dataset records with their line-oriented file formats.

Corpus files hold one JSON object per line::

    {"id": "deals-00017", "domain": "deals", "intent": "find_deals",
     "tokens": [...], "spans": [["category", 4, 5]], "pos": [...]}

Slot catalogs are tab-separated ``slot_id<TAB>domain<TAB>description``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..tagger import SlotDescription, SlotSpan


class RecordError(ValueError):
    pass


@dataclass
class Utterance:
    id: str
    domain: str
    intent: str
    tokens: list
    spans: list = field(default_factory=list)
    pos: list = field(default_factory=list)

    def __post_init__(self):
        self.spans = [s if isinstance(s, SlotSpan) else SlotSpan(s[0], int(s[1]), int(s[2]), self.id)
                      for s in self.spans]
        validate_utterance(self)

    def __len__(self):
        return len(self.tokens)

    def slots(self) -> set:
        return {s.slot_id for s in self.spans}

    def spans_for(self, slot_id) -> list:
        return [s for s in self.spans if s.slot_id == slot_id]

    @property
    def text(self) -> str:
        return " ".join(self.tokens)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "domain": self.domain,
            "intent": self.intent,
            "tokens": list(self.tokens),
            "spans": [[s.slot_id, s.start, s.end] for s in self.spans],
            "pos": list(self.pos),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Utterance":
        return cls(obj["id"], obj["domain"], obj["intent"], list(obj["tokens"]),
                   [tuple(s) for s in obj.get("spans", [])], list(obj.get("pos", [])))


def validate_utterance(u: Utterance) -> None:
    T = len(u.tokens)
    if T == 0:
        raise RecordError(f"utterance {u.id}: no tokens")
    for s in u.spans:
        if not 0 <= s.start < s.end <= T:
            raise RecordError(f"utterance {u.id}: span {s.slot_id}[{s.start}:{s.end}] out of bounds (T={T})")
    ordered = sorted(u.spans, key=lambda s: (s.start, s.end))
    for a, b in zip(ordered, ordered[1:]):
        if b.start < a.end:
            raise RecordError(f"utterance {u.id}: overlapping spans {a.slot_id} and {b.slot_id}")
    if u.pos and len(u.pos) != T:
        raise RecordError(f"utterance {u.id}: {len(u.pos)} POS tags for {T} tokens")


@dataclass
class DomainDataset:
    name: str
    catalog: list
    train: list = field(default_factory=list)
    dev: list = field(default_factory=list)
    test: list = field(default_factory=list)

    def __post_init__(self):
        known = {s.slot_id for s in self.catalog}
        seen = set()
        for split in ("train", "dev", "test"):
            for u in getattr(self, split):
                missing = u.slots() - known
                if missing:
                    raise RecordError(f"{self.name}/{split} {u.id}: slots {sorted(missing)} not in catalog")
                if u.id in seen:
                    raise RecordError(f"{self.name}: utterance {u.id} appears in two splits")
                seen.add(u.id)

    def slot(self, slot_id) -> SlotDescription:
        for s in self.catalog:
            if s.slot_id == slot_id:
                return s
        raise KeyError(slot_id)

    def all_utterances(self) -> list:
        return self.train + self.dev + self.test


def save_utterances(utterances, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for u in utterances:
            fh.write(json.dumps(u.to_json(), ensure_ascii=False, sort_keys=True) + "\n")


def load_utterances(path) -> list:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(Utterance.from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, IndexError, RecordError) as exc:
                raise RecordError(f"{path}: record {lineno}: {exc}") from exc
    return out


def save_catalog(catalog, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in catalog:
            fh.write(f"{s.slot_id}\t{s.domain}\t{' '.join(s.description_tokens)}\n")


def load_catalog(path) -> list:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3:
                raise RecordError(f"{path}: line {lineno}: expected 3 tab-separated fields")
            out.append(SlotDescription(parts[0], parts[2].split(), parts[1]))
    return out


def save_dataset(dataset: DomainDataset, directory) -> None:
    """Write ``<name>.{train,dev,test}.jsonl`` and ``<name>.catalog.tsv`` into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_catalog(dataset.catalog, directory / f"{dataset.name}.catalog.tsv")
    for split in ("train", "dev", "test"):
        save_utterances(getattr(dataset, split), directory / f"{dataset.name}.{split}.jsonl")


def load_dataset(directory, name) -> DomainDataset:
    directory = Path(directory)
    catalog = [s for s in load_catalog(directory / f"{name}.catalog.tsv")]
    splits = {split: load_utterances(directory / f"{name}.{split}.jsonl") for split in ("train", "dev", "test")}
    return DomainDataset(name, catalog, **splits)
