"""Deterministic synthetic multi-domain slot-tagging corpus and matching word vectors."""
from __future__ import annotations

import json
import logging
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..numerics import make_rng
from ..tagger import SlotDescription
from . import domains as lib
from .records import DomainDataset, Utterance, load_dataset, save_catalog, save_dataset
from .splits import split_dataset

log = logging.getLogger(__name__)

PLACEHOLDER = re.compile(r"^\{(\w+)\}$")
MIN_POSITIVES = 20


@dataclass
class GeneratorSpec:
    domains: list = field(default_factory=lambda: list(lib.DOMAINS))
    utterances_per_domain: int = 1000
    seed: int = 0
    split_ratios: tuple = (0.8, 0.1, 0.1)
    min_tokens: int = 3
    max_tokens: int = 15
    # optional overrides: {domain: {intent: [template, ...]}}, {slot: [value, ...]}, {slot: description}
    templates: dict = field(default_factory=dict)
    value_pools: dict = field(default_factory=dict)
    descriptions: dict = field(default_factory=dict)

    def domain_templates(self, name) -> dict:
        if name in self.templates:
            return self.templates[name]
        if name in lib.DOMAINS:
            return lib.DOMAINS[name]
        raise ValueError(f"unknown domain {name!r}")

    def pool(self, slot_id):
        return self.value_pools.get(slot_id) or lib.VALUE_POOLS.get(slot_id)

    def description(self, slot_id):
        return (self.descriptions.get(slot_id) or lib.SHARED_SLOTS.get(slot_id)
                or lib.PRIVATE_DESCRIPTIONS.get(slot_id))

    def to_json(self) -> dict:
        d = asdict(self)
        d["split_ratios"] = list(self.split_ratios)
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "GeneratorSpec":
        obj = dict(obj)
        if "split_ratios" in obj:
            obj["split_ratios"] = tuple(obj["split_ratios"])
        return cls(**obj)

    @classmethod
    def load(cls, path) -> "GeneratorSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def template_slots(template) -> list[str]:
    return [m.group(1) for tok in template.split() if (m := PLACEHOLDER.match(tok))]


def domain_catalog(spec: GeneratorSpec, name) -> list[SlotDescription]:
    slots = []
    for intent, templates in spec.domain_templates(name).items():
        for template in templates:
            for slot_id in template_slots(template):
                if spec.pool(slot_id) is None or spec.description(slot_id) is None:
                    raise ValueError(f"{name}/{intent}: template {template!r} references unknown slot {slot_id!r}")
                if slot_id not in slots:
                    slots.append(slot_id)
    return [SlotDescription(s, spec.description(s).split(), name) for s in slots]


_POS_OF = {w: tag for tag, words in lib.POS_LEXICON.items() for w in words}


def coarse_pos(token, slot_id=None) -> str:
    low = token.lower()
    if any(ch.isdigit() for ch in token) or low in lib.NUMBER_WORDS or token.startswith("$"):
        return "NUM"
    if token[:1].isupper():
        return "PROPN"
    if slot_id is None:
        return _POS_OF.get(low, "OTHER")
    if low in lib.VALUE_ADJ:
        return "ADJ"
    if low in lib.VALUE_ADV:
        return "ADV"
    return _POS_OF.get(low, "NOUN")


def render(template, rng, spec: GeneratorSpec):
    tokens, spans, pos = [], [], []
    for tok in template.split():
        m = PLACEHOLDER.match(tok)
        if m is None:
            tokens.append(tok)
            pos.append(coarse_pos(tok))
            continue
        slot_id = m.group(1)
        pool = spec.pool(slot_id)
        value = pool[int(rng.integers(len(pool)))].split()
        spans.append((slot_id, len(tokens), len(tokens) + len(value)))
        tokens.extend(value)
        pos.extend(coarse_pos(v, slot_id) for v in value)
    return tokens, spans, pos


def generate_domain(spec: GeneratorSpec, name, seen_texts: set) -> DomainDataset:
    catalog = domain_catalog(spec, name)
    intents = spec.domain_templates(name)
    rng = make_rng(spec.seed, "corpus", name)
    utterances = []
    attempts = 0
    limit = 50 * spec.utterances_per_domain + 1000
    while len(utterances) < spec.utterances_per_domain:
        attempts += 1
        if attempts > limit:
            raise RuntimeError(f"{name}: could not generate {spec.utterances_per_domain} distinct utterances")
        intent = list(intents)[int(rng.integers(len(intents)))]
        templates = intents[intent]
        tokens, spans, pos = render(templates[int(rng.integers(len(templates)))], rng, spec)
        text = " ".join(tokens)
        if text in seen_texts or not spec.min_tokens <= len(tokens) <= spec.max_tokens:
            continue
        seen_texts.add(text)
        uid = f"{name}-{len(utterances):05d}"
        utterances.append(Utterance(uid, name, intent, tokens, spans, pos))

    for slot in catalog:
        n = sum(1 for u in utterances if slot.slot_id in u.slots())
        if n < MIN_POSITIVES:
            raise ValueError(f"{name}: slot {slot.slot_id} has only {n} positive utterances "
                             f"(need {MIN_POSITIVES}); increase utterances_per_domain")
    train, dev, test = split_dataset(utterances, make_rng(spec.seed, "split", name), spec.split_ratios)
    return DomainDataset(name, catalog, train, dev, test)


def generate_corpus(spec: GeneratorSpec) -> list[DomainDataset]:
    seen: set = set()
    return [generate_domain(spec, name, seen) for name in spec.domains]


def write_corpus(datasets, directory, spec: GeneratorSpec | None = None) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for ds in datasets:
        save_dataset(ds, directory)
    save_catalog([s for ds in datasets for s in ds.catalog], directory / "catalog.tsv")
    if spec is not None:
        with open(directory / "generator_spec.json", "w", encoding="utf-8") as fh:
            json.dump(spec.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    with open(directory / "domains.txt", "w", encoding="utf-8") as fh:
        fh.write("\n".join(ds.name for ds in datasets) + "\n")


def read_corpus(directory) -> list[DomainDataset]:
    directory = Path(directory)
    names = (directory / "domains.txt").read_text(encoding="utf-8").split()
    return [load_dataset(directory, name) for name in names]


# ---------------------------------------------------------------------------
# Word-vector fixture
# ---------------------------------------------------------------------------

def is_oov_value_token(token) -> bool:
    return token in lib.RARE_WORDS or not re.fullmatch(r"[A-Za-z]+", token)


def fixture_words():
    """Carrier words, description words and in-vocabulary value tokens, each with its role."""
    carrier, values, descriptions = set(), {}, {}
    for intents in lib.DOMAINS.values():
        for templates in intents.values():
            for template in templates:
                carrier.update(t for t in template.split() if not PLACEHOLDER.match(t))
    for slot_id, pool in lib.VALUE_POOLS.items():
        for value in pool:
            for tok in value.split():
                if tok not in carrier and not is_oov_value_token(tok):
                    values.setdefault(tok, []).append(slot_id)
    all_desc = {**lib.SHARED_SLOTS, **lib.PRIVATE_DESCRIPTIONS}
    for slot_id, desc in all_desc.items():
        for tok in desc.split():
            descriptions.setdefault(tok, []).append(slot_id)
    return carrier, values, descriptions


def build_vector_fixture(dim=100, seed=2018) -> dict:
    """Clustered random vectors: slot values and the words describing that slot share a centre.

    Words used in one slot description only are pulled toward that slot's
    values, which is what lets a description embedding stand in for a label.
    """
    rng = make_rng(seed, "vectors")
    scale = 0.4
    all_slots = sorted(set(lib.VALUE_POOLS))
    centres = {s: rng.normal(size=dim) for s in all_slots}
    pos_centres = {tag: rng.normal(size=dim) for tag in ("VERB", "ADJ", "ADV", "NOUN", "OTHER")}
    carrier, values, descriptions = fixture_words()

    vectors = {}
    for word in sorted(carrier):
        tag = _POS_OF.get(word.lower(), "OTHER")
        vectors[word] = scale * (0.4 * pos_centres[tag] + rng.normal(size=dim))
    for word in sorted(values):
        centre = np.mean([centres[s] for s in values[word]], axis=0)
        vectors[word] = scale * (0.8 * centre + 0.6 * rng.normal(size=dim))
    for word in sorted(descriptions):
        if word in vectors:
            continue
        owners = descriptions[word]
        if len(owners) == 1:
            vectors[word] = scale * (0.8 * centres[owners[0]] + 0.6 * rng.normal(size=dim))
        else:
            vectors[word] = scale * (0.4 * pos_centres["NOUN"] + rng.normal(size=dim))
    return vectors


def write_vectors(vectors: dict, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for word in sorted(vectors):
            fh.write(word + " " + " ".join(f"{v:.6f}" for v in vectors[word]) + "\n")


def bundled_vectors_path() -> Path:
    return Path(__file__).resolve().parent.parent / "resources" / "vectors100.txt"
