"""Training loops, joint-source base training, target fine-tuning and model construction."""
from __future__ import annotations

import copy
import json
import logging
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .baselines import ConceptTagger, CtConfig, LstmTagger, LstmTaggerConfig
from .data.splits import stratified_sample
from .embedding import Vocabulary
from .encoder import ZatConfig, ZatModel
from .numerics import (AdamState, Tape, adam_step, backward, clip_global_norm, load_checkpoint, make_rng,
                       save_checkpoint)
from .tagger import build_slot_examples

log = logging.getLogger(__name__)

MODEL_KINDS = ("zat", "ct", "lstm")


@dataclass
class TrainConfig:
    batch_size: int = 32
    lr: float = 1e-3
    clip_norm: float = 5.0
    max_epochs: int = 100
    patience: int = 5
    seed: int = 0
    use_crf: bool = True
    use_char: bool = True
    weft: bool = False
    dropout_keep: float = 0.8

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if not 0.0 < self.dropout_keep <= 1.0:
            raise ValueError("dropout_keep must be in (0, 1]")

    def replace(self, **kw) -> "TrainConfig":
        return TrainConfig(**{**asdict(self), **kw})


@dataclass
class ExperimentPlan:
    target: str
    sources: list
    take: int = 2000
    target_sizes: list = field(default_factory=lambda: [0, 50, 100])
    seeds: list = field(default_factory=lambda: [0, 1, 2])
    neg_ratio: int = 3
    data_seed: int = 0
    dev_take: int | None = None
    # per-model dimension overrides, e.g. {"hidden": 48}
    zat: dict = field(default_factory=dict)
    ct: dict = field(default_factory=dict)
    lstm: dict = field(default_factory=dict)

    def __post_init__(self):
        self.sources = list(self.sources)
        if self.target in self.sources:
            raise ValueError(f"target domain {self.target!r} is also a source")
        if not self.sources:
            raise ValueError("at least one source domain is required")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj) -> "ExperimentPlan":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown plan fields: {sorted(unknown)}")
        return cls(**obj)


@dataclass
class TrainLog:
    records: list = field(default_factory=list)
    best_epoch: int = 0
    best_metric: float = float("-inf")

    @property
    def epochs(self) -> int:
        return len(self.records)

    def lines(self) -> list:
        return [json.dumps(r, sort_keys=True) for r in self.records]

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.writelines(line + "\n" for line in self.lines())


# ---------------------------------------------------------------------------
# Model construction
# ---------------------------------------------------------------------------

def make_model(kind, vocab, vectors, config: TrainConfig, dims: dict | None = None, slot_ids=None, seed=None):
    """Build a fresh model of ``kind`` whose ablation flags come from ``config``."""
    dims = dict(dims or {})
    seed = config.seed if seed is None else seed
    if kind == "zat":
        cfg = ZatConfig(**{**dims, "use_char": config.use_char, "use_crf": config.use_crf, "weft": config.weft})
        return ZatModel(vocab, vectors, cfg, seed=seed)
    if kind == "ct":
        return ConceptTagger(vocab, vectors, CtConfig(**{**dims, "weft": config.weft}), seed=seed)
    if kind == "lstm":
        if slot_ids is None:
            raise ValueError("the LSTM tagger needs the target slot inventory")
        cfg = LstmTaggerConfig(**{**dims, "dropout_keep": config.dropout_keep})
        return LstmTagger(vocab, vectors, slot_ids, cfg, seed=seed)
    raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")


def clone(model):
    other = copy.copy(model)
    other.params = dict(model.params)
    return other


# ---------------------------------------------------------------------------
# Data assembly
# ---------------------------------------------------------------------------

@dataclass
class JointDataset:
    utterances: list
    catalog: list
    examples: list
    dev_examples: list


def united_catalog(datasets) -> list:
    seen, out = set(), []
    for ds in datasets:
        for slot in ds.catalog:
            if slot.slot_id not in seen:
                seen.add(slot.slot_id)
                out.append(slot)
    return out


def build_joint_dataset(plan: ExperimentPlan, datasets: dict) -> JointDataset:
    """Per-source stratified samples of ``plan.take`` training utterances, joined and
    expanded into slot examples with negative sampling."""
    missing = [s for s in plan.sources if s not in datasets]
    if missing:
        raise ValueError(f"source domains not in corpus: {missing}")
    sources = [datasets[s] for s in plan.sources]
    utterances, dev = [], []
    for ds in sources:
        if len(ds.train) < plan.take:
            raise ValueError(f"source {ds.name} has {len(ds.train)} training utterances, need {plan.take}")
        utterances += stratified_sample(ds.train, plan.take, make_rng(plan.data_seed, "take", ds.name))
        n_dev = len(ds.dev) if plan.dev_take is None else min(plan.dev_take, len(ds.dev))
        dev += stratified_sample(ds.dev, n_dev, make_rng(plan.data_seed, "dev-take", ds.name))
    if plan.target in datasets:
        target_ids = {u.id for u in datasets[plan.target].all_utterances()}
        leaked = target_ids & {u.id for u in utterances + dev}
        if leaked:
            raise ValueError(f"{len(leaked)} target-domain utterances leaked into the joint data")
    catalog = united_catalog(sources)
    examples = build_slot_examples(utterances, catalog, make_rng(plan.data_seed, "examples", "joint"),
                                   plan.neg_ratio)
    dev_examples = build_slot_examples(dev, catalog, make_rng(plan.data_seed, "examples", "joint-dev"),
                                       plan.neg_ratio)
    return JointDataset(utterances, catalog, examples, dev_examples)


def target_examples(dataset, n, seed, neg_ratio=3):
    """``n`` stratified target training utterances and their slot examples, plus dev examples."""
    utts = stratified_sample(dataset.train, n, make_rng(seed, "target-take", dataset.name))
    train = build_slot_examples(utts, dataset.catalog, make_rng(seed, "examples", dataset.name, n),
                                neg_ratio) if utts else []
    dev = build_slot_examples(dataset.dev, dataset.catalog, make_rng(seed, "examples", dataset.name, "dev"),
                              neg_ratio)
    return utts, train, dev


# ---------------------------------------------------------------------------
# Loops
# ---------------------------------------------------------------------------

def train_epoch(model, items, config: TrainConfig, state: AdamState, epoch: int) -> float:
    order = make_rng(config.seed, "epoch", epoch).permutation(len(items))
    drop_rng = make_rng(config.seed, "dropout", epoch)
    trainable = model.trainable_names()
    total, count = 0.0, 0
    for k, lo in enumerate(range(0, len(items), config.batch_size)):
        batch = model.collate([items[i] for i in order[lo:lo + config.batch_size]])
        tape = Tape()
        P = model.bind(tape)
        loss = model.loss(tape, P, batch, drop_rng)
        value = float(loss.value)
        if not np.isfinite(value):
            raise FloatingPointError(f"non-finite training loss {value} at epoch {epoch}, batch {k}")
        grads = backward(tape, loss)
        g = clip_global_norm({name: grads[P[name].id] for name in trainable}, config.clip_norm)
        updated, state = adam_step({name: model.params[name] for name in trainable}, g, state)
        model.params.update(updated)
        total += value * batch.size
        count += batch.size
    return total / count


def train_model(model, examples, dev, config: TrainConfig, dev_metric=None, log_path=None):
    """Adam training with per-epoch dev evaluation and early stopping.

    ``dev_metric(model) -> float`` defaults to ``model.dev_f1(dev)``. The model
    is left holding the parameters of its best epoch. Returns ``(model, TrainLog)``.
    """
    if not examples:
        raise ValueError("no training examples")
    if dev_metric is None:
        if not dev:
            raise ValueError("no dev examples for early stopping")
        dev_metric = lambda m: m.dev_f1(dev)  # noqa: E731
    items = model.example_items(examples)
    state = AdamState(lr=config.lr)
    history = TrainLog()
    best_params = dict(model.params)
    stale = 0
    for epoch in range(1, config.max_epochs + 1):
        t0 = time.perf_counter()
        loss = train_epoch(model, items, config, state, epoch)
        metric = float(dev_metric(model))
        improved = metric > history.best_metric
        if improved:
            history.best_metric, history.best_epoch = metric, epoch
            best_params = dict(model.params)
            stale = 0
        else:
            stale += 1
        history.records.append({"epoch": epoch, "train_loss": round(loss, 6), "dev_metric": round(metric, 6),
                                "best": improved})
        log.info("epoch %d loss %.4f dev %.4f%s (%.1fs)", epoch, loss, metric, " *" if improved else "",
                 time.perf_counter() - t0)
        if stale >= config.patience:
            break
    model.params = best_params
    if log_path is not None:
        history.write(log_path)
    return model, history


def fine_tune(base, examples, dev, config: TrainConfig, dev_metric=None, log_path=None):
    """Continue training a copy of ``base`` on target data; no layer is re-initialised.

    With no target examples the base model itself is returned (zero-shot).
    """
    if not examples:
        return base, TrainLog()
    return train_model(clone(base), examples, dev, config, dev_metric, log_path)


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------

def save_model(model, path, extra: dict | None = None) -> None:
    meta = model.meta()
    if extra:
        meta["extra"] = extra
    save_checkpoint(path, model.params, meta)


def load_model(path):
    params, meta = load_checkpoint(path)
    vocab = Vocabulary(meta["vocab"])
    kind = meta["kind"]
    if kind == "zat":
        return ZatModel(vocab, None, ZatConfig(**meta["config"]), params=params)
    if kind == "ct":
        return ConceptTagger(vocab, None, CtConfig(**meta["config"]), params=params)
    if kind == "lstm":
        return LstmTagger(vocab, None, meta["slots"], LstmTaggerConfig(**meta["config"]), params=params)
    raise ValueError(f"{path}: unknown model kind {kind!r}")
