"""End-to-end experiments: base training on source domains, target adaptation,
baseline comparison, variant ablation and learning curves."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .eval import EvalReport, evaluate, mean_std
from .tagger import predict_spans
from .train import (ExperimentPlan, TrainConfig, build_joint_dataset, fine_tune, make_model, target_examples,
                    train_model)

log = logging.getLogger(__name__)

VARIANTS = {
    "ZAT": {},
    "-CRF": {"use_crf": False},
    "-CHAR": {"use_char": False},
    "+WEFT": {"weft": True},
}


@dataclass
class Schedule:
    """Epoch budgets for the three kinds of training run.

    Fine-tuning and from-scratch runs share one budget. With 50 utterances an
    epoch is only a couple of updates, so patience has to be long enough for
    dev F1 to leave zero.
    """
    base: TrainConfig = field(default_factory=lambda: TrainConfig(max_epochs=10, patience=3))
    finetune: TrainConfig = field(default_factory=lambda: TrainConfig(max_epochs=100, patience=15))
    scratch: TrainConfig = field(default_factory=lambda: TrainConfig(max_epochs=100, patience=15))


def predict_all(model, utterances, catalog, seed=0) -> list:
    """Merged span predictions over ``utterances`` as one flat list."""
    if model.kind == "lstm":
        pred = model.predict_spans(utterances)
    else:
        pred = predict_spans(model, utterances, catalog, seed=seed)
    return [s for u in utterances for s in pred[u.id]]


def gold_spans(utterances, slot_ids=None) -> list:
    return [s for u in utterances for s in u.spans if slot_ids is None or s.slot_id in slot_ids]


def test_report(model, dataset, seed=0) -> EvalReport:
    pred = predict_all(model, dataset.test, dataset.catalog, seed)
    return evaluate(pred, gold_spans(dataset.test), dataset.test)


def subset_f1(report: EvalReport, slot_ids) -> float:
    """Micro F1 restricted to ``slot_ids`` using the per-slot counts."""
    from .eval import prf
    rows = [report.per_slot[s] for s in slot_ids if s in report.per_slot]
    return prf(sum(r.tp for r in rows), sum(r.fp for r in rows), sum(r.fn for r in rows))[2]


@dataclass
class Row:
    model: str
    seed: int
    n: int
    f1: float
    shared_f1: float

    def tsv(self) -> str:
        return f"{self.model}\t{self.seed}\t{self.n}\t{self.f1:.6f}\t{self.shared_f1:.6f}"


class Runner:
    """Holds the corpus and vectors for one target domain and caches base models."""

    def __init__(self, plan: ExperimentPlan, datasets: dict, vocab, vectors, schedule: Schedule | None = None):
        self.plan = plan
        self.datasets = datasets
        self.vocab = vocab
        self.vectors = vectors
        self.schedule = schedule or Schedule()
        self.target = datasets[plan.target]
        self.joint = build_joint_dataset(plan, datasets)
        source_slots = {s.slot_id for s in self.joint.catalog}
        self.shared = [s.slot_id for s in self.target.catalog if s.slot_id in source_slots]
        self._bases: dict = {}

    def dims(self, kind) -> dict:
        return getattr(self.plan, kind)

    def base(self, kind, seed, variant="ZAT"):
        key = (kind, seed, variant)
        if key not in self._bases:
            cfg = self.schedule.base.replace(seed=seed, **VARIANTS[variant])
            model = make_model(kind, self.vocab, self.vectors, cfg, self.dims(kind), seed=seed)
            log.info("training %s base (%s, seed %d) on %d examples", kind, variant, seed, len(self.joint.examples))
            self._bases[key], _ = train_model(model, self.joint.examples, self.joint.dev_examples, cfg)
        return self._bases[key]

    def adapt(self, kind, seed, n, variant="ZAT"):
        _, train, dev = target_examples(self.target, n, seed, self.plan.neg_ratio)
        cfg = self.schedule.finetune.replace(seed=seed, **VARIANTS[variant])
        model, _ = fine_tune(self.base(kind, seed, variant), train, dev, cfg)
        return model

    def scratch_lstm(self, seed, n):
        utts, _, _ = target_examples(self.target, n, seed, self.plan.neg_ratio)
        cfg = self.schedule.scratch.replace(seed=seed)
        model = make_model("lstm", self.vocab, self.vectors, cfg, self.dims("lstm"),
                           slot_ids=[s.slot_id for s in self.target.catalog], seed=seed)
        model, _ = train_model(model, utts, self.target.dev, cfg)
        return model

    def row(self, name, model, seed, n) -> Row:
        rep = test_report(model, self.target, seed)
        return Row(name, seed, n, rep.f1, subset_f1(rep, self.shared))

    def transfer(self, kinds=("zat", "ct"), lstm=True) -> list:
        rows = []
        for seed in self.plan.seeds:
            for kind in kinds:
                for n in self.plan.target_sizes:
                    rows.append(self.row(kind, self.adapt(kind, seed, n), seed, n))
                    log.info("%s", rows[-1].tsv())
            if lstm:
                for n in self.plan.target_sizes:
                    if n > 0:
                        rows.append(self.row("lstm", self.scratch_lstm(seed, n), seed, n))
                        log.info("%s", rows[-1].tsv())
        return rows

    def ablate(self, variants=tuple(VARIANTS)) -> list:
        rows = []
        for variant in variants:
            for seed in self.plan.seeds:
                for n in self.plan.target_sizes:
                    rows.append(self.row(variant, self.adapt("zat", seed, n, variant), seed, n))
                    log.info("%s", rows[-1].tsv())
        return rows


def summarize(rows, value="f1") -> dict:
    """``{(model, n): (mean, std)}`` over seeds."""
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.model, r.n), []).append(getattr(r, value))
    return {k: mean_std(v) for k, v in groups.items()}


def model_mean(rows, model, value="f1") -> float:
    return float(np.mean([getattr(r, value) for r in rows if r.model == model]))


def rows_tsv(rows) -> str:
    return "model\tseed\tn\tf1\tshared_f1\n" + "".join(r.tsv() + "\n" for r in rows)


def table_tsv(rows, value="f1") -> str:
    """Models as rows, target sizes as columns, cells ``mean`` and ``std`` in F1 points."""
    summary = summarize(rows, value)
    models = list(dict.fromkeys(r.model for r in rows))
    sizes = sorted({r.n for r in rows})
    lines = ["model\t" + "\t".join(f"n={n}\tstd" for n in sizes)]
    for m in models:
        cells = []
        for n in sizes:
            if (m, n) in summary:
                mu, sd = summary[(m, n)]
                cells += [f"{100 * mu:.2f}", f"{100 * sd:.2f}"]
            else:
                cells += ["-", "-"]
        lines.append(m + "\t" + "\t".join(cells))
    return "\n".join(lines) + "\n"
