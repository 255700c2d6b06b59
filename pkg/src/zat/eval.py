"""Exact-match span scoring, error breakdowns by position/length/POS, attention dumps."""
from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def prf(tp, fp, fn) -> tuple[float, float, float]:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


@dataclass
class SlotScore:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self):
        return prf(self.tp, self.fp, self.fn)[0]

    @property
    def recall(self):
        return prf(self.tp, self.fp, self.fn)[1]

    @property
    def f1(self):
        return prf(self.tp, self.fp, self.fn)[2]

    def to_json(self):
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "precision": round(self.precision, 6),
                "recall": round(self.recall, 6), "f1": round(self.f1, 6)}


@dataclass
class EvalReport(SlotScore):
    per_slot: dict = field(default_factory=dict)
    by_position: dict = field(default_factory=dict)
    by_length: dict = field(default_factory=dict)
    by_pos_tag: dict = field(default_factory=dict)
    false_positives: list = field(default_factory=list, repr=False)
    false_negatives: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        out = super().to_json()
        out["per_slot"] = {k: v.to_json() for k, v in sorted(self.per_slot.items())}
        out["by_position"] = {str(k): round(v, 6) for k, v in sorted(self.by_position.items())}
        out["by_length"] = {str(k): round(v, 6) for k, v in sorted(self.by_length.items())}
        out["by_pos_tag"] = {k: [c, round(s, 6)] for k, (c, s) in sorted(self.by_pos_tag.items())}
        return out

    def text(self) -> str:
        lines = [f"{'slot':<24}{'tp':>6}{'fp':>6}{'fn':>6}{'prec':>9}{'rec':>9}{'f1':>9}"]
        rows = sorted(self.per_slot.items()) + [("micro", self)]
        for name, s in rows:
            lines.append(f"{name:<24}{s.tp:>6}{s.fp:>6}{s.fn:>6}"
                         f"{100 * s.precision:>9.2f}{100 * s.recall:>9.2f}{100 * s.f1:>9.2f}")
        for title, hist in (("error rate by span start", self.by_position),
                            ("error rate by span length", self.by_length)):
            if hist:
                lines.append("")
                lines.append(title)
                lines += [f"  {k:>3}  {v:.4f}" for k, v in sorted(hist.items())]
        if self.by_pos_tag:
            lines.append("")
            lines.append("erroneous tokens by POS tag (count, share of tag occurrences)")
            lines += [f"  {k:<8}{c:>6}  {s:.4f}" for k, (c, s) in sorted(self.by_pos_tag.items())]
        return "\n".join(lines) + "\n"


def _key(s):
    return (s.utterance_id, s.slot_id, s.start, s.end)


def span_f1(pred, gold) -> EvalReport:
    """Micro and per-slot P/R/F1; a prediction counts only if slot, start and end match a gold span."""
    remaining = Counter(_key(s) for s in gold)
    report = EvalReport()
    fps = []
    for s in pred:
        k = _key(s)
        slot = report.per_slot.setdefault(s.slot_id, SlotScore())
        if remaining[k] > 0:
            remaining[k] -= 1
            report.tp += 1
            slot.tp += 1
        else:
            report.fp += 1
            slot.fp += 1
            fps.append(s)
    unmatched = Counter(remaining)
    fns = []
    for s in gold:
        k = _key(s)
        if unmatched[k] > 0:
            unmatched[k] -= 1
            fns.append(s)
            report.fn += 1
            report.per_slot.setdefault(s.slot_id, SlotScore()).fn += 1
        else:
            report.per_slot.setdefault(s.slot_id, SlotScore())
    report.false_positives = fps
    report.false_negatives = fns
    return report


def _missed(pred, gold) -> list:
    return span_f1(pred, gold).false_negatives


def _bucket_error_rate(gold, missed, key) -> dict:
    total = Counter(key(s) for s in gold)
    errors = Counter(key(s) for s in missed)
    return {k: errors[k] / n for k, n in sorted(total.items())}


def error_by_position(pred, gold) -> dict:
    """Start index -> share of gold spans starting there that were not predicted exactly."""
    return _bucket_error_rate(gold, _missed(pred, gold), lambda s: s.start)


def error_by_length(pred, gold) -> dict:
    """Span length -> share of gold spans of that length that were not predicted exactly."""
    return _bucket_error_rate(gold, _missed(pred, gold), lambda s: s.end - s.start)


def error_counts(pred, gold, key) -> dict:
    """Number of missed gold spans per bucket."""
    return dict(sorted(Counter(key(s) for s in _missed(pred, gold)).items()))


def erroneous_tokens(pred, gold) -> set:
    """``(utterance_id, position)`` of every token covered by a false-positive or false-negative span."""
    rep = span_f1(pred, gold)
    return {(s.utterance_id, t) for s in rep.false_positives + rep.false_negatives for t in range(s.start, s.end)}


def error_by_pos_tag(pred, gold, utterances, min_tag_count=0, min_error_share=0.0) -> dict:
    """POS tag -> (erroneous token count, count / occurrences of the tag).

    Each token inside a false-positive or false-negative span counts once.
    Tags seen at most ``min_tag_count`` times, or holding no more than
    ``min_error_share`` of all erroneous tokens, are dropped.
    """
    by_id = {u.id: u for u in utterances}
    freq = Counter()
    for u in utterances:
        if not u.pos or len(u.pos) != len(u.tokens):
            raise ValueError(f"utterance {u.id} has no POS tags")
        freq.update(u.pos)
    counts = Counter()
    for uid, t in erroneous_tokens(pred, gold):
        if uid not in by_id:
            raise ValueError(f"span references unknown utterance {uid!r}")
        counts[by_id[uid].pos[t]] += 1
    total = sum(counts.values())
    return {tag: (c, c / freq[tag]) for tag, c in sorted(counts.items())
            if freq[tag] > min_tag_count and c / total > min_error_share}


def evaluate(pred, gold, utterances=None) -> EvalReport:
    rep = span_f1(pred, gold)
    rep.by_position = error_by_position(pred, gold)
    rep.by_length = error_by_length(pred, gold)
    if utterances is not None:
        rep.by_pos_tag = error_by_pos_tag(pred, gold, utterances)
    return rep


def write_report(report: EvalReport, directory, stem="report") -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / f"{stem}.txt").write_text(report.text(), encoding="utf-8")
    with open(directory / f"{stem}.json", "w", encoding="utf-8") as fh:
        json.dump(report.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def mean_std(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    return float(v.mean()), float(v.std(ddof=1)) if len(v) > 1 else 0.0


# ---------------------------------------------------------------------------
# Attention dumps
# ---------------------------------------------------------------------------

def write_attention(A, row_tokens, col_tokens, path) -> None:
    A = np.asarray(A)
    if A.shape != (len(row_tokens), len(col_tokens)):
        raise ValueError(f"matrix {A.shape} does not match {len(row_tokens)}x{len(col_tokens)} headers")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join([""] + list(col_tokens)) + "\n")
        for tok, row in zip(row_tokens, A):
            fh.write("\t".join([tok] + [f"{v:.6f}" for v in row]) + "\n")


def dump_attention(utterance, slot, model, path) -> np.ndarray:
    """Write the ``T x J`` attention matrix of ``model`` for one utterance/slot pair as TSV."""
    tokens = list(getattr(utterance, "tokens", utterance))
    A = model.attention_weights(tokens, slot)
    write_attention(A, tokens, slot.description_tokens, path)
    return A


def load_attention(path) -> tuple[list, list, np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")[1:]
        rows, values = [], []
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            rows.append(parts[0])
            values.append([float(v) for v in parts[1:]])
    return rows, header, np.array(values).reshape(len(rows), len(header))


def group_by_utterance(spans) -> dict:
    out = defaultdict(list)
    for s in spans:
        out[s.utterance_id].append(s)
    return dict(out)
