"""Command-line entry point: ``zat <command> [--flags]``.

Every command writes ``manifest.json`` next to its outputs, recording the
inputs (with content hashes), the resolved configuration and its hash.
Outputs contain no timestamps, so a rerun with the same manifest reproduces
them byte for byte.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from .data import GeneratorSpec, bundled_vectors_path, generate_corpus, read_corpus, write_corpus
from .data.records import RecordError, load_catalog
from .embedding import load_pretrained
from .eval import dump_attention, evaluate, write_report
from .experiments import (VARIANTS, Runner, Schedule, gold_spans, predict_all, rows_tsv, table_tsv,
                          test_report)
from .tagger import SlotDescription, merge_slot_predictions
from .numerics import make_rng
from .train import (ExperimentPlan, TrainConfig, build_joint_dataset, fine_tune, load_model, make_model,
                    save_model, target_examples, train_model)

log = logging.getLogger("zat")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Shared plumbing
# ---------------------------------------------------------------------------

def file_hash(path) -> str:
    h = hashlib.sha256()
    path = Path(path)
    files = sorted(p for p in path.rglob("*") if p.is_file()) if path.is_dir() else [path]
    for f in files:
        if f.name == "manifest.json":
            continue
        h.update(str(f.relative_to(path) if path.is_dir() else f.name).encode())
        h.update(f.read_bytes())
    return h.hexdigest()


def config_hash(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


def write_manifest(out: Path, command: str, inputs: dict, config: dict, outputs: list) -> None:
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "inputs": {k: {"path": str(v), "sha256": file_hash(v)} for k, v in sorted(inputs.items()) if v},
        "config": config,
        "config_hash": config_hash(config),
        "outputs": sorted(outputs),
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def existing(path, what) -> Path:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"{what} not found: {p}")
    return p


def read_json(path, what) -> dict:
    try:
        with open(existing(path, what), encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} {path} is not valid JSON: {exc}") from exc


def load_schedule(args) -> Schedule:
    schedule = Schedule()
    if getattr(args, "config", None):
        raw = read_json(args.config, "training config")
        unknown = set(raw) - {"base", "finetune", "scratch"}
        if unknown:
            raise ConfigError(f"unknown training config sections: {sorted(unknown)}")
        for section, overrides in raw.items():
            setattr(schedule, section, getattr(schedule, section).replace(**overrides))
    for section in ("base", "finetune", "scratch"):
        cfg = getattr(schedule, section)
        over = {k: getattr(args, k) for k in ("max_epochs", "patience") if getattr(args, k, None) is not None}
        setattr(schedule, section, cfg.replace(**over))
    return schedule


def load_plan(args) -> ExperimentPlan:
    if getattr(args, "plan", None):
        plan = ExperimentPlan.from_json(read_json(args.plan, "plan"))
    elif getattr(args, "target", None) and getattr(args, "sources", None):
        plan = ExperimentPlan(args.target, args.sources.split(","))
    else:
        raise ConfigError("give --plan FILE or both --target and --sources")
    if getattr(args, "seeds", None):
        plan.seeds = [int(s) for s in args.seeds.split(",")]
    if getattr(args, "take", None):
        plan.take = args.take
    return plan


def load_corpus(args) -> dict:
    return {ds.name: ds for ds in read_corpus(existing(args.corpus, "corpus directory"))}


def load_vectors(args):
    return load_pretrained(existing(args.vectors or bundled_vectors_path(), "word vectors"))


def target_of(datasets, plan):
    if plan.target not in datasets:
        raise ConfigError(f"target domain {plan.target!r} is not in the corpus")
    return datasets[plan.target]


def schedule_json(schedule):
    return {k: asdict(getattr(schedule, k)) for k in ("base", "finetune", "scratch")}


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_gen_data(args):
    spec = GeneratorSpec.load(existing(args.spec, "generator spec")) if args.spec else GeneratorSpec()
    if args.seed is not None:
        spec.seed = args.seed
    if args.utterances is not None:
        spec.utterances_per_domain = args.utterances
    out = Path(args.out)
    datasets = generate_corpus(spec)
    write_corpus(datasets, out, spec)
    write_manifest(out, "gen-data", {"spec": args.spec}, spec.to_json(),
                   [p.name for p in out.iterdir() if p.name != "manifest.json"])
    print(f"wrote {len(datasets)} domains to {out}")


def cmd_train_base(args):
    plan, schedule, datasets = load_plan(args), load_schedule(args), load_corpus(args)
    vocab, emb = load_vectors(args)
    seed = plan.seeds[0] if args.seed is None else args.seed
    joint = build_joint_dataset(plan, datasets)
    cfg = schedule.base.replace(seed=seed, **VARIANTS[args.variant])
    model = make_model(args.model, vocab, emb.matrix, cfg, getattr(plan, args.model), seed=seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model, history = train_model(model, joint.examples, joint.dev_examples, cfg, log_path=out / "train_log.jsonl")
    save_model(model, out / "model.npz", {"plan": plan.to_json(), "variant": args.variant, "seed": seed})
    write_manifest(out, "train-base", {"corpus": args.corpus, "vectors": args.vectors, "plan": args.plan},
                   {"plan": plan.to_json(), "train": asdict(cfg), "model": args.model, "variant": args.variant},
                   ["model.npz", "train_log.jsonl"])
    print(f"{len(joint.utterances)} joint utterances, {len(joint.examples)} slot examples; "
          f"best dev F1 {history.best_metric:.4f} at epoch {history.best_epoch}")


def cmd_finetune(args):
    plan, schedule, datasets = load_plan(args), load_schedule(args), load_corpus(args)
    base = load_model(existing(args.base, "base checkpoint"))
    seed = plan.seeds[0] if args.seed is None else args.seed
    target = target_of(datasets, plan)
    _, train, dev = target_examples(target, args.n, seed, plan.neg_ratio)
    flags = {"use_crf": getattr(base.config, "use_crf", True), "use_char": getattr(base.config, "use_char", True),
             "weft": getattr(base.config, "weft", False)}
    cfg = schedule.finetune.replace(seed=seed, **flags)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model, history = fine_tune(base, train, dev, cfg, log_path=out / "train_log.jsonl" if train else None)
    if not train:
        history.write(out / "train_log.jsonl")
    save_model(model, out / "model.npz", {"target": plan.target, "n": args.n, "seed": seed})
    write_manifest(out, "finetune", {"corpus": args.corpus, "base": args.base, "plan": args.plan},
                   {"plan": plan.to_json(), "train": asdict(cfg), "n": args.n}, ["model.npz", "train_log.jsonl"])
    print(f"fine-tuned on {args.n} target utterances ({len(train)} slot examples)")


def cmd_train_baseline(args):
    if args.kind == "ct":
        args.model, args.variant = "ct", "ZAT"
        return cmd_train_base(args)
    plan, schedule, datasets = load_plan(args), load_schedule(args), load_corpus(args)
    vocab, emb = load_vectors(args)
    seed = plan.seeds[0] if args.seed is None else args.seed
    target = target_of(datasets, plan)
    utts, _, _ = target_examples(target, args.n, seed, plan.neg_ratio)
    if not utts:
        raise ConfigError("the LSTM baseline needs --n > 0 target utterances")
    cfg = schedule.scratch.replace(seed=seed)
    model = make_model("lstm", vocab, emb.matrix, cfg, plan.lstm, slot_ids=[s.slot_id for s in target.catalog],
                       seed=seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model, history = train_model(model, utts, target.dev, cfg, log_path=out / "train_log.jsonl")
    save_model(model, out / "model.npz", {"target": plan.target, "n": args.n, "seed": seed})
    write_manifest(out, "train-baseline", {"corpus": args.corpus, "vectors": args.vectors, "plan": args.plan},
                   {"plan": plan.to_json(), "train": asdict(cfg), "kind": "lstm", "n": args.n},
                   ["model.npz", "train_log.jsonl"])
    print(f"best dev F1 {history.best_metric:.4f} at epoch {history.best_epoch}")


def _domain(args, datasets):
    if args.domain not in datasets:
        raise ConfigError(f"domain {args.domain!r} is not in the corpus")
    return datasets[args.domain]


def cmd_eval(args):
    datasets = load_corpus(args)
    ds = _domain(args, datasets)
    model = load_model(existing(args.checkpoint, "checkpoint"))
    rep = test_report(model, ds, args.seed or 0)
    out = Path(args.out)
    write_report(rep, out)
    write_manifest(out, "eval", {"corpus": args.corpus, "checkpoint": args.checkpoint},
                   {"domain": args.domain, "seed": args.seed or 0}, ["report.txt", "report.json"])
    print(rep.text(), end="")


def cmd_analyze(args):
    datasets = load_corpus(args)
    ds = _domain(args, datasets)
    model = load_model(existing(args.checkpoint, "checkpoint"))
    pred = predict_all(model, ds.test, ds.catalog, args.seed or 0)
    rep = evaluate(pred, gold_spans(ds.test), ds.test)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    gold = gold_spans(ds.test)
    totals = {"start": {}, "length": {}}
    for s in gold:
        totals["start"][s.start] = totals["start"].get(s.start, 0) + 1
        totals["length"][len(s)] = totals["length"].get(len(s), 0) + 1
    for name, hist, key in (("position", rep.by_position, "start"), ("length", rep.by_length, "length")):
        with open(out / f"error_by_{name}.tsv", "w", encoding="utf-8") as fh:
            fh.write(f"{key}\tgold_spans\terror_rate\n")
            fh.writelines(f"{k}\t{totals[key][k]}\t{v:.6f}\n" for k, v in sorted(hist.items()))
    from .eval import error_by_pos_tag
    by_pos = error_by_pos_tag(pred, gold, ds.test, args.min_tag_count, args.min_error_share)
    with open(out / "error_by_pos.tsv", "w", encoding="utf-8") as fh:
        fh.write("pos\terror_tokens\tshare_of_tag\n")
        fh.writelines(f"{k}\t{c}\t{s:.6f}\n" for k, (c, s) in sorted(by_pos.items()))
    write_report(rep, out)
    write_manifest(out, "analyze", {"corpus": args.corpus, "checkpoint": args.checkpoint},
                   {"domain": args.domain, "min_tag_count": args.min_tag_count,
                    "min_error_share": args.min_error_share},
                   ["error_by_position.tsv", "error_by_length.tsv", "error_by_pos.tsv", "report.txt", "report.json"])
    print(rep.text(), end="")


def _read_token_lines(path):
    lines = existing(path, "input file").read_text(encoding="utf-8").splitlines()
    return [line.split() for line in lines if line.strip()]


def cmd_predict(args):
    model = load_model(existing(args.checkpoint, "checkpoint"))
    sentences = _read_token_lines(args.input)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    records = []
    if model.kind == "lstm":
        for k, ids in enumerate(model.predict_ids(sentences)):
            records.append(model.tagset.spans(ids, str(k)))
    else:
        if not args.catalog:
            raise ConfigError("--catalog is required for slot-description models")
        catalog = load_catalog(existing(args.catalog, "catalog"))
        if args.domain:
            catalog = [s for s in catalog if s.domain == args.domain]
        if not catalog:
            raise ConfigError("no slots selected from the catalog")
        tags = model.predict_tags([(toks, slot) for toks in sentences for slot in catalog])
        for k, toks in enumerate(sentences):
            per_slot = {slot.slot_id: tags[k * len(catalog) + j] for j, slot in enumerate(catalog)}
            records.append(merge_slot_predictions(per_slot, make_rng(args.seed or 0, "merge", str(k)), str(k)))
    with open(out, "w", encoding="utf-8") as fh:
        for toks, spans in zip(sentences, records):
            fh.write(json.dumps({"tokens": toks, "spans": [
                {"slot": s.slot_id, "start": s.start, "end": s.end, "text": " ".join(toks[s.start:s.end])}
                for s in spans]}, sort_keys=True) + "\n")
    write_manifest(out.parent, "predict", {"checkpoint": args.checkpoint, "input": args.input,
                                           "catalog": args.catalog},
                   {"domain": args.domain, "seed": args.seed or 0}, [out.name])
    print(f"tagged {len(sentences)} utterances -> {out}")


def cmd_dump_attention(args):
    model = load_model(existing(args.checkpoint, "checkpoint"))
    if model.kind != "zat":
        raise ConfigError("attention weights exist only for the zat model")
    if args.description:
        slot = SlotDescription(args.slot or "slot", args.description.split())
    else:
        catalog = load_catalog(existing(args.catalog, "catalog")) if args.catalog else []
        matches = [s for s in catalog if s.slot_id == args.slot]
        if not matches:
            raise ConfigError(f"slot {args.slot!r} not found; give --catalog or --description")
        slot = matches[0]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    dump_attention(args.text.split(), slot, model, out)
    write_manifest(out.parent, "dump-attention", {"checkpoint": args.checkpoint, "catalog": args.catalog},
                   {"text": args.text, "slot": slot.slot_id, "description": list(slot.description_tokens)},
                   [out.name])
    print(out.read_text(encoding="utf-8"), end="")


def _runner(args):
    plan, schedule, datasets = load_plan(args), load_schedule(args), load_corpus(args)
    target_of(datasets, plan)
    vocab, emb = load_vectors(args)
    return Runner(plan, datasets, vocab, emb.matrix, schedule), plan, schedule


def cmd_ablate(args):
    runner, plan, schedule = _runner(args)
    rows = runner.ablate(args.variants.split(",") if args.variants else tuple(VARIANTS))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "ablation_runs.tsv").write_text(rows_tsv(rows), encoding="utf-8")
    (out / "ablation.tsv").write_text(table_tsv(rows), encoding="utf-8")
    write_manifest(out, "ablate", {"corpus": args.corpus, "vectors": args.vectors, "plan": args.plan},
                   {"plan": plan.to_json(), "schedule": schedule_json(schedule)},
                   ["ablation_runs.tsv", "ablation.tsv"])
    print(table_tsv(rows), end="")


def cmd_sweep(args):
    runner, plan, schedule = _runner(args)
    kinds = tuple(k for k in args.models.split(",") if k != "lstm")
    rows = runner.transfer(kinds, lstm="lstm" in args.models.split(","))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep_runs.tsv").write_text(rows_tsv(rows), encoding="utf-8")
    (out / "learning_curve.tsv").write_text(table_tsv(rows), encoding="utf-8")
    (out / "learning_curve_shared.tsv").write_text(table_tsv(rows, "shared_f1"), encoding="utf-8")
    write_manifest(out, "sweep", {"corpus": args.corpus, "vectors": args.vectors, "plan": args.plan},
                   {"plan": plan.to_json(), "schedule": schedule_json(schedule), "models": args.models},
                   ["sweep_runs.tsv", "learning_curve.tsv", "learning_curve_shared.tsv"])
    print(table_tsv(rows), end="")


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zat", description="Zero-shot slot tagging experiments.")
    p.add_argument("--verbose", action="store_true", help="log training progress")
    sub = p.add_subparsers(dest="command", metavar="command")

    def common(sp, plan=True, train=True):
        sp.add_argument("--corpus", required=True, help="corpus directory written by gen-data")
        sp.add_argument("--vectors", help="word vector file (default: bundled 100-d fixture)")
        sp.add_argument("--seed", type=int)
        if plan:
            sp.add_argument("--plan", help="experiment plan JSON")
            sp.add_argument("--target", help="target domain (instead of --plan)")
            sp.add_argument("--sources", help="comma-separated source domains (instead of --plan)")
            sp.add_argument("--seeds", help="comma-separated training seeds")
            sp.add_argument("--take", type=int, help="utterances per source domain")
        if train:
            sp.add_argument("--config", help="training config JSON with base/finetune/scratch sections")
            sp.add_argument("--max-epochs", dest="max_epochs", type=int)
            sp.add_argument("--patience", type=int)
        sp.add_argument("--out", required=True)

    sp = sub.add_parser("gen-data", help="generate the synthetic corpus")
    sp.add_argument("--spec", help="generator spec JSON")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--utterances", type=int, help="utterances per domain")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen_data)

    sp = sub.add_parser("train-base", help="train a base model on the joint source data")
    common(sp)
    sp.add_argument("--model", choices=("zat", "ct"), default="zat")
    sp.add_argument("--variant", choices=tuple(VARIANTS), default="ZAT")
    sp.set_defaults(func=cmd_train_base)

    sp = sub.add_parser("finetune", help="adapt a base checkpoint to n target utterances")
    common(sp)
    sp.add_argument("--base", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.set_defaults(func=cmd_finetune)

    sp = sub.add_parser("train-baseline", help="train the ct or lstm baseline")
    common(sp)
    sp.add_argument("--kind", choices=("ct", "lstm"), required=True)
    sp.add_argument("--n", type=int, default=0, help="target utterances (lstm)")
    sp.set_defaults(func=cmd_train_baseline)

    for name, func in (("eval", cmd_eval), ("analyze", cmd_analyze)):
        sp = sub.add_parser(name, help="score a checkpoint on a domain's test split" if name == "eval"
                            else "error breakdowns by span position, length and POS tag")
        common(sp, plan=False, train=False)
        sp.add_argument("--checkpoint", required=True)
        sp.add_argument("--domain", required=True)
        if name == "analyze":
            sp.add_argument("--min-tag-count", dest="min_tag_count", type=int, default=0)
            sp.add_argument("--min-error-share", dest="min_error_share", type=float, default=0.0)
        sp.set_defaults(func=func)

    sp = sub.add_parser("predict", help="tag raw whitespace-tokenised lines")
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--input", required=True)
    sp.add_argument("--catalog", help="slot catalog TSV")
    sp.add_argument("--domain", help="restrict the catalog to one domain")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("dump-attention", help="write the attention matrix for one sentence and slot")
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--text", required=True)
    sp.add_argument("--slot")
    sp.add_argument("--catalog")
    sp.add_argument("--description", help="slot description (instead of --catalog)")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_dump_attention)

    sp = sub.add_parser("ablate", help="ZAT, -CRF, -CHAR and +WEFT over the plan's sizes and seeds")
    common(sp)
    sp.add_argument("--variants", help="comma-separated subset of " + ",".join(VARIANTS))
    sp.set_defaults(func=cmd_ablate)

    sp = sub.add_parser("sweep", help="learning curves over target sizes and seeds")
    common(sp)
    sp.add_argument("--models", default="zat,ct,lstm")
    sp.set_defaults(func=cmd_sweep)
    return p


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        args.func(args)
    except (ConfigError, RecordError, ValueError, KeyError, TypeError) as exc:
        print(f"zat {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None):
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()
