import filecmp
import json

import pytest

from zat.cli import dispatch

TINY_PLAN = {"target": "deals", "sources": ["fashion", "purchase"], "take": 60, "target_sizes": [0, 20],
             "seeds": [0], "dev_take": 20,
             "zat": {"char_dim": 4, "char_filters": 4, "hidden": 6, "ff_hidden": 6},
             "ct": {"hidden1": 6, "combine": 4, "hidden2": 4},
             "lstm": {"char_dim": 4, "char_hidden": 3, "hidden": 6}}
TINY_SCHEDULE = {"base": {"max_epochs": 1, "patience": 1}, "finetune": {"max_epochs": 1, "patience": 1},
                 "scratch": {"max_epochs": 1, "patience": 1}}


def write_json(path, obj):
    path.write_text(json.dumps(obj), encoding="utf-8")
    return str(path)


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    spec = write_json(root / "spec.json", {"domains": ["deals", "fashion", "purchase"],
                                           "utterances_per_domain": 400, "seed": 2})
    assert dispatch(["gen-data", "--spec", spec, "--out", str(root / "corpus")]) == 0
    plan = write_json(root / "plan.json", TINY_PLAN)
    config = write_json(root / "config.json", TINY_SCHEDULE)
    common = ["--corpus", str(root / "corpus"), "--plan", plan, "--config", config]
    assert dispatch(["train-base", *common, "--out", str(root / "base")]) == 0
    return root, common


def same_tree(a, b):
    cmp = filecmp.dircmp(a, b)
    _, mismatch, errors = filecmp.cmpfiles(a, b, cmp.common_files, shallow=False)
    return cmp.left_list == cmp.right_list and not mismatch and not errors


def test_unknown_command_and_missing_command_exit_2(capsys):
    assert dispatch(["frobnicate"]) == 2
    assert dispatch([]) == 2
    assert "usage" in capsys.readouterr().err


def test_invalid_config_exits_1(tmp_path, work, capsys):
    root, common = work
    bad = write_json(tmp_path / "bad.json", {"base": {"batch_size": 0}})
    assert dispatch(["train-base", "--corpus", str(root / "corpus"), "--plan", common[3],
                     "--config", bad, "--out", str(tmp_path / "o")]) == 1
    assert dispatch(["train-base", "--corpus", str(tmp_path / "missing"), "--target", "deals",
                     "--sources", "fashion", "--out", str(tmp_path / "o")]) == 1
    bogus = write_json(tmp_path / "plan.json", {**TINY_PLAN, "colour": "red"})
    assert dispatch(["train-base", "--corpus", str(root / "corpus"), "--plan", bogus,
                     "--out", str(tmp_path / "o")]) == 1
    assert "error" in capsys.readouterr().err


def test_gen_data_is_deterministic(tmp_path, work):
    root, _ = work
    spec = str(root / "spec.json")
    assert dispatch(["gen-data", "--spec", spec, "--out", str(tmp_path / "again")]) == 0
    assert same_tree(root / "corpus", tmp_path / "again")
    manifest = json.loads((tmp_path / "again" / "manifest.json").read_text())
    assert manifest["command"] == "gen-data" and manifest["inputs"]["spec"]["sha256"]


def test_finetune_zero_matches_base_eval(tmp_path, work):
    root, common = work
    assert dispatch(["finetune", *common, "--base", str(root / "base" / "model.npz"), "--n", "0",
                     "--out", str(tmp_path / "ft")]) == 0
    for name in ("base", "ft"):
        ckpt = (root / "base" if name == "base" else tmp_path / "ft") / "model.npz"
        assert dispatch(["eval", "--corpus", str(root / "corpus"), "--checkpoint", str(ckpt),
                         "--domain", "deals", "--out", str(tmp_path / f"eval_{name}")]) == 0
    for f in ("report.txt", "report.json"):
        assert (tmp_path / "eval_base" / f).read_bytes() == (tmp_path / "eval_ft" / f).read_bytes()


def test_rerun_reproduces_outputs(tmp_path, work):
    root, common = work
    assert dispatch(["train-base", *common, "--out", str(tmp_path / "again")]) == 0
    assert same_tree(root / "base", tmp_path / "again")
    for out in ("e1", "e2"):
        assert dispatch(["analyze", "--corpus", str(root / "corpus"), "--checkpoint",
                         str(root / "base" / "model.npz"), "--domain", "deals", "--out", str(tmp_path / out)]) == 0
    assert same_tree(tmp_path / "e1", tmp_path / "e2")


def test_ablate_emits_four_variant_rows(tmp_path, work):
    root, common = work
    assert dispatch(["ablate", *common, "--out", str(tmp_path / "abl")]) == 0
    lines = (tmp_path / "abl" / "ablation.tsv").read_text().splitlines()
    assert [line.split("\t")[0] for line in lines[1:]] == ["ZAT", "-CRF", "-CHAR", "+WEFT"]
    runs = (tmp_path / "abl" / "ablation_runs.tsv").read_text().splitlines()
    assert len(runs) == 1 + 4 * 2


def test_predict_spans_do_not_overlap(tmp_path, work):
    root, _ = work
    corpus = root / "corpus"
    utts = [json.loads(line) for line in (corpus / "deals.test.jsonl").read_text().splitlines()]
    (tmp_path / "in.txt").write_text("".join(" ".join(u["tokens"]) + "\n" for u in utts), encoding="utf-8")
    catalog = corpus / "deals.catalog.tsv"
    assert dispatch(["predict", "--checkpoint", str(root / "base" / "model.npz"), "--input", str(tmp_path / "in.txt"),
                     "--catalog", str(catalog), "--out", str(tmp_path / "pred" / "spans.jsonl")]) == 0
    records = [json.loads(line) for line in (tmp_path / "pred" / "spans.jsonl").read_text().splitlines()]
    assert len(records) == len(utts)
    for r in records:
        spans = sorted((s["start"], s["end"]) for s in r["spans"])
        assert all(a[1] <= b[0] for a, b in zip(spans, spans[1:]))


def test_dump_attention_and_baseline(tmp_path, work):
    root, common = work
    assert dispatch(["dump-attention", "--checkpoint", str(root / "base" / "model.npz"),
                     "--text", "cheap shoes in Boston", "--slot", "location",
                     "--description", "city or place", "--out", str(tmp_path / "att" / "a.tsv")]) == 0
    assert (tmp_path / "att" / "a.tsv").exists()
    assert dispatch(["train-baseline", *common, "--kind", "lstm", "--n", "0", "--out", str(tmp_path / "l")]) == 1
    assert dispatch(["train-baseline", *common, "--kind", "lstm", "--n", "20", "--out", str(tmp_path / "l")]) == 0
