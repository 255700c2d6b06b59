import filecmp
from collections import Counter

import numpy as np
import pytest

from zat.data import (GeneratorSpec, build_vector_fixture, bundled_vectors_path, generate_corpus, read_corpus,
                      write_corpus, write_vectors)
from zat.data import domains as lib
from zat.data.records import (DomainDataset, RecordError, Utterance, load_catalog, load_utterances,
                              save_catalog, save_utterances)
from zat.data.splits import largest_remainder, split_dataset, stratified_sample
from zat.numerics import make_rng
from zat.tagger import SlotDescription


@pytest.fixture(scope="module")
def corpus():
    return generate_corpus(GeneratorSpec(domains=["deals", "fashion"], utterances_per_domain=400, seed=3))


def make_utts(counts):
    return [Utterance(f"{intent}-{i}", "d", intent, ["w"], [], ["NOUN"])
            for intent, n in counts.items() for i in range(n)]


def test_generated_counts_and_uniqueness(corpus):
    for ds in corpus:
        assert len(ds.all_utterances()) == 400
        assert (len(ds.train), len(ds.dev), len(ds.test)) in {(320, 40, 40), (321, 40, 39), (320, 41, 39),
                                                             (319, 41, 40), (320, 39, 41), (321, 39, 40)}
    texts = [u.text for ds in corpus for u in ds.all_utterances()]
    assert len(texts) == len(set(texts))


def test_every_span_value_comes_from_its_pool(corpus):
    for ds in corpus:
        for u in ds.all_utterances():
            assert 3 <= len(u) <= 15
            assert len(u.pos) == len(u)
            for s in u.spans:
                assert " ".join(u.tokens[s.start:s.end]) in lib.VALUE_POOLS[s.slot_id]


def test_shared_slots_share_descriptions(corpus):
    deals, fashion = corpus
    shared = {s.slot_id for s in deals.catalog} & {s.slot_id for s in fashion.catalog}
    assert shared
    for slot_id in shared:
        assert deals.slot(slot_id).description_tokens == fashion.slot(slot_id).description_tokens


def test_generation_is_byte_identical(tmp_path):
    spec = GeneratorSpec(domains=["deals"], utterances_per_domain=400, seed=9)
    write_corpus(generate_corpus(spec), tmp_path / "a", spec)
    write_corpus(generate_corpus(spec), tmp_path / "b", spec)
    cmp = filecmp.dircmp(tmp_path / "a", tmp_path / "b")
    assert cmp.left_list == cmp.right_list and not cmp.diff_files
    _, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", cmp.common_files, shallow=False)
    assert not mismatch and not errors


def test_corpus_round_trip(tmp_path, corpus):
    write_corpus(corpus, tmp_path, GeneratorSpec())
    back = read_corpus(tmp_path)
    for a, b in zip(corpus, back):
        assert a.name == b.name and a.catalog == b.catalog
        assert [u.to_json() for u in a.train] == [u.to_json() for u in b.train]
    assert GeneratorSpec.load(tmp_path / "generator_spec.json") == GeneratorSpec()


def test_unknown_slot_in_template_is_rejected():
    spec = GeneratorSpec(domains=["x"], templates={"x": {"i": ["buy {nonexistent} now"]}})
    with pytest.raises(ValueError, match="nonexistent"):
        generate_corpus(spec)


def test_split_stratified_counts():
    utts = make_utts({"a": 50, "b": 50})
    train, dev, test = split_dataset(utts, make_rng(0, "s"))
    for part, k in ((train, 40), (dev, 5), (test, 5)):
        assert Counter(u.intent for u in part) == {"a": k, "b": k}
    train, dev, test = split_dataset(make_utts({"a": 100}), make_rng(0, "s"), (0.7, 0.2, 0.1))
    assert (len(train), len(dev), len(test)) == (70, 20, 10)


def test_split_is_disjoint_and_exhaustive():
    utts = make_utts({"a": 37, "b": 11, "c": 3})
    parts = split_dataset(utts, make_rng(1, "s"))
    ids = [u.id for p in parts for u in p]
    assert sorted(ids) == sorted(u.id for u in utts)


def test_split_errors():
    with pytest.raises(ValueError):
        split_dataset([], make_rng(0, "s"))
    with pytest.raises(ValueError):
        split_dataset(make_utts({"a": 3}), make_rng(0, "s"), (0.5, 0.2, 0.2))


def test_largest_remainder_sums():
    assert largest_remainder([1, 1, 1], 10) in ([4, 3, 3], [3, 4, 3], [3, 3, 4])
    assert sum(largest_remainder([0.8, 0.1, 0.1], 7)) == 7


def test_stratified_sample_nesting_and_proportions():
    train = make_utts({"a": 60, "b": 30, "c": 10})
    small = stratified_sample(train, 20, make_rng(4, "t"))
    big = stratified_sample(train, 50, make_rng(4, "t"))
    assert Counter(u.intent for u in small) == {"a": 12, "b": 6, "c": 2}
    assert {u.id for u in small} <= {u.id for u in big}
    assert stratified_sample(train, 0, make_rng(4, "t")) == []
    with pytest.raises(ValueError):
        stratified_sample(train, 101, make_rng(4, "t"))


def test_utterance_validation():
    with pytest.raises(RecordError, match="overlapping"):
        Utterance("u", "d", "i", ["a", "b", "c"], [("x", 0, 2), ("y", 1, 3)], ["N"] * 3)
    with pytest.raises(RecordError, match="POS"):
        Utterance("u", "d", "i", ["a", "b"], [], ["N"])
    with pytest.raises(RecordError, match="out of bounds"):
        Utterance("u", "d", "i", ["a"], [("x", 0, 2)], ["N"])


def test_dataset_rejects_unknown_slot_and_split_leak():
    u = Utterance("u1", "d", "i", ["a"], [("x", 0, 1)], ["N"])
    with pytest.raises(RecordError, match="not in catalog"):
        DomainDataset("d", [SlotDescription("y", ["why"])], [u], [], [])
    with pytest.raises(RecordError, match="two splits"):
        DomainDataset("d", [SlotDescription("x", ["ex"])], [u], [u], [])


def test_jsonl_and_catalog_round_trip(tmp_path):
    utts = [Utterance("u1", "d", "i", ["book", "Paris"], [("city", 1, 2)], ["VERB", "PROPN"])]
    save_utterances(utts, tmp_path / "u.jsonl")
    assert [u.to_json() for u in load_utterances(tmp_path / "u.jsonl")] == [u.to_json() for u in utts]
    cat = [SlotDescription("city", ["location", "city"], "d")]
    save_catalog(cat, tmp_path / "c.tsv")
    assert load_catalog(tmp_path / "c.tsv") == cat


def test_bad_jsonl_record_reports_position(tmp_path):
    p = tmp_path / "bad.jsonl"
    p.write_text('{"id": "u1", "domain": "d", "intent": "i", "tokens": ["a"], "spans": [], "pos": ["N"]}\n'
                 '{"id": "u2"}\n', encoding="utf-8")
    with pytest.raises(RecordError, match="record 2"):
        load_utterances(p)


def test_bundled_vectors_match_regeneration(tmp_path):
    write_vectors(build_vector_fixture(), tmp_path / "v.txt")
    assert (tmp_path / "v.txt").read_bytes() == bundled_vectors_path().read_bytes()


def test_description_words_have_vectors():
    vectors = build_vector_fixture()
    for desc in {**lib.SHARED_SLOTS, **lib.PRIVATE_DESCRIPTIONS}.values():
        assert all(w in vectors for w in desc.split())
    assert all(len(v) == 100 and np.isfinite(v).all() for v in vectors.values())
