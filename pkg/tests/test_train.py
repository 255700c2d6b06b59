import numpy as np
import pytest

from zat.data import GeneratorSpec, generate_corpus
from zat.embedding import random_embeddings
from zat.encoder import ZatConfig
from zat.numerics import make_rng
from zat.tagger import build_slot_examples
from zat.train import (ExperimentPlan, TrainConfig, build_joint_dataset, clone, fine_tune, make_model,
                       target_examples, train_model)

DIMS = {"char_dim": 4, "char_filters": 4, "hidden": 8, "ff_hidden": 8}


@pytest.fixture(scope="module")
def corpus():
    ds = generate_corpus(GeneratorSpec(domains=["deals", "fashion", "purchase"], utterances_per_domain=500, seed=1))
    return {d.name: d for d in ds}


@pytest.fixture(scope="module")
def vocab_emb(corpus):
    words = sorted({t for d in corpus.values() for u in d.all_utterances() for t in u.tokens}
                   | {t for d in corpus.values() for s in d.catalog for t in s.description_tokens})
    return random_embeddings(words, 8, make_rng(0, "vectors"))


def small_examples(corpus, n=10):
    ds = corpus["fashion"]
    return build_slot_examples(ds.train[:n], ds.catalog, make_rng(0, "ex"))[:n]


def zat(vocab_emb, **flags):
    vocab, emb = vocab_emb
    return make_model("zat", vocab, emb.matrix, TrainConfig(**flags), DIMS)


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(batch_size=0)
    with pytest.raises(ValueError):
        TrainConfig(patience=0)
    with pytest.raises(ValueError):
        ExperimentPlan("deals", ["deals", "fashion"])
    with pytest.raises(ValueError):
        ExperimentPlan.from_json({"target": "a", "sources": ["b"], "bogus": 1})


def test_joint_dataset_sizes_and_disjointness(corpus):
    plan = ExperimentPlan("deals", ["fashion", "purchase"], take=100)
    joint = build_joint_dataset(plan, corpus)
    assert len(joint.utterances) == 200
    assert not {u.id for u in joint.utterances} & {u.id for u in corpus["deals"].all_utterances()}
    assert {s.slot_id for s in joint.catalog} == ({s.slot_id for s in corpus["fashion"].catalog}
                                                  | {s.slot_id for s in corpus["purchase"].catalog})
    one = build_joint_dataset(ExperimentPlan("deals", ["fashion"], take=100), corpus)
    assert [u.id for u in one.utterances] == [u.id for u in joint.utterances[:100]]
    with pytest.raises(ValueError, match="need"):
        build_joint_dataset(ExperimentPlan("deals", ["fashion"], take=10_000), corpus)


def test_target_examples_zero_and_nested(corpus):
    utts, train, dev = target_examples(corpus["deals"], 0, seed=0)
    assert utts == [] and train == [] and dev
    small, _, _ = target_examples(corpus["deals"], 20, seed=0)
    big, _, _ = target_examples(corpus["deals"], 40, seed=0)
    assert {u.id for u in small} <= {u.id for u in big}


def test_patience_stops_training(corpus, vocab_emb):
    scores = iter([0.5, 0.4, 0.3, 0.2])
    m, log = train_model(zat(vocab_emb), small_examples(corpus), None,
                         TrainConfig(patience=1, max_epochs=10), dev_metric=lambda _: next(scores))
    assert log.epochs == 2 and log.best_epoch == 1


def test_loss_decreases(corpus, vocab_emb):
    m, log = train_model(zat(vocab_emb), small_examples(corpus), None,
                         TrainConfig(max_epochs=5, patience=5, batch_size=5), dev_metric=lambda _: 0.0)
    losses = [r["train_loss"] for r in log.records]
    assert losses[-1] < losses[0]
    assert all(b < a for a, b in zip(losses, losses[1:]))


def test_same_seed_same_result(corpus, vocab_emb):
    ex = small_examples(corpus, 20)
    cfg = TrainConfig(max_epochs=3, patience=3, seed=7)
    a, la = train_model(zat(vocab_emb), ex, ex, cfg)
    b, lb = train_model(zat(vocab_emb), ex, ex, cfg)
    assert la.records == lb.records
    for k in a.params:
        np.testing.assert_array_equal(a.params[k], b.params[k])


def test_best_checkpoint_is_returned(corpus, vocab_emb):
    ex = small_examples(corpus, 30)
    dev = build_slot_examples(corpus["fashion"].dev[:10], corpus["fashion"].catalog, make_rng(1, "dev"))
    m, log = train_model(zat(vocab_emb), ex, dev, TrainConfig(max_epochs=6, patience=6, batch_size=8))
    assert m.dev_f1(dev) == pytest.approx(max(r["dev_metric"] for r in log.records), abs=1e-6)


def test_frozen_embeddings_stay_bit_identical(corpus, vocab_emb):
    ex = small_examples(corpus)
    frozen = zat(vocab_emb)
    before = frozen.params["word_emb"].copy()
    train_model(frozen, ex, None, TrainConfig(max_epochs=1), dev_metric=lambda _: 0.0)
    np.testing.assert_array_equal(frozen.params["word_emb"], before)
    tuned = zat(vocab_emb, weft=True)
    train_model(tuned, ex, None, TrainConfig(max_epochs=1), dev_metric=lambda _: 0.0)
    assert not np.array_equal(tuned.params["word_emb"], before)


def test_fine_tune_keeps_shapes_and_zero_shot_identity(corpus, vocab_emb):
    base = zat(vocab_emb)
    same, log = fine_tune(base, [], [], TrainConfig())
    assert same is base and log.epochs == 0
    _, train, dev = target_examples(corpus["deals"], 10, seed=0)
    tuned, _ = fine_tune(base, train, dev[:20], TrainConfig(max_epochs=1))
    assert {k: v.shape for k, v in tuned.params.items()} == {k: v.shape for k, v in base.params.items()}
    assert any(not np.array_equal(tuned.params[k], base.params[k]) for k in base.params)
    assert clone(base).params is not base.params


def test_no_crf_variant_trains_end_to_end(corpus, vocab_emb):
    m = zat(vocab_emb, use_crf=False)
    assert isinstance(m.config, ZatConfig) and not m.config.use_crf
    ex = small_examples(corpus)
    m, log = train_model(m, ex, ex, TrainConfig(max_epochs=2))
    assert 0.0 <= log.best_metric <= 1.0


def test_nan_loss_aborts(corpus, vocab_emb):
    m = zat(vocab_emb)
    m.params["ff_b2"] = np.full(3, np.nan)
    with pytest.raises(FloatingPointError):
        train_model(m, small_examples(corpus), None, TrainConfig(max_epochs=1), dev_metric=lambda _: 0.0)


def test_empty_training_data_is_rejected(vocab_emb):
    with pytest.raises(ValueError):
        train_model(zat(vocab_emb), [], [], TrainConfig())


def test_epoch_order_depends_only_on_seed_and_epoch():
    a = make_rng(3, "epoch", 2).permutation(50)
    b = make_rng(3, "epoch", 2).permutation(50)
    c = make_rng(3, "epoch", 3).permutation(50)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
