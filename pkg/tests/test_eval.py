import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from zat.data.records import Utterance
from zat.eval import (error_by_length, error_by_pos_tag, error_by_position, error_counts, erroneous_tokens,
                      evaluate, load_attention, span_f1, write_attention, write_report)
from zat.tagger import SlotSpan


def S(slot, a, b, uid="u1"):
    return SlotSpan(slot, a, b, uid)


GOLD = [S("city", 0, 1), S("date", 2, 4), S("time", 5, 6), S("city", 1, 2, "u2")]
PRED = [S("city", 0, 1), S("date", 2, 4), S("time", 5, 7)]


def test_hand_worked_fixture():
    rep = span_f1(PRED, GOLD)
    assert (rep.tp, rep.fp, rep.fn) == (2, 1, 2)
    assert rep.precision == pytest.approx(2 / 3)
    assert rep.recall == pytest.approx(0.5)
    assert rep.f1 == pytest.approx(4 / 7)
    assert rep.per_slot["time"].fp == 1 and rep.per_slot["time"].fn == 1
    assert rep.tp + rep.fn == len(GOLD)


def test_perfect_and_empty():
    rep = span_f1(GOLD, GOLD)
    assert rep.precision == rep.recall == rep.f1 == 1.0
    rep = span_f1([], [])
    assert rep.f1 == 0.0 and rep.precision == 0.0


def test_boundary_error_is_one_fp_and_one_fn():
    rep = span_f1([S("a", 0, 2)], [S("a", 0, 1)])
    assert (rep.tp, rep.fp, rep.fn) == (0, 1, 1)


def test_duplicate_prediction_matches_once():
    rep = span_f1([S("a", 0, 1), S("a", 0, 1)], [S("a", 0, 1)])
    assert (rep.tp, rep.fp, rep.fn) == (1, 1, 0)


spans = st.builds(lambda slot, a, n, u: S(slot, a, a + n, u), st.sampled_from("ab"), st.integers(0, 5),
                  st.integers(1, 3), st.sampled_from(["u1", "u2", "u3"]))


@given(st.lists(spans, max_size=8), st.lists(spans, max_size=8), st.randoms())
def test_f1_is_order_invariant(pred, gold, rnd):
    a = span_f1(pred, gold)
    rnd.shuffle(pred)
    rnd.shuffle(gold)
    b = span_f1(pred, gold)
    assert (a.tp, a.fp, a.fn) == (b.tp, b.fp, b.fn)


@given(st.lists(spans, max_size=8), st.lists(spans, max_size=8))
def test_adding_a_correct_utterance_never_hurts(pred, gold):
    before = span_f1(pred, gold).f1
    extra = [S("a", 0, 1, "fresh"), S("b", 2, 3, "fresh")]
    assert span_f1(pred + extra, gold + extra).f1 >= before - 1e-12


@given(st.lists(spans, max_size=8), st.lists(spans, max_size=8))
def test_position_buckets_reconcile_with_fn(pred, gold):
    rep = span_f1(pred, gold)
    assert sum(error_counts(pred, gold, lambda s: s.start).values()) == rep.fn
    rates = error_by_position(pred, gold)
    totals = {k: sum(1 for s in gold if s.start == k) for k in rates}
    assert sum(round(rates[k] * totals[k]) for k in rates) == rep.fn


def test_position_and_length_extremes():
    assert set(error_by_position(GOLD, GOLD).values()) == {0.0}
    assert set(error_by_position([], GOLD).values()) == {1.0}
    assert error_by_length(GOLD, GOLD)[1] == 0.0
    assert 5 not in error_by_length(PRED, GOLD)


def test_late_spans_missed_gives_increasing_rates():
    gold = [S("a", p, p + 1, f"u{k}") for k in range(4) for p in (0, 3, 6)]
    pred = [s for s in gold if s.start == 0] + [s for s in gold if s.start == 3 and s.utterance_id in ("u0", "u1")]
    rates = error_by_position(pred, gold)
    assert list(rates.values()) == sorted(rates.values()) == [0.0, 0.5, 1.0]


def test_length_three_spans_missed():
    gold = [S("a", 0, 1), S("b", 2, 5)]
    assert error_by_length([S("a", 0, 1)], gold) == {1: 0.0, 3: 1.0}


def utt(uid, pos):
    return Utterance(uid, "d", "i", ["t"] * len(pos), [], pos)


def test_pos_attribution():
    utts = [utt("u1", ["VERB", "NOUN", "NOUN", "ADP"])]
    assert error_by_pos_tag([S("a", 1, 3)], [S("a", 1, 3)], utts) == {}
    out = error_by_pos_tag([], [S("a", 1, 3)], utts)
    assert out == {"NOUN": (2, 1.0)}
    out = error_by_pos_tag([S("b", 0, 1)], [S("a", 1, 3)], utts)
    assert out["VERB"] == (1, 1.0)


@given(st.lists(spans, max_size=8), st.lists(spans, max_size=8))
def test_pos_counts_sum_to_erroneous_tokens(pred, gold):
    utts = [utt(u, ["NOUN", "VERB", "ADJ"] * 3) for u in ("u1", "u2", "u3")]
    out = error_by_pos_tag(pred, gold, utts)
    assert sum(c for c, _ in out.values()) == len(erroneous_tokens(pred, gold))


def test_pos_thresholds():
    utts = [utt("u1", ["VERB", "NOUN", "NOUN", "ADP"] * 2)]
    gold = [S("a", 0, 3)]
    assert set(error_by_pos_tag([], gold, utts)) == {"VERB", "NOUN"}
    assert set(error_by_pos_tag([], gold, utts, min_error_share=0.5)) == {"NOUN"}
    assert set(error_by_pos_tag([], gold, utts, min_tag_count=3)) == {"NOUN"}


def test_missing_pos_is_an_error():
    u = utt("u1", ["NOUN"])
    u.pos = []
    with pytest.raises(ValueError, match="POS"):
        error_by_pos_tag([], [S("a", 0, 1)], [u])


def test_report_files(tmp_path):
    rep = evaluate(PRED, GOLD, [utt("u1", ["N"] * 7), utt("u2", ["N"] * 3)])
    write_report(rep, tmp_path)
    text = (tmp_path / "report.txt").read_text()
    assert "micro" in text and "57.14" in text
    assert '"f1": 0.571429' in (tmp_path / "report.json").read_text()


def test_attention_file_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    A = rng.random((4, 3))
    A /= A.sum(axis=1, keepdims=True)
    write_attention(A, ["a", "b", "c", "d"], ["x", "y", "z"], tmp_path / "att.tsv")
    rows, cols, B = load_attention(tmp_path / "att.tsv")
    assert rows == ["a", "b", "c", "d"] and cols == ["x", "y", "z"]
    np.testing.assert_allclose(B, A, atol=5e-7)
    np.testing.assert_allclose(B.sum(axis=1), 1.0, atol=1e-6)
    with pytest.raises(ValueError):
        write_attention(A, ["a"], ["x"], tmp_path / "bad.tsv")
