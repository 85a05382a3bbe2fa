"""Metric, McNemar, length-quartile, and comparison-table tests."""

import math
import random
from itertools import product

import pytest

from claimcheck.classifier import Decision, LabelVector, PredictionSet
from claimcheck.corpus import Post, TaskLabels
from claimcheck.errors import EvaluationError
from claimcheck.evaluation import (
    EvalReport,
    compare_report,
    correctness,
    evaluate,
    length_quartile_recall,
    mcnemar,
    mcnemar_from_counts,
    positive_items,
)


def gold_post(i, vfc=None, harmful=None, language="en", text="text"):
    return Post(id=f"g{i}", text=text, language=language, source="t",
                labels=TaskLabels(vfc=vfc, harmful=harmful))


def decisions_for(gold, labels):
    return {p.id: Decision(vfc=v, harmful=None) for p, v in zip(gold, labels)}


# ---------------------------------------------------------------------------
# evaluate


def test_perfect_predictor():
    gold = [gold_post(i, vfc=i % 2) for i in range(10)]
    preds = decisions_for(gold, [p.labels.vfc for p in gold])
    report = evaluate(preds, gold, "vfc")
    assert report.accuracy == 1.0
    assert report.recall == 1.0
    assert report.f1 == 1.0


def test_hand_counted_confusion():
    # TP=3, FN=1, FP=2, TN=4
    gold = [gold_post(i, vfc=v) for i, v in enumerate([1, 1, 1, 1, 0, 0, 0, 0, 0, 0])]
    predicted = [1, 1, 1, 0, 1, 1, 0, 0, 0, 0]
    report = evaluate(decisions_for(gold, predicted), gold, "vfc")
    assert (report.tp, report.fp, report.fn, report.tn) == (3, 2, 1, 4)
    assert report.accuracy == pytest.approx(0.7)
    assert report.recall == pytest.approx(0.75)
    assert report.precision == pytest.approx(0.6)
    assert report.f1 == pytest.approx(2 * 0.6 * 0.75 / 1.35)


def test_zero_gold_positives_recall_undefined():
    gold = [gold_post(i, vfc=0) for i in range(4)]
    report = evaluate(decisions_for(gold, [0, 0, 1, 0]), gold, "vfc")
    assert report.recall is None
    assert report.accuracy == pytest.approx(0.75)


def test_missing_prediction_lists_ids():
    gold = [gold_post(i, vfc=1) for i in range(3)]
    preds = decisions_for(gold[:2], [1, 1])
    with pytest.raises(EvaluationError, match="g2"):
        evaluate(preds, gold, "vfc")


def test_prediction_set_with_na_pair_is_missing_for_that_task():
    gold = [gold_post(0, harmful=1)]
    preds = PredictionSet(scores={"g0": LabelVector(0.9, 0.1, None, None)})
    with pytest.raises(EvaluationError, match="g0"):
        evaluate(preds, gold, "harmful")


def test_unlabeled_gold_posts_ignored():
    gold = [gold_post(0, vfc=1), gold_post(1), gold_post(2, vfc=0)]
    preds = {p.id: Decision(vfc=1, harmful=None) for p in gold if p.labels.vfc is not None}
    report = evaluate(preds, gold, "vfc")
    assert report.n == 2


def brute_force_counts(pairs):
    """Independent recount: (predicted, actual) tuples -> tp, fp, fn, tn."""
    tp = sum(1 for p, a in pairs if p == 1 and a == 1)
    fp = sum(1 for p, a in pairs if p == 1 and a == 0)
    fn = sum(1 for p, a in pairs if p == 0 and a == 1)
    tn = sum(1 for p, a in pairs if p == 0 and a == 0)
    return tp, fp, fn, tn


def test_random_pairs_match_recount_oracle():
    rnd = random.Random(101)
    languages = ["en", "tr", "nl", "ar", "bg"]
    for _ in range(200):
        n = rnd.randrange(1, 40)
        gold = [gold_post(i, vfc=rnd.randrange(2), language=rnd.choice(languages))
                for i in range(n)]
        predicted = [rnd.randrange(2) for _ in range(n)]
        report = evaluate(decisions_for(gold, predicted), gold, "vfc")
        tp, fp, fn, tn = brute_force_counts(
            [(pr, p.labels.vfc) for p, pr in zip(gold, predicted)]
        )
        assert (report.tp, report.fp, report.fn, report.tn) == (tp, fp, fn, tn)
        assert report.accuracy == pytest.approx((tp + tn) / n, abs=1e-12)
        if tp + fn:
            assert report.recall == pytest.approx(tp / (tp + fn), abs=1e-12)
        # per-language confusion counts sum to the overall counts
        sums = [0, 0, 0, 0]
        for sub in report.per_language.values():
            for k, v in enumerate((sub.tp, sub.fp, sub.fn, sub.tn)):
                sums[k] += v
        assert tuple(sums) == (tp, fp, fn, tn)


# ---------------------------------------------------------------------------
# mcnemar


def paired_maps(b, c, concordant=0):
    """Build correctness maps with given discordant counts."""
    a_map, b_map = {}, {}
    k = 0
    for _ in range(b):
        a_map[f"i{k}"], b_map[f"i{k}"] = True, False
        k += 1
    for _ in range(c):
        a_map[f"i{k}"], b_map[f"i{k}"] = False, True
        k += 1
    for _ in range(concordant):
        a_map[f"i{k}"], b_map[f"i{k}"] = True, True
        k += 1
    return a_map, b_map


def test_chi_square_branch_matches_quoted_values():
    result = mcnemar_from_counts(5, 15, alpha=0.05, method="chi-square-cc")
    assert result.statistic == pytest.approx(4.05, abs=1e-12)
    assert result.p_value == pytest.approx(0.0443, abs=1e-3)
    assert result.null_rejected


def test_exact_branch_b2_c8():
    result = mcnemar_from_counts(2, 8, alpha=0.05)
    assert result.method == "exact-binomial"
    assert result.p_value == pytest.approx(112 / 1024, abs=1e-9)
    assert not result.null_rejected


def test_symmetric_counts_give_p_one():
    result = mcnemar_from_counts(10, 10)
    assert result.p_value == 1.0
    assert not result.null_rejected


def test_auto_switches_to_chi_square_at_25():
    assert mcnemar_from_counts(12, 12).method == "exact-binomial"
    assert mcnemar_from_counts(12, 13).method == "chi-square-cc"


def test_no_discordant_pairs_degenerate():
    a_map, b_map = paired_maps(0, 0, concordant=5)
    result = mcnemar(a_map, b_map)
    assert result.p_value == 1.0 and result.degenerate


def test_mismatched_item_sets_error():
    a_map, b_map = paired_maps(2, 3)
    del b_map["i0"]
    with pytest.raises(EvaluationError, match="different item sets"):
        mcnemar(a_map, b_map)


def enumeration_oracle(b, c):
    """Two-sided p by enumerating all 2^(b+c) discordant orientations.

    Counts orientations at least as extreme as the observed split, where
    extremeness is the smaller side being <= min(b, c).
    """
    n = b + c
    m = min(b, c)
    hits = 0
    for bits in product((0, 1), repeat=n):
        k = sum(bits)
        if k <= m or (n - k) <= m:
            hits += 1
    return hits / 2**n


def test_exact_agrees_with_enumeration_for_all_small_counts():
    for n in range(1, 13):
        for b in range(n + 1):
            c = n - b
            got = mcnemar_from_counts(b, c).p_value
            assert got == pytest.approx(enumeration_oracle(b, c), abs=1e-15), (b, c)


def test_mcnemar_symmetry():
    rnd = random.Random(7)
    for _ in range(30):
        b, c = rnd.randrange(0, 30), rnd.randrange(0, 30)
        r1 = mcnemar_from_counts(b, c)
        r2 = mcnemar_from_counts(c, b)
        assert r1.p_value == r2.p_value
        assert (r1.b, r1.c) == (r2.c, r2.b)


def test_correctness_maps_feed_mcnemar():
    gold = [gold_post(i, vfc=v) for i, v in enumerate([1, 1, 0, 0])]
    pred_a = decisions_for(gold, [1, 0, 0, 0])  # right, wrong, right, right
    pred_b = decisions_for(gold, [0, 1, 0, 1])  # wrong, right, right, wrong
    a_map = correctness(pred_a, gold, "vfc")
    b_map = correctness(pred_b, gold, "vfc")
    result = mcnemar(a_map, b_map)
    assert (result.b, result.c) == (2, 1)


# ---------------------------------------------------------------------------
# length-quartile analysis


def test_eight_item_hand_traced_fixture():
    items = [("x" * length, length not in (10, 50)) for length in range(10, 81, 10)]
    report = length_quartile_recall(items)
    assert report.cut_points == (20, 40, 60)
    assert [b.count for b in report.bins] == [2, 2, 2, 2]
    assert [b.recall for b in report.bins] == [0.5, 1.0, 0.5, 1.0]


def test_all_correct_items():
    items = [("y" * n, True) for n in (5, 10, 15, 20, 25)]
    report = length_quartile_recall(items)
    assert all(b.recall in (1.0, None) for b in report.bins)
    assert report.overall_recall == 1.0


def test_empty_items_error():
    with pytest.raises(EvaluationError):
        length_quartile_recall([])


def test_bins_partition_and_weighted_mean():
    rnd = random.Random(31)
    for _ in range(100):
        items = [("z" * rnd.randrange(1, 300), rnd.random() < 0.7)
                 for _ in range(rnd.randrange(1, 80))]
        report = length_quartile_recall(items)
        assert sum(b.count for b in report.bins) == len(items)
        weighted = sum(b.recall * b.count for b in report.bins if b.count)
        overall = sum(1 for _, ok in items if ok) / len(items)
        assert weighted / len(items) == pytest.approx(overall, abs=1e-12)
        assert report.overall_recall == pytest.approx(overall, abs=1e-12)


def test_positive_items_extraction():
    gold = [gold_post(0, vfc=1, text="aaaa"), gold_post(1, vfc=0, text="bb"),
            gold_post(2, vfc=1, text="cccccc")]
    preds = decisions_for(gold, [1, 1, 0])
    items = positive_items(preds, gold, "vfc")
    assert items == [("aaaa", True), ("cccccc", False)]


# ---------------------------------------------------------------------------
# compare_report


def report_with(n, accuracy_counts):
    tp, fp, fn, tn = accuracy_counts
    return EvalReport(task="vfc", n=n, tp=tp, fp=fp, fn=fn, tn=tn)


def test_compare_flags_best():
    # accuracies 0.7558 vs 0.7388 over a 10000-item set
    first = report_with(10000, (3779, 1221, 1221, 3779))
    second = report_with(10000, (3694, 1306, 1306, 3694))
    assert first.accuracy == pytest.approx(0.7558)
    table = compare_report([("xlmr-large", first), ("bert-large", second)])
    rows = {r["name"]: r for r in table.rows}
    assert rows["xlmr-large"]["accuracy_best"]
    assert not rows["bert-large"]["accuracy_best"]


def test_compare_tie_flags_both():
    a = report_with(100, (40, 10, 10, 40))
    table = compare_report([("a", a), ("b", a)])
    assert all(r["accuracy_best"] for r in table.rows)


def test_compare_single_report_error():
    with pytest.raises(EvaluationError, match="two reports"):
        compare_report([("only", report_with(10, (5, 0, 0, 5)))])


def test_compare_size_mismatch_error():
    a = report_with(100, (40, 10, 10, 40))
    b = report_with(99, (40, 10, 10, 39))
    with pytest.raises(EvaluationError, match="different test-set sizes"):
        compare_report([("a", a), ("b", b)])
