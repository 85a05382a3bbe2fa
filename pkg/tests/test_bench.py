"""Benchmark protocol and synthetic corpus tests."""

import pytest

from claimcheck.bench import HUMAN_BASELINE_SEC_PER_POST, run_bench, synth_corpus
from claimcheck.classifier import HashingParams, zero_model
from claimcheck.errors import DataError


def small_model():
    return zero_model(HashingParams(hash_dim=2**10, ngram_max=3))


def test_report_shape_and_arithmetic():
    posts = synth_corpus(300, seed=4)
    report = run_bench(small_model(), posts, [10, 100, 200], warmup=1)
    assert [r.n for r in report.rows] == [10, 100, 200]
    for row in report.rows:
        assert row.elapsed_sec > 0
        assert row.throughput * row.elapsed_sec == pytest.approx(row.n, rel=1e-6)
        assert row.speedup == pytest.approx(
            row.n * HUMAN_BASELINE_SEC_PER_POST / row.elapsed_sec, rel=1e-9
        )
    # ten times the work should never be faster
    assert report.rows[1].elapsed_sec >= report.rows[0].elapsed_sec


def test_speedup_uses_stated_baseline():
    posts = synth_corpus(50, seed=4)
    report = run_bench(small_model(), posts, [50], warmup=0, human_baseline=30.0)
    row = report.rows[0]
    assert row.speedup == pytest.approx(50 * 30.0 / row.elapsed_sec, rel=1e-9)


def test_count_validation():
    posts = synth_corpus(10, seed=1)
    with pytest.raises(DataError, match="exceeds"):
        run_bench(small_model(), posts, [11])
    with pytest.raises(DataError, match="positive"):
        run_bench(small_model(), posts, [0])
    with pytest.raises(DataError, match="at least one"):
        run_bench(small_model(), posts, [])
    with pytest.raises(DataError, match="warmup"):
        run_bench(small_model(), posts, [5], warmup=-1)


def test_synth_corpus_empty():
    assert synth_corpus(0, seed=9) == []


def test_synth_corpus_deterministic():
    a = synth_corpus(50, seed=123)
    b = synth_corpus(50, seed=123)
    assert a == b
    c = synth_corpus(50, seed=124)
    assert a != c


def test_synth_corpus_lengths_in_bounds():
    posts = synth_corpus(2000, seed=0)
    assert len(posts) == 2000
    assert all(15 <= len(p.text) <= 500 for p in posts)
    assert len({p.id for p in posts}) == 2000
