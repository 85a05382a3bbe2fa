"""Inference-time benchmarking against the ~30 s/post human reading rate.

Timing protocol: per item count, a fixed number of untimed warmup passes over
at most the first 100 posts, then one timed sequential single-thread pass
over the first n posts using a monotonic clock. Nothing is averaged; each run
reports its own numbers.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .classifier import ScorerModel, score
from .corpus import Post, TaskLabels
from .errors import DataError
from .rng import SplitMix64

HUMAN_BASELINE_SEC_PER_POST = 30.0

_WARMUP_SIZE = 100

_LATIN_WORDS = (
    "vaccine", "report", "virus", "claims", "study", "people", "data",
    "health", "news", "today", "numbers", "deaths", "cases", "percent",
)
_CYRILLIC_WORDS = ("ваксина", "доклад", "вирус", "данни", "хора", "днес", "новини")
_ARABIC_WORDS = ("لقاح", "تقرير", "فيروس", "بيانات", "اليوم", "أخبار", "صحة")


@dataclass(frozen=True)
class BenchRow:
    n: int
    elapsed_sec: float
    throughput: float  # posts per second
    speedup: float  # vs the human baseline


@dataclass
class BenchReport:
    rows: list[BenchRow]
    human_baseline_sec_per_post: float = HUMAN_BASELINE_SEC_PER_POST
    hardware_label: str = ""
    warmup_passes: int = 1

    def to_dict(self) -> dict:
        return {
            "hardware_label": self.hardware_label,
            "warmup_passes": self.warmup_passes,
            "human_baseline_sec_per_post": self.human_baseline_sec_per_post,
            "rows": [
                {
                    "n": r.n,
                    "elapsed_sec": r.elapsed_sec,
                    "throughput_posts_per_sec": r.throughput,
                    "speedup_vs_human": r.speedup,
                }
                for r in self.rows
            ],
        }


def run_bench(
    scorer: ScorerModel,
    posts: list[Post],
    counts: list[int],
    warmup: int = 1,
    hardware_label: str = "",
    human_baseline: float = HUMAN_BASELINE_SEC_PER_POST,
) -> BenchReport:
    """Time classification of the first n posts for each n in `counts`."""
    if not counts:
        raise DataError("bench needs at least one item count")
    for n in counts:
        if n <= 0:
            raise DataError(f"item counts must be positive, got {n}")
        if n > len(posts):
            raise DataError(f"count {n} exceeds corpus size {len(posts)}")
    if warmup < 0:
        raise DataError("warmup pass count must be non-negative")

    rows = []
    for n in counts:
        for _ in range(warmup):
            for post in posts[: min(n, _WARMUP_SIZE)]:
                score(scorer, post.text)
        start = time.perf_counter()
        for post in posts[:n]:
            score(scorer, post.text)
        elapsed = time.perf_counter() - start
        rows.append(
            BenchRow(
                n=n,
                elapsed_sec=elapsed,
                throughput=n / elapsed,
                speedup=n * human_baseline / elapsed,
            )
        )
    return BenchReport(
        rows=rows,
        human_baseline_sec_per_post=human_baseline,
        hardware_label=hardware_label,
        warmup_passes=warmup,
    )


def synth_corpus(n: int, seed: int = 0) -> list[Post]:
    """Deterministic synthetic posts, 15-500 chars, mixed scripts and labels."""
    if n < 0:
        raise DataError("corpus size must be non-negative")
    rng = SplitMix64(seed)
    pools = (_LATIN_WORDS, _CYRILLIC_WORDS, _ARABIC_WORDS)
    languages = ("en", "bg", "ar")
    posts = []
    for i in range(n):
        pool_idx = rng.below(3)
        pool = pools[pool_idx]
        target = 15 + rng.below(486)  # uniform in [15, 500]
        words = []
        joined_len = -1  # running length of " ".join(words)
        while joined_len < target:
            word = pool[rng.below(len(pool))]
            if rng.below(10) == 0:
                word = str(rng.below(100000))
            words.append(word)
            joined_len += len(word) + 1
        text = " ".join(words)[:target]
        posts.append(
            Post(
                id=f"synth-{i:06d}",
                text=text,
                language=languages[pool_idx],
                source="synthetic",
                labels=TaskLabels(vfc=rng.below(2), harmful=rng.below(2)),
            )
        )
    return posts
