"""Metrics, paired significance testing, and length-bin recall analysis.

Recall is the headline metric here: missing a check-worthy or harmful post
costs more than a false alarm, so positive-class recall/precision/F1 are
reported next to accuracy, with per-language sub-reports.

Undefined ratios are explicit: recall is None when the gold set has no
positives, precision when nothing was predicted positive. They are never
silently reported as 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

from .classifier import Decision, LabelVector, PredictionSet, decide
from .corpus import Post, TASKS
from .errors import EvaluationError


# ---------------------------------------------------------------------------
# Confusion-count reports


@dataclass
class EvalReport:
    task: str
    n: int
    tp: int
    fp: int
    fn: int
    tn: int
    per_language: dict[str, "EvalReport"] = field(default_factory=dict)

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.n

    @property
    def recall(self) -> Optional[float]:
        positives = self.tp + self.fn
        return self.tp / positives if positives else None

    @property
    def precision(self) -> Optional[float]:
        predicted = self.tp + self.fp
        return self.tp / predicted if predicted else None

    @property
    def f1(self) -> Optional[float]:
        p, r = self.precision, self.recall
        if p is None or r is None or p + r == 0:
            return None
        return 2 * p * r / (p + r)

    def to_dict(self) -> dict:
        out = {
            "task": self.task,
            "n": self.n,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
            "accuracy": self.accuracy,
            "recall": self.recall,
            "precision": self.precision,
            "f1": self.f1,
        }
        if self.per_language:
            out["per_language"] = {
                lang: rep.to_dict() for lang, rep in sorted(self.per_language.items())
            }
        return out


Predictions = Union[PredictionSet, Mapping[str, Decision], Mapping[str, LabelVector]]


def _decision_for(preds: Predictions, post_id: str) -> Optional[Decision]:
    if isinstance(preds, PredictionSet):
        vector = preds.scores.get(post_id)
        return None if vector is None else decide(vector)
    value = preds.get(post_id)
    if value is None:
        return None
    if isinstance(value, LabelVector):
        return decide(value)
    return value


def evaluate(preds: Predictions, gold: Sequence[Post], task: str) -> EvalReport:
    """Confusion counts and metrics for one task, plus per-language breakdowns.

    Every gold post carrying the task label needs a prediction that covers the
    task; anything missing is an error listing the ids.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    if not gold:
        raise EvaluationError("gold selection is empty (wrong fold or file?)")
    scored = [p for p in gold if p.labels.get(task) is not None]
    if not scored:
        raise EvaluationError(f"no gold posts carry a {task} label")

    missing = []
    pairs: list[tuple[Post, int]] = []
    for post in scored:
        decision = _decision_for(preds, post.id)
        predicted = None if decision is None else getattr(decision, "vfc" if task == "vfc" else "harmful")
        if predicted is None:
            missing.append(post.id)
        else:
            pairs.append((post, predicted))
    if missing:
        shown = ", ".join(missing[:20])
        more = "" if len(missing) <= 20 else f" (+{len(missing) - 20} more)"
        raise EvaluationError(f"missing predictions for gold ids: {shown}{more}")

    def count(rows: list[tuple[Post, int]]) -> EvalReport:
        tp = fp = fn = tn = 0
        for post, predicted in rows:
            actual = post.labels.get(task)
            if predicted == 1 and actual == 1:
                tp += 1
            elif predicted == 1 and actual == 0:
                fp += 1
            elif predicted == 0 and actual == 1:
                fn += 1
            else:
                tn += 1
        return EvalReport(task=task, n=len(rows), tp=tp, fp=fp, fn=fn, tn=tn)

    report = count(pairs)
    languages = sorted({post.language for post, _ in pairs})
    for language in languages:
        report.per_language[language] = count([(p, d) for p, d in pairs if p.language == language])
    return report


# ---------------------------------------------------------------------------
# McNemar


@dataclass(frozen=True)
class McNemarResult:
    b: int  # A correct, B wrong
    c: int  # A wrong, B correct
    method: str  # "exact-binomial" or "chi-square-cc"
    statistic: Optional[float]
    p_value: float
    alpha: float
    null_rejected: bool
    degenerate: bool = False  # no discordant pairs at all


_EXACT_THRESHOLD = 25


def _chi2_sf_1dof(x: float) -> float:
    # Upper tail of chi-square with 1 dof: P(X > x) = erfc(sqrt(x/2)).
    return math.erfc(math.sqrt(x / 2.0))


def mcnemar(
    a_correct: Mapping[str, bool],
    b_correct: Mapping[str, bool],
    alpha: float = 0.05,
    method: Optional[str] = None,
) -> McNemarResult:
    """Paired significance test over discordant items.

    Automatic method selection: small samples (b + c < 25) use the two-sided
    exact binomial p = min(1, 2 * P(X <= min(b, c))) with
    X ~ Binomial(b + c, 1/2); larger ones the continuity-corrected chi-square
    (|b - c| - 1)^2 / (b + c) with a 1-dof upper tail. Pass
    method="exact-binomial" or "chi-square-cc" to force one branch. Equal
    discordant counts give p = 1.0 either way.
    """
    if method not in (None, "exact-binomial", "chi-square-cc"):
        raise ValueError(f"unknown method {method!r}")
    if set(a_correct) != set(b_correct):
        only_a = sorted(set(a_correct) - set(b_correct))[:10]
        only_b = sorted(set(b_correct) - set(a_correct))[:10]
        raise EvaluationError(
            f"models were evaluated on different item sets (only A: {only_a}, only B: {only_b})"
        )
    b = sum(1 for k, v in a_correct.items() if v and not b_correct[k])
    c = sum(1 for k, v in a_correct.items() if not v and b_correct[k])
    return mcnemar_from_counts(b, c, alpha=alpha, method=method)


def mcnemar_from_counts(
    b: int, c: int, alpha: float = 0.05, method: Optional[str] = None
) -> McNemarResult:
    """The McNemar computation on already-counted discordant pairs."""
    n = b + c
    if n == 0:
        return McNemarResult(
            b=0, c=0, method="exact-binomial", statistic=None, p_value=1.0,
            alpha=alpha, null_rejected=False, degenerate=True,
        )
    if method is None:
        method = "exact-binomial" if n < _EXACT_THRESHOLD else "chi-square-cc"
    if method == "exact-binomial":
        m = min(b, c)
        tail = sum(math.comb(n, k) for k in range(m + 1))
        p = min(1.0, 2 * tail / 2**n)
        return McNemarResult(
            b=b, c=c, method=method, statistic=None, p_value=p,
            alpha=alpha, null_rejected=p < alpha,
        )
    # Continuity correction with clamp: |b - c| <= 1 would otherwise yield a
    # positive statistic for effectively equal counts.
    if abs(b - c) <= 1:
        statistic, p = 0.0, 1.0
    else:
        statistic = (abs(b - c) - 1) ** 2 / n
        p = _chi2_sf_1dof(statistic)
    return McNemarResult(
        b=b, c=c, method=method, statistic=statistic, p_value=p,
        alpha=alpha, null_rejected=p < alpha,
    )


def correctness(preds: Predictions, gold: Sequence[Post], task: str) -> dict[str, bool]:
    """Per-item correctness map used to pair two models for mcnemar()."""
    out: dict[str, bool] = {}
    for post in gold:
        actual = post.labels.get(task)
        if actual is None:
            continue
        decision = _decision_for(preds, post.id)
        predicted = None if decision is None else getattr(decision, "vfc" if task == "vfc" else "harmful")
        if predicted is None:
            raise EvaluationError(f"missing prediction for gold id {post.id!r}")
        out[post.id] = predicted == actual
    return out


# ---------------------------------------------------------------------------
# Length-quartile recall


@dataclass(frozen=True)
class LengthBin:
    low: int  # exclusive, except the first bin which includes its minimum
    high: int  # inclusive
    count: int
    correct: int

    @property
    def recall(self) -> Optional[float]:
        return self.correct / self.count if self.count else None


@dataclass
class LengthBinReport:
    cut_points: tuple[int, int, int]  # 25th / 50th / 75th percentile lengths
    bins: list[LengthBin]
    n: int

    @property
    def overall_recall(self) -> float:
        return sum(b.correct for b in self.bins) / self.n

    def to_dict(self) -> dict:
        return {
            "cut_points": list(self.cut_points),
            "n": self.n,
            "overall_recall": self.overall_recall,
            "bins": [
                {
                    "low": b.low,
                    "high": b.high,
                    "count": b.count,
                    "correct": b.correct,
                    "recall": b.recall,
                }
                for b in self.bins
            ],
        }


def _nearest_rank(sorted_values: Sequence[int], pct: float) -> int:
    rank = math.ceil(pct * len(sorted_values))
    return sorted_values[max(rank, 1) - 1]


def length_quartile_recall(items: Sequence[tuple[str, bool]]) -> LengthBinReport:
    """Bin gold-positive items by character-length quartile and report recall.

    Cut points are nearest-rank 25th/50th/75th percentiles of the item
    lengths; bins are (min, q25], (q25, q50], (q50, q75], (q75, max] with the
    first bin closed on the left.
    """
    if not items:
        raise EvaluationError("length analysis needs at least one item")
    lengths = sorted(len(text) for text, _ in items)
    q25 = _nearest_rank(lengths, 0.25)
    q50 = _nearest_rank(lengths, 0.50)
    q75 = _nearest_rank(lengths, 0.75)
    lo, hi = lengths[0], lengths[-1]
    edges = [(lo, q25), (q25, q50), (q50, q75), (q75, hi)]

    counts = [0, 0, 0, 0]
    corrects = [0, 0, 0, 0]
    for text, correct in items:
        n = len(text)
        if n <= q25:
            idx = 0
        elif n <= q50:
            idx = 1
        elif n <= q75:
            idx = 2
        else:
            idx = 3
        counts[idx] += 1
        corrects[idx] += int(correct)

    bins = [
        LengthBin(low=edges[i][0], high=edges[i][1], count=counts[i], correct=corrects[i])
        for i in range(4)
    ]
    return LengthBinReport(cut_points=(q25, q50, q75), bins=bins, n=len(items))


def positive_items(
    preds: Predictions, gold: Sequence[Post], task: str
) -> list[tuple[str, bool]]:
    """Gold-positive items (TP plus FN) with their prediction correctness."""
    out: list[tuple[str, bool]] = []
    for post in gold:
        if post.labels.get(task) != 1:
            continue
        decision = _decision_for(preds, post.id)
        predicted = None if decision is None else getattr(decision, "vfc" if task == "vfc" else "harmful")
        if predicted is None:
            raise EvaluationError(f"missing prediction for gold id {post.id!r}")
        out.append((post.text, predicted == 1))
    return out


# ---------------------------------------------------------------------------
# Side-by-side comparison


@dataclass
class ComparisonTable:
    metrics: tuple[str, ...]
    rows: list[dict]  # name, values per metric, best flags per metric

    def to_dict(self) -> dict:
        return {"metrics": list(self.metrics), "rows": self.rows}


def compare_report(reports: Sequence[tuple[str, EvalReport]]) -> ComparisonTable:
    """Line up >= 2 reports over the same test set; flag the best per metric."""
    if len(reports) < 2:
        raise EvaluationError("comparison needs at least two reports")
    sizes = {rep.n for _, rep in reports}
    if len(sizes) != 1:
        raise EvaluationError(f"reports cover different test-set sizes: {sorted(sizes)}")
    metrics = ("accuracy", "recall", "f1")
    values = {
        name: {m: getattr(rep, m) for m in metrics} for name, rep in reports
    }
    best: dict[str, Optional[float]] = {}
    for m in metrics:
        defined = [v[m] for v in values.values() if v[m] is not None]
        best[m] = max(defined) if defined else None
    rows = []
    for name, rep in reports:
        row = {"name": name}
        for m in metrics:
            v = values[name][m]
            row[m] = v
            row[f"{m}_best"] = v is not None and v == best[m]
        rows.append(row)
    return ComparisonTable(metrics=metrics, rows=rows)
