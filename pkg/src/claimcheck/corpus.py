"""Dataset ingestion, collection composition, and deterministic splits.

File formats (documented in full in docs/formats.md):

* Dataset TSV: UTF-8, header row, tab-separated. Embedded tabs, newlines,
  carriage returns, and backslashes in the text field are escaped as ``\\t``,
  ``\\n``, ``\\r``, ``\\\\``. Label columns hold literal ``0``/``1`` or the
  empty string for "label absent".
* Materialized collection: the same TSV with canonical columns
  ``id, text, language, vfc_label, harmful_label, split``.
* Recipe: JSON with a ``recipe_version`` field; see ``read_recipe``.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .errors import DataError, RecipeError, SchemaError
from .rng import SplitMix64, apportion

logger = logging.getLogger("claimcheck.corpus")

_LANG_RE = re.compile(r"^[a-z]{2,3}$")

TASKS = ("vfc", "harmful")
FOLDS = ("train", "val", "test")

RECIPE_VERSION = 1


# ---------------------------------------------------------------------------
# Domain types


@dataclass(frozen=True)
class TaskLabels:
    """Gold binary labels, one optional slot per task."""

    vfc: Optional[int] = None
    harmful: Optional[int] = None

    def __post_init__(self):
        for task in TASKS:
            value = getattr(self, task)
            if value is not None and value not in (0, 1):
                raise DataError(f"label {task} must be 0 or 1, got {value!r}")

    def get(self, task: str) -> Optional[int]:
        if task not in TASKS:
            raise ValueError(f"unknown task {task!r}")
        return getattr(self, task)

    def with_task(self, task: str, value: int) -> "TaskLabels":
        """Return a copy with one task's label overwritten; the other is kept."""
        if task not in TASKS:
            raise ValueError(f"unknown task {task!r}")
        return replace(self, **{task: value})


@dataclass(frozen=True)
class Post:
    """One social media item."""

    id: str
    text: str
    language: str
    source: str
    labels: TaskLabels = field(default_factory=TaskLabels)

    def __post_init__(self):
        if not self.id:
            raise DataError("post id must be non-empty")
        if self.language != "und" and not _LANG_RE.match(self.language):
            raise DataError(
                f"post {self.id!r}: language must match ^[a-z]{{2,3}}$ or be 'und', "
                f"got {self.language!r}"
            )


@dataclass(frozen=True)
class SplitSpec:
    """How to cut a collection into train/val/test.

    mode="explicit-counts": train/val/test are integers summing to the
    collection size. mode="fractions": they sum to 1.0 (within 1e-9) and
    stratification defaults to on.
    """

    mode: str
    train: float
    val: float
    test: float
    seed: int = 0
    stratify: Optional[bool] = None

    def __post_init__(self):
        if self.mode not in ("explicit-counts", "fractions"):
            raise DataError(f"split mode must be explicit-counts or fractions, got {self.mode!r}")
        if not 0 <= self.seed < 2**64:
            raise DataError("split seed must be a 64-bit unsigned integer")
        parts = (self.train, self.val, self.test)
        if any(p < 0 for p in parts):
            raise DataError("split sizes must be non-negative")
        if self.mode == "fractions" and abs(sum(parts) - 1.0) > 1e-9:
            raise DataError(f"split fractions must sum to 1.0, got {sum(parts)!r}")
        if self.mode == "explicit-counts":
            for p in parts:
                if p != int(p):
                    raise DataError("explicit-counts split requires integer sizes")

    @property
    def stratified(self) -> bool:
        # Explicit counts must be reproduced exactly regardless of strata,
        # so stratification defaults off there and on for fractions.
        if self.stratify is None:
            return self.mode == "fractions"
        return self.stratify


@dataclass
class Collection:
    id: str
    posts: list[Post]
    split_assignment: Optional[dict[str, str]] = None

    def fold(self, name: str) -> list[Post]:
        if self.split_assignment is None:
            raise DataError(f"collection {self.id!r} has no split assignment")
        if name not in FOLDS:
            raise ValueError(f"unknown fold {name!r}")
        return [p for p in self.posts if self.split_assignment[p.id] == name]


@dataclass(frozen=True)
class SourceSpec:
    """One source entry of a recipe: a dataset reference plus its selectors."""

    dataset: str
    languages: Optional[tuple[str, ...]] = None
    label_filter: Optional[tuple[str, int]] = None  # keep rows where task == value
    force_label: Optional[tuple[str, int]] = None  # overwrite one task's label
    id_prefix: str = ""


@dataclass(frozen=True)
class Transform:
    name: str
    method: Optional[int] = None  # preprocess(method)
    target: Optional[str] = None  # translate(target_lang)


KNOWN_TRANSFORMS = ("aggregate_triplets", "alphabet_filter", "preprocess", "translate")


@dataclass(frozen=True)
class CollectionRecipe:
    id: str
    sources: tuple[SourceSpec, ...]
    transforms: tuple[Transform, ...] = ()
    split: Optional[SplitSpec] = None

    def __post_init__(self):
        names = [t.name for t in self.transforms]
        if len(names) != len(set(names)):
            raise RecipeError(f"recipe {self.id!r}: duplicate transform in {names}")
        for t in self.transforms:
            if t.name not in KNOWN_TRANSFORMS:
                raise RecipeError(f"recipe {self.id!r}: unknown transform {t.name!r}")


# ---------------------------------------------------------------------------
# TSV escaping

_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESCAPES = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}


def escape_field(value: str) -> str:
    out = []
    for ch in value:
        out.append(_ESCAPES.get(ch, ch))
    return "".join(out)


def unescape_field(value: str, where: str = "") -> str:
    out = []
    i = 0
    while i < len(value):
        ch = value[i]
        if ch == "\\":
            if i + 1 >= len(value):
                raise DataError(f"{where}: dangling backslash escape")
            nxt = value[i + 1]
            if nxt not in _UNESCAPES:
                raise DataError(f"{where}: unknown escape sequence \\{nxt}")
            out.append(_UNESCAPES[nxt])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


# ---------------------------------------------------------------------------
# Dataset loading


@dataclass(frozen=True)
class DatasetFormat:
    """Maps header names of a TSV onto the Post fields."""

    id_col: str = "id"
    text_col: str = "text"
    language_col: str = "language"
    vfc_col: Optional[str] = "vfc_label"
    harmful_col: Optional[str] = "harmful_label"


def _parse_label(raw: str, column: str, lineno: int, path: Path) -> Optional[int]:
    if raw == "":
        return None
    if raw in ("0", "1"):
        return int(raw)
    raise DataError(f"{path}:{lineno}: column {column!r} must be 0, 1, or empty, got {raw!r}")


def load_dataset(path: str | Path, fmt: DatasetFormat = DatasetFormat(),
                 source: Optional[str] = None) -> list[Post]:
    """Read one TSV dataset into Posts, preserving file order.

    Raises SchemaError when a named column is missing from the header,
    DataError on malformed rows (with line number) or duplicate ids.
    """
    p = Path(path)
    source_name = source if source is not None else p.stem
    with p.open("r", encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise SchemaError(f"{p}: empty file, expected a header row")

    header = lines[0].split("\t")
    col_index: dict[str, int] = {}
    for i, name in enumerate(header):
        col_index.setdefault(name, i)

    def need(col: str) -> int:
        if col not in col_index:
            raise SchemaError(f"{p}: missing required column {col!r}")
        return col_index[col]

    idx_id = need(fmt.id_col)
    idx_text = need(fmt.text_col)
    idx_lang = need(fmt.language_col)
    # Label columns are optional in the file even when named in the format.
    idx_vfc = col_index.get(fmt.vfc_col) if fmt.vfc_col is not None else None
    idx_harm = col_index.get(fmt.harmful_col) if fmt.harmful_col is not None else None

    posts: list[Post] = []
    seen: dict[str, int] = {}
    duplicates: list[str] = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != len(header):
            raise DataError(
                f"{p}:{lineno}: expected {len(header)} fields, got {len(fields)}"
            )
        where = f"{p}:{lineno}"
        post_id = fields[idx_id]
        if post_id == "":
            raise DataError(f"{where}: empty id")
        if post_id in seen:
            duplicates.append(post_id)
        seen[post_id] = lineno
        text = unescape_field(fields[idx_text], where)
        language = fields[idx_lang]
        vfc = _parse_label(fields[idx_vfc], fmt.vfc_col, lineno, p) if idx_vfc is not None else None
        harm = (
            _parse_label(fields[idx_harm], fmt.harmful_col, lineno, p)
            if idx_harm is not None
            else None
        )
        try:
            posts.append(
                Post(
                    id=post_id,
                    text=text,
                    language=language,
                    source=source_name,
                    labels=TaskLabels(vfc=vfc, harmful=harm),
                )
            )
        except DataError as exc:
            raise DataError(f"{where}: {exc}") from exc
    if duplicates:
        listing = ", ".join(sorted(set(duplicates)))
        raise DataError(f"{p}: duplicate ids: {listing}")
    return posts


def write_dataset(posts: Sequence[Post], path: str | Path,
                  split_assignment: Optional[Mapping[str, str]] = None) -> None:
    """Write posts as canonical TSV; adds a split column when given."""
    p = Path(path)
    header = ["id", "text", "language", "vfc_label", "harmful_label"]
    if split_assignment is not None:
        header.append("split")
    rows = ["\t".join(header)]
    for post in posts:
        fields = [
            post.id,
            escape_field(post.text),
            post.language,
            "" if post.labels.vfc is None else str(post.labels.vfc),
            "" if post.labels.harmful is None else str(post.labels.harmful),
        ]
        if split_assignment is not None:
            fields.append(split_assignment[post.id])
        rows.append("\t".join(fields))
    p.write_text("\n".join(rows) + "\n", encoding="utf-8")


def write_collection(collection: Collection, path: str | Path) -> None:
    write_dataset(collection.posts, path, collection.split_assignment)


def load_collection(path: str | Path, collection_id: Optional[str] = None) -> Collection:
    """Read a materialized collection TSV (must carry a split column)."""
    p = Path(path)
    posts = load_dataset(p)
    header = p.read_text(encoding="utf-8").split("\n", 1)[0].split("\t")
    if "split" not in header:
        raise SchemaError(f"{p}: missing required column 'split'")
    idx_split = header.index("split")
    idx_id = header.index("id")
    assignment: dict[str, str] = {}
    with p.open("r", encoding="utf-8") as fh:
        fh.readline()
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            fold = fields[idx_split]
            if fold not in FOLDS:
                raise DataError(f"{p}:{lineno}: split must be one of {FOLDS}, got {fold!r}")
            assignment[fields[idx_id]] = fold
    return Collection(
        id=collection_id or p.stem,
        posts=posts,
        split_assignment=assignment,
    )


# ---------------------------------------------------------------------------
# Recipes


def _source_from_dict(raw: dict, recipe_id: str) -> SourceSpec:
    if "dataset" not in raw:
        raise RecipeError(f"recipe {recipe_id!r}: source missing 'dataset'")

    def pair(key: str) -> Optional[tuple[str, int]]:
        if key not in raw:
            return None
        entry = raw[key]
        if not isinstance(entry, dict) or "task" not in entry or "value" not in entry:
            raise RecipeError(f"recipe {recipe_id!r}: {key} needs 'task' and 'value'")
        if entry["task"] not in TASKS:
            raise RecipeError(f"recipe {recipe_id!r}: unknown task {entry['task']!r}")
        if entry["value"] not in (0, 1):
            raise RecipeError(f"recipe {recipe_id!r}: {key} value must be 0 or 1")
        return (entry["task"], int(entry["value"]))

    languages = raw.get("languages")
    return SourceSpec(
        dataset=raw["dataset"],
        languages=tuple(languages) if languages else None,
        label_filter=pair("label_filter"),
        force_label=pair("force_label"),
        id_prefix=raw.get("id_prefix", ""),
    )


def _split_from_dict(raw: dict) -> SplitSpec:
    return SplitSpec(
        mode=raw["mode"],
        train=raw["train"],
        val=raw["val"],
        test=raw["test"],
        seed=raw.get("seed", 0),
        stratify=raw.get("stratify"),
    )


def read_recipe(path: str | Path) -> tuple[CollectionRecipe, dict[str, str]]:
    """Parse a recipe file; returns the recipe plus dataset-id -> path mapping."""
    p = Path(path)
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise RecipeError(f"{p}: not valid JSON: {exc}") from exc
    version = raw.get("recipe_version")
    if version != RECIPE_VERSION:
        raise RecipeError(f"{p}: unsupported recipe_version {version!r} (supported: {RECIPE_VERSION})")
    if "id" not in raw or "sources" not in raw:
        raise RecipeError(f"{p}: recipe needs 'id' and 'sources'")
    sources = tuple(_source_from_dict(s, raw["id"]) for s in raw["sources"])
    transforms = []
    for t in raw.get("transforms", []):
        if not isinstance(t, dict) or "name" not in t:
            raise RecipeError(f"{p}: each transform needs a 'name'")
        transforms.append(Transform(name=t["name"], method=t.get("method"), target=t.get("target")))
    split = _split_from_dict(raw["split"]) if "split" in raw else None
    recipe = CollectionRecipe(
        id=raw["id"], sources=sources, transforms=tuple(transforms), split=split
    )
    paths = {
        s["dataset"]: s["path"] for s in raw["sources"] if "path" in s
    }
    return recipe, paths


# ---------------------------------------------------------------------------
# Operations


def aggregate_triplets(posts: Sequence[Post]) -> list[Post]:
    """Merge consecutive groups of three posts into one.

    Text is joined with a single space, the id is the first member's id plus
    "+agg", and a final group of one or two is merged as-is. All posts must
    carry identical labels; mixing label values is an error.
    """
    posts = list(posts)
    if not posts:
        return []
    labels = posts[0].labels
    for p in posts[1:]:
        if p.labels != labels:
            raise DataError(
                f"aggregate_triplets: mixed labels ({labels} vs {p.labels} on {p.id!r})"
            )
    out: list[Post] = []
    for start in range(0, len(posts), 3):
        group = posts[start:start + 3]
        first = group[0]
        out.append(
            Post(
                id=first.id + "+agg",
                text=" ".join(g.text for g in group),
                language=first.language,
                source=first.source,
                labels=labels,
            )
        )
    return out


def _apply_source(spec: SourceSpec, posts: Sequence[Post]) -> list[Post]:
    selected = list(posts)
    if spec.languages is not None:
        selected = [p for p in selected if p.language in spec.languages]
        if not selected:
            logger.warning(
                "selector matched zero posts",
                extra={"fields": {"dataset": spec.dataset, "selector": "languages"}},
            )
    if spec.label_filter is not None:
        task, value = spec.label_filter
        selected = [p for p in selected if p.labels.get(task) == value]
        if not selected:
            logger.warning(
                "selector matched zero posts",
                extra={"fields": {"dataset": spec.dataset, "selector": "label_filter"}},
            )
    if spec.force_label is not None:
        task, value = spec.force_label
        selected = [replace(p, labels=p.labels.with_task(task, value)) for p in selected]
    if spec.id_prefix:
        selected = [replace(p, id=spec.id_prefix + p.id) for p in selected]
    return selected


def compose_collection(
    recipe: CollectionRecipe,
    datasets: Mapping[str, Sequence[Post]],
    translator=None,
    preprocess_fn: Optional[Callable] = None,
) -> Collection:
    """Materialize a collection: selectors per source (declared order), then
    transforms (declared order), then the split.

    `preprocess_fn` and `translator` back the preprocess/translate transforms;
    they are injected here to keep this module free of text-cleaning logic.
    """
    posts: list[Post] = []
    for spec in recipe.sources:
        if spec.dataset not in datasets:
            raise RecipeError(f"recipe {recipe.id!r}: unknown source dataset {spec.dataset!r}")
        if not datasets[spec.dataset]:
            logger.warning(
                "source dataset is empty",
                extra={"fields": {"recipe": recipe.id, "dataset": spec.dataset}},
            )
        posts.extend(_apply_source(spec, datasets[spec.dataset]))

    seen: set[str] = set()
    collisions: set[str] = set()
    for p in posts:
        if p.id in seen:
            collisions.add(p.id)
        seen.add(p.id)
    collisions = sorted(collisions)
    if collisions:
        raise DataError(
            f"recipe {recipe.id!r}: id collision across sources: {', '.join(collisions[:10])}"
            " (set id_prefix on a source to disambiguate)"
        )

    for transform in recipe.transforms:
        if transform.name == "aggregate_triplets":
            posts = aggregate_triplets(posts)
        elif transform.name == "alphabet_filter":
            from .preprocess import DEFAULT_WHITELIST, alphabet_keep

            posts = [p for p in posts if alphabet_keep(p.text, DEFAULT_WHITELIST)]
        elif transform.name == "preprocess":
            from .preprocess import PreprocessConfig
            from .preprocess import preprocess as run_preprocess

            fn = preprocess_fn or run_preprocess
            posts = fn(posts, PreprocessConfig(method=transform.method or 1))
        elif transform.name == "translate":
            if translator is None:
                raise RecipeError(
                    f"recipe {recipe.id!r}: translate transform requires a translator"
                )
            from .preprocess import translate_posts

            posts = translate_posts(posts, translator, transform.target or "en")
        else:  # unreachable: recipe validation rejects unknown names
            raise RecipeError(f"unknown transform {transform.name!r}")

    collection = Collection(id=recipe.id, posts=posts)
    if recipe.split is not None:
        collection = split(collection, recipe.split)
    return collection


def _fold_sizes(spec: SplitSpec, total: int) -> list[int]:
    if spec.mode == "explicit-counts":
        counts = [int(spec.train), int(spec.val), int(spec.test)]
        if sum(counts) != total:
            raise DataError(
                f"explicit split counts sum to {sum(counts)} but the collection has {total} posts"
            )
        return counts
    return apportion(total, [spec.train, spec.val, spec.test])


def _stratum_key(post: Post) -> tuple:
    labels = post.labels
    return (
        post.language,
        -1 if labels.vfc is None else labels.vfc,
        -1 if labels.harmful is None else labels.harmful,
    )


def split(collection: Collection, spec: SplitSpec) -> Collection:
    """Assign every post to exactly one of train/val/test.

    Non-stratified: one Fisher-Yates shuffle of the posts in collection order,
    then prefix assignment (train first, then val, then test). Stratified:
    strata are (language, vfc, harmful) groups processed in sorted key order,
    each shuffled by the same generator and apportioned by largest remainder.
    Deterministic for a fixed (posts, seed).
    """
    posts = collection.posts
    rng = SplitMix64(spec.seed)
    assignment: dict[str, str] = {}

    if spec.stratified and spec.mode == "fractions":
        strata: dict[tuple, list[int]] = {}
        for i, post in enumerate(posts):
            strata.setdefault(_stratum_key(post), []).append(i)
        fractions = [spec.train, spec.val, spec.test]
        for key in sorted(strata):
            indexes = strata[key]
            rng.shuffle(indexes)
            sizes = apportion(len(indexes), fractions)
            cursor = 0
            for fold, size in zip(FOLDS, sizes):
                for i in indexes[cursor:cursor + size]:
                    assignment[posts[i].id] = fold
                cursor += size
    else:
        sizes = _fold_sizes(spec, len(posts))
        indexes = list(range(len(posts)))
        rng.shuffle(indexes)
        cursor = 0
        for fold, size in zip(FOLDS, sizes):
            for i in indexes[cursor:cursor + size]:
                assignment[posts[i].id] = fold
            cursor += size

    return Collection(id=collection.id, posts=list(posts), split_assignment=assignment)


# ---------------------------------------------------------------------------
# Reference-count verification


@dataclass(frozen=True)
class CountRow:
    language: str
    expected_pos: int
    expected_neg: int
    actual_pos: int
    actual_neg: int

    @property
    def ok(self) -> bool:
        return self.expected_pos == self.actual_pos and self.expected_neg == self.actual_neg


@dataclass
class VerificationReport:
    task: str
    fold: Optional[str]
    rows: list[CountRow]
    totals: CountRow

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.rows) and self.totals.ok


def verify_reference_counts(
    collection: Collection,
    task: str,
    expectations: Mapping[str, tuple[int, int]],
    expected_totals: Optional[tuple[int, int]] = None,
    fold: Optional[str] = "test",
) -> VerificationReport:
    """Count positive/negative labels per language and compare to expectations.

    `expectations` maps language -> (positives, negatives); `fold` selects one
    split (default test) or, when None, the whole collection. Mismatches are
    reported, never raised.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    posts = collection.fold(fold) if fold is not None else collection.posts
    counts: dict[str, list[int]] = {}
    for post in posts:
        label = post.labels.get(task)
        if label is None:
            continue
        bucket = counts.setdefault(post.language, [0, 0])
        bucket[0 if label == 1 else 1] += 1
    rows = []
    for language in sorted(set(expectations) | set(counts)):
        exp = expectations.get(language, (0, 0))
        act = counts.get(language, [0, 0])
        rows.append(
            CountRow(
                language=language,
                expected_pos=exp[0],
                expected_neg=exp[1],
                actual_pos=act[0],
                actual_neg=act[1],
            )
        )
    total_act = [sum(r.actual_pos for r in rows), sum(r.actual_neg for r in rows)]
    if expected_totals is None:
        expected_totals = (
            sum(r.expected_pos for r in rows),
            sum(r.expected_neg for r in rows),
        )
    totals = CountRow(
        language="TOTAL",
        expected_pos=expected_totals[0],
        expected_neg=expected_totals[1],
        actual_pos=total_act[0],
        actual_neg=total_act[1],
    )
    return VerificationReport(task=task, fold=fold, rows=rows, totals=totals)
