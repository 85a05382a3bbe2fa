"""Trainable multi-label scorer over hashed character n-grams.

The output head mirrors the four-label contract used everywhere else in the
package: independent sigmoid scores for (vfc_pos, vfc_neg, harm_pos,
harm_neg). The encoder is a hashed character n-gram featurizer, so the model
needs no vocabulary and handles any script.

Feature hashing: n-grams (with optional STX/ETX boundary sentinels) are
hashed with FNV-1a 64 seeded by the model's hash seed; bucket = hash mod the
power-of-two dimension; bucket counts are L2-normalized.

Model files are versioned binary (see docs/formats.md); predictions travel
as JSON Lines with one record per post id.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .corpus import Post, TASKS
from .errors import DataError, ModelFormatError
from .hashing import fnv1a64

LABEL_NAMES = ("vfc_pos", "vfc_neg", "harm_pos", "harm_neg")

MODEL_MAGIC = b"CKWM"
MODEL_VERSION = 1

_SENTINEL_START = "\x02"
_SENTINEL_END = "\x03"

_SCORE_LO = np.nextafter(0.0, 1.0)
_SCORE_HI = np.nextafter(1.0, 0.0)


# ---------------------------------------------------------------------------
# Score vectors and decisions


@dataclass(frozen=True)
class LabelVector:
    """Four scores in [0,1]; a task pair is either fully present or absent."""

    vfc_pos: Optional[float]
    vfc_neg: Optional[float]
    harm_pos: Optional[float]
    harm_neg: Optional[float]

    def __post_init__(self):
        for pos_name, neg_name in (("vfc_pos", "vfc_neg"), ("harm_pos", "harm_neg")):
            pos, neg = getattr(self, pos_name), getattr(self, neg_name)
            if (pos is None) != (neg is None):
                raise DataError(f"{pos_name}/{neg_name} must be both present or both absent")
            for name, value in ((pos_name, pos), (neg_name, neg)):
                if value is not None and not 0.0 <= value <= 1.0:
                    raise DataError(f"score {name} out of [0,1]: {value!r}")

    def pair(self, task: str) -> Optional[tuple[float, float]]:
        if task == "vfc":
            return None if self.vfc_pos is None else (self.vfc_pos, self.vfc_neg)
        if task == "harmful":
            return None if self.harm_pos is None else (self.harm_pos, self.harm_neg)
        raise ValueError(f"unknown task {task!r}")

    def as_tuple(self) -> tuple:
        return (self.vfc_pos, self.vfc_neg, self.harm_pos, self.harm_neg)


@dataclass(frozen=True)
class Decision:
    vfc: Optional[int]
    harmful: Optional[int]


def decide(vector: LabelVector) -> Decision:
    """Pairwise argmax with ties going to the positive label.

    Missing check-worthy or harmful posts is the costly failure mode, so an
    exact tie predicts the positive class.
    """
    values = {}
    for task in TASKS:
        pair = vector.pair(task)
        values[task] = None if pair is None else (1 if pair[0] >= pair[1] else 0)
    return Decision(vfc=values["vfc"], harmful=values["harmful"])


# ---------------------------------------------------------------------------
# Feature hashing


@dataclass(frozen=True)
class HashingParams:
    ngram_min: int = 1
    ngram_max: int = 5
    hash_dim: int = 2**18
    hash_seed: int = 0
    sentinels: bool = True

    def __post_init__(self):
        if self.ngram_min < 1 or self.ngram_max < self.ngram_min:
            raise DataError("n-gram range must satisfy 1 <= min <= max")
        if self.hash_dim < 2 or self.hash_dim & (self.hash_dim - 1):
            raise DataError(f"hash_dim must be a power of two, got {self.hash_dim}")
        if not 0 <= self.hash_seed < 2**64:
            raise DataError("hash_seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class SparseVector:
    indices: np.ndarray  # int64, sorted, unique
    values: np.ndarray  # float64, unit L2 norm unless empty


def featurize(text: str, params: HashingParams) -> SparseVector:
    """Hash the character n-gram multiset of `text` into `hash_dim` buckets."""
    if not text:
        return SparseVector(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))
    if params.sentinels:
        text = _SENTINEL_START + text + _SENTINEL_END
    mask = params.hash_dim - 1
    seed = params.hash_seed
    counts: dict[int, int] = {}
    n = len(text)
    for size in range(params.ngram_min, params.ngram_max + 1):
        if size > n:
            break
        for start in range(n - size + 1):
            bucket = fnv1a64(text[start:start + size].encode("utf-8"), seed) & mask
            counts[bucket] = counts.get(bucket, 0) + 1
    indices = np.array(sorted(counts), dtype=np.int64)
    values = np.array([counts[i] for i in indices], dtype=np.float64)
    values /= np.linalg.norm(values)
    return SparseVector(indices, values)


# ---------------------------------------------------------------------------
# Model


@dataclass
class ScorerModel:
    params: HashingParams
    weights: np.ndarray  # float32, shape (hash_dim, 4)
    bias: np.ndarray  # float32, shape (4,)
    labels: tuple[str, ...] = LABEL_NAMES
    version: int = MODEL_VERSION

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float32)
        self.bias = np.asarray(self.bias, dtype=np.float32)
        if self.weights.shape != (self.params.hash_dim, 4):
            raise DataError(
                f"weight matrix must be ({self.params.hash_dim}, 4), got {self.weights.shape}"
            )
        if self.bias.shape != (4,):
            raise DataError(f"bias must have shape (4,), got {self.bias.shape}")
        if not (np.isfinite(self.weights).all() and np.isfinite(self.bias).all()):
            raise DataError("model weights must be finite")


def zero_model(params: HashingParams) -> ScorerModel:
    return ScorerModel(
        params=params,
        weights=np.zeros((params.hash_dim, 4), dtype=np.float32),
        bias=np.zeros(4, dtype=np.float32),
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def score(model: ScorerModel, text: str) -> LabelVector:
    """sigmoid(W . featurize(text) + b), clamped into the open interval."""
    feats = featurize(text, model.params)
    z = model.bias.astype(np.float64)
    if len(feats.indices):
        rows = model.weights[feats.indices].astype(np.float64)
        z = z + feats.values @ rows
    s = np.clip(_sigmoid(z), _SCORE_LO, _SCORE_HI)
    return LabelVector(vfc_pos=s[0], vfc_neg=s[1], harm_pos=s[2], harm_neg=s[3])


# ---------------------------------------------------------------------------
# Training


@dataclass(frozen=True)
class TrainConfig:
    """Baseline trainer settings; scheduler knobs mirror the shared protocol:
    batch size 32, anneal factor 0.5, patience 3. The 0.1 learning rate suits
    the linear model (transformer fine-tuning uses far smaller rates)."""

    learning_rate: float = 0.1
    batch_size: int = 32
    anneal_factor: float = 0.5
    patience: int = 3
    max_epochs: int = 15
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise DataError("learning_rate must be positive")
        if self.batch_size < 1:
            raise DataError("batch_size must be positive")
        if not 0 < self.anneal_factor < 1:
            raise DataError("anneal_factor must be in (0, 1)")
        if self.patience < 0:
            raise DataError("patience must be non-negative")
        if self.max_epochs < 1:
            raise DataError("max_epochs must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise DataError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class EpochLog:
    epoch: int  # 1-based
    learning_rate: float  # rate used during this epoch
    train_loss: float
    val_metric: float
    improved: bool
    annealed_after: bool  # scheduler cut the rate at the end of this epoch


@dataclass
class TrainResult:
    best: ScorerModel
    last: ScorerModel
    log: list[EpochLog]


def _targets_and_mask(posts: Sequence[Post]) -> tuple[np.ndarray, np.ndarray]:
    n = len(posts)
    targets = np.zeros((n, 4), dtype=np.float64)
    mask = np.zeros((n, 4), dtype=np.float64)
    for i, post in enumerate(posts):
        if post.labels.vfc is not None:
            targets[i, 0] = post.labels.vfc
            targets[i, 1] = 1 - post.labels.vfc
            mask[i, 0] = mask[i, 1] = 1.0
        if post.labels.harmful is not None:
            targets[i, 2] = post.labels.harmful
            targets[i, 3] = 1 - post.labels.harmful
            mask[i, 2] = mask[i, 3] = 1.0
        if post.labels.vfc is None and post.labels.harmful is None:
            raise DataError(f"post {post.id!r} has no task label; cannot train on it")
    return targets, mask


def _softplus(z: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, z)


def loss_and_grad(
    weights: np.ndarray,
    bias: np.ndarray,
    feats: Sequence[SparseVector],
    targets: np.ndarray,
    mask: np.ndarray,
) -> tuple[float, dict[int, np.ndarray], np.ndarray]:
    """Masked per-label logistic loss, averaged over the batch.

    Returns (loss, weight-gradient rows keyed by bucket index, bias gradient).
    Labels whose mask is zero contribute neither loss nor gradient.
    """
    n = len(feats)
    loss = 0.0
    grad_rows: dict[int, np.ndarray] = {}
    db = np.zeros(4, dtype=np.float64)
    for i, sv in enumerate(feats):
        z = bias.astype(np.float64)
        if len(sv.indices):
            z = z + sv.values @ weights[sv.indices]
        t = targets[i]
        m = mask[i]
        # BCE via softplus keeps the loss finite for any logit.
        loss += float(np.sum(m * (_softplus(z) - t * z)))
        dz = m * (_sigmoid(z) - t)
        db += dz
        for j, idx in enumerate(sv.indices):
            row = grad_rows.get(idx)
            if row is None:
                grad_rows[idx] = sv.values[j] * dz
            else:
                row += sv.values[j] * dz
    inv = 1.0 / n
    for idx in grad_rows:
        grad_rows[idx] *= inv
    return loss * inv, grad_rows, db * inv


def _micro_accuracy(z_scores: np.ndarray, targets: np.ndarray, mask: np.ndarray) -> float:
    """Fraction of present labels whose task-pair argmax matches gold."""
    correct = 0
    total = 0
    for i in range(len(z_scores)):
        for lo in (0, 2):
            if mask[i, lo] == 0:
                continue
            pred = 1 if z_scores[i, lo] >= z_scores[i, lo + 1] else 0
            gold = int(targets[i, lo])
            total += 1
            correct += int(pred == gold)
    return correct / total if total else 0.0


def train_baseline(
    train: Sequence[Post],
    val: Sequence[Post],
    config: TrainConfig = TrainConfig(),
    hashing: HashingParams = HashingParams(),
) -> TrainResult:
    """Mini-batch SGD with plateau annealing; returns best and last models.

    Best = highest validation micro-accuracy epoch; the scheduler multiplies
    the learning rate by anneal_factor once `patience` consecutive epochs
    fail to improve that metric. Deterministic for a fixed seed.
    """
    if not train:
        raise DataError("training set is empty")
    if not val:
        raise DataError("validation set is empty (needed for best-model selection)")

    train_feats = [featurize(p.text, hashing) for p in train]
    val_feats = [featurize(p.text, hashing) for p in val]
    train_targets, train_mask = _targets_and_mask(train)
    val_targets, val_mask = _targets_and_mask(val)

    dim = hashing.hash_dim
    weights = np.zeros((dim, 4), dtype=np.float64)
    bias = np.zeros(4, dtype=np.float64)
    rng = np.random.default_rng(config.seed)

    def val_logits() -> np.ndarray:
        out = np.tile(bias, (len(val_feats), 1))
        for i, sv in enumerate(val_feats):
            if len(sv.indices):
                out[i] += sv.values @ weights[sv.indices]
        return out

    lr = config.learning_rate
    best_metric = -math.inf
    bad_epochs = 0
    best_snapshot: Optional[tuple[np.ndarray, np.ndarray]] = None
    log: list[EpochLog] = []
    n = len(train)
    anneal_after = max(1, config.patience)

    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(n)
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            loss, grad_rows, db = loss_and_grad(
                weights,
                bias,
                [train_feats[i] for i in batch],
                train_targets[batch],
                train_mask[batch],
            )
            for idx, row in grad_rows.items():
                weights[idx] -= lr * row
            bias -= lr * db
            epoch_loss += loss
            n_batches += 1

        metric = _micro_accuracy(val_logits(), val_targets, val_mask)
        improved = metric > best_metric
        if improved:
            best_metric = metric
            best_snapshot = (weights.copy(), bias.copy())
            bad_epochs = 0
        else:
            bad_epochs += 1
        annealed = False
        if bad_epochs >= anneal_after:
            lr *= config.anneal_factor
            bad_epochs = 0
            annealed = True
        log.append(
            EpochLog(
                epoch=epoch,
                learning_rate=lr / config.anneal_factor if annealed else lr,
                train_loss=epoch_loss / n_batches,
                val_metric=metric,
                improved=improved,
                annealed_after=annealed,
            )
        )

    assert best_snapshot is not None
    best = ScorerModel(
        params=hashing,
        weights=best_snapshot[0].astype(np.float32),
        bias=best_snapshot[1].astype(np.float32),
    )
    last = ScorerModel(
        params=hashing,
        weights=weights.astype(np.float32),
        bias=bias.astype(np.float32),
    )
    return TrainResult(best=best, last=last, log=log)


# ---------------------------------------------------------------------------
# Persistence

_HEADER_STRUCT = struct.Struct("<4sHBBIQBB")  # magic, version, nmin, nmax, dim, seed, sentinels, n_labels


def save_model(model: ScorerModel, path: str | Path) -> None:
    """Write the versioned binary model file (layout in docs/formats.md)."""
    labels_blob = "\n".join(model.labels).encode("utf-8")
    parts = [
        _HEADER_STRUCT.pack(
            MODEL_MAGIC,
            MODEL_VERSION,
            model.params.ngram_min,
            model.params.ngram_max,
            model.params.hash_dim,
            model.params.hash_seed,
            1 if model.params.sentinels else 0,
            len(model.labels),
        ),
        struct.pack("<H", len(labels_blob)),
        labels_blob,
        model.weights.astype("<f4").tobytes(),
        model.bias.astype("<f4").tobytes(),
    ]
    payload = b"".join(parts)
    checksum = fnv1a64(payload)
    Path(path).write_bytes(payload + struct.pack("<Q", checksum))


def load_model(path: str | Path) -> ScorerModel:
    """Read a model file; rejects bad magic, unsupported versions, and any
    checksum mismatch (truncation included)."""
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER_STRUCT.size + 8 or blob[:4] != MODEL_MAGIC:
        raise ModelFormatError(f"{path}: not a scorer model file")
    (version,) = struct.unpack_from("<H", blob, 4)
    if version != MODEL_VERSION:
        raise ModelFormatError(
            f"{path}: unsupported model version {version} (this build reads version {MODEL_VERSION})"
        )
    payload, stored = blob[:-8], struct.unpack("<Q", blob[-8:])[0]
    if fnv1a64(payload) != stored:
        raise ModelFormatError(f"{path}: checksum mismatch, file corrupted or truncated")
    _, _, nmin, nmax, dim, seed, sentinels, n_labels = _HEADER_STRUCT.unpack_from(payload, 0)
    offset = _HEADER_STRUCT.size
    (labels_len,) = struct.unpack_from("<H", payload, offset)
    offset += 2
    labels = tuple(payload[offset:offset + labels_len].decode("utf-8").split("\n"))
    offset += labels_len
    expected = offset + dim * 4 * 4 + 4 * 4
    if len(payload) != expected:
        raise ModelFormatError(f"{path}: checksum mismatch, file corrupted or truncated")
    weights = np.frombuffer(payload, dtype="<f4", count=dim * 4, offset=offset).reshape(dim, 4)
    offset += dim * 4 * 4
    bias = np.frombuffer(payload, dtype="<f4", count=4, offset=offset)
    params = HashingParams(
        ngram_min=nmin, ngram_max=nmax, hash_dim=dim, hash_seed=seed, sentinels=bool(sentinels)
    )
    return ScorerModel(
        params=params, weights=weights.copy(), bias=bias.copy(), labels=labels, version=version
    )


# ---------------------------------------------------------------------------
# Prediction files


@dataclass
class PredictionSet:
    scores: dict[str, LabelVector]
    provenance: str = ""

    def __len__(self) -> int:
        return len(self.scores)


def _parse_score(raw, key: str, lineno: int, path) -> Optional[float]:
    if raw is None or raw == "NA":
        return None
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise DataError(f"{path}:{lineno}: field {key!r} must be a number or \"NA\"")
    value = float(raw)
    if not 0.0 <= value <= 1.0:
        raise DataError(f"{path}:{lineno}: score {key}={value} outside [0,1]")
    return value


def load_predictions(path: str | Path) -> PredictionSet:
    """Read a JSON Lines predictions file (format in docs/formats.md)."""
    p = Path(path)
    scores: dict[str, LabelVector] = {}
    provenance = ""
    with p.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{p}:{lineno}: malformed JSON: {exc.msg}") from exc
            if not isinstance(record, dict) or "id" not in record:
                raise DataError(f"{p}:{lineno}: record must be an object with an 'id'")
            post_id = str(record["id"])
            if post_id in scores:
                raise DataError(f"{p}:{lineno}: duplicate id {post_id!r}")
            missing = [k for k in LABEL_NAMES if k not in record]
            if missing:
                raise DataError(f"{p}:{lineno}: missing fields: {', '.join(missing)}")
            values = {k: _parse_score(record[k], k, lineno, p) for k in LABEL_NAMES}
            try:
                vector = LabelVector(**values)
            except DataError as exc:
                raise DataError(f"{p}:{lineno}: {exc}") from exc
            scores[post_id] = vector
            model = record.get("model")
            if model:
                if provenance and provenance != model:
                    raise DataError(f"{p}:{lineno}: conflicting model names in one file")
                provenance = model
    return PredictionSet(scores=scores, provenance=provenance or p.stem)


def write_predictions(preds: PredictionSet, path: str | Path) -> None:
    p = Path(path)
    with p.open("w", encoding="utf-8") as fh:
        for post_id, vector in preds.scores.items():
            record = {"id": post_id}
            for key, value in zip(LABEL_NAMES, vector.as_tuple()):
                record[key] = "NA" if value is None else float(value)
            if preds.provenance:
                record["model"] = preds.provenance
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def predict_posts(model: ScorerModel, posts: Sequence[Post], provenance: str = "") -> PredictionSet:
    """Score every post; duplicate ids in the input are an error."""
    scores: dict[str, LabelVector] = {}
    for post in posts:
        if post.id in scores:
            raise DataError(f"duplicate post id {post.id!r} in prediction input")
        scores[post.id] = score(model, post.text)
    return PredictionSet(scores=scores, provenance=provenance)
