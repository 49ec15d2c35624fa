"""Seeded training of the credential-page head on synthetic feature corpora.

The staged dependency order mirrors the detection pipeline's model hierarchy:
stage A (detector feature extraction) must be materialized as a feature dump
before stage C (the classification head over those features) may train, since
any change upstream invalidates the head. Stage B (the brand classifier) has
no desk-scale artifact: the pipeline's synthetic brand backend carries no
weights.

Everything is a pure function of (corpus bytes, hyperparameters, seed);
re-running a stage yields byte-identical exports.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import pgwt

STAGES = ("A", "B", "C")


class StageOrderError(Exception):
    """Stage C attempted without a completed stage A artifact."""


class DivergenceError(Exception):
    """Training loss went non-finite."""


@dataclass(frozen=True)
class TrainingRun:
    stage: str
    dataset: Path
    epochs: int
    seed: int
    export_path: Path

    def __post_init__(self):
        if self.stage not in STAGES:
            raise ValueError(f"stage must be one of {STAGES}, got {self.stage!r}")


@dataclass
class Corpus:
    features: np.ndarray  # (P, D) float32
    labels: np.ndarray  # (P,) int, 1 = credential page


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def load_corpus(features_path: Path, manifest_path: Path | None = None) -> Corpus:
    """Feature rows from a PGWT dump; labels from the manifest when given,
    else from the dump's own labels tensor. Row order must match the
    manifest line order (the generator guarantees it)."""
    tensors, _ = pgwt.load(Path(features_path).read_bytes())
    if "features" not in tensors:
        raise pgwt.PgwtError(f"{features_path} holds no 'features' tensor")
    feats = tensors["features"].astype(np.float32)
    if manifest_path is not None:
        labels = []
        with open(manifest_path, "r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    labels.append(1 if json.loads(line)["crp"] else 0)
        labels = np.array(labels, dtype=np.int64)
    elif "labels" in tensors:
        labels = tensors["labels"].astype(np.int64)
    else:
        raise pgwt.PgwtError("no manifest given and the dump holds no 'labels' tensor")
    if len(labels) != feats.shape[0]:
        raise ValueError(f"{feats.shape[0]} feature rows vs {len(labels)} labels")
    if "labels" in tensors and manifest_path is not None:
        if not np.array_equal(tensors["labels"].astype(np.int64), labels):
            raise ValueError("manifest labels disagree with the dump's labels tensor")
    return Corpus(feats, labels)


def prepare_stage_a(features_path: Path, manifest_path: Path, out_path: Path) -> dict:
    """Register a feature corpus as the completed stage A artifact."""
    corpus = load_corpus(features_path, manifest_path)
    marker = {
        "stage": "A",
        "features": str(Path(features_path).resolve()),
        "manifest": str(Path(manifest_path).resolve()),
        "sha256": _sha256(Path(features_path)),
        "rows": int(corpus.features.shape[0]),
        "dim": int(corpus.features.shape[1]),
        "positives": int(corpus.labels.sum()),
    }
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(marker, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return marker


def require_stage_a(marker_path: Path | None) -> dict:
    if marker_path is None or not Path(marker_path).exists():
        raise StageOrderError(
            "stage C trains on stage A feature exports; run 'modelforge prepare' first"
        )
    marker = json.loads(Path(marker_path).read_text())
    features = Path(marker["features"])
    if not features.exists():
        raise StageOrderError(f"stage A features missing: {features}")
    if _sha256(features) != marker["sha256"]:
        raise StageOrderError(f"stage A features changed since prepare: {features}")
    return marker


@dataclass
class TrainReport:
    seed: int
    epochs: int
    learning_rate: float
    hidden_dims: tuple[int, ...]
    dropout_rate: float
    n_train: int
    n_test: int
    train_accuracy: float
    test_accuracy: float
    final_loss: float
    loss_curve: list[float] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "hidden_dims": list(self.hidden_dims),
            "dropout_rate": self.dropout_rate,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "train_accuracy": self.train_accuracy,
            "test_accuracy": self.test_accuracy,
            "final_loss": self.final_loss,
            "loss_curve": self.loss_curve,
        }


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _forward(params, x, dropout_rate, rng):
    """Returns activations per layer; applies inverted dropout when rng given."""
    acts = [x]
    n_layers = len(params) // 2
    for i in range(n_layers):
        w, b = params[f"layer{i}.w"], params[f"layer{i}.b"]
        z = acts[-1] @ w + b
        if i < n_layers - 1:
            z = np.maximum(z, 0.0)
            if rng is not None and dropout_rate > 0.0:
                keep = 1.0 - dropout_rate
                mask = (rng.random(z.shape) < keep).astype(z.dtype) / keep
                z = z * mask
        acts.append(z)
    return acts


def train_crp_head(
    corpus: Corpus,
    hidden_dims: tuple[int, ...] = (32,),
    dropout_rate: float = 0.2,
    seed: int = 0,
    epochs: int = 20,
    learning_rate: float = 2e-3,
    batch_size: int = 64,
    test_fraction: float = 0.2,
    weight_decay: float = 2.0,
) -> tuple[dict[str, np.ndarray], TrainReport]:
    """Train the two-logit head with decoupled-weight-decay Adam and a seeded
    train/test split.

    Dropout is applied on hidden activations during training only; the
    exported weights carry no trace of it beyond the report metadata. The
    decay default is large because desk-scale runs take few optimizer steps;
    it is what stops the head from memorizing slot-specific noise instead of
    consolidating the stable page-level signal.
    """
    x, y = corpus.features, corpus.labels
    n, dim = x.shape
    dims = [dim, *hidden_dims, 2]
    rng = np.random.default_rng(seed)

    perm = rng.permutation(n)
    n_test = max(1, int(round(n * test_fraction)))
    test_idx, train_idx = perm[:n_test], perm[n_test:]
    if len(train_idx) < 300:
        warnings.warn(
            f"only {len(train_idx)} training rows against {dim} inputs; the head "
            f"will likely memorize noise. Generate at least ~400 pages.",
            stacklevel=2,
        )
    x_train, y_train = x[train_idx], y[train_idx]
    x_test, y_test = x[test_idx], y[test_idx]

    params: dict[str, np.ndarray] = {}
    for i, (a, b) in enumerate(zip(dims, dims[1:])):
        scale = np.sqrt(2.0 / a) if i < len(dims) - 2 else np.sqrt(1.0 / a)
        params[f"layer{i}.w"] = (rng.normal(0.0, scale, (a, b))).astype(np.float32)
        params[f"layer{i}.b"] = np.zeros(b, dtype=np.float32)

    m = {k: np.zeros_like(v) for k, v in params.items()}
    v = {k: np.zeros_like(p) for k, p in params.items()}
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0
    n_layers = len(dims) - 1
    loss_curve: list[float] = []

    for epoch in range(epochs):
        order = rng.permutation(len(x_train))
        epoch_loss = 0.0
        for start in range(0, len(order), batch_size):
            batch = order[start : start + batch_size]
            xb, yb = x_train[batch], y_train[batch]
            with np.errstate(over="ignore", invalid="ignore"):
                # overflow surfaces as a non-finite loss, reported below
                acts = _forward(params, xb, dropout_rate, rng)
                probs = _softmax(acts[-1].astype(np.float64))
            loss = float(-np.log(probs[np.arange(len(yb)), yb] + 1e-12).mean())
            epoch_loss += loss * len(yb)
            if not np.isfinite(loss):
                raise DivergenceError(
                    f"loss went non-finite at epoch {epoch} step {step} (lr={learning_rate})"
                )
            grad_z = probs.astype(np.float32)
            grad_z[np.arange(len(yb)), yb] -= 1.0
            grad_z /= len(yb)
            grads: dict[str, np.ndarray] = {}
            for i in range(n_layers - 1, -1, -1):
                grads[f"layer{i}.w"] = acts[i].T @ grad_z
                grads[f"layer{i}.b"] = grad_z.sum(axis=0)
                if i > 0:
                    grad_z = (grad_z @ params[f"layer{i}.w"].T) * (acts[i] > 0)
            step += 1
            for key, grad in grads.items():
                m[key] = beta1 * m[key] + (1 - beta1) * grad
                v[key] = beta2 * v[key] + (1 - beta2) * grad * grad
                m_hat = m[key] / (1 - beta1**step)
                v_hat = v[key] / (1 - beta2**step)
                params[key] -= learning_rate * m_hat / (np.sqrt(v_hat) + eps)
                if weight_decay and key.endswith(".w"):
                    params[key] -= learning_rate * weight_decay * params[key]
        loss_curve.append(epoch_loss / len(x_train))

    def accuracy(xs, ys) -> float:
        logits = _forward(params, xs, 0.0, None)[-1]
        return float((logits.argmax(axis=1) == ys).mean())

    report = TrainReport(
        seed=seed,
        epochs=epochs,
        learning_rate=learning_rate,
        hidden_dims=tuple(hidden_dims),
        dropout_rate=dropout_rate,
        n_train=len(x_train),
        n_test=len(x_test),
        train_accuracy=accuracy(x_train, y_train),
        test_accuracy=accuracy(x_test, y_test),
        final_loss=loss_curve[-1],
        loss_curve=[round(l, 6) for l in loss_curve],
    )
    return params, report


def export_pgwt(tensors: dict[str, np.ndarray], path: Path, half: bool = False) -> bytes:
    """Write weights as PGWT, optionally narrowed to f16, verified by a
    read-back through the parser."""
    out: dict[str, np.ndarray] = {}
    for name, arr in tensors.items():
        arr = np.asarray(arr)
        if half and arr.dtype == np.float32:
            with np.errstate(over="ignore"):  # overflow reported as an error below
                narrowed = arr.astype(np.float16)
            if np.any(np.isinf(narrowed)):
                raise pgwt.PgwtError(f"tensor {name!r} overflows f16")
            arr = narrowed
        out[name] = arr
    blob = pgwt.dump(out)
    loaded, _ = pgwt.load(blob)
    for name, arr in out.items():
        if not np.array_equal(loaded[name], arr):
            raise pgwt.PgwtError(f"read-back mismatch for tensor {name!r}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(blob)
    return blob
