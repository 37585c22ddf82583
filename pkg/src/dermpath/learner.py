"""Multinomial (softmax) linear classifier trained by mini-batch gradient
descent over TF-IDF features, plus the pluggable classifier interface.

The hot training loop runs in the compiled kernel when available and in
the numpy fallback otherwise (see dermpath._kernel).  An external
inference service can stand in for the local learner through
``ExternalClassifierClient``, which speaks a line-delimited JSON protocol
over a subprocess pipe.
"""

from __future__ import annotations

import json
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import _kernel
from .features import DEFAULT_MAX_FEATURES, Vocabulary, build_vocabulary, transform


class LearnerError(Exception):
    pass


class DivergenceError(LearnerError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 64
    learning_rate: float = 0.001
    epochs: int = 10
    l2: float = 1e-4
    seed: int = 0
    max_features: int = DEFAULT_MAX_FEATURES

    def __post_init__(self):
        if self.batch_size < 1 or self.epochs < 0:
            raise LearnerError("batch_size must be >= 1 and epochs >= 0")
        if self.learning_rate <= 0 or self.l2 < 0:
            raise LearnerError("learning_rate must be > 0 and l2 >= 0")


@dataclass
class LinearModel:
    weights: np.ndarray  # (num_classes, num_features)
    bias: np.ndarray  # (num_classes,)
    class_names: list[str]
    epoch_losses: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.weights.shape[0] != len(self.class_names) or self.weights.shape[0] != len(self.bias):
            raise LearnerError("inconsistent model dimensions")
        if len(set(self.class_names)) != len(self.class_names):
            raise LearnerError("class names must be unique")


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def loss_and_grad(W, b, X, y, l2):
    """Mean cross-entropy + l2*||W||^2 and its analytic gradient."""
    n = X.shape[0]
    logits = np.asarray(X @ W.T) + b
    P = softmax(logits)
    ce = -np.mean(np.log(np.maximum(P[np.arange(n), y], 1e-300)))
    loss = ce + l2 * float(np.sum(W * W))
    G = P.copy()
    G[np.arange(n), y] -= 1.0
    G /= n
    grad_W = np.asarray(G.T @ X) + 2.0 * l2 * W
    grad_b = G.sum(axis=0)
    return loss, grad_W, grad_b


def compute_loss(model: LinearModel, X, y, l2: float) -> float:
    loss, _, _ = loss_and_grad(model.weights, model.bias, X, y, l2)
    return loss


def fit_linear_softmax(
    X: sp.csr_matrix, y: np.ndarray, class_names: list[str], config: TrainConfig
) -> LinearModel:
    """Train the softmax classifier; deterministic under config.seed.

    With epochs=0 the returned model has zero weights (uniform output).
    Raises DivergenceError if the loss goes non-finite.
    """
    if len(class_names) < 2:
        raise LearnerError("need at least 2 classes")
    if X.shape[0] == 0:
        raise LearnerError("empty feature matrix")
    n_classes = len(class_names)
    W = np.zeros((n_classes, X.shape[1]), dtype=np.float64)
    b = np.zeros(n_classes, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    rng = np.random.default_rng(config.seed)
    losses: list[float] = []
    for _ in range(config.epochs):
        order = rng.permutation(X.shape[0]).astype(np.int64)
        _kernel.sgd_epoch(X, y, W, b, config.learning_rate, config.l2, order, config.batch_size)
        loss, _, _ = loss_and_grad(W, b, X, y, config.l2)
        if not np.isfinite(loss):
            raise DivergenceError(
                f"training loss diverged (loss={loss}); try a smaller learning_rate"
            )
        losses.append(float(loss))
    return LinearModel(W, b, list(class_names), losses)


def predict_proba(model: LinearModel, X) -> np.ndarray:
    if X.shape[1] != model.weights.shape[1]:
        raise LearnerError(
            f"feature dimension mismatch: {X.shape[1]} != {model.weights.shape[1]}"
        )
    return softmax(np.asarray(X @ model.weights.T) + model.bias)


def rank_probabilities(probs: np.ndarray, class_names: list[str], k: int):
    """Top-k (label, probability) pairs; ties break by ascending class index."""
    if k < 1:
        raise LearnerError(f"k must be >= 1, got {k}")
    k = min(k, len(class_names))
    order = np.argsort(-probs, kind="stable")[:k]
    return [(class_names[i], float(probs[i])) for i in order]


def predict_proba_topk(model: LinearModel, doc, k: int):
    X = doc if sp.issparse(doc) else sp.csr_matrix(np.atleast_2d(doc))
    probs = predict_proba(model, X)[0]
    return rank_probabilities(probs, model.class_names, k)


def gradient_check(model: LinearModel, X, y, epsilon: float, n_coords: int = 40, seed: int = 0) -> float:
    """Max relative error between analytic and central-difference gradients
    on a sampled subset of weight/bias coordinates."""
    if not 0 < epsilon <= 1e-2:
        raise LearnerError(f"epsilon must be in (0, 1e-2], got {epsilon}")
    y = np.asarray(y, dtype=np.int64)
    l2 = 1e-4
    W, b = model.weights.copy(), model.bias.copy()
    _, grad_W, grad_b = loss_and_grad(W, b, X, y, l2)
    rng = np.random.default_rng(seed)
    max_err = 0.0
    # scale floor keeps zero-gradient coordinates from dividing float noise
    # by an arbitrarily small denominator
    scale = max(float(np.abs(grad_W).max()), float(np.abs(grad_b).max()), 1e-12)

    def rel_err(analytic, numeric):
        return abs(analytic - numeric) / max(abs(analytic) + abs(numeric), 0.01 * scale)

    n_w = min(n_coords, W.size)
    for flat in rng.choice(W.size, size=n_w, replace=False):
        i, j = np.unravel_index(flat, W.shape)
        orig = W[i, j]
        W[i, j] = orig + epsilon
        lp, _, _ = loss_and_grad(W, b, X, y, l2)
        W[i, j] = orig - epsilon
        lm, _, _ = loss_and_grad(W, b, X, y, l2)
        W[i, j] = orig
        max_err = max(max_err, rel_err(grad_W[i, j], (lp - lm) / (2 * epsilon)))
    for i in range(len(b)):
        orig = b[i]
        b[i] = orig + epsilon
        lp, _, _ = loss_and_grad(W, b, X, y, l2)
        b[i] = orig - epsilon
        lm, _, _ = loss_and_grad(W, b, X, y, l2)
        b[i] = orig
        max_err = max(max_err, rel_err(grad_b[i], (lp - lm) / (2 * epsilon)))
    return max_err


# ---------------------------------------------------------------------------
# Pluggable classifier interface
# ---------------------------------------------------------------------------


class TfidfSoftmaxClassifier:
    """Local text classifier: TF-IDF featurizer + linear softmax model.

    Interface contract shared with external backends:
    fit(texts, labels) -> self; predict_topk(text, k) -> ranked
    (label, score) pairs.
    """

    def __init__(self, config: TrainConfig | None = None):
        self.config = config or TrainConfig()
        self.vocab: Vocabulary | None = None
        self.model: LinearModel | None = None

    def fit(self, texts, labels):
        class_names = sorted(set(labels))
        if len(class_names) < 2:
            raise LearnerError("need at least 2 classes; use ConstantClassifier instead")
        self.vocab = build_vocabulary(texts, self.config.max_features)
        X = transform(texts, self.vocab)
        index = {c: i for i, c in enumerate(class_names)}
        y = np.array([index[l] for l in labels], dtype=np.int64)
        self.model = fit_linear_softmax(X, y, class_names, self.config)
        return self

    def predict_topk(self, text: str, k: int):
        if self.model is None or self.vocab is None:
            raise LearnerError("classifier not fitted")
        X = transform([text], self.vocab)
        return rank_probabilities(predict_proba(self.model, X)[0], self.model.class_names, k)

    def predict_topk_batch(self, texts, k: int):
        if self.model is None or self.vocab is None:
            raise LearnerError("classifier not fitted")
        X = transform(texts, self.vocab)
        probs = predict_proba(self.model, X)
        return [rank_probabilities(p, self.model.class_names, k) for p in probs]

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        if self.model is None or self.vocab is None:
            raise LearnerError("classifier not fitted")
        return {
            "format_version": 1,
            "kind": "tfidf-softmax",
            "class_names": self.model.class_names,
            "weights": self.model.weights.tolist(),
            "bias": self.model.bias.tolist(),
            "vocabulary": {
                "terms": sorted(self.vocab.term_index, key=self.vocab.term_index.get),
                "idf": self.vocab.idf.tolist(),
                "document_frequencies": self.vocab.document_frequencies,
                "n_documents": self.vocab.n_documents,
            },
            "config": {
                "batch_size": self.config.batch_size,
                "learning_rate": self.config.learning_rate,
                "epochs": self.config.epochs,
                "l2": self.config.l2,
                "seed": self.config.seed,
                "max_features": self.config.max_features,
            },
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "TfidfSoftmaxClassifier":
        if payload.get("kind") != "tfidf-softmax":
            raise LearnerError(f"unexpected model kind: {payload.get('kind')!r}")
        clf = cls(TrainConfig(**payload["config"]))
        terms = payload["vocabulary"]["terms"]
        clf.vocab = Vocabulary(
            term_index={t: i for i, t in enumerate(terms)},
            idf=np.asarray(payload["vocabulary"]["idf"], dtype=np.float64),
            document_frequencies=payload["vocabulary"]["document_frequencies"],
            n_documents=payload["vocabulary"]["n_documents"],
        )
        clf.model = LinearModel(
            weights=np.asarray(payload["weights"], dtype=np.float64),
            bias=np.asarray(payload["bias"], dtype=np.float64),
            class_names=list(payload["class_names"]),
        )
        return clf

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), ensure_ascii=False), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "TfidfSoftmaxClassifier":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


class ConstantClassifier:
    """Degenerate stand-in used when the training data has a single class."""

    def __init__(self, label: str | None = None):
        self.label = label

    def fit(self, texts, labels):
        distinct = set(labels)
        if len(distinct) != 1:
            raise LearnerError("ConstantClassifier requires exactly one class")
        self.label = next(iter(distinct))
        return self

    def predict_topk(self, text: str, k: int):
        if self.label is None:
            raise LearnerError("classifier not fitted")
        return [(self.label, 1.0)]

    def predict_topk_batch(self, texts, k: int):
        return [self.predict_topk(t, k) for t in texts]

    def to_dict(self) -> dict:
        return {"format_version": 1, "kind": "constant", "label": self.label}

    @classmethod
    def from_dict(cls, payload: dict) -> "ConstantClassifier":
        return cls(payload["label"])


def classifier_from_dict(payload: dict):
    kind = payload.get("kind")
    if kind == "tfidf-softmax":
        return TfidfSoftmaxClassifier.from_dict(payload)
    if kind == "constant":
        return ConstantClassifier.from_dict(payload)
    raise LearnerError(f"unknown classifier kind: {kind!r}")


class ExternalClassifierClient:
    """Classifier backed by an external inference process.

    Protocol: one JSON object per line on stdin, ``{"text": ..., "k": ...}``;
    one JSON object per line on stdout, ``{"ranked": [[label, score], ...]}``.
    Requests are serialized (single in-flight request per client).
    """

    def __init__(self, command: list[str]):
        self.command = list(command)
        self._proc: subprocess.Popen | None = None

    def _ensure(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        return self._proc

    def fit(self, texts, labels):
        # Training happens on the service side; the client is inference-only.
        return self

    def predict_topk(self, text: str, k: int):
        proc = self._ensure()
        proc.stdin.write(json.dumps({"text": text, "k": k}, ensure_ascii=False) + "\n")
        proc.stdin.flush()
        line = proc.stdout.readline()
        if not line:
            raise LearnerError("external classifier closed the pipe")
        payload = json.loads(line)
        return [(label, float(score)) for label, score in payload["ranked"]]

    def predict_topk_batch(self, texts, k: int):
        return [self.predict_topk(t, k) for t in texts]

    def close(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            self._proc.stdin.close()
            self._proc.wait(timeout=5)
        self._proc = None
