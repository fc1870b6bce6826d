"""Downstream classification of latent features: kNN, Gaussian naive Bayes,
and a small softmax MLP, under k-fold cross-validation with 95% intervals."""

import json
from dataclasses import dataclass, field

import numpy as np

from . import nn
from .errors import ConfigError, DegenerateClassError, ShapeError
from .ndcore import as_matrix, pairwise_euclidean, top_k_smallest

KNN = "knn"
GAUSSIAN_NB = "gnb"
MLP = "mlp"


@dataclass(frozen=True)
class ClassifierSpec:
    variant: str
    k: int = 5
    hidden: tuple = (100,)
    epochs: int = 200
    learning_rate: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.variant not in (KNN, GAUSSIAN_NB, MLP):
            raise ConfigError(f"unknown classifier {self.variant!r}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if any(h < 1 for h in self.hidden):
            raise ConfigError(f"hidden widths must be >= 1, got {self.hidden}")


def kfold_split(n, folds=10, seed=0):
    """Disjoint test folds covering [0, n); sizes differ by at most one."""
    if folds > n:
        raise ConfigError(f"{folds} folds for {n} samples")
    perm = np.random.default_rng(seed).permutation(n)
    sizes = np.full(folds, n // folds)
    sizes[: n % folds] += 1
    splits = []
    start = 0
    for size in sizes:
        test = perm[start:start + size]
        train = np.concatenate([perm[:start], perm[start + size:]])
        splits.append((train, test))
        start += size
    return splits


def _predict_knn(spec, train_x, train_y, test_x):
    dist = pairwise_euclidean(test_x, train_x)
    n_classes = int(train_y.max()) + 1
    preds = np.empty(test_x.shape[0], dtype=np.int64)
    for i in range(test_x.shape[0]):
        votes = np.bincount(train_y[top_k_smallest(dist[i], spec.k)],
                            minlength=n_classes)
        preds[i] = votes.argmax()  # argmax ties break to the smallest label
    return preds


def _predict_gnb(train_x, train_y, test_x, var_floor=1e-9):
    classes = np.unique(train_y)
    n = train_x.shape[0]
    if n == 0:
        raise DegenerateClassError("no training rows for naive Bayes")
    log_post = np.empty((test_x.shape[0], classes.size))
    for idx, c in enumerate(classes):
        rows = train_x[train_y == c]
        if rows.shape[0] == 0:
            raise DegenerateClassError(f"class {c} absent from training data")
        mean = rows.mean(axis=0)
        var = np.maximum(rows.var(axis=0), var_floor)
        log_prior = np.log(rows.shape[0] / n)
        ll = -0.5 * np.sum(
            np.log(2.0 * np.pi * var) + (test_x - mean) ** 2 / var, axis=1
        )
        log_post[:, idx] = log_prior + ll
    return classes[log_post.argmax(axis=1)]


class MLPClassifier:
    """Leaky-relu hidden layers with a softmax cross-entropy head, trained
    with the same Adam machinery as the autoencoders."""

    def __init__(self, spec, n_features, n_classes):
        rng = np.random.default_rng(spec.seed)
        widths = list(spec.hidden) + [n_classes]
        self.layers = []
        prev = n_features
        for i, w in enumerate(widths):
            act = nn.IDENTITY if i == len(widths) - 1 else nn.LEAKY_RELU
            bound = np.sqrt(6.0 / (prev + w))
            self.layers.append(
                nn.DenseLayer(rng.uniform(-bound, bound, size=(w, prev)), np.zeros(w), act)
            )
            prev = w
        self.spec = spec

    def _forward(self, x):
        cache = []
        for layer in self.layers:
            pre = x @ layer.weights.T + layer.bias
            post = layer.activate(pre)
            cache.append((x, pre, post))
            x = post
        return x, cache

    def fit(self, x, y):
        x = as_matrix(x)
        y = np.asarray(y, dtype=np.int64)
        n_classes = self.layers[-1].out_dim
        onehot = np.eye(n_classes)[y]
        state_m = [(np.zeros_like(l.weights), np.zeros_like(l.bias)) for l in self.layers]
        state_v = [(np.zeros_like(l.weights), np.zeros_like(l.bias)) for l in self.layers]
        b1, b2, eps = 0.9, 0.999, 1e-8
        lr = self.spec.learning_rate
        rng = np.random.default_rng(self.spec.seed)
        batch = min(128, x.shape[0])
        t = 0
        for _ in range(self.spec.epochs):
            perm = rng.permutation(x.shape[0])
            for start in range(0, x.shape[0], batch):
                rows = perm[start:start + batch]
                logits, cache = self._forward(x[rows])
                logits = logits - logits.max(axis=1, keepdims=True)
                expl = np.exp(logits)
                probs = expl / expl.sum(axis=1, keepdims=True)
                delta = (probs - onehot[rows]) / rows.size
                t += 1
                c1, c2 = 1.0 - b1 ** t, 1.0 - b2 ** t
                for i in range(len(self.layers) - 1, -1, -1):
                    layer = self.layers[i]
                    inp, pre, post = cache[i]
                    dpre = delta * layer.activate_grad(pre, post)
                    gw = dpre.T @ inp
                    gb = dpre.sum(axis=0)
                    if i > 0:
                        delta = dpre @ layer.weights
                    for p, g, m, v in (
                        (layer.weights, gw, state_m[i][0], state_v[i][0]),
                        (layer.bias, gb, state_m[i][1], state_v[i][1]),
                    ):
                        m *= b1
                        m += (1.0 - b1) * g
                        v *= b2
                        v += (1.0 - b2) * g * g
                        p -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
        return self

    def predict(self, x):
        logits, _ = self._forward(as_matrix(x))
        return logits.argmax(axis=1)


def fit_predict(spec, train_x, train_y, test_x):
    """Train the requested classifier and predict labels for `test_x`."""
    train_x, test_x = as_matrix(train_x), as_matrix(test_x)
    train_y = np.asarray(train_y, dtype=np.int64).ravel()
    if train_x.shape[0] != train_y.shape[0]:
        raise ShapeError(
            f"{train_x.shape[0]} training rows but {train_y.shape[0]} labels"
        )
    if train_x.shape[1] != test_x.shape[1]:
        raise ShapeError(
            f"feature widths differ: train {train_x.shape[1]} vs test {test_x.shape[1]}"
        )
    if spec.variant == KNN:
        return _predict_knn(spec, train_x, train_y, test_x)
    if spec.variant == GAUSSIAN_NB:
        return _predict_gnb(train_x, train_y, test_x)
    n_classes = int(train_y.max()) + 1
    return MLPClassifier(spec, train_x.shape[1], n_classes).fit(train_x, train_y).predict(test_x)


def score(predicted, truth):
    """(accuracy, macro-F1). Classes absent from `truth` are excluded from
    the macro average; an undefined per-class F1 counts as 0."""
    predicted = np.asarray(predicted, dtype=np.int64).ravel()
    truth = np.asarray(truth, dtype=np.int64).ravel()
    if predicted.shape[0] != truth.shape[0]:
        raise ShapeError(
            f"prediction length {predicted.shape[0]} != truth length {truth.shape[0]}"
        )
    accuracy = float(np.mean(predicted == truth))
    f1s = []
    for c in np.unique(truth):
        tp = np.sum((predicted == c) & (truth == c))
        fp = np.sum((predicted == c) & (truth != c))
        fn = np.sum((predicted != c) & (truth == c))
        denom = 2 * tp + fp + fn
        f1s.append(2 * tp / denom if denom > 0 else 0.0)
    return accuracy, float(np.mean(f1s))


@dataclass
class MetricReport:
    classifier: str
    folds: int
    per_fold_accuracy: list = field(default_factory=list)
    per_fold_f1: list = field(default_factory=list)
    mean_accuracy: float = 0.0
    mean_f1: float = 0.0
    ci95_accuracy: float = 0.0
    ci95_f1: float = 0.0

    def to_json(self, metric="accuracy"):
        per_fold = self.per_fold_accuracy if metric == "accuracy" else self.per_fold_f1
        mean = self.mean_accuracy if metric == "accuracy" else self.mean_f1
        ci = self.ci95_accuracy if metric == "accuracy" else self.ci95_f1
        return json.dumps({
            "classifier": self.classifier,
            "folds": self.folds,
            "metric": metric,
            "per_fold": per_fold,
            "mean": mean,
            "ci95": ci,
        })


def _ci95(values):
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        return 0.0
    return float(1.96 * values.std(ddof=1) / np.sqrt(values.size))


def cross_validate(spec, features, labels, folds=10, seed=0):
    """k-fold cross-validation; 95% half-width = 1.96 * std(fold scores)/sqrt(k)."""
    features = as_matrix(features)
    labels = np.asarray(labels, dtype=np.int64).ravel()
    report = MetricReport(classifier=spec.variant, folds=folds)
    for train_idx, test_idx in kfold_split(features.shape[0], folds, seed):
        preds = fit_predict(spec, features[train_idx], labels[train_idx], features[test_idx])
        acc, f1 = score(preds, labels[test_idx])
        report.per_fold_accuracy.append(acc)
        report.per_fold_f1.append(f1)
    report.mean_accuracy = float(np.mean(report.per_fold_accuracy))
    report.mean_f1 = float(np.mean(report.per_fold_f1))
    report.ci95_accuracy = _ci95(report.per_fold_accuracy)
    report.ci95_f1 = _ci95(report.per_fold_f1)
    return report
