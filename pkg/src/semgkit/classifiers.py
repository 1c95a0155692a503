"""LDA, KNN and one-vs-one linear SVM behind a single train/predict interface.

All three classifiers z-score the features with training-set statistics
before fitting. Every tie is broken deterministically so that identical
inputs always give identical models and predictions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .core import N_GESTURES, GestureLabel, WindowSpec
from .features import ChannelMask, FeatureMatrix, FeatureSpec
from .svm import MAX_ITER_FACTOR, SVMConvergenceError, fit_binary

STD_FLOOR = 1e-12
LDA_RIDGE = 1e-6
KINDS = ("LDA", "KNN", "SVM")


class ColumnMismatchError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    def transform(self, X):
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.std


def fit_standardizer(train: FeatureMatrix) -> Standardizer:
    """Per-column mean and population standard deviation, floored at 1e-12."""
    X = train.values
    if X.shape[0] == 0:
        raise ValueError("cannot standardise an empty matrix")
    mean = X.mean(axis=0)
    std = np.maximum(X.std(axis=0), STD_FLOOR)
    return Standardizer(mean, std)


@dataclass(eq=False)
class LDAPayload:
    classes: np.ndarray
    means: np.ndarray        # (n_classes, n_features), standardised space
    precision: np.ndarray    # inverse of the regularised pooled covariance
    log_priors: np.ndarray

    def scores(self, Z):
        # x' P mu_k - 0.5 mu_k' P mu_k + log pi_k
        coef = self.means @ self.precision
        bias = -0.5 * np.einsum("kf,kf->k", coef, self.means) + self.log_priors
        return Z @ coef.T + bias

    def predict(self, Z):
        return self.classes[np.argmax(self.scores(Z), axis=1)]


@dataclass(eq=False)
class KNNPayload:
    X: np.ndarray
    y: np.ndarray
    k: int = 3

    def neighbours(self, Z, chunk=256):
        """Indices of the ``k`` nearest training rows, nearest first."""
        out = np.empty((Z.shape[0], self.k), dtype=np.int64)
        for s in range(0, Z.shape[0], chunk):
            diff = Z[s:s + chunk, None, :] - self.X[None, :, :]
            # accumulate feature by feature so equal distances round alike
            d2 = np.zeros(diff.shape[:2])
            for f in range(diff.shape[2]):
                d2 += diff[:, :, f] * diff[:, :, f]
            # stable sort keeps the lower row index first among equal distances
            out[s:s + chunk] = np.argsort(d2, axis=1, kind="stable")[:, :self.k]
        return out

    def predict(self, Z):
        nn = self.neighbours(Z)
        pred = np.empty(Z.shape[0], dtype=np.int64)
        for r, row in enumerate(nn):
            pred[r] = vote_nearest(self.y[row])
        return pred


def vote_nearest(labels) -> int:
    """Majority label among neighbours listed nearest first.

    A tie goes to the tied class whose closest member ranks first, which is
    the single nearest neighbour's class whenever that class is tied.
    """
    labels = [int(v) for v in labels]
    counts = {}
    for v in labels:
        counts[v] = counts.get(v, 0) + 1
    top = max(counts.values())
    for v in labels:
        if counts[v] == top:
            return v
    raise AssertionError("unreachable")


@dataclass(eq=False)
class SVMPayload:
    classes: np.ndarray
    pairs: np.ndarray        # (n_pairs, 2) class ids, lower id first
    W: np.ndarray            # (n_pairs, n_features)
    b: np.ndarray            # (n_pairs,)
    C: float = 1.0

    def margins(self, Z):
        return Z @ self.W.T + self.b

    def predict(self, Z):
        """One-vs-one vote; ties go to the larger summed signed margin, then the lower id."""
        m = self.margins(Z)
        index = {int(c): i for i, c in enumerate(self.classes)}
        first = np.array([index[int(a)] for a in self.pairs[:, 0]], dtype=np.intp)
        second = np.array([index[int(b)] for b in self.pairs[:, 1]], dtype=np.intp)
        n_cls = len(self.classes)
        votes = np.zeros((Z.shape[0], n_cls))
        summed = np.zeros((Z.shape[0], n_cls))
        wins_first = m >= 0
        rows = np.arange(Z.shape[0])
        for p in range(len(self.pairs)):
            winner = np.where(wins_first[:, p], first[p], second[p])
            votes[rows, winner] += 1
            summed[:, first[p]] += m[:, p]
            summed[:, second[p]] -= m[:, p]
        best = votes == votes.max(axis=1, keepdims=True)
        masked = np.where(best, summed, -np.inf)
        return self.classes[np.argmax(masked, axis=1)]


@dataclass(eq=False)
class TrainedModel:
    kind: str
    standardizer: Standardizer
    col_meta: tuple
    payload: object
    feature_spec: FeatureSpec | None = None
    channel_mask: ChannelMask | None = None
    window_spec: WindowSpec | None = None
    extra: dict = field(default_factory=dict)

    @property
    def classes(self):
        if self.kind == "KNN":
            return np.unique(self.payload.y)
        return self.payload.classes


def _meta_from(train: FeatureMatrix):
    return dict(col_meta=train.col_meta, feature_spec=train.feature_spec,
                channel_mask=train.channel_mask, window_spec=train.window_spec)


def train_lda(train: FeatureMatrix, ridge: float = LDA_RIDGE) -> TrainedModel:
    """Linear discriminant analysis with a shared, ridge-regularised covariance.

    The pooled covariance is the summed within-class scatter divided by
    ``n_rows - n_classes``; ``ridge * trace / dim`` is added to its diagonal.
    """
    classes, counts = np.unique(train.row_labels, return_counts=True)
    if len(classes) < 2:
        raise ValueError("LDA needs at least two classes")
    for c, n in zip(classes, counts):
        if n < 2:
            raise ValueError(f"class {GestureLabel(c).label} has only {n} sample(s); LDA needs 2")
    scaler = fit_standardizer(train)
    Z = scaler.transform(train.values)
    y = train.row_labels
    means = np.stack([Z[y == c].mean(axis=0) for c in classes])
    centred = Z - means[np.searchsorted(classes, y)]
    dof = Z.shape[0] - len(classes)
    cov = centred.T @ centred / dof
    dim = cov.shape[0]
    cov = cov + ridge * (np.trace(cov) / dim) * np.eye(dim)
    if np.trace(cov) == 0:
        cov = cov + ridge * np.eye(dim)
    precision = linalg.cho_solve(linalg.cho_factor(cov), np.eye(dim))
    precision = 0.5 * (precision + precision.T)
    log_priors = np.log(counts / counts.sum())
    return TrainedModel("LDA", scaler, payload=LDAPayload(classes, means, precision, log_priors),
                        **_meta_from(train))


def train_knn(train: FeatureMatrix, k: int = 3) -> TrainedModel:
    if k % 2 == 0:
        raise ValueError("k must be odd")
    if not 1 <= k <= len(train):
        raise ValueError(f"k must lie in 1..{len(train)}")
    scaler = fit_standardizer(train)
    payload = KNNPayload(scaler.transform(train.values), train.row_labels.copy(), int(k))
    return TrainedModel("KNN", scaler, payload=payload, **_meta_from(train))


def train_svm(train: FeatureMatrix, c_reg: float = 1.0, tol: float = 1e-3,
              max_iter_factor: int = MAX_ITER_FACTOR, second_order: bool = True) -> TrainedModel:
    """One-vs-one linear SVMs, one per unordered pair of present classes."""
    if not c_reg > 0:
        raise ValueError("c_reg must be positive")
    classes = np.unique(train.row_labels)
    if len(classes) < 2:
        raise ValueError("SVM needs at least two classes")
    scaler = fit_standardizer(train)
    Z = scaler.transform(train.values)
    y = train.row_labels
    pairs, W, b = [], [], []
    for a, c in itertools.combinations(classes.tolist(), 2):
        rows = (y == a) | (y == c)
        target = np.where(y[rows] == a, 1.0, -1.0)
        try:
            svm = fit_binary(Z[rows], target, c_reg, tol,
                             max_iter=max_iter_factor * int(rows.sum()),
                             second_order=second_order)
        except SVMConvergenceError as exc:
            raise SVMConvergenceError(
                f"pair ({GestureLabel(a).label}, {GestureLabel(c).label}): {exc} "
                f"duality gap {exc.gap:.3g}", pair=(a, c), gap=exc.gap,
                violation=exc.violation) from None
        pairs.append((a, c))
        W.append(svm.w)
        b.append(svm.b)
    payload = SVMPayload(classes, np.array(pairs, dtype=np.int64), np.array(W),
                         np.array(b), float(c_reg))
    return TrainedModel("SVM", scaler, payload=payload, **_meta_from(train))


def train(kind: str, data: FeatureMatrix, **kw) -> TrainedModel:
    kind = kind.upper()
    if kind == "LDA":
        return train_lda(data)
    if kind == "KNN":
        return train_knn(data, kw.get("k", 3))
    if kind == "SVM":
        return train_svm(data, kw.get("c_reg", 1.0))
    raise ValueError(f"unknown classifier kind {kind!r}; expected one of {KINDS}")


def check_columns(model: TrainedModel, features: FeatureMatrix):
    a, b = model.col_meta, features.col_meta
    for j, (ma, mb) in enumerate(itertools.zip_longest(a, b)):
        if ma != mb:
            raise ColumnMismatchError(
                f"column {j} differs: model expects {ma}, features have {mb}")


def predict(model: TrainedModel, features: FeatureMatrix) -> np.ndarray:
    """Gesture id for every row of ``features``."""
    check_columns(model, features)
    if len(features) == 0:
        return np.empty(0, dtype=np.int64)
    Z = model.standardizer.transform(features.values)
    return np.asarray(model.payload.predict(Z), dtype=np.int64)


@dataclass(frozen=True, eq=False)
class EvaluationResult:
    n_correct: int
    n_total: int
    confusion: np.ndarray

    @property
    def accuracy_pct(self) -> float:
        return 100.0 * self.n_correct / self.n_total

    def render(self) -> str:
        names = [g.label for g in GestureLabel]
        width = max(len(n) for n in names) + 1
        lines = [f"accuracy {self.accuracy_pct:.4f}% ({self.n_correct}/{self.n_total})",
                 "confusion (rows = truth, cols = predicted):",
                 " " * width + "".join(f"{n[:7]:>8}" for n in names)]
        for name, row in zip(names, self.confusion):
            lines.append(f"{name:<{width}}" + "".join(f"{v:>8d}" for v in row))
        return "\n".join(lines)


def evaluate(predicted, truth) -> EvaluationResult:
    """Accuracy (correct / total x 100) and the 7x7 confusion matrix."""
    predicted = np.asarray(predicted, dtype=np.int64).reshape(-1)
    truth = np.asarray(truth, dtype=np.int64).reshape(-1)
    if predicted.shape != truth.shape:
        raise ValueError(f"length mismatch: {predicted.size} predictions vs {truth.size} labels")
    if truth.size == 0:
        raise ValueError("nothing to evaluate")
    confusion = np.zeros((N_GESTURES, N_GESTURES), dtype=np.int64)
    np.add.at(confusion, (truth, predicted), 1)
    return EvaluationResult(int(np.trace(confusion)), int(truth.size), confusion)
