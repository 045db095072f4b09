"""PCA, one-vs-rest linear SVM, leave-one-out evaluation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

MODEL_FORMAT = "lowlight-har-model"
MODEL_VERSION = 1
TIE_RTOL = 1e-9


# --------------------------------------------------------------------- PCA


@dataclass
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (retained, features), rows orthonormal
    explained_variance: np.ndarray  # all eigenvalues, non-increasing
    retained: int

    @property
    def explained_ratio(self) -> float:
        total = self.explained_variance.sum()
        if total <= 0:
            return 1.0
        return float(self.explained_variance[: self.retained].sum() / total)


def pca_fit(X, variance_target: float = 0.95) -> PcaModel:
    """Principal axes of the population covariance (normalized by n).

    Keeps the fewest leading components whose cumulative variance reaches
    ``variance_target``.  Rank-zero data yields one zero-variance component.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("PCA needs a 2-D matrix with at least two rows")
    if not 0 < variance_target <= 1:
        raise ValueError(f"variance_target must lie in (0, 1], got {variance_target}")
    n = X.shape[0]
    mean = X.mean(axis=0)
    Xc = X - mean
    # right singular vectors of the centred data = covariance eigenvectors
    _, s, vt = np.linalg.svd(Xc, full_matrices=False)
    eig = s**2 / n
    # deterministic sign: largest-magnitude loading positive
    pivots = np.argmax(np.abs(vt), axis=1)
    signs = np.sign(vt[np.arange(vt.shape[0]), pivots])
    signs[signs == 0] = 1.0
    vt = vt * signs[:, None]

    total = eig.sum()
    tol = max(X.shape) * np.finfo(np.float64).eps * (eig[0] if eig.size else 0.0)
    rank = int((eig > tol).sum())
    if total <= 0 or rank == 0:
        retained = 1
    else:
        cum = np.cumsum(eig) / total
        retained = int(np.searchsorted(cum, variance_target - 1e-12) + 1)
        retained = min(retained, rank)
    return PcaModel(mean=mean, components=vt[:retained].copy(), explained_variance=eig, retained=retained)


def pca_transform(model: PcaModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.shape[-1] != model.mean.shape[0]:
        raise ValueError(f"expected {model.mean.shape[0]} features, got {X.shape[-1]}")
    return (X - model.mean) @ model.components.T


def pca_inverse(model: PcaModel, Z) -> np.ndarray:
    return np.asarray(Z) @ model.components + model.mean


# --------------------------------------------------------------------- SVM


@dataclass
class SvmModel:
    classes: List[str]
    weights: np.ndarray  # (classes, features)
    biases: np.ndarray  # (classes,)
    C: float

    def scores(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.weights.shape[1]:
            raise ValueError(f"expected {self.weights.shape[1]} features, got {X.shape[1]}")
        return X @ self.weights.T + self.biases


def hinge_objective(w, b, X, y, C) -> float:
    """0.5 |w|^2 + C sum max(0, 1 - y (w.x + b)), y in {-1, +1}."""
    w = np.asarray(w, dtype=np.float64)
    margins = y * (np.asarray(X, dtype=np.float64) @ w + b)
    return float(0.5 * w @ w + C * np.maximum(0.0, 1.0 - margins).sum())


def binary_svm(X, y, C: float = 1.0, tol: float = 1e-8, max_iter: int = 200_000):
    """Soft-margin linear SVM via SMO on the dual with maximal-violating-pair
    working set selection.  ``y`` in {-1, +1}.  Returns ``(w, b)``."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    K = X @ X.T
    Q = (y[:, None] * y[None, :]) * K
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of 0.5 a'Qa - e'a
    for _ in range(max_iter):
        yg = -y * grad
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            break
        i = int(np.flatnonzero(up)[np.argmax(yg[up])])
        j = int(np.flatnonzero(low)[np.argmin(yg[low])])
        gap = yg[i] - yg[j]
        if gap < tol:
            break
        # step along y_i e_i - y_j e_j, clipped to the box
        curv = max(Q[i, i] + Q[j, j] - 2 * y[i] * y[j] * Q[i, j], 1e-12)
        t = gap / curv
        t = min(t, C - alpha[i] if y[i] > 0 else alpha[i])
        t = min(t, alpha[j] if y[j] > 0 else C - alpha[j])
        di, dj = y[i] * t, -y[j] * t
        alpha[i] += di
        alpha[j] += dj
        alpha[i] = min(max(alpha[i], 0.0), C)
        alpha[j] = min(max(alpha[j], 0.0), C)
        grad += Q[:, i] * di + Q[:, j] * dj
    w = (alpha * y) @ X
    yg = -y * grad
    free = (alpha > 1e-12 * C) & (alpha < C * (1 - 1e-12))
    if free.any():
        b = float(yg[free].mean())
    else:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        hi = yg[up].max() if up.any() else yg.max()
        lo = yg[low].min() if low.any() else yg.min()
        b = float((hi + lo) / 2)
    return w, b


def svm_train(X, y: Sequence[str], C: float = 1.0) -> SvmModel:
    """One-vs-rest linear SVMs, one per class (classes in sorted name order)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("empty training set")
    if C <= 0:
        raise ValueError("C must be positive")
    y = np.asarray(list(y), dtype=object)
    if y.shape[0] != X.shape[0]:
        raise ValueError("one label per row required")
    classes = sorted(set(y.tolist()))
    if len(classes) < 2:
        raise ValueError("SVM training needs at least two classes")
    W = np.zeros((len(classes), X.shape[1]))
    B = np.zeros(len(classes))
    for c, name in enumerate(classes):
        yy = np.where(y == name, 1.0, -1.0)
        W[c], B[c] = binary_svm(X, yy, C)
    return SvmModel(classes=classes, weights=W, biases=B, C=C)


def _pick(scores: np.ndarray) -> int:
    best = scores.max()
    near = scores >= best - TIE_RTOL * max(1.0, abs(best))
    return int(np.argmax(near))


def svm_predict(model: SvmModel, x) -> str:
    """Class with the largest score; near-equal scores go to the first class in name order."""
    return model.classes[_pick(model.scores(x)[0])]


def svm_predict_many(model: SvmModel, X) -> List[str]:
    return [model.classes[_pick(row)] for row in model.scores(X)]


# ------------------------------------------------------------- evaluation


def accuracy(tp, tn, fp, fn) -> float:
    counts = (tp, tn, fp, fn)
    if any(c < 0 for c in counts):
        raise ValueError("counts must be non-negative")
    total = sum(counts)
    if total == 0:
        raise ValueError("all counts are zero")
    return (tp + tn) / total * 100.0


@dataclass
class EvalReport:
    classes: List[str]
    confusion: np.ndarray  # rows true, columns predicted
    predictions: List[str] = field(default_factory=list)
    ids: List[str] = field(default_factory=list)

    @property
    def overall_accuracy(self) -> float:
        total = self.confusion.sum()
        return float(np.trace(self.confusion) / total * 100.0) if total else 0.0

    @property
    def per_class_accuracy(self):
        out = {}
        for i, name in enumerate(self.classes):
            n = self.confusion[i].sum()
            out[name] = float(self.confusion[i, i] / n * 100.0) if n else None
        return out

    def to_dict(self):
        return {
            "classes": list(self.classes),
            "confusion": self.confusion.astype(int).tolist(),
            "per_class_accuracy": self.per_class_accuracy,
            "overall_accuracy": self.overall_accuracy,
            "samples": int(self.confusion.sum()),
            "predictions": [
                {"id": i, "predicted": p} for i, p in zip(self.ids, self.predictions)
            ],
        }

    def confusion_csv(self) -> str:
        lines = ["true\\predicted," + ",".join(self.classes)]
        for name, row in zip(self.classes, self.confusion):
            lines.append(name + "," + ",".join(str(int(v)) for v in row))
        return "\n".join(lines) + "\n"


def confusion_report(true, pred, classes=None, ids=None) -> EvalReport:
    true, pred = list(true), list(pred)
    if classes is None:
        classes = sorted(set(true) | set(pred))
    index = {c: i for i, c in enumerate(classes)}
    cm = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(true, pred):
        cm[index[t], index[p]] += 1
    return EvalReport(classes=list(classes), confusion=cm, predictions=pred, ids=list(ids or []))


@dataclass
class Classifier:
    """PCA followed by one-vs-rest SVM.  ``svm`` is None when only one class
    was seen in training; every prediction is then that class."""

    pca: PcaModel
    svm: Optional[SvmModel]
    only_class: Optional[str] = None

    def predict(self, X) -> List[str]:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if self.svm is None:
            return [self.only_class] * X.shape[0]
        return svm_predict_many(self.svm, pca_transform(self.pca, X))


def fit_classifier(X, y, pca_target: float = 0.95, C: float = 1.0, pca: Optional[PcaModel] = None) -> Classifier:
    X = np.asarray(X, dtype=np.float64)
    y = list(y)
    if pca is None:
        pca = pca_fit(X, pca_target)
    classes = sorted(set(y))
    if len(classes) == 1:
        return Classifier(pca=pca, svm=None, only_class=classes[0])
    return Classifier(pca=pca, svm=svm_train(pca_transform(pca, X), y, C))


def loocv(X, labels, pca_target: float = 0.95, C: float = 1.0, pca_scope: str = "fold", ids=None) -> EvalReport:
    """Leave-one-out: each sample is predicted by a model trained on the rest.

    With ``pca_scope="fold"`` the PCA basis is refit inside every fold;
    ``"global"`` fits it once on all rows.
    """
    X = np.asarray(X, dtype=np.float64)
    labels = list(labels)
    n = X.shape[0]
    if n < 2 or len(set(labels)) < 2:
        raise ValueError("LOOCV needs at least two samples and two classes")
    if pca_scope not in ("fold", "global"):
        raise ValueError(f"pca_scope must be 'fold' or 'global', got {pca_scope!r}")
    shared = pca_fit(X, pca_target) if pca_scope == "global" else None
    preds = []
    for i in range(n):
        keep = np.arange(n) != i
        train_y = [labels[j] for j in range(n) if j != i]
        pca = shared
        if pca is None:
            pca = pca_fit(X[keep], pca_target) if keep.sum() >= 2 else _single_row_pca(X[keep])
        model = fit_classifier(X[keep], train_y, pca_target, C, pca=pca)
        preds.append(model.predict(X[i])[0])
    classes = sorted(set(labels) | set(preds))
    return confusion_report(labels, preds, classes, ids)


def _single_row_pca(X) -> PcaModel:
    d = X.shape[1]
    comp = np.zeros((1, d))
    comp[0, 0] = 1.0
    return PcaModel(mean=X.mean(axis=0), components=comp, explained_variance=np.zeros(1), retained=1)


# -------------------------------------------------------------- model I/O


def save_model(model: Classifier, path) -> None:
    """JSON model file: format tag, version, PCA basis and SVM weights."""
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "pca": {
            "mean": model.pca.mean.tolist(),
            "components": model.pca.components.tolist(),
            "explained_variance": model.pca.explained_variance.tolist(),
            "retained": model.pca.retained,
        },
        "svm": None
        if model.svm is None
        else {
            "classes": model.svm.classes,
            "weights": model.svm.weights.tolist(),
            "biases": model.svm.biases.tolist(),
            "C": model.svm.C,
        },
        "only_class": model.only_class,
    }
    Path(path).write_text(json.dumps(doc, indent=1))


def load_model(path) -> Classifier:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path}: not a model file")
    if doc.get("version") != MODEL_VERSION:
        raise ValueError(f"{path}: unsupported model version {doc.get('version')}")
    p = doc["pca"]
    pca = PcaModel(
        mean=np.array(p["mean"], dtype=np.float64),
        components=np.array(p["components"], dtype=np.float64).reshape(p["retained"], -1),
        explained_variance=np.array(p["explained_variance"], dtype=np.float64),
        retained=int(p["retained"]),
    )
    s = doc["svm"]
    svm = None
    if s is not None:
        svm = SvmModel(
            classes=list(s["classes"]),
            weights=np.array(s["weights"], dtype=np.float64),
            biases=np.array(s["biases"], dtype=np.float64),
            C=float(s["C"]),
        )
    return Classifier(pca=pca, svm=svm, only_class=doc.get("only_class"))
