"""Linear soft-margin SVM and the centroid-correlation rule.

Class 1 is coded ``+1`` and class 2 ``-1`` inside the solver, so a positive
decision value means class 1.  Ties (decision exactly 0) go to class 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from selbias._smo import smo_solve
from selbias.data import LabeledDataset
from selbias.errors import ClassifierError


@dataclass(frozen=True)
class SvmConfig:
    cost: float = 1.0
    tolerance: float = 1e-6
    max_passes: int | None = None  # None: 500 * n pair updates

    def __post_init__(self):
        if not self.cost > 0:
            raise ClassifierError(f"cost must be positive, got {self.cost}")
        if not self.tolerance > 0:
            raise ClassifierError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_passes is not None and self.max_passes < 1:
            raise ClassifierError(f"max_passes must be >= 1, got {self.max_passes}")


@dataclass(frozen=True, eq=False)
class SvmModel:
    """Fitted hyperplane ``intercept + weights . y[active_features]``."""

    intercept: float
    weights: np.ndarray
    active_features: tuple[int, ...]
    cost: float
    converged: bool
    dual_gap: float
    alphas: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.size != len(self.active_features):
            raise ClassifierError("weights and active_features differ in length")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "active_features", tuple(int(v) for v in self.active_features))

    def decision(self, Y) -> np.ndarray | float:
        """Decision value(s) for one sample vector or a matrix of samples."""
        Y = np.asarray(Y, dtype=float)
        width = Y.shape[-1] if Y.ndim else 0
        if Y.ndim not in (1, 2) or (self.active_features and max(self.active_features) >= width):
            raise ClassifierError(
                f"sample has {width} features, model needs index {max(self.active_features)}"
            )
        return self.intercept + Y[..., list(self.active_features)] @ self.weights

    def __eq__(self, other):
        if not isinstance(other, SvmModel):
            return NotImplemented
        return (
            self.intercept == other.intercept
            and np.array_equal(self.weights, other.weights)
            and self.active_features == other.active_features
            and self.cost == other.cost
            and self.converged == other.converged
            and self.dual_gap == other.dual_gap
        )

    __hash__ = None


def _signed_labels(labels: np.ndarray) -> np.ndarray:
    return np.where(labels == 1, 1.0, -1.0)


def fit_arrays(X: np.ndarray, labels: np.ndarray, features, config: SvmConfig) -> SvmModel:
    """Train on raw arrays; ``features`` are column indices of ``X``.

    Features are used in ascending index order whatever order they arrive
    in, so a model depends only on the feature *set*.
    """
    features = np.unique(np.asarray(list(features), dtype=np.intp))
    if features.size == 0:
        raise ClassifierError("empty feature subset")
    if features[0] < 0 or features[-1] >= X.shape[1]:
        raise ClassifierError(f"feature subset out of bounds for p={X.shape[1]}")
    y = _signed_labels(np.asarray(labels))
    if np.all(y > 0) or np.all(y < 0):
        raise ClassifierError("training data contain a single class")
    Xs = np.ascontiguousarray(X[:, features], dtype=float)
    gram = Xs @ Xs.T
    max_iter = config.max_passes if config.max_passes is not None else 500 * len(y)
    alpha, b, gap, _ = smo_solve(gram, y, float(config.cost), float(config.tolerance), int(max_iter))
    w = Xs.T @ (alpha * y)
    return SvmModel(
        intercept=float(b),
        weights=w,
        active_features=tuple(features.tolist()),
        cost=float(config.cost),
        converged=bool(gap <= config.tolerance),
        dual_gap=float(gap),
        alphas=alpha,
    )


def train_svm(data: LabeledDataset, subset: Iterable[int], config: SvmConfig = SvmConfig()) -> SvmModel:
    """Fit a linear soft-margin SVM on ``data`` restricted to ``subset``."""
    if data.g != 2:
        raise ClassifierError(f"the SVM needs exactly 2 classes, data has g={data.g}")
    return fit_arrays(data.matrix, data.labels, subset, config)


def predict(model: SvmModel, y) -> int | np.ndarray:
    """Class 1 where the decision value is positive, class 2 otherwise.

    ``y`` is one sample vector (returns an int) or a matrix with one sample
    per row (returns an int array).
    """
    f = model.decision(y)
    out = np.where(f > 0, 1, 2)
    return int(out) if out.ndim == 0 else out


def centroid_corr_rule(reference, y, threshold: float = 0.4) -> int:
    """Class 1 when the Pearson correlation of ``y`` with ``reference`` exceeds ``threshold``."""
    ref = np.asarray(reference, dtype=float)
    y = np.asarray(y, dtype=float)
    if ref.shape != y.shape or ref.ndim != 1 or ref.size < 2:
        raise ClassifierError("reference and sample must be 1-D vectors of equal length >= 2")
    if np.ptp(ref) == 0 or np.ptp(y) == 0:
        raise ClassifierError("correlation undefined for a constant vector")
    r = np.corrcoef(ref, y)[0, 1]
    return 1 if r > threshold else 2


def model_to_text(model: SvmModel) -> str:
    lines = [
        f"intercept\t{model.intercept!r}",
        f"cost\t{model.cost!r}",
        f"converged\t{str(model.converged).lower()}",
        f"dual_gap\t{model.dual_gap!r}",
    ]
    lines += [f"weight\t{v}\t{float(w)!r}" for v, w in zip(model.active_features, model.weights)]
    return "\n".join(lines) + "\n"


def model_from_text(text: str) -> SvmModel:
    fields: dict[str, str] = {}
    features, weights = [], []
    for line in text.splitlines():
        if not line.strip():
            continue
        key, *rest = line.split("\t")
        if key == "weight":
            features.append(int(rest[0]))
            weights.append(float(rest[1]))
        else:
            fields[key] = rest[0]
    try:
        return SvmModel(
            intercept=float(fields["intercept"]),
            weights=np.array(weights),
            active_features=tuple(features),
            cost=float(fields["cost"]),
            converged=fields["converged"] == "true",
            dual_gap=float(fields["dual_gap"]),
        )
    except KeyError as exc:
        raise ClassifierError(f"model record lacks field {exc.args[0]!r}") from None
