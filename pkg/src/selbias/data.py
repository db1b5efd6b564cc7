"""Labeled expression data, stratified fold plans and synthetic generators.

Class labels are the integers ``1..g`` (class 1 first); feature and sample
indices are ordinary 0-based numpy indices.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from selbias.errors import DataError

Layout = Literal["rows-are-samples", "rows-are-features"]
LABEL_COLUMN = "class"


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic 63-bit child seed of ``seed`` for the integer path ``keys``."""
    ss = np.random.SeedSequence([int(seed), *(int(k) for k in keys)])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """An ``n x p`` expression matrix with one class label per sample."""

    matrix: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] = ()
    class_names: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.array(self.matrix, dtype=float)
        if X.ndim != 2:
            raise DataError(f"matrix must be 2-D, got shape {X.shape}")
        n, p = X.shape
        if n < 2 or p < 1:
            raise DataError(f"need n >= 2 and p >= 1, got n={n}, p={p}")
        if not np.all(np.isfinite(X)):
            raise DataError("matrix contains non-finite values")
        z = np.asarray(self.labels)
        if z.shape != (n,) or not np.issubdtype(z.dtype, np.integer):
            raise DataError("labels must be one integer per sample")
        z = z.astype(np.int64)
        class_names = tuple(self.class_names) or tuple(
            str(i) for i in range(1, int(z.max()) + 1)
        )
        g = len(class_names)
        if z.min() < 1 or z.max() > g:
            raise DataError(f"labels must lie in 1..{g}")
        if np.any(np.bincount(z, minlength=g + 1)[1:] == 0):
            raise DataError("every class needs at least one sample")
        feature_names = tuple(self.feature_names) or tuple(
            f"f{v}" for v in range(p)
        )
        if len(feature_names) != p:
            raise DataError(f"{len(feature_names)} feature names for {p} features")
        X.flags.writeable = False
        z.flags.writeable = False
        object.__setattr__(self, "matrix", X)
        object.__setattr__(self, "labels", z)
        object.__setattr__(self, "feature_names", feature_names)
        object.__setattr__(self, "class_names", class_names)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def p(self) -> int:
        return self.matrix.shape[1]

    @property
    def g(self) -> int:
        return len(self.class_names)

    @property
    def class_sizes(self) -> tuple[int, ...]:
        return tuple(int(c) for c in np.bincount(self.labels, minlength=self.g + 1)[1:])

    def take(self, rows) -> LabeledDataset:
        """Dataset restricted to the given sample indices (class names kept)."""
        rows = np.asarray(rows, dtype=np.intp)
        return LabeledDataset(
            self.matrix[rows], self.labels[rows], self.feature_names, self.class_names
        )

    def __eq__(self, other):
        if not isinstance(other, LabeledDataset):
            return NotImplemented
        return (
            np.array_equal(self.matrix, other.matrix)
            and np.array_equal(self.labels, other.labels)
            and self.feature_names == other.feature_names
            and self.class_names == other.class_names
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class FoldPlan:
    """Partition of samples into K blocks; ``assignment[j]`` is the block of sample j."""

    assignment: np.ndarray
    K: int
    seed: int = 0

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64).copy()
        if a.ndim != 1 or a.size == 0:
            raise DataError("assignment must be a nonempty 1-D array")
        if self.K < 2 or a.min() < 0 or a.max() >= self.K:
            raise DataError(f"block indices must lie in 0..{self.K - 1}")
        if np.any(np.bincount(a, minlength=self.K) == 0):
            raise DataError("every block must be nonempty")
        a.flags.writeable = False
        object.__setattr__(self, "assignment", a)

    @property
    def n(self) -> int:
        return self.assignment.size

    @property
    def block_sizes(self) -> tuple[int, ...]:
        return tuple(int(c) for c in np.bincount(self.assignment, minlength=self.K))

    def block(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == k)

    def without(self, *blocks: int) -> np.ndarray:
        return np.flatnonzero(~np.isin(self.assignment, blocks))

    def __eq__(self, other):
        if not isinstance(other, FoldPlan):
            return NotImplemented
        return self.K == other.K and np.array_equal(self.assignment, other.assignment)

    __hash__ = None


def make_folds(data: LabeledDataset, K: int, seed: int = 0) -> FoldPlan:
    """Stratified K-fold plan.

    Within each class the samples are shuffled by a generator seeded from
    ``(seed, class)`` and dealt round-robin over the blocks.  Dealing carries
    on from the block where the previous class stopped, so block totals stay
    within one of each other as well as the per-class counts.
    """
    n = data.n
    if not 2 <= K <= n:
        raise DataError(f"fold count K must satisfy 2 <= K <= n={n}, got {K}")
    assignment = np.empty(n, dtype=np.int64)
    start = 0
    for i in range(1, data.g + 1):
        members = np.flatnonzero(data.labels == i)
        rng = np.random.default_rng([int(seed), i])
        members = rng.permutation(members)
        assignment[members] = (start + np.arange(members.size)) % K
        start = (start + members.size) % K
    return FoldPlan(assignment, K, seed)


def synth_null(n: int, p: int, class_sizes: Sequence[int], seed: int = 0) -> LabeledDataset:
    """Standard-normal features with labels unrelated to them."""
    class_sizes = tuple(int(c) for c in class_sizes)
    if sum(class_sizes) != n or any(c < 1 for c in class_sizes):
        raise DataError(f"class sizes {class_sizes} inconsistent with n={n}")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    labels = np.repeat(np.arange(1, len(class_sizes) + 1), class_sizes)
    return LabeledDataset(X, labels)


@dataclass(frozen=True, eq=False)
class SyntheticSpec:
    """Two homoscedastic diagonal Gaussian classes ``N(mu_i, variance * I)``."""

    means: np.ndarray
    variance: float = 1.0
    priors: tuple[float, ...] = (0.5, 0.5)
    class_sizes: tuple[int, ...] = (50, 50)
    seed: int = 0

    def __post_init__(self):
        means = np.array(self.means, dtype=float)
        if means.ndim == 1:
            means = means[:, None]
        if means.ndim != 2 or means.shape[0] != 2:
            raise DataError("means must have one row per class (g=2)")
        if not (self.variance > 0 and math.isfinite(self.variance)):
            raise DataError(f"variance must be positive, got {self.variance}")
        priors = tuple(float(q) for q in self.priors)
        if len(priors) != 2 or min(priors) < 0 or abs(sum(priors) - 1) > 1e-12:
            raise DataError(f"priors must be two nonnegative values summing to 1: {priors}")
        if len(self.class_sizes) != 2:
            raise DataError("class_sizes must have two entries")
        means.flags.writeable = False
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "class_sizes", tuple(int(c) for c in self.class_sizes))

    @property
    def g(self) -> int:
        return 2

    @property
    def p(self) -> int:
        return self.means.shape[1]

    @property
    def separation(self) -> float:
        """Mahalanobis distance between the class means."""
        return float(np.linalg.norm(self.means[0] - self.means[1]) / math.sqrt(self.variance))


def synth_gaussian(spec: SyntheticSpec) -> LabeledDataset:
    """Draw ``spec.class_sizes`` samples per class; class 1 rows come first."""
    rng = np.random.default_rng(spec.seed)
    sd = math.sqrt(spec.variance)
    blocks = [
        spec.means[i] + sd * rng.standard_normal((size, spec.p))
        for i, size in enumerate(spec.class_sizes)
    ]
    labels = np.repeat([1, 2], spec.class_sizes)
    return LabeledDataset(np.vstack(blocks), labels)


def _detect_delimiter(header: str) -> str:
    return "\t" if "\t" in header else ","


def _parse_float(cell: str, where: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DataError(f"non-numeric expression cell {cell!r} at {where}") from None
    if not math.isfinite(value):
        raise DataError(f"non-finite expression cell {cell!r} at {where}")
    return value


def load_dataset(
    path,
    layout: Layout = "rows-are-samples",
    class_names: Sequence[str] | None = None,
) -> LabeledDataset:
    """Read a comma- or tab-delimited dataset.

    ``rows-are-samples``: header row of column names, one of which is
    ``class``; every other column is a feature.  ``rows-are-features``: the
    first column holds row names, one row is named ``class`` and every other
    row is a feature; the header row (sample ids) is ignored.

    Class names are taken from ``class_names`` if given, otherwise from the
    distinct label values in sorted order (numeric order if all are integers).
    """
    path = Path(path)
    text = path.read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DataError(f"{path}: empty file")
    delim = _detect_delimiter(lines[0])
    rows = [[c.strip() for c in r] for r in csv.reader(lines, delimiter=delim)]
    width = len(rows[0])
    for lineno, r in enumerate(rows, start=1):
        if len(r) != width:
            raise DataError(f"{path}: ragged row at line {lineno} ({len(r)} cells, expected {width})")

    if layout == "rows-are-samples":
        header = rows[0]
        if LABEL_COLUMN not in header:
            raise DataError(f"{path}: missing label column {LABEL_COLUMN!r}")
        c = header.index(LABEL_COLUMN)
        feature_names = [h for k, h in enumerate(header) if k != c]
        raw_labels = [r[c] for r in rows[1:]]
        values = [
            [_parse_float(v, f"line {i + 2}") for k, v in enumerate(r) if k != c]
            for i, r in enumerate(rows[1:])
        ]
        X = np.array(values, dtype=float).reshape(len(raw_labels), len(feature_names))
    elif layout == "rows-are-features":
        names = [r[0] for r in rows[1:]]
        if LABEL_COLUMN not in names:
            raise DataError(f"{path}: missing label column {LABEL_COLUMN!r}")
        label_row = rows[1 + names.index(LABEL_COLUMN)]
        raw_labels = label_row[1:]
        feature_rows = [r for r in rows[1:] if r[0] != LABEL_COLUMN]
        feature_names = [r[0] for r in feature_rows]
        values = [
            [_parse_float(v, f"feature {r[0]!r}") for v in r[1:]] for r in feature_rows
        ]
        X = np.array(values, dtype=float).reshape(len(feature_names), len(raw_labels)).T
    else:
        raise DataError(f"unknown layout {layout!r}")

    if class_names is None:
        distinct = set(raw_labels)
        try:
            class_names = sorted(distinct, key=int)
        except ValueError:
            class_names = sorted(distinct)
    class_names = [str(c) for c in class_names]
    index = {name: i + 1 for i, name in enumerate(class_names)}
    unknown = sorted(set(raw_labels) - index.keys())
    if unknown:
        raise DataError(f"{path}: unknown class name(s) {unknown}")
    labels = np.array([index[v] for v in raw_labels], dtype=np.int64)
    return LabeledDataset(X, labels, tuple(feature_names), tuple(class_names))


def save_dataset(data: LabeledDataset, path, delimiter: str = ",") -> None:
    """Write ``data`` in the rows-are-samples layout read by :func:`load_dataset`."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow([LABEL_COLUMN, *data.feature_names])
        for label, row in zip(data.labels, data.matrix):
            w.writerow([data.class_names[label - 1], *(repr(float(v)) for v in row)])
