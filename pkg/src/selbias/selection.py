"""Recursive feature elimination with a linear SVM, and t-statistic screening."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from selbias.classifiers import SvmConfig, SvmModel, fit_arrays
from selbias.data import LabeledDataset
from selbias.errors import SelectionError


@dataclass(frozen=True)
class GeneSubset:
    """Ordered feature indices, best-ranked first."""

    indices: tuple[int, ...]
    scores: tuple[float, ...] | None = None

    def __post_init__(self):
        idx = tuple(int(v) for v in self.indices)
        if len(set(idx)) != len(idx):
            raise SelectionError("subset indices must be unique")
        if any(v < 0 for v in idx):
            raise SelectionError("subset indices must be nonnegative")
        if self.scores is not None and len(self.scores) != len(idx):
            raise SelectionError("one score per index required")
        object.__setattr__(self, "indices", idx)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __contains__(self, v) -> bool:
        return v in self.indices

    def top(self, d: int) -> GeneSubset:
        return GeneSubset(
            self.indices[:d], None if self.scores is None else self.scores[:d]
        )


@dataclass(frozen=True)
class RfeSchedule:
    """Strictly decreasing retained-set sizes visited by RFE."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(d) for d in self.sizes)
        if not sizes or sizes[-1] < 1:
            raise SelectionError(f"invalid schedule {sizes}")
        if any(a <= b for a, b in zip(sizes, sizes[1:])):
            raise SelectionError(f"schedule must be strictly decreasing: {sizes}")
        object.__setattr__(self, "sizes", sizes)

    def __iter__(self):
        return iter(self.sizes)

    def __len__(self):
        return len(self.sizes)

    def down_to(self, d: int) -> RfeSchedule:
        """Prefix of the schedule ending at size ``d``."""
        if d not in self.sizes:
            raise SelectionError(f"size {d} not in schedule {self.sizes}")
        return RfeSchedule(self.sizes[: self.sizes.index(d) + 1])


def rfe_schedule(p: int, floor: int | None = None) -> RfeSchedule:
    """``[p, 2^m, 2^(m-1), ..., 1]`` with ``2^m`` the largest power of two below ``p``.

    With ``floor`` set, halving stops at the first size not above ``floor``
    and elimination continues one feature at a time from there.
    """
    if p < 1:
        raise SelectionError(f"feature count must be >= 1, got {p}")
    sizes = [p]
    d = 1 << ((p - 1).bit_length() - 1) if p > 1 else 0
    while d >= 1:
        if floor is not None and sizes[-1] <= floor:
            sizes.extend(range(sizes[-1] - 1, 0, -1))
            break
        sizes.append(d)
        d //= 2
    return RfeSchedule(tuple(sizes))


def rank_by_weight(model: SvmModel) -> GeneSubset:
    """Active features by decreasing absolute weight, lower index first on ties."""
    w = np.abs(model.weights)
    order = sorted(range(w.size), key=lambda k: (-w[k], model.active_features[k]))
    return GeneSubset(
        tuple(model.active_features[k] for k in order), tuple(float(w[k]) for k in order)
    )


@dataclass(frozen=True)
class RfeStep:
    size: int
    subset: GeneSubset
    model: SvmModel


@dataclass(frozen=True)
class RfePath:
    """One :class:`RfeStep` per schedule size, largest first."""

    steps: tuple[RfeStep, ...]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(s.size for s in self.steps)

    def __getitem__(self, d: int) -> RfeStep:
        for s in self.steps:
            if s.size == d:
                return s
        raise KeyError(d)

    def __iter__(self):
        return iter(self.steps)


def rfe_arrays(
    X: np.ndarray,
    labels: np.ndarray,
    schedule: RfeSchedule,
    config: SvmConfig,
    universe: Sequence[int] | None = None,
) -> RfePath:
    """RFE on raw arrays, starting from ``universe`` (default: every column)."""
    current = list(range(X.shape[1])) if universe is None else [int(v) for v in universe]
    first = schedule.sizes[0]
    if first > len(current):
        raise SelectionError(
            f"schedule starts at {first} but only {len(current)} features are available"
        )
    if first < len(current):
        ranking = rank_by_weight(fit_arrays(X, labels, current, config))
        current = list(ranking.indices[:first])
    steps = []
    for k, d in enumerate(schedule.sizes):
        model = fit_arrays(X, labels, current, config)
        ranking = rank_by_weight(model)
        steps.append(RfeStep(d, ranking, model))
        if k + 1 < len(schedule.sizes):
            current = list(ranking.indices[: schedule.sizes[k + 1]])
    return RfePath(tuple(steps))


def rfe_path(
    data: LabeledDataset,
    schedule: RfeSchedule,
    config: SvmConfig = SvmConfig(),
    universe: Sequence[int] | None = None,
) -> RfePath:
    """Fit, rank by ``|weight|``, truncate to the next schedule size, repeat.

    Every schedule size gets an entry holding the subset at that size
    (ordered by the model fitted on it) and that model.
    """
    if schedule.sizes[0] > data.p:
        raise SelectionError(f"schedule starts at {schedule.sizes[0]} > p={data.p}")
    return rfe_arrays(data.matrix, data.labels, schedule, config, universe)


def t_statistics(X: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Pooled-variance two-sample t per column (class 1 minus class 2)."""
    a = X[labels == 1]
    b = X[labels == 2]
    n1, n2 = len(a), len(b)
    if n1 < 2 or n2 < 2:
        raise SelectionError(f"pooled t needs >= 2 samples per class, got {n1} and {n2}")
    ss = ((a - a.mean(0)) ** 2).sum(0) + ((b - b.mean(0)) ** 2).sum(0)
    sp = np.sqrt(ss / (n1 + n2 - 2))
    diff = a.mean(0) - b.mean(0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = diff / (sp * np.sqrt(1.0 / n1 + 1.0 / n2))
    # constant columns carry no evidence
    return np.where(sp > 0, t, 0.0)


def t_screen_arrays(X: np.ndarray, labels: np.ndarray, G: int) -> GeneSubset:
    if not 1 <= G <= X.shape[1]:
        raise SelectionError(f"retained count G must lie in 1..{X.shape[1]}, got {G}")
    t = np.abs(t_statistics(X, labels))
    order = np.lexsort((np.arange(t.size), -t))[:G]
    return GeneSubset(tuple(order.tolist()), tuple(t[order].tolist()))


def t_screen(data: LabeledDataset, G: int) -> GeneSubset:
    """Top ``G`` features by absolute pooled t-statistic, lower index first on ties."""
    if data.g != 2:
        raise SelectionError(f"t screening needs 2 classes, data has g={data.g}")
    return t_screen_arrays(data.matrix, data.labels, G)


def subset_to_text(subset: GeneSubset, feature_names: Sequence[str]) -> str:
    """One ``rank<TAB>name<TAB>score`` line per feature."""
    scores = subset.scores or (float("nan"),) * len(subset)
    return "".join(
        f"{rank}\t{feature_names[v]}\t{s!r}\n"
        for rank, (v, s) in enumerate(zip(subset.indices, scores), start=1)
    )


def subset_from_text(text: str, feature_names: Sequence[str]) -> GeneSubset:
    index = {name: v for v, name in enumerate(feature_names)}
    rows = [ln.split("\t") for ln in text.splitlines() if ln.strip()]
    rows.sort(key=lambda r: int(r[0]))
    try:
        idx = tuple(index[r[1]] for r in rows)
    except KeyError as exc:
        raise SelectionError(f"unknown feature name {exc.args[0]!r}") from None
    return GeneSubset(idx, tuple(float(r[2]) for r in rows))
