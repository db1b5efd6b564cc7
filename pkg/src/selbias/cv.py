"""Error-rate estimators for SVM-RFE rules.

Every estimator pools misallocations over validation blocks and divides by
``n`` once, so an unrepeated rate is always ``count / n`` exactly.

Protocols, by where feature selection happens relative to the held-out
samples:

=====================  =========================================================
``apparent``           rule trained and tested on all samples
``internal``           RFE once on all samples; each fold refits on that subset
``external``           RFE rerun from scratch inside every training split
``double``             external CV plus an inner CV choosing the subset size
``screened-internal``  top-G t-screen on all samples, RFE inside each fold
``screened-external``  t-screen and RFE both inside each fold
``leaky-holdout``      holdout split whose selection saw the test half
=====================  =========================================================
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from selbias.classifiers import SvmConfig, fit_arrays, predict
from selbias.data import FoldPlan, LabeledDataset, derive_seed, make_folds
from selbias.errors import CVError
from selbias.selection import (
    GeneSubset,
    RfeSchedule,
    rfe_arrays,
    rfe_schedule,
    t_screen_arrays,
)

log = logging.getLogger(__name__)

PROTOCOLS = (
    "apparent",
    "internal",
    "external",
    "double",
    "screened-internal",
    "screened-external",
    "leaky-holdout",
    "repeated",
)


@dataclass(frozen=True)
class ErrorTable:
    """Estimated error rate per retained subset size."""

    sizes: tuple[int, ...]
    rates: tuple[float, ...]
    protocol: str
    K: int
    seed: int
    # d -> per-fold selected feature indices, fold order
    fold_subsets: dict = field(default_factory=dict, compare=False, repr=False)
    # per-repetition rates (repeated CV only), one tuple per repetition
    replicates: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        sizes = tuple(int(d) for d in self.sizes)
        rates = tuple(float(r) for r in self.rates)
        if len(sizes) != len(rates) or not sizes:
            raise CVError("need one rate per size, at least one row")
        if len(set(sizes)) != len(sizes):
            raise CVError(f"duplicate sizes in {sizes}")
        if any(not 0.0 <= r <= 1.0 for r in rates):
            raise CVError(f"rates outside [0, 1]: {rates}")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "rates", rates)

    def rate(self, d: int) -> float:
        return self.rates[self.sizes.index(d)]

    def rows(self):
        return list(zip(self.sizes, self.rates))

    @property
    def best_rate(self) -> float:
        return min(self.rates)


@dataclass(frozen=True)
class DoubleCvResult:
    estimate: float
    inner_choices: tuple[int, ...]
    K: int
    seed: int
    inner_rates: tuple[tuple[float, ...], ...] = field(default=(), compare=False, repr=False)
    sizes: tuple[int, ...] = field(default=(), compare=False, repr=False)


class HoldoutRates(NamedTuple):
    leaky_rate: float
    clean_rate: float


def _train_rows(data: LabeledDataset, rows: np.ndarray, what: str) -> np.ndarray:
    present = np.unique(data.labels[rows])
    if present.size < 2:
        raise CVError(f"{what}: training split collapses to a single class")
    return rows


def select_best_size(table: ErrorTable) -> int:
    """Smallest size attaining the minimum estimated rate."""
    best = min(table.rates)
    return min(d for d, r in zip(table.sizes, table.rates) if r == best)


def apparent_error(
    data: LabeledDataset, subset: Sequence[int], config: SvmConfig = SvmConfig()
) -> float:
    model = fit_arrays(data.matrix, data.labels, subset, config)
    return int(np.sum(predict(model, data.matrix) != data.labels)) / data.n


def _refit_counts(
    data: LabeledDataset, folds: FoldPlan, subsets: dict, config: SvmConfig, what: str
) -> dict:
    """Misallocations when each fold refits on fixed, pre-chosen subsets."""
    counts = dict.fromkeys(subsets, 0)
    for k in range(folds.K):
        train = _train_rows(data, folds.without(k), f"{what} fold {k}")
        test = folds.block(k)
        for d, subset in subsets.items():
            model = fit_arrays(data.matrix[train], data.labels[train], subset, config)
            counts[d] += int(np.sum(predict(model, data.matrix[test]) != data.labels[test]))
    return counts


def internal_cv(
    data: LabeledDataset,
    folds: FoldPlan,
    d: int,
    schedule: RfeSchedule,
    config: SvmConfig = SvmConfig(),
) -> float:
    """Internal CV rate at size ``d``: the subset comes from RFE on all samples."""
    path = rfe_arrays(data.matrix, data.labels, schedule.down_to(d), config)
    counts = _refit_counts(data, folds, {d: path[d].subset.indices}, config, "internal")
    return counts[d] / data.n


def internal_cv_table(
    data: LabeledDataset,
    folds: FoldPlan,
    schedule: RfeSchedule,
    config: SvmConfig = SvmConfig(),
) -> ErrorTable:
    """:func:`internal_cv` at every schedule size, sharing one full-data RFE run."""
    path = rfe_arrays(data.matrix, data.labels, schedule, config)
    subsets = {s.size: s.subset.indices for s in path}
    counts = _refit_counts(data, folds, subsets, config, "internal")
    return ErrorTable(
        schedule.sizes,
        tuple(counts[d] / data.n for d in schedule.sizes),
        "internal",
        folds.K,
        folds.seed,
    )


UniverseFn = Callable[[np.ndarray, np.ndarray], Sequence[int] | None]


def _external_counts(
    data: LabeledDataset,
    folds: FoldPlan,
    schedule: RfeSchedule,
    config: SvmConfig,
    universe: UniverseFn,
    what: str,
):
    counts = np.zeros(len(schedule), dtype=np.int64)
    fold_subsets = {d: [] for d in schedule.sizes}
    for k in range(folds.K):
        train = _train_rows(data, folds.without(k), f"{what} fold {k}")
        test = folds.block(k)
        X, z = data.matrix[train], data.labels[train]
        path = rfe_arrays(X, z, schedule, config, universe(X, z))
        for m, step in enumerate(path):
            counts[m] += int(np.sum(predict(step.model, data.matrix[test]) != data.labels[test]))
            fold_subsets[step.size].append(step.subset.indices)
        log.debug("%s fold %d/%d done", what, k + 1, folds.K)
    return counts, {d: tuple(v) for d, v in fold_subsets.items()}


def _table(data, folds, schedule, counts, fold_subsets, protocol) -> ErrorTable:
    return ErrorTable(
        schedule.sizes,
        tuple(int(c) / data.n for c in counts),
        protocol,
        folds.K,
        folds.seed,
        fold_subsets,
    )


def external_cv(
    data: LabeledDataset,
    folds: FoldPlan,
    schedule: RfeSchedule,
    config: SvmConfig = SvmConfig(),
) -> ErrorTable:
    """External CV: full RFE rerun on every training split (K = n gives leave-one-out)."""
    counts, subsets = _external_counts(
        data, folds, schedule, config, lambda X, z: None, "external"
    )
    return _table(data, folds, schedule, counts, subsets, "external")


def screened_internal_cv(
    data: LabeledDataset,
    G: int,
    folds: FoldPlan,
    schedule: RfeSchedule,
    config: SvmConfig = SvmConfig(),
) -> ErrorTable:
    """RFE inside each fold, restricted to the top-``G`` t-screen of *all* samples."""
    if schedule.sizes[0] > G:
        raise CVError(f"schedule starts at {schedule.sizes[0]} > G={G}")
    top = t_screen_arrays(data.matrix, data.labels, G).indices
    counts, subsets = _external_counts(
        data, folds, schedule, config, lambda X, z: top, "screened-internal"
    )
    return _table(data, folds, schedule, counts, subsets, "screened-internal")


def screened_external_cv(
    data: LabeledDataset,
    G: int,
    folds: FoldPlan,
    schedule: RfeSchedule,
    config: SvmConfig = SvmConfig(),
) -> ErrorTable:
    """Top-``G`` t-screen and RFE both redone on every training split."""
    if schedule.sizes[0] > G:
        raise CVError(f"schedule starts at {schedule.sizes[0]} > G={G}")
    counts, subsets = _external_counts(
        data,
        folds,
        schedule,
        config,
        lambda X, z: t_screen_arrays(X, z, G).indices,
        "screened-external",
    )
    return _table(data, folds, schedule, counts, subsets, "screened-external")


def double_cv(
    data: LabeledDataset,
    K: int,
    schedule: RfeSchedule,
    config: SvmConfig = SvmConfig(),
    seed: int = 0,
) -> DoubleCvResult:
    """Two-layer CV that also validates the choice of subset size.

    For outer block k the remaining K-1 blocks run their own external CV
    (train without blocks k and k', test on k'); the size with the fewest
    inner misallocations, smallest on ties, is the size used when the
    rule trained without block k is tested on block k.
    """
    if K < 3:
        raise CVError(f"double CV needs K >= 3, got {K}")
    folds = make_folds(data, K, seed)
    sizes = schedule.sizes
    wrong = 0
    choices, inner_rates = [], []
    for k in range(K):
        inner = np.zeros(len(sizes), dtype=np.int64)
        for k2 in range(K):
            if k2 == k:
                continue
            train = _train_rows(data, folds.without(k, k2), f"double inner ({k}, {k2})")
            test = folds.block(k2)
            path = rfe_arrays(data.matrix[train], data.labels[train], schedule, config)
            for m, step in enumerate(path):
                inner[m] += int(np.sum(predict(step.model, data.matrix[test]) != data.labels[test]))
        fewest = inner.min()
        h = min(d for d, c in zip(sizes, inner) if c == fewest)
        choices.append(h)
        inner_rates.append(tuple(int(c) / (data.n - folds.block_sizes[k]) for c in inner))

        train = _train_rows(data, folds.without(k), f"double outer {k}")
        test = folds.block(k)
        path = rfe_arrays(data.matrix[train], data.labels[train], schedule.down_to(h), config)
        wrong += int(np.sum(predict(path[h].model, data.matrix[test]) != data.labels[test]))
        log.debug("double CV outer fold %d: h=%d", k, h)
    return DoubleCvResult(wrong / data.n, tuple(choices), K, seed, tuple(inner_rates), sizes)


def repeated_cv(
    data: LabeledDataset,
    K: int,
    schedule: RfeSchedule,
    config: SvmConfig = SvmConfig(),
    R: int = 10,
    seed: int = 0,
) -> ErrorTable:
    """Per-size mean of external CV over ``R`` fold plans seeded ``derive_seed(seed, r)``."""
    if R < 1:
        raise CVError(f"repetition count must be >= 1, got {R}")
    reps = []
    for r in range(R):
        folds = make_folds(data, K, derive_seed(seed, r))
        reps.append(external_cv(data, folds, schedule, config).rates)
    mean = np.mean(np.array(reps), axis=0)
    return ErrorTable(schedule.sizes, tuple(mean.tolist()), "repeated", K, seed, replicates=tuple(reps))


def holdout_split(data: LabeledDataset, holdout_fraction: float, seed: int):
    """Stratified (train, test) index arrays; each class contributes to both."""
    if not 0 < holdout_fraction < 1:
        raise CVError(f"holdout fraction must lie in (0, 1), got {holdout_fraction}")
    train, test = [], []
    for i in range(1, data.g + 1):
        members = np.random.default_rng([int(seed), i]).permutation(
            np.flatnonzero(data.labels == i)
        )
        m = int(round(holdout_fraction * members.size))
        if m < 1 or m > members.size - 1:
            raise CVError(f"degenerate split: class {i} has {members.size} samples")
        test.append(members[:m])
        train.append(members[m:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def _select(X, z, d, G, config) -> tuple[int, ...]:
    universe = t_screen_arrays(X, z, G).indices
    path = rfe_arrays(X, z, rfe_schedule(G).down_to(d), config, universe)
    return path[d].subset.indices


def leaky_holdout(
    data: LabeledDataset,
    holdout_fraction: float = 0.5,
    d: int = 8,
    G: int | None = None,
    config: SvmConfig = SvmConfig(),
    seed: int = 0,
) -> HoldoutRates:
    """Holdout error with selection on all samples (leaky) and on the training part only (clean).

    Selection is a top-``G`` t-screen (``G=None`` keeps every feature)
    followed by RFE down to ``d``; ``d`` must be a size of ``rfe_schedule(G)``.
    """
    G = data.p if G is None else G
    if not 1 <= d <= G <= data.p:
        raise CVError(f"need 1 <= d <= G <= p, got d={d}, G={G}, p={data.p}")
    train, test = holdout_split(data, holdout_fraction, seed)
    X, z = data.matrix, data.labels

    def holdout_rate(subset):
        model = fit_arrays(X[train], z[train], subset, config)
        return int(np.sum(predict(model, X[test]) != z[test])) / test.size

    leaky = holdout_rate(_select(X, z, d, G, config))
    clean = holdout_rate(_select(X[train], z[train], d, G, config))
    return HoldoutRates(leaky, clean)


def table_to_text(table: ErrorTable, delimiter: str = "\t") -> str:
    lines = [delimiter.join(("protocol", "K", "seed", "d", "error_rate"))]
    lines += [
        delimiter.join((table.protocol, str(table.K), str(table.seed), str(d), repr(r)))
        for d, r in table.rows()
    ]
    return "\n".join(lines) + "\n"


def table_from_text(text: str, delimiter: str = "\t") -> ErrorTable:
    rows = [ln.split(delimiter) for ln in text.splitlines() if ln.strip()]
    if not rows or rows[0] != ["protocol", "K", "seed", "d", "error_rate"]:
        raise CVError("not an error-table file")
    body = rows[1:]
    if not body:
        raise CVError("error table has no rows")
    return ErrorTable(
        tuple(int(r[3]) for r in body),
        tuple(float(r[4]) for r in body),
        body[0][0],
        int(body[0][1]),
        int(body[0][2]),
    )
