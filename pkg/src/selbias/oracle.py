"""Ground truth for synthetic two-Gaussian problems: Bayes rule and allocation rates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp, ndtr

from selbias.classifiers import SvmConfig, predict, train_svm
from selbias.data import LabeledDataset, SyntheticSpec, derive_seed, synth_gaussian
from selbias.errors import OracleError

Rule = Callable[[np.ndarray], np.ndarray]
Trainer = Callable[[LabeledDataset], Rule]


@dataclass(frozen=True, eq=False)
class RateMatrix:
    """``rates[i, j]``: probability that a class ``i+1`` draw is assigned to class ``j+1``."""

    rates: np.ndarray
    kind: str
    mc_samples: int
    seed: int

    def __post_init__(self):
        r = np.array(self.rates, dtype=float)
        if r.ndim != 2 or r.shape[0] != r.shape[1]:
            raise OracleError(f"rate matrix must be square, got shape {r.shape}")
        if np.any((r < 0) | (r > 1)):
            raise OracleError("rates must lie in [0, 1]")
        if self.kind not in ("conditional", "unconditional"):
            raise OracleError(f"unknown rate kind {self.kind!r}")
        r.flags.writeable = False
        object.__setattr__(self, "rates", r)

    @property
    def class_errors(self) -> np.ndarray:
        """Per-class misallocation rate (row sum minus the diagonal)."""
        return self.rates.sum(axis=1) - np.diag(self.rates)

    def __eq__(self, other):
        if not isinstance(other, RateMatrix):
            return NotImplemented
        return (
            np.array_equal(self.rates, other.rates)
            and (self.kind, self.mc_samples, self.seed)
            == (other.kind, other.mc_samples, other.seed)
        )

    __hash__ = None


def _log_joint(spec: SyntheticSpec, Y: np.ndarray) -> np.ndarray:
    """``log(prior_i) + log f_i(y)`` up to a class-independent constant, shape (m, 2)."""
    sq = ((Y[:, None, :] - spec.means[None, :, :]) ** 2).sum(axis=2)
    with np.errstate(divide="ignore"):
        log_prior = np.log(np.asarray(spec.priors))
    return log_prior[None, :] - 0.5 * sq / spec.variance


def _as_samples(spec: SyntheticSpec, y) -> tuple[np.ndarray, bool]:
    Y = np.asarray(y, dtype=float)
    single = Y.ndim == 1
    Y = np.atleast_2d(Y)
    if Y.shape[1] != spec.p:
        raise OracleError(f"sample has {Y.shape[1]} features, spec has p={spec.p}")
    return Y, single


def posterior(spec: SyntheticSpec, y) -> np.ndarray:
    """Posterior class probabilities, computed in log space.

    ``y`` may be one sample (returns shape ``(2,)``) or a matrix of samples.
    """
    Y, single = _as_samples(spec, y)
    lj = _log_joint(spec, Y)
    norm = logsumexp(lj, axis=1, keepdims=True)
    if not np.all(np.isfinite(norm)):
        raise OracleError("all class densities vanish at the given point")
    tau = np.exp(lj - norm)
    return tau[0] if single else tau


def bayes_classify(spec: SyntheticSpec, y) -> int | np.ndarray:
    """Class of largest posterior; ties go to the lower class."""
    Y, single = _as_samples(spec, y)
    lj = _log_joint(spec, Y)
    if not np.all(np.isfinite(lj.max(axis=1))):
        raise OracleError("all class densities vanish at the given point")
    out = np.argmax(lj, axis=1) + 1
    return int(out[0]) if single else out


def bayes_rule(spec: SyntheticSpec) -> Rule:
    return lambda Y: bayes_classify(spec, np.atleast_2d(Y))


def optimal_error(spec: SyntheticSpec) -> float:
    """Bayes error of two homoscedastic Gaussian classes.

    With separation ``D`` (Mahalanobis) and ``c = ln(pi_1 / pi_2)``::

        e_o = pi_1 Phi(-D/2 - c/D) + pi_2 Phi(-D/2 + c/D)
    """
    if not isinstance(spec, SyntheticSpec) or spec.g != 2:
        raise OracleError("optimal_error supports two-class Gaussian specs only")
    p1, p2 = spec.priors
    if p1 == 0 or p2 == 0:
        return 0.0
    delta = spec.separation
    if delta == 0:
        return min(p1, p2)
    c = math.log(p1 / p2)
    return float(p1 * ndtr(-delta / 2 - c / delta) + p2 * ndtr(-delta / 2 + c / delta))


def conditional_rates(rule: Rule, spec: SyntheticSpec, mc_samples: int = 10_000, seed: int = 0) -> RateMatrix:
    """Monte-Carlo allocation rates of one fixed rule.

    Class ``i`` draws come from a generator seeded ``(seed, i)``.
    """
    if mc_samples < 1000:
        raise OracleError(f"mc_samples must be >= 1000, got {mc_samples}")
    sd = math.sqrt(spec.variance)
    rates = np.zeros((2, 2))
    for i in range(2):
        rng = np.random.default_rng([int(seed), i + 1])
        Y = spec.means[i] + sd * rng.standard_normal((mc_samples, spec.p))
        assigned = np.asarray(rule(Y)).reshape(-1)
        if assigned.shape != (mc_samples,) or not np.all(np.isin(assigned, (1, 2))):
            raise OracleError("rule must return one class in {1, 2} per sample")
        rates[i] = np.bincount(assigned - 1, minlength=2) / mc_samples
    return RateMatrix(rates, "conditional", mc_samples, seed)


def _training_sizes(n: int, priors: Sequence[float]) -> tuple[int, int]:
    n1 = int(round(n * priors[0]))
    return n1, n - n1


def unconditional_rates(
    trainer: Trainer,
    spec: SyntheticSpec,
    n: int,
    reps: int = 10,
    mc_samples: int = 10_000,
    seed: int = 0,
) -> RateMatrix:
    """Average of :func:`conditional_rates` over ``reps`` fresh training sets.

    Replicate ``r`` uses ``s = derive_seed(seed, r)``: its training set is
    drawn with seed ``derive_seed(s, 0)`` (class sizes ``round(n * pi_1)``
    and the rest) and its rates are estimated with seed ``derive_seed(s, 1)``.
    """
    if reps < 1:
        raise OracleError(f"reps must be >= 1, got {reps}")
    sizes = _training_sizes(n, spec.priors)
    total = np.zeros((2, 2))
    for r in range(reps):
        s = derive_seed(seed, r)
        train_spec = SyntheticSpec(spec.means, spec.variance, spec.priors, sizes, derive_seed(s, 0))
        try:
            rule = trainer(synth_gaussian(train_spec))
        except Exception as exc:
            raise OracleError(f"trainer failed on replicate {r}: {exc}") from exc
        total += conditional_rates(rule, spec, mc_samples, derive_seed(s, 1)).rates
    return RateMatrix(total / reps, "unconditional", mc_samples, seed)


def overall_error(rates: RateMatrix, priors: Sequence[float]) -> float:
    """Prior-weighted sum of the per-class misallocation rates."""
    priors = np.asarray(priors, dtype=float)
    if priors.shape != (rates.rates.shape[0],):
        raise OracleError(f"{priors.size} priors for {rates.rates.shape[0]} classes")
    if np.any(priors < 0) or abs(priors.sum() - 1) > 1e-12:
        raise OracleError("priors must be nonnegative and sum to 1")
    return float(priors @ rates.class_errors)


def rates_to_text(rates: RateMatrix, delimiter: str = "\t") -> str:
    g = rates.rates.shape[0]
    lines = [delimiter.join(["true_class", *(f"assigned_{j}" for j in range(1, g + 1))])]
    lines += [
        delimiter.join([str(i + 1), *(repr(float(v)) for v in row)])
        for i, row in enumerate(rates.rates)
    ]
    return "\n".join(lines) + "\n"


def svm_trainer(config: SvmConfig | None = None) -> Trainer:
    """Trainer that fits a linear SVM on every feature and returns its predict rule."""
    config = config or SvmConfig()

    def train(data: LabeledDataset) -> Rule:
        model = train_svm(data, range(data.p), config)
        return lambda Y: predict(model, np.atleast_2d(Y))

    return train
