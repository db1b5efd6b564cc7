import numpy as np
import pytest

from selbias.data import FoldPlan, LabeledDataset

# frozen toy problem: 9 samples, 4 features, weak signal on feature 0
TOY_X = np.array([
    [1.63, 1.64, 1.15, -0.97],
    [-0.79, 0.07, 0.86, 0.51],
    [2.41, 0.75, 0.64, -0.73],
    [-0.51, 1.48, 0.05, 0.81],
    [-0.78, -0.44, -1.29, -0.78],
    [0.30, -1.48, -0.53, 0.16],
    [-1.27, -0.25, -0.22, 0.42],
    [-1.03, 0.27, 0.06, 0.42],
    [-0.38, 1.66, -0.66, 1.20],
])
TOY_LABELS = np.array([1, 1, 1, 1, 1, 2, 2, 2, 2])
TOY_BLOCKS = [0, 0, 1, 2, 1, 1, 0, 2, 2]


@pytest.fixture
def toy():
    return LabeledDataset(TOY_X, TOY_LABELS)


@pytest.fixture
def toy_folds():
    return FoldPlan(np.array(TOY_BLOCKS), 3, seed=0)


@pytest.fixture
def toy6():
    rows = [0, 1, 2, 5, 6, 7]
    return LabeledDataset(TOY_X[rows], TOY_LABELS[rows])


def separable(n_per_class=10, p=8, informative=3, gap=4.0, seed=0):
    """Two classes split by a wide margin along one feature, noise elsewhere."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((2 * n_per_class, p)) * 0.5
    X[:n_per_class, informative] += gap
    X[n_per_class:, informative] -= gap
    labels = np.repeat([1, 2], n_per_class)
    return LabeledDataset(X, labels)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
