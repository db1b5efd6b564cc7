"""Compiled inner loop of the soft-margin SVM dual solver."""

import numba
import numpy as np


@numba.njit(cache=True)
def smo_solve(K, y, C, tol, max_iter):
    """Maximal-violating-pair SMO on the dual of the soft-margin SVM.

    Minimises ``0.5 a'Qa - sum(a)`` with ``Q = diag(y) K diag(y)`` subject to
    ``0 <= a <= C`` and ``y'a = 0``.  Each step optimises the pair of
    coordinates that most violates the KKT conditions, lowest index first on
    ties, so the iterate sequence is a deterministic function of the inputs.

    Returns ``(alpha, intercept, gap, iterations)`` where ``gap`` is the final
    KKT violation ``max_up(-yG) - min_low(-yG)``.
    """
    n = y.shape[0]
    alpha = np.zeros(n)
    grad = -np.ones(n)
    gap = np.inf
    it = 0
    while True:
        m_up = -np.inf
        i = -1
        m_low = np.inf
        j = -1
        for t in range(n):
            v = -y[t] * grad[t]
            if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
                if v > m_up:
                    m_up = v
                    i = t
            if (y[t] < 0 and alpha[t] < C) or (y[t] > 0 and alpha[t] > 0):
                if v < m_low:
                    m_low = v
                    j = t
        gap = m_up - m_low
        if i < 0 or j < 0 or gap <= tol or it >= max_iter:
            break
        a = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if a <= 1e-12:
            a = 1e-12
        lam = gap / a
        cap_i = C - alpha[i] if y[i] > 0 else alpha[i]
        cap_j = alpha[j] if y[j] > 0 else C - alpha[j]
        if lam > cap_i:
            lam = cap_i
        if lam > cap_j:
            lam = cap_j
        alpha[i] += y[i] * lam
        alpha[j] -= y[j] * lam
        # snap to the box so feasibility tests stay exact
        if alpha[i] < 1e-15 * C:
            alpha[i] = 0.0
        elif alpha[i] > C * (1.0 - 1e-15):
            alpha[i] = C
        if alpha[j] < 1e-15 * C:
            alpha[j] = 0.0
        elif alpha[j] > C * (1.0 - 1e-15):
            alpha[j] = C
        for t in range(n):
            grad[t] += lam * y[t] * (K[t, i] - K[t, j])
        it += 1

    # intercept: mean of -yG over free vectors, else midpoint of the KKT interval
    total = 0.0
    count = 0
    for t in range(n):
        if 0.0 < alpha[t] < C:
            total += -y[t] * grad[t]
            count += 1
    if count > 0:
        b = total / count
    elif i >= 0 and j >= 0:
        b = 0.5 * (m_up + m_low)
    elif i >= 0:
        b = m_up
    elif j >= 0:
        b = m_low
    else:
        b = 0.0
    if gap < 0.0:
        gap = 0.0
    return alpha, b, gap, it
