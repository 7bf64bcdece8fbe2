"""NumPy implementations of the kernels in ``_kernels.pyx``.

Same signatures and the same recurrences, vectorised over the evaluation
points instead of looped in C.
"""

import math

import numpy as np


def laguerre(m: int, r: float, x: float) -> float:
    if m == 0:
        return 1.0
    p0, p1 = 1.0, 1.0 + r - x
    for k in range(1, m):
        p0, p1 = p1, ((2 * k + 1 + r - x) * p1 - (k + r) * p0) / (k + 1)
    return p1


def laguerre_array(m: int, r: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if m == 0:
        return np.ones_like(x)
    p0 = np.ones_like(x)
    p1 = 1.0 + r - x
    for k in range(1, m):
        p0, p1 = p1, ((2 * k + 1 + r - x) * p1 - (k + r) * p0) / (k + 1)
    return p1


def wishart_density(x, n: int, width: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    r = n - width
    pos = x > 0
    safe = np.where(pos, x, 1.0)
    psi = np.where(pos, np.exp(0.5 * (r * np.log(safe) - safe - math.lgamma(r + 1.0))), 0.0)
    if r == 0:
        psi = np.where(x == 0, 1.0, psi)
    psi = np.where(x < 0, 0.0, psi)
    acc = psi * psi
    psi_prev = np.zeros_like(x)
    for m in range(width - 1):
        psi_next = ((2 * m + 1 + r - x) * psi - math.sqrt(m * (m + r)) * psi_prev) / math.sqrt(
            (m + 1.0) * (m + 1.0 + r)
        )
        psi_prev, psi = psi, psi_next
        acc += psi * psi
    return np.where(x < 0, 0.0, acc / width)
