"""Small dense linear-algebra helpers: pfaffian and Fredholm-series checks."""
from __future__ import annotations

import itertools

import numpy as np

__all__ = ["pfaffian", "det_series"]


def pfaffian(a) -> float | complex:
    """Pfaffian of a skew-symmetric matrix.

    Parlett-Reid style elimination: reduce to tridiagonal form with
    symmetric pivoting, tracking the sign of every interchange. O(n^3).
    """
    a = np.array(a, dtype=complex if np.iscomplexobj(a) else float, copy=True)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("pfaffian needs a square matrix")
    if n == 0:
        return a.dtype.type(1.0)
    if n % 2:
        return a.dtype.type(0.0)
    pf = a.dtype.type(1.0)
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(a[k + 1:, k])))
        if kp != k + 1:
            a[[k + 1, kp], :] = a[[kp, k + 1], :]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            pf = -pf
        if a[k + 1, k] == 0:
            return a.dtype.type(0.0)
        pf *= a[k, k + 1]
        if k + 2 < n:
            tau = a[k, k + 2:] / a[k, k + 1]
            col = a[k + 2:, k + 1].copy()
            a[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return pf


def det_series(k) -> float:
    """``det(I - K)`` by the explicit Fredholm expansion over principal minors.

    Exponential cost; meant for windows of a handful of sites only.
    """
    k = np.asarray(k, dtype=float)
    n = k.shape[0]
    total = 1.0
    for size in range(1, n + 1):
        acc = 0.0
        for idx in itertools.combinations(range(n), size):
            acc += np.linalg.det(k[np.ix_(idx, idx)])
        # the 1/n! of the series is absorbed by summing over subsets
        total += (-1) ** size * acc
    return total

