"""Scalar special functions: q-Pochhammer, theta functions, Bessel, Airy.

Every routine accepts numpy arrays where it makes sense and broadcasts.
The nome ``q`` is always a real number in ``[0, 1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, NonConvergent

__all__ = [
    "Accuracy",
    "DEFAULT_ACCURACY",
    "check_nome",
    "pochhammer_inf",
    "log_pochhammer_qq",
    "theta_mult",
    "theta3",
    "theta1",
    "dedekind_eta",
    "bessel_j",
    "bessel_i",
    "bessel_i_log",
    "airy_ai",
    "fermi_factor",
]

AIRY_WINDOW = (-40.0, 200.0)


@dataclass(frozen=True)
class Accuracy:
    """Tolerance record passed to truncated series and products."""

    rel_tol: float = 1e-12
    max_terms: int = 10**6

    def __post_init__(self):
        if not (0.0 < self.rel_tol <= 1e-4):
            raise DomainError(f"rel_tol must lie in (0, 1e-4], got {self.rel_tol}")
        if self.max_terms < 64:
            raise DomainError(f"max_terms must be >= 64, got {self.max_terms}")


DEFAULT_ACCURACY = Accuracy()


def check_nome(q: float) -> float:
    q = float(q)
    if not (0.0 <= q < 1.0):
        raise DomainError(f"nome must satisfy 0 <= q < 1, got {q}")
    return q


def _n_product_terms(zmax: float, q: float, acc: Accuracy) -> int:
    # number of factors k = 0..K-1 such that the neglected tail
    # sum_{k>=K} |z| q^k = |z| q^K / (1-q) is below rel_tol * 1e-4
    if zmax == 0.0 or q == 0.0:
        return 1
    thr = acc.rel_tol * 1e-4 * (1.0 - q)
    if zmax <= thr:
        return 1
    k = int(math.ceil(math.log(thr / zmax) / math.log(q))) + 1
    if k > acc.max_terms:
        raise NonConvergent(f"q-Pochhammer needs {k} factors (> max_terms={acc.max_terms})")
    return max(k, 1)


def pochhammer_inf(z, q: float, acc: Accuracy = DEFAULT_ACCURACY):
    """Infinite q-Pochhammer symbol ``prod_{k>=0} (1 - z q^k)``."""
    q = check_nome(q)
    z = np.asarray(z, dtype=complex)
    zmax = float(np.max(np.abs(z))) if z.size else 0.0
    nterms = _n_product_terms(zmax, q, acc)
    out = np.ones_like(z)
    zk = z.copy()
    for _ in range(nterms):
        out *= 1.0 - zk
        zk *= q
    return out[()] if out.ndim == 0 else out


def log_pochhammer_qq(q: float, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """``ln (q;q)_inf`` summed in log form (safe when the product underflows)."""
    q = check_nome(q)
    if q == 0.0:
        return 0.0
    n = _n_product_terms(q, q, acc)
    k = np.arange(1, n + 1, dtype=float)
    return float(np.sum(np.log1p(-(q**k))))


def theta_mult(z, q: float, acc: Accuracy = DEFAULT_ACCURACY):
    """Multiplicative theta function ``(z;q)_inf (q/z;q)_inf``."""
    q = check_nome(q)
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("theta_mult is undefined at z = 0")
    out = pochhammer_inf(z, q, acc) * pochhammer_inf(q / z, q, acc)
    return out


def _theta3_range(logabs_z: np.ndarray, q: float, acc: Accuracy):
    # |term_n| = exp(n^2/2 ln q + n ln|z|) peaks at n* = ln|z| / |ln q|;
    # keep n within the band where it is above rel_tol*1e-4 of the peak
    alq = -math.log(q)
    cut = -math.log(acc.rel_tol * 1e-4)
    width = math.sqrt(2.0 * cut / alq) + 2
    n_lo = int(math.floor(float(np.min(logabs_z)) / alq - width))
    n_hi = int(math.ceil(float(np.max(logabs_z)) / alq + width))
    if n_hi - n_lo + 1 > acc.max_terms:
        raise NonConvergent("theta3 needs more than max_terms terms")
    return n_lo, n_hi


def theta3(z, q: float, acc: Accuracy = DEFAULT_ACCURACY):
    """Jacobi theta function ``sum_n q^{n^2/2} z^n`` (bilateral sum)."""
    q = check_nome(q)
    z = np.asarray(z, dtype=complex)
    if q == 0.0:
        out = np.ones_like(z)
        return out[()] if out.ndim == 0 else out
    if np.any(z == 0):
        raise DomainError("theta3 needs z != 0")
    logz = np.log(z)
    n_lo, n_hi = _theta3_range(logz.real, q, acc)
    lq = math.log(q)
    out = np.zeros_like(z)
    # sum in chunks to keep memory bounded for large arrays
    ns = np.arange(n_lo, n_hi + 1, dtype=float)
    for chunk in np.array_split(ns, max(1, len(ns) // 256)):
        expo = 0.5 * lq * chunk**2 + np.multiply.outer(logz, chunk)
        out = out + np.exp(expo).sum(axis=-1)
    return out[()] if out.ndim == 0 else out


def theta1(z, q: float, acc: Accuracy = DEFAULT_ACCURACY):
    """Jacobi theta function ``theta_1``, written through ``theta_3``.

    ``theta1(z; q) = q^{1/8} z^{1/2} theta3(-q^{1/2} z; q) / i`` with the
    principal branch of ``z^{1/2}``.  On ``|z| = 1`` this is real.
    """
    q = check_nome(q)
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("theta1 needs z != 0")
    if q == 0.0:
        out = np.zeros_like(z)
        return out[()] if out.ndim == 0 else out
    out = q**0.125 * np.sqrt(z) * theta3(-math.sqrt(q) * z, q, acc) / 1j
    return out


def dedekind_eta(q: float, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    q = check_nome(q)
    if q == 0.0:
        return 0.0
    return float(q ** (1.0 / 24.0) * pochhammer_inf(q, q, acc).real)


# ---------------------------------------------------------------------------
# Bessel and Airy

def bessel_j(n, x):
    """Bessel function ``J_n(x)`` of integer order, ``x >= 0``.

    Negative orders follow ``J_{-n} = (-1)^n J_n``.
    """
    n = np.asarray(n)
    if not np.all(np.equal(np.mod(n, 1), 0)):
        raise DomainError("bessel_j is only defined here for integer orders")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("bessel_j expects a nonnegative argument")
    out = special.jv(n.astype(float), x)
    return out[()] if np.ndim(out) == 0 else out


def bessel_i(n, x):
    """Modified Bessel function ``I_n(x)`` of integer order.

    Raises ``OverflowError`` when the value is not representable; use
    :func:`bessel_i_log` in that case.
    """
    n = np.asarray(n)
    if not np.all(np.equal(np.mod(n, 1), 0)):
        raise DomainError("bessel_i is only defined here for integer orders")
    x = np.asarray(x)
    out = special.iv(np.abs(n).astype(float), x)
    if np.any(np.isinf(out)):
        raise OverflowError("I_n(x) overflows; use bessel_i_log")
    return out[()] if np.ndim(out) == 0 else out


def _log_i_debye(nu: np.ndarray, x: np.ndarray) -> np.ndarray:
    # leading uniform asymptotics, used only when the scaled value underflows
    z = x / nu
    s = np.sqrt(1.0 + z * z)
    eta = s + np.log(z / (1.0 + s))
    return nu * eta - 0.5 * np.log(2 * np.pi * nu) - 0.5 * np.log(s)


def bessel_i_log(n, x):
    """``ln I_n(x)`` for integer ``n`` and ``x > 0``, without overflow."""
    n = np.abs(np.asarray(n, dtype=float))
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("bessel_i_log expects x > 0")
    n, x = np.broadcast_arrays(n, x)
    scaled = special.ive(n, x)
    with np.errstate(divide="ignore"):
        out = np.log(scaled) + x
    bad = scaled <= 0
    if np.any(bad):
        out = np.where(bad, _log_i_debye(np.where(bad, n, 1.0), x), out)
    return out[()] if out.ndim == 0 else out


def _airy(x):
    return special.airy(x)[0]


def airy_ai(x):
    """Airy function ``Ai(x)`` on the guaranteed window ``[-40, 200]``."""
    x = np.asarray(x, dtype=float)
    if np.any((x < AIRY_WINDOW[0]) | (x > AIRY_WINDOW[1])):
        raise DomainError(f"airy_ai is guaranteed on {AIRY_WINDOW} only")
    out = _airy(x)
    return out[()] if out.ndim == 0 else out


def fermi_factor(v, alpha):
    """Overflow-safe ``e^{alpha v} / (1 + e^{alpha v})``.

    ``alpha = inf`` gives the indicator of ``v > 0`` with value 1/2 at 0.
    """
    v = np.asarray(v, dtype=float)
    if math.isinf(alpha):
        out = np.where(v > 0, 1.0, np.where(v < 0, 0.0, 0.5))
    else:
        if alpha <= 0:
            raise DomainError("alpha must be positive")
        out = special.expit(alpha * v)
    return out[()] if np.ndim(out) == 0 else out
