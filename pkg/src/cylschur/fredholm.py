"""Fredholm determinants: discrete windows and the finite-temperature Airy kernel.

``M_alpha(x, y) = int f_alpha(v) Ai(x + v) Ai(y + v) dv`` with the Fermi
factor ``f_alpha(v) = e^{alpha v} / (1 + e^{alpha v})``.  The v-integral is a
fixed Gauss-Legendre panel rule, so a whole Nystrom matrix is one product
``A diag(f w) A^T`` with ``A[i, p] = Ai(x_i + v_p)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, NonConvergent, SpectrumError
from .kernels import KernelMatrix, ftb_kernel_matrix, ftb_trace_tail
from .measures import CylindricPlancherelParams
from .specfun import DEFAULT_ACCURACY, Accuracy, fermi_factor

__all__ = [
    "Window",
    "Quadrature",
    "m_alpha",
    "m_alpha_matrix",
    "m_alpha_extended",
    "f_alpha",
    "f_alpha_table",
    "f_alpha_trace",
    "discrete_fredholm",
    "edge_window",
    "lambda1_cdf",
]

PANEL_NODES = 64
PANEL_WIDTH = 2.0
AI_CUT = 25.0  # Ai(x) < 1e-30 beyond this
_GL_X, _GL_W = np.polynomial.legendre.leggauss(PANEL_NODES)


@dataclass(frozen=True)
class Window:
    """Stored sites ``m_lo..m_hi`` inclusive (site ``m`` is the half-integer ``m - 1/2``)."""

    m_lo: int
    m_hi: int

    def __post_init__(self):
        if self.m_hi < self.m_lo - 1:
            raise DomainError("m_hi must be >= m_lo - 1")

    @property
    def sites(self) -> list:
        return list(range(self.m_lo, self.m_hi + 1))

    def __len__(self) -> int:
        return self.m_hi - self.m_lo + 1


@dataclass(frozen=True)
class Quadrature:
    """Nystrom rule on ``(s, inf)``: Gauss-Legendre in ``xi`` with ``x = s - sigma ln(1 - xi)``."""

    n_nodes: int = 16
    map: str = "exp-tail"
    sigma: float = 1.0

    def __post_init__(self):
        if not 16 <= self.n_nodes <= 512:
            raise DomainError("n_nodes must lie in [16, 512]")
        if self.map not in ("exp-tail", "identity"):
            raise DomainError("map must be 'exp-tail' or 'identity'")
        if self.sigma <= 0:
            raise DomainError("sigma must be positive")

    def nodes(self, s: float, length: float = 30.0):
        xg, wg = np.polynomial.legendre.leggauss(self.n_nodes)
        xi = 0.5 * (xg + 1.0)
        if self.map == "identity":
            # plain Gauss-Legendre on the truncated interval (s, s + length)
            return s + length * xi, 0.5 * length * wg
        return s - self.sigma * np.log1p(-xi), 0.5 * wg * self.sigma / (1.0 - xi)


def _panels(lo: float, hi: float):
    n = max(1, int(math.ceil((hi - lo) / PANEL_WIDTH)))
    edges = np.linspace(lo, hi, n + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    return (mid + half * _GL_X[None, :]).ravel(), (half * _GL_W[None, :]).ravel()


def _v_rule(weight, decay_left: float, decay_right: float, xmin: float):
    """Nodes and weights (times ``weight(v)``) for the v-integral.

    ``decay_left`` is the exponential rate of ``weight`` as ``v -> -inf``
    (``inf`` for a cut at 0); on the right the Airy factor takes over.
    """
    hi = max(0.0, AI_CUT - xmin)
    if math.isinf(decay_left):
        lo = 0.0
    else:
        lo = -38.0 / decay_left
    parts = []
    if lo < 0:
        parts.append(_panels(lo, 0.0))
    parts.append(_panels(0.0, hi))
    v = np.concatenate([p[0] for p in parts])
    w = np.concatenate([p[1] for p in parts])
    return v, w * weight(v)


def _ai(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    live = x < AI_CUT
    out[live] = special.airy(x[live])[0]
    return out


def _check_alpha(alpha) -> float:
    alpha = float(alpha)
    if not alpha > 0:
        raise DomainError("alpha must be positive (or inf)")
    return alpha


def m_alpha_matrix(xs, ys, alpha: float) -> np.ndarray:
    """``M_alpha(x_i, y_j)`` on a grid."""
    alpha = _check_alpha(alpha)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    if min(xs.min(), ys.min()) < -30:
        raise DomainError("m_alpha needs x, y >= -30")
    v, w = _v_rule(lambda v: fermi_factor(v, alpha), alpha, 0.0, min(xs.min(), ys.min()))
    ax = _ai(xs[:, None] + v[None, :])
    ay = ax if np.array_equal(xs, ys) else _ai(ys[:, None] + v[None, :])
    return (ax * w[None, :]) @ ay.T


def m_alpha(x: float, y: float, alpha: float, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Finite-temperature Airy kernel; ``alpha = inf`` gives the Airy kernel."""
    return float(m_alpha_matrix([x], [y], alpha)[0, 0])


def m_alpha_extended(p1, p2, alpha: float, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Extended finite-temperature Airy kernel at ``p = (tau, x)``.

    ``tau <= tau'``: ``int e^{(tau-tau') v} / (1 + e^{-alpha v}) Ai Ai dv``;
    ``tau > tau'``: ``-int e^{(tau-tau') v} / (1 + e^{alpha v}) Ai Ai dv``.
    """
    tau, x = map(float, p1)
    taup, y = map(float, p2)
    alpha = _check_alpha(alpha)
    d = tau - taup
    if abs(d) >= alpha:
        raise DomainError("need |tau - tau'| < alpha")
    if min(x, y) < -30:
        raise DomainError("m_alpha_extended needs x, y >= -30")
    if d <= 0:
        def weight(v):
            return np.exp(d * v + special.log_expit(alpha * v))
        rate, sign = alpha + d, 1.0
    else:
        def weight(v):
            return np.exp(d * v + special.log_expit(-alpha * v))
        rate, sign = d, -1.0
    v, w = _v_rule(weight, rate, 0.0, min(x, y))
    return float(sign * np.sum(w * _ai(x + v) * _ai(y + v)))


def _sigma_for(alpha: float) -> float:
    # the diagonal decays like e^{-alpha x}; keep (1 - xi)^{alpha sigma - 1} smooth
    return 1.0 if math.isinf(alpha) else max(1.0, 2.0 / alpha)


def _f_alpha_at(s: float, alpha: float, quad: Quadrature) -> float:
    x, w = quad.nodes(s)
    sw = np.sqrt(w)
    m = m_alpha_matrix(x, x, alpha)
    return float(np.linalg.det(np.eye(len(x)) - sw[:, None] * m * sw[None, :]))


def f_alpha(s: float, alpha: float, quad: Quadrature | None = None, tol: float = 1e-7,
            return_error: bool = False):
    """``F_alpha(s) = det(I - M_alpha)`` on ``L^2(s, inf)`` by Nystrom with node doubling."""
    alpha = _check_alpha(alpha)
    if s < -12:
        raise DomainError("f_alpha needs s >= -12")
    quad = quad or Quadrature(16, "exp-tail", _sigma_for(alpha))
    n = quad.n_nodes
    prev = _f_alpha_at(s, alpha, quad)
    while True:
        n *= 2
        if n > 512:
            raise NonConvergent(f"F_alpha({s}) not converged with 512 nodes")
        q = Quadrature(n, quad.map, quad.sigma)
        cur = _f_alpha_at(s, alpha, q)
        err = abs(cur - prev)
        if err < tol:
            val = min(1.0, max(0.0, cur))
            return (val, err) if return_error else val
        prev = cur


def f_alpha_table(s_values, alpha: float, tol: float = 1e-7):
    """Rows ``(s, F_alpha(s), est_error)``."""
    return [(float(s), *f_alpha(s, alpha, tol=tol, return_error=True)) for s in s_values]


def f_alpha_trace(s: float, alpha: float) -> float:
    """``int_s^inf M_alpha(x, x) dx``.

    Uses ``int_a^inf Ai(x)^2 dx = Ai'(a)^2 - a Ai(a)^2`` inside the v-integral.
    """
    alpha = _check_alpha(alpha)
    if s < -12:
        raise DomainError("f_alpha_trace needs s >= -12")
    v, w = _v_rule(lambda v: fermi_factor(v, alpha), alpha, 0.0, s)
    a = s + v
    ai, aip, _, _ = special.airy(a)
    return float(np.sum(w * (aip**2 - a * ai**2)))


# ---------------------------------------------------------------------------
# discrete windows

def discrete_fredholm(kernel: KernelMatrix, tol: float = 1e-8) -> float:
    """``det(I - K)`` for a symmetric kernel with spectrum in ``[0, 1]`` (up to ``tol``)."""
    k = np.asarray(kernel.entries, dtype=float)
    if k.size == 0:
        return 1.0
    if not np.allclose(k, k.T, atol=1e-10, rtol=0):
        raise SpectrumError("kernel is not symmetric")
    ev = np.linalg.eigvalsh(0.5 * (k + k.T))
    if ev.min() < -tol or ev.max() > 1 + tol:
        raise SpectrumError(f"spectrum [{ev.min():.3g}, {ev.max():.3g}] outside [0, 1]")
    det = float(np.linalg.det(np.eye(len(k)) - k))
    return min(1.0, max(0.0, det))


def edge_window(params: CylindricPlancherelParams, m: int, tail_tol: float = 1e-12, max_len: int = 20000) -> Window:
    """Window ``[m, m_hi]`` whose neglected trace beyond ``m_hi`` is below ``tail_tol``."""
    step = max(8, int(params.L ** (1.0 / 3.0)), int(2.0 / params.r) if params.u > 0 else 0)
    hi = m
    while ftb_trace_tail(params, hi + 1) >= tail_tol:
        hi += step
        if hi - m > max_len:
            raise NonConvergent("edge window longer than max_len")
    return Window(m, hi)


def lambda1_cdf(params: CylindricPlancherelParams, m: int, tail_tol: float = 1e-12) -> float:
    """``P(lambda_1 + c - 1/2 < m - 1/2)``: no particle at stored sites ``>= m``."""
    win = edge_window(params, m, tail_tol)
    if len(win) == 0:
        return 1.0
    km = ftb_kernel_matrix(params, win.sites)
    return discrete_fredholm(km)
