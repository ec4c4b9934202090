"""Pfaffian correlation kernel of the shift-mixed periodic strict Schur process.

Sites are positive integers (parts of strict partitions).  The kernel is
built from the neutral propagator

    kappa_s(z, w) = (u;u)^2 / (-u;u)^2 * theta_u(w/z) / theta_u(-w/z),

which is the two-point function normalized by the full trace.  With this
normalization ``pf K = P(U subset of S)`` once the parity ``c`` is summed
out, and does not depend on ``t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, LimitExceeded, NonConvergent
from .kernels import KernelMatrix, _auto_contour, _converged_block, _log_scale, ContourSpec
from .linalg import pfaffian
from .measures import StrictPeriodicParams
from .specfun import DEFAULT_ACCURACY, Accuracy, check_nome, pochhammer_inf, theta_mult

__all__ = [
    "StrictKernelEntrySpec",
    "kappa_s",
    "f_factor_s",
    "log_f_factor_s",
    "strict_kernel_matrix",
    "strict_correlation",
    "strict_npoint_product",
    "schur_pfaffian_check",
]


def _norm_const(u: float, acc: Accuracy) -> float:
    if u == 0.0:
        return 1.0
    qq = pochhammer_inf(u, u, acc).real
    mq = pochhammer_inf(-u, u, acc).real
    return (qq / mq) ** 2


def _ratio(x, u: float, acc: Accuracy):
    """``theta_u(x) / theta_u(-x)``; odd under ``x -> 1/x``."""
    x = np.asarray(x, dtype=complex)
    if u == 0.0:
        return (1.0 - x) / (1.0 + x)
    return theta_mult(x, u, acc) / theta_mult(-x, u, acc)


def kappa_s(z, w, u: float, t: float = 1.0, acc: Accuracy = DEFAULT_ACCURACY, check: bool = True):
    """Neutral propagator on ``u^{1/2} < |w| < |z| < u^{-1/2}`` (trace-normalized).

    ``t`` only enters the unnormalized trace through the factor ``1 + t``,
    which cancels; it is accepted for symmetry with :func:`kernels.kappa`.
    """
    u = check_nome(u)
    if t < 0:
        raise DomainError("t must be nonnegative")
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if check:
        az, aw = np.abs(z), np.abs(w)
        lo = math.sqrt(u)
        hi = math.inf if u == 0 else 1.0 / lo
        if np.any(~((lo < aw) & (aw < az) & (az < hi))):
            raise DomainError("kappa_s needs u^{1/2} < |w| < |z| < u^{-1/2}")
    out = _norm_const(u, acc) * _ratio(w / z, u, acc)
    return out[()] if out.ndim == 0 else out


def _log_q_scaled_sum(rho, z, u: float, start: int):
    """``sum_{n >= start} ln Q(u^n rho; z)``."""
    z = np.asarray(z, dtype=complex)
    out = rho.log_q(z) if start == 0 else np.zeros_like(z)
    if u == 0.0:
        return out
    if rho.gamma:
        out = out + rho.gamma * z * u / (1.0 - u)
    zmax = float(np.max(np.abs(z))) if z.size else 0.0
    for a in rho.alphas:
        if a == 0:
            continue
        n = 1
        while True:
            c = a * u**n
            out = out + np.log1p(c * z) - np.log1p(-c * z)
            if c * zmax < 1e-18:
                break
            n += 1
            if n > 10**6:
                raise NonConvergent("F^s product did not converge")
    return out


def log_f_factor_s(i: int, z, params: StrictPeriodicParams):
    """``ln F^s(i, z)``."""
    n = params.n_slots
    if not 1 <= i <= n:
        raise DomainError(f"slot {i} outside 1..{n}")
    z = np.asarray(z, dtype=complex)
    out = np.zeros_like(z)
    for ell, (rp, rm) in enumerate(params.specs, start=1):
        out = out + _log_q_scaled_sum(rp, z, params.u, 0 if ell <= i else 1)
        out = out - _log_q_scaled_sum(rm, 1.0 / z, params.u, 0 if ell >= i else 1)
    return out


def _radius(params) -> float:
    rad = math.inf
    for p, m in params.specs:
        rad = min(rad, p.radius, m.radius)
    return rad


def f_factor_s(i: int, z, params: StrictPeriodicParams, acc: Accuracy = DEFAULT_ACCURACY):
    """``F^s(i, z)`` on ``1/R < |z| < R``."""
    z = np.asarray(z, dtype=complex)
    rad = _radius(params)
    if np.any((np.abs(z) >= rad) | (np.abs(z) <= 1.0 / rad)):
        raise DomainError("z outside the analyticity annulus of the specializations")
    out = np.exp(log_f_factor_s(i, z, params))
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class StrictKernelEntrySpec:
    """Position of an entry in the ``2n x 2n`` matrix and its fermion pair type."""

    gamma_idx: int
    delta_idx: int
    n: int

    def __post_init__(self):
        if not 1 <= self.gamma_idx < self.delta_idx <= 2 * self.n:
            raise DomainError("need 1 <= gamma < delta <= 2n")

    @property
    def block(self) -> str:
        if self.delta_idx <= self.n:
            return "phi-phi"
        if self.gamma_idx <= self.n:
            return "phi-phistar"
        return "phistar-phistar"


def _operator(idx: int, pts, n: int):
    """``(slot, exponent, sign, position)`` of matrix index ``idx`` (1-based).

    Indices ``1..n`` are ``phi_{k_idx}``; index ``idx > n`` is
    ``phi*_{k_{2n+1-idx}}``, extracted as ``(-1)^k [z^{-k}]``.  ``position``
    is the place of the operator in the trace, which fixes the radial order.
    """
    if idx <= n:
        slot, k = pts[idx - 1]
        return slot, k, 1.0, 2 * idx - 2
    j = 2 * n + 1 - idx
    slot, k = pts[j - 1]
    return slot, -k, (-1.0) ** k, 2 * j - 1


def _check_points(U) -> list:
    pts = [(int(i), int(k)) for i, k in U]
    if any(k < 1 for _, k in pts):
        raise DomainError("strict sites are positive integers")
    if len(set(pts)) != len(pts):
        raise DomainError("points must be distinct")
    return sorted(pts)


def strict_kernel_matrix(params: StrictPeriodicParams, U: Sequence, contour: ContourSpec | None = None,
                         acc: Accuracy = DEFAULT_ACCURACY) -> KernelMatrix:
    """Antisymmetric ``2n x 2n`` kernel whose pfaffian is ``P(U subset of S)``.

    Entry ``(gamma, delta)`` is ``1/2`` times a coefficient of
    ``F^s(i, z) F^s(i', w) kappa_s(z, w)``; ``z`` runs on the outer circle
    when its operator precedes the other one in the trace.
    """
    pts = _check_points(U)
    n = len(pts)
    big_r = _radius(params)
    u = params.u
    const = _norm_const(u, acc)
    mat = np.zeros((2 * n, 2 * n))
    ops = [_operator(idx, pts, n) for idx in range(1, 2 * n + 1)]
    logs = {i: (lambda z, i=i: log_f_factor_s(i, z, params)) for i in {p[0] for p in pts}}
    scales = {i: _log_scale(f) for i, f in logs.items()}

    def gfun(x):
        # kappa_s as a function of x = z/w
        return const * _ratio(1.0 / x, u, acc)

    for g in range(2 * n):
        for d in range(g + 1, 2 * n):
            sg, eg, cg, pg = ops[g]
            sd, ed, cd, pd = ops[d]
            if contour is None:
                scale = scales[sg] + scales[sd] + abs(eg) + abs(ed)
                cs = _auto_contour(u, pg < pd, scale, big_r)
            else:
                cs = contour if pg < pd else ContourSpec(contour.radius_w, contour.radius_z, contour.nodes)
            ratio = cs.radius_z / cs.radius_w
            if u > 0 and not (u < ratio < 1 / u):
                raise DomainError("contour ratio outside (u, 1/u)")
            vals, _ = _converged_block(logs[sg], logs[sd], gfun, cs, [eg], [-ed], acc)
            mat[g, d] = 0.5 * cg * cd * vals[0, 0]
            mat[d, g] = -mat[g, d]
    labels = [(o[0], o[1]) for o in ops]
    return KernelMatrix(labels, labels, mat, {"model": "strict", "site_kind": "integer",
                                                 "params": params.to_json()})


def strict_correlation(params: StrictPeriodicParams, U: Sequence, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """``pf K``; the empty set gives 1."""
    if not list(U):
        return 1.0
    return float(pfaffian(strict_kernel_matrix(params, U, acc=acc).entries))


def strict_npoint_product(params: StrictPeriodicParams, U: Sequence, acc: Accuracy = DEFAULT_ACCURACY,
                          max_points: int = 1 << 28) -> float:
    """n-point correlation from the product form of the neutral correlator.

    With ``x_1, ..., x_{2n} = z_1, w_1, ..., z_n, w_n`` on circles of
    decreasing radius, ``<phi(x_1) ... phi(x_{2n})> = c^n prod_{p<q} R(x_q/x_p)``
    where ``R(x) = theta_u(x)/theta_u(-x)`` and ``c = (u;u)^2/(-u;u)^2``; the
    correlation is ``2^{-n} [prod z^k (-1)^k w^{-k}] prod F^s F^s`` of it.
    """
    pts = _check_points(U)
    n = len(pts)
    if n == 0:
        return 1.0
    if n > 3:
        raise LimitExceeded("strict_npoint_product supports at most 3 points")
    u = params.u
    nv = 2 * n
    r = -math.log(u) if u > 0 else math.inf
    big_r = _radius(params)
    delta = min(r / nv, 0.5)
    if math.isfinite(big_r):
        delta = min(delta, 1.8 * math.log(big_r) / (nv - 1))
    logr = np.array([(nv - 1) / 2 * delta - p * delta for p in range(nv)])
    const = _norm_const(u, acc)

    def evaluate(nodes):
        om = np.exp(2j * np.pi * np.arange(nodes) / nodes)
        tabs = []
        for p in range(nv):
            slot, k = pts[p // 2]
            v = np.exp(logr[p]) * om
            lf = log_f_factor_s(slot, v, params)
            e = -k if p % 2 == 0 else k  # [z^k] -> z^{-k}, [w^{-k}] -> w^{k}
            tabs.append(np.exp(lf + e * np.log(v)))
        pair = {(p, q): _ratio(np.exp(logr[q] - logr[p]) * om, u, acc)
                for p in range(nv) for q in range(p + 1, nv)}
        lead = 1
        while nodes ** (nv - lead) > (1 << 20) and lead < nv - 1:
            lead += 1
        rest = nv - lead
        grid = np.indices((nodes,) * rest).reshape(rest, -1)
        total = 0.0 + 0.0j
        for head in np.ndindex(*((nodes,) * lead)):
            idx = np.concatenate([np.repeat(np.array(head)[:, None], grid.shape[1], axis=1), grid])
            val = np.ones(grid.shape[1], dtype=complex)
            for p in range(nv):
                val *= tabs[p][idx[p]]
            for (p, q), tab in pair.items():
                val *= tab[(idx[q] - idx[p]) % nodes]
            total += val.sum()
        sign = (-1.0) ** sum(k for _, k in pts)
        return (sign * (const / 2) ** n * total / nodes**nv).real

    nodes = 8
    while nodes * delta < 5:
        nodes *= 2
    prev = evaluate(nodes)
    while True:
        nodes *= 2
        if nodes**nv > max_points:
            raise NonConvergent("strict n-point integral exceeds the point budget")
        cur = evaluate(nodes)
        diff = abs(cur - prev) / max(1.0, abs(cur))
        if min(diff, diff * diff) <= max(acc.rel_tol, 1e-10):
            return float(cur)
        prev = cur


def schur_pfaffian_check(x: Sequence[float], u: float, acc: Accuracy = DEFAULT_ACCURACY):
    """Both sides of ``pf R(x_i/x_j) = prod_{i<j} R(x_i/x_j)`` with ``R = theta_u(.)/theta_u(-.)``."""
    u = check_nome(u)
    x = np.asarray(x, dtype=float)
    m = len(x)
    if m % 2 or m == 0:
        raise DomainError("need an even, nonzero number of points")
    if np.any(x <= 0) or len(set(x.tolist())) != m:
        raise DomainError("points must be distinct positive reals")
    ratios = x[:, None] / x[None, :]
    if u > 0:
        off = ratios[~np.eye(m, dtype=bool)]
        # the identity is meromorphic; this keeps every entry on its principal annulus
        if np.any((off <= u) | (off >= 1 / u)):
            raise DomainError("ratios must lie in (u, 1/u)")
    a = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            a[i, j] = _ratio(ratios[i, j], u, acc).real
            a[j, i] = -a[i, j]
    prod = float(np.prod(a[np.triu_indices(m, 1)]))
    return float(pfaffian(a)), prod
