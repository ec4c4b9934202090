"""Weights, partition functions and brute-force oracles for periodic Schur processes.

The oracles enumerate every sequence whose partitions have size at most
``cutoff`` by chaining transfer matrices indexed by partitions, so the
truncated sums are computed exactly (up to floating point).  Sites are
given in the stored-integer convention of :mod:`cylschur.partitions`
(``m`` stands for ``m - 1/2``).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, LimitExceeded, NonConvergent, ShapeError
from .partitions import (
    Partition,
    Specialization,
    StrictSpecialization,
    cauchy_pairing,
    contains,
    enumerate_partitions,
    skew_schur,
    skew_schur_matrix,
    skew_schur_p,
    skew_schur_q,
    skew_schur_q_matrix,
    strict_cauchy_pairing,
)
from .specfun import DEFAULT_ACCURACY, Accuracy, check_nome, log_pochhammer_qq

__all__ = [
    "PeriodicSchurParams",
    "CylindricPlancherelParams",
    "StrictPeriodicParams",
    "OracleResult",
    "TransferMatrix",
    "charge_law",
    "weight",
    "periodic_z",
    "cylindric_plancherel_weight",
    "cylindric_plancherel_z",
    "strict_weight",
    "strict_z",
    "moments",
    "oracle_correlation",
    "oracle_correlation_strict",
    "oracle_chain",
    "oracle_partition_law",
    "transfer_matrix",
    "plancherel_size_tail",
]

ORACLE_MAX_CUTOFF = 24
TRANSFER_MAX_CAP = 20


# ---------------------------------------------------------------------------
# parameter records

def _check_specs(specs, kind):
    specs = tuple((kind.from_json(p) if isinstance(p, dict) else p,
                   kind.from_json(m) if isinstance(m, dict) else m) for p, m in specs)
    if not specs:
        raise DomainError("need at least one slot (N >= 1)")
    for p, m in specs:
        if not isinstance(p, kind) or not isinstance(m, kind):
            raise DomainError(f"specializations must be {kind.__name__}")
        for r in (p, m):
            if r.alphas and r.alphas[0] >= 1.0:
                raise DomainError("every alpha must be < 1 for convergence")
    return specs


@dataclass(frozen=True)
class PeriodicSchurParams:
    """``u``, ``t`` and one ``(rho_plus, rho_minus)`` pair per slot."""

    u: float
    t: float
    specs: tuple

    def __post_init__(self):
        object.__setattr__(self, "u", check_nome(self.u))
        if not self.t > 0:
            raise DomainError("t must be positive")
        object.__setattr__(self, "specs", _check_specs(self.specs, Specialization))

    @property
    def n_slots(self) -> int:
        return len(self.specs)

    def to_json(self) -> dict:
        return {"u": self.u, "t": self.t,
                "specs": [[p.to_json(), m.to_json()] for p, m in self.specs]}


@dataclass(frozen=True)
class CylindricPlancherelParams:
    """N = 1 with exponential specializations ``ex_gamma`` on both sides."""

    u: float
    gamma: float
    t: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "u", check_nome(self.u))
        if not self.gamma > 0:
            raise DomainError("gamma must be positive")
        if not self.t > 0:
            raise DomainError("t must be positive")

    @property
    def L(self) -> float:
        return self.gamma / (1.0 - self.u)

    @property
    def r(self) -> float:
        return -math.log(self.u) if self.u > 0 else math.inf

    def to_periodic(self) -> PeriodicSchurParams:
        ex = Specialization(gamma=self.gamma)
        return PeriodicSchurParams(self.u, self.t, ((ex, ex),))

    def to_json(self) -> dict:
        return {"u": self.u, "gamma": self.gamma, "t": self.t, "L": self.L}


@dataclass(frozen=True)
class StrictPeriodicParams:
    u: float
    t: float
    specs: tuple

    def __post_init__(self):
        object.__setattr__(self, "u", check_nome(self.u))
        if not self.t >= 0:
            raise DomainError("t must be nonnegative")
        object.__setattr__(self, "specs", _check_specs(self.specs, StrictSpecialization))

    @property
    def n_slots(self) -> int:
        return len(self.specs)

    def to_json(self) -> dict:
        return {"u": self.u, "t": self.t,
                "specs": [[p.to_json(), m.to_json()] for p, m in self.specs]}


@dataclass(frozen=True)
class OracleResult:
    value: float
    truncation_bound: float
    cutoff: int
    params: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({"value": self.value, "truncation_bound": self.truncation_bound,
                           "cutoff": self.cutoff, "params": self.params})


# ---------------------------------------------------------------------------
# charge law

def charge_law(u: float, t: float, tail: float = 1e-14):
    """Support and probabilities of ``P(c) = t^c u^{c^2/2} / theta3(t; u)``.

    The support is cut where the neglected mass is below ``tail``.
    """
    u = check_nome(u)
    if not t > 0:
        raise DomainError("t must be positive")
    if u == 0.0:
        return np.array([0]), np.array([1.0])
    lu, lt = math.log(u), math.log(t)
    centre = lt / -lu
    width = math.sqrt(2.0 * (-math.log(tail) + 5.0) / -lu) + 3
    cs = np.arange(math.floor(centre - width), math.ceil(centre + width) + 1)
    logw = cs * lt + 0.5 * cs.astype(float) ** 2 * lu
    w = np.exp(logw - logw.max())
    keep = w > tail * 1e-3 * w.sum()
    cs, w = cs[keep], w[keep]
    return cs, w / w.sum()


# ---------------------------------------------------------------------------
# weights and partition functions

def _split_sequence(seq, n):
    seq = list(seq)
    if len(seq) not in (2 * n, 2 * n + 1):
        raise ShapeError(f"expected 2N = {2 * n} partitions (mu0, lam1, mu1, ..., lamN), got {len(seq)}")
    if len(seq) == 2 * n + 1 and tuple(seq[-1]) != tuple(seq[0]):
        raise ShapeError("periodic sequence must end with mu0")
    mus = [tuple(seq[2 * k]) for k in range(n)] + [tuple(seq[0])]
    lams = [tuple(seq[2 * k + 1]) for k in range(n)]
    return mus, lams


def weight(params: PeriodicSchurParams, seq: Sequence[Sequence[int]]) -> float:
    """``u^{|mu0|} prod_k s_{lam_k / mu_{k-1}}(rho_k^+) s_{lam_k / mu_k}(rho_k^-)``.

    ``seq`` is ``[mu0, lam1, mu1, ..., lamN]`` (optionally followed by ``mu0`` again).
    """
    mus, lams = _split_sequence(seq, params.n_slots)
    size0 = sum(mus[0])
    out = 1.0 if size0 == 0 else params.u ** size0
    for k, (rp, rm) in enumerate(params.specs):
        if out == 0.0:
            break
        out *= skew_schur(lams[k], mus[k], rp) * skew_schur(lams[k], mus[k + 1], rm)
    return out


def _log_product_over_n(factor, start: int, u: float, acc: Accuracy) -> float:
    # sum_{n >= start} ln factor(u^n) until the term is negligible
    total = 0.0
    for n in range(start, acc.max_terms):
        term = math.log(factor(u**n))
        total += term
        if abs(term) < acc.rel_tol * 1e-4 and n > start:
            return total
    raise NonConvergent("partition function product did not converge")


def periodic_z(params: PeriodicSchurParams, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Closed-form partition function.

    ``Z = prod_{n>=1} 1/(1-u^n) prod_{k<=l} H(u^{n-1} rho_k^+; rho_l^-) prod_{k>l} H(u^n rho_k^+; rho_l^-)``.
    """
    u = params.u
    logz = -log_pochhammer_qq(u, acc) if u > 0 else 0.0
    n = params.n_slots
    for k in range(n):
        for ell in range(n):
            rp, rm = params.specs[k][0], params.specs[ell][1]

            def f(s, rp=rp, rm=rm):
                return cauchy_pairing(rp.scaled(s), rm)

            logz += _log_product_over_n(f, 0 if k <= ell else 1, u, acc)
    return math.exp(logz)


def cylindric_plancherel_weight(params: CylindricPlancherelParams, lam, mu) -> float:
    """``u^{|mu|} s_{lam/mu}(ex_gamma)^2``."""
    lam, mu = Partition(lam), Partition(mu)
    if not contains(lam, mu):
        return 0.0
    s = skew_schur(lam, mu, Specialization(gamma=params.gamma))
    size = mu.size()
    return (1.0 if size == 0 else params.u**size) * s * s


def cylindric_plancherel_z(params: CylindricPlancherelParams, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """``e^{gamma^2/(1-u)} / (u;u)_inf``."""
    lp = log_pochhammer_qq(params.u, acc) if params.u > 0 else 0.0
    return math.exp(params.gamma**2 / (1.0 - params.u) - lp)


def strict_weight(params: StrictPeriodicParams, seq) -> float:
    """``u^{|mu0|} prod_k Q_{lam_k / mu_{k-1}}(rho_k^+) P_{lam_k / mu_k}(rho_k^-)``."""
    mus, lams = _split_sequence(seq, params.n_slots)
    size0 = sum(mus[0])
    out = 1.0 if size0 == 0 else params.u ** size0
    for k, (rp, rm) in enumerate(params.specs):
        if out == 0.0:
            break
        out *= skew_schur_q(lams[k], mus[k], rp) * skew_schur_p(lams[k], mus[k + 1], rm)
    return out


def strict_z(params: StrictPeriodicParams, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """``prod_{k<=l} Q(rho_k^+; rho_l^-) prod_{n>=1} Q(u^n rho^+; rho^-)(1+u^n)``."""
    u = params.u
    n = params.n_slots
    logz = 0.0
    for k in range(n):
        for ell in range(k, n):
            logz += math.log(strict_cauchy_pairing(params.specs[k][0], params.specs[ell][1]))
    if u > 0:
        plus = params.specs[0][0]
        minus = params.specs[0][1]
        for rp, rm in params.specs[1:]:
            plus, minus = plus.union(rp), minus.union(rm)

        def f(s):
            return strict_cauchy_pairing(plus.scaled(s), minus) * (1.0 + s)

        logz += _log_product_over_n(f, 1, u, acc)
    return math.exp(logz)


def moments(params: CylindricPlancherelParams, acc: Accuracy = DEFAULT_ACCURACY):
    """Mean and variance of ``|lam|`` under the cylindric Plancherel measure."""
    u, g = params.u, params.gamma
    s1 = s2 = 0.0
    if u > 0:
        for k in range(1, acc.max_terms):
            uk = u**k
            a = k * uk / (1.0 - uk)
            b = k * a / (1.0 - uk)
            s1 += a
            s2 += b
            if b < acc.rel_tol * 1e-4 * max(s2, 1e-300):
                break
        else:
            raise NonConvergent("moment series did not converge")
    mean = g * g / (1.0 - u) ** 2 + s1
    var = g * g * (1.0 + u) / (1.0 - u) ** 3 + s2
    return mean, var


# ---------------------------------------------------------------------------
# enumeration oracles

@lru_cache(maxsize=8)
def _parts(cutoff: int, strict: bool):
    return tuple(tuple(p) for p in enumerate_partitions(cutoff, strict))


def _occupancy(parts, m: int) -> np.ndarray:
    """``1[m in {lam_j - j + 1}, j >= 1]`` for every partition (stored sites, c = 0)."""
    out = np.zeros(len(parts))
    for a, p in enumerate(parts):
        ell = len(p)
        if m <= -ell:
            out[a] = 1.0
        elif any(p[j] - j == m for j in range(ell)):
            out[a] = 1.0
    return out


def _strict_occupancy(parts, k: int) -> np.ndarray:
    return np.array([1.0 if k in p else 0.0 for p in parts])


def _cycle_blocks(mats_plus, mats_minus, d0, slots):
    """Dense matrices between consecutive insertion slots of the cyclic product.

    The full cycle is ``D A_1 B_1^T A_2 B_2^T ... A_N B_N^T``; insertion at
    slot ``i`` sits right after ``A_i``.  Returns a list of matrices
    ``X_1..X_m`` such that the weighted trace with diagonal insertions
    ``v_1..v_m`` is ``tr(diag(v_1) X_1 diag(v_2) X_2 ... diag(v_m) X_m)``.
    """
    n = len(mats_plus)
    size = mats_plus[0].shape[0]
    # factor list starting right after A_{slots[0]}
    seq = []
    for k in range(n):
        seq.append(("A", k))
        seq.append(("B", k))
    first = slots[0]
    order = seq[2 * (first - 1) + 1:] + [("D", None)] + seq[: 2 * (first - 1) + 1]
    blocks = []
    cur = np.eye(size)
    targets = list(slots[1:])
    for kind, k in order:
        if kind == "A":
            cur = cur @ mats_plus[k]
            if targets and targets[0] == k + 1:
                blocks.append(cur)
                cur = np.eye(size)
                targets.pop(0)
        elif kind == "B":
            cur = cur @ mats_minus[k].T
        else:
            cur = cur * d0[None, :]
    blocks.append(cur)
    return blocks


def _weighted_trace(blocks, vecs) -> float:
    if len(blocks) == 1:
        return float(np.dot(vecs[0], np.diagonal(blocks[0])))
    if len(blocks) == 2:
        x, y = blocks
        return float(vecs[0] @ (x * y.T) @ vecs[1])
    acc = np.eye(blocks[0].shape[0])
    for v, x in zip(vecs, blocks):
        acc = (acc * v[None, :]) @ x
    return float(np.trace(acc))


class _Chain:
    """Transfer-matrix chain of a (strict) periodic process on a truncated state space."""

    def __init__(self, params, cutoff: int, strict: bool):
        if cutoff > ORACLE_MAX_CUTOFF:
            raise LimitExceeded(f"cutoff {cutoff} exceeds {ORACLE_MAX_CUTOFF}")
        self.parts = _parts(cutoff, strict)
        self.strict = strict
        if strict:
            self.plus = [skew_schur_q_matrix(self.parts, p, "Q") for p, _ in params.specs]
            self.minus = [skew_schur_q_matrix(self.parts, m, "P") for _, m in params.specs]
        else:
            self.plus = [skew_schur_matrix(self.parts, p) for p, _ in params.specs]
            self.minus = [skew_schur_matrix(self.parts, m) for _, m in params.specs]
        sizes = np.array([sum(p) for p in self.parts], dtype=float)
        self.d0 = np.where(sizes == 0, 1.0, params.u ** sizes)
        self._blocks = {}
        self._pairs = {}
        self._occ = {}

    def occupancy(self, k: int) -> np.ndarray:
        if k not in self._occ:
            occ = _strict_occupancy if self.strict else _occupancy
            self._occ[k] = occ(self.parts, k)
        return self._occ[k]

    def weighted_trace(self, slots, vecs) -> float:
        """``_weighted_trace`` with the two-block Hadamard product cached."""
        slots = tuple(slots)
        blocks = self.blocks(slots)
        if len(blocks) != 2:
            return _weighted_trace(blocks, vecs)
        if slots not in self._pairs:
            x, y = blocks
            self._pairs[slots] = x * y.T
        return float(vecs[0] @ self._pairs[slots] @ vecs[1])

    def blocks(self, slots):
        slots = tuple(slots)
        if slots not in self._blocks:
            self._blocks[slots] = _cycle_blocks(self.plus, self.minus, self.d0, slots)
        return self._blocks[slots]

    def z(self) -> float:
        return _weighted_trace(self.blocks((1,)), [np.ones(len(self.parts))])


def oracle_chain(params, cutoff: int = 20):
    """Reusable enumeration state for repeated oracle queries on the same ``params``."""
    return _Chain(params, cutoff, strict=isinstance(params, StrictPeriodicParams))


def _group_by_slot(points, n_slots):
    by = {}
    for i, k in points:
        i, k = int(i), int(k)
        if not 1 <= i <= n_slots:
            raise DomainError(f"slot {i} outside 1..{n_slots}")
        by.setdefault(i, []).append(k)
    return dict(sorted(by.items()))


def oracle_correlation(params: PeriodicSchurParams, U: Iterable, shift_mixed: bool = True,
                       cutoff: int = 20, chain: _Chain | None = None) -> OracleResult:
    """Correlation ``P(U subset of S)`` by exhaustive enumeration.

    ``U`` is a collection of ``(slot, m)`` with the stored site ``m``
    (half-integer ``m - 1/2``).  With ``shift_mixed`` the configuration is
    shifted by an independent charge ``c``.  The truncation bound is
    ``(Z - Z_trunc) / Z`` plus the neglected charge mass; it bounds the
    error of the returned value.
    """
    U = list(U)
    chain = chain or _Chain(params, cutoff, strict=False)
    z_trunc = chain.z()
    z_full = periodic_z(params)
    bound = max(z_full - z_trunc, 0.0) / z_full
    if not U:
        value = 1.0
    else:
        by = _group_by_slot(U, params.n_slots)
        if shift_mixed:
            cs, pc = charge_law(params.u, params.t)
            bound += 1e-14
        else:
            cs, pc = np.array([0]), np.array([1.0])
        value = 0.0
        for c, p in zip(cs, pc):
            vecs = []
            for ks in by.values():
                v = np.ones(len(chain.parts))
                for k in ks:
                    v = v * chain.occupancy(k - int(c))
                vecs.append(v)
            value += p * chain.weighted_trace(tuple(by), vecs)
        value /= z_trunc
    return OracleResult(value, bound, cutoff,
                        {"process": "periodic", "shift_mixed": shift_mixed, **params.to_json()})


def oracle_correlation_strict(params: StrictPeriodicParams, U: Iterable, c_parity: int | None = None,
                              cutoff: int = 20, chain: _Chain | None = None) -> OracleResult:
    """``P(c = c_parity and U subset of S)`` for the shift-mixed strict process.

    ``U`` holds ``(slot, k)`` with positive integer ``k``.  The charge is
    Bernoulli(``t/(1+t)``) and independent of the partitions; with
    ``c_parity=None`` the charge is marginalized out.
    """
    U = list(U)
    chain = chain or _Chain(params, cutoff, strict=True)
    z_trunc = chain.z()
    z_full = strict_z(params)
    bound = max(z_full - z_trunc, 0.0) / z_full
    if c_parity is None:
        pc = 1.0
    elif c_parity in (0, 1):
        pc = (params.t if c_parity else 1.0) / (1.0 + params.t)
    else:
        raise DomainError("c_parity must be 0, 1 or None")
    if not U:
        value = 1.0
    else:
        by = _group_by_slot(U, params.n_slots)
        for ks in by.values():
            if any(k < 1 for k in ks):
                raise DomainError("strict sites are positive integers")
        vecs = []
        for ks in by.values():
            v = np.ones(len(chain.parts))
            for k in ks:
                v = v * chain.occupancy(k)
            vecs.append(v)
        value = chain.weighted_trace(tuple(by), vecs) / z_trunc
    return OracleResult(pc * value, pc * bound, cutoff,
                        {"process": "strict", "c_parity": c_parity, **params.to_json()})


def oracle_partition_law(params: PeriodicSchurParams, slot: int = 1, cutoff: int = 20):
    """Marginal law of ``lam^(slot)`` on partitions of size ``<= cutoff``.

    Returns ``(parts, probabilities, truncation_bound)``; probabilities are
    normalized by the closed-form partition function, so they sum to
    ``1 - truncation_bound``.
    """
    chain = _Chain(params, cutoff, strict=False)
    x = chain.blocks((slot,))[0]
    z_full = periodic_z(params)
    probs = np.diagonal(x) / z_full
    return chain.parts, probs, max(1.0 - probs.sum(), 0.0)


# ---------------------------------------------------------------------------
# transfer matrix of the stationary process

@dataclass(frozen=True)
class TransferMatrix:
    parts: tuple
    matrix: np.ndarray

    def index(self, lam) -> int:
        return self.parts.index(tuple(lam))


def transfer_matrix(theta: float, beta: float, size_cap: int) -> TransferMatrix:
    """``T(beta)`` on partitions of size ``<= size_cap``, in enumeration order.

    ``T = e^{theta^2 (e^{-beta} - 1)} A^T diag(e^{-beta |mu|}) A`` with
    ``A[mu, lam] = s_{lam/mu}(ex_g)`` and ``g = theta (1 - e^{-beta})``.
    """
    if size_cap > TRANSFER_MAX_CAP:
        raise LimitExceeded(f"size_cap {size_cap} exceeds {TRANSFER_MAX_CAP}")
    if theta < 0 or beta < 0:
        raise DomainError("theta and beta must be nonnegative")
    parts = _parts(size_cap, False)
    g = theta * (1.0 - math.exp(-beta))
    a = skew_schur_matrix(parts, Specialization(gamma=g)).toarray()
    sizes = np.array([sum(p) for p in parts], dtype=float)
    d = np.exp(-beta * sizes)
    mat = math.exp(theta**2 * (math.exp(-beta) - 1.0)) * (a.T * d[None, :]) @ a
    return TransferMatrix(parts, mat)


def plancherel_size_tail(u: float, gamma: float, cap: int) -> float:
    """Chernoff bound on ``P(|lam| > cap)`` under the cylindric Plancherel measure.

    Uses ``E x^{|lam|} = Z_{ux, gamma sqrt(x)} / Z_{u, gamma}`` for
    ``1 < x < 1/u``, minimized over a grid of ``x``.
    """
    u = check_nome(u)

    def log_z(uu, gg):
        return gg * gg / (1.0 - uu) - (log_pochhammer_qq(uu) if uu > 0 else 0.0)

    base = log_z(u, gamma)
    # keep u x away from 1 so the Pochhammer product stays cheap
    xmax = 0.99 / u if u > 0 else 1e6
    best = 0.0
    for x in np.geomspace(1.0 + 1e-6, max(xmax, 1.0 + 2e-6), 400):
        val = log_z(u * x, gamma * math.sqrt(x)) - base - (cap + 1) * math.log(x)
        best = min(best, val)
    return math.exp(best)
