"""Partitions, Maya diagrams, specializations and (skew) Schur / Schur Q functions.

Half-integer convention: a half-integer ``k`` is stored as the integer
``m = k + 1/2``.  So site ``1/2`` is stored as ``1`` and ``-1/2`` as ``0``.
The same convention is used by the kernels and samplers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy import sparse

from .errors import DomainError, LimitExceeded
from .linalg import pfaffian

__all__ = [
    "Partition",
    "StrictPartition",
    "MayaDiagram",
    "Specialization",
    "StrictSpecialization",
    "cauchy_pairing",
    "strict_cauchy_pairing",
    "charge",
    "energy",
    "maya_from_charged",
    "charged_from_maya",
    "h_coeffs",
    "skew_schur",
    "q_coeffs",
    "skew_schur_q",
    "skew_schur_p",
    "enumerate_partitions",
    "contains",
    "interlaces",
    "skew_schur_matrix",
    "skew_schur_q_matrix",
]

MAX_ENUM_SIZE = 40


class Partition(tuple):
    """Nonincreasing tuple of positive integers (trailing zeros are dropped)."""

    def __new__(cls, parts: Sequence[int] = ()):
        parts = tuple(int(p) for p in parts)
        while parts and parts[-1] == 0:
            parts = parts[:-1]
        if any(p <= 0 for p in parts):
            raise DomainError(f"parts must be positive: {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise DomainError(f"parts must be nonincreasing: {parts}")
        return super().__new__(cls, parts)

    def size(self) -> int:
        return sum(self)

    def length(self) -> int:
        return len(self)

    def part(self, j: int) -> int:
        """``lambda_j`` with 1-based ``j``; zero beyond the length."""
        return self[j - 1] if j <= len(self) else 0

    def conjugate(self) -> "Partition":
        if not self:
            return Partition()
        return Partition([sum(1 for p in self if p > i) for i in range(self[0])])

    def __repr__(self):
        return f"{type(self).__name__}({list(self)})"


class StrictPartition(Partition):
    """Strictly decreasing tuple of positive integers."""

    def __new__(cls, parts: Sequence[int] = ()):
        obj = super().__new__(cls, parts)
        if any(obj[i] == obj[i + 1] for i in range(len(obj) - 1)):
            raise DomainError(f"parts must be distinct: {tuple(obj)}")
        return obj


def contains(lam: Sequence[int], mu: Sequence[int]) -> bool:
    """``mu`` is a subdiagram of ``lam``."""
    if len(mu) > len(lam):
        return False
    return all(lam[i] >= mu[i] for i in range(len(mu)))


def interlaces(lam: Sequence[int], mu: Sequence[int]) -> bool:
    """``lam_1 >= mu_1 >= lam_2 >= mu_2 >= ...`` (``lam/mu`` a horizontal strip)."""
    if len(mu) > len(lam) or len(lam) > len(mu) + 1:
        return False
    for i in range(len(lam)):
        m = mu[i] if i < len(mu) else 0
        if m > lam[i]:
            return False
        if i + 1 < len(lam) and lam[i + 1] > m:
            return False
    return True


# ---------------------------------------------------------------------------
# Maya diagrams

@dataclass(frozen=True)
class MayaDiagram:
    """Finite deviation from the vacuum: particles at positive sites, holes at negative ones.

    Sites are stored with the integer convention of this module, so a
    particle at ``7/2`` is stored as ``4`` and a hole at ``-1/2`` as ``0``.
    """

    particles: frozenset = field(default_factory=frozenset)
    holes: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "particles", frozenset(int(m) for m in self.particles))
        object.__setattr__(self, "holes", frozenset(int(m) for m in self.holes))
        if any(m < 1 for m in self.particles):
            raise DomainError("particles must sit at positive sites (stored m >= 1)")
        if any(m > 0 for m in self.holes):
            raise DomainError("holes must sit at negative sites (stored m <= 0)")

    @classmethod
    def from_occupied(cls, occupied: Sequence[int], lo: int, hi: int) -> "MayaDiagram":
        """Build from the occupied stored sites inside ``[lo, hi]``; vacuum outside."""
        occ = set(int(m) for m in occupied)
        parts = {m for m in occ if m >= 1}
        holes = {m for m in range(lo, 1) if m not in occ}
        if any(m > hi or m < lo for m in occ):
            raise DomainError("occupied sites outside the stated range")
        return cls(frozenset(parts), frozenset(holes))

    def occupied(self, m: int) -> bool:
        if m >= 1:
            return m in self.particles
        return m not in self.holes

    def occupied_sites(self, lo: int, hi: int) -> list[int]:
        return [m for m in range(lo, hi + 1) if self.occupied(m)]

    def charge(self) -> int:
        return len(self.particles) - len(self.holes)

    def energy(self) -> float:
        return sum(m - 0.5 for m in self.particles) + sum(0.5 - m for m in self.holes)

    def is_vacuum(self) -> bool:
        return not self.particles and not self.holes


def charge(m: MayaDiagram) -> int:
    return m.charge()


def energy(m: MayaDiagram) -> float:
    return m.energy()


def maya_from_charged(lam: Sequence[int], c: int) -> MayaDiagram:
    """Maya diagram with particles at ``lam_j - j + 1/2 + c``, ``j >= 1``."""
    lam = Partition(lam)
    c = int(c)
    ell = len(lam)
    # stored sites m = lam_j - j + 1 + c; for j > ell every m <= c - ell is filled
    occ = {lam[j - 1] - j + 1 + c for j in range(1, ell + 1)}
    occ.update(range(1, c - ell + 1))
    particles = {m for m in occ if m >= 1}
    holes = {m for m in range(min(c - ell, 0) + 1, 1) if m not in occ}
    return MayaDiagram(frozenset(particles), frozenset(holes))


def charged_from_maya(md: MayaDiagram) -> tuple[Partition, int]:
    """Inverse of :func:`maya_from_charged`."""
    c = md.charge()
    top = max(md.particles) if md.particles else 0
    bottom = min(md.holes) - 1 if md.holes else 0
    bottom = min(bottom, c - 1)
    occ = [m for m in range(top, bottom - 1, -1) if md.occupied(m)]
    parts = []
    for j, m in enumerate(occ, start=1):
        p = m + j - 1 - c
        if p <= 0:
            break
        parts.append(p)
    return Partition(parts), c


# ---------------------------------------------------------------------------
# Specializations

def _sorted_params(xs) -> tuple:
    xs = tuple(sorted((float(x) for x in xs), reverse=True))
    if any(x < 0 for x in xs):
        raise DomainError("Thoma parameters must be nonnegative")
    return xs


def _check_keys(d: dict, allowed: set):
    # a misspelt key would otherwise silently give the trivial specialization
    extra = set(d) - allowed
    if extra:
        raise DomainError(f"unknown specialization keys {sorted(extra)}; expected {sorted(allowed)}")


@dataclass(frozen=True)
class Specialization:
    """Thoma parameters of ``H(rho; z) = e^{gamma z} prod (1 + beta z) / (1 - alpha z)``."""

    gamma: float = 0.0
    alphas: tuple = ()
    betas: tuple = ()

    def __post_init__(self):
        if self.gamma < 0:
            raise DomainError("gamma must be nonnegative")
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "alphas", _sorted_params(self.alphas))
        object.__setattr__(self, "betas", _sorted_params(self.betas))

    @classmethod
    def exponential(cls, gamma: float) -> "Specialization":
        return cls(gamma=gamma)

    @classmethod
    def single(cls, q: float) -> "Specialization":
        return cls(alphas=(q,))

    @classmethod
    def from_json(cls, d: dict) -> "Specialization":
        _check_keys(d, {"gamma", "alphas", "betas"})
        return cls(d.get("gamma", 0.0), tuple(d.get("alphas", ())), tuple(d.get("betas", ())))

    def to_json(self) -> dict:
        return {"gamma": self.gamma, "alphas": list(self.alphas), "betas": list(self.betas)}

    @property
    def radius(self) -> float:
        """Radius of analyticity of ``z -> H(rho; z)``."""
        a = self.alphas[0] if self.alphas else 0.0
        return math.inf if a == 0 else 1.0 / a

    def is_trivial(self) -> bool:
        return self.gamma == 0 and not any(self.alphas) and not any(self.betas)

    def scaled(self, c: float) -> "Specialization":
        """The specialization ``c rho`` (all parameters times ``c``)."""
        return Specialization(self.gamma * c, tuple(a * c for a in self.alphas),
                              tuple(b * c for b in self.betas))

    def union(self, other: "Specialization") -> "Specialization":
        return Specialization(self.gamma + other.gamma, self.alphas + other.alphas,
                              self.betas + other.betas)

    def log_h(self, z):
        """``ln H(rho; z)`` in product form (principal logs of each factor)."""
        z = np.asarray(z, dtype=complex)
        out = self.gamma * z
        for b in self.betas:
            out = out + np.log1p(b * z)
        for a in self.alphas:
            out = out - np.log1p(-a * z)
        return out

    def h(self, z):
        return np.exp(self.log_h(z))


@dataclass(frozen=True)
class StrictSpecialization:
    """Parameters of ``Q(rho; z) = e^{gamma z} prod (1 + alpha z) / (1 - alpha z)``."""

    gamma: float = 0.0
    alphas: tuple = ()

    def __post_init__(self):
        if self.gamma < 0:
            raise DomainError("gamma must be nonnegative")
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "alphas", _sorted_params(self.alphas))

    @classmethod
    def single(cls, a: float) -> "StrictSpecialization":
        return cls(alphas=(a,))

    @classmethod
    def from_json(cls, d: dict) -> "StrictSpecialization":
        _check_keys(d, {"gamma", "alphas"})
        return cls(d.get("gamma", 0.0), tuple(d.get("alphas", ())))

    def to_json(self) -> dict:
        return {"gamma": self.gamma, "alphas": list(self.alphas)}

    @property
    def radius(self) -> float:
        a = self.alphas[0] if self.alphas else 0.0
        return math.inf if a == 0 else 1.0 / a

    def is_trivial(self) -> bool:
        return self.gamma == 0 and not any(self.alphas)

    def scaled(self, c: float) -> "StrictSpecialization":
        return StrictSpecialization(self.gamma * c, tuple(a * c for a in self.alphas))

    def union(self, other: "StrictSpecialization") -> "StrictSpecialization":
        return StrictSpecialization(self.gamma + other.gamma, self.alphas + other.alphas)

    def log_q(self, z):
        z = np.asarray(z, dtype=complex)
        out = self.gamma * z
        for a in self.alphas:
            out = out + np.log1p(a * z) - np.log1p(-a * z)
        return out

    def q(self, z):
        return np.exp(self.log_q(z))


def cauchy_pairing(rho: Specialization, rho2: Specialization) -> float:
    """``H(rho; rho') = sum_lambda s_lambda(rho) s_lambda(rho')`` in closed form."""
    out = math.exp(rho.gamma * rho2.gamma)
    g1, g2 = rho.gamma, rho2.gamma
    out *= math.exp(g1 * (sum(rho2.alphas) + sum(rho2.betas)) + g2 * (sum(rho.alphas) + sum(rho.betas)))
    for a in rho.alphas:
        for a2 in rho2.alphas:
            out /= 1.0 - a * a2
        for b2 in rho2.betas:
            out *= 1.0 + a * b2
    for b in rho.betas:
        for b2 in rho2.betas:
            out /= 1.0 - b * b2
        for a2 in rho2.alphas:
            out *= 1.0 + b * a2
    return out


def strict_cauchy_pairing(rho: StrictSpecialization, rho2: StrictSpecialization) -> float:
    """``Q(rho; rho') = sum_lambda Q_lambda(rho) P_lambda(rho')`` in closed form."""
    g1, g2 = rho.gamma, rho2.gamma
    out = math.exp(0.5 * g1 * g2 + g1 * sum(rho2.alphas) + g2 * sum(rho.alphas))
    for a in rho.alphas:
        for a2 in rho2.alphas:
            out *= (1.0 + a * a2) / (1.0 - a * a2)
    return out


# ---------------------------------------------------------------------------
# coefficient sequences

def _exp_series(gamma: float, n_max: int) -> np.ndarray:
    out = np.empty(n_max + 1)
    out[0] = 1.0
    for n in range(1, n_max + 1):
        out[n] = out[n - 1] * gamma / n
    return out


def _mul_trunc(a: np.ndarray, b: np.ndarray, n_max: int) -> np.ndarray:
    return np.convolve(a, b)[: n_max + 1]


def h_coeffs(rho: Specialization, n_max: int) -> np.ndarray:
    """Coefficients ``h_0 .. h_{n_max}`` of ``H(rho; z)``."""
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    out = _exp_series(rho.gamma, n_max)
    idx = np.arange(n_max + 1)
    for a in rho.alphas:
        out = _mul_trunc(out, a**idx, n_max)
    for b in rho.betas:
        out = _mul_trunc(out, np.array([1.0, b]), n_max)
    return np.pad(out, (0, n_max + 1 - len(out)))


def q_coeffs(rho: StrictSpecialization, n_max: int) -> np.ndarray:
    """Coefficients ``q_0 .. q_{n_max}`` of ``Q(rho; z)``."""
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    out = _exp_series(rho.gamma, n_max)
    idx = np.arange(n_max + 1)
    for a in rho.alphas:
        series = 2.0 * a**idx
        series[0] = 1.0
        out = _mul_trunc(out, series, n_max)
    return out


# ---------------------------------------------------------------------------
# skew Schur functions

def _jt_matrix(lam: Sequence[int], mu: Sequence[int], h: np.ndarray) -> np.ndarray:
    ell = len(lam)
    i = np.arange(1, ell + 1)
    lam_a = np.asarray(lam, dtype=int)
    mu_a = np.zeros(ell, dtype=int)
    mu_a[: len(mu)] = mu
    idx = (lam_a - i)[:, None] - (mu_a - i)[None, :]
    if idx.max() >= len(h):
        raise ValueError("h coefficient table too short")
    return np.where(idx >= 0, h[np.clip(idx, 0, None)], 0.0)


def skew_schur(lam: Sequence[int], mu: Sequence[int], rho: Specialization) -> float:
    """``s_{lam/mu}(rho)`` from the Jacobi-Trudi determinant ``det h_{lam_i - i - mu_j + j}``."""
    lam, mu = Partition(lam), Partition(mu)
    if not contains(lam, mu):
        return 0.0
    if not lam:
        return 1.0
    h = h_coeffs(rho, lam[0] + len(lam))
    return float(np.linalg.det(_jt_matrix(lam, mu, h)))


def _box_adjacency(parts, index):
    # E[mu, lam] = 1 when lam is mu plus one box
    rows, cols = [], []
    for a, p in enumerate(parts):
        ext = list(p) + [0]
        for i in range(len(ext)):
            if i == 0 or ext[i - 1] > ext[i]:
                q = ext.copy()
                q[i] += 1
                b = index.get(tuple(x for x in q if x))
                if b is not None:
                    rows.append(a)
                    cols.append(b)
    n = len(parts)
    return sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))


def _horizontal_strips(mu, cap):
    # all lam with lam/mu a horizontal strip and |lam| <= cap
    mu = list(mu)
    ell = len(mu)
    budget = cap - sum(mu)

    def rec(i, left):
        if i > ell:
            yield ()
            return
        lo = mu[i] if i < ell else 0
        hi = lo + left if i == 0 else min(mu[i - 1], lo + left)
        for v in range(lo, hi + 1):
            for rest in rec(i + 1, left - (v - lo)):
                yield (v,) + rest

    for lam in rec(0, budget):
        yield tuple(x for x in lam if x), sum(lam) - sum(mu)


def skew_schur_matrix(parts: Sequence[Sequence[int]], rho: Specialization) -> sparse.csr_matrix:
    """Sparse matrix ``A[a, b] = s_{parts[b] / parts[a]}(rho)``.

    ``parts`` must be closed under taking subdiagrams (for instance the
    output of :func:`enumerate_partitions`).  The specialization is split
    into atoms (exponential part, each alpha, each beta) and the atom
    matrices are multiplied; the branching rule makes this exact on a
    downward-closed set.
    """
    parts = [tuple(p) for p in parts]
    index = {p: i for i, p in enumerate(parts)}
    n = len(parts)
    cap = max((sum(p) for p in parts), default=0)
    out = sparse.identity(n, format="csr")
    if rho.gamma > 0:
        e = _box_adjacency(parts, index)
        term = sparse.identity(n, format="csr")
        acc = term.copy()
        for k in range(1, cap + 1):
            term = (term @ e) * (rho.gamma / k)
            if term.nnz == 0:
                break
            acc = acc + term
        out = out @ acc
    for x, conj in [(a, False) for a in rho.alphas] + [(b, True) for b in rho.betas]:
        if x == 0:
            continue
        rows, cols, vals = [], [], []
        for a, mu in enumerate(parts):
            base = Partition(mu).conjugate() if conj else mu
            for lam, d in _horizontal_strips(base, cap):
                if conj:
                    lam = tuple(Partition(lam).conjugate())
                b = index.get(lam)
                if b is not None:
                    rows.append(a)
                    cols.append(b)
                    vals.append(x**d)
        out = out @ sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return out.tocsr()


# ---------------------------------------------------------------------------
# Schur Q / P functions

def _q_pair(a: int, b: int, q: np.ndarray) -> float:
    """``Q_{(a,b)}`` for ``a > b >= 0``, antisymmetric extension otherwise."""
    if a == b:
        return 0.0
    if a < b:
        return -_q_pair(b, a, q)

    def qq(n):
        return q[n] if 0 <= n < len(q) else 0.0

    total = qq(a) * qq(b)
    for i in range(1, b + 1):
        total += 2.0 * (-1) ** i * qq(a + i) * qq(b - i)
    return total


def _skew_q_from_coeffs(lam: Sequence[int], mu: Sequence[int], q: np.ndarray) -> float:
    lam, mu = list(lam), list(mu)
    if (len(lam) + len(mu)) % 2:
        mu = mu + [0]
    # inner shape enters in increasing order; with decreasing order the
    # branching rule fails by the sign of the reversal
    mu = mu[::-1]
    m, n = len(lam), len(mu)
    size = m + n
    if size == 0:
        return 1.0
    mat = np.zeros((size, size))
    for i in range(m):
        for j in range(i + 1, m):
            mat[i, j] = _q_pair(lam[i], lam[j], q)
            mat[j, i] = -mat[i, j]
        for j in range(n):
            d = lam[i] - mu[j]
            mat[i, m + j] = q[d] if 0 <= d < len(q) else 0.0
            mat[m + j, i] = -mat[i, m + j]
    return float(pfaffian(mat))


def skew_schur_q(lam: Sequence[int], mu: Sequence[int], rho: StrictSpecialization) -> float:
    """Skew Schur ``Q_{lam/mu}(rho)`` as the pfaffian of the block matrix ``M_{lam,mu}``."""
    lam, mu = StrictPartition(lam), StrictPartition(mu)
    if not contains(lam, mu):
        return 0.0
    # Q_{(a,b)} reaches q_{a+b}
    q = q_coeffs(rho, 2 * (lam[0] if lam else 0) + 1)
    return _skew_q_from_coeffs(lam, mu, q)


def skew_schur_p(lam: Sequence[int], mu: Sequence[int], rho: StrictSpecialization) -> float:
    """``P_{lam/mu} = 2^{l(mu) - l(lam)} Q_{lam/mu}``."""
    lam, mu = StrictPartition(lam), StrictPartition(mu)
    return 2.0 ** (len(mu) - len(lam)) * skew_schur_q(lam, mu, rho)


def skew_schur_q_matrix(parts, rho: StrictSpecialization, kind: str = "Q") -> sparse.csr_matrix:
    """Sparse matrix ``A[a, b] = Q_{parts[b] / parts[a]}(rho)`` (``P`` with ``kind='P'``)."""
    if kind not in ("Q", "P"):
        raise DomainError("kind must be 'Q' or 'P'")
    parts = [tuple(p) for p in parts]
    n = len(parts)
    nmax = 2 * max((p[0] for p in parts if p), default=0) + 1
    q = q_coeffs(rho, nmax)
    rows, cols, vals = [], [], []
    for a, mu in enumerate(parts):
        for b, lam in enumerate(parts):
            if not contains(lam, mu):
                continue
            if rho.is_trivial():
                val = 1.0 if lam == mu else 0.0
            else:
                val = _skew_q_from_coeffs(lam, mu, q)
            if kind == "P":
                val *= 2.0 ** (len(mu) - len(lam))
            if val != 0.0:
                rows.append(a)
                cols.append(b)
                vals.append(val)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


# ---------------------------------------------------------------------------
# enumeration

def _partitions_of(n: int, max_part: int, strict: bool) -> Iterator[tuple]:
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), 0, -1):
        nxt = first - 1 if strict else first
        for rest in _partitions_of(n - first, nxt, strict):
            yield (first,) + rest


def enumerate_partitions(max_size: int, strict: bool = False) -> Iterator[Partition]:
    """All (strict) partitions of size ``<= max_size``.

    Order: by size, then lexicographically increasing parts tuple.
    """
    if max_size > MAX_ENUM_SIZE:
        raise LimitExceeded(f"max_size {max_size} exceeds {MAX_ENUM_SIZE}")
    cls = StrictPartition if strict else Partition
    for n in range(max_size + 1):
        for p in sorted(_partitions_of(n, n, strict)):
            yield cls(p)
