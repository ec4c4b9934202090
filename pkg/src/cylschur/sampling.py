"""Exact samplers and the edge / Gumbel experiment drivers.

Sites follow the package convention: stored integer ``m`` is the half-integer
``m - 1/2``.  Random streams come from numpy's counter-based Philox generator;
an :class:`RngState` ``(seed, counter)`` names the substream reached after
``counter`` jumps of ``2^128`` draws, so streams never overlap.
"""
from __future__ import annotations

import io
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import special

from .errors import BoundaryViolation, DomainError, SpectrumError, WindowTooNarrow
from .fredholm import Window, f_alpha, lambda1_cdf
from .kernels import KernelMatrix, ftb_kernel_matrix
from .measures import CylindricPlancherelParams, charge_law
from .partitions import MayaDiagram, Partition, charged_from_maya
from .specfun import bessel_i_log

__all__ = [
    "RngState",
    "SampleRecord",
    "ExperimentTable",
    "sample_charge",
    "fermi_occupation",
    "sample_uniform_maya",
    "dpp_sampler",
    "sample_dpp",
    "reconstruct_partition",
    "plancherel_window",
    "sample_cylindric_plancherel",
    "experiment_edge",
    "experiment_gumbel",
    "gumbel_centering",
]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngState:
    """Seed and substream index of a Philox stream."""

    seed: int
    counter: int = 0

    def __post_init__(self):
        if not (0 <= self.seed <= _MASK64 and 0 <= self.counter <= _MASK64):
            raise DomainError("seed and counter must be 64-bit unsigned integers")

    def generator(self) -> np.random.Generator:
        bg = np.random.Philox(key=self.seed)
        if self.counter:
            bg = bg.jumped(self.counter)
        return np.random.Generator(bg)

    def split(self, k: int) -> "RngState":
        """The ``k``-th substream after this one."""
        return RngState(self.seed, self.counter + int(k))

    def to_json(self) -> dict:
        return {"seed": self.seed, "counter": self.counter}


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngState):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise DomainError("rng must be an RngState or numpy Generator")


@dataclass(frozen=True)
class SampleRecord:
    partition: Partition
    charge: int
    window: Window
    seed: RngState

    def to_json(self) -> dict:
        return {"partition": list(self.partition), "charge": self.charge,
                "window": [self.window.m_lo, self.window.m_hi], "seed": self.seed.to_json()}


@dataclass
class ExperimentTable:
    """Rows of a comparison experiment plus ``#`` metadata for the CSV header."""

    columns: tuple
    rows: list
    meta: dict = field(default_factory=dict)

    @property
    def sup_dev(self) -> float:
        i = self.columns.index("dev")
        return max((abs(r[i]) for r in self.rows), default=0.0)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.meta, sort_keys=True) + "\n")
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(repr(float(x)) if isinstance(x, float) else str(x) for x in row) + "\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


# ---------------------------------------------------------------------------
# charge and Bernoulli Maya diagrams

def sample_charge(u: float, t: float, rng, size: int | None = None):
    """Charge ``c`` with ``P(c) proportional to t^c u^{c^2/2}`` by inverse CDF."""
    cs, p = charge_law(u, t)
    gen = _as_generator(rng)
    idx = np.searchsorted(np.cumsum(p), gen.random(size), side="right")
    out = cs[np.minimum(idx, len(cs) - 1)]
    return int(out) if size is None else out.astype(int)


def fermi_occupation(sites, u: float, t: float) -> np.ndarray:
    """``P(site occupied) = 1 / (1 + t^{-1} u^{-k})`` at ``k = m - 1/2``."""
    k = np.asarray(sites, dtype=float) - 0.5
    if u == 0.0:
        return (k < 0).astype(float)
    return special.expit(math.log(t) + k * math.log(u))


def sample_uniform_maya(u: float, t: float, window: Window, rng, tol: float = 1e-12) -> MayaDiagram:
    """Independent Fermi-Dirac occupations inside ``window``; vacuum outside."""
    if not t > 0:
        raise DomainError("t must be positive")
    sites = np.arange(window.m_lo, window.m_hi + 1)
    p = fermi_occupation(sites, u, t)
    if len(p) == 0 or p[0] < 1 - tol or p[-1] > tol:
        raise WindowTooNarrow("window edges are not saturated to within tol")
    occ = sites[_as_generator(rng).random(len(sites)) < p]
    return MayaDiagram.from_occupied(occ.tolist(), window.m_lo, window.m_hi)


# ---------------------------------------------------------------------------
# determinantal sampling

def dpp_sampler(kernel: KernelMatrix, tol: float = 1e-8) -> Callable:
    """Eigendecompose once; the returned callable draws one sample per call.

    Each eigenvector is kept with probability its eigenvalue, then points of
    the resulting projection DPP are drawn one at a time from the squared row
    norms, projecting the chosen direction out after each draw.
    """
    k = np.asarray(kernel.entries, dtype=float)
    sites = np.array([m for _, m in kernel.rows], dtype=int)
    if k.size == 0:
        return lambda rng: frozenset()
    if not np.allclose(k, k.T, atol=1e-10, rtol=0):
        raise SpectrumError("kernel is not symmetric")
    lam, vec = np.linalg.eigh(0.5 * (k + k.T))
    if lam.min() < -tol or lam.max() > 1 + tol:
        raise SpectrumError(f"spectrum [{lam.min():.3g}, {lam.max():.3g}] outside [0, 1]")
    lam = np.clip(lam, 0.0, 1.0)

    def draw(rng) -> frozenset:
        gen = _as_generator(rng)
        v = vec[:, gen.random(len(lam)) < lam]
        chosen = []
        while v.shape[1]:
            p = np.einsum("ij,ij->i", v, v)
            i = int(np.searchsorted(np.cumsum(p), gen.random() * p.sum(), side="right"))
            i = min(i, len(p) - 1)
            chosen.append(i)
            # eliminate the direction hitting site i, then re-orthonormalize
            j = int(np.argmax(np.abs(v[i])))
            vj = v[:, j] / v[i, j]
            v = np.delete(v - np.outer(vj, v[i]), j, axis=1)
            if v.shape[1]:
                v, _ = np.linalg.qr(v)
        return frozenset(int(sites[i]) for i in chosen)

    return draw


def sample_dpp(kernel: KernelMatrix, rng) -> frozenset:
    """One exact sample (a set of stored sites) of the DPP with symmetric ``kernel``."""
    return dpp_sampler(kernel)(rng)


def reconstruct_partition(points: Iterable[int], window: Window, margin: int = 3):
    """``(lambda, c)`` from a point set that is vacuum-like outside ``window``."""
    occ = set(int(m) for m in points)
    if any(m < window.m_lo or m > window.m_hi for m in occ):
        raise DomainError("points outside the window")
    if any(m > window.m_hi - margin for m in occ):
        raise BoundaryViolation("particle within margin of the right window edge")
    if any(m not in occ for m in range(window.m_lo, window.m_lo + margin)):
        raise BoundaryViolation("hole within margin of the left window edge")
    return charged_from_maya(MayaDiagram.from_occupied(occ, window.m_lo, window.m_hi))


def plancherel_window(params: CylindricPlancherelParams) -> Window:
    """Symmetric window of half-width ``2L + 12 L^{1/3} + 20`` sites."""
    L = params.L
    h = int(math.ceil(2 * L + 12 * L ** (1.0 / 3.0) + 20))
    return Window(-h + 1, h)


def sample_cylindric_plancherel(params: CylindricPlancherelParams, n_samples: int,
                                rng: RngState, window: Window | None = None) -> list:
    """``n_samples`` records of the shift-mixed cylindric Plancherel measure.

    Sample ``i`` uses substream ``rng.split(i)``, so any record can be
    regenerated from its stored seed alone.
    """
    window = window or plancherel_window(params)
    draw = dpp_sampler(ftb_kernel_matrix(params, window.sites))
    out = []
    for i in range(n_samples):
        st = rng.split(i)
        lam, c = reconstruct_partition(draw(st), window)
        out.append(SampleRecord(lam, c, window, st))
    return out


# ---------------------------------------------------------------------------
# experiments

def _edge_alpha(params: CylindricPlancherelParams) -> float:
    return (params.gamma * (1 - params.u) ** 2) ** (1.0 / 3.0)


def experiment_edge(params_grid: Sequence[CylindricPlancherelParams], s_grid, out=None,
                    alpha: float | None = None) -> ExperimentTable:
    """``P(lambda_1 + c < 2L + s L^{1/3})`` against ``F_alpha(s)``.

    ``alpha`` defaults to ``(gamma (1 - u)^2)^{1/3}`` for each grid point;
    pass ``math.inf`` to compare against the Airy-kernel (GUE) target.
    """
    rows = []
    for p in params_grid:
        a = _edge_alpha(p) if alpha is None else float(alpha)
        L = p.L
        for s in s_grid:
            m = math.floor(2 * L + s * L ** (1.0 / 3.0)) + 1
            cdf = lambda1_cdf(p, m)
            target = f_alpha(float(s), a)
            rows.append((p.u, p.gamma, a, L, float(s), m, cdf, target, cdf - target))
    table = ExperimentTable(("u", "gamma", "alpha", "L", "s", "m", "cdf", "F_alpha", "dev"), rows,
                            {"experiment": "edge", "grid": [q.to_json() for q in params_grid],
                             "site_rule": "m = floor(2L + s L^(1/3)) + 1"})
    if out is not None:
        table.to_csv(out)
    return table


def gumbel_centering(r: float, gamma: float) -> float:
    return (float(bessel_i_log(0, 2 * gamma + gamma * r)) - math.log(r)) / r


def experiment_gumbel(r: float, gamma: float, s_grid, out=None) -> ExperimentTable:
    """CDF at ``m = floor(M + s/r) + 1`` against ``exp(-e^{-s})``, ``M = ln(I_0(2g + g r)/r)/r``."""
    if gamma * r * r > 1e-2:
        warnings.warn("gamma r^2 is not small; the Gumbel law is a poor approximation here")
    p = CylindricPlancherelParams(math.exp(-r), gamma, 1.0)
    M = gumbel_centering(r, gamma)
    rows = []
    for s in s_grid:
        m = math.floor(M + s / r) + 1
        cdf = lambda1_cdf(p, m)
        target = math.exp(-math.exp(-s))
        rows.append((float(s), m, cdf, target, cdf - target))
    table = ExperimentTable(("s", "m", "cdf", "gumbel", "dev"), rows,
                            {"experiment": "gumbel", "r": r, "gamma": gamma, "M": M,
                             "site_rule": "m = floor(M + s/r) + 1"})
    if out is not None:
        table.to_csv(out)
    return table
