"""Verification suites behind ``cylschur verify``.

Every check measures a handful of named quantities and compares each with a
tolerance.  The tolerances below are the published acceptance thresholds;
``tol_scale`` multiplies all of them (runtime limits excepted).
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .fredholm import Window, lambda1_cdf, m_alpha_extended
from .kernels import (bessel_window, bulk_density, correlator_det, correlator_product,
                      extended_kernel, ftb_kernel, ftb_kernel_matrix, g_propagator, kappa, kappa_sum,
                      kernel_matrix_general, residue_split_amplification)
from .measures import (CylindricPlancherelParams, PeriodicSchurParams, StrictPeriodicParams,
                       oracle_chain, oracle_correlation, oracle_correlation_strict, plancherel_size_tail,
                       transfer_matrix)
from .partitions import Specialization, StrictSpecialization
from .sampling import (RngState, experiment_edge, experiment_gumbel, fermi_occupation, sample_charge,
                       sample_cylindric_plancherel, sample_uniform_maya)
from .specfun import airy_ai, pochhammer_inf, theta3, theta_mult
from .strict_kernels import schur_pfaffian_check, strict_correlation

__all__ = ["Part", "CheckResult", "CHECKS", "SUITES", "run_suite"]


@dataclass
class Part:
    label: str
    value: float
    tol: float
    runtime: bool = False

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value < self.tol)


@dataclass
class CheckResult:
    criterion: int
    name: str
    parts: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.parts)

    def line(self) -> str:
        body = "; ".join(f"{p.label} {p.value:.3g} {'<' if p.passed else '>='} {p.tol:.3g}" for p in self.parts)
        return f"{'PASS' if self.passed else 'FAIL'} #{self.criterion} {self.name}: {body}"

    def to_json(self) -> dict:
        return {"criterion": self.criterion, "name": self.name, "passed": self.passed,
                "seconds": self.seconds,
                "parts": [{"label": p.label, "value": p.value, "tol": p.tol, "passed": p.passed}
                          for p in self.parts]}


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0


def _rel(a, b, scale=None) -> float:
    """``|a - b|`` relative to ``scale`` (default ``max(|a|, |b|)``).

    Near zeros of theta functions and pfaffians the attainable accuracy is
    eps times the size of the cancelling terms, so callers pass that size.
    """
    a, b = np.asarray(a), np.asarray(b)
    if scale is None:
        scale = np.maximum(np.abs(a), np.abs(b))
    return float(np.max(np.abs(a - b) / scale))


def _hadamard(m) -> float:
    # |det m| <= prod of row norms; the pfaffian is bounded by its square root
    return float(np.prod(np.linalg.norm(m, axis=1)))


def _finish(criterion, name, parts, timer, limit) -> CheckResult:
    parts.append(Part("runtime_s", timer.seconds, limit, runtime=True))
    return CheckResult(criterion, name, parts, timer.seconds)


# ---------------------------------------------------------------------------
# 1: exact identities

def check_identities(tol_scale: float = 1.0, seed: int = 1) -> CheckResult:
    tol = 1e-10 * tol_scale
    rng = np.random.default_rng(seed)
    parts = []
    with _Timer() as tm:
        worst = 0.0
        for _ in range(100):
            q = rng.uniform(0.01, 0.95)
            z = q ** rng.uniform(-0.75, 0.75) * np.exp(1j * rng.uniform(-np.pi, np.pi))
            lhs = theta3(z, q)
            rhs = pochhammer_inf(q, q) * theta_mult(-math.sqrt(q) * z, q)
            worst = max(worst, _rel(lhs, rhs, abs(theta3(abs(z), q))))
        parts.append(Part("triple_product", worst, tol))

        worst = 0.0
        for _ in range(100):
            t, q = math.exp(rng.uniform(math.log(0.1), math.log(10))), rng.uniform(0.01, 0.9)
            sq = math.sqrt(q)
            lhs = pochhammer_inf(-t * sq, q) * pochhammer_inf(-sq / t, q)
            worst = max(worst, _rel(lhs, theta3(t, q) / pochhammer_inf(q, q)))
        parts.append(Part("fermion_boson_product", worst, tol))

        worst = 0.0
        for _ in range(50):
            u, t = rng.uniform(0.05, 0.8), math.exp(rng.uniform(-0.7, 0.7))
            ratio = u ** rng.uniform(0.1, 0.9) * np.exp(1j * rng.uniform(-np.pi, np.pi))
            w = np.exp(rng.uniform(-0.3, 0.3) + 1j * rng.uniform(-np.pi, np.pi))
            # for positive real z/w every series term has one sign: the modulus scale
            scale = abs(kappa_sum(1 / abs(ratio), 1.0, u, t))
            worst = max(worst, _rel(kappa(w / ratio, w, u, t), kappa_sum(w / ratio, w, u, t), scale))
        parts.append(Part("kappa_sum_vs_theta", worst, tol))

        worst = 0.0
        for n in (2, 3):
            for _ in range(20):
                u, t = rng.uniform(0.05, 0.6), math.exp(rng.uniform(-0.7, 0.7))
                # nested radii z_1 > w_1 > z_2 > ... inside an annulus of ratio 1/u
                logr = -np.linspace(0, 0.9 * -math.log(u), 2 * n) + 0.45 * -math.log(u)
                ph = np.exp(1j * rng.uniform(-np.pi, np.pi, 2 * n))
                x = np.exp(logr) * ph
                zs, ws = x[0::2], x[1::2]
                mat = g_propagator(zs[:, None] / ws[None, :], u, t)
                worst = max(worst, _rel(correlator_det(zs, ws, u, t), correlator_product(zs, ws, u, t),
                                        _hadamard(mat)))
        parts.append(Part("frobenius_det_vs_product", worst, tol))

        worst = 0.0
        for n in (2, 3):
            for _ in range(20):
                u = rng.uniform(0.05, 0.6)
                x = np.sort(np.exp(rng.uniform(0, 0.95 * -math.log(u), 2 * n)))[::-1]
                pf, prod = schur_pfaffian_check(list(x), u)
                r = x[:, None] / x[None, :]
                mat = theta_mult(r, u) / theta_mult(-r, u)
                worst = max(worst, _rel(pf, prod, math.sqrt(_hadamard(mat))))
        parts.append(Part("schur_pfaffian", worst, tol))
    return _finish(1, "identities", parts, tm, 10.0)


# ---------------------------------------------------------------------------
# 2: kernel cross-form

def check_cross_form(tol_scale: float = 1.0) -> CheckResult:
    worst = {"contour": 0.0, "zeta_contour": 0.0, "residue_split": 0.0}
    with _Timer() as tm:
        for u in (0.1, 0.3, 0.5, 0.7, 0.9):
            for g in (0.5, 1.0, 2.0, 5.0, 10.0):
                p = CylindricPlancherelParams(u, g, 1.0)
                L = p.L
                e = int(2 * L + 10)
                idx = sorted({-e, -int(L), 0, 1, int(L), e - 3, e + 1})
                ref = ftb_kernel_matrix(p, idx).entries
                c = ftb_kernel_matrix(p, idx, method="contour").entries
                worst["contour"] = max(worst["contour"], float(np.max(np.abs(ref - c))))
                for (i, a), (j, b) in itertools.product(enumerate(idx), repeat=2):
                    z = ftb_kernel(p, a, b, "zeta_contour")
                    worst["zeta_contour"] = max(worst["zeta_contour"], abs(z - ref[i, j]))
                    if residue_split_amplification(p, a, b) < 10:
                        r = ftb_kernel(p, a, b, "residue_split")
                        worst["residue_split"] = max(worst["residue_split"], abs(r - ref[i, j]))
    parts = [Part(f"bessel_vs_{k}", v, 1e-8 * tol_scale) for k, v in worst.items()]
    return _finish(2, "kernel_cross_form", parts, tm, 60.0)


# ---------------------------------------------------------------------------
# 3 / 4: oracle equivalence

def _single_specs(n, qs):
    return tuple((Specialization.single(qs[2 * k]), Specialization.single(qs[2 * k + 1])) for k in range(n))


def check_oracle_charged(tol_scale: float = 1.0, cutoff: int = 20) -> CheckResult:
    qs = (0.25, 0.2, 0.15, 0.25)
    worst_diff, worst_excess = 0.0, -math.inf
    with _Timer() as tm:
        for n in (1, 2):
            for u in (0.0, 0.3):
                params = PeriodicSchurParams(u, 1.0, _single_specs(n, qs))
                chain = oracle_chain(params, cutoff)
                pts = [(i, m) for i in range(1, n + 1) for m in (-1, 0, 1, 2)]
                sets = [[p] for p in pts] + [list(c) for c in itertools.combinations(pts, 2)]
                for U in sets:
                    km = kernel_matrix_general(params, U).entries
                    val = float(np.linalg.det(km))
                    orc = oracle_correlation(params, U, cutoff=cutoff, chain=chain)
                    diff = abs(val - orc.value)
                    worst_diff = max(worst_diff, diff)
                    worst_excess = max(worst_excess, diff - orc.truncation_bound)
    parts = [Part("max_abs_diff", worst_diff, 1e-5 * tol_scale),
             Part("excess_over_bound", worst_excess, 1e-12 * tol_scale)]
    return _finish(3, "oracle_charged", parts, tm, 300.0)


def check_oracle_strict(tol_scale: float = 1.0, cutoff: int = 20) -> CheckResult:
    qs = (0.25, 0.2, 0.15, 0.25)
    worst_diff, worst_excess = 0.0, -math.inf
    with _Timer() as tm:
        for n in (1, 2):
            for u in (0.0, 0.3):
                specs = tuple((StrictSpecialization.single(qs[2 * k]), StrictSpecialization.single(qs[2 * k + 1]))
                              for k in range(n))
                params = StrictPeriodicParams(u, 1.0, specs)
                chain = oracle_chain(params, cutoff)
                pts = [(i, m) for i in range(1, n + 1) for m in (1, 2, 3)]
                sets = [[p] for p in pts] + [list(c) for c in itertools.combinations(pts, 2)]
                for U in sets:
                    val = strict_correlation(params, U)
                    orc = oracle_correlation_strict(params, U, cutoff=cutoff, chain=chain)
                    diff = abs(val - orc.value)
                    worst_diff = max(worst_diff, diff)
                    worst_excess = max(worst_excess, diff - orc.truncation_bound)
    parts = [Part("max_abs_diff", worst_diff, 1e-5 * tol_scale),
             Part("excess_over_bound", worst_excess, 1e-12 * tol_scale)]
    return _finish(4, "oracle_strict", parts, tm, 300.0)


# ---------------------------------------------------------------------------
# 5-8, 11: scaling limits at desk scale

S_EDGE = np.arange(-4.0, 2.01, 0.5)
S_GUMBEL = np.arange(-2.0, 4.01, 0.5)


def check_edge(tol_scale: float = 1.0) -> CheckResult:
    with _Timer() as tm:
        a1 = experiment_edge([CylindricPlancherelParams(0.9, 100.0)], S_EDGE).sup_dev
        ainf = experiment_edge([CylindricPlancherelParams(1e-4, 1000.0)], S_EDGE, alpha=math.inf).sup_dev
    parts = [Part("alpha1_sup_dev", a1, 0.02 * tol_scale), Part("alpha_inf_sup_dev", ainf, 0.02 * tol_scale)]
    return _finish(5, "edge_finite_temperature", parts, tm, 600.0)


def check_gumbel(tol_scale: float = 1.0) -> CheckResult:
    with _Timer() as tm:
        dev = experiment_gumbel(0.02, 1.0, S_GUMBEL).sup_dev
    return _finish(6, "edge_gumbel", [Part("sup_dev", dev, 0.02 * tol_scale)], tm, 300.0)


def check_bulk(tol_scale: float = 1.0) -> CheckResult:
    with _Timer() as tm:
        r = 0.005
        p = CylindricPlancherelParams(math.exp(-r), 1.0, 1.0)
        dev = 0.0
        for tau in (-1.0, 0.0, 1.0, 2.0):
            a = math.floor(tau / r)
            dev = max(dev, abs(ftb_kernel(p, a, a) - bulk_density(tau, 1.0)))
        mid = abs(bulk_density(0.0, 50.0) - 0.5)
    parts = [Part("bulk_sup_dev", dev, 1e-2 * tol_scale), Part("midpoint_density_dev", mid, 1e-2 * tol_scale)]
    return _finish(7, "bulk", parts, tm, 60.0)


def check_extended(tol_scale: float = 1.0) -> CheckResult:
    theta = 1000.0
    beta = theta ** (-1.0 / 3.0)
    c = theta ** (1.0 / 3.0)
    dev = 0.0
    with _Timer() as tm:
        for tau, taup in itertools.product((0.0, 0.4), repeat=2):
            for x, y in itertools.product((-1.0, 0.0, 1.0), repeat=2):
                k = math.floor(2 * theta + x * c) + 1
                kp = math.floor(2 * theta + y * c) + 1
                val = c * extended_kernel(beta, theta, 1.0, (beta * tau, k), (beta * taup, kp))
                dev = max(dev, abs(val - m_alpha_extended((tau, x), (taup, y), 1.0)))
    return _finish(8, "extended_kernel", [Part("sup_dev", dev, 0.02 * tol_scale)], tm, 120.0)


def check_semigroup(tol_scale: float = 1.0) -> CheckResult:
    theta, beta, cap = 0.5, 0.3, 14
    with _Timer() as tm:
        t1 = transfer_matrix(theta, beta, cap)
        t2 = transfer_matrix(theta, 2 * beta, cap)
        small = [i for i, lam in enumerate(t1.parts) if sum(lam) <= 6]
        prod = t1.matrix @ t1.matrix
        defect = float(np.max(np.abs(prod[np.ix_(small, small)] - t2.matrix[np.ix_(small, small)])))
        u = math.exp(-beta)
        z = 1.0 / pochhammer_inf(u, u).real
        tr = float(np.trace(t1.matrix))
        bound = plancherel_size_tail(u, theta * (1 - u), cap)
        # trace <= Z <= trace + bound * Z, i.e. the missing fraction is at most the bound
        missing = (z - tr) / z
        slack = max(-missing, missing - bound)
    parts = [Part("semigroup_defect", defect, 1e-6 * tol_scale),
             Part("trace_outside_bound", slack, 1e-12 * tol_scale)]
    return _finish(9, "semigroup", parts, tm, 120.0)


def _z(emp, p, n):
    return abs(emp - p) / math.sqrt(max(p * (1 - p), 1e-300) / n)


def check_sampling(tol_scale: float = 1.0, seed: int = 20240601) -> CheckResult:
    with _Timer() as tm:
        p = CylindricPlancherelParams(0.3, 0.5)
        n = 10_000
        recs = sample_cylindric_plancherel(p, n, RngState(seed))
        tops = np.array([(r.partition[0] if r.partition else 0) + r.charge for r in recs])
        z_dpp = max(_z(np.mean(tops < m), lambda1_cdf(p, m), n) for m in (0, 1, 2, 3))

        u, t, n2 = 0.5, 1.0, 100_000
        win = Window(-50, 50)
        gen = RngState(seed, 1).generator()
        probe = (-1, 0, 1, 2)
        counts = np.zeros(len(probe))
        for _ in range(n2):
            md = sample_uniform_maya(u, t, win, gen)
            counts += [md.occupied(k) for k in probe]
        q = fermi_occupation(probe, u, t)
        z_maya = max(_z(c / n2, qi, n2) for c, qi in zip(counts, q))

        r = 0.01
        cs = sample_charge(math.exp(-r), 1.0, RngState(seed, 2), size=100_000)
        clt = float(cs.var() * r)
    parts = [Part("dpp_vs_fredholm_sigma", z_dpp, 3.0 * tol_scale),
             Part("maya_marginal_sigma", z_maya, 3.0 * tol_scale),
             Part("charge_clt_dev", abs(clt - 1.0), 0.1 * tol_scale)]
    return _finish(10, "sampling", parts, tm, 300.0)


def check_nicholson(tol_scale: float = 1.0) -> CheckResult:
    with _Timer() as tm:
        L = 1e4
        c = L ** (1.0 / 3.0)
        xs = np.arange(-2.0, 2.01, 0.5)
        n = np.floor(2 * L + xs * c).astype(int)
        dev = float(np.max(np.abs(c * bessel_window(n, L) - airy_ai((n - 2 * L) / c))))
    return _finish(11, "nicholson", [Part("sup_dev", dev, 1e-2 * tol_scale)], tm, 10.0)


CHECKS = {
    1: check_identities,
    2: check_cross_form,
    3: check_oracle_charged,
    4: check_oracle_strict,
    5: check_edge,
    6: check_gumbel,
    7: check_bulk,
    8: check_extended,
    9: check_semigroup,
    10: check_sampling,
    11: check_nicholson,
}

SUITES = {
    "identities": (1, 2, 9, 11),
    "oracles": (3,),
    "strict": (4,),
    "edge": (5, 8),
    "bulk": (7,),
    "gumbel": (6,),
    "sampling": (10,),
    "all": tuple(CHECKS),
}


def run_suite(name: str, tol_scale: float = 1.0, report=None) -> list:
    """Run the checks of suite ``name``; ``report`` is called with each result as it finishes."""
    out = []
    for k in SUITES[name]:
        res = CHECKS[k](tol_scale)
        out.append(res)
        if report is not None:
            report(res)
    return out
