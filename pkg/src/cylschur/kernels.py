"""Correlation kernels of the shift-mixed periodic Schur process.

Sites use the stored-integer convention: ``m`` stands for ``m - 1/2``.

All double contour integrals are evaluated as exact trapezoid sums on two
circles.  With ``z_j = r_z w^j`` and ``w_l = r_w w^l`` (``w = e^{2 pi i/N}``)
the propagator only depends on ``j - l mod N``, so the inner sum is a
circular convolution and the outer one an FFT; one pass yields a whole
column of the kernel.

The propagator is handled through the single-valued function
``g(x) = x^{1/2} kappa`` with ``x = z/w``::

    g(x) = sum_n x^n / (1 + t^{-1} u^{-(n - 1/2)})      (1 < |x| < 1/u)
         = (u;u)^2 theta3(t x; u) / (theta_u(1/x) theta3(t; u))

so that ``K = [z^A w^{-B}] F(i, z) / F(i', w) g(z/w)`` with integer ``A, B``.
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .errors import DomainError, LimitExceeded, NonConvergent, PoleProximity
from .measures import CylindricPlancherelParams, PeriodicSchurParams
from .specfun import (
    DEFAULT_ACCURACY,
    Accuracy,
    bessel_i_log,
    check_nome,
    pochhammer_inf,
    theta3,
    theta_mult,
)

__all__ = [
    "ContourSpec",
    "KernelMatrix",
    "kappa",
    "kappa_sum",
    "kappa_zeta",
    "g_propagator",
    "f_factor",
    "log_f_factor",
    "kernel_general",
    "kernel_matrix_general",
    "ftb_kernel",
    "ftb_kernel_matrix",
    "ftb_trace_tail",
    "residue_split_terms",
    "residue_split_amplification",
    "extended_kernel",
    "correlator_product",
    "correlator_det",
    "frobenius_npoint",
    "bulk_density",
    "bulk_kernel",
    "bessel_window",
]

MIN_NODES = 256
MAX_NODES = 65536
POISSON_R = 0.3
_EPS = np.finfo(float).eps


# ---------------------------------------------------------------------------
# propagator

def _r_of(u: float) -> float:
    return -math.log(u) if u > 0 else math.inf


def _csc(y):
    # 1/sin(y) without overflow for large |Im y|
    y = np.asarray(y, dtype=complex)
    up = y.imag > 0
    e = np.exp(np.where(up, 1j * y, -1j * y))
    return np.where(up, -2j * e / (1.0 - e * e), 2j * e / (1.0 - e * e))


def _n_poisson(r: float) -> int:
    # terms decay like exp(-2 pi^2 |l| / r)
    return max(2, int(math.ceil(40.0 * r / (2 * math.pi**2))) + 1)


def kappa_zeta(zeta, u: float, t: float = 1.0, check: bool = True):
    """``kappa(zeta) = sum_{m in Z'} e^{zeta m} / (1 + t^{-1} e^{r m})`` with ``u = e^{-r}``.

    Poisson-summed form ``sum_l (-1)^l e^{(zeta - 2 pi i l) s / r} pi / (r sin(pi (zeta - 2 pi i l) / r))``
    with ``s = ln t``, meromorphic in ``zeta`` with poles on ``r Z + 2 pi i Z``.
    """
    u = check_nome(u)
    if u == 0.0:
        raise DomainError("kappa_zeta needs u > 0")
    r = -math.log(u)
    s = math.log(t)
    zeta = np.asarray(zeta, dtype=complex)
    if check:
        k = np.round(zeta.real / r)
        ell = np.round(zeta.imag / (2 * math.pi))
        dist = np.abs(zeta - (k * r + 2j * math.pi * ell))
        if np.any(dist < 1e-8):
            raise PoleProximity("zeta within 1e-8 of the pole lattice")
    out = np.zeros_like(zeta)
    nl = _n_poisson(r)
    for ell in range(-nl, nl + 1):
        y = zeta - 2j * math.pi * ell
        out = out + (-1) ** ell * np.exp(y * s / r) * (math.pi / r) * _csc(math.pi * y / r)
    return out[()] if out.ndim == 0 else out


def _g_theta(x, u: float, t: float, acc: Accuracy):
    x = np.asarray(x, dtype=complex)
    if u == 0.0:
        return x / (x - 1.0)
    qq = pochhammer_inf(u, u, acc).real
    return qq * qq * theta3(t * x, u, acc) / (theta_mult(1.0 / x, u, acc) * theta3(t, u, acc))


def g_propagator(x, u: float, t: float, acc: Accuracy = DEFAULT_ACCURACY):
    """``g(x) = sqrt(x) kappa`` for ``x = z/w`` (single valued, poles at ``x in u^Z``)."""
    u = check_nome(u)
    x = np.asarray(x, dtype=complex)
    r = _r_of(u)
    if r < POISSON_R:
        zeta = np.log(x)
        out = np.exp(0.5 * zeta) * kappa_zeta(zeta, u, t, check=False)
    else:
        out = _g_theta(x, u, t, acc)
    return out[()] if out.ndim == 0 else out


def kappa(z, w, u: float, t: float, acc: Accuracy = DEFAULT_ACCURACY):
    """Propagator ``kappa(z, w)`` in theta form (principal branch of ``sqrt(w/z)``).

    Requires ``u <= |z/w| <= 1/u`` and ``|z/w| != 1``.
    """
    u = check_nome(u)
    if not t > 0:
        raise DomainError("t must be positive")
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    x = z / w
    ax = np.abs(x)
    if np.any(np.isclose(ax, 1.0, rtol=0, atol=1e-14)):
        raise DomainError("kappa is singular on |z/w| = 1")
    if u > 0 and np.any((ax < u) | (ax > 1.0 / u)):
        raise DomainError("|z/w| must lie in [u, 1/u]")
    out = np.sqrt(w / z) * g_propagator(x, u, t, acc)
    return out[()] if out.ndim == 0 else out


def kappa_sum(z, w, u: float, t: float, n_terms: int | None = None):
    """Laurent-series form of ``kappa`` (test oracle); picks the expansion by ``|z/w|``."""
    u = check_nome(u)
    x = complex(z) / complex(w)
    ax = abs(x)
    if n_terms is None:
        r = _r_of(u)
        dist = min(abs(math.log(ax)), r - abs(math.log(ax))) if u > 0 else abs(math.log(ax))
        n_terms = int(40.0 / max(dist, 1e-3)) + 10
    m = np.arange(-n_terms, n_terms) + 0.5
    lu = math.log(u) if u > 0 else -math.inf
    lt = math.log(t)
    # x^m / (1 + t^{-1} u^{-m}) and -x^m / (1 + t u^m) in log form, so no
    # factor overflows near the edge of the annulus
    if ax > 1:
        terms = np.exp(m * np.log(x) - np.logaddexp(0.0, -m * lu - lt))
    else:
        terms = -np.exp(m * np.log(x) - np.logaddexp(0.0, m * lu + lt))
    return complex(np.sum(terms))


# ---------------------------------------------------------------------------
# F factor

def _log_h_scaled_sum(rho, z, u: float, sign: int, start: int):
    """``sum_{n >= start} ln H(u^n rho; z)`` (``sign`` flips to ``-``)."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros_like(z)
    if start == 0:
        out = out + rho.log_h(z)
    if u == 0.0:
        return sign * out
    if rho.gamma:
        out = out + rho.gamma * z * u / (1.0 - u)
    zmax = float(np.max(np.abs(z))) if z.size else 0.0
    for x, kind in [(a, -1) for a in rho.alphas] + [(b, +1) for b in rho.betas]:
        if x == 0:
            continue
        n = 1
        while True:
            c = x * u**n
            if kind < 0:
                out = out - np.log1p(-c * z)
            else:
                out = out + np.log1p(c * z)
            if c * zmax < 1e-18:
                break
            n += 1
            if n > 10**6:
                raise NonConvergent("F factor product did not converge")
    return sign * out


def log_f_factor(i: int, z, params: PeriodicSchurParams):
    """``ln F(i, z)`` (sum of principal logarithms of the factors)."""
    n = params.n_slots
    if not 1 <= i <= n:
        raise DomainError(f"slot {i} outside 1..{n}")
    z = np.asarray(z, dtype=complex)
    zi = 1.0 / z
    out = np.zeros_like(z)
    u = params.u
    for ell, (rp, rm) in enumerate(params.specs, start=1):
        out = out + _log_h_scaled_sum(rp, z, u, +1, 0 if ell <= i else 1)
        out = out + _log_h_scaled_sum(rm, zi, u, -1, 0 if ell >= i else 1)
    return out


def f_factor(i: int, z, params: PeriodicSchurParams, acc: Accuracy = DEFAULT_ACCURACY):
    """``F(i, z)``; ``z`` must lie in the annulus ``1/R < |z| < R``."""
    z = np.asarray(z, dtype=complex)
    rad = _spec_radius(params)
    if np.any((np.abs(z) >= rad) | (np.abs(z) <= 1.0 / rad)):
        raise DomainError("z outside the analyticity annulus of the specializations")
    out = np.exp(log_f_factor(i, z, params))
    return out[()] if out.ndim == 0 else out


def _spec_radius(params) -> float:
    rad = math.inf
    for p, m in params.specs:
        rad = min(rad, p.radius, m.radius)
    return rad


def _log_scale(logf: Callable, h: float = 1e-4, n: int = 256) -> float:
    # max over the unit circle of |d/ds Re ln f(e^s w)|: growth rate of the integrand
    ph = np.exp(2j * np.pi * np.arange(n) / n)
    d = (logf(np.exp(h) * ph).real - logf(np.exp(-h) * ph).real) / (2 * h)
    return float(np.max(np.abs(d)))


# ---------------------------------------------------------------------------
# contour machinery

@dataclass(frozen=True)
class ContourSpec:
    """Circle radii for ``z`` and ``w`` and the starting node count."""

    radius_z: float
    radius_w: float
    nodes: int = MIN_NODES

    def __post_init__(self):
        if self.radius_z <= 0 or self.radius_w <= 0:
            raise DomainError("radii must be positive")
        if self.nodes < 4 or self.nodes & (self.nodes - 1):
            raise DomainError("nodes must be a power of two")

    def check(self, u: float, i: int, ip: int, big_r: float = math.inf):
        ratio = self.radius_z / self.radius_w
        lo, hi = (1.0, 1.0 / u if u > 0 else math.inf) if i <= ip else (u, 1.0)
        if not lo < ratio < hi:
            raise DomainError(f"radius ratio {ratio} outside ({lo}, {hi}) for slots ({i}, {ip})")
        for rad in (self.radius_z, self.radius_w):
            if not 1.0 / big_r < rad < big_r:
                raise DomainError("contour leaves the analyticity annulus")


def _auto_contour(u: float, forward: bool, scale: float, big_r: float) -> ContourSpec:
    """Radii ``e^{+-delta/2}``; ``delta = r/2`` unless the integrand growth forces a smaller gap."""
    r = _r_of(u)
    delta = min(r / 2, 1.0, 10.0 / max(scale, 1e-300))
    if math.isfinite(big_r):
        delta = min(delta, 1.8 * math.log(big_r))
    sgn = 1.0 if forward else -1.0
    n0 = MIN_NODES
    while n0 < MAX_NODES and n0 * delta < 40.0:
        n0 *= 2
    return ContourSpec(math.exp(sgn * delta / 2), math.exp(-sgn * delta / 2), n0)


def _coeff_block(log_e, log_ehat, gfun, contour: ContourSpec, a_vals, b_vals, n: int):
    """``[z^A w^{-B}] E(z) Ehat(w) g(z/w)`` on the trapezoid grid with ``n`` nodes."""
    sz, sw = math.log(contour.radius_z), math.log(contour.radius_w)
    om = np.exp(2j * np.pi * np.arange(n) / n)
    e = np.exp(log_e(math.exp(sz) * om))
    ehat = np.exp(log_ehat(math.exp(sw) * om))
    gd = gfun(math.exp(sz - sw) * om)
    fg = np.fft.fft(gd)
    fe = np.fft.fft(ehat)
    a_vals = np.asarray(a_vals)
    b_vals = np.asarray(b_vals)
    out = np.empty((len(a_vals), len(b_vals)), dtype=complex)
    chunk = max(1, (1 << 21) // n)
    for c0 in range(0, len(b_vals), chunk):
        bs = b_vals[c0:c0 + chunk]
        # fft of b_l = Ehat_l w_l^B is a cyclic shift of fft(Ehat)
        idx = (np.arange(n)[None, :] - bs[:, None]) % n
        fb = fe[idx] * np.exp(sw * bs)[:, None]
        conv = np.fft.ifft(fg[None, :] * fb, axis=1)
        col = np.fft.fft(e[None, :] * conv, axis=1)
        vals = col[:, a_vals % n] * np.exp(-sz * a_vals)[None, :] / (n * n)
        out[:, c0:c0 + chunk] = vals.T
    mag = float(np.max(np.abs(e)) * np.max(np.abs(ehat)) * np.max(np.abs(gd)))
    mag *= float(np.max(np.exp(-sz * a_vals))) * float(np.max(np.exp(sw * b_vals)))
    return out, mag


def _converged_block(log_e, log_ehat, gfun, contour, a_vals, b_vals, acc: Accuracy):
    n = contour.nodes
    prev, mag = _coeff_block(log_e, log_ehat, gfun, contour, a_vals, b_vals, n)
    while True:
        n *= 2
        if n > MAX_NODES:
            raise NonConvergent(f"contour integral not converged with {MAX_NODES} nodes")
        cur, mag = _coeff_block(log_e, log_ehat, gfun, contour, a_vals, b_vals, n)
        scale = max(1.0, float(np.max(np.abs(cur))))
        floor = 100 * _EPS * mag
        if np.max(np.abs(cur - prev)) <= max(acc.rel_tol * scale, floor):
            break
        prev = cur
    if np.max(np.abs(cur.imag)) > max(1e-9 * scale, 10 * floor):
        raise NonConvergent("kernel has a non-negligible imaginary part")
    return cur.real, {"nodes": n, "roundoff_floor": floor}


# ---------------------------------------------------------------------------
# kernel matrices

@dataclass
class KernelMatrix:
    """Kernel evaluated on ``rows x cols``; indices are ``(slot or time, stored site)``."""

    rows: list
    cols: list
    entries: np.ndarray
    meta: dict = field(default_factory=dict)

    def is_symmetric(self, tol: float = 1e-10) -> bool:
        return self.rows == self.cols and bool(np.allclose(self.entries, self.entries.T, atol=tol, rtol=0))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.entries + self.entries.T))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.meta, default=str) + "\n")
        buf.write("row_slot,row_site,col_slot,col_site,value\n")
        # strict kernels are labelled by signed integers, charged ones by half-integers
        site = str if self.meta.get("site_kind") == "integer" else _site_str
        for a, ra in enumerate(self.rows):
            for b, cb in enumerate(self.cols):
                buf.write(f"{ra[0]},{site(ra[1])},{cb[0]},{site(cb[1])},{self.entries[a, b]:.17g}\n")
        return buf.getvalue()


def _site_str(m) -> str:
    # stored integer m is the half-integer m - 1/2
    return f"{m - 0.5:g}" if isinstance(m, (int, np.integer)) else str(m)


def kernel_matrix_general(params: PeriodicSchurParams, points: Sequence, contour: ContourSpec | None = None,
                          acc: Accuracy = DEFAULT_ACCURACY) -> KernelMatrix:
    """Kernel of the shift-mixed periodic Schur process on ``points = [(slot, m), ...]``."""
    points = [(int(i), int(m)) for i, m in points]
    u, t = params.u, params.t
    big_r = _spec_radius(params)
    out = np.zeros((len(points), len(points)))
    meta = {"model": "general", "params": params.to_json(), "blocks": []}
    slots = sorted({i for i, _ in points})
    logs = {i: (lambda z, i=i: log_f_factor(i, z, params)) for i in slots}
    scales = {i: _log_scale(logs[i]) for i in slots}

    def gfun(x):
        return g_propagator(x, u, t, acc)

    for i in slots:
        ra = [a for a, p in enumerate(points) if p[0] == i]
        for ip in slots:
            cb = [b for b, p in enumerate(points) if p[0] == ip]
            a_vals = [points[a][1] for a in ra]
            b_vals = [points[b][1] for b in cb]
            if contour is None:
                scale = scales[i] + scales[ip] + max(abs(v) for v in a_vals) + max(abs(v) for v in b_vals)
                cs = _auto_contour(u, i <= ip, scale, big_r)
            else:
                cs = contour
            cs.check(u, i, ip, big_r)
            vals, info = _converged_block(logs[i], lambda w, ip=ip: -logs[ip](w), gfun, cs,
                                          a_vals, b_vals, acc)
            out[np.ix_(ra, cb)] = vals
            meta["blocks"].append({"slots": [i, ip], "radius_z": cs.radius_z, "radius_w": cs.radius_w, **info})
    return KernelMatrix(points, points, out, meta)


def kernel_general(params: PeriodicSchurParams, p1, p2, contour: ContourSpec | None = None,
                   acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Single entry ``K(i, k; i', k')`` with ``p = (slot, stored site)``."""
    i, a = int(p1[0]), int(p1[1])
    ip, b = int(p2[0]), int(p2[1])
    u, t = params.u, params.t
    big_r = _spec_radius(params)
    le = lambda z: log_f_factor(i, z, params)  # noqa: E731
    leh = lambda w: -log_f_factor(ip, w, params)  # noqa: E731
    if contour is None:
        scale = _log_scale(le) + _log_scale(leh) + abs(a) + abs(b)
        contour = _auto_contour(u, i <= ip, scale, big_r)
    contour.check(u, i, ip, big_r)
    vals, _ = _converged_block(le, leh, lambda x: g_propagator(x, u, t, acc), contour, [a], [b], acc)
    return float(vals[0, 0])


# ---------------------------------------------------------------------------
# discrete finite-temperature Bessel kernel

def _fermi_weights(lam_vals, u: float, t: float):
    """``1 / (1 + t^{-1} u^{l})`` at ``l = lam - 1/2``."""
    ell = np.asarray(lam_vals, dtype=float) - 0.5
    if u == 0.0:
        return (ell > 0).astype(float)
    return special.expit(math.log(t) - math.log(u) * ell)


def _bessel_cut(L: float) -> int:
    # orders above this are below ~1e-20 for argument 2L
    return int(math.ceil(2 * L + 12.0 * max(L, 1.0) ** (1.0 / 3.0) + 40))


def bessel_window(orders, L: float) -> np.ndarray:
    """``J_n(2L)`` for integer orders (negative allowed)."""
    n = np.asarray(orders)
    return special.jv(n.astype(float), 2.0 * L)


def _ell_range(a_min: int, a_max: int, L: float, u: float, t: float):
    ncut = _bessel_cut(L)
    hi = ncut - a_min + 1
    lo = -ncut - a_max
    if u > 0:
        r = -math.log(u)
        lo = max(lo, int(math.floor(-(45.0 + abs(math.log(t))) / r)))
    else:
        lo = max(lo, 0)
    return np.arange(lo, hi + 1)


def _ftb_bessel(params: CylindricPlancherelParams, a_vals, b_vals) -> np.ndarray:
    a_vals = np.asarray(a_vals)
    b_vals = np.asarray(b_vals)
    L, u, t = params.L, params.u, params.t
    lam = _ell_range(min(a_vals.min(), b_vals.min()), max(a_vals.max(), b_vals.max()), L, u, t)
    wts = _fermi_weights(lam, u, t)
    keep = wts > 1e-300
    lam, wts = lam[keep], wts[keep]
    # a + l = A + lam - 1 in stored integers; the table is Hankel, so evaluate
    # each order once
    lo = min(a_vals.min(), b_vals.min()) + lam[0] - 1
    hi = max(a_vals.max(), b_vals.max()) + lam[-1] - 1
    jn = bessel_window(np.arange(lo, hi + 1), L)
    ja = jn[a_vals[:, None] + lam[None, :] - 1 - lo]
    jb = ja if np.array_equal(a_vals, b_vals) else jn[b_vals[:, None] + lam[None, :] - 1 - lo]
    return (ja * wts[None, :]) @ jb.T


def _zeta_trapezoid(params: CylindricPlancherelParams, a: int, b: int, zeta0: float, acc: Accuracy,
                    n0: int = MIN_NODES) -> float:
    """``(1/2 pi i) int_{zeta0 - i pi}^{zeta0 + i pi} kappa(zeta) e^{-(a+b) zeta/2} I_{b-a}(4L sinh(zeta/2)) dzeta``."""
    u, t, L = params.u, params.t, params.L
    # a + b in half-integer units is A + B - 1
    s_ab = a + b - 1
    d = b - a
    n = n0
    prev = None
    while n <= MAX_NODES:
        theta = -math.pi + 2 * math.pi * (np.arange(n) + 0.5) / n
        zeta = zeta0 + 1j * theta
        arg = 4 * L * np.sinh(zeta / 2)
        with np.errstate(all="ignore"):
            log_i = np.log(special.ive(float(abs(d)), arg)) + np.abs(arg.real)
        vals = np.exp(log_i - 0.5 * s_ab * zeta) * kappa_zeta(zeta, u, t, check=False)
        cur = float(np.mean(vals).real)
        if prev is not None and abs(cur - prev) <= acc.rel_tol * max(1.0, abs(cur)) + 1e-15:
            return cur
        prev = cur
        n *= 2
    raise NonConvergent("zeta contour integral not converged")


def _zeta0(params, a: int, b: int) -> float:
    r = params.r
    scale = 2 * params.L + abs(a + b) / 2 + 1
    return min(r / 2, 10.0 / scale)


def ftb_kernel(params: CylindricPlancherelParams, a: int, b: int, method: str = "bessel_sum",
               acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Discrete finite-temperature Bessel kernel ``K(a, b)`` (stored sites).

    Methods: ``bessel_sum`` (Fermi-weighted bilinear Bessel sum), ``contour``
    (double contour on circles), ``zeta_contour`` (single contour with a
    modified Bessel function, ``u > 0``), ``residue_split`` (pole at
    ``zeta = r`` plus a contour at ``Re zeta = 3r/2``, ``u > 0``).
    """
    a, b = int(a), int(b)
    if method == "bessel_sum":
        return float(_ftb_bessel(params, [a], [b])[0, 0])
    if method == "contour":
        return float(ftb_kernel_matrix(params, [a], [b], "contour", acc).entries[0, 0])
    if params.u == 0.0:
        raise DomainError(f"method {method} needs u > 0")
    if method == "zeta_contour":
        return _zeta_trapezoid(params, a, b, _zeta0(params, a, b), acc)
    if method == "residue_split":
        t1, t2 = residue_split_terms(params, a, b, acc)
        return t1 + t2
    raise DomainError(f"unknown method {method}")


def residue_split_terms(params: CylindricPlancherelParams, a: int, b: int, acc: Accuracy = DEFAULT_ACCURACY):
    """``(T1, T2)`` with ``K = T1 + T2``: the residue at ``zeta = r`` and the shifted contour.

    ``T1 = t e^{-(a+b) r/2} I_{b-a}(4L sinh(r/2))``; the condition number of
    ``T2`` grows like ``e^{3 L r - 3 (a+b) r / 4}``, see :func:`residue_split_amplification`.
    """
    r, L, t = params.r, params.L, params.t
    g = 4 * L * math.sinh(r / 2)
    s_ab = a + b - 1
    t1 = math.exp(math.log(t) + float(bessel_i_log(b - a, g)) - 0.5 * s_ab * r)
    t2 = _zeta_trapezoid(params, a, b, 1.5 * r, acc)
    return t1, t2


def residue_split_amplification(params: CylindricPlancherelParams, a: int, b: int) -> float:
    """Log of the largest integrand value on the shifted contour (roundoff scale of T2)."""
    r, L = params.r, params.L
    return 4 * L * math.sinh(0.75 * r) - 0.75 * (a + b - 1) * r + math.log(math.pi / r)


def ftb_kernel_matrix(params: CylindricPlancherelParams, rows, cols=None, method: str = "bessel_sum",
                      acc: Accuracy = DEFAULT_ACCURACY) -> KernelMatrix:
    """Kernel matrix on stored sites ``rows x cols`` (``cols`` defaults to ``rows``)."""
    rows = [int(x) for x in rows]
    cols = rows if cols is None else [int(x) for x in cols]
    meta = {"model": "ftb", "method": method, "params": params.to_json()}
    if method == "bessel_sum":
        ent = _ftb_bessel(params, rows, cols)
    elif method == "contour":
        L, u, t = params.L, params.u, params.t
        scale = 4 * L + max(abs(x) for x in rows) + max(abs(x) for x in cols)
        cs = _auto_contour(u, True, scale, math.inf)
        ent, info = _converged_block(lambda z: L * (z - 1 / z), lambda w: -L * (w - 1 / w),
                                     lambda x: g_propagator(x, u, t, acc), cs, rows, cols, acc)
        meta.update(radius_z=cs.radius_z, radius_w=cs.radius_w, **info)
    else:
        ent = np.array([[ftb_kernel(params, a, b, method, acc) for b in cols] for a in rows])
    return KernelMatrix([(1, a) for a in rows], [(1, b) for b in cols], ent, meta)


def ftb_trace_tail(params: CylindricPlancherelParams, m: int) -> float:
    """``sum_{i >= m} K(i, i)`` (stored sites) from Bessel tail sums.

    ``sum_{i>=m} K(i,i) = sum_l w_l S(m + l)`` with ``S(N) = sum_{n >= N} J_n(2L)^2``.
    """
    L, u, t = params.L, params.u, params.t
    ncut = _bessel_cut(L)
    orders = np.arange(-ncut, ncut + 1)
    j2 = bessel_window(orders, L) ** 2
    tail = np.cumsum(j2[::-1])[::-1]  # tail[k] = S(orders[k])
    lam = _ell_range(m, m, L, u, t)
    lam = lam[lam - 1 + m <= ncut]
    wts = _fermi_weights(lam, u, t)
    n0 = m + lam - 1
    s = np.where(n0 < -ncut, 1.0, tail[np.clip(n0 + ncut, 0, len(tail) - 1)])
    return float(np.sum(wts * s))


# ---------------------------------------------------------------------------
# extended kernel of the stationary process

def extended_kernel(beta: float, theta: float, t: float, p1, p2, method: str = "bessel_sum",
                    acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Space-time kernel ``K(b, k; b', k')`` with ``p = (time b, stored site)``.

    For ``b <= b'``: ``sum_l J_{k+l} J_{k'+l} e^{(b-b') l} / (1 + t^{-1} e^{-beta l})``;
    for ``b > b'``: ``-sum_l J_{k+l} J_{k'+l} e^{(b-b') l} / (1 + t e^{beta l})``
    (Bessel argument ``2 theta``).  ``method='contour'`` evaluates the
    double contour integral instead.
    """
    b, a = float(p1[0]), int(p1[1])
    bp, ap = float(p2[0]), int(p2[1])
    if not (0 <= b < beta and 0 <= bp < beta):
        raise DomainError("times must lie in [0, beta)")
    if beta <= 0 or theta <= 0 or t <= 0:
        raise DomainError("beta, theta and t must be positive")
    if method == "contour":
        return _extended_contour(beta, theta, t, b, a, bp, ap, acc)
    if method != "bessel_sum":
        raise DomainError(f"unknown method {method}")
    ncut = _bessel_cut(theta)
    lo = -ncut - max(a, ap)
    hi = ncut - min(a, ap) + 1
    lam = np.arange(lo, hi + 1)
    ell = lam - 0.5
    lt = math.log(t)
    if b <= bp:
        logw = (b - bp) * ell + special.log_expit(lt + beta * ell)
        sign = 1.0
    else:
        logw = (b - bp) * ell + special.log_expit(-lt - beta * ell)
        sign = -1.0
    keep = logw > -745
    lam, logw = lam[keep], logw[keep]
    ja = bessel_window(a + lam - 1, theta)
    jb = bessel_window(ap + lam - 1, theta)
    return float(sign * np.sum(ja * jb * np.exp(logw)))


def _extended_contour(beta, theta, t, b, a, bp, ap, acc):
    # K = e^{(b-b')/2} [z^A w^{-B}] e^{theta(z - 1/z)} / e^{theta(w - 1/w)} g(e^{b'-b} z/w)
    u = math.exp(-beta)
    shift = bp - b
    # need e^{shift} |z/w| in (1, e^beta) for b <= b', in (e^{-beta}, 1) otherwise
    target = beta / 2 if b <= bp else -beta / 2
    gap = target - shift
    scale = 4 * theta + abs(a) + abs(ap)
    gap = math.copysign(min(abs(gap), 10.0 / scale), gap) if gap else 0.0
    if not (0 < gap + shift < beta if b <= bp else -beta < gap + shift < 0):
        # the gap was shrunk for conditioning; keep the ratio inside the annulus
        gap = (min(beta / 4, 10.0 / scale) if b <= bp else -min(beta / 4, 10.0 / scale)) - shift
    n0 = MIN_NODES
    dist = min(abs(gap + shift), beta - abs(gap + shift))
    while n0 < MAX_NODES and n0 * min(dist, 1.0) < 40.0:
        n0 *= 2
    cs = ContourSpec(math.exp(gap / 2), math.exp(-gap / 2), n0)
    vals, _ = _converged_block(lambda z: theta * (z - 1 / z), lambda w: -theta * (w - 1 / w),
                               lambda x: g_propagator(math.exp(shift) * x, u, t, acc), cs, [a], [ap], acc)
    return float(math.exp(-shift / 2) * vals[0, 0])


# ---------------------------------------------------------------------------
# Frobenius n-point formula

def correlator_product(zs, ws, u: float, t: float | None = None, acc: Accuracy = DEFAULT_ACCURACY):
    """``<psi(z_1) psi*(w_1) ... psi(z_n) psi*(w_n)>`` without the ``sqrt(prod w / prod z)`` prefactor.

    Canonical ensemble when ``t is None``, grand canonical otherwise.  Arrays
    broadcast over the leading axes; the last axis indexes ``1..n``.
    """
    zs = np.asarray(zs, dtype=complex)
    ws = np.asarray(ws, dtype=complex)
    n = zs.shape[-1]
    qq = 1.0 if u == 0 else pochhammer_inf(u, u, acc).real

    def th(x):
        return 1.0 - x if u == 0 else theta_mult(x, u, acc)

    num = qq ** (2 * n) * np.ones(zs.shape[:-1], dtype=complex)
    den = np.ones_like(num)
    for i in range(n):
        for j in range(n):
            if i < j:
                num = num * th(zs[..., j] / zs[..., i]) * th(ws[..., j] / ws[..., i])
            if i <= j:
                den = den * th(ws[..., j] / zs[..., i])
            else:
                den = den * th(zs[..., i] / ws[..., j])
    out = num / den
    if t is not None and u > 0:
        ratio = np.prod(zs, axis=-1) / np.prod(ws, axis=-1)
        out = out * theta3(t * ratio, u, acc) / theta3(t, u, acc)
    return out


def correlator_det(zs, ws, u: float, t: float, acc: Accuracy = DEFAULT_ACCURACY):
    """``det g(z_i / w_j)``: the Wick side of the Frobenius identity (same normalization)."""
    zs = np.asarray(zs, dtype=complex)
    ws = np.asarray(ws, dtype=complex)
    mat = g_propagator(zs[:, None] / ws[None, :], u, t, acc)
    return complex(np.linalg.det(mat))


def frobenius_npoint(params: PeriodicSchurParams, U: Sequence, shift_mixed: bool = True,
                     acc: Accuracy = DEFAULT_ACCURACY, max_points: int = 1 << 28) -> float:
    """n-point correlation from the correlator product formula by a 2n-fold trapezoid sum.

    Variables ``z_1, w_1, ..., z_n, w_n`` sit on nested circles of
    equally spaced log-radii inside an annulus of ratio ``1/u``; the
    coefficient ``[prod z_l^{A_l} w_l^{-A_l}]`` is extracted from the sampled
    product, with node counts doubled until two refinements agree.
    """
    pts = sorted((int(i), int(m)) for i, m in U)
    n = len(pts)
    if n == 0:
        return 1.0
    if n > 4:
        raise LimitExceeded("frobenius_npoint supports at most 4 points")
    u, t = params.u, params.t
    r = _r_of(u)
    big_r = _spec_radius(params)
    nv = 2 * n
    delta = min(r / nv, 0.5)
    if math.isfinite(big_r):
        delta = min(delta, 1.8 * math.log(big_r) / (nv - 1))
    logr = np.array([(nv - 1) / 2 * delta - p * delta for p in range(nv)])
    qq = 1.0 if u == 0 else pochhammer_inf(u, u, acc).real

    def th(x):
        return 1.0 - x if u == 0 else theta_mult(x, u, acc)

    def evaluate(nodes):
        om = np.exp(2j * np.pi * np.arange(nodes) / nodes)
        # per-variable tables: F factor times monomial
        tabs = []
        for p in range(nv):
            slot, m = pts[p // 2]
            v = np.exp(logr[p]) * om
            lf = log_f_factor(slot, v, params)
            if p % 2 == 0:
                tabs.append(np.exp(lf - m * np.log(v)))
            else:
                tabs.append(np.exp(-lf + m * np.log(v)))
        # pair tables indexed by (j_q - j_p) mod nodes
        pair = {}
        for p in range(nv):
            for q in range(p + 1, nv):
                x = np.exp(logr[q] - logr[p]) * om
                pair[(p, q)] = th(x)
        gt = None
        if shift_mixed and u > 0:
            tot = sum(logr[p] * (1 if p % 2 == 0 else -1) for p in range(nv))
            gt = theta3(t * np.exp(tot) * om, u, acc) / theta3(t, u, acc)
        total = 0.0 + 0.0j
        lead = 1
        while nodes ** (nv - lead) > (1 << 20) and lead < nv - 1:
            lead += 1
        rest = nv - lead
        grid = np.indices((nodes,) * rest).reshape(rest, -1)
        for head in np.ndindex(*((nodes,) * lead)):
            idx = np.concatenate([np.repeat(np.array(head)[:, None], grid.shape[1], axis=1), grid])
            val = np.ones(grid.shape[1], dtype=complex)
            for p in range(nv):
                val *= tabs[p][idx[p]]
            for (p, q), tab in pair.items():
                d = (idx[q] - idx[p]) % nodes
                # variables p < q: same type in numerator, mixed type in denominator
                if p % 2 == q % 2:
                    val *= tab[d]
                elif p % 2 == 0:  # z_i then w_j with i <= j
                    val /= tab[d]
                else:  # w_j then z_i with i > j: theta_u(z_i / w_j)
                    val /= tab[d]
            if gt is not None:
                s = sum(idx[p] * (1 if p % 2 == 0 else -1) for p in range(nv)) % nodes
                val *= gt[s]
            total += val.sum()
        return (qq ** (2 * n) * total / nodes**nv).real

    # the error decays like e^{-N delta}, so after a doubling it is about the
    # square of the observed change (relative to the value's scale)
    nodes = 8
    while nodes * delta < 5:
        nodes *= 2
    prev = evaluate(nodes)
    while True:
        nodes *= 2
        if nodes**nv > max_points:
            raise NonConvergent("Frobenius n-point integral exceeds the point budget")
        cur = evaluate(nodes)
        scale = max(1.0, abs(cur))
        diff = abs(cur - prev) / scale
        if min(diff, diff * diff) <= max(acc.rel_tol, 1e-10):
            return float(cur)
        prev = cur


# ---------------------------------------------------------------------------
# bulk limit

def bulk_kernel(tau: float, D: int, gamma: float, tol: float = 1e-14) -> float:
    """``(1/2 pi) int_{-pi}^{pi} e^{i D phi} / (1 + e^{tau - 2 gamma cos phi}) dphi``."""
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    n = 64
    prev = None
    while n <= MAX_NODES:
        phi = -math.pi + 2 * math.pi * np.arange(n) / n
        vals = np.exp(1j * D * phi) * special.expit(2 * gamma * np.cos(phi) - tau)
        cur = np.mean(vals)
        if prev is not None and abs(cur - prev) < tol:
            if abs(cur.imag) > 1e-12:
                raise NonConvergent("bulk kernel has an imaginary part")
            return float(cur.real)
        prev = cur
        n *= 2
    raise NonConvergent("bulk kernel quadrature did not converge")


def bulk_density(tau: float, gamma: float) -> float:
    """Limiting one-point density ``rho(tau)``."""
    return bulk_kernel(tau, 0, gamma)
