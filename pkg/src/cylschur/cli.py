"""Command-line interface: ``cylschur {falpha,kernel,sample,verify}``.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numerical
non-convergence.  Every output starts with ``#`` provenance lines.
"""
from __future__ import annotations

import json
import math
import sys

import click
import numpy as np

from . import __version__
from .errors import CylSchurError, DomainError, NonConvergent
from .fredholm import f_alpha_table
from .kernels import KernelMatrix, extended_kernel, ftb_kernel_matrix, kernel_matrix_general
from .measures import CylindricPlancherelParams, PeriodicSchurParams, StrictPeriodicParams
from .partitions import Specialization, StrictSpecialization
from .sampling import RngState, sample_cylindric_plancherel
from .strict_kernels import strict_kernel_matrix

EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_NONCONVERGENT = 3


def _provenance(command: str, params: dict) -> str:
    return "# " + json.dumps({"program": "cylschur", "version": __version__, "command": command,
                              "params": params}, sort_keys=True, default=str) + "\n"


def _emit(text: str, out: str | None):
    if out in (None, "-"):
        click.echo(text, nl=False)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _half_integer(text: str) -> int:
    """Parse a half-integer such as ``-2.5`` into the stored integer ``k + 1/2``."""
    v = float(text) + 0.5
    if v != math.floor(v):
        raise click.BadParameter(f"{text} is not a half-integer")
    return int(v)


def _points(text: str, half: bool = True) -> list:
    """``"1:-0.5,2:1.5"`` -> ``[(1, 0), (2, 2)]`` (``half=False`` keeps integers)."""
    out = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        try:
            slot, site = item.split(":")
            out.append((int(slot), _half_integer(site) if half else int(site)))
        except ValueError as exc:
            raise click.BadParameter(f"bad point {item!r}; expected slot:site") from exc
    return out


def _alpha(text: str) -> float:
    if str(text).lower() in ("inf", "infinity"):
        return math.inf
    try:
        a = float(text)
    except ValueError as exc:
        raise click.BadParameter("alpha must be a positive number or 'inf'") from exc
    if not a > 0:
        raise click.BadParameter("alpha must be positive")
    return a


def _specs(text: str, cls):
    try:
        raw = json.loads(text) if isinstance(text, str) else text
        return tuple((cls.from_json(p), cls.from_json(m)) for p, m in raw)
    except (ValueError, TypeError, AttributeError) as exc:
        raise click.BadParameter(f"specs must be a JSON list of [plus, minus] objects: {exc}") from exc


class _Group(click.Group):
    """Maps library exceptions onto the documented exit codes."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except NonConvergent as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(EXIT_NONCONVERGENT)
        except (DomainError, CylSchurError) as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(EXIT_USAGE)


@click.group(cls=_Group)
@click.version_option(__version__, prog_name="cylschur")
@click.option("--config", type=click.Path(exists=True, dir_okay=False),
              help="JSON file of option values; command-line flags take precedence.")
@click.option("--threads", type=click.IntRange(1), default=None,
              help="Thread-count hint (recorded; linear algebra uses the BLAS default).")
@click.pass_context
def main(ctx, config, threads):
    """Cylindric Schur process toolkit."""
    ctx.ensure_object(dict)
    ctx.obj["threads"] = threads
    if config:
        with open(config) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise click.BadParameter("config must hold a JSON object", param_hint="--config")
        # either {"falpha": {...}, "kernel": {...}} or one flat dict for the invoked command
        ctx.default_map = {name: cfg.get(name, cfg) for name in main.commands}


@main.command()
@click.option("--alpha", default="inf", show_default=True, help="Positive number or 'inf'.")
@click.option("--s-min", type=float, default=-6.0, show_default=True)
@click.option("--s-max", type=float, default=4.0, show_default=True)
@click.option("--s-step", type=float, default=0.5, show_default=True)
@click.option("--tol", type=float, default=1e-7, show_default=True, help="Node-doubling tolerance.")
@click.option("--out", default="-", show_default=True)
@click.option("--gnuplot", is_flag=True, help="Also write OUT.gp, a plotting script for the table.")
def falpha(alpha, s_min, s_max, s_step, tol, out, gnuplot):
    """Table of F_alpha(s) = det(I - M_alpha) on (s, inf)."""
    a = _alpha(alpha)
    if s_step <= 0 or s_max < s_min:
        raise click.BadParameter("need s_step > 0 and s_max >= s_min")
    if gnuplot and out in (None, "-"):
        raise click.UsageError("--gnuplot needs --out FILE")
    s_values = np.round(np.arange(s_min, s_max + 0.5 * s_step, s_step), 12)
    rows = f_alpha_table(s_values, a, tol=tol)
    text = _provenance("falpha", {"alpha": alpha, "s_min": s_min, "s_max": s_max,
                                  "s_step": s_step, "tol": tol})
    text += "s,F_alpha,est_error\n" + "".join(f"{s:g},{f:.15g},{e:.3g}\n" for s, f, e in rows)
    _emit(text, out)
    if gnuplot:
        with open(out + ".gp", "w") as fh:
            fh.write(f"# gnuplot script for {out}\nset datafile separator ','\nset key left top\n"
                     f"set xlabel 's'\nset ylabel 'F_alpha(s)'\n"
                     f"plot '{out}' using 1:2 skip 2 with lines title 'alpha = {alpha}'\n")


@main.command()
@click.option("--model", type=click.Choice(["general", "ftb", "extended", "strict"]), required=True)
@click.option("--u", type=float, default=0.5, show_default=True)
@click.option("--t", type=float, default=1.0, show_default=True)
@click.option("--gamma", type=float, default=1.0, show_default=True, help="ftb only.")
@click.option("--lo", default=None, help="ftb: lowest half-integer site of the window.")
@click.option("--hi", default=None, help="ftb: highest half-integer site of the window.")
@click.option("--specs", default=None, help="general/strict: JSON list of [plus, minus] specializations.")
@click.option("--points", default=None,
              help="general: slot:half-integer; strict: slot:positive integer; extended: time:half-integer.")
@click.option("--beta", type=float, default=None, help="extended: time step scale.")
@click.option("--theta", type=float, default=None, help="extended: Plancherel parameter.")
@click.option("--method", default="bessel_sum", show_default=True,
              help="ftb: bessel_sum|contour|zeta_contour|residue_split; extended: bessel_sum|contour.")
@click.option("--out", default="-", show_default=True)
def kernel(model, u, t, gamma, lo, hi, specs, points, beta, theta, method, out):
    """Kernel matrix as CSV (sites printed as half-integers)."""
    opts = {"model": model, "u": u, "t": t, "method": method}
    if model == "ftb":
        if lo is None or hi is None:
            raise click.UsageError("ftb needs --lo and --hi")
        sites = list(range(_half_integer(lo), _half_integer(hi) + 1))
        km = ftb_kernel_matrix(CylindricPlancherelParams(u, gamma, t), sites, method=method)
        opts.update(gamma=gamma, lo=lo, hi=hi)
    elif model in ("general", "strict"):
        if points is None:
            raise click.UsageError(f"{model} needs --points")
        if model == "general":
            sp = _specs(specs or '[[{}, {}]]', Specialization)
            km = kernel_matrix_general(PeriodicSchurParams(u, t, sp), _points(points))
        else:
            sp = _specs(specs or '[[{}, {}]]', StrictSpecialization)
            km = strict_kernel_matrix(StrictPeriodicParams(u, t, sp), _points(points, half=False))
        opts.update(specs=json.loads(specs) if specs else None, points=points)
    else:
        if beta is None or theta is None or points is None:
            raise click.UsageError("extended needs --beta, --theta and --points")
        pts = []
        for item in points.split(","):
            b, k = item.split(":")
            pts.append((float(b), _half_integer(k)))
        ent = np.array([[extended_kernel(beta, theta, t, p, q, method=method) for q in pts] for p in pts])
        km = KernelMatrix(pts, pts, ent, {"model": "extended", "beta": beta, "theta": theta, "t": t})
        opts.update(beta=beta, theta=theta, points=points)
    _emit(_provenance("kernel", opts) + km.to_csv(), out)


@main.command()
@click.option("--u", type=float, required=True)
@click.option("--gamma", type=float, required=True)
@click.option("--t", type=float, default=1.0, show_default=True)
@click.option("--n-samples", type=click.IntRange(1), default=1, show_default=True)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
@click.option("--out", default="-", show_default=True)
def sample(u, gamma, t, n_samples, seed, out):
    """Exact samples (lambda, c) of the shift-mixed cylindric Plancherel measure as JSON lines."""
    recs = sample_cylindric_plancherel(CylindricPlancherelParams(u, gamma, t), n_samples, RngState(seed))
    text = _provenance("sample", {"u": u, "gamma": gamma, "t": t, "n_samples": n_samples, "seed": seed})
    text += "".join(json.dumps(r.to_json(), sort_keys=True) + "\n" for r in recs)
    _emit(text, out)


@main.command()
@click.option("--suite", type=click.Choice(["identities", "oracles", "edge", "bulk", "gumbel",
                                            "strict", "sampling", "all"]), default="identities",
              show_default=True)
@click.option("--tol-scale", type=float, default=1.0, show_default=True,
              help="Multiplies every tolerance (runtime limits excepted).")
@click.option("--report", default=None, help="Write the per-check JSON report here.")
def verify(suite, tol_scale, report):
    """Run acceptance checks; exit status 1 if any fails."""
    from .verify import run_suite

    if not tol_scale > 0:
        raise click.BadParameter("tol-scale must be positive")
    results = run_suite(suite, tol_scale, report=lambda r: click.echo(r.line()))
    if report:
        with open(report, "w") as fh:
            fh.write(_provenance("verify", {"suite": suite, "tol_scale": tol_scale}))
            json.dump([r.to_json() for r in results], fh, indent=1)
            fh.write("\n")
    ok = all(r.passed for r in results)
    click.echo(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    if not ok:
        sys.exit(EXIT_VERIFY)


if __name__ == "__main__":  # pragma: no cover
    main()
