"""Command-line front end: ``gim1n {exact,sigma,asympt,simulate,compare,sweep}``.

Every report starts with ``schema_version`` and the fully resolved run
configuration, followed by either a single record or a table of rows.
Exit codes: 0 success, 2 usage error, 3 request outside a formula's
regime (or degenerate model), 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from gim1n import _backend
from gim1n.asympt import (
    Regime,
    Source,
    approx_critical,
    approx_subcritical,
    classify,
    heavy_traffic_approx,
    limit_supercritical,
    near_critical_approx,
    reciprocal_increment,
)
from gim1n.dist import format_dist, parse_dist
from gim1n.errors import GIM1Error, NumericalError, OutOfRegimeError, UnsupportedModelError
from gim1n.kernel import QueueSpec, solve_loss_table
from gim1n.roots import solve_sigma
from gim1n.sim import simulate

SCHEMA_VERSION = "1"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_REGIME = 3
EXIT_NUMERICAL = 4


class UsageError(ValueError):
    pass


def _n_range(text):
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError(f"expected START:STOP[:STEP], got {text!r}")
    try:
        start, stop, *rest = (int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-integer in range {text!r}") from None
    step = rest[0] if rest else 1
    if start < 0 or stop < start or step < 1:
        raise argparse.ArgumentTypeError(f"need 0 <= START <= STOP and STEP >= 1, got {text!r}")
    return list(range(start, stop + 1, step))


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gim1n", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dist", required=True,
                        help="interarrival law: exp:rate=L | erlang:k=K,rate=B | hyper:q=..;rates=.. | det:d=D")
    common.add_argument("--mu", type=float, default=1.0, help="service rate (default 1)")
    common.add_argument("--format", choices=("human", "csv", "json"), default="human")

    simopts = argparse.ArgumentParser(add_help=False)
    simopts.add_argument("--seed", type=int, default=0)
    simopts.add_argument("--warmup", type=_nonneg_int, default=None,
                         help="arrivals discarded per replication (default max(1e4, 50n))")
    simopts.add_argument("--workers", type=int, default=1)

    heavy = argparse.ArgumentParser(add_help=False)
    group = heavy.add_mutually_exclusive_group()
    group.add_argument("--epsilon", type=float, default=None, help="heavy-traffic eps with rho = 1 - eps")
    group.add_argument("--heavy", action="store_true", help="use the heavy-traffic scaling with eps = 1 - rho")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("exact", parents=[common], help="exact loss table p_0..p_n")
    p.add_argument("--n", type=_nonneg_int, required=True)
    sub.add_parser("sigma", parents=[common], help="root sigma and decay coefficient")
    p = sub.add_parser("asympt", parents=[common, heavy], help="regime and asymptotic estimates")
    p.add_argument("--n", type=_nonneg_int, required=True)
    p = sub.add_parser("simulate", parents=[common, simopts], help="Monte Carlo loss estimate")
    p.add_argument("--n", type=_nonneg_int, required=True)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--arrivals", type=int, default=10**6)
    p = sub.add_parser("compare", parents=[common, simopts, heavy], help="exact vs asymptotic vs simulated")
    p.add_argument("--n", type=_nonneg_int, nargs="+", required=True)
    p.add_argument("--reps", type=_nonneg_int, default=10, help="0 skips simulation")
    p.add_argument("--arrivals", type=int, default=10**5)
    p = sub.add_parser("sweep", parents=[common, simopts, heavy], help="compare rows over a range of n")
    p.add_argument("--n-range", type=_n_range, required=True, metavar="START:STOP[:STEP]")
    p.add_argument("--reps", type=_nonneg_int, default=0, help="0 skips simulation (default)")
    p.add_argument("--arrivals", type=int, default=10**5)
    return parser


def _resolve(args):
    """Validate arguments and return ``(queue, config)``."""
    try:
        model = parse_dist(args.dist)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not (math.isfinite(args.mu) and args.mu > 0):
        raise UsageError(f"--mu must be positive, got {args.mu}")
    ns = getattr(args, "n_range", None) or getattr(args, "n", None)
    if isinstance(ns, int):
        ns = [ns]
    queue = QueueSpec(model, args.mu, max(ns) if ns else 0)
    config = {
        "command": args.command,
        "dist": format_dist(model),
        "mu": args.mu,
        "rho": queue.rho,
        "format": args.format,
        "backend": _backend.NAME,
    }
    if ns is not None:
        config["n"] = ns if args.command in ("compare", "sweep") else ns[0]
    if hasattr(args, "reps"):
        if getattr(args, "reps", 0) and args.arrivals < 1:
            raise UsageError("--arrivals must be >= 1")
        if args.command == "simulate" and args.reps < 1:
            raise UsageError("--reps must be >= 1")
        config.update(reps=args.reps, arrivals=args.arrivals, seed=args.seed,
                      warmup=args.warmup, workers=args.workers)
    if hasattr(args, "epsilon"):
        eps = args.epsilon
        if args.heavy:
            eps = 1.0 - queue.rho
        if eps is not None and not (0.0 < eps < 1.0):
            raise UsageError(f"heavy-traffic eps must lie in (0, 1), got {eps!r} (rho = {queue.rho!r})")
        config["epsilon"] = eps
    return queue, config


def _cmd_exact(queue, config, args):
    table = solve_loss_table(queue)
    rows = [
        {"k": k, "tilde_pi": float(table.tilde_pi[k]), "pi": float(table.pi[k]),
         "p": float(table.p[k]), "log_p": float(table.log_p[k])}
        for k in range(queue.n + 1)
    ]
    summary = {
        "condition_flag": table.condition_flag.value,
        "cancellation_estimate": table.cancellation_estimate,
        "scaled": table.scaled,
        "p_n": float(table.p[queue.n]),
    }
    return {"summary": summary, "rows": rows}


def _cmd_sigma(queue, config, args):
    sol = solve_sigma(queue)
    return {"record": {"sigma": sol.sigma, "residual": sol.residual,
                       "decay_coeff": sol.decay_coeff, "iterations": sol.iterations}}


def _heavy(config, n):
    eps = config.get("epsilon")
    return None if eps is None else (eps, n)


def _primary_estimate(queue, n, regime, stats, config):
    """The single estimate ``compare`` reports for this regime."""
    if regime is Regime.SUBCRITICAL:
        return approx_subcritical(queue, n)
    if regime is Regime.CRITICAL:
        return approx_critical(queue, n)
    if regime is Regime.SUPERCRITICAL:
        return limit_supercritical(queue)
    if regime is Regime.HEAVY_TRAFFIC:
        return heavy_traffic_approx(config["epsilon"], n, stats.rho_m[1])
    return near_critical_approx(n, stats.rho_m[1])


def _estimate_row(est, kind="p_n"):
    return {"source": est.source.value, "kind": kind, "value": est.value,
            "conditions": ";".join(f"{name}:{ok}" for name, ok in est.conditions)}


def _cmd_asympt(queue, config, args):
    n = queue.n
    regime = classify(queue, _heavy(config, n))
    stats = queue.stats()
    rows = [_estimate_row(_primary_estimate(queue, n, regime, stats, config))]
    if regime is Regime.CRITICAL:
        rows.append({"source": Source.EQ36.value, "kind": "limit of n*p_n", "value": stats.rho_m[1] / 2.0,
                     "conditions": "rho2<inf:True"})
        rows.append({"source": Source.EQ313.value, "kind": "limit of 1/p_(n+1)-1/p_n",
                     "value": reciprocal_increment(queue), "conditions": "r0+r1<1:True"})
    elif regime in (Regime.HEAVY_TRAFFIC, Regime.NEAR_CRITICAL):
        try:
            rows.append(_estimate_row(approx_subcritical(queue, n)))
        except OutOfRegimeError:
            pass
    record = {"regime": regime.value, "rho": queue.rho, "rho2": stats.rho_m[1], "rho3": stats.rho_m[2]}
    return {"summary": record, "rows": rows}


def _cmd_simulate(queue, config, args):
    est = simulate(queue, args.arrivals, args.reps, args.seed, warmup=args.warmup, workers=args.workers)
    config["warmup"] = est.warmup
    return {"record": {"estimate": est.estimate, "std_error": est.std_error, "losses": est.losses,
                       "arrivals": est.arrivals, "replications": est.replications, "seed": est.seed}}


def compare_rows(queue, ns, config, reps=0, arrivals=0, seed=0, warmup=None, workers=1):
    """One row per buffer size: exact, asymptotic and (optionally) simulated loss."""
    table = solve_loss_table(queue.with_n(max(ns)))
    stats = queue.stats()
    rows = []
    for n in ns:
        exact = float(table.p[n])
        row = {"n": n, "exact": exact}
        qn = queue.with_n(n)
        regime = classify(qn, _heavy(config, n) if n >= 1 else None)
        row["regime"] = regime.value
        try:
            est = _primary_estimate(qn, n, regime, stats, config)
        except OutOfRegimeError as exc:
            row.update(asymptotic=None, asymptotic_source=exc.source, rel_err_asympt=None, note=str(exc))
        else:
            row.update(asymptotic=est.value, asymptotic_source=est.source.value,
                       rel_err_asympt=abs(est.value / exact - 1.0) if exact > 0 else None, note="")
        if reps:
            sim = simulate(qn, arrivals, reps, seed, warmup=warmup, workers=workers)
            diff = sim.estimate - exact
            z = diff / sim.std_error if sim.std_error > 0 else (0.0 if diff == 0 else None)
            row.update(simulated=sim.estimate, sim_std_error=sim.std_error, sim_z_score=z)
        else:
            row.update(simulated=None, sim_std_error=None, sim_z_score=None)
        rows.append(row)
    return rows


def _cmd_compare(queue, config, args):
    ns = args.n if args.command == "compare" else args.n_range
    rows = compare_rows(queue, ns, config, args.reps, args.arrivals, args.seed, args.warmup, args.workers)
    return {"rows": rows}


_COMMANDS = {
    "exact": _cmd_exact,
    "sigma": _cmd_sigma,
    "asympt": _cmd_asympt,
    "simulate": _cmd_simulate,
    "compare": _cmd_compare,
    "sweep": _cmd_compare,
}


def _cell(value):
    if isinstance(value, float):
        return repr(value)
    return "" if value is None else str(value)


def render(report: dict, fmt: str) -> str:
    """Serialise a report; floats keep their shortest round-trip form."""
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    out = io.StringIO()
    header = {"schema_version": report["schema_version"], **{f"config.{k}": v for k, v in report["config"].items()}}
    for block in ("summary", "record", "error"):
        header.update({f"{block}.{k}": v for k, v in report.get(block, {}).items()})
    rows = report.get("rows")
    if fmt == "csv":
        for key, value in header.items():
            out.write(f"# {key}={_cell(value)}\n")
        if rows:
            writer = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _cell(v) for k, v in row.items()})
        return out.getvalue()
    width = max(len(k) for k in header)
    for key, value in header.items():
        out.write(f"{key:<{width}}  {_cell(value)}\n")
    if rows:
        cols = list(rows[0])
        cells = [[_cell(r[c]) for c in cols] for r in rows]
        widths = [max(len(c), *(len(line[i]) for line in cells)) for i, c in enumerate(cols)]
        out.write("\n" + "  ".join(c.rjust(w) for c, w in zip(cols, widths)) + "\n")
        for line in cells:
            out.write("  ".join(v.rjust(w) for v, w in zip(line, widths)) + "\n")
    return out.getvalue()


def _error_block(exc):
    if isinstance(exc, UsageError):
        kind, code = "usage", EXIT_USAGE
    elif isinstance(exc, (OutOfRegimeError, UnsupportedModelError)):
        kind, code = "out-of-regime", EXIT_REGIME
    elif isinstance(exc, NumericalError):
        kind, code = "numerical", EXIT_NUMERICAL
    else:
        kind, code = "usage", EXIT_USAGE
    return {"kind": kind, "message": str(exc), "source": getattr(exc, "source", None)}, code


def run(args: argparse.Namespace, stdout=None) -> int:
    """Execute a parsed command, write the report, return the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    report = {"schema_version": SCHEMA_VERSION, "config": {"command": args.command}}
    code = EXIT_OK
    try:
        queue, config = _resolve(args)
        report["config"] = config
        report.update(_COMMANDS[args.command](queue, config, args))
    except (GIM1Error, ValueError) as exc:
        report["error"], code = _error_block(exc)
        print(f"gim1n: error: {exc}", file=sys.stderr)
    stdout.write(render(report, args.format))
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
