"""Command-line entry point: ``mixsim run|check|cascade|convergence``.

Exit status is 0 on success, 1 when a run fails or a check does not pass,
and 2 for configuration errors.
"""
import argparse
import csv
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

from . import config as config_mod
from .constitutive import check_hypotheses
from .errors import ConfigurationError, MixsimError
from .poisson import mms_study
from .scenarios import build_config, sampler_from
from .stepper import RESIDUAL_TERMS, cascade_study, dt_study, h_study, run

logger = logging.getLogger("mixsim")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _fmt(x):
    if isinstance(x, bool):
        return "yes" if x else "no"
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def format_table(header, rows):
    """Aligned plain-text table; floats carry 17 significant digits."""
    cells = [list(header)] + [[_fmt(v) for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells)


def write_table_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    return path


def _emit(args, title, header, rows, name):
    path = write_table_csv(Path(args.out) / name, header, rows)
    if not args.quiet:
        print(title)
        print(format_table(header, rows))
        print(f"table written to {path}")


def _overrides(args):
    return config_mod.load(args.config) if args.config else {}


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


# subcommands ---------------------------------------------------------------


def cmd_run(args):
    cfg, vals = build_config(_overrides(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "resolved.cfg").write_text(config_mod.dump(vals))
    logger.info("scenario %s: %d steps of dt = %.6g on a %dx%d grid", cfg.scenario, cfg.steps, cfg.dt, cfg.grid.nx, cfg.grid.ny)
    res = run(cfg, out_dir=out)
    steps = res.steps
    rows = [[k, max(getattr(s, k) for s in steps)] for k in RESIDUAL_TERMS]
    rows += [[f"min cell {k}", min(s.P_min[k] for s in steps)] for k in steps[0].P_min]
    rows += [
        ["min c", min(s.min_c for s in steps)],
        ["min e", min(s.min_e for s in steps)],
        ["max simplex drift", max(s.simplex_drift for s in steps)],
        ["max Picard iterations", max(s.picard_iters for s in steps)],
        ["cut-offs ever active", res.cutoff_ever_active],
    ]
    rows += [[f"monitor sup {k}", v] for k, v in sorted(res.monitor.sup.items())]
    rows += [[f"monitor integral {k}", v] for k, v in sorted(res.monitor.integral.items())]
    _emit(args, f"run summary (t = {res.final_state.t:.17g})", ["quantity", "value"], rows, "summary.csv")
    if not res.monitor.finite:
        print("error: a monitored quantity is not finite", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_check(args):
    cfg, vals = build_config(_overrides(args))
    sampler = sampler_from(vals, seed=args.seed)
    report = check_hypotheses(cfg.model, bc=cfg.bc, sampler=sampler, grid=cfg.grid, state=cfg.initial)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "hypotheses.csv").write_text(report.to_csv())
    (out / "hypotheses.txt").write_text(report.to_text())
    if not args.quiet:
        print(report.to_text())
        print(f"report written to {out / 'hypotheses.csv'}")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_cascade(args):
    cfg, _ = build_config(_overrides(args))
    if not (args.delta or args.epsilon or args.k):
        raise ConfigurationError("give at least one of --delta, --epsilon, --k")
    for name, seq in (("delta", args.delta), ("epsilon", args.epsilon)):
        if any(x < 0 for x in seq):
            raise ConfigurationError(f"--{name} values must be nonnegative")
    rows = cascade_study(cfg, args.delta, args.epsilon, args.k)
    table = [[r.parameter, r.value, r.diff_prev, r.cutoff_active] for r in rows]
    _emit(args, "cascade study", ["parameter", "value", "l2_diff_prev", "cutoff_active"], table, "cascade.csv")
    return EXIT_OK


def _dt_table(args, cfg):
    tab = dt_study(cfg, args.levels)
    header = ["level", "dt"] + [f"{k}" for k in RESIDUAL_TERMS] + [f"order_{k}" for k in RESIDUAL_TERMS]
    rows = []
    for i, dt in enumerate(tab.dts):
        orders = [tab.orders[k][i - 1] if i else math.nan for k in RESIDUAL_TERMS]
        rows.append([i, dt] + [tab.residuals[k][i] for k in RESIDUAL_TERMS] + orders)
    return "time-step refinement (time-integrated absolute residuals)", header, rows


def _h_table(args, overrides):
    base, vals = build_config(overrides)
    ny_scale = 2 if base.grid.dim == 2 else 1

    def make(level):
        o = dict(overrides)
        o["grid.nx"] = vals["grid.nx"] * 2**level
        if base.grid.dim == 2:
            o["grid.ny"] = vals["grid.ny"] * ny_scale**level
        o["time.dt"] = base.dt / 4**level
        o.pop("time.t_end", None)
        o["time.steps"] = base.steps * 4**level
        cfg, _ = build_config(o)
        return replace(cfg, output_every=cfg.steps or 1)

    tab = h_study(make, args.levels)
    rows = []
    for i, (n, dt) in enumerate(zip(tab.sizes, tab.dts)):
        d = tab.differences[i] if i < len(tab.differences) else math.nan
        o = tab.orders[i - 1] if 0 < i <= len(tab.orders) else math.nan
        rows.append([i, n, dt, d, o])
    return "grid refinement (distance to the next finer level)", ["level", "nx", "dt", "l2_diff_next", "order"], rows


def _poisson_table(args, vals):
    sizes = [16 * 2**k for k in range(args.levels)]
    lev = mms_study(sizes, method=vals["solver.method"])
    rows = [[r.n, r.h, r.error_l2, r.order] for r in lev]
    return "potential solver manufactured-solution study", ["nx", "h", "error_l2", "order"], rows


def cmd_convergence(args):
    overrides = _overrides(args)
    if args.levels < 2:
        raise ConfigurationError("--levels must be at least 2")
    if args.kind == "dt":
        cfg, _ = build_config(overrides)
        title, header, rows = _dt_table(args, cfg)
    elif args.kind == "h":
        title, header, rows = _h_table(args, overrides)
    else:
        _, vals = build_config(overrides)
        title, header, rows = _poisson_table(args, vals)
    _emit(args, title, header, rows, f"convergence_{args.kind}.csv")
    return EXIT_OK


# entry point ---------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file (defaults apply when omitted)")
    common.add_argument("--out", default="runs", help="output directory (default: runs)")
    common.add_argument("--seed", type=int, default=0, help="seed for the hypothesis sampler")
    common.add_argument("--quiet", action="store_true", help="suppress tables and progress logging")

    p = argparse.ArgumentParser(prog="mixsim", description="Charged multicomponent non-Newtonian fluid simulator.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run a simulation and write diagnostics and snapshots")
    sub.add_parser("check", parents=[common], help="validate the constitutive hypotheses of the configured model")
    c = sub.add_parser("cascade", parents=[common], help="sweep the cut-off parameters delta, epsilon and k")
    c.add_argument("--delta", type=_floats, default=[], help="comma-separated delta values")
    c.add_argument("--epsilon", type=_floats, default=[], help="comma-separated epsilon values")
    c.add_argument("--k", type=_floats, default=[], help="comma-separated convection truncation levels")
    v = sub.add_parser("convergence", parents=[common], help="time-step, grid or potential-solver refinement study")
    v.add_argument("--kind", choices=("dt", "h", "poisson"), default="dt")
    v.add_argument("--levels", type=int, default=3)
    return p


COMMANDS = {"run": cmd_run, "check": cmd_check, "cascade": cmd_cascade, "convergence": cmd_convergence}


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.seed < 0 or args.seed >= 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MixsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
