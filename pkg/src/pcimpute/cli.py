"""Command-line interface.

Exit codes: 0 success, 1 usage or configuration error, 2 inconclusive
diagnostic verdict, 3 numeric failure (no qualifying events).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .diagnostics import CONDITIONS, DEFAULT_K_EXPONENT, INCONCLUSIVE, trace, trend_report
from .errors import PCImputeError, UndefinedEstimateError
from .estimation import estimate_p, stagnation_frequency
from .imputation import ModelConfig
from .montecarlo import TABLE1_N, TABLE1_P, THETA_METHODS, table1, theta_compare, theta_surface
from .parallel import THREADS_ENV
from .processes import ARMAX, IID, MOVING_MAXIMA, ProcessConfig
from .seriesio import _atomic_write, read_series, write_series
from .theory import stagnation_probability

EXIT_OK, EXIT_USAGE, EXIT_INCONCLUSIVE, EXIT_NUMERIC = 0, 1, 2, 3

PROCESS_NAMES = {"iid": IID, "mm": MOVING_MAXIMA, "armax": ARMAX}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(float(v)) for v in text.split(",") if v.strip()]


def _add_process(p: argparse.ArgumentParser, required: bool = True, default: str | None = None) -> None:
    p.add_argument("--process", choices=sorted(PROCESS_NAMES), required=required, default=default)
    p.add_argument("--t", type=float, help="armax coefficient, 0 < t < 1")
    p.add_argument("--alpha", type=float, default=1.0, help="Frechet shape")
    p.add_argument("--scale", type=float, default=1.0, help="Frechet scale")


def _add_model(p: argparse.ArgumentParser, p_required: bool = True) -> None:
    _add_process(p)
    p.add_argument("--T", type=int, required=True, help="control period")
    p.add_argument("--p", type=float, required=p_required, default=None if p_required else 0.5,
                   help="availability probability")


def _add_threads(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threads", type=int, default=None, help=f"worker threads (default: ${THREADS_ENV} or 1)")


def _process(args) -> ProcessConfig:
    kind = PROCESS_NAMES[args.process]
    if kind == ARMAX:
        if args.t is None:
            raise UsageError("--t is required for --process armax")
        return ProcessConfig.armax(args.t, args.alpha, args.scale)
    if args.t is not None:
        raise UsageError("--t only applies to --process armax")
    if kind == IID:
        return ProcessConfig.iid(args.alpha, args.scale)
    return ProcessConfig.moving_maxima(args.alpha, args.scale)


def _model(args) -> ModelConfig:
    return ModelConfig(_process(args), args.T, args.p)


def _emit(text: str, out: str | None) -> None:
    if out:
        _atomic_write(Path(out), text)
    else:
        sys.stdout.write(text)


def _print_json(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    series = _model(args).simulate(args.n, args.seed)
    write_series(series, args.out, args.seed)
    _print_json({"out": str(args.out), "n": series.n, "imputed": int(series.imputed.sum()),
                 "controls": int(series.controls.size)})
    return EXIT_OK


def cmd_estimate_p(args) -> int:
    if args.input:
        series = read_series(args.input)
        if args.T is not None and args.T != series.T:
            raise UsageError(f"--T {args.T} does not match the file header T={series.T}")
    else:
        if args.process is None or args.T is None or args.p is None or args.n is None:
            raise UsageError("give --in PATH or all of --process, --T, --p, --n")
        series = _model(args).simulate(args.n, args.seed)
    res = estimate_p(series)
    freq, se = stagnation_frequency(series)
    # availability of non-control indices read off the mask, as a reference value
    free = [i for i in range(1, series.n + 1) if i % series.T]
    mask_p = float(series.u[free].mean()) if free else None
    _print_json({
        **res.to_dict(),
        "T": series.T,
        "stagnation_freq": freq,
        "stagnation_se": se,
        "stagnation_prob": stagnation_probability(series.p, series.T),
        "mask_p": mask_p,
    })
    return EXIT_OK


def cmd_table1(args) -> int:
    process = _process(args)
    res = table1(args.p_values, args.n_values, args.reps, args.T, args.seed, process, args.threads)
    _emit(res.to_csv(), args.out)
    if args.manifest:
        _atomic_write(Path(args.manifest), res.manifest_json() + "\n")
    return EXIT_OK


def cmd_theta(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    rep = theta_compare(_model(args), args.tau, args.n, args.reps, methods, args.seed, args.paths,
                        args.run_length, args.threads)
    _print_json(rep.to_dict())
    return EXIT_OK


def cmd_diagnose(args) -> int:
    tr = trace(args.condition, _model(args), args.n_grid, args.reps, args.seed, args.tau, args.s,
               args.k_exponent, args.threads)
    verdict = trend_report(tr)
    if args.out:
        _atomic_write(Path(args.out), tr.to_csv())
    _print_json({"verdict": verdict, "trace": tr.to_dict()})
    return EXIT_INCONCLUSIVE if verdict == INCONCLUSIVE else EXIT_OK


def cmd_surface(args) -> int:
    if args.t_grid:
        theta_x = [1.0 - t**args.alpha for t in args.t_grid]
    else:
        theta_x = args.theta_x_grid
    _emit(theta_surface(theta_x, args.p_grid, args.T).to_csv(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pcimpute", description="Periodically controlled imputation: simulation and extremes.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="simulate a series and write it as CSV + JSON sidecar")
    _add_model(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate-p", help="estimate p from stagnant blocks")
    p.add_argument("--in", dest="input")
    _add_process(p, required=False)
    p.add_argument("--T", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_estimate_p)

    p = sub.add_parser("table1", help="bias / sd / RMSE of p_hat over a (p, n) grid")
    _add_process(p, required=False, default="mm")
    p.add_argument("--T", type=int, default=2)
    p.add_argument("--p-values", type=_floats, default=list(TABLE1_P))
    p.add_argument("--n-values", type=_ints, default=list(TABLE1_N))
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--manifest")
    _add_threads(p)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("theta", help="extremal index: closed form, plug-in and runs")
    _add_model(p)
    p.add_argument("--tau", type=float, default=20.0)
    p.add_argument("--n", type=int, default=200_000)
    p.add_argument("--reps", type=int, default=200_000, help="plug-in replications")
    p.add_argument("--paths", type=int, default=100, help="paths pooled by the runs estimator")
    p.add_argument("--run-length", type=int)
    p.add_argument("--methods", default=",".join(THETA_METHODS))
    p.add_argument("--seed", type=int, default=0)
    _add_threads(p)
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("diagnose", help="trace an anti-clustering sum along an n-grid")
    p.add_argument("--condition", choices=CONDITIONS, required=True)
    _add_model(p, p_required=False)
    p.add_argument("--n-grid", type=_ints, default=[1000, 10_000, 100_000])
    p.add_argument("--reps", type=int, default=100_000)
    p.add_argument("--tau", type=float, default=20.0)
    p.add_argument("--s", type=int)
    p.add_argument("--k-exponent", type=float, default=DEFAULT_K_EXPONENT)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    _add_threads(p)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("surface", help="ARMAX theta_Y over a (theta_X, p) grid")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--theta-x-grid", type=_floats, default=[i / 20 for i in range(21)])
    g.add_argument("--t-grid", type=_floats)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--p-grid", type=_floats, default=[i / 20 for i in range(1, 20)])
    p.add_argument("--T", type=int, default=3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_surface)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UndefinedEstimateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (PCImputeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
