"""Command-line entry point ``sbl-kit``.

Exit status is 0 on success, 2 for configuration or parameter errors and 3
for numeric failures.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
import time
from pathlib import Path

from .config import load_config, parse_config
from .denoise import BernoulliGaussian
from .errors import ConfigError, NumericError, ParameterError
from .harness import ALGORITHMS, format_nmse, run_experiment
from .io import read_problem, read_problem_csv, write_problem, write_problem_csv
from .oracle import oracle_mmse
from .problem_gen import MATRIX_KINDS, make_problem, nmse_db
from .sbl import SblConfig, sbl_run
from .transform import unitary_transform

log = logging.getLogger("sblkit")

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _experiment(args):
    overrides = {"seed": args.seed, "out_dir": args.out}
    if getattr(args, "family", None):
        overrides["family"] = args.family
    if getattr(args, "param", None) is not None:
        overrides["sweep"] = (args.param,)
    if getattr(args, "alg", None) and args.command == "bench":
        overrides["algorithms"] = tuple(args.alg)
    cfg = load_config(args.config, **overrides) if args.config else parse_config("", **overrides)
    if args.paper_scale:
        cfg = cfg.paper_scale()
    return cfg


def _load_or_generate(args, cfg):
    if getattr(args, "problem", None):
        path = Path(args.problem)
        return read_problem_csv(path) if path.suffix == ".csv" else read_problem(path)
    return make_problem(cfg.matrix_spec(cfg.sweep[0]), cfg.rho, cfg.snr_db, cfg.seed, cfg.sigma2_x)


def _write_rows(path, header, rows):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_generate(args):
    cfg = _experiment(args)
    problem = _load_or_generate(args, cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_problem(problem, out / "problem.bin")
    write_problem_csv(problem, out / "problem.csv")
    m, n = problem.A.shape
    print(f"wrote {out / 'problem.bin'} ({m}x{n}, {problem.signal.support.size} nonzeros, seed {cfg.seed})")


def _solve_single(alg, problem, cfg):
    from .amp import amp_run, amp_sbl_run
    from .utamp import utamp_run

    prior = BernoulliGaussian(problem.signal.rho, problem.signal.sigma2_x)
    start = time.perf_counter()
    if alg == "amp":
        res = amp_run(problem.A, problem.y, prior, problem.lambda_true, cfg.max_iter, cfg.tol, cfg.damping, truth=problem.x)
    elif alg == "amp-sbl":
        res = amp_sbl_run(problem.A, problem.y, cfg.max_iter, cfg.tol, cfg.damping, truth=problem.x)
    else:
        tm = unitary_transform(problem.A, problem.y)
        if alg == "utamp":
            res = utamp_run(tm, prior, problem.lambda_true, cfg.max_iter, cfg.tol, truth=problem.x)
        else:
            sbl_cfg = SblConfig(max_iter=cfg.max_iter, tol=cfg.tol, eps_update=cfg.eps_update)
            res = sbl_run(tm, sbl_cfg, truth=problem.x)
    return res, time.perf_counter() - start


def cmd_run(args):
    cfg = _experiment(args)
    problem = _load_or_generate(args, cfg)
    res, elapsed = _solve_single(args.alg, problem, cfg)
    err = nmse_db(res.x_hat, problem.x) if problem.x.any() else math.nan
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    # instances read from file carry no seed
    seed = "" if args.problem else cfg.seed
    _write_rows(
        out / "run.csv",
        ["alg", "iterations", "converged", "diverged", "nmse_db", "time_ms", "lambda_hat", "eps_hat", "seed"],
        [[args.alg, res.iterations, int(res.converged), int(res.diverged), format_nmse(err),
          f"{elapsed * 1e3:.3f}", repr(res.lambda_hat_final), repr(res.eps_hat_final), seed]],
    )
    if args.trace:
        n_it = res.iterations
        cols = {k: res.trace.get(k, [math.nan] * n_it) for k in ("lambda_hat", "eps_hat", "tau_x")}
        traj = res.nmse_trajectory if len(res.nmse_trajectory) else [math.nan] * n_it
        _write_rows(
            out / "trace.csv",
            ["t", "nmse_db", "lambda_hat", "eps_hat", "tau_x"],
            [[t + 1, format_nmse(traj[t]), repr(float(cols["lambda_hat"][t])),
              repr(float(cols["eps_hat"][t])), repr(float(cols["tau_x"][t]))] for t in range(n_it)],
        )
    status = "diverged" if res.diverged else ("converged" if res.converged else "max_iter")
    print(f"{args.alg}: NMSE {err:.2f} dB after {res.iterations} iterations ({status}), {elapsed * 1e3:.1f} ms")


def cmd_bound(args):
    cfg = _experiment(args)
    problem = _load_or_generate(args, cfg)
    res = oracle_mmse(problem.A, problem.y, problem.signal.support, problem.lambda_true,
                      problem.signal.sigma2_x, truth=problem.x)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_rows(out / "bound.csv", ["support_size", "nmse_db", "seed"],
                [[problem.signal.support.size, format_nmse(res.nmse_db), "" if args.problem else cfg.seed]])
    print(f"support-oracle NMSE {res.nmse_db:.2f} dB")


def cmd_bench(args):
    cfg = _experiment(args)
    rows = run_experiment(cfg, write=True)
    print(f"{'sweep':>10} {'alg':>10} {'nmse_db':>9} {'time_ms':>9} {'div':>5}")
    for r in rows:
        print(f"{r.sweep_value:>10g} {r.algorithm:>10} {r.nmse_db:>9.2f} {r.mean_wall_time * 1e3:>9.2f} {r.divergence_rate:>5.2f}")
    print(f"wrote {Path(cfg.out_dir) / 'sweep.csv'}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI experiment config")
    common.add_argument("--seed", type=int, help="base seed (overrides config)")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides config)")
    common.add_argument("--paper-scale", action="store_true", help="use N=1000, M=800")
    common.add_argument("-v", "--verbose", action="store_true")

    instance = argparse.ArgumentParser(add_help=False)
    instance.add_argument("--family", choices=MATRIX_KINDS, help="matrix family (overrides config)")
    instance.add_argument("--param", type=float, help="family parameter; R/N ratio for low_rank")

    parser = argparse.ArgumentParser(prog="sbl-kit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("generate", parents=[common, instance], help="write a problem instance")

    p = sub.add_parser("run", parents=[common, instance], help="solve one instance")
    p.add_argument("--alg", choices=[a for a in ALGORITHMS if a != "oracle"], default="utamp-sbl")
    p.add_argument("--problem", metavar="PATH", help="problem file from `generate` (.bin or .csv)")
    p.add_argument("--trace", action="store_true", help="write per-iteration trace.csv")

    p = sub.add_parser("bound", parents=[common, instance], help="support-oracle bound for one instance")
    p.add_argument("--problem", metavar="PATH", help="problem file from `generate` (.bin or .csv)")

    p = sub.add_parser("bench", parents=[common, instance], help="Monte-Carlo sweep to CSV and SVG")
    p.add_argument("--alg", choices=ALGORITHMS, action="append", help="algorithm (repeatable)")
    return parser


COMMANDS = {"generate": cmd_generate, "run": cmd_run, "bound": cmd_bound, "bench": cmd_bench}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        COMMANDS[args.command](args)
    except (ConfigError, ParameterError) as exc:
        print(f"sbl-kit: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"sbl-kit: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"sbl-kit: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
