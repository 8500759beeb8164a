"""Monte-Carlo sweeps over the matrix families.

Trial ``i`` of every sweep point uses the integer seed ``seed + i`` and the
per-instance streams are derived from it by :func:`make_problem`, so a single
row can be regenerated from the ``seed`` column of its CSV line plus the
experiment config.
"""

from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .amp import amp_run, amp_sbl_run
from .denoise import BernoulliGaussian
from .errors import ConfigError, NumericError
from .oracle import oracle_mmse
from .problem_gen import MATRIX_KINDS, MatrixSpec, make_problem, nmse_ratio
from .sbl import EPS_UPDATES, SblConfig, sbl_run
from .transform import unitary_transform
from .utamp import utamp_run

log = logging.getLogger(__name__)

ALGORITHMS = ("amp", "amp-sbl", "utamp", "utamp-sbl", "oracle")
NEEDS_TRANSFORM = frozenset({"utamp", "utamp-sbl"})

CSV_VERSION = 1
CSV_COLUMNS = ("family", "sweep", "alg", "trials", "nmse_db", "time_ms", "diverged_frac", "seed")
NMSE_FLOOR_DB = -320.0

DEFAULT_SWEEPS = {
    "iid_gaussian": (0.0,),
    "ill_conditioned": (1.0, 10.0, 100.0, 1000.0, 10000.0),
    "correlated": (0.0, 0.3, 0.5, 0.7, 0.9),
    "nonzero_mean": (0.0, 0.5, 1.0, 5.0, 10.0),
    "low_rank": (0.4, 0.5, 0.6, 0.7),
}

DESK_SCALE = (500, 400)
PAPER_SCALE = (1000, 800)


@dataclass(frozen=True)
class ExperimentConfig:
    family: str = "ill_conditioned"
    sweep: tuple = DEFAULT_SWEEPS["ill_conditioned"]
    n: int = DESK_SCALE[0]
    m: int = DESK_SCALE[1]
    rho: float = 0.1
    sigma2_x: float = 1.0
    snr_db: float = 60.0
    trials: int = 20
    algorithms: tuple = ("amp-sbl", "utamp-sbl", "oracle")
    seed: int = 0
    max_iter: int = 300
    tol: float = 1e-10
    damping: float = 1.0
    eps_update: str = "closed_form"
    workers: int = 1
    out_dir: str = "out"
    plot: bool = True

    def __post_init__(self):
        if self.family not in MATRIX_KINDS:
            raise ConfigError(f"unknown family {self.family!r}; expected one of {MATRIX_KINDS}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.sweep:
            raise ConfigError("sweep must contain at least one value")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad or not self.algorithms:
            raise ConfigError(f"unknown algorithms {bad}; expected a subset of {ALGORITHMS}")
        if self.eps_update not in EPS_UPDATES:
            raise ConfigError(f"eps_update must be one of {EPS_UPDATES}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for value in self.sweep:
            try:
                self.matrix_spec(value)
            except ValueError as exc:
                raise ConfigError(f"sweep value {value}: {exc}") from exc

    def matrix_spec(self, value: float) -> MatrixSpec:
        """Map a sweep value to a generator spec; low-rank values are R/N ratios."""
        if self.family == "low_rank":
            return MatrixSpec("low_rank", self.m, self.n, float(round(value * self.n)))
        return MatrixSpec(self.family, self.m, self.n, float(value))

    def paper_scale(self) -> "ExperimentConfig":
        return replace(self, n=PAPER_SCALE[0], m=PAPER_SCALE[1])


@dataclass(frozen=True)
class TrialOutcome:
    alg: str
    ratio: float
    time_s: float
    diverged: bool


@dataclass(frozen=True)
class SweepRow:
    family: str
    sweep_value: float
    algorithm: str
    trials: int
    nmse_db: float
    mean_wall_time: float
    divergence_rate: float
    seed_base: int
    # per-trial squared-error ratios in trial order; not written to CSV
    trial_ratios: tuple = field(default=(), compare=False)

    @property
    def trial_nmse_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(np.asarray(self.trial_ratios))


def aggregate_nmse_db(ratios) -> float:
    """Average the per-trial error ratios, then convert to dB."""
    mean = float(np.mean(ratios))
    if mean == 0.0:
        return -math.inf
    return 10.0 * math.log10(mean)


def _solve(alg: str, problem, tm, cfg: ExperimentConfig):
    prior = BernoulliGaussian(problem.signal.rho, problem.signal.sigma2_x)
    if alg == "amp":
        res = amp_run(problem.A, problem.y, prior, problem.lambda_true, cfg.max_iter, cfg.tol, cfg.damping)
        return res.x_hat, res.diverged
    if alg == "amp-sbl":
        res = amp_sbl_run(problem.A, problem.y, cfg.max_iter, cfg.tol, cfg.damping)
        return res.x_hat, res.diverged
    if alg == "utamp":
        res = utamp_run(tm, prior, problem.lambda_true, cfg.max_iter, cfg.tol)
        return res.x_hat, res.diverged
    if alg == "utamp-sbl":
        sbl_cfg = SblConfig(max_iter=cfg.max_iter, tol=cfg.tol, eps_update=cfg.eps_update)
        res = sbl_run(tm, sbl_cfg)
        return res.x_hat, res.diverged
    out = oracle_mmse(problem.A, problem.y, problem.signal.support, problem.lambda_true, problem.signal.sigma2_x)
    return out.x_hat_oracle, False


def run_trial(cfg: ExperimentConfig, sweep_value: float, trial: int) -> list[TrialOutcome]:
    """Generate one instance and run every configured algorithm on it.

    Timing excludes instance generation. The SVD is computed once and its
    cost is charged to each algorithm that consumes it.
    """
    problem = make_problem(cfg.matrix_spec(sweep_value), cfg.rho, cfg.snr_db, cfg.seed + trial, cfg.sigma2_x)
    tm = None
    transform_time = 0.0
    if NEEDS_TRANSFORM.intersection(cfg.algorithms):
        start = time.perf_counter()
        tm = unitary_transform(problem.A, problem.y)
        transform_time = time.perf_counter() - start
    outcomes = []
    for alg in cfg.algorithms:
        start = time.perf_counter()
        try:
            x_hat, diverged = _solve(alg, problem, tm, cfg)
            with np.errstate(over="ignore", invalid="ignore"):
                ratio = nmse_ratio(x_hat, problem.x)
        except NumericError as exc:
            log.warning("%s failed on %s=%g trial %d: %s", alg, cfg.family, sweep_value, trial, exc)
            diverged, ratio = True, math.inf
        elapsed = time.perf_counter() - start
        if alg in NEEDS_TRANSFORM:
            elapsed += transform_time
        if not np.isfinite(ratio):
            ratio = math.inf
        outcomes.append(TrialOutcome(alg, ratio, elapsed, diverged))
    return outcomes


def _run_task(args):
    return run_trial(*args)


def run_experiment(cfg: ExperimentConfig, write: bool = False) -> list[SweepRow]:
    """Run the full sweep and return one row per (sweep value, algorithm).

    With ``write=True`` the rows are written to ``<out_dir>/sweep.csv`` and,
    when ``cfg.plot`` is set, rendered next to it.
    """
    tasks = [(cfg, v, i) for v in cfg.sweep for i in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            # map keeps task order regardless of completion order
            results = list(pool.map(_run_task, tasks))
    else:
        results = [run_trial(*t) for t in tasks]

    rows = []
    for k, value in enumerate(cfg.sweep):
        block = results[k * cfg.trials:(k + 1) * cfg.trials]
        for j, alg in enumerate(cfg.algorithms):
            outs = [trial[j] for trial in block]
            ratios = tuple(o.ratio for o in outs)
            rows.append(
                SweepRow(
                    family=cfg.family,
                    sweep_value=float(value),
                    algorithm=alg,
                    trials=cfg.trials,
                    nmse_db=aggregate_nmse_db(ratios),
                    mean_wall_time=float(np.mean([o.time_s for o in outs])),
                    divergence_rate=float(np.mean([o.diverged for o in outs])),
                    seed_base=cfg.seed,
                    trial_ratios=ratios,
                )
            )
        log.info("%s=%g done", cfg.family, value)
    if write:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(rows, out / "sweep.csv")
        if cfg.plot:
            from .plotting import emit_plot

            emit_plot(rows, out / "sweep.svg")
    return rows


def regenerate_row(cfg: ExperimentConfig, sweep_value: float, alg: str, seed: int) -> SweepRow:
    """Recompute a single CSV row from its recorded seed."""
    sub = replace(cfg, sweep=(sweep_value,), algorithms=(alg,), seed=seed, workers=1)
    return run_experiment(sub)[0]


def format_nmse(value: float) -> str:
    if value == -math.inf or value < NMSE_FLOOR_DB:
        return repr(NMSE_FLOOR_DB)
    return repr(float(value))


def row_to_record(row: SweepRow) -> dict:
    return {
        "family": row.family,
        "sweep": repr(row.sweep_value),
        "alg": row.algorithm,
        "trials": str(row.trials),
        "nmse_db": format_nmse(row.nmse_db),
        "time_ms": f"{row.mean_wall_time * 1e3:.3f}",
        "diverged_frac": repr(row.divergence_rate),
        "seed": str(row.seed_base),
    }


def write_csv(rows, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"# sblkit sweep csv v{CSV_VERSION}\n")
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row_to_record(row))


def read_csv(path) -> list[SweepRow]:
    """Parse a sweep CSV; per-trial ratios are not stored and come back empty."""
    with Path(path).open(newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = []
    for rec in csv.DictReader(lines):
        if tuple(rec) != CSV_COLUMNS:
            raise ConfigError(f"unexpected CSV columns {tuple(rec)}")
        rows.append(
            SweepRow(
                family=rec["family"],
                sweep_value=float(rec["sweep"]),
                algorithm=rec["alg"],
                trials=int(rec["trials"]),
                nmse_db=float(rec["nmse_db"]),
                mean_wall_time=float(rec["time_ms"]) / 1e3,
                divergence_rate=float(rec["diverged_frac"]),
                seed_base=int(rec["seed"]),
            )
        )
    return rows
