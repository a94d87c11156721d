"""Monte Carlo sweeps over the BS power budget or the user count.

A sweep runs `trials` independent channel realizations per swept value and
reports the mean sum secrecy rate and its standard error per scheme.  Trial
seeds are derived from the master seed and the trial index alone, so results
do not depend on execution order or worker count, and the same trial sees
the same channels at every swept value (paired comparisons across values).
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .allocation import AllocationResult, Scheme
from .channel import TapProfile, generate_channels, normalize_gains
from .config import InvalidConfigError, SystemConfig
from .schemes import run_nonopt, run_opt, run_subopt

CSV_HEADER = ("sweep_var", "value", "scheme", "mean_rate", "stderr", "trials")
TRACE_HEADER = ("t", "lambda", "power_sum", "dual_value")

VAR_PT = "pt"
VAR_K = "k"

_TRIAL_SEED_STRIDE = 1_000_003  # > any sane trial count, keeps masters disjoint


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep, over which values, how many trials, which schemes."""

    variable: str
    values: tuple[float, ...]
    trials: int = 100
    schemes: tuple[Scheme, ...] = (Scheme.OPT, Scheme.SUBOPT, Scheme.NONOPT)

    def __post_init__(self) -> None:
        if self.variable not in (VAR_PT, VAR_K):
            raise InvalidConfigError(
                f"sweep variable must be '{VAR_PT}' or '{VAR_K}', got {self.variable!r}"
            )
        if not self.values:
            raise InvalidConfigError("sweep needs at least one value")
        if any(v2 <= v1 for v1, v2 in zip(self.values, self.values[1:])):
            raise InvalidConfigError(
                f"sweep values must be strictly increasing, got {self.values}"
            )
        if self.variable == VAR_K and any(v != int(v) or v < 1 for v in self.values):
            raise InvalidConfigError("user counts must be positive integers")
        if self.trials < 1:
            raise InvalidConfigError(f"trials must be >= 1, got {self.trials}")
        if not self.schemes:
            raise InvalidConfigError("scheme set must not be empty")


@dataclass(frozen=True)
class SweepRow:
    """One aggregated CSV row: a (swept value, scheme) cell of the result table."""

    sweep_var: str
    value: float
    scheme: str
    mean_rate: float
    stderr: float
    trials: int


@dataclass
class SweepResult:
    """Aggregated rows plus convergence accounting over all individual solves."""

    rows: list[SweepRow]
    nonconverged: int
    total_solves: int

    @property
    def nonconverged_fraction(self) -> float:
        return self.nonconverged / self.total_solves if self.total_solves else 0.0


def trial_seed(master_seed: int, trial: int) -> int:
    """Per-trial seed independent of execution order."""
    return master_seed * _TRIAL_SEED_STRIDE + trial


def config_for_value(config: SystemConfig, variable: str, value: float) -> SystemConfig:
    """The per-value config variant: swept PT or swept K.

    A PT sweep varies the BS budget alone: the relay budgets are resolved
    against the base configuration once (PT/J of the base PT when left
    defaulted) and pinned across the swept values.  Sweeping both hops at
    once would conflate the x-axis variable with the relay operating point;
    raising relay power also raises what the eavesdropper overhears, which
    can swamp the BS-power effect under study.
    """
    if variable == VAR_PT:
        return replace(config, PT=float(value), Q=config.relay_budgets())
    return replace(config, K=int(value))


def run_scheme(scheme: Scheme, config: SystemConfig, gains, seed: int) -> AllocationResult:
    if scheme is Scheme.OPT:
        return run_opt(config, gains)
    if scheme is Scheme.SUBOPT:
        return run_subopt(config, gains, seed)
    return run_nonopt(config, gains, seed)


def _run_trial(task) -> list[tuple[float, bool]]:
    """One (value, trial) cell: all requested schemes on one realization."""
    config, schemes, seed = task
    profile = TapProfile(num_taps=config.num_taps, seed=seed)
    gains = normalize_gains(generate_channels(config, profile))
    out = []
    for scheme in schemes:
        result = run_scheme(scheme, config, gains, seed)
        out.append((result.sum_rate, result.converged))
    return out


def run_sweep(config: SystemConfig, spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """Run the full sweep and aggregate mean rate and standard error.

    jobs > 1 distributes (value, trial) cells over a process pool; the
    aggregation indexes results by trial, so the output is identical for any
    worker count.
    """
    tasks = []
    for value in spec.values:
        cfg = config_for_value(config, spec.variable, value)
        for trial in range(spec.trials):
            tasks.append((cfg, spec.schemes, trial_seed(config.seed, trial)))

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_trial, tasks, chunksize=4))
    else:
        outcomes = [_run_trial(t) for t in tasks]

    rows: list[SweepRow] = []
    nonconverged = 0
    for vi, value in enumerate(spec.values):
        cell = outcomes[vi * spec.trials:(vi + 1) * spec.trials]
        for si, scheme in enumerate(spec.schemes):
            rates = np.array([c[si][0] for c in cell])
            nonconverged += sum(1 for c in cell if not c[si][1])
            stderr = (float(np.std(rates, ddof=1) / np.sqrt(spec.trials))
                      if spec.trials > 1 else 0.0)
            rows.append(SweepRow(
                sweep_var=spec.variable, value=float(value), scheme=scheme.value,
                mean_rate=float(np.mean(rates)), stderr=stderr, trials=spec.trials,
            ))
    return SweepResult(rows=rows, nonconverged=nonconverged,
                       total_solves=len(tasks) * len(spec.schemes))


def trace_solve(config: SystemConfig, spec: SweepSpec) -> AllocationResult:
    """The solve whose convergence trace the CLI emits: first value, trial 0.

    Prefers OPT, falls back to SUBOPT; refuses a NONOPT-only spec since
    uniform power has no dual history.
    """
    for scheme in (Scheme.OPT, Scheme.SUBOPT):
        if scheme in spec.schemes:
            cfg = config_for_value(config, spec.variable, spec.values[0])
            profile = TapProfile(num_taps=cfg.num_taps,
                                 seed=trial_seed(config.seed, 0))
            gains = normalize_gains(generate_channels(cfg, profile))
            return run_scheme(scheme, cfg, gains, trial_seed(config.seed, 0))
    raise InvalidConfigError("a convergence trace needs opt or subopt in the scheme set")


def emit_csv(table: SweepResult | list[SweepRow], path) -> None:
    """Write the sweep table as UTF-8, LF-terminated CSV.

    Floats are written with repr so parsing the file back reproduces the
    table exactly.
    """
    rows = table.rows if isinstance(table, SweepResult) else table
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([row.sweep_var, repr(row.value), row.scheme,
                             repr(row.mean_rate), repr(row.stderr), row.trials])


def parse_csv(path) -> list[SweepRow]:
    """Inverse of emit_csv."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header: {header}")
        return [SweepRow(sweep_var=r[0], value=float(r[1]), scheme=r[2],
                         mean_rate=float(r[3]), stderr=float(r[4]), trials=int(r[5]))
                for r in reader]


def emit_convergence_trace(result: AllocationResult, path) -> None:
    """Write one dual loop's (t, lambda, power_sum, dual_value) rows as CSV."""
    if result.dual_history is None:
        raise ValueError(f"{result.scheme.value} result carries no dual history")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for rec in result.dual_history.history:
            writer.writerow([rec.t, repr(rec.lam), repr(rec.power_sum),
                             repr(rec.dual_value)])
