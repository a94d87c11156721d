"""Command line interface.

    secrelay sweep --var pt --values 1:20 --n 64 --k 12 --j 4 --trials 100 \
        --seed 7 --schemes opt,subopt,nonopt --out results.csv

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 more solves failed to
converge than --max-nonconverged allows.  The environment variable
SECRELAY_SEED, when set, overrides --seed.
"""

from __future__ import annotations

import argparse
import os
import sys

from .allocation import Scheme
from .config import InvalidConfigError, SolverParams, SystemConfig
from .sweep import (
    SweepSpec,
    emit_convergence_trace,
    emit_csv,
    run_sweep,
    trace_solve,
)

EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NONCONVERGED = 4


def _parse_values(text: str) -> tuple[float, ...]:
    """Sweep values: 'lo:hi', 'lo:hi:step' (inclusive) or a comma list."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [float(x) for x in text.split(":")]
            if len(parts) == 2:
                lo, hi, step = parts[0], parts[1], 1.0
            elif len(parts) == 3:
                lo, hi, step = parts
            else:
                raise ValueError(text)
            if step <= 0 or hi < lo:
                raise ValueError(text)
            values = []
            v = lo
            while v <= hi + 1e-12:
                values.append(round(v, 12))
                v += step
            return tuple(values)
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"cannot parse values {text!r}; use 'lo:hi', 'lo:hi:step' or 'v1,v2,...'"
        ) from None


def _parse_schemes(text: str) -> tuple[Scheme, ...]:
    names = [s.strip() for s in text.split(",") if s.strip()]
    if not names:
        raise argparse.ArgumentTypeError("scheme set must not be empty")
    try:
        return tuple(Scheme(name) for name in names)
    except ValueError:
        valid = ",".join(s.value for s in Scheme)
        raise argparse.ArgumentTypeError(
            f"unknown scheme in {text!r}; choose from {valid}"
        ) from None


def _parse_budgets(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse relay budgets {text!r}") from None


# config-file keys share the flag names; values go through the same parsers
_FILE_CONVERTERS = {
    "var": str,
    "values": _parse_values,
    "n": int, "k": int, "j": int,
    "pt": float, "q": _parse_budgets, "sigma2": float, "taps": int,
    "trials": int, "seed": int,
    "schemes": _parse_schemes,
    "out": str, "trace": str, "jobs": int,
    "t_max": int, "eps_pt": float, "eps_lambda": float, "delta0": float,
    "max_nonconverged": float,
}


def _load_config_file(path: str) -> dict:
    """Flat 'key = value' file; '#' starts a comment."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            key = key.strip().replace("-", "_")
            if key not in _FILE_CONVERTERS:
                raise InvalidConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = _FILE_CONVERTERS[key](val.strip())
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise InvalidConfigError(f"{path}:{lineno}: {exc}") from None
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="secrelay",
        description="Sum secrecy rate allocation schemes for an OFDMA "
                    "amplify-and-forward relay downlink.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sweep = sub.add_parser("sweep", help="Monte Carlo sweep over PT or K")
    sweep.add_argument("--var", choices=["pt", "k"], required=True,
                       help="sweep variable")
    sweep.add_argument("--values", type=_parse_values, required=True,
                       help="sweep values: 'lo:hi', 'lo:hi:step' or 'v1,v2,...'")
    sweep.add_argument("--n", type=int, default=64, help="subcarriers (default 64)")
    sweep.add_argument("--k", type=int, default=12, help="users (default 12)")
    sweep.add_argument("--j", type=int, default=4, help="relays (default 4)")
    sweep.add_argument("--pt", type=float, default=10.0,
                       help="BS power budget for K sweeps (default 10)")
    sweep.add_argument("--q", type=_parse_budgets, default=None,
                       help="relay budgets, comma list or one value (default PT/J each)")
    sweep.add_argument("--sigma2", type=float, default=1.0,
                       help="noise variance (default 1)")
    sweep.add_argument("--taps", type=int, default=6,
                       help="channel taps per link (default 6)")
    sweep.add_argument("--trials", type=int, default=100,
                       help="channel realizations per value (default 100)")
    sweep.add_argument("--seed", type=int, default=0,
                       help="master seed (default 0; SECRELAY_SEED overrides)")
    sweep.add_argument("--schemes", type=_parse_schemes,
                       default=(Scheme.OPT, Scheme.SUBOPT, Scheme.NONOPT),
                       help="comma subset of opt,subopt,nonopt (default all)")
    sweep.add_argument("--out", required=True, help="output CSV path")
    sweep.add_argument("--jobs", type=int, default=1,
                       help="parallel worker processes (default 1)")
    sweep.add_argument("--trace", default=None,
                       help="also write the first solve's convergence trace CSV here")
    sweep.add_argument("--config", default=None,
                       help="key = value file with defaults for any flag above")
    sweep.add_argument("--t-max", type=int, default=5000, dest="t_max",
                       help="dual iteration cap (default 5000)")
    sweep.add_argument("--eps-pt", type=float, default=0.01, dest="eps_pt",
                       help="relative budget tolerance (default 0.01)")
    sweep.add_argument("--eps-lambda", type=float, default=1e-6, dest="eps_lambda",
                       help="multiplier stall tolerance (default 1e-6)")
    sweep.add_argument("--delta0", type=float, default=None,
                       help="initial subgradient step (default 0.1/PT^2)")
    sweep.add_argument("--max-nonconverged", type=float, default=1.0,
                       dest="max_nonconverged",
                       help="fail with exit code 4 if a larger fraction of "
                            "solves hits the iteration cap (default 1.0)")
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()

    # apply config-file values as defaults so explicit flags override them
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config is not None:
        try:
            file_values = _load_config_file(known.config)
        except OSError as exc:
            print(f"secrelay: cannot read config file: {exc}", file=sys.stderr)
            return EXIT_IO
        except InvalidConfigError as exc:
            parser.error(str(exc))
        for action in parser._subparsers._group_actions[0].choices["sweep"]._actions:
            if action.dest in file_values:
                action.default = file_values[action.dest]
                action.required = False  # the file satisfies required flags

    args = parser.parse_args(argv)

    seed = args.seed
    env_seed = os.environ.get("SECRELAY_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError:
            parser.error(f"SECRELAY_SEED must be an integer, got {env_seed!r}")

    try:
        config = SystemConfig(
            N=args.n, K=args.k, J=args.j, PT=args.pt, Q=args.q,
            sigma2=args.sigma2, num_taps=args.taps, seed=seed,
            solver=SolverParams(delta0=args.delta0, t_max=args.t_max,
                                eps_pt=args.eps_pt, eps_lambda=args.eps_lambda),
        )
        spec = SweepSpec(variable=args.var, values=args.values,
                         trials=args.trials, schemes=args.schemes)
    except InvalidConfigError as exc:
        parser.error(str(exc))

    result = run_sweep(config, spec, jobs=max(1, args.jobs))

    try:
        emit_csv(result, args.out)
    except OSError as exc:
        print(f"secrelay: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO

    if args.trace is not None:
        try:
            emit_convergence_trace(trace_solve(config, spec), args.trace)
        except InvalidConfigError as exc:
            parser.error(str(exc))
        except OSError as exc:
            print(f"secrelay: cannot write {args.trace}: {exc}", file=sys.stderr)
            return EXIT_IO

    for row in result.rows:
        print(f"{row.sweep_var}={row.value:g} {row.scheme}: "
              f"mean={row.mean_rate:.4f} stderr={row.stderr:.4f} "
              f"({row.trials} trials)")
    print(f"wrote {len(result.rows)} rows to {args.out}")

    if result.nonconverged:
        frac = result.nonconverged_fraction
        print(f"warning: {result.nonconverged}/{result.total_solves} solves "
              f"({frac:.1%}) hit the iteration cap", file=sys.stderr)
        if frac > args.max_nonconverged:
            return EXIT_NONCONVERGED
    return 0


if __name__ == "__main__":
    sys.exit(main())
