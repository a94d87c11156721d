"""End-to-end acceptance checks: one test per shipped claim.

Each test prints a single CRITERION line (PASS or FAIL with the measured
numbers) before asserting, so a full run leaves a nine-line scoreboard in
the output regardless of which parts fail.
"""

from __future__ import annotations

import time

import numpy as np

from secrelay.allocation import Scheme
from secrelay.cli import main as cli_main
from secrelay.config import SystemConfig
from secrelay.dual import optimal_power
from secrelay.schemes import run_nonopt, run_opt, run_subopt
from secrelay.secrecy import LinkGains
from secrelay.sweep import SweepSpec, run_sweep, trial_seed

from conftest import MASTER_SEED, desk_config, feasibility_violations, realize
from oracles import (
    exhaustive_best_rate,
    grid_argmax,
    priced_surplus_raw,
    stationarity_residual,
    typo_root,
)

SMALL_INSTANCE_SEED = 1  # master seed of the tiny-instance batch
SMALL_INSTANCE_PT = 0.125


def _report(num: int, ok: bool, detail: str) -> bool:
    print(f"\nCRITERION {num} {'PASS' if ok else 'FAIL'}: {detail}")
    return ok


def _paired_se(x: np.ndarray) -> float:
    return float(np.std(x, ddof=1) / np.sqrt(len(x)))


def test_closed_form_power_matches_grid_search(power_instances):
    """The closed-form inner maximizer agrees with a 1e-4 grid search."""
    t0 = time.monotonic()
    inst = power_instances
    p_closed = np.array([
        optimal_power(LinkGains(a=float(a), b=float(b), c=float(c)),
                      float(q), float(lam))[0]
        for a, b, c, q, lam in zip(inst["a"], inst["b"], inst["c"],
                                   inst["q"], inst["lam"])
    ])
    assert p_closed.max() < 1e3, "frozen draws must keep roots inside the grid"
    p_grid, v_grid = grid_argmax(inst["a"], inst["b"], inst["c"],
                                 inst["q"], inst["lam"])
    v_closed = priced_surplus_raw(inst["a"], inst["b"], inst["c"], inst["q"],
                                  inst["lam"], p_closed)
    arg_err = np.abs(p_closed - p_grid)
    obj_err = np.abs(v_closed - v_grid)
    elapsed = time.monotonic() - t0
    ok = (arg_err.max() <= 2e-4) and (obj_err.max() <= 1e-6) and elapsed < 60
    assert _report(
        1, ok,
        f"closed form vs grid on 1000 instances: max |dp| {arg_err.max():.2e} "
        f"(<=2e-4), max |dpsi| {obj_err.max():.2e} (<=1e-6), {elapsed:.1f}s (<60s)",
    )


def test_stationarity_residual_and_misprinted_coefficient(power_instances):
    """Interior roots satisfy stationarity; the misprinted B coefficient does not."""
    inst = power_instances
    a, b, c, q, lam = (inst[k] for k in ("a", "b", "c", "q", "lam"))
    p_closed = np.array([
        optimal_power(LinkGains(a=float(ai), b=float(bi), c=float(ci)),
                      float(qi), float(li))[0]
        for ai, bi, ci, qi, li in zip(a, b, c, q, lam)
    ])
    interior = p_closed > 0
    res = stationarity_residual(a[interior], b[interior], c[interior],
                                q[interior], lam[interior], p_closed[interior])
    p_typo = typo_root(a[interior], b[interior], c[interior], q[interior],
                       lam[interior])
    res_typo = np.where(
        np.isnan(p_typo), np.inf,
        stationarity_residual(a[interior], b[interior], c[interior],
                              q[interior], lam[interior],
                              np.nan_to_num(p_typo)),
    )
    typo_fail_frac = float(np.mean(res_typo >= 1e-9))
    ok = bool(interior.sum() > 0 and res.max() < 1e-9 and typo_fail_frac >= 0.99)
    assert _report(
        2, ok,
        f"{interior.sum()} interior roots, max residual {res.max():.2e} (<1e-9); "
        f"misprinted-coefficient roots fail on {typo_fail_frac:.1%} (>=99%)",
    )


def test_small_instances_match_exhaustive_oracle():
    """The joint solver reaches >=98% of brute force on exhaustively solvable instances."""
    t0 = time.monotonic()
    ratios = []
    for i in range(50):
        seed = trial_seed(SMALL_INSTANCE_SEED, i)
        config = SystemConfig(N=2, K=2, J=2, PT=SMALL_INSTANCE_PT, num_taps=2,
                              seed=seed)
        gains = realize(config)
        got = run_opt(config, gains).sum_rate
        oracle = exhaustive_best_rate(gains, config.PT, config.relay_budgets())
        ratios.append(got / oracle if oracle > 0 else 1.0)
    ratios = np.array(ratios)
    elapsed = time.monotonic() - t0
    ok = bool((ratios >= 0.98).all() and elapsed < 300)
    assert _report(
        3, ok,
        f"50 instances at N=2, K=2, J=2: min rate ratio {ratios.min():.4f} "
        f"(>=0.98), {(ratios < 0.98).sum()} below bar, {elapsed:.1f}s (<300s)",
    )


def test_scheme_ordering_at_desk_scale(desk_trials):
    """Joint > power-only > unoptimized in the mean, and power-only never loses pairwise."""
    opt = np.array([t.opt for t in desk_trials])
    sub = np.array([t.sub for t in desk_trials])
    non = np.array([t.non for t in desk_trials])
    d_os, d_sn = opt - sub, sub - non
    se_os, se_sn = _paired_se(d_os), _paired_se(d_sn)
    paired_ok = bool((sub >= non).all())
    ok = bool(d_os.mean() > 2 * se_os and d_sn.mean() > 2 * se_sn and paired_ok)
    assert _report(
        4, ok,
        f"means opt {opt.mean():.2f} > sub {sub.mean():.2f} > non {non.mean():.2f}; "
        f"gap opt-sub {d_os.mean():.2f} vs 2se {2 * se_os:.2f}, "
        f"gap sub-non {d_sn.mean():.3f} vs 2se {2 * se_sn:.3f}; "
        f"sub >= non pairwise on all 100 trials: {paired_ok}",
    )


def test_monotonic_trends_in_budget_and_users():
    """Mean joint rate rises strictly with the BS budget and weakly with users."""
    base = desk_config(64, MASTER_SEED)
    res_pt = run_sweep(base, SweepSpec(variable="pt",
                                       values=(1.0, 5.0, 10.0, 15.0, 20.0),
                                       trials=100, schemes=(Scheme.OPT,)))
    means_pt = np.array([row.mean_rate for row in res_pt.rows])
    res_k = run_sweep(base, SweepSpec(variable="k", values=(1, 4, 8, 12),
                                      trials=100, schemes=(Scheme.OPT,)))
    means_k = np.array([row.mean_rate for row in res_k.rows])
    pt_ok = bool((np.diff(means_pt) > 0).all())
    k_ok = bool((np.diff(means_k) >= 0).all())
    ok = pt_ok and k_ok
    assert _report(
        5, ok,
        f"mean rate over PT {np.round(means_pt, 2).tolist()} strictly "
        f"increasing: {pt_ok}; over K {np.round(means_k, 2).tolist()} "
        f"non-decreasing: {k_ok} (100 trials each)",
    )


def test_more_subcarriers_widen_the_optimization_gap(desk_trials, desk32_trials):
    """The joint-vs-unoptimized gap grows from N=32 to N=64."""
    gap64 = float(np.mean([t.opt - t.non for t in desk_trials]))
    gap32 = float(np.mean([o - n for o, n, _ in desk32_trials]))
    ok = gap64 > gap32
    assert _report(
        6, ok,
        f"mean opt-non gap {gap32:.2f} at N=32 vs {gap64:.2f} at N=64 "
        f"(100 trials each)",
    )


def test_feasibility_on_every_scheme_run(desk_trials, desk32_trials):
    """Exclusivity, BS and relay budgets, non-negative rates on every run."""
    violations = [v for t in desk_trials for v in t.violations]
    violations += [v for _, _, vs in desk32_trials for v in vs]
    checked = 3 * len(desk_trials) + 2 * len(desk32_trials)
    # a spread of off-desk shapes, including budgets not tied to PT
    for n, k, j, pt, q, taps in ((8, 2, 3, 2.0, None, 3),
                                 (16, 4, 2, 0.5, 4.0, 4),
                                 (4, 1, 1, 12.0, (0.3,), 2),
                                 (12, 3, 5, 7.5, (1.0, 2.0, 0.5, 4.0, 2.5), 3)):
        config = SystemConfig(N=n, K=k, J=j, PT=pt, Q=q, num_taps=taps, seed=99)
        gains = realize(config)
        for result in (run_opt(config, gains), run_subopt(config, gains, 99),
                       run_nonopt(config, gains, 99)):
            violations += feasibility_violations(config, result)
            checked += 1
    ok = not violations
    assert _report(
        7, ok,
        f"{checked} scheme runs checked, {len(violations)} feasibility "
        f"violations" + (f": {violations[:5]}" if violations else ""),
    ), violations[:20]


def test_duality_gap_shrinks_with_subcarrier_count(desk_trials, gap16_trials):
    """The relative duality gap at convergence is smaller at N=64 than N=16."""
    gap64 = float(np.mean([t.gap for t in desk_trials[:50]]))
    gap16 = float(np.mean(gap16_trials))
    ok = gap64 < gap16
    assert _report(
        8, ok,
        f"mean relative gap {gap16:.5f} at N=16 vs {gap64:.5f} at N=64 "
        f"(50 trials each)",
    )


def test_csv_runs_are_byte_identical(tmp_path, monkeypatch):
    """Two CLI runs of the full budget sweep with one seed give identical bytes."""
    monkeypatch.delenv("SECRELAY_SEED", raising=False)
    out_a = tmp_path / "run_a.csv"
    out_b = tmp_path / "run_b.csv"
    argv = ["sweep", "--var", "pt", "--values", "1:20", "--trials", "2",
            "--seed", "7", "--out", ""]
    code_a = cli_main(argv[:-1] + [str(out_a)])
    code_b = cli_main(argv[:-1] + [str(out_b)])
    bytes_a = out_a.read_bytes()
    bytes_b = out_b.read_bytes()
    ok = code_a == 0 and code_b == 0 and bytes_a == bytes_b
    assert _report(
        9, ok,
        f"two seeded runs of the 20-value budget sweep: exit codes "
        f"({code_a}, {code_b}), byte-identical: {bytes_a == bytes_b} "
        f"({len(bytes_a)} bytes)",
    )
