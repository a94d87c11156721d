"""The three allocation schemes under comparison.

OPT optimizes BS power, subcarrier-user assignment and relay selection
jointly.  SUBOPT draws an assignment uniformly at random and optimizes only
the BS powers for it.  NONOPT uses the same random assignment with the BS
budget spread evenly.  SUBOPT and NONOPT called with the same seed draw the
identical assignment, so per-realization comparisons are paired; SUBOPT can
then never fall below NONOPT, whose uniform powers lie inside the set SUBOPT
optimizes over.
"""

from __future__ import annotations

import numpy as np

from .allocation import (
    AllocationResult,
    Assignment,
    PowerAllocation,
    Scheme,
    random_assignment,
    relay_power_update,
)
from .channel import NormalizedGains
from .config import SystemConfig
from .dual import (
    LAMBDA_FLOOR,
    TWO_LN2,
    DualState,
    best_repair,
    candidate_surplus,
    closed_form_power,
    solve_joint,
    subgradient_step,
    zero_power_surplus,
)
from .secrecy import sum_secrecy_rate


def run_opt(config: SystemConfig, gains: NormalizedGains) -> AllocationResult:
    """Joint allocation; delegates to the dual-decomposition solver."""
    return solve_joint(config, gains)


def optimize_power_for_assignment(config: SystemConfig, gains: NormalizedGains,
                                  assign: Assignment,
                                  scheme: Scheme = Scheme.SUBOPT) -> AllocationResult:
    """Dual power-only loop for a fixed assignment.

    The relay power table is fixed by the assignment's counts, so the only
    coupling left is the BS budget; the same projected subgradient iteration
    as the joint solver prices it, with the per-subcarrier power given by the
    closed form at the assigned pair.

    The subgradient loop settles on a stationary power profile, and the
    reported allocation is the best feasible repair of its final iterate
    (see best_repair).  The even spread over all subcarriers is always among
    the repair candidates, so the result never falls below the unoptimized
    scheme on the same assignment.
    """
    params = config.solver
    budgets = config.relay_budgets()
    assign.validate()
    q = relay_power_update(assign, budgets)
    rows = np.arange(assign.num_subcarriers)
    j_sel = assign.pairs[:, 0]
    k_sel = assign.pairs[:, 1]
    av = gains.a[rows, j_sel]
    bv = gains.b[rows, j_sel, k_sel]
    cv = gains.c[rows, j_sel]
    qv = q[rows, j_sel]
    level = zero_power_surplus(bv, cv, qv)

    lam0 = params.lambda0 if params.lambda0 is not None else 1.0 / config.PT
    delta0 = params.delta0 if params.delta0 is not None else 0.1 * lam0 / config.PT
    state = DualState(lam=lam0, delta0=delta0)
    converged = False
    reason = "max_iter"
    p = np.zeros(config.N)
    for _ in range(params.t_max):
        lam_eval = max(state.lam, LAMBDA_FLOOR)
        # box [0, PT]: no feasible allocation exceeds the budget on one
        # subcarrier, and the cap keeps the subgradient bounded
        p = np.minimum(closed_form_power(av, bv, cv, qv, lam_eval), config.PT)
        power_sum = float(np.sum(p))
        metric = candidate_surplus(av, bv, cv, qv, lam_eval, p)
        bound_sum = float(np.sum(np.maximum(metric, level)))
        dual_bits = (bound_sum + lam_eval * config.PT) / TWO_LN2
        primal_bits = best_repair(av, bv, cv, qv, p, config.PT)[1]
        lam_before = state.lam
        subgradient_step(state, assign, p, config.PT,
                         dual_value=dual_bits, primal_value=primal_bits)
        if abs(power_sum - config.PT) <= params.eps_pt * config.PT:
            converged, reason = True, "power"
            break
        if abs(state.lam - lam_before) <= params.eps_lambda:
            converged, reason = True, "lambda"
            break

    rep_p, rate = best_repair(av, bv, cv, qv, p, config.PT)
    power = PowerAllocation(p=rep_p, q=q)
    return AllocationResult(
        scheme=scheme, assignment=assign, power=power, sum_rate=rate,
        converged=converged, iterations=state.t, dual_history=state,
        stop_reason=reason,
    )


def run_subopt(config: SystemConfig, gains: NormalizedGains,
               seed: int) -> AllocationResult:
    """Random exclusive assignment, then BS power optimization only."""
    assign = random_assignment(config.N, config.J, config.K, seed)
    return optimize_power_for_assignment(config, gains, assign, scheme=Scheme.SUBOPT)


def run_nonopt(config: SystemConfig, gains: NormalizedGains,
               seed: int) -> AllocationResult:
    """Random exclusive assignment with the BS budget spread evenly.

    Shares the assignment draw with run_subopt for equal seeds.
    """
    assign = random_assignment(config.N, config.J, config.K, seed)
    q = relay_power_update(assign, config.relay_budgets())
    power = PowerAllocation(p=np.full(config.N, config.PT / config.N), q=q)
    rate = sum_secrecy_rate(gains, assign, power)
    return AllocationResult(
        scheme=Scheme.NONOPT, assignment=assign, power=power, sum_rate=rate,
        converged=True, iterations=0, dual_history=None, stop_reason="direct",
    )
