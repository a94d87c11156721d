"""Dual-decomposition solver for the joint power and assignment problem.

The budget constraint sum(p_i) <= PT is priced by a multiplier lam, which
decouples the problem into one small subproblem per subcarrier: pick the
(relay, user) pair and BS power maximizing the priced surplus

    psi(p) = log(b * (1 + a*p + q*c) / (c * (1 + a*p + q*b))) - lam * p

over p >= 0.  The log here is natural: the stationarity condition below and
the quadratic solved for its root are calibrated in nats, and working in
bits would only rescale the multiplier trajectory, not the allocation the
loop converges to.  Rates reported to callers are always bits/s/Hz (the
surplus divided by 2*ln 2 accounts for the 1/2 two-slot factor).

psi is concave: its derivative a*q*(b - c) / ((zeta + q*c) * (zeta + q*b)),
with zeta = 1 + a*p, decreases in p.  Setting it equal to lam and clearing
denominators gives A*p^2 + B*p + C = 0 with

    A = a^2 * b * c
    B = 2*a*b*c + a*b^2*c*q + a*b*c^2*q
    C = b*c + b^2*c*q + b*c^2*q + b^2*c^2*q^2 - a*b^2*c*q/lam + a*b*c^2*q/lam

and the maximizer is the larger root, clipped at zero.  Note the middle
term of B: the two q terms differ (a*b^2*c*q and a*b*c^2*q); repeating the
first of them in place of the second looks plausible on paper but fails the
stationarity condition for essentially every instance with b != c.

The outer loop alternates the uniform relay power rule, the per-subcarrier
assignment, and a projected subgradient step on lam, with diminishing steps
delta0 / sqrt(t).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .allocation import (
    AllocationResult,
    Assignment,
    PowerAllocation,
    Scheme,
    relay_power_update,
)
from .channel import NormalizedGains
from .config import SystemConfig
from .secrecy import LinkGains, secrecy_rates, sum_secrecy_rate

TWO_LN2 = 2.0 * math.log(2.0)

# Projected multipliers may touch 0; candidate evaluation clamps to this floor
# so the per-subcarrier subproblem stays bounded.
LAMBDA_FLOOR = 1e-12

# How many trailing iterates the joint solver keeps as primal candidates.
TERMINAL_WINDOW = 10


@dataclass(frozen=True)
class QuadraticCoefficients:
    """Coefficients of the stationarity quadratic and zeta = 1 + a*p at its root."""

    A: float
    B: float
    C: float
    zeta_at_root: float


@dataclass
class IterationRecord:
    """One dual iteration: multiplier, BS power spent, dual and primal value.

    dual_value and primal_value are in bits/s/Hz; primal_value is the sum
    rate of the iterate after scaling its powers into the budget, evaluated
    with the same relay power table the candidates saw, so dual_value >=
    primal_value holds at every iteration by weak duality.
    """

    t: int
    lam: float
    power_sum: float
    dual_value: float
    primal_value: float


@dataclass
class DualState:
    """Multiplier, iteration counter and per-iteration history of one solve."""

    lam: float
    delta0: float
    t: int = 0
    history: list[IterationRecord] = field(default_factory=list)

    def step_size(self) -> float:
        """Diminishing step delta0 / sqrt(t) for the upcoming step."""
        return self.delta0 / math.sqrt(self.t + 1)


def closed_form_power(a, b, c, q, lam):
    """Vectorized maximizer of the priced per-subcarrier surplus.

    Solves the stationarity quadratic with the common b*c factor divided
    out (A' = a^2, B' = a*(2 + q*(b + c)),
    C' = (1 + q*b)*(1 + q*c) - a*q*(b - c)/lam), which has the same roots
    and stays regular at c = 0.  An interior maximizer exists iff C' < 0;
    it is evaluated as -2*C' / (B' + sqrt(B'^2 - 4*A'*C')), the
    cancellation-free form of the larger quadratic root.  Entries with
    b <= c, a = 0 or q = 0 get zero power.
    """
    a, b, c, q = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (a, b, c, q)))
    good = (b > c) & (a > 0) & (q > 0)
    b_coef = a * (2.0 + q * (b + c))
    c_coef = (1.0 + q * b) * (1.0 + q * c) - a * q * (b - c) / lam
    interior = good & (c_coef < 0)
    disc = np.where(interior, b_coef * b_coef - 4.0 * (a * a) * c_coef, 1.0)
    root = -2.0 * c_coef / (b_coef + np.sqrt(disc))
    return np.where(interior, root, 0.0)


def optimal_power(gains: LinkGains, q: float, lam: float
                  ) -> tuple[float, QuadraticCoefficients]:
    """Closed-form BS power for one candidate triple at multiplier lam.

    Args:
        gains: normalized link gains (a, b, c), finite and non-negative.
        q: relay power on this subcarrier, >= 0.
        lam: power price, > 0.

    Returns:
        (p_star, coefficients): the surplus maximizer over p >= 0 and the
        quadratic coefficients (in their full b*c-scaled form) with
        zeta = 1 + a*p_star.
    """
    a, b, c = gains.a, gains.b, gains.c
    if not np.isfinite(q) or q < 0:
        raise ValueError(f"q must be finite and non-negative, got {q}")
    if not np.isfinite(lam) or lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    p_star = float(closed_form_power(a, b, c, q, lam))
    coeffs = QuadraticCoefficients(
        A=a * a * b * c,
        B=a * b * c * (2.0 + q * (b + c)),
        C=b * c * ((1.0 + q * b) * (1.0 + q * c) - a * q * (b - c) / lam),
        zeta_at_root=1.0 + a * p_star,
    )
    return p_star, coeffs


def candidate_surplus(a, b, c, q, lam, p) -> np.ndarray:
    """Priced surplus psi(p) in nats; exactly 0 wherever p = 0.

    Unpowered candidates contribute nothing (no transmission, no price), so
    the surplus of a candidate whose optimal power is zero is zero, matching
    the p = 0 rate convention.  A c = 0 entry with positive power uses the
    same limit expression as the rate convention.
    """
    a, b, c, q, p = np.broadcast_arrays(
        *(np.asarray(x, dtype=float) for x in (a, b, c, q, p))
    )
    zeta = 1.0 + a * p
    pos = p > 0
    b_safe = np.where(pos & (b > 0), b, 1.0)
    c_safe = np.where(pos & (c > 0), c, 1.0)
    gain = np.log(b_safe * (zeta + q * c)) - np.log(c_safe * (zeta + q * b))
    gain_c0 = np.log(zeta + q * b) - np.log(zeta)
    gain = np.where(c > 0, gain, gain_c0)
    return np.where(pos, gain - lam * p, 0.0)


def zero_power_surplus(b, c, q) -> np.ndarray:
    """Limit of the unpriced surplus as p -> 0+, clamped at 0 (nats).

    The rate expression does not vanish with the BS power: it tends to
    log(b (1 + q c) / (c (1 + q b))), which is positive whenever b > c (and
    log(1 + q b) in the c = 0 limit).  A candidate priced out to p = 0
    therefore still has supremum value: infinitesimal power recovers this
    level at no cost.  The dual objective must count it, or it stops being
    an upper bound on the primal.
    """
    b, c, q = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (b, c, q)))
    b_safe = np.where(b > 0, b, 1.0)
    c_safe = np.where(c > 0, c, 1.0)
    level = np.log(b_safe * (1.0 + q * c)) - np.log(c_safe * (1.0 + q * b))
    level_c0 = np.log1p(q * b)
    level = np.where(c > 0, level, level_c0)
    return np.maximum(np.where(b > 0, level, 0.0), 0.0)


def _candidate_tables(gains: NormalizedGains, q: np.ndarray, lam: float,
                      p_cap: float):
    """Per-candidate power, priced surplus and supremum tables, shape (N, J, K).

    Candidate powers are searched over the box [0, p_cap] with p_cap = PT:
    no feasible allocation can put more than the whole budget on one
    subcarrier, and the cap is what the closed-form root exceeds only in
    degenerate corners (a tiny BS-relay gain makes the root grow like
    1/lam, which would otherwise hand the subgradient an unbounded step).
    The priced surplus is concave, so the box maximizer is the clipped
    root.

    The supremum table dominates the surplus table: where the priced
    optimum is positive the two agree, and where it is zero the supremum
    keeps the zero-power level that the surplus (by the rate convention)
    drops.
    """
    a = gains.a[:, :, None]
    c = gains.c[:, :, None]
    q3 = np.asarray(q)[:, :, None]
    p_all = np.minimum(closed_form_power(a, gains.b, c, q3, lam), p_cap)
    metric_all = candidate_surplus(a, gains.b, c, q3, lam, p_all)
    bound_all = np.maximum(metric_all, zero_power_surplus(gains.b, c, q3))
    return p_all, metric_all, bound_all


def _evaluation_power_table(assign: Assignment | None, budgets: np.ndarray,
                            n: int, j_count: int) -> np.ndarray:
    """Relay power each candidate (i, j) would get, shape (N, J).

    Candidates are valued at the uniform shares Q_j / N_j implied by the
    previous iterate's assignment counts, the same table the relay power
    rule would publish for that assignment.  Before any assignment exists,
    an even N/J split over the relays seeds the fixed point.
    """
    if assign is None:
        return np.broadcast_to(budgets * j_count / n, (n, j_count)).copy()
    return relay_power_update(assign, budgets)


def _assign_from_tables(p_all: np.ndarray, metric_all: np.ndarray
                        ) -> tuple[Assignment, np.ndarray, np.ndarray]:
    """Argmax of the given metric table per subcarrier, lowest (j, k) on ties."""
    n, j_count, k_count = metric_all.shape
    flat = metric_all.reshape(n, j_count * k_count)
    winner = flat.argmax(axis=1)
    j_star, k_star = np.divmod(winner, k_count)
    eta = np.zeros((n, j_count, k_count), dtype=np.int8)
    rows = np.arange(n)
    eta[rows, j_star, k_star] = 1
    return Assignment(eta=eta), p_all[rows, j_star, k_star], flat[rows, winner]


def assign_subcarriers(gains: NormalizedGains, q: np.ndarray, lam: float
                       ) -> tuple[Assignment, np.ndarray, np.ndarray]:
    """Pick the value-maximizing (relay, user) pair on every subcarrier.

    Evaluates the closed-form power of all J*K candidates per subcarrier at
    multiplier lam and relay power table q, then takes the argmax of the
    per-candidate supremum: the priced surplus at the optimum power, or the
    zero-power level when the price pushes the optimum to zero.  Ranking by
    the surplus alone would discard the zero-power level and leave every
    priced-out subcarrier with an all-zero metric row, turning its
    assignment into tie-break noise; the supremum keeps the channel
    ordering visible at any multiplier.  Ties resolve to the lowest
    (relay, user) index pair.

    Returns:
        (assignment, p, metric): exclusive assignment, the winning pair's
        power per subcarrier, and its supremum value per subcarrier (nats).
    """
    p_all, _, bound_all = _candidate_tables(gains, q, lam, p_cap=np.inf)
    return _assign_from_tables(p_all, bound_all)


def subgradient_step(state: DualState, assign: Assignment, p: np.ndarray,
                     pt_budget: float, dual_value: float = math.nan,
                     primal_value: float = math.nan) -> DualState:
    """Projected subgradient update of the multiplier.

    Appends this iterate to the history, then moves the multiplier along the
    budget violation: lam <- max(0, lam + step * (sum(p) - PT)) with
    step = delta0 / sqrt(t).  Exclusivity makes sum over assigned powers
    just sum(p).
    """
    power_sum = float(np.sum(p))
    state.history.append(IterationRecord(
        t=state.t + 1, lam=state.lam, power_sum=power_sum,
        dual_value=dual_value, primal_value=primal_value,
    ))
    state.lam = max(0.0, state.lam + state.step_size() * (power_sum - pt_budget))
    state.t += 1
    return state


def _gather_assigned(gains: NormalizedGains, assign: Assignment, q: np.ndarray):
    """Per-subcarrier (a, b, c, q) of the assigned pairs."""
    rows = np.arange(assign.num_subcarriers)
    j_sel = assign.pairs[:, 0]
    k_sel = assign.pairs[:, 1]
    return (gains.a[rows, j_sel], gains.b[rows, j_sel, k_sel],
            gains.c[rows, j_sel], np.asarray(q)[rows, j_sel])


def budget_scale(p: np.ndarray, pt_budget: float) -> float:
    """Factor scaling a power vector to spend the BS budget exactly.

    Overspending iterates are scaled down into feasibility; underspending
    ones (the subgradient can terminate on the low side of a support jump)
    are scaled up, which only helps since the rate increases in every p_i.
    An all-zero vector is left alone.
    """
    power_sum = float(np.sum(p))
    return pt_budget / power_sum if power_sum > 0 else 1.0


def best_repair(av, bv, cv, qv, p: np.ndarray, pt_budget: float
                ) -> tuple[np.ndarray, float]:
    """Best feasible power profile recoverable from one iterate's powers.

    Pricing switches off every subcarrier whose marginal value falls below
    the multiplier, but the rate expression does not vanish at zero power:
    a switched-off subcarrier with a positive zero-power level forfeits
    rate that even an unoptimized even spread keeps.  Three feasible
    candidates are compared on the assigned links (a, b, c, q): the
    iterate's powers scaled onto the budget, the even spread over all
    subcarriers, and the even spread restricted to subcarriers with
    positive zero-power level.

    Returns:
        (powers, rate): the winning profile, spending exactly pt_budget
        unless everything is dead, and its sum rate in bits/s/Hz.
    """
    n = np.asarray(p).shape[0]
    candidates = [p * budget_scale(p, pt_budget), np.full(n, pt_budget / n)]
    useful = zero_power_surplus(bv, cv, qv) > 0
    if useful.any():
        candidates.append(np.where(useful, pt_budget / useful.sum(), 0.0))
    rates = [float(np.sum(secrecy_rates(av, bv, cv, cand, qv)))
             for cand in candidates]
    best = int(np.argmax(rates))
    return candidates[best], rates[best]


def repaired_primal_rate(gains: NormalizedGains, assign: Assignment,
                         p: np.ndarray, q: np.ndarray, pt_budget: float) -> float:
    """Sum rate (bits) of the best feasible repair of an iterate.

    Uses the same relay power table the iterate was evaluated with, so the
    value is a feasible primal objective that the dual value upper-bounds.
    """
    av, bv, cv, qv = _gather_assigned(gains, assign, q)
    return best_repair(av, bv, cv, qv, p, pt_budget)[1]


def solve_joint(config: SystemConfig, gains: NormalizedGains) -> AllocationResult:
    """Joint assignment and power allocation by dual decomposition.

    Repeats {relay power update; per-subcarrier assignment at the current
    multiplier; subgradient step} until the spent BS power is within
    eps_pt * PT of the budget, the multiplier stalls below eps_lambda, or
    t_max iterations elapse (converged = False in the last case).  The relay
    power table evaluated by the candidates comes from the previous
    iterate's assignment counts via the uniform rule, starting from an even
    N/J split.  Candidates are ranked by their supremum value (priced
    surplus at the optimum power, or the zero-power level when priced out),
    which keeps the channel ordering visible even when the multiplier
    prices a subcarrier out entirely.  Subcarriers whose supremum is zero
    everywhere are parked on the busiest value-bearing relay, where their
    presence dilutes the per-subcarrier relay power and lifts the other
    rates there.

    The solution is read off the multiplier's terminal neighborhood: the
    best repaired iterate among the last few, where the repair picks the
    strongest of the iterate's scaled powers, the even spread, and the even
    spread on live subcarriers (see best_repair).  Near a converged
    multiplier the trailing iterates are interchangeable, so this is the
    final iterate in the usual case; when the assignment <-> relay-count
    fixed point ends in a short cycle instead (easily provoked with very few
    subcarriers, where moving one subcarrier between relays jolts q), it
    picks the good phase of the cycle rather than whichever one t_max
    happened to land on.

    The dual value recorded per iteration uses the same per-candidate
    supremum, so it upper-bounds every feasible primal value at the same
    relay power table.
    """
    params = config.solver
    budgets = config.relay_budgets()
    lam0 = params.lambda0 if params.lambda0 is not None else 1.0 / config.PT
    delta0 = params.delta0 if params.delta0 is not None else 0.1 * lam0 / config.PT
    state = DualState(lam=lam0, delta0=delta0)

    converged = False
    reason = "max_iter"
    prev_assign: Assignment | None = None
    prev_live: np.ndarray | None = None
    window: deque[tuple[Assignment, np.ndarray]] = deque(maxlen=TERMINAL_WINDOW)
    for _ in range(params.t_max):
        lam_eval = max(state.lam, LAMBDA_FLOOR)
        q = _evaluation_power_table(prev_assign, budgets, config.N, config.J)
        p_all, _, bound_all = _candidate_tables(gains, q, lam_eval,
                                                p_cap=config.PT)
        assign, p, win = _assign_from_tables(p_all, bound_all)
        # A subcarrier with zero supremum everywhere (no candidate with
        # b > c) earns nothing no matter where it sits, but its presence on
        # a relay still dilutes that relay's per-subcarrier power, which
        # raises every other rate there.  The argmax is indifferent for
        # such subcarriers, so resolve them onto the relay carrying the
        # most value-bearing subcarriers in the previous iterate instead
        # of the default lowest-index pair.
        dead = win <= 0.0
        if dead.any() and prev_live is not None and prev_live.max() > 0:
            j_park = int(prev_live.argmax())
            assign.eta[dead] = 0
            assign.eta[dead, j_park, 0] = 1
        prev_live = np.bincount(assign.pairs[:, 0][win > 0.0],
                                minlength=config.J)
        window.append((assign, p))
        power_sum = float(np.sum(p))
        bound_sum = float(np.sum(bound_all.reshape(config.N, -1).max(axis=1)))
        dual_bits = (bound_sum + lam_eval * config.PT) / TWO_LN2
        primal_bits = repaired_primal_rate(gains, assign, p, q, config.PT)
        lam_before = state.lam
        subgradient_step(state, assign, p, config.PT,
                         dual_value=dual_bits, primal_value=primal_bits)
        if abs(power_sum - config.PT) <= params.eps_pt * config.PT:
            converged, reason = True, "power"
            break
        if abs(state.lam - lam_before) <= params.eps_lambda:
            converged, reason = True, "lambda"
            break
        prev_assign = assign

    assign, power, rate = None, None, -1.0
    for cand_assign, cand_p in reversed(window):
        q_table = relay_power_update(cand_assign, budgets)
        av, bv, cv, qv = _gather_assigned(gains, cand_assign, q_table)
        rep_p, cand_rate = best_repair(av, bv, cv, qv, cand_p, config.PT)
        if cand_rate > rate:
            assign, rate = cand_assign, cand_rate
            power = PowerAllocation(p=rep_p, q=q_table)
    return AllocationResult(
        scheme=Scheme.OPT, assignment=assign, power=power, sum_rate=rate,
        converged=converged, iterations=state.t, dual_history=state,
        stop_reason=reason,
    )
