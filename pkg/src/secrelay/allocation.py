"""Subcarrier-to-(relay, user) assignment bookkeeping and relay power sharing."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

ASSIGN_SEED_TAG = 3  # keeps assignment draws out of the channel link streams

if TYPE_CHECKING:  # pragma: no cover - import cycle guard, types only
    from .dual import DualState


class InvalidAssignmentError(ValueError):
    """An assignment tensor violates subcarrier exclusivity."""


@dataclass
class Assignment:
    """Binary selection tensor eta[i, j, k]: subcarrier i uses relay j, user k.

    Exclusivity requires exactly one (j, k) pair per subcarrier.  alpha and
    beta are the marginal indicators derived from eta: alpha[i, k] says user
    k owns subcarrier i, beta[j, k] says relay j forwards to user k somewhere.
    """

    eta: np.ndarray

    def __post_init__(self) -> None:
        self.eta = np.asarray(self.eta)
        if self.eta.ndim != 3:
            raise InvalidAssignmentError(
                f"eta must have shape (N, J, K), got {self.eta.shape}"
            )

    @classmethod
    def from_pairs(cls, pairs: np.ndarray, num_relays: int, num_users: int) -> Assignment:
        """Build the tensor from an (N, 2) array of (relay, user) indices."""
        pairs = np.asarray(pairs, dtype=int)
        n = pairs.shape[0]
        eta = np.zeros((n, num_relays, num_users), dtype=np.int8)
        eta[np.arange(n), pairs[:, 0], pairs[:, 1]] = 1
        return cls(eta=eta)

    @property
    def num_subcarriers(self) -> int:
        return self.eta.shape[0]

    @property
    def num_relays(self) -> int:
        return self.eta.shape[1]

    @property
    def num_users(self) -> int:
        return self.eta.shape[2]

    @property
    def pairs(self) -> np.ndarray:
        """(N, 2) array of the assigned (relay, user) index per subcarrier."""
        flat = self.eta.reshape(self.num_subcarriers, -1).argmax(axis=1)
        return np.stack(divmod(flat, self.num_users), axis=1)

    @property
    def alpha(self) -> np.ndarray:
        return (self.eta.sum(axis=1) > 0).astype(np.int8)

    @property
    def beta(self) -> np.ndarray:
        return (self.eta.sum(axis=0) > 0).astype(np.int8)

    def relay_counts(self) -> np.ndarray:
        """Number of subcarriers each relay forwards, length J."""
        return self.eta.sum(axis=(0, 2))

    def validate(self) -> None:
        """Raise InvalidAssignmentError unless every subcarrier has exactly one pair."""
        per_subcarrier = self.eta.reshape(self.num_subcarriers, -1).sum(axis=1)
        bad = np.flatnonzero(per_subcarrier != 1)
        if bad.size:
            raise InvalidAssignmentError(
                f"subcarriers {bad.tolist()} must each select exactly one "
                f"(relay, user) pair"
            )


@dataclass
class PowerAllocation:
    """Per-subcarrier BS powers p[i] and per-(subcarrier, relay) powers q[i, j].

    q is stored dense: column j holds the relay's uniform per-subcarrier
    share, meaningful wherever the assignment selects relay j.
    """

    p: np.ndarray
    q: np.ndarray


def random_assignment(num_subcarriers: int, num_relays: int, num_users: int,
                      seed: int) -> Assignment:
    """Uniform i.i.d. (relay, user) pair per subcarrier, one exclusive pair each."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, ASSIGN_SEED_TAG]))
    flat = rng.integers(0, num_relays * num_users, size=num_subcarriers)
    pairs = np.stack(divmod(flat, num_users), axis=1)
    return Assignment.from_pairs(pairs, num_relays, num_users)


def relay_power_update(assign: Assignment, budgets: np.ndarray) -> np.ndarray:
    """Uniform relay power rule: q[i, j] = Q_j / N_j.

    N_j counts the subcarriers whose winning pair uses relay j, so a relay
    splits its whole budget evenly over what it actually forwards.  Relays
    with no assigned subcarrier spend nothing; their column carries Q_j (the
    share they would put on a single subcarrier) so candidate evaluation
    stays well defined.

    Returns:
        Dense (N, J) array; column j is constant at Q_j / max(N_j, 1).
    """
    assign.validate()
    budgets = np.asarray(budgets, dtype=float)
    if budgets.shape != (assign.num_relays,):
        raise InvalidAssignmentError(
            f"budgets must have length J={assign.num_relays}, got {budgets.shape}"
        )
    counts = assign.relay_counts()
    per_subcarrier = budgets / np.maximum(counts, 1)
    return np.broadcast_to(per_subcarrier, (assign.num_subcarriers, assign.num_relays)).copy()


class Scheme(str, enum.Enum):
    """The three allocation schemes under comparison."""

    OPT = "opt"
    SUBOPT = "subopt"
    NONOPT = "nonopt"


@dataclass
class AllocationResult:
    """Outcome of one scheme on one channel realization.

    converged reports whether the dual loop met a stopping tolerance before
    its iteration cap (schemes without a loop set it True); dual_history
    carries the solver state for convergence traces, None when no dual loop
    ran.  stop_reason is one of "power", "lambda", "max_iter", "direct".
    """

    scheme: Scheme
    assignment: Assignment
    power: PowerAllocation
    sum_rate: float
    converged: bool
    iterations: int
    dual_history: "DualState | None" = None
    stop_reason: str = "direct"
