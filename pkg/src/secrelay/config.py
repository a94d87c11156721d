"""Run configuration for the secrecy-rate allocation experiments."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class InvalidConfigError(ValueError):
    """A configuration value violates its declared invariants."""


@dataclass
class SolverParams:
    """Settings for the dual subgradient loop.

    The multiplier step at iteration t is delta0 / sqrt(t), a diminishing
    non-summable schedule.  ``None`` for delta0 or lambda0 means "derive a
    scale-aware default from the power budget at solve time": lambda0 = 1/PT
    and delta0 = 0.1 * lambda0 / PT (a tenth of the multiplier scale per
    budget-sized violation).
    """

    delta0: float | None = None
    lambda0: float | None = None
    t_max: int = 5000
    eps_pt: float = 0.01        # relative tolerance on the power budget
    eps_lambda: float = 1e-6    # absolute stall tolerance on the multiplier

    def __post_init__(self) -> None:
        if self.t_max < 1:
            raise InvalidConfigError(f"t_max must be >= 1, got {self.t_max}")
        if self.eps_pt <= 0 or self.eps_lambda <= 0:
            raise InvalidConfigError("solver tolerances must be positive")
        if self.delta0 is not None and self.delta0 <= 0:
            raise InvalidConfigError("delta0 must be positive when given")
        if self.lambda0 is not None and self.lambda0 <= 0:
            raise InvalidConfigError("lambda0 must be positive when given")


@dataclass
class SystemConfig:
    """Dimensions, budgets and noise level of one downlink instance.

    N subcarriers, K users, J relays, one eavesdropper.  PT is the base
    station power budget; Q holds per-relay budgets and defaults to PT/J
    each when left as None.  sigma2 is the common noise variance at every
    node and num_taps the channel impulse-response length.
    """

    N: int = 64
    K: int = 12
    J: int = 4
    PT: float = 10.0
    Q: Sequence[float] | np.ndarray | float | None = None
    sigma2: float = 1.0
    num_taps: int = 6
    seed: int = 0
    solver: SolverParams = field(default_factory=SolverParams)

    def __post_init__(self) -> None:
        if self.N < 1 or self.K < 1 or self.J < 1:
            raise InvalidConfigError(
                f"N, K, J must all be >= 1, got N={self.N} K={self.K} J={self.J}"
            )
        if not np.isfinite(self.PT) or self.PT <= 0:
            raise InvalidConfigError(f"PT must be positive, got {self.PT}")
        if not np.isfinite(self.sigma2) or self.sigma2 <= 0:
            raise InvalidConfigError(f"sigma2 must be positive, got {self.sigma2}")
        if self.num_taps < 1:
            raise InvalidConfigError(f"num_taps must be >= 1, got {self.num_taps}")
        if self.seed < 0:
            raise InvalidConfigError(f"seed must be non-negative, got {self.seed}")
        self.relay_budgets()  # validate Q eagerly

    def relay_budgets(self) -> np.ndarray:
        """Per-relay power budgets as a length-J array."""
        if self.Q is None:
            return np.full(self.J, self.PT / self.J)
        q = np.atleast_1d(np.asarray(self.Q, dtype=float))
        if q.size == 1:
            q = np.full(self.J, float(q[0]))
        if q.shape != (self.J,):
            raise InvalidConfigError(
                f"Q must be a scalar or have length J={self.J}, got shape {q.shape}"
            )
        if not np.all(np.isfinite(q)) or np.any(q <= 0):
            raise InvalidConfigError("all relay budgets must be positive and finite")
        return q
