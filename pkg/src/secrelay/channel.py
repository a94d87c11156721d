"""Frequency-selective channel generation for the dual-hop downlink.

Every link (base station to relay, relay to user, relay to eavesdropper) is a
short FIR channel: ``num_taps`` i.i.d. circularly symmetric complex Gaussian
taps whose N-point DFT gives the per-subcarrier gains.  Each link draws from
its own RNG stream, seeded by the tuple (seed, link tag, relay index, user
index), so a realization is reproducible link by link and independent of how
many other links exist.  Link tags: 0 = BS->relay, 1 = relay->user,
2 = relay->eavesdropper (tag 3 is reserved for assignment draws elsewhere).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import InvalidConfigError, SystemConfig

LINK_BS_RELAY = 0
LINK_RELAY_USER = 1
LINK_RELAY_EVE = 2


@dataclass
class TapProfile:
    """Impulse-response profile: tap count, per-tap variance, RNG seed.

    tap_variance is E|tap|^2 per tap; the default None resolves to
    1/num_taps so that every subcarrier has unit mean squared gain.
    """

    num_taps: int = 6
    tap_variance: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_taps < 1:
            raise InvalidConfigError(f"num_taps must be >= 1, got {self.num_taps}")
        if self.tap_variance is None:
            self.tap_variance = 1.0 / self.num_taps
        if not np.isfinite(self.tap_variance) or self.tap_variance <= 0:
            raise InvalidConfigError(
                f"tap_variance must be positive, got {self.tap_variance}"
            )
        if self.seed < 0:
            raise InvalidConfigError(f"seed must be non-negative, got {self.seed}")


@dataclass
class ChannelRealization:
    """Complex per-subcarrier gains for one drawn network realization.

    h[i, j]: BS -> relay j on subcarrier i.
    g[i, j, k]: relay j -> user k on subcarrier i.
    f[i, j]: relay j -> eavesdropper on subcarrier i.
    """

    h: np.ndarray
    g: np.ndarray
    f: np.ndarray
    sigma2: float


@dataclass
class NormalizedGains:
    """Squared channel magnitudes divided by the noise variance.

    a[i, j] = |h|^2 / sigma2, b[i, j, k] = |g|^2 / sigma2,
    c[i, j] = |f|^2 / sigma2.  These are the only channel quantities the
    rate expressions and the power optimizer need.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray


def _link_rng(seed: int, tag: int, j: int, k: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, tag, j, k]))


def _link_response(rng: np.random.Generator, num_taps: int, tap_variance: float,
                   n: int) -> np.ndarray:
    """N-point frequency response of one random FIR link."""
    scale = np.sqrt(tap_variance / 2.0)
    taps = scale * (rng.standard_normal(num_taps) + 1j * rng.standard_normal(num_taps))
    return np.fft.fft(taps, n=n)


def generate_channels(config: SystemConfig, profile: TapProfile) -> ChannelRealization:
    """Draw one full channel realization for the configured network.

    Args:
        config: system dimensions (N, K, J) and noise variance.
        profile: tap count, tap variance and seed for this realization.

    Returns:
        ChannelRealization with arrays shaped (N, J), (N, J, K), (N, J).

    Raises:
        InvalidConfigError: if the profile has more taps than subcarriers.
    """
    n, j_count, k_count = config.N, config.J, config.K
    if profile.num_taps > n:
        raise InvalidConfigError(
            f"num_taps={profile.num_taps} exceeds N={n} subcarriers"
        )
    taps, var, seed = profile.num_taps, profile.tap_variance, profile.seed

    h = np.empty((n, j_count), dtype=complex)
    f = np.empty((n, j_count), dtype=complex)
    g = np.empty((n, j_count, k_count), dtype=complex)
    for j in range(j_count):
        h[:, j] = _link_response(_link_rng(seed, LINK_BS_RELAY, j), taps, var, n)
        f[:, j] = _link_response(_link_rng(seed, LINK_RELAY_EVE, j), taps, var, n)
        for k in range(k_count):
            g[:, j, k] = _link_response(_link_rng(seed, LINK_RELAY_USER, j, k),
                                        taps, var, n)
    return ChannelRealization(h=h, g=g, f=f, sigma2=config.sigma2)


def normalize_gains(channels: ChannelRealization) -> NormalizedGains:
    """Squared magnitudes over noise variance for every link."""
    s2 = channels.sigma2
    return NormalizedGains(
        a=np.abs(channels.h) ** 2 / s2,
        b=np.abs(channels.g) ** 2 / s2,
        c=np.abs(channels.f) ** 2 / s2,
    )
