"""Secrecy-rate evaluation for one amplify-and-forward relay hop.

The relay scales what it hears from the base station so its own transmit
power is q, then forwards; both the scheduled user and the eavesdropper
receive that forwarded signal.  A complete transmission occupies two time
slots, hence the factor 1/2 in every rate.  All expressions below work on
noise-normalized squared gains (a, b, c) and are valid in the high-SNR
regime; two explicit conventions patch the points where that approximation
breaks down: zero base-station power means zero rate (nothing is sent), and
a vanishing eavesdropper gain falls back to the explicit limit expression
rather than a tiny-value substitute.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .allocation import Assignment, PowerAllocation
from .channel import NormalizedGains


@dataclass(frozen=True)
class LinkGains:
    """Normalized gains of one (subcarrier, relay, user) triple.

    a: BS->relay, b: relay->user, c: relay->eavesdropper, each a squared
    channel magnitude divided by the noise variance.
    """

    a: float
    b: float
    c: float

    def __post_init__(self) -> None:
        vals = (self.a, self.b, self.c)
        if not all(np.isfinite(v) for v in vals) or any(v < 0 for v in vals):
            raise ValueError(f"link gains must be finite and non-negative: {vals}")


def amplification_factor(p: float, q: float, h_gain_sq: float, sigma2: float) -> float:
    """Relay scaling factor that makes the forwarded power equal q.

    Args:
        p: base-station transmit power on the subcarrier.
        q: relay transmit power on the subcarrier.
        h_gain_sq: |h|^2 of the BS->relay link.
        sigma2: noise variance at the relay.

    Returns:
        sqrt(q / (p * h_gain_sq + sigma2)).
    """
    if sigma2 <= 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    if p < 0 or q < 0 or h_gain_sq < 0:
        raise ValueError("powers and gains must be non-negative")
    return float(np.sqrt(q / (p * h_gain_sq + sigma2)))


def snr_pair(gains: LinkGains, p: float, q: float) -> tuple[float, float]:
    """Exact post-amplification SNRs at the user and the eavesdropper.

    Computed from the amplification factor; with normalized gains the noise
    variance drops out, so it is evaluated at sigma2 = 1.  Algebraically the
    user SNR equals a*b*p*q / (a*p + b*q + 1), and the eavesdropper SNR is
    the same with c in place of b.
    """
    beta2 = amplification_factor(p, q, gains.a, 1.0) ** 2
    snr_user = beta2 * p * gains.b * gains.a / (beta2 * gains.b + 1.0)
    snr_eve = beta2 * p * gains.c * gains.a / (beta2 * gains.c + 1.0)
    return float(snr_user), float(snr_eve)


def secrecy_rates(a, b, c, p, q) -> np.ndarray:
    """Vectorized per-subcarrier secrecy rate in bits/s/Hz.

    High-SNR form 0.5*log2(b*(1 + a*p + q*c) / (c*(1 + a*p + q*b))), clipped
    at zero.  Conventions: p = 0 gives 0 (the approximation is invalid there
    and nothing is transmitted); c = 0 uses the limit expression
    0.5*log2(1 + a*p + q*b) - 0.5*log2(1 + a*p).
    """
    a, b, c, p, q = np.broadcast_arrays(
        *(np.asarray(x, dtype=float) for x in (a, b, c, p, q))
    )
    zeta = 1.0 + a * p
    b_safe = np.where(b > 0, b, 1.0)
    c_safe = np.where(c > 0, c, 1.0)
    general = 0.5 * np.log2(b_safe * (zeta + q * c) / (c_safe * (zeta + q * b)))
    limit_c0 = 0.5 * np.log2(zeta + q * b) - 0.5 * np.log2(zeta)
    rate = np.where(c > 0, general, limit_c0)
    rate = np.where(b > 0, rate, 0.0)
    rate = np.where(p > 0, rate, 0.0)
    return np.maximum(rate, 0.0)


def secrecy_rate(gains: LinkGains, p: float, q: float) -> float:
    """Secrecy rate of a single triple; see secrecy_rates for conventions."""
    if p < 0 or q < 0:
        raise ValueError("powers must be non-negative")
    return float(secrecy_rates(gains.a, gains.b, gains.c, p, q))


def sum_secrecy_rate(gains: NormalizedGains, assign: Assignment,
                     power: PowerAllocation) -> float:
    """Sum of per-subcarrier secrecy rates over the assigned triples.

    Each subcarrier contributes the rate of its single assigned
    (relay, user) pair, evaluated at its BS power p[i] and the assigned
    relay's per-subcarrier power q[i, j].
    """
    assign.validate()
    rows = np.arange(assign.num_subcarriers)
    j_sel = assign.pairs[:, 0]
    k_sel = assign.pairs[:, 1]
    rates = secrecy_rates(
        gains.a[rows, j_sel],
        gains.b[rows, j_sel, k_sel],
        gains.c[rows, j_sel],
        power.p,
        power.q[rows, j_sel],
    )
    return float(np.sum(rates))
