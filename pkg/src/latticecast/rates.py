"""Multicast capacity with coded side information, and per-receiver rate thresholds."""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass


def awgn_capacity(sigma2: float) -> float:
    """0.5 log2(1 + 1/sigma^2) bits per real dimension."""
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    return 0.5 * math.log2(1.0 + 1.0 / sigma2)


def capacity_term(M: int, sigma2: float, K: int) -> float:
    """Per-message rate receiver (M, sigma^2) can support: AWGN capacity / (K - M)."""
    if not 0 <= M < K:
        raise ValueError(f"side information rank M={M} must satisfy 0 <= M < K={K}")
    return awgn_capacity(sigma2) / (K - M)


def capacity(receivers: Iterable[tuple[int, float]], K: int) -> float:
    """Symmetric multicast capacity: the worst receiver's capacity term.

    ``receivers`` yields ``(M, sigma2)`` pairs.
    """
    terms = [capacity_term(M, s2, K) for M, s2 in receivers]
    if not terms:
        raise ValueError("capacity needs at least one receiver")
    return min(terms)


@dataclass(frozen=True)
class ThresholdResult:
    satisfied: bool
    snr_side: float
    rate_side: float
    sigma_z2: float
    sigma_z2_limit: float
    noise_form_satisfied: bool

    @property
    def consistent(self) -> bool:
        return self.satisfied == self.noise_form_satisfied


def threshold_check(M: int, sigma2: float, R: float, epsilon: float, K: int, tol: float = 1e-12) -> ThresholdResult:
    """Whether 0.5 log2(1 + 1/sigma^2) >= (R + eps)(K - M).

    Also evaluates the equivalent effective-noise form
    sigma^2 / (1 + sigma^2) <= 2^(-2 (R + eps)(K - M)).
    """
    if not 0 <= M < K:
        raise ValueError(f"side information rank M={M} must satisfy 0 <= M < K={K}")
    snr_side = awgn_capacity(sigma2)
    rate_side = (R + epsilon) * (K - M)
    sigma_z2 = sigma2 / (1.0 + sigma2)
    limit = 2.0 ** (-2.0 * rate_side)
    return ThresholdResult(
        satisfied=snr_side >= rate_side - tol,
        snr_side=snr_side,
        rate_side=rate_side,
        sigma_z2=sigma_z2,
        sigma_z2_limit=limit,
        noise_form_satisfied=sigma_z2 <= limit * (1 + tol),
    )


def threshold_sigma2(M: int, R: float, epsilon: float, K: int) -> float:
    """Largest noise variance meeting the threshold with equality."""
    return 1.0 / (2.0 ** (2.0 * (R + epsilon) * (K - M)) - 1.0)


def snr_db(sigma2: float) -> float:
    return 10.0 * math.log10(1.0 / sigma2)


def sigma2_from_snr_db(db: float) -> float:
    return 10.0 ** (-db / 10.0)
