"""Union bound on ML codeword error probability over BPSK/AWGN."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .wef import WeightCounts

__all__ = ["SnrPoint", "q_function", "pairwise_error_prob", "union_bound"]


@dataclass(frozen=True)
class SnrPoint:
    """Linear symbol SNR gamma_s = Es/N0."""

    gamma_s: float

    def __post_init__(self):
        if not self.gamma_s > 0:
            raise ValueError(f"gamma_s must be positive, got {self.gamma_s}")

    @classmethod
    def from_esn0_db(cls, esn0_db: float) -> "SnrPoint":
        return cls(10.0 ** (esn0_db / 10.0))

    @classmethod
    def from_ebn0_db(cls, ebn0_db: float, rate: float) -> "SnrPoint":
        """gamma_s = R * Eb/N0 for code rate R = K/N."""
        if not 0 < rate <= 1:
            raise ValueError(f"rate must be in (0, 1], got {rate}")
        return cls(rate * 10.0 ** (ebn0_db / 10.0))

    @property
    def noise_var(self) -> float:
        """Per-dimension noise variance for unit-energy BPSK."""
        return 1.0 / (2.0 * self.gamma_s)


def q_function(x):
    """Gaussian tail Q(x) = erfc(x / sqrt(2)) / 2."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


def pairwise_error_prob(d, snr: SnrPoint):
    """P(decide a codeword at Hamming distance d over the sent one).

    BPSK with unit symbol energy puts the pair at squared Euclidean
    distance 4d, so the error probability is Q(sqrt(2 d gamma_s)).
    """
    d = np.asarray(d, dtype=float)
    if np.any(d < 1):
        raise ValueError("pairwise error needs distance d >= 1")
    return q_function(np.sqrt(2.0 * d * snr.gamma_s))


def union_bound(counts: WeightCounts, snr: SnrPoint) -> float:
    """Sum of pairwise error probabilities weighted by codeword counts.

    Runs over d = 1..N; reported raw (a bound may exceed 1).
    """
    d = np.arange(1, counts.n + 1)
    mass = np.asarray(counts.counts[1:], dtype=float)
    terms = mass * q_function(np.sqrt(2.0 * d * snr.gamma_s))
    return float(terms.sum())
