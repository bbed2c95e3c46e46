"""Core PAC code machinery: domain types, transforms and rate profiles.

A PAC code is described by (N, K, info_set, gen).  Encoding chains three
steps: rate profiling (scatter K message bits into a length-N vector,
zeros elsewhere), a rate-1 convolution (upper-triangular Toeplitz
transform), and the polar butterfly transform.

All indices are 0-based.  Bit vectors are numpy arrays over {0, 1}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "ConvGenerator",
    "CodeSpec",
    "InvalidGeneratorError",
    "parse_generator",
    "conv_transform",
    "conv_inverse",
    "polar_transform",
    "encode",
    "rm_score",
    "rm_profile",
    "ga_polar_profile",
    "split_info_set",
    "toeplitz_matrix",
    "polar_matrix",
    "load_profile",
    "save_profile",
]


class InvalidGeneratorError(ValueError):
    """Raised when a convolutional generator violates g_0 = g_last = 1."""


@dataclass(frozen=True)
class ConvGenerator:
    """Binary convolution coefficients (g_0, ..., g_ell), g_0 = g_ell = 1.

    ell = 0 (coeffs == (1,)) is the identity convolution; the PAC code
    then degenerates to a plain polar code.
    """

    coeffs: tuple[int, ...]

    def __post_init__(self):
        c = tuple(int(b) for b in self.coeffs)
        object.__setattr__(self, "coeffs", c)
        if len(c) == 0 or any(b not in (0, 1) for b in c):
            raise InvalidGeneratorError(f"coefficients must be bits: {c}")
        if c[0] != 1 or c[-1] != 1:
            raise InvalidGeneratorError(
                f"generator must start and end with 1, got {c}"
            )

    @property
    def ell(self) -> int:
        """Memory length (number of delay taps)."""
        return len(self.coeffs) - 1

    def __len__(self) -> int:
        return len(self.coeffs)


def parse_generator(octal: str) -> ConvGenerator:
    """Parse an octal numeral into a ConvGenerator.

    The most-significant bit of the octal value maps to g_0 and the
    trailing bit to g_ell, so "133" -> (1,0,1,1,0,1,1) with ell = 6.
    """
    try:
        value = int(octal, 8)
    except (ValueError, TypeError) as exc:
        raise InvalidGeneratorError(f"not an octal numeral: {octal!r}") from exc
    if value <= 0:
        raise InvalidGeneratorError(f"generator must be nonzero: {octal!r}")
    bits = tuple(int(b) for b in bin(value)[2:])
    return ConvGenerator(bits)


def generator_to_octal(gen: ConvGenerator) -> str:
    """Inverse of parse_generator, for reports and manifests."""
    return format(int("".join(str(b) for b in gen.coeffs), 2), "o")


@dataclass(frozen=True)
class CodeSpec:
    """Full PAC code description.

    info_set is kept strictly sorted; K always equals len(info_set).
    """

    N: int
    K: int
    info_set: tuple[int, ...]
    gen: ConvGenerator = field(default_factory=lambda: ConvGenerator((1,)))

    def __post_init__(self):
        idx = tuple(sorted(int(i) for i in self.info_set))
        object.__setattr__(self, "info_set", idx)
        n = self.N
        if n < 2 or n & (n - 1):
            raise ValueError(f"N must be a power of two >= 2, got {n}")
        if len(set(idx)) != len(idx):
            raise ValueError("info_set contains duplicates")
        if idx and (idx[0] < 0 or idx[-1] >= n):
            raise ValueError(f"info_set indices out of range for N={n}")
        if self.K != len(idx):
            raise ValueError(f"K={self.K} but |info_set|={len(idx)}")

    @classmethod
    def make(cls, N: int, info_set, gen: ConvGenerator | None = None) -> "CodeSpec":
        idx = tuple(sorted(int(i) for i in info_set))
        return cls(N=N, K=len(idx), info_set=idx, gen=gen or ConvGenerator((1,)))

    @property
    def rate(self) -> float:
        return self.K / self.N


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------

def conv_transform(v: np.ndarray, gen: ConvGenerator) -> np.ndarray:
    """Rate-1 convolution u_i = sum_j g_j v_{i-j} over GF(2).

    Equivalent to multiplying v by the upper-triangular Toeplitz matrix
    of the generator; invertible because g_0 = 1.
    """
    v = np.asarray(v, dtype=np.uint8)
    full = np.convolve(v, np.asarray(gen.coeffs, dtype=np.uint8))
    return (full[: len(v)] & 1).astype(np.uint8)


def conv_inverse(u: np.ndarray, gen: ConvGenerator) -> np.ndarray:
    """Recover v from u = conv_transform(v, gen) by back-substitution."""
    u = np.asarray(u, dtype=np.uint8)
    g = gen.coeffs
    v = np.zeros(len(u), dtype=np.uint8)
    for i in range(len(u)):
        acc = u[i]
        for j in range(1, min(gen.ell, i) + 1):
            if g[j]:
                acc ^= v[i - j]
        v[i] = acc
    return v


def polar_transform(u: np.ndarray) -> np.ndarray:
    """Polar butterfly x = u G_N, G_N the Kronecker power of [[1,0],[1,1]].

    Self-inverse over GF(2); O(N log N).
    """
    x = np.asarray(u, dtype=np.uint8).copy()
    n = len(x)
    if n == 0 or n & (n - 1):
        raise ValueError(f"length must be a power of two, got {n}")
    step = 1
    while step < n:
        for start in range(0, n, 2 * step):
            x[start : start + step] ^= x[start + step : start + 2 * step]
        step <<= 1
    return x


def encode(m: np.ndarray, spec: CodeSpec) -> np.ndarray:
    """PAC encode: profile K message bits, convolve, polar-transform."""
    m = np.asarray(m, dtype=np.uint8)
    if len(m) != spec.K:
        raise ValueError(f"message length {len(m)} != K={spec.K}")
    v = np.zeros(spec.N, dtype=np.uint8)
    if spec.K:
        v[list(spec.info_set)] = m
    return polar_transform(conv_transform(v, spec.gen))


# ---------------------------------------------------------------------------
# Dense reference matrices (debug scale only)
# ---------------------------------------------------------------------------

_DENSE_LIMIT = 64


def toeplitz_matrix(N: int, gen: ConvGenerator) -> np.ndarray:
    """Dense upper-triangular Toeplitz convolution matrix, N <= 64 only."""
    if N > _DENSE_LIMIT:
        raise ValueError(f"dense reference limited to N <= {_DENSE_LIMIT}")
    t = np.zeros((N, N), dtype=np.uint8)
    for r in range(N):
        for j, g in enumerate(gen.coeffs):
            if g and r + j < N:
                t[r, r + j] = 1
    return t


def polar_matrix(N: int) -> np.ndarray:
    """Dense polar transform matrix G_N, N <= 64 only."""
    if N > _DENSE_LIMIT:
        raise ValueError(f"dense reference limited to N <= {_DENSE_LIMIT}")
    g = np.array([[1]], dtype=np.uint8)
    kernel = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    while g.shape[0] < N:
        g = np.kron(kernel, g)
    return g


# ---------------------------------------------------------------------------
# Rate profiles
# ---------------------------------------------------------------------------

def rm_score(i: int) -> int:
    """Reed-Muller reliability proxy: popcount of the 0-based index."""
    if i < 0:
        raise ValueError("index must be non-negative")
    return int(i).bit_count()


def rm_profile(N: int, K: int, variant: str = "high_index") -> tuple[int, ...]:
    """K indices with highest RM score.

    Ties at the boundary score: "high_index" keeps the largest indices
    among the tied score, "low_index" the smallest.  Deterministic.
    """
    if variant not in ("high_index", "low_index"):
        raise ValueError(f"unknown variant {variant!r}")
    if not 0 <= K <= N:
        raise ValueError(f"need 0 <= K <= N, got K={K}, N={N}")
    scores = np.array([rm_score(i) for i in range(N)])
    chosen: list[int] = []
    need = K
    for s in range(int(scores.max(initial=0)), -1, -1):
        tier = [i for i in range(N) if scores[i] == s]
        if len(tier) <= need:
            chosen.extend(tier)
            need -= len(tier)
        else:
            tier.sort(reverse=(variant == "high_index"))
            chosen.extend(tier[:need])
            need = 0
        if need == 0:
            break
    return tuple(sorted(chosen))


# Two-function density-evolution approximation for the check-node update
# of mean LLRs.  Valid enough across the ranges a design SNR produces.

def _phi(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.where(
        x > 0,
        np.exp(-0.4527 * np.power(np.maximum(x, 1e-30), 0.86) + 0.0218),
        1.0,
    )
    return np.clip(out, 0.0, 1.0)


def _phi_inv(y: np.ndarray) -> np.ndarray:
    y = np.clip(np.asarray(y, dtype=float), 1e-12, 1.0 - 1e-12)
    return np.power((0.0218 - np.log(y)) / 0.4527, 1.0 / 0.86)


def ga_mean_llrs(N: int, design_snr_db: float) -> np.ndarray:
    """Mean LLR per input position under the Gaussian approximation.

    design_snr_db is Es/N0 in dB.  Index order matches the encoder here
    (no bit reversal): the most significant index bit selects the
    outermost channel transform.
    """
    if N < 1 or N & (N - 1):
        raise ValueError(f"N must be a power of two, got {N}")
    gamma = 10.0 ** (design_snr_db / 10.0)
    means = np.array([4.0 * gamma])
    while len(means) < N:
        checked = _phi_inv(1.0 - (1.0 - _phi(means)) ** 2)
        doubled = 2.0 * means
        # prefix expansion: position p at this level becomes 2p (next
        # index bit 0, check transform) and 2p+1 (bit 1, variable)
        nxt = np.empty(2 * len(means))
        nxt[0::2] = checked
        nxt[1::2] = doubled
        means = nxt
    return means


def ga_polar_profile(N: int, K: int, design_snr_db: float = 2.0) -> tuple[int, ...]:
    """K most reliable indices under density-evolution GA construction.

    Ties broken toward the higher index.  Deterministic.
    """
    if not 0 <= K <= N:
        raise ValueError(f"need 0 <= K <= N, got K={K}, N={N}")
    means = ga_mean_llrs(N, design_snr_db)
    order = np.lexsort((-np.arange(N), -means))  # reliability desc, index desc
    return tuple(sorted(int(i) for i in order[:K]))


def split_info_set(info_set, N: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Split an info set at N/2: (first-half indices, shifted second-half)."""
    if N % 2:
        raise ValueError(f"N must be even, got {N}")
    half = N // 2
    a1 = tuple(sorted(i for i in info_set if i < half))
    a2 = tuple(sorted(i - half for i in info_set if i >= half))
    return a1, a2


# ---------------------------------------------------------------------------
# Profile file I/O: JSON array of 0-based indices, or newline-delimited text
# ---------------------------------------------------------------------------

def load_profile(path: str | Path) -> tuple[int, ...]:
    text = Path(path).read_text().strip()
    if not text:
        return ()
    if text.lstrip().startswith("["):
        data = json.loads(text)
        if not isinstance(data, list):
            raise ValueError(f"profile JSON must be an array: {path}")
        return tuple(sorted(int(i) for i in data))
    return tuple(sorted(int(line) for line in text.splitlines() if line.strip()))


def save_profile(path: str | Path, info_set) -> None:
    Path(path).write_text(json.dumps(sorted(int(i) for i in info_set)) + "\n")
