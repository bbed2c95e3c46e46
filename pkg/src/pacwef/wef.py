"""Weight distributions of PAC codes: exact enumeration and a recursive
probabilistic approximation.

The exact path enumerates all 2^K codewords in Gray-code order, XORing one
precomputed generator row per step and histogramming popcounts.

The approximate path splits the code at N/2: the two input halves drive
half-length PAC sub-codes whose codewords add as  full = (x1 ^ x2, x2)
up to a sparse coupling term.  Ignoring how the supports of x1 and x2
align, the weight of x1 ^ x2 given the two weights is hypergeometric,
which turns the weight PMF of the full code into a bilinear combination
of the halves' PMFs.  Recursion stops at a threshold block length where
one of three base cases computes the block PMF:

  * randomized:  one more split, halves enumerated exactly, coupling
    between halves ignored;
  * improved:    one more split, enumerating the few input bits that
    feed the coupling term so its exact value conditions both halves;
  * exact_block: full enumeration of the block.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .pac_core import CodeSpec, ConvGenerator, conv_transform, polar_transform, split_info_set

__all__ = [
    "CapacityError",
    "WeightPMF",
    "WeightCounts",
    "exact_wef",
    "f_coeff",
    "f_coeff_fraction",
    "combine",
    "approx_wef",
    "base_randomized",
    "base_improved",
    "counts_from_pmf",
    "tv_distance",
    "APPROX_MODES",
]

APPROX_MODES = ("randomized", "improved", "exact_block")

DEFAULT_EXACT_CAP = 28     # max K for full enumeration
DEFAULT_BASE_CAP = 22      # max log2(work) per base-case enumeration

_CHUNK = 1 << 20


class CapacityError(RuntimeError):
    """An enumeration would exceed its configured work cap."""


# ---------------------------------------------------------------------------
# Result types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightPMF:
    """Distribution of the Hamming weight of a uniformly random codeword."""

    n: int
    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=np.float64)
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        if p.shape != (self.n + 1,):
            raise ValueError(f"PMF must have length n+1={self.n + 1}, got {p.shape}")
        if p.min(initial=0.0) < 0.0:
            raise ValueError("PMF has negative mass")
        total = float(p.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"PMF sums to {total}, expected 1 within 1e-9")


@dataclass(frozen=True)
class WeightCounts:
    """Codeword counts per Hamming weight; integer-valued in exact mode."""

    n: int
    counts: np.ndarray

    def __post_init__(self):
        c = np.array(self.counts)
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)
        if c.shape != (self.n + 1,):
            raise ValueError(f"counts must have length n+1={self.n + 1}")
        if c.min(initial=0) < 0:
            raise ValueError("negative codeword count")

    @property
    def exact(self) -> bool:
        return np.issubdtype(self.counts.dtype, np.integer)

    def total(self) -> float:
        return float(self.counts.sum())


def counts_from_pmf(pmf: WeightPMF, K: int) -> WeightCounts:
    """Scale a weight PMF to codeword counts (real-valued, no rounding)."""
    scale = math.ldexp(1.0, K)
    return WeightCounts(n=pmf.n, counts=pmf.p * scale)


def tv_distance(a: WeightPMF, b: WeightPMF) -> float:
    """Total variation distance between two weight PMFs."""
    if a.n != b.n:
        raise ValueError("PMF length mismatch")
    return 0.5 * float(np.abs(a.p - b.p).sum())


# ---------------------------------------------------------------------------
# Gray-code enumeration engine (codewords packed into little-endian words)
# ---------------------------------------------------------------------------

def _pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a 0/1 vector into uint64 words, bit i -> word i//64, lane i%64."""
    nbits = len(bits)
    nwords = max(1, (nbits + 63) // 64)
    padded = np.zeros(nwords * 64, dtype=np.uint8)
    padded[:nbits] = bits
    lanes = padded.reshape(nwords, 64).astype(np.uint64)
    shifts = np.arange(64, dtype=np.uint64)
    return (lanes << shifts).sum(axis=1, dtype=np.uint64)


def _subcode_rows(n: int, info_set, gen: ConvGenerator) -> np.ndarray:
    """Packed codewords of the unit inputs at the info positions, [K, W]."""
    nwords = max(1, (n + 63) // 64)
    rows = np.zeros((len(info_set), nwords), dtype=np.uint64)
    for j, pos in enumerate(sorted(info_set)):
        v = np.zeros(n, dtype=np.uint8)
        v[pos] = 1
        rows[j] = _pack_bits(polar_transform(conv_transform(v, gen)))
    return rows


def _gray_value_words(rows: np.ndarray, k: int) -> np.ndarray:
    """Codeword for the k-th Gray-code message (XOR of rows on set bits)."""
    word = np.zeros(rows.shape[1], dtype=np.uint64)
    g = k ^ (k >> 1)
    while g:
        b = (g & -g).bit_length() - 1
        word ^= rows[b]
        g &= g - 1
    return word


def _fill_gray_steps(out: np.ndarray, rows: np.ndarray, k_lo: int) -> None:
    """Write the Gray-step rows for message indices k_lo+1 .. k_lo+len(out)."""
    length = len(out)
    start = k_lo + 1
    for b in range(rows.shape[0]):
        period = 1 << (b + 1)
        phase = 1 << b
        first = start + ((phase - start) % period)
        local = first - start
        if local < length:
            out[local::period] = rows[b]


def _hist_span(rows: np.ndarray, offset: np.ndarray, n: int,
               k_lo: int, k_hi: int) -> np.ndarray:
    """Weight histogram of codewords for message indices [k_lo, k_hi)."""
    hist = np.zeros(n + 1, dtype=np.int64)
    if k_lo >= k_hi:
        return hist
    current = _gray_value_words(rows, k_lo) ^ offset
    pos = k_lo
    while pos < k_hi:
        count = min(_CHUNK, k_hi - pos)
        block = np.empty((count, rows.shape[1]), dtype=np.uint64)
        block[0] = current
        _fill_gray_steps(block[1:], rows, pos)
        np.bitwise_xor.accumulate(block, axis=0, out=block)
        weights = np.bitwise_count(block).sum(axis=1, dtype=np.int64)
        hist += np.bincount(weights, minlength=n + 1)
        pos += count
        if pos < k_hi:
            current = block[-1] ^ rows[(pos & -pos).bit_length() - 1]
    return hist


def _enumerate_hist(rows: np.ndarray, n: int, offset: np.ndarray | None = None,
                    threads: int = 1) -> np.ndarray:
    """Exact weight histogram over all 2^K messages of a packed subcode."""
    k = rows.shape[0]
    if offset is None:
        offset = np.zeros(rows.shape[1], dtype=np.uint64)
    total = 1 << k
    if threads <= 1 or total < (_CHUNK << 2):
        return _hist_span(rows, offset, n, 0, total)
    bounds = np.linspace(0, total, threads + 1, dtype=np.int64)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = pool.map(
            lambda se: _hist_span(rows, offset, n, int(se[0]), int(se[1])),
            zip(bounds[:-1], bounds[1:]),
        )
        return sum(parts, np.zeros(n + 1, dtype=np.int64))


def _subcode_words(rows: np.ndarray) -> np.ndarray:
    """All 2^K codewords of a packed subcode in Gray order, [2^K, W]."""
    k, nwords = rows.shape
    words = np.zeros((1 << k, nwords), dtype=np.uint64)
    _fill_gray_steps(words[1:], rows, 0)
    np.bitwise_xor.accumulate(words, axis=0, out=words)
    return words


def _word_weights(words: np.ndarray) -> np.ndarray:
    return np.bitwise_count(words).sum(axis=1, dtype=np.int64)


# ---------------------------------------------------------------------------
# Exact weight enumerator
# ---------------------------------------------------------------------------

def exact_wef(spec: CodeSpec, cap: int = DEFAULT_EXACT_CAP,
              threads: int = 1) -> WeightCounts:
    """Exact codeword counts per weight by enumerating all 2^K messages."""
    if spec.K > cap:
        raise CapacityError(
            f"exact enumeration needs 2^{spec.K} codewords, over the cap of "
            f"2^{cap}; raise the cap to force it"
        )
    rows = _subcode_rows(spec.N, spec.info_set, spec.gen)
    hist = _enumerate_hist(rows, spec.N, threads=threads)
    return WeightCounts(n=spec.N, counts=hist)


# ---------------------------------------------------------------------------
# Hypergeometric weight combiner
# ---------------------------------------------------------------------------

def f_coeff_fraction(n_half: int, t: int, d1: int, d2: int) -> Fraction:
    """Exact rational value of the XOR-weight probability (see f_coeff)."""
    if n_half < 0:
        raise ValueError("vector length must be non-negative")
    if not (0 <= d1 <= n_half and 0 <= d2 <= n_half and 0 <= t <= n_half):
        return Fraction(0)
    if (d1 + d2 - t) % 2:
        return Fraction(0)
    r = (d1 + d2 - t) // 2
    if r < 0 or r > min(d1, d2) or d2 - r > n_half - d1:
        return Fraction(0)
    return Fraction(
        math.comb(d1, r) * math.comb(n_half - d1, d2 - r),
        math.comb(n_half, d2),
    )


def f_coeff(n_half: int, t: int, d1: int, d2: int) -> float:
    """P(weight of a ^ b == t) for a fixed weight-d1 vector a and a
    uniformly random weight-d2 vector b, both of length n_half.

    Zero outside the support |d1-d2| <= t <= min(d1+d2, 2*n_half-d1-d2)
    with t = d1 + d2 (mod 2).
    """
    return float(f_coeff_fraction(n_half, t, d1, d2))


_EXACT_TENSOR_LIMIT = 64


@lru_cache(maxsize=8)
def _f_tensor(n: int) -> np.ndarray:
    """f values as [d2, t, d1] for n <= 64, exact binomial ratios."""
    out = np.zeros((n + 1, n + 1, n + 1))
    comb = [[math.comb(a, b) if b <= a else 0 for b in range(n + 1)] for a in range(n + 1)]
    for d2 in range(n + 1):
        den = comb[n][d2]
        for d1 in range(n + 1):
            lo = abs(d1 - d2)
            hi = min(d1 + d2, 2 * n - d1 - d2)
            for t in range(lo, hi + 1, 2):
                r = (d1 + d2 - t) // 2
                out[d2, t, d1] = comb[d1][r] * comb[n - d1][d2 - r] / den
    out.setflags(write=False)
    return out


@lru_cache(maxsize=8)
def _log_comb_table(n: int) -> np.ndarray:
    """log C(a, b) for 0 <= b <= a <= n; -inf where undefined."""
    from scipy.special import gammaln

    a = np.arange(n + 1)
    lg = gammaln(a + 1.0)
    table = lg[:, None] - lg[None, :] - lg[np.maximum(a[:, None] - a[None, :], 0)]
    table[a[:, None] < a[None, :]] = -np.inf
    table.setflags(write=False)
    return table


def _f_matrix_large(n: int, d2: int) -> np.ndarray:
    """f values as [t, d1] for one d2, log-domain evaluation (n > 64)."""
    logc = _log_comb_table(n)
    t = np.arange(n + 1)[:, None]
    d1 = np.arange(n + 1)[None, :]
    two_r = d1 + d2 - t
    valid = (two_r % 2 == 0) & (two_r >= 0)
    r = np.where(valid, two_r // 2, 0)
    valid &= (r <= np.minimum(d1, d2)) & (d2 - r <= n - d1)
    logs = np.where(
        valid,
        logc[np.minimum(d1, n), np.minimum(r, n)]
        + logc[n - d1, np.minimum(np.maximum(d2 - r, 0), n)]
        - logc[n, d2],
        -np.inf,
    )
    return np.where(valid, np.exp(logs), 0.0)


def combine(p1: WeightPMF, p2: WeightPMF) -> WeightPMF:
    """Weight PMF of the stacked pair (x1 ^ x2, x2) from the halves' PMFs.

    p2's weight is counted twice (x2 lands in both halves); the XOR
    weight given (d1, d2) follows the hypergeometric kernel f_coeff.
    """
    if p1.n != p2.n:
        raise ValueError(f"PMF length mismatch: {p1.n} vs {p2.n}")
    n = p1.n
    out = np.zeros(2 * n + 1)
    if n <= _EXACT_TENSOR_LIMIT:
        tensor = _f_tensor(n)
        for d2 in np.flatnonzero(p2.p):
            out[d2 : d2 + n + 1] += p2.p[d2] * (tensor[d2] @ p1.p)
    else:
        for d2 in np.flatnonzero(p2.p):
            out[d2 : d2 + n + 1] += p2.p[d2] * (_f_matrix_large(n, int(d2)) @ p1.p)
    return WeightPMF(n=2 * n, p=out)


# ---------------------------------------------------------------------------
# Base cases at the threshold block length
# ---------------------------------------------------------------------------

def _point_mass_zero(n: int) -> WeightPMF:
    p = np.zeros(n + 1)
    p[0] = 1.0
    return WeightPMF(n=n, p=p)


def _pmf_from_hist(hist: np.ndarray) -> WeightPMF:
    return WeightPMF(n=len(hist) - 1, p=hist / hist.sum())


def _block_exact_pmf(n: int, info_set, gen: ConvGenerator, cap: int) -> WeightPMF:
    if len(info_set) > cap:
        raise CapacityError(
            f"block of length {n} holds {len(info_set)} info bits, over the "
            f"base-case cap of 2^{cap} enumeration work"
        )
    rows = _subcode_rows(n, info_set, gen)
    return _pmf_from_hist(_enumerate_hist(rows, n))


def base_randomized(spec: CodeSpec, cap: int = DEFAULT_BASE_CAP) -> WeightPMF:
    """Block PMF with the inter-half coupling ignored: split once more,
    enumerate each half exactly, and combine hypergeometrically."""
    a1, a2 = split_info_set(spec.info_set, spec.N)
    if max(len(a1), len(a2)) > cap:
        raise CapacityError(
            f"half-block enumeration needs 2^{max(len(a1), len(a2))} codewords, "
            f"over the base-case cap of 2^{cap}"
        )
    half = spec.N // 2
    return combine(
        _block_exact_pmf(half, a1, spec.gen, cap),
        _block_exact_pmf(half, a2, spec.gen, cap),
    )


def base_improved(spec: CodeSpec, cap: int = DEFAULT_BASE_CAP) -> WeightPMF:
    """Block PMF conditioning on the coupling between the halves.

    Only the last ell input bits of the first half feed the second half
    (through the off-diagonal band of the convolution matrix).  For each
    assignment of those bits the coupling word and the first half's
    fixed contribution are known, so both halves' conditional PMFs are
    enumerated exactly and combined; results average uniformly.
    """
    n = spec.N
    half = n // 2
    ell = spec.gen.ell
    a1, a2 = split_info_set(spec.info_set, n)
    window_start = half - ell
    tail = tuple(i for i in a1 if i >= window_start)
    a0 = tuple(i for i in a1 if i < window_start)
    if len(a2) + len(tail) > cap or len(a0) + len(tail) > cap:
        raise CapacityError(
            f"conditioned enumeration needs 2^{len(tail)} x "
            f"(2^{len(a2)} + 2^{len(a0)}) codewords, over the base-case cap "
            f"of 2^{cap}"
        )

    rows_a2 = _subcode_rows(half, a2, spec.gen)
    rows_a0 = _subcode_rows(half, a0, spec.gen)
    words_a2 = _subcode_words(rows_a2)
    words_a0 = _subcode_words(rows_a0)

    # per tail bit: its codeword contribution within the first half, and
    # the coupling word it injects into the second half
    own_rows = np.zeros((len(tail), rows_a2.shape[1]), dtype=np.uint64)
    coupling_rows = np.zeros_like(own_rows)
    for j, pos in enumerate(tail):
        v = np.zeros(n, dtype=np.uint8)
        v[pos] = 1
        u = conv_transform(v, spec.gen)
        own_rows[j] = _pack_bits(polar_transform(u[:half]))
        coupling_rows[j] = _pack_bits(polar_transform(u[half:]))

    acc = np.zeros(n + 1)
    for assign in range(1 << len(tail)):
        fixed = np.zeros(rows_a2.shape[1], dtype=np.uint64)
        coupling = np.zeros_like(fixed)
        for j in range(len(tail)):
            if assign >> j & 1:
                fixed ^= own_rows[j]
                coupling ^= coupling_rows[j]
        hist2 = np.bincount(_word_weights(words_a2 ^ coupling), minlength=half + 1)
        hist0 = np.bincount(_word_weights(words_a0 ^ fixed), minlength=half + 1)
        acc += combine(_pmf_from_hist(hist0), _pmf_from_hist(hist2)).p
    return WeightPMF(n=n, p=acc / (1 << len(tail)))


# ---------------------------------------------------------------------------
# Recursive approximation
# ---------------------------------------------------------------------------

@lru_cache(maxsize=4096)
def _block_pmf(n: int, info_set: tuple, coeffs: tuple, mode: str, cap: int) -> WeightPMF:
    spec = CodeSpec.make(n, info_set, ConvGenerator(coeffs))
    if mode == "randomized":
        return base_randomized(spec, cap)
    if mode == "improved":
        return base_improved(spec, cap)
    return _block_exact_pmf(n, info_set, spec.gen, cap)


def approx_wef(spec: CodeSpec, n_th: int = 32, mode: str = "improved",
               base_cap: int = DEFAULT_BASE_CAP) -> WeightPMF:
    """Approximate weight PMF via recursive halving down to n_th blocks.

    Above the threshold, halves are combined with the coupling between
    them ignored; the selected mode decides how each threshold-length
    block is computed.  mode="exact_block" with n_th == N reproduces the
    exact distribution.
    """
    if mode not in APPROX_MODES:
        raise ValueError(f"mode must be one of {APPROX_MODES}, got {mode!r}")
    if n_th < 2 or n_th & (n_th - 1):
        raise ValueError(f"n_th must be a power of two >= 2, got {n_th}")
    if n_th > spec.N:
        raise ValueError(f"n_th={n_th} exceeds N={spec.N}")
    if n_th < 2 * spec.gen.ell:
        raise ValueError(
            f"n_th={n_th} too small for generator memory {spec.gen.ell}; "
            f"need n_th >= {2 * spec.gen.ell}"
        )

    coeffs = spec.gen.coeffs

    def node(n: int, info: tuple) -> WeightPMF:
        if not info:
            return _point_mass_zero(n)
        if n == n_th:
            return _block_pmf(n, info, coeffs, mode, base_cap)
        a1, a2 = split_info_set(info, n)
        return combine(node(n // 2, a1), node(n // 2, a2))

    return node(spec.N, spec.info_set)
