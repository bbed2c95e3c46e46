"""Validation harness: BPSK/AWGN channel, SC list decoding of PAC codes,
exhaustive ML decoding, and Monte-Carlo frame error rate estimation.

Conventions (fixed so LLR signs are unambiguous): BPSK maps bit 0 to +1
and bit 1 to -1; positive LLR favors bit 0; noise variance per dimension
is 1/(2 gamma_s).

The list decoder works in the LLR domain with the exact boxplus f-update
and g-update, a per-path convolutional register (frozen input positions
still produce data-dependent transform bits), and the usual path-metric
penalty |llr| for deciding against the LLR sign.  Frames are decoded in
batches; all per-position work is vectorized over (frame, path).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bounds import SnrPoint
from .pac_core import CodeSpec, encode
from .wef import CapacityError, _subcode_rows, _subcode_words

__all__ = [
    "ChannelRealization",
    "SimResult",
    "awgn_channel",
    "scl_decode",
    "scl_decode_batch",
    "ml_decode_exhaustive",
    "simulate_fer",
    "wilson_interval",
]

DEFAULT_ML_CAP = 20


@dataclass(frozen=True)
class ChannelRealization:
    """Per-bit LLRs of one received frame; positive favors bit 0."""

    llr: np.ndarray

    def __post_init__(self):
        llr = np.array(self.llr, dtype=np.float64)
        llr.setflags(write=False)
        object.__setattr__(self, "llr", llr)
        if not np.all(np.isfinite(llr)):
            raise ValueError("LLRs must be finite")


@dataclass(frozen=True)
class SimResult:
    snr_db: float
    trials: int
    frame_errors: int
    fer: float
    wilson_ci: tuple[float, float]


def awgn_channel(x: np.ndarray, snr: SnrPoint, rng: np.random.Generator) -> ChannelRealization:
    """Transmit a codeword over BPSK/AWGN and return channel LLRs."""
    x = np.asarray(x, dtype=np.float64)
    sigma2 = snr.noise_var
    y = (1.0 - 2.0 * x) + rng.normal(0.0, math.sqrt(sigma2), len(x))
    return ChannelRealization(llr=2.0 * y / sigma2)


def wilson_interval(errors: int, trials: int, z: float = 1.959964) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return (0.0, 1.0)
    phat = errors / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


# ---------------------------------------------------------------------------
# SC list decoder, batched over frames
# ---------------------------------------------------------------------------

def _boxplus(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact LLR check-node combination ln((1+e^{a+b})/(e^a+e^b))."""
    return np.logaddexp(0.0, a + b) - np.logaddexp(a, b)


def scl_decode_batch(llrs: np.ndarray, spec: CodeSpec, L: int,
                     return_metric: bool = False, engine: str = "auto"):
    """Decode a [B, N] batch of LLR frames with list size L.

    Returns the [B, K] best-path messages (and [B] path metrics when
    requested).  Deterministic: path pruning uses a stable sort, ties
    resolved toward the lower candidate index.  engine "numba" runs the
    compiled kernel, "numpy" the vectorized reference; "auto" prefers
    the compiled one.
    """
    from . import _scl_fast

    if engine not in ("auto", "numba", "numpy"):
        raise ValueError(f"unknown engine {engine!r}")
    if L < 1:
        raise ValueError("list size must be >= 1")
    llrs = np.atleast_2d(np.asarray(llrs, dtype=np.float64))
    nb, n_code = llrs.shape
    if n_code != spec.N:
        raise ValueError(f"LLR length {n_code} != N={spec.N}")

    use_numba = _scl_fast.HAVE_NUMBA if engine == "auto" else engine == "numba"
    if use_numba:
        if not _scl_fast.HAVE_NUMBA:
            raise RuntimeError("numba is not available")
        ell = spec.gen.ell
        taps = np.uint64(sum(spec.gen.coeffs[j] << (j - 1) for j in range(1, ell + 1)))
        regmask = np.uint64((1 << ell) - 1)
        info_mask = np.zeros(spec.N, dtype=np.bool_)
        info_mask[list(spec.info_set)] = True
        v_all, pms = _scl_fast._scl_kernel(
            llrs, info_mask, taps, regmask, L, spec.N.bit_length() - 1
        )
        messages = v_all[:, list(spec.info_set)].astype(np.uint8)
        if return_metric:
            return messages, pms
        return messages
    n = spec.N.bit_length() - 1
    info_mask = np.zeros(spec.N, dtype=bool)
    info_mask[list(spec.info_set)] = True

    ell = spec.gen.ell
    taps = np.uint64(sum(spec.gen.coeffs[j] << (j - 1) for j in range(1, ell + 1)))
    regmask = np.uint64((1 << ell) - 1)

    llr = np.zeros((nb, L, n + 1, spec.N))
    llr[:, :, n, :] = llrs[:, None, :]
    ps = np.zeros((nb, L, n + 1, spec.N), dtype=np.int8)
    vbits = np.zeros((nb, L, spec.N), dtype=np.int8)
    reg = np.zeros((nb, L), dtype=np.uint64)
    pm = np.zeros((nb, L))
    bidx = np.arange(nb)[:, None]
    act = 1

    for i in range(spec.N):
        top = n - 1 if i == 0 else (i & -i).bit_length() - 1
        for s in range(top, -1, -1):
            h = 1 << s
            pstart = (i >> (s + 1)) << (s + 1)
            a = llr[:, :act, s + 1, pstart : pstart + h]
            b = llr[:, :act, s + 1, pstart + h : pstart + 2 * h]
            if (i >> s) & 1 == 0:
                llr[:, :act, s, pstart : pstart + h] = _boxplus(a, b)
            else:
                c = ps[:, :act, s, pstart : pstart + h]
                llr[:, :act, s, pstart + h : pstart + 2 * h] = b + (1 - 2 * c) * a

        leaf = llr[:, :act, 0, i]
        u_zero = (np.bitwise_count(reg[:, :act] & taps) & np.uint64(1)).astype(np.int8)
        pen_zero = np.where((leaf < 0) != (u_zero == 1), np.abs(leaf), 0.0)

        if not info_mask[i]:
            pm[:, :act] += pen_zero
            ps[:, :act, 0, i] = u_zero
            reg[:, :act] = (reg[:, :act] << np.uint64(1)) & regmask
        else:
            pen_one = np.where((leaf < 0) != (u_zero == 0), np.abs(leaf), 0.0)
            cand = np.concatenate([pm[:, :act] + pen_zero, pm[:, :act] + pen_one], axis=1)
            keep = min(2 * act, L)
            order = np.argsort(cand, axis=1, kind="stable")[:, :keep]
            parents = order % act
            vchoice = (order >= act).astype(np.int8)

            llr[:, :keep] = llr[bidx, parents]
            ps[:, :keep] = ps[bidx, parents]
            vbits[:, :keep] = vbits[bidx, parents]
            new_reg = reg[bidx, parents]
            u_parent = u_zero[bidx, parents]

            pm[:, :keep] = np.take_along_axis(cand, order, axis=1)
            vbits[:, :keep, i] = vchoice
            ps[:, :keep, 0, i] = u_parent ^ vchoice
            reg[:, :keep] = ((new_reg << np.uint64(1)) | vchoice.astype(np.uint64)) & regmask
            act = keep

        ii, s = i, 0
        while ii & 1:
            h = 1 << s
            bstart = (ii >> 1) << (s + 1)
            left = ps[:, :act, s, bstart : bstart + h]
            right = ps[:, :act, s, bstart + h : bstart + 2 * h]
            ps[:, :act, s + 1, bstart : bstart + h] = left ^ right
            ps[:, :act, s + 1, bstart + h : bstart + 2 * h] = right
            ii >>= 1
            s += 1

    best = np.argmin(pm[:, :act], axis=1)
    chosen = vbits[np.arange(nb), best]
    messages = chosen[:, list(spec.info_set)].astype(np.uint8)
    if return_metric:
        return messages, pm[np.arange(nb), best]
    return messages


def scl_decode(ch: ChannelRealization, spec: CodeSpec, L: int,
               return_metric: bool = False):
    """Single-frame SC list decode; see scl_decode_batch."""
    out = scl_decode_batch(ch.llr[None, :], spec, L, return_metric=return_metric)
    if return_metric:
        return out[0][0], float(out[1][0])
    return out[0]


# ---------------------------------------------------------------------------
# Exhaustive ML decoding
# ---------------------------------------------------------------------------

@lru_cache(maxsize=4)
def _codeword_bit_matrix(spec: CodeSpec) -> np.ndarray:
    """All 2^K codewords as a float [2^K, N] bit matrix, Gray order."""
    words = _subcode_words(_subcode_rows(spec.N, spec.info_set, spec.gen))
    bits = np.unpackbits(words.view(np.uint8), axis=1, bitorder="little")
    out = bits[:, : spec.N].astype(np.float64)
    out.setflags(write=False)
    return out


def _gray_message(k: int, K: int) -> np.ndarray:
    g = k ^ (k >> 1)
    return np.array([(g >> j) & 1 for j in range(K)], dtype=np.uint8)


def _message_sort_key(k: int, K: int) -> int:
    """Message bits as an integer with m_0 most significant (lex order)."""
    g = k ^ (k >> 1)
    return sum(((g >> j) & 1) << (K - 1 - j) for j in range(K))


def ml_decode_exhaustive(ch: ChannelRealization, spec: CodeSpec,
                         cap: int = DEFAULT_ML_CAP) -> np.ndarray:
    """Maximum-likelihood decoding by scoring every codeword.

    Maximizes the codeword-LLR correlation; exact ties go to the
    lexicographically smallest message.
    """
    if spec.K > cap:
        raise CapacityError(
            f"ML enumeration needs 2^{spec.K} codewords, over the cap of 2^{cap}"
        )
    bits = _codeword_bit_matrix(spec)
    # corr = sum llr - 2 * (bits @ llr): maximizing corr minimizes bits @ llr
    scores = bits @ ch.llr
    best = scores.min()
    ties = np.flatnonzero(scores == best)
    k = min((int(t) for t in ties), key=lambda t: _message_sort_key(t, spec.K))
    return _gray_message(k, spec.K)


# ---------------------------------------------------------------------------
# Monte-Carlo FER estimation
# ---------------------------------------------------------------------------

def _trial_rng(seed: int, point: int, trial: int) -> np.random.Generator:
    """Per-trial stream; results never depend on batching or workers."""
    return np.random.default_rng(np.random.SeedSequence(entropy=(seed, point, trial)))


def simulate_fer(spec: CodeSpec, snr_points, decoder: str = "scl",
                 list_size: int = 32, max_trials: int = 100_000,
                 max_errors: int = 100, seed: int = 0,
                 convention: str = "esn0", ml_cap: int = DEFAULT_ML_CAP,
                 batch_size: int = 128) -> list[SimResult]:
    """Frame error rates over an SNR grid (dB values).

    Per point, random messages are encoded, sent through AWGN and
    decoded until max_errors frame errors or max_trials trials are
    reached.  Trials are evaluated in a fixed order with per-trial RNG
    streams, so results are reproducible for a given seed regardless of
    batch size.
    """
    if decoder not in ("scl", "ml"):
        raise ValueError(f"decoder must be 'scl' or 'ml', got {decoder!r}")
    if convention not in ("esn0", "ebn0"):
        raise ValueError(f"convention must be 'esn0' or 'ebn0', got {convention!r}")
    if decoder == "ml" and spec.K > ml_cap:
        raise CapacityError(
            f"ML enumeration needs 2^{spec.K} codewords, over the cap of 2^{ml_cap}"
        )
    bits_matrix = _codeword_bit_matrix(spec) if decoder == "ml" else None

    results = []
    for point_idx, snr_db in enumerate(snr_points):
        snr = (SnrPoint.from_esn0_db(snr_db) if convention == "esn0"
               else SnrPoint.from_ebn0_db(snr_db, spec.rate))
        sigma = math.sqrt(snr.noise_var)
        trials = errors = 0
        while trials < max_trials and errors < max_errors:
            count = min(batch_size, max_trials - trials)
            msgs = np.empty((count, spec.K), dtype=np.uint8)
            llrs = np.empty((count, spec.N))
            for j in range(count):
                rng = _trial_rng(seed, point_idx, trials + j)
                msgs[j] = rng.integers(0, 2, spec.K, dtype=np.uint8)
                x = encode(msgs[j], spec)
                y = (1.0 - 2.0 * x) + rng.normal(0.0, sigma, spec.N)
                llrs[j] = 2.0 * y / snr.noise_var
            if decoder == "scl":
                decoded = scl_decode_batch(llrs, spec, list_size)
            else:
                decoded = _ml_decode_batch(llrs, bits_matrix, spec.K)
            wrong = np.any(decoded != msgs, axis=1)
            for j in range(count):
                trials += 1
                errors += int(wrong[j])
                if errors >= max_errors:
                    break
        fer = errors / trials if trials else 0.0
        results.append(SimResult(
            snr_db=float(snr_db), trials=trials, frame_errors=errors,
            fer=fer, wilson_ci=wilson_interval(errors, trials),
        ))
    return results


def _ml_decode_batch(llrs: np.ndarray, bits_matrix: np.ndarray, K: int) -> np.ndarray:
    """Batched exhaustive ML; ties resolved to the first Gray index."""
    scores = bits_matrix @ llrs.T  # [2^K, B]
    ks = np.argmin(scores, axis=0)
    return np.stack([_gray_message(int(k), K) for k in ks])
