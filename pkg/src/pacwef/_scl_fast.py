"""Numba kernel for batched SC list decoding.

Same algorithm as the numpy reference in decoder_sim (exact boxplus f/g,
hard path-metric penalty, stable pruning with ties to the lower
candidate index), but with per-level heap buffers so a path fork copies
2N-2 values instead of full stage lines.  Levels 1..n of the recursion
tree each own one buffer (the DFS visits one block per level at a time);
the channel LLRs at level 0 are shared by all paths.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(f):
            return f

        return deco if not (args and callable(args[0])) else args[0]


@njit(cache=True, inline="always")
def _boxplus(a: float, b: float) -> float:
    s = a + b
    la = (s if s > 0.0 else 0.0) + math.log1p(math.exp(-abs(s)))
    m = a if a > b else b
    lb = m + math.log1p(math.exp(-abs(a - b)))
    return la - lb


@njit(cache=True, inline="always")
def _parity(x: np.uint64) -> np.int8:
    count = 0
    v = x
    while v:
        v &= v - np.uint64(1)
        count += 1
    return np.int8(count & 1)


@njit(cache=True)
def _scl_kernel(llrs, info_mask, taps, regmask, L, n):  # pragma: no cover
    nb, N = llrs.shape
    out_v = np.zeros((nb, N), dtype=np.uint8)
    out_pm = np.zeros(nb)

    # level t in 1..n: buffer of size N >> t at offset N - (N >> (t-1))
    off = np.zeros(n + 1, dtype=np.int64)
    for t in range(1, n + 1):
        off[t] = N - (N >> (t - 1))

    lheap = np.zeros((L, N - 1))
    lheap2 = np.zeros((L, N - 1))
    sheap = np.zeros((L, N - 1), dtype=np.int8)
    sheap2 = np.zeros((L, N - 1), dtype=np.int8)
    vbits = np.zeros((L, N), dtype=np.int8)
    vbits2 = np.zeros((L, N), dtype=np.int8)
    reg = np.zeros(L, dtype=np.uint64)
    reg2 = np.zeros(L, dtype=np.uint64)
    pm = np.zeros(L)
    pm2 = np.zeros(L)
    u_zero = np.zeros(L, dtype=np.int8)
    u_dec = np.zeros(L, dtype=np.int8)
    cand = np.zeros(2 * L)
    order = np.zeros(2 * L, dtype=np.int64)
    tmp = np.zeros(N, dtype=np.int8)
    tmp2 = np.zeros(N, dtype=np.int8)

    for f in range(nb):
        act = 1
        pm[0] = 0.0
        reg[0] = np.uint64(0)
        for i in range(N):
            # ---- LLR descent over the levels invalidated by moving to leaf i
            if i == 0:
                t_start = 1
            else:
                tz = 0
                ii = i
                while not ii & 1:
                    ii >>= 1
                    tz += 1
                t_start = n - tz
            for t in range(t_start, n + 1):
                sz = N >> t
                g_node = (i >> (n - t)) & 1
                for p in range(act):
                    base = off[t]
                    if t == 1:
                        if g_node:
                            for j in range(sz):
                                s = 1 - 2 * sheap[p, base + j]
                                lheap[p, base + j] = llrs[f, sz + j] + s * llrs[f, j]
                        else:
                            for j in range(sz):
                                lheap[p, base + j] = _boxplus(llrs[f, j], llrs[f, sz + j])
                    else:
                        pbase = off[t - 1]
                        if g_node:
                            for j in range(sz):
                                s = 1 - 2 * sheap[p, base + j]
                                lheap[p, base + j] = (
                                    lheap[p, pbase + sz + j] + s * lheap[p, pbase + j]
                                )
                        else:
                            for j in range(sz):
                                lheap[p, base + j] = _boxplus(
                                    lheap[p, pbase + j], lheap[p, pbase + sz + j]
                                )

            # ---- leaf decision
            leaf_base = off[n]
            for p in range(act):
                u_zero[p] = _parity(reg[p] & taps)

            if not info_mask[i]:
                for p in range(act):
                    lf = lheap[p, leaf_base]
                    if (lf < 0.0) != (u_zero[p] == 1):
                        pm[p] += abs(lf)
                    vbits[p, i] = 0
                    u_dec[p] = u_zero[p]
                    reg[p] = (reg[p] << np.uint64(1)) & regmask
            else:
                for p in range(act):
                    lf = lheap[p, leaf_base]
                    pen0 = abs(lf) if (lf < 0.0) != (u_zero[p] == 1) else 0.0
                    pen1 = abs(lf) if (lf < 0.0) != (u_zero[p] == 0) else 0.0
                    cand[p] = pm[p] + pen0
                    cand[act + p] = pm[p] + pen1
                ncand = 2 * act
                keep = ncand if ncand < L else L

                idx = np.argsort(cand[:ncand])
                for j in range(ncand):
                    order[j] = idx[j]
                # stabilize: ties ordered by candidate index
                j = 0
                while j < ncand - 1:
                    if cand[order[j]] == cand[order[j + 1]]:
                        k = j + 1
                        while k < ncand and cand[order[k]] == cand[order[j]]:
                            k += 1
                        for a in range(j + 1, k):
                            key = order[a]
                            b = a - 1
                            while b >= j and order[b] > key:
                                order[b + 1] = order[b]
                                b -= 1
                            order[b + 1] = key
                        j = k
                    else:
                        j += 1

                for r in range(keep):
                    cidx = order[r]
                    par = cidx % act
                    v = np.int8(1) if cidx >= act else np.int8(0)
                    for j in range(N - 1):
                        lheap2[r, j] = lheap[par, j]
                        sheap2[r, j] = sheap[par, j]
                    for j in range(N):
                        vbits2[r, j] = vbits[par, j]
                    vbits2[r, i] = v
                    pm2[r] = cand[cidx]
                    u_dec[r] = u_zero[par] ^ v
                    reg2[r] = ((reg[par] << np.uint64(1)) | np.uint64(v)) & regmask
                lheap, lheap2 = lheap2, lheap
                sheap, sheap2 = sheap2, sheap
                vbits, vbits2 = vbits2, vbits
                pm, pm2 = pm2, pm
                reg, reg2 = reg2, reg
                act = keep

            # ---- partial-sum ascent: bubble the decided block codeword up
            if i < N - 1:
                for p in range(act):
                    tmp[0] = u_dec[p]
                    csize = 1
                    t = n
                    ii = i
                    while ii & 1:
                        base = off[t]
                        for j in range(csize):
                            tmp2[j] = sheap[p, base + j] ^ tmp[j]
                            tmp2[csize + j] = tmp[j]
                        for j in range(2 * csize):
                            tmp[j] = tmp2[j]
                        csize *= 2
                        ii >>= 1
                        t -= 1
                    base = off[t]
                    for j in range(csize):
                        sheap[p, base + j] = tmp[j]

        best = 0
        for p in range(1, act):
            if pm[p] < pm[best]:
                best = p
        for j in range(N):
            out_v[f, j] = vbits[best, j]
        out_pm[f] = pm[best]

    return out_v, out_pm
