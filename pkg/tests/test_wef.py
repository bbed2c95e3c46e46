"""Weight-distribution computation: exact enumeration, hypergeometric
combiner and the recursive approximation."""

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pacwef import (
    CapacityError,
    CodeSpec,
    ConvGenerator,
    WeightPMF,
    approx_wef,
    base_improved,
    base_randomized,
    combine,
    counts_from_pmf,
    encode,
    exact_wef,
    f_coeff,
    f_coeff_fraction,
    parse_generator,
    rm_profile,
    tv_distance,
)


def brute_force_xor_weights(n, d1, d2):
    """Oracle for f_coeff: exhaustive XOR-weight counts against a fixed
    weight-d1 vector, over all weight-d2 vectors of length n."""
    fixed = frozenset(range(d1))
    hist = {}
    total = 0
    for support in itertools.combinations(range(n), d2):
        t = len(fixed.symmetric_difference(support))
        hist[t] = hist.get(t, 0) + 1
        total += 1
    return hist, total


def naive_weight_counts(spec):
    """Oracle for exact_wef: re-encode every message, no Gray stepping."""
    counts = np.zeros(spec.N + 1, dtype=np.int64)
    for m_int in range(1 << spec.K):
        m = np.array([(m_int >> j) & 1 for j in range(spec.K)], dtype=np.uint8)
        counts[int(encode(m, spec).sum())] += 1
    return counts


def random_spec(rng, n_choices=(8, 16, 32), k_max=10, ell_max=4):
    n = int(rng.choice(n_choices))
    ell = int(rng.integers(0, min(ell_max, n // 2) + 1))
    mid = rng.integers(0, 2, max(0, ell - 1))
    gen = ConvGenerator((1, *mid, 1)) if ell else ConvGenerator((1,))
    k = int(rng.integers(0, min(n, k_max) + 1))
    info = sorted(rng.choice(n, size=k, replace=False).tolist())
    return CodeSpec.make(n, info, gen)


# ---------------------------------------------------------------------------
# f_coeff
# ---------------------------------------------------------------------------

def test_f_coeff_examples():
    assert f_coeff(2, 2, 1, 1) == 0.5
    assert f_coeff(2, 0, 1, 1) == 0.5
    assert f_coeff(2, 1, 1, 1) == 0.0
    for n, d2 in ((3, 2), (6, 0), (7, 7)):
        assert f_coeff(n, d2, 0, d2) == 1.0


def test_f_coeff_matches_brute_force_exactly():
    for n in range(1, 9):
        for d1 in range(n + 1):
            for d2 in range(n + 1):
                hist, total = brute_force_xor_weights(n, d1, d2)
                for t in range(n + 1):
                    expected = Fraction(hist.get(t, 0), total)
                    assert f_coeff_fraction(n, t, d1, d2) == expected, (n, t, d1, d2)


@given(st.integers(1, 64), st.integers(0, 64), st.integers(0, 64))
@settings(max_examples=200, deadline=None)
def test_f_coeff_normalizes(n, d1, d2):
    d1, d2 = min(d1, n), min(d2, n)
    total = sum(f_coeff(n, t, d1, d2) for t in range(n + 1))
    assert abs(total - 1.0) < 1e-12


@given(st.integers(1, 32), st.integers(0, 32), st.integers(0, 32), st.integers(0, 32))
@settings(max_examples=200, deadline=None)
def test_f_coeff_symmetric_in_weights(n, t, d1, d2):
    d1, d2, t = min(d1, n), min(d2, n), min(t, n)
    assert f_coeff_fraction(n, t, d1, d2) == f_coeff_fraction(n, t, d2, d1)


def test_f_coeff_out_of_support_returns_zero():
    assert f_coeff(4, 9, 1, 1) == 0.0
    assert f_coeff(4, 3, 5, 1) == 0.0


# ---------------------------------------------------------------------------
# combine
# ---------------------------------------------------------------------------

def _pmf(values):
    arr = np.asarray(values, dtype=float)
    return WeightPMF(n=len(arr) - 1, p=arr)


def test_combine_point_mass_first_doubles_second():
    p1 = _pmf([1, 0, 0, 0, 0])
    p2 = _pmf([0.125, 0.25, 0.25, 0.25, 0.125])
    out = combine(p1, p2)
    for d2 in range(5):
        assert out.p[2 * d2] == pytest.approx(p2.p[d2], abs=1e-15)
    assert out.p[1::2].sum() == 0.0


def test_combine_double_point_mass_at_zero():
    p0 = _pmf([1, 0, 0])
    out = combine(p0, p0)
    assert out.p[0] == 1.0 and out.p.sum() == 1.0


def test_combine_weight_one_halves():
    out = combine(_pmf([0, 1, 0]), _pmf([0, 1, 0]))
    assert out.p[1] == pytest.approx(0.5, abs=1e-15)
    assert out.p[3] == pytest.approx(0.5, abs=1e-15)
    assert out.p[0] == out.p[2] == out.p[4] == 0.0


def test_combine_rejects_length_mismatch():
    with pytest.raises(ValueError):
        combine(_pmf([1, 0]), _pmf([1, 0, 0]))


def test_combine_preserves_normalization():
    rng = np.random.default_rng(6)
    for n in (1, 2, 7, 16, 64, 100):
        raw = rng.random(n + 1)
        pmf = _pmf(raw / raw.sum())
        out = combine(pmf, pmf)
        assert abs(out.p.sum() - 1.0) < 1e-9
        assert out.n == 2 * n


def test_combine_large_path_matches_exact_tensor_path(monkeypatch):
    # force the log-domain path at an n the exact tensor also covers
    import pacwef.wef as wef_mod

    rng = np.random.default_rng(7)
    raw = rng.random(49)
    pmf = _pmf(raw / raw.sum())
    via_tensor = combine(pmf, pmf)
    monkeypatch.setattr(wef_mod, "_EXACT_TENSOR_LIMIT", 0)
    via_logs = combine(pmf, pmf)
    assert np.allclose(via_tensor.p, via_logs.p, rtol=1e-9, atol=1e-12)


# ---------------------------------------------------------------------------
# exact_wef
# ---------------------------------------------------------------------------

def test_exact_wef_repetition_code():
    counts = exact_wef(CodeSpec.make(2, [1]))
    assert list(counts.counts) == [1, 0, 1]


def test_exact_wef_k0():
    counts = exact_wef(CodeSpec.make(16, []))
    assert counts.counts[0] == 1 and counts.counts.sum() == 1


def test_exact_wef_capacity():
    spec = CodeSpec.make(32, range(20))
    with pytest.raises(CapacityError):
        exact_wef(spec, cap=10)


def test_exact_wef_matches_naive_reencode():
    rng = np.random.default_rng(8)
    for _ in range(12):
        spec = random_spec(rng)
        gray = exact_wef(spec)
        assert np.array_equal(gray.counts, naive_weight_counts(spec))


def test_exact_wef_total_and_zero_row():
    rng = np.random.default_rng(9)
    for _ in range(10):
        spec = random_spec(rng)
        counts = exact_wef(spec)
        assert counts.counts.sum() == 1 << spec.K
        assert counts.counts[0] >= 1


def test_exact_wef_min_distance_cross_check():
    rng = np.random.default_rng(10)
    for _ in range(8):
        spec = random_spec(rng, k_max=8)
        if spec.K == 0:
            continue
        counts = exact_wef(spec)
        support = np.flatnonzero(counts.counts)
        naive = naive_weight_counts(spec)
        assert support[0] == 0
        if len(support) > 1:
            assert support[1] == np.flatnonzero(naive)[1]


def test_exact_wef_thread_count_invariance():
    spec = CodeSpec.make(32, rm_profile(32, 14), parse_generator("133"))
    base = exact_wef(spec, threads=1)
    for threads in (2, 3, 8):
        assert np.array_equal(exact_wef(spec, threads=threads).counts, base.counts)


# ---------------------------------------------------------------------------
# base cases and recursion
# ---------------------------------------------------------------------------

def test_base_randomized_example():
    # halves are (2, empty) and (2, {0,1}); the empty half doubles the
    # other half's weights
    spec = CodeSpec.make(4, [2, 3], ConvGenerator((1, 1)))
    out = base_randomized(spec)
    assert np.allclose(out.p, [0.25, 0, 0.5, 0, 0.25])


def test_base_randomized_equals_exact_block_with_halved_threshold():
    spec = CodeSpec.make(16, [3, 5, 9, 11, 14, 15], parse_generator("7"))
    direct = base_randomized(spec)
    via_recursion = approx_wef(spec, n_th=8, mode="exact_block")
    assert np.allclose(direct.p, via_recursion.p, atol=1e-12)


def test_base_improved_identity_gen_equals_randomized():
    spec = CodeSpec.make(8, [2, 3, 6, 7], ConvGenerator((1,)))
    assert np.allclose(base_improved(spec).p, base_randomized(spec).p)


def test_base_improved_empty_tail_equals_randomized():
    # no info index in the coupling window of the first half
    gen = ConvGenerator((1, 1))  # window = {3} for N=8
    spec = CodeSpec.make(8, [1, 2, 5, 7], gen)
    assert 3 not in spec.info_set
    assert np.allclose(base_improved(spec).p, base_randomized(spec).p)


def test_base_improved_example_not_worse_than_randomized():
    spec = CodeSpec.make(8, [3, 7], ConvGenerator((1, 1)))
    exact_pmf = WeightPMF(8, exact_wef(spec).counts / 2.0**spec.K)
    tv_rand = tv_distance(base_randomized(spec), exact_pmf)
    tv_imp = tv_distance(base_improved(spec), exact_pmf)
    assert tv_imp <= tv_rand + 1e-12


def test_base_improved_exact_on_fully_coupled_block():
    # window covers the whole first half: conditioning reproduces the
    # exact distribution because one side becomes deterministic
    gen = ConvGenerator((1, 1))
    spec = CodeSpec.make(4, [1, 3], gen)
    exact_pmf = exact_wef(spec).counts / 4.0
    assert np.allclose(base_improved(spec).p, exact_pmf, atol=1e-12)


def test_base_capacity_errors():
    spec = CodeSpec.make(32, range(32), parse_generator("3"))
    with pytest.raises(CapacityError):
        base_randomized(spec, cap=10)
    with pytest.raises(CapacityError):
        base_improved(spec, cap=10)


def test_approx_wef_k0_point_mass():
    pmf = approx_wef(CodeSpec.make(64, [], parse_generator("133")), n_th=16)
    assert pmf.p[0] == 1.0 and pmf.p.sum() == 1.0


def test_approx_wef_validation():
    spec = CodeSpec.make(64, rm_profile(64, 22), parse_generator("133"))
    with pytest.raises(ValueError):
        approx_wef(spec, n_th=6)
    with pytest.raises(ValueError):
        approx_wef(spec, n_th=128)
    with pytest.raises(ValueError):
        approx_wef(spec, n_th=8)  # needs n_th >= 2*ell = 12
    with pytest.raises(ValueError):
        approx_wef(spec, mode="bogus")


def test_approx_wef_exact_block_at_full_length_is_exact():
    rng = np.random.default_rng(11)
    for _ in range(10):
        spec = random_spec(rng, n_choices=(16, 32), k_max=10)
        if spec.K == 0:
            continue
        pmf = approx_wef(spec, n_th=spec.N, mode="exact_block")
        scaled = pmf.p * (1 << spec.K)
        assert np.array_equal(np.rint(scaled).astype(np.int64),
                              exact_wef(spec).counts)


def test_approx_wef_close_to_exact_fig2_case():
    spec = CodeSpec.make(64, rm_profile(64, 22), parse_generator("133"))
    exact_pmf = WeightPMF(64, exact_wef(spec).counts / 2.0**22)
    for mode in ("randomized", "improved"):
        for n_th in (16, 32):
            tv = tv_distance(approx_wef(spec, n_th=n_th, mode=mode), exact_pmf)
            assert tv <= 0.05, (mode, n_th, tv)


def test_approx_wef_normalized_everywhere():
    rng = np.random.default_rng(12)
    for _ in range(10):
        spec = random_spec(rng, n_choices=(16, 32), k_max=10, ell_max=3)
        for mode in ("randomized", "improved", "exact_block"):
            pmf = approx_wef(spec, n_th=8, mode=mode)
            assert abs(pmf.p.sum() - 1.0) < 1e-9


# ---------------------------------------------------------------------------
# counts_from_pmf
# ---------------------------------------------------------------------------

def test_counts_from_pmf_trivials():
    pmf = _pmf([1, 0, 0])
    assert counts_from_pmf(pmf, 5).counts[0] == 32.0
    uniform = _pmf([0.5, 0, 0, 0, 0.5])
    counts = counts_from_pmf(uniform, 1)
    assert counts.counts[0] == 1.0 and counts.counts[4] == 1.0


def test_counts_from_pmf_total():
    rng = np.random.default_rng(13)
    raw = rng.random(33)
    pmf = _pmf(raw / raw.sum())
    counts = counts_from_pmf(pmf, 30)
    assert counts.total() == pytest.approx(2.0**30, rel=1e-9)
