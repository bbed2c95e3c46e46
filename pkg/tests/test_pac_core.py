"""Domain types, transforms and rate profiles."""

import numpy as np
import pytest

from pacwef import (
    CodeSpec,
    ConvGenerator,
    InvalidGeneratorError,
    conv_inverse,
    conv_transform,
    encode,
    ga_polar_profile,
    load_profile,
    parse_generator,
    polar_transform,
    rm_profile,
    rm_score,
    save_profile,
    split_info_set,
)
from pacwef.pac_core import ga_mean_llrs, polar_matrix, toeplitz_matrix


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def test_parse_generator_133():
    gen = parse_generator("133")
    assert gen.coeffs == (1, 0, 1, 1, 0, 1, 1)
    assert gen.ell == 6


def test_parse_generator_identity():
    gen = parse_generator("1")
    assert gen.coeffs == (1,)
    assert gen.ell == 0


def test_parse_generator_single_tap():
    assert parse_generator("3").coeffs == (1, 1)


@pytest.mark.parametrize("bad", ["", "8", "xyz", "0", "2", "12"])
def test_parse_generator_rejects(bad):
    # "2" and "12" parse as octal but end in a zero bit
    with pytest.raises(InvalidGeneratorError):
        parse_generator(bad)


def test_generator_invariants():
    with pytest.raises(InvalidGeneratorError):
        ConvGenerator((0, 1))
    with pytest.raises(InvalidGeneratorError):
        ConvGenerator((1, 1, 0))
    with pytest.raises(InvalidGeneratorError):
        ConvGenerator(())


def test_codespec_validation():
    with pytest.raises(ValueError):
        CodeSpec(N=3, K=1, info_set=(0,))
    with pytest.raises(ValueError):
        CodeSpec(N=4, K=2, info_set=(0,))
    with pytest.raises(ValueError):
        CodeSpec(N=4, K=1, info_set=(4,))
    spec = CodeSpec.make(4, [3, 1])
    assert spec.info_set == (1, 3) and spec.K == 2


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------

def test_conv_transform_examples():
    gen = ConvGenerator((1, 1))
    assert list(conv_transform([0, 0, 1, 0], gen)) == [0, 0, 1, 1]
    assert list(conv_transform([0, 0, 0, 0], gen)) == [0, 0, 0, 0]
    ident = ConvGenerator((1,))
    v = np.array([1, 0, 1, 1], dtype=np.uint8)
    assert np.array_equal(conv_transform(v, ident), v)


def test_conv_transform_matches_dense_toeplitz():
    rng = np.random.default_rng(0)
    for octal in ("133", "3", "7", "171"):
        gen = parse_generator(octal)
        for n in (8, 16, 64):
            t = toeplitz_matrix(n, gen)
            v = rng.integers(0, 2, n, dtype=np.uint8)
            assert np.array_equal(conv_transform(v, gen), v @ t % 2)


def test_conv_inverse_roundtrip():
    rng = np.random.default_rng(1)
    for octal in ("1", "3", "133"):
        gen = parse_generator(octal)
        for _ in range(10):
            v = rng.integers(0, 2, 32, dtype=np.uint8)
            assert np.array_equal(conv_inverse(conv_transform(v, gen), gen), v)


def test_polar_transform_example():
    assert list(polar_transform([0, 0, 1, 1])) == [0, 1, 0, 1]
    assert list(polar_transform([0, 0, 0, 0])) == [0, 0, 0, 0]


def test_polar_transform_matches_dense():
    rng = np.random.default_rng(2)
    for n in (2, 4, 8, 32, 64):
        g = polar_matrix(n)
        u = rng.integers(0, 2, n, dtype=np.uint8)
        assert np.array_equal(polar_transform(u), u @ g % 2)


def test_polar_transform_involution_up_to_1024():
    rng = np.random.default_rng(3)
    n = 2
    while n <= 1024:
        u = rng.integers(0, 2, n, dtype=np.uint8)
        assert np.array_equal(polar_transform(polar_transform(u)), u)
        n *= 2


def test_polar_transform_rejects_bad_length():
    with pytest.raises(ValueError):
        polar_transform([0, 1, 0])


# ---------------------------------------------------------------------------
# encode
# ---------------------------------------------------------------------------

def test_encode_example():
    spec = CodeSpec.make(4, [2, 3], ConvGenerator((1, 1)))
    assert list(encode([1, 0], spec)) == [0, 1, 0, 1]
    assert list(encode([0, 0], spec)) == [0, 0, 0, 0]


def test_encode_is_linear():
    rng = np.random.default_rng(4)
    spec = CodeSpec.make(32, rm_profile(32, 12), parse_generator("133"))
    for _ in range(20):
        a = rng.integers(0, 2, spec.K, dtype=np.uint8)
        b = rng.integers(0, 2, spec.K, dtype=np.uint8)
        assert np.array_equal(encode(a ^ b, spec), encode(a, spec) ^ encode(b, spec))


def test_encode_injective_small():
    spec = CodeSpec.make(16, [1, 3, 5, 6, 9, 11, 12, 14], parse_generator("7"))
    seen = set()
    for m_int in range(1 << spec.K):
        m = np.array([(m_int >> j) & 1 for j in range(spec.K)], dtype=np.uint8)
        seen.add(encode(m, spec).tobytes())
    assert len(seen) == 1 << spec.K


def test_encode_identity_gen_is_polar():
    rng = np.random.default_rng(5)
    spec = CodeSpec.make(64, rm_profile(64, 22), ConvGenerator((1,)))
    g = polar_matrix(64)
    for _ in range(5):
        m = rng.integers(0, 2, spec.K, dtype=np.uint8)
        v = np.zeros(64, dtype=np.uint8)
        v[list(spec.info_set)] = m
        assert np.array_equal(encode(m, spec), v @ g % 2)


def test_encode_length_mismatch():
    spec = CodeSpec.make(4, [2, 3])
    with pytest.raises(ValueError):
        encode([1, 0, 1], spec)


# ---------------------------------------------------------------------------
# rate profiles
# ---------------------------------------------------------------------------

def test_rm_score_examples():
    assert rm_score(0) == 0
    assert rm_score(63) == 6
    assert rm_score(11) == 3


def test_rm_profile_full_rank_64_22():
    for variant in ("high_index", "low_index"):
        prof = rm_profile(64, 22, variant)
        assert prof == tuple(sorted(i for i in range(64) if rm_score(i) >= 4))


def test_rm_profile_full_rank_128_64():
    prof = rm_profile(128, 64)
    assert len(prof) == 64
    assert prof == tuple(sorted(i for i in range(128) if rm_score(i) >= 4))


def test_rm_profile_tie_break_64_32():
    hi = rm_profile(64, 32, "high_index")
    lo = rm_profile(64, 32, "low_index")
    core = {i for i in range(64) if rm_score(i) >= 4}
    tier3 = sorted(i for i in range(64) if rm_score(i) == 3)
    assert set(hi) == core | set(tier3[-10:])
    assert set(lo) == core | set(tier3[:10])


def test_rm_profile_size_and_determinism():
    for k in (0, 1, 17, 64):
        p1 = rm_profile(64, k, "high_index")
        p2 = rm_profile(64, k, "high_index")
        assert p1 == p2 and len(p1) == k


def test_ga_profile_trivials():
    assert ga_polar_profile(8, 8) == tuple(range(8))
    assert ga_polar_profile(8, 0) == ()
    assert ga_polar_profile(4, 1) == (3,)


def test_ga_means_monotone_extremes():
    means = ga_mean_llrs(64, 2.0)
    assert means.argmax() == 63
    assert means.argmin() == 0


def test_split_info_set():
    assert split_info_set([2, 3], 4) == ((), (0, 1))
    assert split_info_set([], 8) == ((), ())
    assert split_info_set(range(8), 8) == (tuple(range(4)), tuple(range(4)))


# ---------------------------------------------------------------------------
# profile files
# ---------------------------------------------------------------------------

def test_profile_roundtrip_json(tmp_path):
    path = tmp_path / "p.json"
    save_profile(path, [5, 1, 3])
    assert load_profile(path) == (1, 3, 5)


def test_profile_newline_format(tmp_path):
    path = tmp_path / "p.txt"
    path.write_text("3\n1\n\n5\n")
    assert load_profile(path) == (1, 3, 5)
