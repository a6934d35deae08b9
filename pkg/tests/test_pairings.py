import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from bandtoeplitz.errors import SizeLimitError
from bandtoeplitz.pairings import (
    GAMMA_FIRST,
    PairPartition,
    TraceWord,
    build_f_map,
    catalan,
    catalan_limit_check,
    double_factorial,
    enumerate_pair_partitions,
    free_index_count,
    genus_profile,
    goe_moment,
    goe_moment_polynomial,
    gue_moment,
    mixed_trace_gue,
    mixed_trace_polynomial,
    orbit_count,
    orbit_counts,
    pairing_table,
)


def test_partition_validation():
    PairPartition(((1, 2), (3, 4)))
    with pytest.raises(ValueError):
        PairPartition(((1, 3), (2, 3)))
    with pytest.raises(ValueError):
        PairPartition(((3, 4), (1, 2)))
    with pytest.raises(ValueError):
        PairPartition(((2, 1), (3, 4)))
    pi = PairPartition.from_pairs([(4, 3), (2, 1)])
    assert pi.pairs == ((1, 2), (3, 4))
    assert str(pi) == "{{1,2},{3,4}}"
    assert pi.partner() == {1: 2, 2: 1, 3: 4, 4: 3}


@pytest.mark.parametrize("k", range(1, 8))
def test_table_counts_and_order(k):
    table = pairing_table(k)
    assert table.shape == (double_factorial(2 * k - 1), k, 2)
    flat = [tuple(r.ravel()) for r in table]
    assert flat == sorted(flat)
    assert len(set(flat)) == len(flat)
    assert np.all(table[:, :, 0] < table[:, :, 1])
    assert np.all(np.diff(table[:, :, 0], axis=1) > 0)


def test_enumeration_matches_recursive_oracle():
    for k in range(1, 6):
        ours = {pi.pairs for pi in enumerate_pair_partitions(k)}
        ref = {tuple(sorted((a + 1, b + 1) for a, b in m)) for m in oracles.pairings(list(range(2 * k)))}
        assert ours == ref


def test_orbit_counts_small():
    assert orbit_count(PairPartition(((1, 2), (3, 4)))) == 3
    assert orbit_count(PairPartition(((1, 4), (2, 3)))) == 3
    assert orbit_count(PairPartition(((1, 3), (2, 4)))) == 1
    assert isinstance(GAMMA_FIRST, bool)


@pytest.mark.parametrize("k", range(1, 6))
def test_vectorized_orbits_match_scalar(k):
    fast = orbit_counts(k)
    slow = [orbit_count(pi) for pi in enumerate_pair_partitions(k)]
    assert fast.tolist() == slow


@pytest.mark.parametrize("k", range(1, 7))
def test_noncrossing_are_exactly_the_top_genus(k):
    g = orbit_counts(k)
    nc = np.array([pi.is_noncrossing() for pi in enumerate_pair_partitions(k)])
    assert np.all((g == k + 1) == nc)
    assert catalan_limit_check(2 * k) == catalan(k)
    assert np.all(g <= k + 1)
    assert np.all((g - (k + 1)) % 2 == 0)


def test_gue_moment_values():
    assert gue_moment(2, 4) == Fraction(9, 4)
    assert gue_moment(1, 6) == 15
    assert gue_moment(3, 0) == 1
    assert gue_moment(3, 5) == 0
    with pytest.raises(SizeLimitError):
        gue_moment(2, 18)
    with pytest.raises(ValueError):
        gue_moment(0, 2)


@given(m=st.integers(1, 50), k=st.integers(1, 6))
@settings(max_examples=50, deadline=None)
def test_gue_moment_bounds(m, k):
    val = gue_moment(m, 2 * k)
    assert catalan(k) <= val <= double_factorial(2 * k - 1)
    assert sum(genus_profile(k).values()) == double_factorial(2 * k - 1)


@given(m=st.integers(1, 6), k=st.integers(1, 4))
@settings(max_examples=30, deadline=None)
def test_gue_moment_matches_density_oracle(m, k):
    assert float(gue_moment(m, 2 * k)) == pytest.approx(oracles.gue_density_moment(m, 2 * k), rel=1e-12)


def test_gue_moment_decreases_to_catalan():
    vals = [gue_moment(m, 8) for m in (1, 2, 4, 8, 1000)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert float(vals[-1]) == pytest.approx(14, rel=1e-4)


def test_trace_word():
    w = TraceWord.parse("0,1,2")
    assert w.exponents == (0, 1, 2)
    assert w.total == 3
    assert w.letters == 8
    assert str(w) == "0,1,2"
    with pytest.raises(ValueError):
        TraceWord((1, -1))


def test_f_map_examples():
    assert build_f_map(TraceWord((2,))) == {1: 1, 2: 2}
    assert build_f_map(TraceWord((0, 0, 0, 1))) == {1: 2, 2: 3, 3: 4, 4: 1}
    # (tr H)(tr H^2): singleton block then a 2-cycle
    assert build_f_map(TraceWord((1, 1))) == {1: 1, 2: 3, 3: 2}


@given(st.lists(st.integers(0, 3), min_size=1, max_size=4).filter(lambda e: 0 < sum((i + 1) * v for i, v in enumerate(e)) <= 12))
def test_f_map_is_a_permutation_with_one_cycle_per_factor(exps):
    w = TraceWord(tuple(exps))
    f = build_f_map(w)
    assert sorted(f.values()) == list(range(1, w.letters + 1))
    seen, cycles = set(), 0
    for x in f:
        if x not in seen:
            cycles += 1
            while x not in seen:
                seen.add(x)
                x = f[x]
    assert cycles == w.total


def test_free_index_count_and_small_words():
    w = TraceWord((0, 0, 0, 1))
    counts = [free_index_count(pi, w) for pi in enumerate_pair_partitions(2)]
    assert sorted(counts) == [1, 3, 3]
    assert mixed_trace_polynomial(w) == {1: 1, 3: 2}
    for m in range(1, 6):
        assert mixed_trace_gue(m, TraceWord((2,))) == m
        assert mixed_trace_gue(m, w) == 2 * m**3 + m
    assert mixed_trace_gue(3, TraceWord((1,))) == 0
    with pytest.raises(ValueError):
        free_index_count(PairPartition(((1, 2),)), w)


def test_mixed_matches_wick_oracle_small():
    for w in oracles.even_words(6):
        for m in (1, 2, 3):
            assert mixed_trace_gue(m, TraceWord(w)) == oracles.gue_word_expectation(m, w)


def test_single_trace_word_matches_gue_moment():
    for k in range(1, 5):
        exps = (0,) * (2 * k - 1) + (1,)
        for m in (1, 2, 3):
            assert Fraction(mixed_trace_gue(m, TraceWord(exps)), m ** (k + 1)) == gue_moment(m, 2 * k)


def test_mixed_letter_cap():
    with pytest.raises(SizeLimitError):
        mixed_trace_polynomial(TraceWord((14,)))


def test_goe_small_values():
    assert goe_moment(1, 2) == 2
    assert goe_moment(2, 2) == Fraction(3, 2)
    assert goe_moment(2, 4) == Fraction(23, 4)
    assert goe_moment(3, 4) == Fraction(38, 9)
    assert goe_moment(1, 8) == 2**4 * 105
    assert goe_moment(2, 3) == 0


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_goe_fast_brute_oracle_agree(m, k):
    fast = goe_moment(m, 2 * k, method="fast")
    assert fast == goe_moment(m, 2 * k, method="brute")
    assert fast == oracles.goe_trace_moment(m, 2 * k)


def test_goe_polynomial_total_weight():
    # at m = 1 every index assignment is admissible with r = k
    for k in range(1, 6):
        assert sum(goe_moment_polynomial(k).values()) == 2**k * double_factorial(2 * k - 1)


def test_goe_caps():
    with pytest.raises(SizeLimitError):
        goe_moment_polynomial(8)
    with pytest.raises(SizeLimitError):
        goe_moment(20, 16, method="brute")
    with pytest.raises(ValueError):
        goe_moment(2, 4, method="magic")


def test_double_factorial_and_catalan():
    assert [double_factorial(n) for n in (0, 1, 3, 5, 7)] == [1, 1, 3, 15, 105]
    assert [catalan(k) for k in range(1, 9)] == [1, 2, 5, 14, 42, 132, 429, 1430]
    assert math.comb(4, 2) // 3 == catalan(2)
