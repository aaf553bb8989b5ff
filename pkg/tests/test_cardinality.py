import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delcert import (
    FULL_OPS,
    CardinalityParams,
    Scheme,
    TokenSeq,
    enumerate_ball,
    hamming_ball_cardinality,
    lev_ball_cardinality_exact,
    lev_ball_cardinality_lower_bound,
)
from delcert.edit_metrics import EditOpsSet, supersequence_count
from delcert.errors import GuardError

W = Scheme.WHITESPACE


def test_hamming_examples():
    assert hamming_ball_cardinality(CardinalityParams(5, 0, 7)) == 1
    assert hamming_ball_cardinality(CardinalityParams(3, 1, 2)) == 4
    assert hamming_ball_cardinality(CardinalityParams(4, 2, 3)) == 33


def test_hamming_radius_exceeds_length():
    with pytest.raises(ValueError):
        hamming_ball_cardinality(CardinalityParams(2, 3, 5))


def test_hamming_matches_substitution_ball():
    for v, alphabet in ((2, ["a", "b"]), (3, ["a", "b", "c"])):
        for n in range(0, 5):
            for x_toks in itertools.product(alphabet, repeat=n):
                x = TokenSeq(x_toks, W)
                for r in range(0, min(n, 2) + 1):
                    ball = enumerate_ball(x, r, EditOpsSet(False, False, True), alphabet)
                    assert len(ball) == hamming_ball_cardinality(CardinalityParams(n, r, v))


def test_lower_bound_trivia():
    assert lev_ball_cardinality_lower_bound(CardinalityParams(4, 0, 9)) == 1
    lb = lev_ball_cardinality_lower_bound(CardinalityParams(2, 1, 2))
    assert 3 <= lb <= 9  # at least the substitution floor, at most the exact count


def test_exact_examples():
    assert lev_ball_cardinality_exact(TokenSeq(("a",), W), 5, 0) == 1
    assert lev_ball_cardinality_exact(TokenSeq(("a", "b"), W), 2, 1) == 9
    # empty pattern: every word of length <= r
    assert lev_ball_cardinality_exact(TokenSeq((), W), 3, 2) == 1 + 3 + 9


def test_exact_guard_and_vocab_check():
    with pytest.raises(GuardError):
        lev_ball_cardinality_exact(TokenSeq(("a",), W), 5, 17)
    with pytest.raises(ValueError):
        lev_ball_cardinality_exact(TokenSeq(("a", "b", "c"), W), 2, 1)


def test_exact_matches_enumeration_sweep():
    for v, alphabet in ((2, ["a", "b"]), (3, ["a", "b", "c"])):
        for n in range(0, 5):
            for x_toks in itertools.product(alphabet, repeat=n):
                x = TokenSeq(x_toks, W)
                for r in range(0, 3):
                    if n + r > 8:
                        continue
                    assert lev_ball_cardinality_exact(x, v, r) == len(
                        enumerate_ball(x, r, FULL_OPS, alphabet)
                    )


def test_lower_bound_sandwich_sweep():
    for v, alphabet in ((2, ["a", "b"]), (3, ["a", "b", "c"])):
        for n in range(0, 5):
            for x_toks in itertools.product(alphabet, repeat=n):
                x = TokenSeq(x_toks, W)
                for r in range(0, 3):
                    params = CardinalityParams(n, r, v)
                    lb = lev_ball_cardinality_lower_bound(params)
                    ham = hamming_ball_cardinality(CardinalityParams(n, min(r, n), v))
                    sup = supersequence_count(params)
                    exact = lev_ball_cardinality_exact(x, v, r)
                    assert max(ham, sup) <= lb <= exact
                    # crude ceiling: every possible length within reach
                    assert exact <= sum(v**k for k in range(max(0, n - r), n + r + 1))


def test_lower_bound_tight_on_constant_sequences():
    for n in range(1, 6):
        for r in range(0, 4):
            x = TokenSeq(("u",) * n, W)
            assert lev_ball_cardinality_exact(x, 3, r) == lev_ball_cardinality_lower_bound(
                CardinalityParams(n, r, 3)
            )


@given(st.integers(0, 10), st.integers(0, 5), st.integers(2, 60))
@settings(max_examples=150)
def test_lower_bound_monotone(n, r, v):
    lb = lev_ball_cardinality_lower_bound(CardinalityParams(n, r, v))
    assert lb <= lev_ball_cardinality_lower_bound(CardinalityParams(n, r + 1, v))
    assert lb <= lev_ball_cardinality_lower_bound(CardinalityParams(n, r, v + 1))


@given(st.integers(1, 8), st.integers(0, 3), st.integers(2, 6))
@settings(max_examples=60)
def test_exact_monotone_in_radius_and_vocab(n, r, v):
    x = TokenSeq(tuple(f"t{i % v}" for i in range(n)), W)
    e = lev_ball_cardinality_exact(x, v, r)
    assert e <= lev_ball_cardinality_exact(x, v, r + 1)
    assert e <= lev_ball_cardinality_exact(x, v + 1, r)


def test_big_integer_scale():
    # realistic vocabulary and radius: far beyond float range
    count = lev_ball_cardinality_lower_bound(CardinalityParams(300, 25, 50265))
    assert count > 10**100
    import math

    assert math.log10(count) > 100
