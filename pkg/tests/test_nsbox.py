"""Box-pair construction, CHSH evaluation, no-signaling, sampling."""

import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonlocal_lab import nsbox
from nonlocal_lab.nsbox import (
    BoxInput,
    BoxOutcome,
    NSBoxPair,
    chsh_correlation,
    local_deterministic_box,
    make_isotropic_box,
    no_signaling_check,
    sample_box,
    sample_box_batch,
)


def test_bit_validation():
    with pytest.raises(ValueError, match="must be 0 or 1"):
        BoxInput(a=2, b=0)
    with pytest.raises(ValueError, match="must be 0 or 1"):
        BoxOutcome(A=0, B=-1)


def test_hatted_views():
    out = BoxOutcome(A=0, B=1)
    assert out.a_hat == 1 and out.b_hat == -1


def test_isotropic_rejects_out_of_range():
    for bad in (1.0000001, -2, Fraction(3, 2)):
        with pytest.raises(ValueError, match=r"\[-1, 1\]"):
            make_isotropic_box(bad)


def test_isotropic_exact_entries_three_fifths():
    box = make_isotropic_box(Fraction(3, 5))
    for a, b in product((0, 1), repeat=2):
        sat = sum(
            box.prob(A, B, a, b) for A, B in product((0, 1), repeat=2)
            if (A ^ B) == (a & b)
        )
        assert sat == Fraction(4, 5)
        for A, B in product((0, 1), repeat=2):
            expected = Fraction(2, 5) if (A ^ B) == (a & b) else Fraction(1, 10)
            assert box.prob(A, B, a, b) == expected


def test_isotropic_boundaries():
    pr = make_isotropic_box(1)
    for a, b in product((0, 1), repeat=2):
        sat = sum(
            pr.prob(A, B, a, b) for A, B in product((0, 1), repeat=2)
            if (A ^ B) == (a & b)
        )
        assert sat == 1
    flat = make_isotropic_box(0)
    assert all(
        flat.prob(A, B, a, b) == Fraction(1, 4)
        for a, b, A, B in product((0, 1), repeat=4)
    )


def test_chsh_exact_on_sixteenths_grid():
    for k in range(-16, 17):
        c = Fraction(k, 16)
        assert chsh_correlation(make_isotropic_box(c)) == c


@given(st.floats(min_value=-1.0, max_value=1.0, allow_nan=False))
@settings(max_examples=60, deadline=None)
def test_chsh_float_roundtrip(c):
    assert abs(chsh_correlation(make_isotropic_box(c)) - c) < 1e-12


def test_chsh_examples():
    assert abs(chsh_correlation(make_isotropic_box(0.6)) - 0.6) < 1e-12
    assert chsh_correlation(make_isotropic_box(Fraction(-1))) == -1


def test_classical_bound_over_deterministic_strategies():
    values = []
    for fa in product((0, 1), repeat=2):
        for gb in product((0, 1), repeat=2):
            box = local_deterministic_box(fa, gb)
            values.append(chsh_correlation(box))
    assert max(abs(v) for v in values) == Fraction(1, 2)
    assert chsh_correlation(local_deterministic_box((0, 0), (0, 0))) == Fraction(1, 2)


@given(
    st.fractions(min_value=-1, max_value=1, max_denominator=32),
    st.integers(min_value=0, max_value=1),
    st.integers(min_value=0, max_value=1),
)
@settings(max_examples=60, deadline=None)
def test_two_stage_sampling_matches_table(c, a, b):
    # Alice-marginal times Bob-conditional reproduces the joint exactly.
    box = make_isotropic_box(c)
    for A, B in product((0, 1), repeat=2):
        joint = box.alice_marginal(a, A) * box.bob_conditional(a, A, b, B)
        assert joint == box.prob(A, B, a, b)


def test_no_signaling_isotropic_is_exact():
    for c in (Fraction(-1), Fraction(-1, 3), Fraction(0), Fraction(4, 7), Fraction(1)):
        report = no_signaling_check(make_isotropic_box(c), tol=0.0)
        assert report.passed and report.max_deviation == 0.0


def test_no_signaling_detects_signaling_table():
    # Alice's output copies Bob's input: P(A=b) = 1, B uniform.
    half, zero = Fraction(1, 2), Fraction(0)
    table = tuple(
        tuple(
            tuple(
                tuple(half if A == b else zero for B in (0, 1))
                for A in (0, 1)
            )
            for b in (0, 1)
        )
        for a in (0, 1)
    )
    box = NSBoxPair.from_table(table)
    assert not no_signaling_check(box, tol=1e-9).passed
    assert no_signaling_check(box, tol=1.0).passed


def test_no_signaling_rejects_negative_tol():
    with pytest.raises(ValueError, match="nonnegative"):
        no_signaling_check(make_isotropic_box(0), tol=-0.1)


def test_from_table_rejects_unnormalized():
    bad = tuple(
        tuple(
            tuple(tuple(Fraction(1, 3) for _ in (0, 1)) for _ in (0, 1))
            for _ in (0, 1)
        )
        for _ in (0, 1)
    )
    with pytest.raises(ValueError, match="sums to"):
        NSBoxPair.from_table(bad)


def test_pr_box_always_satisfies_game():
    box = make_isotropic_box(1.0)
    rng = np.random.default_rng(11)
    inp = BoxInput(a=1, b=1)
    for _ in range(1000):
        out = sample_box(box, inp, rng)
        assert out.A ^ out.B == 1


def test_uniform_box_multinomial_ci():
    # c=0: all four outcomes equally likely; 4-sigma multinomial band.
    box = make_isotropic_box(0.0)
    rng = np.random.default_rng(123)
    n = 1_000_000
    a_arr, b_arr = sample_box_batch(box, 0, 1, n, rng)
    counts = np.bincount((a_arr << 1) | b_arr, minlength=4)
    sigma = math.sqrt(n * 0.25 * 0.75)
    assert np.all(np.abs(counts - n / 4) <= 4 * sigma)


def test_sampling_replays_for_fixed_seed():
    box = make_isotropic_box(0.4)
    g1, g2 = np.random.default_rng(5), np.random.default_rng(5)
    seq1 = [sample_box(box, BoxInput(1, 0), g1) for _ in range(50)]
    seq2 = [sample_box(box, BoxInput(1, 0), g2) for _ in range(50)]
    assert seq1 == seq2
    a1, b1 = sample_box_batch(box, 0, 0, 1000, np.random.default_rng(5))
    a2, b2 = sample_box_batch(box, 0, 0, 1000, np.random.default_rng(5))
    assert np.array_equal(a1, a2) and np.array_equal(b1, b2)


def test_empirical_chsh_matches_parameter():
    # Scaled-down version of the full verification experiment.
    box = make_isotropic_box(0.5)
    rng = np.random.default_rng(2024)
    n = 100_000
    est = {}
    for a, b in product((0, 1), repeat=2):
        aa, bb = sample_box_batch(box, a, b, n, rng)
        est[a, b] = 1.0 - 2.0 * float(np.mean(aa ^ bb))
    chsh = (est[0, 0] + est[0, 1] + est[1, 0] - est[1, 1]) / 4.0
    sigma = math.sqrt(4 * (1 - 0.25) / n) / 4.0
    assert abs(chsh - 0.5) <= 4 * sigma
