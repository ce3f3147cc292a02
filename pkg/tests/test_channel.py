"""Sources, symmetric channels, concatenation, independence statistics."""

import math

import numpy as np
import pytest

from nonlocal_lab import streams
from nonlocal_lab.channel import (
    CHI2_CRIT_99_1DF,
    BernoulliSource,
    PairedSamples,
    SymmetricBinaryChannel,
    chain,
    concatenate,
    draw_source,
    empirical_correlation,
    independence_statistic,
    transmit,
    transmit_batch,
    transmit_chain_batch,
)


def test_parameter_domains():
    with pytest.raises(ValueError, match=r"\[-1, 1\]"):
        BernoulliSource(theta=1.5)
    with pytest.raises(ValueError, match=r"\[-1, 1\]"):
        SymmetricBinaryChannel(rho=-1.01)


def test_source_endpoints():
    rng = np.random.default_rng(0)
    assert np.all(draw_source(BernoulliSource(1.0), 500, rng) == -1)
    assert np.all(draw_source(BernoulliSource(-1.0), 500, rng) == 1)


def test_source_fair_case():
    m = 10_000
    xs = draw_source(BernoulliSource(0.0), m, np.random.default_rng(3))
    assert abs(float(np.mean(xs))) <= 4.0 / math.sqrt(m)


def test_source_mean_is_minus_theta():
    m = 1_000_000
    theta = 0.6
    xs = draw_source(BernoulliSource(theta), m, np.random.default_rng(8))
    se = math.sqrt((1 - theta ** 2) / m)
    assert abs(float(np.mean(xs)) + theta) <= 4 * se


def test_source_rejects_bad_count():
    with pytest.raises(ValueError, match=">= 1"):
        draw_source(BernoulliSource(0.0), 0, np.random.default_rng(0))


def test_transmit_perfect_and_inverting():
    rng = np.random.default_rng(1)
    perfect = SymmetricBinaryChannel(1.0)
    inverting = SymmetricBinaryChannel(-1.0)
    for x in (-1, 1):
        assert all(transmit(perfect, x, rng) == x for _ in range(100))
        assert all(transmit(inverting, x, rng) == -x for _ in range(100))


def test_transmit_rejects_nonsign_input():
    with pytest.raises(ValueError, match=r"\+-1"):
        transmit(SymmetricBinaryChannel(0.5), 0, np.random.default_rng(0))


def test_transmit_agreement_rate():
    n = 1_000_000
    ch = SymmetricBinaryChannel(0.5)
    ys = transmit_batch(ch, np.ones(n, dtype=np.int8), np.random.default_rng(7))
    agree = float(np.mean(ys == 1))
    assert abs(agree - 0.75) <= 4 * math.sqrt(0.75 * 0.25 / n)


def test_channel_symmetry():
    # Agreement frequency must not depend on the input sign.
    n = 1_000_000
    for rho in (-0.9, 0.0, 0.9):
        ch = SymmetricBinaryChannel(rho)
        rng = np.random.default_rng(17)
        xs = draw_source(BernoulliSource(0.0), n, rng)
        ys = transmit_batch(ch, xs, rng)
        p = (1 + rho) / 2
        plus, minus = xs == 1, xs == -1
        a_plus = float(np.mean(ys[plus] == 1))
        a_minus = float(np.mean(ys[minus] == -1))
        se = math.sqrt(p * (1 - p) * (1 / plus.sum() + 1 / minus.sum()))
        assert abs(a_plus - a_minus) <= 4 * se


def test_concatenate_parameters():
    assert concatenate(
        SymmetricBinaryChannel(1.0), SymmetricBinaryChannel(0.37)
    ).rho == 0.37
    assert concatenate(
        SymmetricBinaryChannel(0.5), SymmetricBinaryChannel(0.5)
    ).rho == 0.25
    assert abs(chain(0.9, 12).rho - 0.9 ** 12) < 1e-12


def test_concatenation_product_rule_empirical():
    n = 1_000_000
    rho1, rho2 = 0.7, 0.6
    rng = np.random.default_rng(21)
    xs = draw_source(BernoulliSource(0.0), n, rng)
    mid = transmit_batch(SymmetricBinaryChannel(rho1), xs, rng)
    ys = transmit_batch(SymmetricBinaryChannel(rho2), mid, rng)
    corr = float(np.mean(xs.astype(np.float64) * ys))
    expected = rho1 * rho2
    se = math.sqrt((1 - expected ** 2) / n)
    assert abs(corr - expected) <= 4 * se


def test_source_through_channel_law():
    # P(y = -1) = (1 + rho * theta) / 2.
    n = 1_000_000
    theta, rho = 0.4, 0.7
    rng = np.random.default_rng(34)
    xs = draw_source(BernoulliSource(theta), n, rng)
    ys = transmit_batch(SymmetricBinaryChannel(rho), xs, rng)
    p = (1 + rho * theta) / 2
    assert abs(float(np.mean(ys == -1)) - p) <= 4 * math.sqrt(p * (1 - p) / n)


def test_empirical_correlation_cases():
    xs = np.array([1, 1, -1, -1], dtype=np.int8)
    assert empirical_correlation(PairedSamples(xs, xs)) == 1.0
    assert empirical_correlation(PairedSamples(xs, -xs)) == -1.0
    ys = np.array([1, -1, -1, 1], dtype=np.int8)
    assert empirical_correlation(PairedSamples(xs, ys)) == 0.0
    with pytest.raises(ValueError, match="empty"):
        empirical_correlation(PairedSamples(np.array([]), np.array([])))


def test_paired_samples_validation():
    with pytest.raises(ValueError, match="equal-length"):
        PairedSamples(np.array([1, -1]), np.array([1]))
    with pytest.raises(ValueError, match=r"\+-1"):
        PairedSamples(np.array([1, 0]), np.array([1, 1]))


def test_independence_rejects_small_samples():
    xs = np.ones(50, dtype=np.int8)
    with pytest.raises(ValueError, match="100"):
        independence_statistic(PairedSamples(xs, xs))


def test_independence_flags_maximal_dependence():
    rng = np.random.default_rng(2)
    xs = draw_source(BernoulliSource(0.0), 1000, rng)
    stat = independence_statistic(PairedSamples(xs, xs))
    assert not stat.threshold_pass
    assert stat.abs_correlation == 1.0


def test_independence_null_calibration():
    # Independent pairs at m = 1e5 must pass at least 95 of 100 seeds.
    m, passes = 100_000, 0
    for s in range(100):
        gen = streams.unit_stream(777, s)
        xs = draw_source(BernoulliSource(0.0), m, gen)
        ys = draw_source(BernoulliSource(0.0), m, gen)
        if independence_statistic(PairedSamples(xs, ys)).threshold_pass:
            passes += 1
    assert passes >= 95


def test_independence_through_disconnected_channel():
    m = 100_000
    rng = np.random.default_rng(13)
    xs = draw_source(BernoulliSource(0.0), m, rng)
    ys = transmit_batch(SymmetricBinaryChannel(0.0), xs, rng)
    assert independence_statistic(PairedSamples(xs, ys)).threshold_pass


def test_chi2_critical_value_against_scipy():
    scipy_stats = pytest.importorskip("scipy.stats")
    assert abs(CHI2_CRIT_99_1DF - scipy_stats.chi2.ppf(0.99, 1)) < 1e-9


def test_disconnection_law_long_chain():
    # 40-fold self-concatenation at rho = 0.9: residual correlation
    # 0.9**40 ~ 0.0148 stays under 0.02, and the conditional agreement
    # sits at the exact finite-n value (1 + 0.9**40) / 2, which is the
    # curve approaching 1/2.
    m, rho, n = 1_000_000, 0.9, 40
    rng = np.random.default_rng(55)
    xs = draw_source(BernoulliSource(0.0), m, rng)
    zs = transmit_chain_batch(rho, n, xs, rng)
    corr = float(np.mean(xs.astype(np.float64) * zs))
    residual = rho ** n
    assert abs(corr) < 0.02
    agree = float(np.mean(zs == xs))
    p = (1 + residual) / 2
    se = math.sqrt(p * (1 - p) / m)
    assert abs(agree - p) <= 4 * se
    assert abs(agree - 0.5) <= residual / 2 + 4 * se


def test_chain_rejects_bad_length():
    with pytest.raises(ValueError, match=">= 1"):
        transmit_chain_batch(0.9, 0, np.array([1], dtype=np.int8), np.random.default_rng(0))
