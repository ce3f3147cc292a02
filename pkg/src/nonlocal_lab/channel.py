"""+-1 Bernoulli sources, symmetric binary channels, and sample statistics.

The source convention puts mass ``(1+theta)/2`` on -1, so the source
mean is ``-theta``. A symmetric channel of correlation ``rho`` repeats
its input with probability ``(1+rho)/2`` regardless of the input sign,
and concatenating channels multiplies their correlations.

All values here are immutable; transmission draws fresh randomness from
the caller's generator on every use (channels are memoryless).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# 99th percentile of the chi-square distribution with 1 degree of freedom.
CHI2_CRIT_99_1DF = 6.6348966010212145


def _check_correlation(name: str, v: float) -> None:
    if not -1 <= v <= 1:
        raise ValueError(f"{name} must lie in [-1, 1], got {v}")


@dataclass(frozen=True)
class BernoulliSource:
    """+-1 source with P(x = -1) = (1 + theta) / 2."""

    theta: float

    def __post_init__(self):
        _check_correlation("theta", self.theta)

    @property
    def p_minus(self) -> float:
        return (1.0 + self.theta) / 2.0


@dataclass(frozen=True)
class SymmetricBinaryChannel:
    """Binary channel repeating its input with probability (1 + rho) / 2."""

    rho: float

    def __post_init__(self):
        _check_correlation("rho", self.rho)

    @property
    def p_flip(self) -> float:
        return (1.0 - self.rho) / 2.0


@dataclass(frozen=True)
class PairedSamples:
    """Aligned +-1 input/output sequences of equal length."""

    inputs: np.ndarray
    outputs: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.inputs, dtype=np.int8)
        y = np.asarray(self.outputs, dtype=np.int8)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError(
                f"inputs and outputs must be equal-length 1-d sequences, "
                f"got shapes {x.shape} and {y.shape}"
            )
        if x.size and (np.any(np.abs(x) != 1) or np.any(np.abs(y) != 1)):
            raise ValueError("samples must be +-1 valued")
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "outputs", y)

    def __len__(self) -> int:
        return int(self.inputs.size)


def draw_source(src: BernoulliSource, m: int, rng: np.random.Generator) -> np.ndarray:
    """m independent +-1 draws with P(-1) = (1 + theta) / 2."""
    if m < 1:
        raise ValueError(f"sample count must be >= 1, got {m}")
    return np.where(rng.random(m) < src.p_minus, -1, 1).astype(np.int8)


def transmit(ch: SymmetricBinaryChannel, x: int, rng: np.random.Generator) -> int:
    """Send one +-1 symbol through the channel."""
    if x not in (-1, 1):
        raise ValueError(f"channel input must be +-1, got {x}")
    return -x if rng.random() < ch.p_flip else x


def transmit_batch(
    ch: SymmetricBinaryChannel, xs: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Vectorized transmission, one fresh uniform per symbol."""
    xs = np.asarray(xs, dtype=np.int8)
    flips = rng.random(xs.shape) < ch.p_flip
    return np.where(flips, -xs, xs).astype(np.int8)


def concatenate(
    ch1: SymmetricBinaryChannel, ch2: SymmetricBinaryChannel
) -> SymmetricBinaryChannel:
    """Channel equivalent to feeding ch1's output into ch2.

    The composite correlation is the product rho1 * rho2: a sign flip
    survives the composition only when exactly one stage flips.
    """
    return SymmetricBinaryChannel(rho=ch1.rho * ch2.rho)


def chain(rho: float, n: int) -> SymmetricBinaryChannel:
    """n-fold self-concatenation, correlation rho ** n."""
    if n < 1:
        raise ValueError(f"chain length must be >= 1, got {n}")
    out = SymmetricBinaryChannel(rho=rho)
    for _ in range(n - 1):
        out = concatenate(out, SymmetricBinaryChannel(rho=rho))
    return out


def transmit_chain_batch(
    rho: float, n: int, xs: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Physically pass each symbol through n channels of correlation rho.

    Consumes n uniforms per symbol (symbol-major order), unlike sampling
    the equivalent single channel of correlation rho ** n.
    """
    if n < 1:
        raise ValueError(f"chain length must be >= 1, got {n}")
    xs = np.asarray(xs, dtype=np.int8)
    p_flip = (1.0 - rho) / 2.0
    flips = rng.random((xs.size, n)) < p_flip
    parity = (flips.sum(axis=1) & 1).astype(np.int8)
    return np.where(parity == 1, -xs, xs).astype(np.int8)


def empirical_correlation(s: PairedSamples) -> float:
    """Sample mean of the input-output product."""
    if len(s) == 0:
        raise ValueError("empirical correlation is undefined for empty samples")
    return float(np.mean(s.inputs.astype(np.float64) * s.outputs))


@dataclass(frozen=True)
class IndependenceStatistic:
    abs_correlation: float
    chi_square: float
    threshold_pass: bool


def independence_statistic(s: PairedSamples) -> IndependenceStatistic:
    """Chi-square independence test on the 2x2 input/output table.

    ``threshold_pass`` is True when the statistic stays below the 99%
    critical value for 1 degree of freedom, i.e. the sample is
    consistent with an input-independent output at that level.
    """
    m = len(s)
    if m < 100:
        raise ValueError(f"independence test needs at least 100 samples, got {m}")
    counts = np.zeros((2, 2), dtype=np.int64)
    xi = (s.inputs < 0).astype(np.int64)
    yi = (s.outputs < 0).astype(np.int64)
    np.add.at(counts, (xi, yi), 1)
    row = counts.sum(axis=1, keepdims=True)
    col = counts.sum(axis=0, keepdims=True)
    expected = row * col / m
    if np.any(expected == 0):
        # A constant margin carries no dependence information.
        chi2 = 0.0
    else:
        chi2 = float(((counts - expected) ** 2 / expected).sum())
    return IndependenceStatistic(
        abs_correlation=abs(empirical_correlation(s)),
        chi_square=chi2,
        threshold_pass=chi2 < CHI2_CRIT_99_1DF,
    )


def binomial_sigma(p: float, m: int) -> float:
    """Standard error of a frequency estimate from m Bernoulli trials."""
    return math.sqrt(max(p * (1.0 - p), 0.0) / m)
