"""Fisher information, regime classification, and estimator diagnostics.

Closed forms for binary channels: a general two-correlation form, its
symmetric reduction m c**2 / (1 - c**2 theta**2), and the protocol form
[2 (c c')**2]**n / (1 - (c c')**(2n) theta**2) whose n -> infinity limit
is infinity, 1 or 0 according to the sign of 2 (c c')**2 - 1.

Empirical counterparts work on all-addresses decoded sample sets: the
score-variance estimator is primary, a central finite-difference of the
mean log-likelihood is the cross-check, and the CLT suite standardizes
the sample-mean decoder against the closed form.

Estimator sign convention: the source puts mass (1 + theta) / 2 on -1,
so the decoded-sign mean estimates -(c c')**n theta and the reported
estimator flips the sign to estimate theta itself.

All closed-form evaluators are pure; Monte Carlo suites derive
per-trial streams from the master seed and aggregate in trial order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from . import vandam
from .vandam import VanDamConfig

REGIME_EPS = 1e-12


class Regime(str, Enum):
    SIGNALING = "signaling"
    RANDOMNESS = "randomness"
    NO_SIGNALING = "no-signaling"


@dataclass(frozen=True)
class FisherQuery:
    """Binary-channel query: per-input correlations, source parameter,
    sample count."""

    c_minus: float
    c_plus: float
    theta: float
    m: int

    def __post_init__(self):
        for name, v in (("c_minus", self.c_minus), ("c_plus", self.c_plus)):
            if not -1 <= v <= 1:
                raise ValueError(f"{name} must lie in [-1, 1], got {v}")
        if not -1 < self.theta < 1:
            raise ValueError(f"theta must lie in (-1, 1), got {self.theta}")
        if self.m < 1:
            raise ValueError(f"sample count must be >= 1, got {self.m}")


@dataclass(frozen=True)
class FisherReport:
    """Closed-form protocol Fisher value with its limit classification."""

    value: float
    regime: Regime
    limit_value: float


@dataclass(frozen=True)
class MLEResult:
    theta_bar: float
    standardized: float
    variance_bound: float


def fisher_binary(q: FisherQuery) -> float:
    """Fisher information of m samples through a general binary channel.

    Evaluates m [ (c_minus + c_plus) / 2 ]**2 divided by
    1 - [ (1 + theta) c_minus / 2 - (1 - theta) c_plus / 2 ]**2.
    """
    avg = 0.5 * (q.c_minus + q.c_plus)
    if avg == 0.0:
        # Zero average correlation: no information flows even when the
        # output law is degenerate (e.g. c_minus = -c_plus = 1).
        return 0.0
    bias = 0.5 * (1.0 + q.theta) * q.c_minus - 0.5 * (1.0 - q.theta) * q.c_plus
    den = 1.0 - bias * bias
    if den <= 0.0:
        raise ValueError(
            f"Fisher information singular: output distribution degenerate "
            f"(denominator {den})"
        )
    return q.m * avg * avg / den


def fisher_symmetric(c: float, theta: float, m: int) -> float:
    """Symmetric-channel reduction m c**2 / (1 - c**2 theta**2)."""
    if m < 1:
        raise ValueError(f"sample count must be >= 1, got {m}")
    if abs(c * theta) >= 1.0:
        raise ValueError(
            f"Fisher information singular at |c * theta| = {abs(c * theta)} >= 1"
        )
    return m * c * c / (1.0 - c * c * theta * theta)


def classify_regime(c: float, c_prime: float = 1.0, eps: float = REGIME_EPS) -> Regime:
    """Limit classification by the sign of 2 (c c')**2 - 1.

    The boundary is taken with tolerance ``eps`` since the critical
    correlation 1/sqrt(2) is irrational; pass the squared product via
    ``c = sqrt(half)`` style inputs and the float error stays well
    inside the default band.
    """
    for name, v in (("c", c), ("c_prime", c_prime)):
        if not -1 <= v <= 1:
            raise ValueError(f"{name} must lie in [-1, 1], got {v}")
    gap = 2.0 * (c * c_prime) ** 2 - 1.0
    if gap > eps:
        return Regime.SIGNALING
    if gap >= -eps:
        return Regime.RANDOMNESS
    return Regime.NO_SIGNALING


_LIMITS = {
    Regime.SIGNALING: math.inf,
    Regime.RANDOMNESS: 1.0,
    Regime.NO_SIGNALING: 0.0,
}


def fisher_vandam(c: float, c_prime: float, theta: float, n: int) -> FisherReport:
    """Protocol Fisher information for 2**n decoded samples.

    Value [2 (c c')**2]**n / (1 - (c c')**(2n) theta**2) at finite n,
    plus the regime and its n -> infinity limit value.
    """
    if n < 1:
        raise ValueError(f"level count must be >= 1, got {n}")
    if not -1 < theta < 1:
        raise ValueError(f"theta must lie in (-1, 1), got {theta}")
    regime = classify_regime(c, c_prime)
    ccp = c * c_prime
    value = (2.0 * ccp * ccp) ** n / (1.0 - ccp ** (2 * n) * theta * theta)
    return FisherReport(value=value, regime=regime, limit_value=_LIMITS[regime])


def effective_correlation(c: float, c_prime: float, n: int) -> float:
    return (c * c_prime) ** n


def mle_theta(
    decoded,
    c: float,
    c_prime: float,
    n: int,
    theta_true: Optional[float] = None,
) -> MLEResult:
    """Sample-mean decoder of theta from one all-addresses sample set.

    ``decoded`` holds 2**n +-1 values; the estimator is minus their mean
    divided by (c c')**n. With ``theta_true`` supplied the standardized
    statistic sqrt(I(theta_true)) * (theta_bar - theta_true) is filled,
    otherwise NaN. The variance bound is the reciprocal Fisher value at
    ``theta_true`` (or at the estimate when in range).
    """
    decoded = np.asarray(decoded, dtype=np.float64)
    if decoded.ndim != 1 or decoded.size != (1 << n):
        raise ValueError(
            f"decoded set must hold {1 << n} values, got shape {decoded.shape}"
        )
    rho = effective_correlation(c, c_prime, n)
    if rho == 0.0:
        raise ValueError("estimator undefined: effective correlation (c c')**n is zero")
    theta_bar = -float(decoded.mean()) / rho
    standardized = math.nan
    if theta_true is not None:
        info = fisher_vandam(c, c_prime, theta_true, n).value
        standardized = math.sqrt(info) * (theta_bar - theta_true)
    theta_ref = theta_true if theta_true is not None else theta_bar
    if -1 < theta_ref < 1:
        variance_bound = 1.0 / fisher_vandam(c, c_prime, theta_ref, n).value
    else:
        variance_bound = math.nan
    return MLEResult(
        theta_bar=theta_bar, standardized=standardized, variance_bound=variance_bound
    )


def _output_law(theta: float, c: float, c_prime: float, n: int) -> float:
    """P(decoded sign = -1) under the source law and channel (c c')**n."""
    if not -1 < theta < 1:
        raise ValueError(f"theta must lie in (-1, 1), got {theta}")
    rho = effective_correlation(c, c_prime, n)
    return (1.0 + rho * theta) / 2.0


def scores(sets, theta: float, c: float, c_prime: float, n: int) -> np.ndarray:
    """Per-run score (d/dtheta of the run log-likelihood) at theta."""
    sets = np.atleast_2d(np.asarray(sets))
    m = sets.shape[1]
    rho = effective_correlation(c, c_prime, n)
    p = _output_law(theta, c, c_prime, n)
    if p <= 0.0 or p >= 1.0:
        raise ValueError(f"degenerate output law p={p}; score undefined")
    n_minus = np.count_nonzero(sets == -1, axis=1).astype(np.float64)
    return (rho / 2.0) * (n_minus / p - (m - n_minus) / (1.0 - p))


def log_likelihoods(sets, theta: float, c: float, c_prime: float, n: int) -> np.ndarray:
    """Per-run log-likelihood of theta given the decoded signs."""
    sets = np.atleast_2d(np.asarray(sets))
    m = sets.shape[1]
    p = _output_law(theta, c, c_prime, n)
    if p <= 0.0 or p >= 1.0:
        raise ValueError(f"degenerate output law p={p}; log-likelihood unbounded")
    n_minus = np.count_nonzero(sets == -1, axis=1).astype(np.float64)
    return n_minus * math.log(p) + (m - n_minus) * math.log(1.0 - p)


def empirical_fisher(sets, theta: float, c: float, c_prime: float, n: int) -> float:
    """Score-variance estimate of the Fisher information per sample set.

    ``sets`` collects decoded +-1 sample sets, one run per row; at least
    1000 runs are required for a stable variance.
    """
    sets = np.atleast_2d(np.asarray(sets))
    if sets.shape[0] < 1000:
        raise ValueError(
            f"empirical Fisher needs >= 1000 runs, got {sets.shape[0]}"
        )
    return float(np.var(scores(sets, theta, c, c_prime, n)))


def empirical_fisher_hessian(
    sets, theta: float, c: float, c_prime: float, n: int, step: float = 1e-4
) -> float:
    """Finite-difference Hessian form: minus the central second
    difference of the mean log-likelihood, cross-check for
    :func:`empirical_fisher`."""
    mean_ll = [
        float(np.mean(log_likelihoods(sets, t, c, c_prime, n)))
        for t in (theta - step, theta, theta + step)
    ]
    return -(mean_ll[0] - 2.0 * mean_ll[1] + mean_ll[2]) / (step * step)


@dataclass(frozen=True)
class CltReport:
    trials: int
    n: int
    c: float
    c_prime: float
    theta: float
    mean: float
    variance: float
    skewness: float
    crlb_product: float  # Var(theta_bar) * closed-form Fisher value
    mean_band: float
    variance_band: float
    skewness_band: float

    @property
    def passed(self) -> bool:
        return (
            abs(self.mean) <= self.mean_band
            and abs(self.variance - 1.0) <= self.variance_band
            and abs(self.skewness) <= self.skewness_band
        )


def clt_suite(
    trials: int,
    cfg: VanDamConfig,
    theta: float,
    master_seed: int,
    unit_offset: int = 0,
    backend: Optional[str] = None,
) -> CltReport:
    """Moment diagnostics of the standardized estimator over full runs.

    Each trial runs the protocol in all-addresses mode, estimates theta
    and standardizes with the closed-form Fisher value at the true
    theta. Bands are calibrated for 10**4 trials (mean within 0.05,
    variance within 0.1 of 1, |skewness| <= 0.25) and scale with
    1/sqrt(trials) from there.
    """
    if trials < 1000:
        raise ValueError(f"CLT suite needs >= 1000 trials, got {trials}")
    info = fisher_vandam(cfg.c, cfg.c_prime, theta, cfg.n).value
    rho = effective_correlation(cfg.c, cfg.c_prime, cfg.n)
    if rho == 0.0:
        raise ValueError("estimator undefined: effective correlation is zero")
    _, y_signs = vandam.sample_decoded_sets(
        cfg, theta, trials, master_seed, unit_offset=unit_offset, backend=backend
    )
    theta_bars = -y_signs.mean(axis=1, dtype=np.float64) / rho
    stats = math.sqrt(info) * (theta_bars - theta)
    mean = float(stats.mean())
    variance = float(stats.var(ddof=1))
    centered = stats - mean
    sd = math.sqrt(variance)
    skewness = float(np.mean(centered ** 3)) / sd ** 3 if sd > 0 else 0.0
    scale = math.sqrt(10_000.0 / trials)
    return CltReport(
        trials=trials, n=cfg.n, c=cfg.c, c_prime=cfg.c_prime, theta=theta,
        mean=mean, variance=variance, skewness=skewness,
        crlb_product=float(theta_bars.var(ddof=1)) * info,
        mean_band=0.05 * scale, variance_band=0.10 * scale,
        skewness_band=0.25 * scale,
    )
