#!/usr/bin/env python3

# SPDX-FileCopyrightText: 2024 noise-fingerprint developers
#
# SPDX-License-Identifier: GPL-3.0-or-later

"""Distribution statistics on noise series.

Histograms, moments, normal-probability (QQ) data, tail deviation from the
fitted normal with an Anderson-Darling gate, and the two-sample
Kolmogorov-Smirnov distance.
"""

from dataclasses import dataclass
import logging
import math

import numpy as np
from scipy.special import log_ndtr
from scipy.special import ndtr

from noise_fingerprint.config import AD_CRITICAL_VALUE
from noise_fingerprint.config import DEFAULT_BINS
from noise_fingerprint.config import DEFAULT_TAIL_FRACTION
from noise_fingerprint.config import MIN_TAIL_SAMPLES
from noise_fingerprint.exception import DegenerateError
from noise_fingerprint.exception import DomainError
from noise_fingerprint.exception import EmptySeriesError
from noise_fingerprint.exception import TooShortError

SQRT_2PI = math.sqrt(2.0 * math.pi)

# Acklam's rational approximation of the normal quantile function
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


@dataclass(frozen=True)
class Histogram:
    bin_edges: tuple
    counts: tuple


@dataclass(frozen=True, eq=False)
class QQData:
    theoretical: np.ndarray
    ordered: np.ndarray
    fit_mean: float
    fit_sd: float

    def __post_init__(self):
        theoretical = np.asarray(self.theoretical, dtype=np.float64)
        ordered = np.asarray(self.ordered, dtype=np.float64)
        if theoretical.shape != ordered.shape:
            raise DomainError("QQ quantile and value arrays differ in length")
        if not self.fit_sd > 0:
            raise DomainError("QQ fit_sd must be positive")
        object.__setattr__(self, "theoretical", theoretical)
        object.__setattr__(self, "ordered", ordered)

    @property
    def points(self):
        return list(zip(self.theoretical.tolist(), self.ordered.tolist()))


@dataclass(frozen=True)
class MomentSummary:
    n: int
    mean: float
    sd: float
    skewness: float
    excess_kurtosis: float


@dataclass(frozen=True)
class TailReport:
    tail_fraction: float
    lower_dev: float
    upper_dev: float
    combined_dev: float
    normality_stat: float
    normality_pass: bool


def _values(series):
    values = getattr(series, "values", series)
    return np.asarray(values, dtype=np.float64).ravel()


def moments(series):
    v = _values(series)
    n = v.size
    if n < 2:
        raise TooShortError("Moments need at least 2 values, got " + str(n))
    if np.all(v == v[0]):
        raise DegenerateError("All " + str(n) + " values are equal; skewness and kurtosis are undefined")
    mean = float(v.mean())
    dev = v - mean
    sd = math.sqrt(float(np.dot(dev, dev)) / (n - 1))
    skewness = float(np.mean(dev ** 3)) / sd ** 3
    excess_kurtosis = float(np.mean(dev ** 4)) / sd ** 4 - 3.0
    return MomentSummary(n, mean, sd, skewness, excess_kurtosis)


def histogram(series, k=DEFAULT_BINS):
    """Equal-width histogram over [min, max]; the last bin is right-closed."""
    if int(k) != k or k < 1:
        raise DomainError("Bin count must be an integer >= 1, got " + str(k))
    k = int(k)
    v = _values(series)
    v = v[np.isfinite(v)]
    if v.size == 0:
        raise EmptySeriesError("Histogram of an empty series")
    lo = float(v.min())
    hi = float(v.max())
    if hi == lo:
        return Histogram((lo - 0.5, lo + 0.5), (int(v.size),))
    edges = lo + (hi - lo) * np.arange(k + 1) / k
    edges[-1] = hi
    bins = np.floor(k * (v - lo) / (hi - lo)).astype(np.int64)
    bins = np.clip(bins, 0, k - 1)
    counts = np.bincount(bins, minlength=k)
    return Histogram(tuple(edges.tolist()), tuple(int(c) for c in counts))


def _lower_quantile(q):
    """Acklam's approximation for 0 < q <= 0.5."""
    x = np.empty_like(q)
    tail = q < _P_LOW
    if np.any(tail):
        r = np.sqrt(-2.0 * np.log(q[tail]))
        x[tail] = ((((((_C[0] * r + _C[1]) * r + _C[2]) * r + _C[3]) * r + _C[4]) * r + _C[5])
                   / ((((_D[0] * r + _D[1]) * r + _D[2]) * r + _D[3]) * r + 1.0))
    central = ~tail
    if np.any(central):
        s = q[central] - 0.5
        r = s * s
        x[central] = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * s
                      / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    # one Halley step against the erf-based normal CDF
    e = ndtr(x) - q
    u = e * SQRT_2PI * np.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def inv_norm_cdf(p):
    """Standard normal quantile: z with Phi(z) = p, for scalars or arrays."""
    scalar = np.isscalar(p)
    p_arr = np.asarray(p, dtype=np.float64)
    if p_arr.size and not np.all((p_arr > 0.0) & (p_arr < 1.0)):
        raise DomainError("Probability must lie strictly between 0 and 1")
    flat = p_arr.ravel()
    upper = flat > 0.5
    q = np.where(upper, 1.0 - flat, flat)
    z = _lower_quantile(q)
    z = np.where(upper, -z, z).reshape(p_arr.shape)
    if scalar:
        return float(z)
    return z


def qq_normal(series):
    """Normal-probability plot data against the moment-fitted normal.

    Plotting positions are (i - 0.5) / n.
    """
    v = _values(series)
    n = v.size
    if n < 3:
        raise TooShortError("QQ plot needs at least 3 values, got " + str(n))
    fit = moments(v)
    ordered = np.sort(v)
    z = inv_norm_cdf((np.arange(1, n + 1) - 0.5) / n)
    return QQData(fit.mean + fit.sd * z, ordered, fit.mean, fit.sd)


def anderson_darling(ordered, mean, sd):
    """Anderson-Darling A^2 of sorted values against N(mean, sd)."""
    n = ordered.size
    w = (ordered - mean) / sd
    i = np.arange(1, n + 1)
    s = np.sum((2 * i - 1) * (log_ndtr(w) + log_ndtr(-w[::-1])))
    return float(-n - s / n)


def tail_deviation(series, tail_fraction=DEFAULT_TAIL_FRACTION):
    if not 0.0 < tail_fraction < 0.5:
        raise DomainError("Tail fraction must lie in (0, 0.5), got " + str(tail_fraction))
    v = _values(series)
    n = v.size
    if n < MIN_TAIL_SAMPLES:
        raise TooShortError("Tail analysis needs at least " + str(MIN_TAIL_SAMPLES)
                            + " values, got " + str(n))
    qq = qq_normal(v)
    m = max(1, math.ceil(tail_fraction * n - 1e-9))
    gap = np.abs(qq.ordered - qq.theoretical) / qq.fit_sd
    lower_dev = float(np.mean(gap[:m]))
    upper_dev = float(np.mean(gap[-m:]))

    a2 = anderson_darling(qq.ordered, qq.fit_mean, qq.fit_sd)
    stat = a2 * (1.0 + 4.0 / n - 25.0 / n ** 2)
    report = TailReport(tail_fraction, lower_dev, upper_dev, (lower_dev + upper_dev) / 2.0,
                        stat, bool(stat < AD_CRITICAL_VALUE))
    logging.debug("Tail deviation over " + str(m) + " points per side: lower " + str(lower_dev)
                  + ", upper " + str(upper_dev) + ", A2 " + str(stat))
    return report


def ks_two_sample(a, b):
    """Two-sample Kolmogorov-Smirnov distance sup |ECDF_a - ECDF_b|."""
    a = np.sort(_values(a))
    b = np.sort(_values(b))
    if a.size == 0 or b.size == 0:
        raise EmptySeriesError("KS distance of an empty sample")
    both = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, both, side="right") / a.size
    cdf_b = np.searchsorted(b, both, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


@dataclass(frozen=True)
class AnalysisReport:
    """Everything the `analyze` command exports for one series."""

    modality: str
    histogram: Histogram
    qq: QQData
    moments: MomentSummary
    tail: TailReport
    extra: dict

    def summary(self):
        summary = {
            "n": self.moments.n,
            "mean": self.moments.mean,
            "sd": self.moments.sd,
            "skewness": self.moments.skewness,
            "excess_kurtosis": self.moments.excess_kurtosis,
            "lower_dev": self.tail.lower_dev,
            "upper_dev": self.tail.upper_dev,
            "combined_dev": self.tail.combined_dev,
            "A2": self.tail.normality_stat,
            "pass": self.tail.normality_pass,
        }
        summary.update(self.extra)
        return summary

    def as_dict(self):
        return {
            "modality": self.modality,
            "histogram": {
                "bin_edges": list(self.histogram.bin_edges),
                "counts": list(self.histogram.counts),
            },
            "qq": {
                "fit_mean": self.qq.fit_mean,
                "fit_sd": self.qq.fit_sd,
                "points": [list(point) for point in self.qq.points],
            },
            "summary": self.summary(),
        }


def analyze(series, bins=DEFAULT_BINS, tail_fraction=DEFAULT_TAIL_FRACTION, extra=None):
    report = AnalysisReport(series.modality, histogram(series, bins), qq_normal(series), moments(series),
                            tail_deviation(series, tail_fraction), dict(extra or {}))
    logging.debug("Analyzed " + str(len(series)) + " " + series.modality + " values")
    return report
