#!/usr/bin/env python3

# SPDX-FileCopyrightText: 2024 noise-fingerprint developers
#
# SPDX-License-Identifier: GPL-3.0-or-later

"""Enrollment templates, probe scoring and three-modality fusion."""

from dataclasses import dataclass
import logging
import math

import numpy as np

from noise_fingerprint.config import DEFAULT_TAIL_FRACTION
from noise_fingerprint.config import DEFAULT_THRESHOLD
from noise_fingerprint.config import MIN_TAIL_SAMPLES
from noise_fingerprint.config import QUANTILE_KNOTS
from noise_fingerprint.config import TEMPLATE_VERSION
from noise_fingerprint.exception import DomainError
from noise_fingerprint.exception import EmptySeriesError
from noise_fingerprint.exception import ModalityError
from noise_fingerprint.exception import TooShortError
from noise_fingerprint.extraction import EYE_MODALITIES
from noise_fingerprint.extraction import MODALITY_EYE_Y
from noise_fingerprint.extraction import MODALITY_FACE
from noise_fingerprint.extraction import MODALITY_FINGERPRINT
from noise_fingerprint.extraction import NoiseSeries
from noise_fingerprint.extraction import check_modality
from noise_fingerprint.stats import MomentSummary
from noise_fingerprint.stats import TailReport
from noise_fingerprint.stats import moments
from noise_fingerprint.stats import tail_deviation

QUANTILE_LEVELS = np.linspace(0.0, 1.0, QUANTILE_KNOTS)


@dataclass(frozen=True, eq=False)
class FingerprintTemplate:
    user_id: str
    modality: str
    quantiles: np.ndarray
    moments: MomentSummary
    tail: TailReport
    enroll_count: int
    version: int = TEMPLATE_VERSION

    def __post_init__(self):
        check_modality(self.modality)
        quantiles = np.asarray(self.quantiles, dtype=np.float64).ravel()
        if quantiles.size != QUANTILE_KNOTS:
            raise DomainError("Template needs " + str(QUANTILE_KNOTS) + " quantiles, got " + str(quantiles.size))
        if np.any(np.diff(quantiles) < 0):
            raise DomainError("Template quantiles must be non-decreasing")
        if self.enroll_count < 1:
            raise DomainError("enroll_count must be >= 1")
        object.__setattr__(self, "quantiles", quantiles)

    def __eq__(self, other):
        if not isinstance(other, FingerprintTemplate):
            return NotImplemented
        return (self.user_id == other.user_id and self.modality == other.modality
                and np.array_equal(self.quantiles, other.quantiles)
                and self.moments == other.moments and self.tail == other.tail
                and self.enroll_count == other.enroll_count and self.version == other.version)


@dataclass(frozen=True)
class MatchReport:
    modality: str
    score: float
    ks_distance: float
    tail_gap: float
    accepted: bool
    threshold: float


@dataclass(frozen=True)
class FusedDecision:
    reports: tuple
    authenticated: bool

    @property
    def score(self):
        return fused_score(self.reports)


@dataclass(frozen=True, eq=False)
class ProbeSummary:
    """Sorted probe values with their tail report, reusable across templates."""

    modality: str
    ordered: np.ndarray
    combined_dev: float


def _pool(modality, enrollment):
    if isinstance(enrollment, NoiseSeries):
        enrollment = [ enrollment ]
    enrollment = list(enrollment)
    if not enrollment:
        raise EmptySeriesError("No enrollment series given")
    for series in enrollment:
        if series.modality != modality:
            raise ModalityError("Enrollment series of modality " + str(series.modality)
                                + " given for a " + str(modality) + " template")
    return np.concatenate([series.values for series in enrollment]), len(enrollment)


def build_template(user_id, modality, enrollment, tail_fraction=DEFAULT_TAIL_FRACTION):
    check_modality(modality)
    pool, count = _pool(modality, enrollment)
    if pool.size < MIN_TAIL_SAMPLES:
        raise TooShortError("Enrollment pool holds " + str(pool.size) + " values, at least "
                            + str(MIN_TAIL_SAMPLES) + " needed")
    quantiles = np.quantile(pool, QUANTILE_LEVELS)
    template = FingerprintTemplate(user_id, modality, quantiles, moments(pool),
                                   tail_deviation(pool, tail_fraction), count)
    logging.debug("Built " + modality + " template for " + str(user_id) + " from "
                  + str(pool.size) + " values")
    return template


def _knot_levels(quantiles):
    """Unique knots with the CDF level reached just before and at each knot."""
    levels = QUANTILE_LEVELS
    knots, first = np.unique(quantiles, return_index=True)
    last = quantiles.size - 1 - np.unique(quantiles[::-1], return_index=True)[1]
    return knots, levels[first], levels[last]


def template_cdf(template, x):
    """Left and right limits of the quantile-interpolated template CDF at x."""
    knots, level_left, level_right = _knot_levels(template.quantiles)
    x = np.asarray(x, dtype=np.float64)
    k = np.searchsorted(knots, x, side="right") - 1
    left = np.zeros_like(x)
    right = np.zeros_like(x)

    above = k == knots.size - 1
    left[above] = np.where(x[above] == knots[-1], level_left[-1], 1.0)
    right[above] = 1.0

    inside = (k >= 0) & ~above
    ki = k[inside]
    xi = x[inside]
    on_knot = xi == knots[ki]
    nxt = np.minimum(ki + 1, knots.size - 1)
    span = knots[nxt] - knots[ki]
    frac = np.where(on_knot, 0.0, (xi - knots[ki]) / np.where(span > 0, span, 1.0))
    between = level_right[ki] + frac * (level_left[nxt] - level_right[ki])
    left[inside] = np.where(on_knot, level_left[ki], between)
    right[inside] = np.where(on_knot, level_right[ki], between)
    return left, right


def template_ks_distance(template, ordered):
    """sup |ECDF_probe - F_template| over the real line, for sorted probe values."""
    candidates = np.concatenate([ordered, np.unique(template.quantiles)])
    n = ordered.size
    ecdf_left = np.searchsorted(ordered, candidates, side="left") / n
    ecdf_right = np.searchsorted(ordered, candidates, side="right") / n
    cdf_left, cdf_right = template_cdf(template, candidates)
    return float(max(np.max(np.abs(ecdf_left - cdf_left)), np.max(np.abs(ecdf_right - cdf_right))))


def prepare_probe(probe, tail_fraction=DEFAULT_TAIL_FRACTION):
    if len(probe) < MIN_TAIL_SAMPLES:
        raise TooShortError("Probe holds " + str(len(probe)) + " values, at least "
                            + str(MIN_TAIL_SAMPLES) + " needed")
    tail = tail_deviation(probe, tail_fraction)
    return ProbeSummary(probe.modality, np.sort(probe.values), tail.combined_dev)


def _check_threshold(threshold):
    if not 0.0 <= threshold <= 1.0:
        raise DomainError("Threshold must lie in [0, 1], got " + str(threshold))


def score_probe(template, summary, threshold=DEFAULT_THRESHOLD):
    _check_threshold(threshold)
    if summary.modality != template.modality:
        raise ModalityError("Probe modality " + str(summary.modality) + " does not match template modality "
                            + str(template.modality))
    ks = template_ks_distance(template, summary.ordered)
    tail_gap = abs(summary.combined_dev - template.tail.combined_dev)
    score = min(1.0, max(0.0, (1.0 - ks) * math.exp(-tail_gap)))
    return MatchReport(template.modality, score, ks, tail_gap, score >= threshold, threshold)


def match_score(template, probe, threshold=DEFAULT_THRESHOLD):
    if probe.modality != template.modality:
        raise ModalityError("Probe modality " + str(probe.modality) + " does not match template modality "
                            + str(template.modality))
    report = score_probe(template, prepare_probe(probe, template.tail.tail_fraction), threshold)
    logging.debug("Match " + template.modality + " for " + str(template.user_id) + ": score "
                  + str(report.score) + " (ks " + str(report.ks_distance) + ", tail gap "
                  + str(report.tail_gap) + ")")
    return report


def fused_score(reports):
    """Score at which the AND decision flips: the weakest modality."""
    return min(report.score for report in reports)


def fuse(fingerprint, face, eye, eye_modality=MODALITY_EYE_Y):
    """Authenticate only when every modality is accepted.

    Reports are identified by modality, so their argument order does not
    matter.
    """
    if eye_modality not in EYE_MODALITIES:
        raise ModalityError("Eye modality must be one of " + str(EYE_MODALITIES))
    expected = [ MODALITY_FINGERPRINT, MODALITY_FACE, eye_modality ]
    by_modality = {}
    for report in (fingerprint, face, eye):
        if report.modality in by_modality:
            raise ModalityError("Duplicate " + str(report.modality) + " report")
        by_modality[report.modality] = report
    if sorted(by_modality) != sorted(expected):
        raise ModalityError("Fusion needs one report each for " + str(expected) + ", got "
                            + str(sorted(by_modality)))
    reports = tuple(by_modality[modality] for modality in expected)
    return FusedDecision(reports, all(report.accepted for report in reports))
