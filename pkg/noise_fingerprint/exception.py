#!/usr/bin/env python3

# SPDX-FileCopyrightText: 2024 noise-fingerprint developers
#
# SPDX-License-Identifier: GPL-3.0-or-later


class NoiseFingerprintException(Exception):
    pass


class FormatError(NoiseFingerprintException):
    pass


class TruncationError(NoiseFingerprintException):
    pass


class UnsupportedError(NoiseFingerprintException):
    pass


class DimensionError(NoiseFingerprintException):
    pass


class EmptySeriesError(NoiseFingerprintException):
    pass


class OrderError(NoiseFingerprintException):
    pass


class TooShortError(NoiseFingerprintException):
    pass


class NoBaselineError(NoiseFingerprintException):
    pass


class DegenerateError(NoiseFingerprintException):
    pass


class DomainError(NoiseFingerprintException):
    pass


class ModalityError(NoiseFingerprintException):
    pass


class PopulationError(NoiseFingerprintException):
    pass


class CoverageError(NoiseFingerprintException):
    pass


class StoreError(NoiseFingerprintException):
    pass


class IntegrityError(NoiseFingerprintException):
    pass


class ConfigError(NoiseFingerprintException):
    pass
