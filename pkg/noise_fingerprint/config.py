# SPDX-FileCopyrightText: 2024 noise-fingerprint developers
#
# SPDX-License-Identifier: GPL-3.0-or-later

noise_fingerprint_version = "0.2.0"

#
# Imaging
#
SKIN_CB_MIN = 77
SKIN_CB_MAX = 127
SKIN_CR_MIN = 133
SKIN_CR_MAX = 173
MIN_MASK_COVERAGE = 0.01

#
# Extraction / stats
#
DEFAULT_TILE = 1
DEFAULT_TAIL_FRACTION = 0.05
DEFAULT_BINS = 30
MIN_TAIL_SAMPLES = 40

# alpha = 0.01 for normal with estimated mean and sd
AD_CRITICAL_VALUE = 1.092

#
# Matching
#
DEFAULT_THRESHOLD = 0.70
QUANTILE_KNOTS = 101

#
# Templates
#
TEMPLATE_VERSION = 1
TEMPLATE_DIGITS = 12
STORE_ENV_VAR = "NOISE_FINGERPRINT_STORE"
DEFAULT_STORE_DIR = "templates"

#
# Plotting
#
DEFAULT_PLOT_WIDTH = 640
DEFAULT_PLOT_HEIGHT = 480
MIN_PLOT_SIZE = 64
