#!/usr/bin/env python3

# SPDX-FileCopyrightText: 2024 noise-fingerprint developers
#
# SPDX-License-Identifier: GPL-3.0-or-later

"""Turn capture files into noise series.

A capture is a P6 image (fingerprint or face), a `t,x,y` eye trace or an
exported `frame_index,value` series; the kind is read from the content.
"""

import logging

from noise_fingerprint.config import MIN_MASK_COVERAGE
from noise_fingerprint.exception import CoverageError
from noise_fingerprint.exception import FormatError
from noise_fingerprint.exception import ModalityError
from noise_fingerprint.extraction import EYE_TRACE_HEADER
from noise_fingerprint.extraction import IMAGE_MODALITIES
from noise_fingerprint.extraction import MODALITY_EYE_X
from noise_fingerprint.extraction import MODALITY_FACE
from noise_fingerprint.extraction import SERIES_HEADER
from noise_fingerprint.extraction import FrameSpec
from noise_fingerprint.extraction import check_modality
from noise_fingerprint.extraction import eye_displacements
from noise_fingerprint.extraction import frame_rgb_sums
from noise_fingerprint.extraction import parse_eye_trace
from noise_fingerprint.extraction import read_series
from noise_fingerprint.imaging import PPM_MAGIC
from noise_fingerprint.imaging import decode_image
from noise_fingerprint.imaging import largest_region
from noise_fingerprint.imaging import mask_coverage
from noise_fingerprint.imaging import skin_mask

CAPTURE_IMAGE = "image"
CAPTURE_EYE = "eye"
CAPTURE_SERIES = "series"


def read_capture(path):
    """Return (kind, content); images stay bytes, text captures are decoded."""
    with open(path, 'rb') as f:
        data = f.read()
    if data.startswith(PPM_MAGIC):
        return CAPTURE_IMAGE, data
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise FormatError("Unrecognised capture (neither P6 image nor UTF-8 text): " + str(path))
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        header = line.replace(" ", "").lower()
        if header == EYE_TRACE_HEADER:
            return CAPTURE_EYE, text
        if header == SERIES_HEADER:
            return CAPTURE_SERIES, text
        break
    raise FormatError("Unrecognised capture format: " + str(path))


def image_series(data, modality, tile=1, min_coverage=MIN_MASK_COVERAGE, skin_params=None):
    """Decode, mask and sum frames; faces keep only the largest skin region."""
    if modality not in IMAGE_MODALITIES:
        raise ModalityError("An image capture cannot feed the " + str(modality) + " modality")
    image = decode_image(data)
    mask = skin_mask(image, skin_params)
    if modality == MODALITY_FACE:
        mask = largest_region(mask)
    coverage = mask_coverage(mask)
    logging.debug(modality + " mask coverage " + str(coverage))
    if coverage < min_coverage:
        raise CoverageError("Mask covers " + "%.4f" % coverage + " of the image, below the minimum "
                            + str(min_coverage))
    return frame_rgb_sums(image, mask, FrameSpec(tile), modality)


def eye_series(text, stimulus_onset=None):
    """Both displacement series (eye_x, eye_y) of an eye trace."""
    return eye_displacements(parse_eye_trace(text, stimulus_onset))


def series_from_file(path, modality, tile=1, stimulus_onset=None, min_coverage=MIN_MASK_COVERAGE,
                     skin_params=None):
    check_modality(modality)
    kind, content = read_capture(path)
    logging.debug("Capture " + str(path) + " is a " + kind)
    if kind == CAPTURE_IMAGE:
        return image_series(content, modality, tile, min_coverage, skin_params)
    if kind == CAPTURE_EYE:
        if modality in IMAGE_MODALITIES:
            raise ModalityError("An eye trace cannot feed the " + modality + " modality")
        eye_x, eye_y = eye_series(content, stimulus_onset)
        return eye_x if modality == MODALITY_EYE_X else eye_y
    series = read_series(content)
    if series.modality != modality:
        raise ModalityError("Series file holds " + series.modality + " data, expected " + modality)
    return series
