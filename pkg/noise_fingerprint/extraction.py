#!/usr/bin/env python3

# SPDX-FileCopyrightText: 2024 noise-fingerprint developers
#
# SPDX-License-Identifier: GPL-3.0-or-later

"""Noise series extraction from masked images and eye-tracker traces."""

from dataclasses import dataclass
import io
import logging
import math
import re

import numpy as np

from noise_fingerprint.config import DEFAULT_TILE
from noise_fingerprint.exception import DimensionError
from noise_fingerprint.exception import DomainError
from noise_fingerprint.exception import EmptySeriesError
from noise_fingerprint.exception import FormatError
from noise_fingerprint.exception import ModalityError
from noise_fingerprint.exception import NoBaselineError
from noise_fingerprint.exception import OrderError
from noise_fingerprint.exception import TooShortError

MODALITY_FINGERPRINT = "fingerprint"
MODALITY_FACE = "face"
MODALITY_EYE_X = "eye_x"
MODALITY_EYE_Y = "eye_y"
MODALITIES = [ MODALITY_FINGERPRINT, MODALITY_FACE, MODALITY_EYE_X, MODALITY_EYE_Y ]
IMAGE_MODALITIES = [ MODALITY_FINGERPRINT, MODALITY_FACE ]
EYE_MODALITIES = [ MODALITY_EYE_X, MODALITY_EYE_Y ]

EYE_TRACE_HEADER = "t,x,y"
SERIES_HEADER = "frame_index,value"

_ONSET_RE = re.compile(r"^#\s*stimulus_onset\s*=\s*(\S+)\s*$")
_MODALITY_RE = re.compile(r"^#\s*modality\s*=\s*(\S+)\s*$")


def check_modality(modality):
    if modality not in MODALITIES:
        raise ModalityError("Unknown modality \"" + str(modality) + "\". Supported: " + str(MODALITIES))
    return modality


@dataclass(frozen=True, eq=False)
class NoiseSeries:
    """Ordered (frame_index, value) pairs for one modality."""

    modality: str
    frame_indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        check_modality(self.modality)
        indices = np.asarray(self.frame_indices, dtype=np.int64).ravel()
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if indices.shape != values.shape:
            raise DimensionError("frame_indices and values differ in length")
        if indices.size and indices[0] < 0:
            raise DomainError("frame_index must be >= 0")
        if np.any(np.diff(indices) <= 0):
            raise OrderError("frame_index must be strictly increasing")
        object.__setattr__(self, "frame_indices", indices)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, modality, values):
        values = np.asarray(values, dtype=np.float64).ravel()
        return cls(modality, np.arange(values.size, dtype=np.int64), values)

    def __len__(self):
        return int(self.values.size)

    def pairs(self):
        return list(zip(self.frame_indices.tolist(), self.values.tolist()))

    def __eq__(self, other):
        if not isinstance(other, NoiseSeries):
            return NotImplemented
        return (self.modality == other.modality
                and np.array_equal(self.frame_indices, other.frame_indices)
                and np.array_equal(self.values, other.values))


@dataclass(frozen=True, eq=False)
class EyeTrace:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    stimulus_onset: float

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.float64).ravel()
        x = np.asarray(self.x, dtype=np.float64).ravel()
        y = np.asarray(self.y, dtype=np.float64).ravel()
        if not (t.shape == x.shape == y.shape):
            raise DimensionError("t, x and y differ in length")
        if np.any(np.diff(t) <= 0):
            raise OrderError("Sample times must be strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "stimulus_onset", float(self.stimulus_onset))

    def __len__(self):
        return int(self.t.size)


@dataclass(frozen=True)
class FrameSpec:
    tile: int = DEFAULT_TILE

    def __post_init__(self):
        if int(self.tile) != self.tile or self.tile < 1:
            raise DomainError("Tile size must be an integer >= 1, got " + str(self.tile))


def frame_rgb_sums(image, mask, spec=None, modality=MODALITY_FINGERPRINT):
    """Sum R+G+B over every fully masked tile of the image.

    Tiles are numbered row-major over the full grid of complete tiles, so
    masked-out tiles leave gaps in frame_index.
    """
    if spec is None:
        spec = FrameSpec()
    if modality not in IMAGE_MODALITIES:
        raise ModalityError("Frame sums belong to an image modality, not " + str(modality))
    if (image.width, image.height) != (mask.width, mask.height):
        raise DimensionError("Image is " + str(image.width) + "x" + str(image.height)
                             + " but mask is " + str(mask.width) + "x" + str(mask.height))
    tile = spec.tile
    if tile > min(image.width, image.height):
        raise DimensionError("Tile size " + str(tile) + " exceeds image size "
                             + str(image.width) + "x" + str(image.height))

    rows = image.height // tile
    cols = image.width // tile
    pixel_sums = image.pixels[:rows * tile, :cols * tile].sum(axis=2, dtype=np.int64)
    tile_sums = pixel_sums.reshape(rows, tile, cols, tile).sum(axis=(1, 3))
    in_mask = mask.bits[:rows * tile, :cols * tile].reshape(rows, tile, cols, tile).all(axis=(1, 3))

    indices = np.flatnonzero(in_mask.ravel())
    if indices.size == 0:
        raise EmptySeriesError("No tile lies fully inside the mask")
    logging.debug("Extracted " + str(indices.size) + " of " + str(rows * cols) + " frames (tile "
                  + str(tile) + ")")
    return NoiseSeries(modality, indices, tile_sums.ravel()[indices].astype(np.float64))


def _parse_float(field, line_no):
    try:
        value = float(field)
    except ValueError:
        raise FormatError("Line " + str(line_no) + ": not a number: " + repr(field))
    if not math.isfinite(value):
        raise FormatError("Line " + str(line_no) + ": not a finite number: " + repr(field))
    return value


def _lines(text):
    if isinstance(text, str):
        return io.StringIO(text)
    return text


def parse_eye_trace(text, stimulus_onset=None):
    """Parse a `t,x,y` CSV eye trace.

    An explicit stimulus_onset overrides a `# stimulus_onset=<seconds>`
    comment line in the data.
    """
    onset_comment = None
    header_seen = False
    t, x, y = [], [], []
    for line_no, raw in enumerate(_lines(text), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            match = _ONSET_RE.match(line)
            if match:
                onset_comment = _parse_float(match.group(1), line_no)
            continue
        if not header_seen:
            if line.replace(" ", "").lower() != EYE_TRACE_HEADER:
                raise FormatError("Missing eye trace header \"" + EYE_TRACE_HEADER + "\"")
            header_seen = True
            continue
        fields = line.split(",")
        if len(fields) != 3:
            raise FormatError("Line " + str(line_no) + ": expected 3 fields, got " + str(len(fields)))
        ts, xs, ys = (_parse_float(f.strip(), line_no) for f in fields)
        if ts < 0:
            raise FormatError("Line " + str(line_no) + ": negative sample time")
        if t and ts <= t[-1]:
            raise OrderError("Line " + str(line_no) + ": sample time " + str(ts)
                             + " does not follow " + str(t[-1]))
        t.append(ts)
        x.append(xs)
        y.append(ys)

    if not header_seen:
        raise FormatError("Missing eye trace header \"" + EYE_TRACE_HEADER + "\"")
    if len(t) < 2:
        raise TooShortError("Eye trace needs at least 2 samples, got " + str(len(t)))
    onset = stimulus_onset if stimulus_onset is not None else onset_comment
    if onset is None:
        raise FormatError("No stimulus onset given (flag or \"# stimulus_onset=\" line)")
    logging.debug("Parsed eye trace: " + str(len(t)) + " samples, onset " + str(onset))
    return EyeTrace(np.array(t), np.array(x), np.array(y), onset)


def eye_displacements(trace):
    """Displacement from the resting pupil position after stimulus onset.

    The resting position is the per-axis median of the pre-onset samples.
    """
    before = trace.t < trace.stimulus_onset
    after = ~before
    if not np.any(before):
        raise NoBaselineError("No samples before stimulus onset " + str(trace.stimulus_onset))
    if not np.any(after):
        raise EmptySeriesError("No samples at or after stimulus onset " + str(trace.stimulus_onset))
    rest_x = np.median(trace.x[before])
    rest_y = np.median(trace.y[before])
    dx = trace.x[after] - rest_x
    dy = trace.y[after] - rest_y
    logging.debug("Resting pupil position (" + str(rest_x) + ", " + str(rest_y) + "), "
                  + str(dx.size) + " displacements")
    return NoiseSeries.from_values(MODALITY_EYE_X, dx), NoiseSeries.from_values(MODALITY_EYE_Y, dy)


def axis_variances(eye_x, eye_y):
    """Sample variance of the x and y displacement series."""
    def _var(series):
        if len(series) < 2:
            raise TooShortError("Variance needs at least 2 displacements")
        return float(np.var(series.values, ddof=1))
    return {"var_x": _var(eye_x), "var_y": _var(eye_y)}


def write_series(series, stream):
    print("# modality=" + series.modality, file=stream)
    print(SERIES_HEADER, file=stream)
    for index, value in series.pairs():
        print(str(index) + "," + repr(float(value)), file=stream)


def read_series(text, modality=None):
    """Read a NoiseSeries CSV; `modality` overrides the header comment."""
    found = None
    header_seen = False
    indices, values = [], []
    for line_no, raw in enumerate(_lines(text), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            match = _MODALITY_RE.match(line)
            if match:
                found = match.group(1)
            continue
        if not header_seen:
            if line.replace(" ", "").lower() != SERIES_HEADER:
                raise FormatError("Missing series header \"" + SERIES_HEADER + "\"")
            header_seen = True
            continue
        fields = line.split(",")
        if len(fields) != 2:
            raise FormatError("Line " + str(line_no) + ": expected 2 fields, got " + str(len(fields)))
        try:
            indices.append(int(fields[0].strip()))
        except ValueError:
            raise FormatError("Line " + str(line_no) + ": bad frame index " + repr(fields[0]))
        values.append(_parse_float(fields[1].strip(), line_no))

    if not header_seen:
        raise FormatError("Missing series header \"" + SERIES_HEADER + "\"")
    chosen = modality if modality is not None else found
    if chosen is None:
        raise FormatError("Series has no \"# modality=\" line")
    if not values:
        raise EmptySeriesError("Series file holds no values")
    return NoiseSeries(check_modality(chosen), np.array(indices, dtype=np.int64), np.array(values))
