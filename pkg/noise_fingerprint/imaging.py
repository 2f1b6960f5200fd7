#!/usr/bin/env python3

# SPDX-FileCopyrightText: 2024 noise-fingerprint developers
#
# SPDX-License-Identifier: GPL-3.0-or-later

"""Image decoding and skin / face masks.

Images are binary portable pixmaps (P6, maxval 255). Masks are derived
from the YCbCr chroma of each pixel; the face region is the largest
4-connected component of the skin mask.
"""

from dataclasses import dataclass
import logging

import numpy as np

from noise_fingerprint.config import SKIN_CB_MAX
from noise_fingerprint.config import SKIN_CB_MIN
from noise_fingerprint.config import SKIN_CR_MAX
from noise_fingerprint.config import SKIN_CR_MIN
from noise_fingerprint.exception import DimensionError
from noise_fingerprint.exception import DomainError
from noise_fingerprint.exception import FormatError
from noise_fingerprint.exception import TruncationError
from noise_fingerprint.exception import UnsupportedError

PPM_MAGIC = b"P6"
PPM_MAXVAL = 255
PPM_WHITESPACE = b" \t\n\r\v\f"


@dataclass(frozen=True, eq=False)
class RawImage:
    """8-bit RGB pixel grid, pixels shaped (height, width, 3) in row-major order."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise DimensionError("Image must be at least 1x1, got " + str(self.width) + "x" + str(self.height))
        pixels = np.asarray(self.pixels)
        if pixels.shape != (self.height, self.width, 3):
            raise DimensionError("Pixel array shape " + str(pixels.shape) + " does not match "
                                 + str(self.width) + "x" + str(self.height))
        if pixels.dtype != np.uint8:
            if pixels.size and (pixels.min() < 0 or pixels.max() > 255):
                raise DomainError("Channel values must be in [0, 255]")
            if pixels.size and not np.array_equal(pixels, np.floor(pixels)):
                raise DomainError("Channel values must be integers")
            pixels = pixels.astype(np.uint8)
        object.__setattr__(self, "pixels", pixels)

    @classmethod
    def from_triples(cls, width, height, triples):
        pixels = np.asarray(list(triples), dtype=np.int64)
        if pixels.shape != (width * height, 3):
            raise DimensionError("Expected " + str(width * height) + " RGB triples, got " + str(len(pixels)))
        return cls(width, height, pixels.reshape(height, width, 3))

    def triples(self):
        return [tuple(int(c) for c in p) for p in self.pixels.reshape(-1, 3)]

    def __eq__(self, other):
        if not isinstance(other, RawImage):
            return NotImplemented
        return (self.width == other.width and self.height == other.height
                and np.array_equal(self.pixels, other.pixels))


@dataclass(frozen=True, eq=False)
class Mask:
    """Boolean pixel grid, bits shaped (height, width); True means in-region."""

    width: int
    height: int
    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        if bits.shape != (self.height, self.width):
            raise DimensionError("Mask shape " + str(bits.shape) + " does not match "
                                 + str(self.width) + "x" + str(self.height))
        object.__setattr__(self, "bits", bits)

    @classmethod
    def full(cls, width, height, value=True):
        return cls(width, height, np.full((height, width), value, dtype=bool))

    def __eq__(self, other):
        if not isinstance(other, Mask):
            return NotImplemented
        return (self.width == other.width and self.height == other.height
                and np.array_equal(self.bits, other.bits))


@dataclass(frozen=True)
class SkinMaskParams:
    cb_min: int = SKIN_CB_MIN
    cb_max: int = SKIN_CB_MAX
    cr_min: int = SKIN_CR_MIN
    cr_max: int = SKIN_CR_MAX

    def __post_init__(self):
        for name in ("cb_min", "cb_max", "cr_min", "cr_max"):
            value = getattr(self, name)
            if not 0 <= value <= 255:
                raise DomainError(name + " must be in [0, 255], got " + str(value))
        if self.cb_min > self.cb_max or self.cr_min > self.cr_max:
            raise DomainError("Chroma bounds must satisfy min <= max")


def _next_token(data, pos):
    """Return (token, position after token), skipping whitespace and comments."""
    size = len(data)
    while pos < size:
        c = data[pos:pos + 1]
        if c in PPM_WHITESPACE:
            pos += 1
        elif c == b"#":
            while pos < size and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        else:
            break
    start = pos
    while pos < size and data[pos:pos + 1] not in PPM_WHITESPACE and data[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise FormatError("Incomplete PPM header")
    return data[start:pos], pos


def _header_int(token, name):
    if not token.isdigit():
        raise FormatError("PPM " + name + " is not a decimal number: " + repr(token))
    return int(token)


def decode_image(data):
    """Decode a binary P6 pixmap into a RawImage."""
    data = bytes(data)
    if data[:2] != PPM_MAGIC or (len(data) > 2 and data[2:3] not in PPM_WHITESPACE and data[2:3] != b"#"):
        raise FormatError("Not a binary PPM (P6) file")

    token, pos = _next_token(data, 2)
    width = _header_int(token, "width")
    token, pos = _next_token(data, pos)
    height = _header_int(token, "height")
    token, pos = _next_token(data, pos)
    maxval = _header_int(token, "maxval")
    if width < 1 or height < 1:
        raise FormatError("PPM dimensions must be positive, got " + str(width) + "x" + str(height))
    if maxval != PPM_MAXVAL:
        raise UnsupportedError("Unsupported PPM maxval " + str(maxval) + " (only 255 is supported)")

    # exactly one whitespace byte separates the header from the raster
    if pos >= len(data):
        raise TruncationError("PPM pixel data missing")
    if data[pos:pos + 1] not in PPM_WHITESPACE:
        raise FormatError("Malformed PPM header after maxval")
    pos += 1

    expected = 3 * width * height
    raster = data[pos:pos + expected]
    if len(raster) < expected:
        raise TruncationError("PPM pixel data truncated: expected " + str(expected)
                              + " bytes, got " + str(len(raster)))
    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)
    logging.debug("Decoded PPM image " + str(width) + "x" + str(height))
    return RawImage(width, height, pixels.copy())


def encode_image(image):
    """Encode a RawImage as a binary P6 pixmap."""
    header = "P6\n%d %d\n%d\n" % (image.width, image.height, PPM_MAXVAL)
    return header.encode("ascii") + image.pixels.tobytes()


def _round_half_away(values):
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


def chroma(image):
    """Return the (Cb, Cr) planes of an image, rounded to integers."""
    rgb = image.pixels.astype(np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b
    cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b
    return _round_half_away(cb), _round_half_away(cr)


def skin_mask(image, params=None):
    if params is None:
        params = SkinMaskParams()
    cb, cr = chroma(image)
    bits = ((cb >= params.cb_min) & (cb <= params.cb_max)
            & (cr >= params.cr_min) & (cr <= params.cr_max))
    mask = Mask(image.width, image.height, bits)
    logging.debug("Skin mask coverage: " + str(mask_coverage(mask)))
    return mask


def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def _union(parent, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    # the root is always the run met first in raster order
    if ra < rb:
        parent[rb] = ra
    elif rb < ra:
        parent[ra] = rb


def _row_runs(row):
    padded = np.concatenate(([0], row.astype(np.int8), [0]))
    edges = np.diff(padded)
    return zip(np.flatnonzero(edges == 1).tolist(), np.flatnonzero(edges == -1).tolist())


def largest_region(mask):
    """Keep only the largest 4-connected component of a mask.

    Components of equal size are ordered by their first pixel in raster
    order; the earliest one wins.
    """
    runs = []
    parent = []
    previous = []
    for row_index in range(mask.height):
        current = []
        j = 0
        for start, stop in _row_runs(mask.bits[row_index]):
            run = len(runs)
            runs.append((row_index, start, stop))
            parent.append(run)
            while j < len(previous) and runs[previous[j]][2] <= start:
                j += 1
            k = j
            while k < len(previous) and runs[previous[k]][1] < stop:
                _union(parent, run, previous[k])
                k += 1
            current.append(run)
        previous = current

    out = np.zeros((mask.height, mask.width), dtype=bool)
    if not runs:
        return Mask(mask.width, mask.height, out)

    sizes = {}
    for run, (_, start, stop) in enumerate(runs):
        root = _find(parent, run)
        sizes[root] = sizes.get(root, 0) + stop - start
    best = min(sizes, key=lambda root: (-sizes[root], root))
    for run, (row_index, start, stop) in enumerate(runs):
        if _find(parent, run) == best:
            out[row_index, start:stop] = True
    logging.debug("Largest region: " + str(sizes[best]) + " pixels out of "
                  + str(len(sizes)) + " components")
    return Mask(mask.width, mask.height, out)


def mask_coverage(mask):
    return float(np.count_nonzero(mask.bits)) / (mask.width * mask.height)
