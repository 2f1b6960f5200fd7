#!/usr/bin/env python3

# SPDX-FileCopyrightText: 2024 noise-fingerprint developers
#
# SPDX-License-Identifier: GPL-3.0-or-later

"""SVG 1.1 scatter, histogram and normal-probability plots."""

from dataclasses import dataclass
import logging
import xml.etree.ElementTree as ET

from noise_fingerprint.config import DEFAULT_PLOT_HEIGHT
from noise_fingerprint.config import DEFAULT_PLOT_WIDTH
from noise_fingerprint.config import MIN_PLOT_SIZE
from noise_fingerprint.exception import DomainError
from noise_fingerprint.extraction import NoiseSeries
from noise_fingerprint.stats import Histogram
from noise_fingerprint.stats import QQData

SVG_NS = "http://www.w3.org/2000/svg"

PLOT_SCATTER = "scatter"
PLOT_HISTOGRAM = "histogram"
PLOT_QQ = "qq"
PLOT_KINDS = [ PLOT_SCATTER, PLOT_HISTOGRAM, PLOT_QQ ]

MARGIN_LEFT = 48
MARGIN_RIGHT = 16
MARGIN_TOP = 28
MARGIN_BOTTOM = 32
POINT_RADIUS = 2


@dataclass(frozen=True)
class PlotSpec:
    kind: str
    width: int = DEFAULT_PLOT_WIDTH
    height: int = DEFAULT_PLOT_HEIGHT
    title: str = ""

    def __post_init__(self):
        if self.kind not in PLOT_KINDS:
            raise DomainError("Unknown plot kind \"" + str(self.kind) + "\". Supported: " + str(PLOT_KINDS))
        if self.width < MIN_PLOT_SIZE or self.height < MIN_PLOT_SIZE:
            raise DomainError("Plot must be at least " + str(MIN_PLOT_SIZE) + "x" + str(MIN_PLOT_SIZE)
                              + " pixels")


class _Frame:
    """Maps data coordinates onto the plot area."""

    def __init__(self, spec, x_range, y_range):
        self.left = MARGIN_LEFT
        self.right = spec.width - MARGIN_RIGHT
        self.top = MARGIN_TOP
        self.bottom = spec.height - MARGIN_BOTTOM
        self.x_lo, self.x_hi = _padded(x_range)
        self.y_lo, self.y_hi = _padded(y_range)

    def x(self, value):
        return self.left + (value - self.x_lo) / (self.x_hi - self.x_lo) * (self.right - self.left)

    def y(self, value):
        return self.bottom - (value - self.y_lo) / (self.y_hi - self.y_lo) * (self.bottom - self.top)


def _padded(bounds):
    lo, hi = bounds
    if hi <= lo:
        return lo - 0.5, lo + 0.5
    return lo, hi


def _fmt(value):
    return "%.3f" % value


def _sub(parent, tag, **attrs):
    return ET.SubElement(parent, tag, {key.replace("_", "-"): str(value) for key, value in attrs.items()})


def _axes(svg, frame):
    _sub(svg, "line", x1=frame.left, y1=frame.bottom, x2=frame.right, y2=frame.bottom,
         stroke="black", stroke_width=1)
    _sub(svg, "line", x1=frame.left, y1=frame.bottom, x2=frame.left, y2=frame.top,
         stroke="black", stroke_width=1)
    for value, x, y, anchor in ((frame.x_lo, frame.left, frame.bottom + 16, "start"),
                                (frame.x_hi, frame.right, frame.bottom + 16, "end"),
                                (frame.y_lo, frame.left - 4, frame.bottom, "end"),
                                (frame.y_hi, frame.left - 4, frame.top + 10, "end")):
        label = _sub(svg, "text", x=_fmt(x), y=_fmt(y), font_size=10, text_anchor=anchor)
        label.text = "%.4g" % value


def _points(data):
    if isinstance(data, NoiseSeries):
        return [(float(i), v) for i, v in data.pairs()]
    return [(float(x), float(y)) for x, y in data]


def _scatter(svg, spec, data):
    points = _points(data)
    xs = [p[0] for p in points] or [0.0]
    ys = [p[1] for p in points] or [0.0]
    frame = _Frame(spec, (min(xs), max(xs)), (min(ys), max(ys)))
    _axes(svg, frame)
    for x, y in points:
        _sub(svg, "circle", cx=_fmt(frame.x(x)), cy=_fmt(frame.y(y)), r=POINT_RADIUS, fill="steelblue")


def _histogram(svg, spec, hist):
    edges = hist.bin_edges
    frame = _Frame(spec, (edges[0], edges[-1]), (0.0, float(max(hist.counts))))
    _axes(svg, frame)
    for i, count in enumerate(hist.counts):
        x0 = frame.x(edges[i])
        x1 = frame.x(edges[i + 1])
        y = frame.y(count)
        _sub(svg, "rect", x=_fmt(x0), y=_fmt(y), width=_fmt(max(x1 - x0, 0.0)),
             height=_fmt(frame.bottom - y), fill="steelblue", stroke="white")


def _qq(svg, spec, qq):
    lo = float(min(qq.theoretical.min(), qq.ordered.min()))
    hi = float(max(qq.theoretical.max(), qq.ordered.max()))
    frame = _Frame(spec, (lo, hi), (lo, hi))
    _axes(svg, frame)
    _sub(svg, "line", x1=_fmt(frame.x(frame.x_lo)), y1=_fmt(frame.y(frame.y_lo)),
         x2=_fmt(frame.x(frame.x_hi)), y2=_fmt(frame.y(frame.y_hi)), stroke="red", stroke_width=1)
    for theoretical, ordered in qq.points:
        _sub(svg, "circle", cx=_fmt(frame.x(theoretical)), cy=_fmt(frame.y(ordered)), r=POINT_RADIUS,
             fill="steelblue")


def render_svg(data, spec):
    svg = ET.Element("svg", {"xmlns": SVG_NS, "version": "1.1", "width": str(spec.width),
                             "height": str(spec.height),
                             "viewBox": "0 0 " + str(spec.width) + " " + str(spec.height)})
    if spec.title:
        title = _sub(svg, "text", x=_fmt(spec.width / 2), y=18, font_size=14, text_anchor="middle")
        title.text = spec.title
    if spec.kind == PLOT_SCATTER:
        _scatter(svg, spec, data)
    elif spec.kind == PLOT_HISTOGRAM:
        if not isinstance(data, Histogram):
            raise DomainError("Histogram plot needs a Histogram")
        _histogram(svg, spec, data)
    else:
        if not isinstance(data, QQData):
            raise DomainError("QQ plot needs QQ data")
        _qq(svg, spec, data)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(svg, encoding="unicode") + "\n"


def emit_svg(data, spec, path):
    """Write the plot to `path`; 0 on success, 2 when the file cannot be written."""
    document = render_svg(data, spec)
    try:
        with open(path, "w", encoding="utf-8") as f:
            f.write(document)
    except OSError as e:
        logging.error("Could not write " + str(path) + ": " + str(e))
        return 2
    logging.debug("Wrote " + spec.kind + " plot " + str(path))
    return 0
