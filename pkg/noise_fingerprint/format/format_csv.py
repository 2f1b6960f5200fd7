#!/usr/bin/python3

# SPDX-FileCopyrightText: 2024 noise-fingerprint developers
#
# SPDX-License-Identifier: GPL-3.0-or-later

from noise_fingerprint.format.format_interface import FormatInterface


def _cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.12g" % value
    return str(value)


class CsvFormatter(FormatInterface):
    """Histogram block, QQ block and a key-value summary footer."""

    def __init__(self):
        pass

    def format_report(self, report):
        lines = [ "# modality=" + report.modality, "# histogram", "bin_left,bin_right,count" ]
        edges = report.histogram.bin_edges
        for i, count in enumerate(report.histogram.counts):
            lines.append(_cell(edges[i]) + "," + _cell(edges[i + 1]) + "," + str(count))

        lines += [ "# qq", "theoretical_quantile,ordered_value" ]
        for theoretical, ordered in report.qq.points:
            lines.append(_cell(theoretical) + "," + _cell(ordered))

        lines += [ "# summary", "key,value" ]
        for key, value in report.summary().items():
            lines.append(key + "," + _cell(value))
        return "\n".join(lines) + "\n"
