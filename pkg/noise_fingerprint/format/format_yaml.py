#!/usr/bin/python3

# SPDX-FileCopyrightText: 2024 noise-fingerprint developers
#
# SPDX-License-Identifier: GPL-3.0-or-later

import yaml

from noise_fingerprint.format.format_interface import FormatInterface

class YamlFormatter(FormatInterface):

    def __init__(self):
        pass

    def format_report(self, report):
        return yaml.safe_dump(report.as_dict(), sort_keys=False)
