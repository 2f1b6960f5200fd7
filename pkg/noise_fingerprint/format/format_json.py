#!/usr/bin/python3

# SPDX-FileCopyrightText: 2024 noise-fingerprint developers
#
# SPDX-License-Identifier: GPL-3.0-or-later

import json

from noise_fingerprint.format.format_interface import FormatInterface

class JsonFormatter(FormatInterface):

    def __init__(self):
        pass

    def format_report(self, report):
        return json.dumps(report.as_dict(), indent=4)
