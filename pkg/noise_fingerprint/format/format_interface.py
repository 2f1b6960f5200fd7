#!/usr/bin/python3

# SPDX-FileCopyrightText: 2024 noise-fingerprint developers
#
# SPDX-License-Identifier: GPL-3.0-or-later

class FormatInterface:

    def format_report(self, report):
        return "default implementation format_report(report)"
