#!/usr/bin/python3

# SPDX-FileCopyrightText: 2024 noise-fingerprint developers
#
# SPDX-License-Identifier: GPL-3.0-or-later


from noise_fingerprint.exception import DomainError
from noise_fingerprint.format.format_csv import CsvFormatter
from noise_fingerprint.format.format_json import JsonFormatter
from noise_fingerprint.format.format_yaml import YamlFormatter

FORMAT_CSV = "csv"
FORMAT_JSON = "json"
FORMAT_YAML = "yaml"
FORMATS = [ FORMAT_CSV, FORMAT_JSON, FORMAT_YAML ]


class FormatFactory:

    @staticmethod
    def formatter(format):
        if format.lower() == FORMAT_CSV:
            return CsvFormatter()
        elif format.lower() == FORMAT_JSON:
            return JsonFormatter()
        elif format.lower() == FORMAT_YAML or format.lower() == "yml":
            return YamlFormatter()
        raise DomainError("Unsupported format \"" + str(format) + "\". Supported formats: " + str(FORMATS))

def supported_formats():
    return FORMATS
