#!/usr/bin/env python3

# SPDX-FileCopyrightText: 2024 noise-fingerprint developers
#
# SPDX-License-Identifier: GPL-3.0-or-later

"""Template persistence as UTF-8 key-value text, one file per user and modality."""

from contextlib import contextmanager
import fcntl
import logging
import os
import tempfile
from urllib.parse import quote

from noise_fingerprint.checksum import HASH_SHA256
from noise_fingerprint.checksum import hash_from_bytes
from noise_fingerprint.checksum import verify_checksum
from noise_fingerprint.config import DEFAULT_STORE_DIR
from noise_fingerprint.config import STORE_ENV_VAR
from noise_fingerprint.config import TEMPLATE_DIGITS
from noise_fingerprint.config import TEMPLATE_VERSION
from noise_fingerprint.exception import NoiseFingerprintException
from noise_fingerprint.exception import StoreError
from noise_fingerprint.matching import FingerprintTemplate
from noise_fingerprint.stats import MomentSummary
from noise_fingerprint.stats import TailReport

TEMPLATE_SUFFIX = ".tpl"
LOCK_SUFFIX = ".lock"
MOMENT_FIELDS = [ "n", "mean", "sd", "skewness", "excess_kurtosis" ]
TAIL_FIELDS = [ "tail_fraction", "lower_dev", "upper_dev", "combined_dev", "normality_stat", "normality_pass" ]


def default_store_dir():
    return os.environ.get(STORE_ENV_VAR, DEFAULT_STORE_DIR)


def _num(value):
    return "%.*g" % (TEMPLATE_DIGITS, value)


def dumps_template(template):
    if "\n" in template.user_id or "\r" in template.user_id:
        raise StoreError("user_id must be a single line")
    lines = [
        "version: " + str(template.version),
        "user_id: " + template.user_id,
        "modality: " + template.modality,
        "enroll_count: " + str(template.enroll_count),
        "moments.n: " + str(template.moments.n),
    ]
    for name in MOMENT_FIELDS[1:]:
        lines.append("moments." + name + ": " + _num(getattr(template.moments, name)))
    for name in TAIL_FIELDS[:-1]:
        lines.append("tail." + name + ": " + _num(getattr(template.tail, name)))
    lines.append("tail.normality_pass: " + ("true" if template.tail.normality_pass else "false"))
    lines.append("quantiles: " + ",".join(_num(q) for q in template.quantiles))
    body = "\n".join(lines) + "\n"
    checksum = HASH_SHA256.lower() + ":" + hash_from_bytes(body.encode("utf-8"), HASH_SHA256)
    return body + "checksum: " + checksum + "\n"


def _split(line):
    key, sep, value = line.partition(":")
    if not sep:
        raise StoreError("Malformed template line: " + repr(line))
    if value.startswith(" "):
        value = value[1:]
    return key.strip(), value


def loads_template(text):
    fields = {}
    body = []
    checksum = None
    for line in text.splitlines():
        if not line.strip():
            continue
        key, value = _split(line)
        if key == "checksum":
            checksum = value.strip()
            break
        fields[key] = value
        body.append(line)

    if fields.get("version") != str(TEMPLATE_VERSION):
        raise StoreError("Unknown template version " + repr(fields.get("version"))
                         + " (supported: " + str(TEMPLATE_VERSION) + ")")
    if checksum is not None:
        verify_checksum(("\n".join(body) + "\n").encode("utf-8"), checksum)
    else:
        logging.debug("Template for " + str(fields.get("user_id")) + " carries no checksum")

    try:
        moments = MomentSummary(int(fields["moments.n"]),
                                *(float(fields["moments." + name]) for name in MOMENT_FIELDS[1:]))
        if fields["tail.normality_pass"] not in ("true", "false"):
            raise ValueError("tail.normality_pass must be true or false")
        tail = TailReport(*(float(fields["tail." + name]) for name in TAIL_FIELDS[:-1]),
                          fields["tail.normality_pass"] == "true")
        quantiles = [float(q) for q in fields["quantiles"].split(",")]
        return FingerprintTemplate(fields["user_id"], fields["modality"], quantiles, moments, tail,
                                   int(fields["enroll_count"]), int(fields["version"]))
    except KeyError as e:
        raise StoreError("Template lacks field " + str(e))
    except ValueError as e:
        raise StoreError("Malformed template value: " + str(e))
    except NoiseFingerprintException as e:
        raise StoreError("Invalid template: " + str(e))


@contextmanager
def _write_locked(path):
    with open(path + LOCK_SUFFIX, "a") as lock:
        fcntl.flock(lock.fileno(), fcntl.LOCK_EX)
        try:
            yield
        finally:
            fcntl.flock(lock.fileno(), fcntl.LOCK_UN)


class TemplateStore:
    """Directory of templates.

    Writers hold an exclusive lock on `<template>.lock` and publish by atomic
    rename. Readers open the template directly and take no lock.
    """

    def __init__(self, root=None):
        self.root = root if root is not None else default_store_dir()

    def path(self, user_id, modality):
        return os.path.join(self.root, quote(user_id, safe="") + "." + modality + TEMPLATE_SUFFIX)

    def exists(self, user_id, modality):
        return os.path.isfile(self.path(user_id, modality))

    def save(self, template):
        text = dumps_template(template)
        os.makedirs(self.root, exist_ok=True)
        path = self.path(template.user_id, template.modality)
        with _write_locked(path):
            fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".tpl-")
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as f:
                    f.write(text)
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise
        logging.debug("Saved template " + path)
        return path

    def load(self, user_id, modality):
        path = self.path(user_id, modality)
        if not os.path.isfile(path):
            raise StoreError("No " + modality + " template for user \"" + user_id + "\" in " + self.root)
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
        logging.debug("Loaded template " + path)
        return loads_template(text)
