#!/usr/bin/env python3

# SPDX-FileCopyrightText: 2024 noise-fingerprint developers
#
# SPDX-License-Identifier: GPL-3.0-or-later

import hashlib

from noise_fingerprint.exception import IntegrityError

HASH_SHA1 = "SHA1"
HASH_SHA224 = "SHA224"
HASH_SHA256 = "SHA256"
HASH_SHA384 = "SHA384"
HASH_SHA512 = "SHA512"
HASH_MD5 = "MD5"
HASHES = {
    HASH_SHA1: hashlib.sha1,
    HASH_SHA224: hashlib.sha224,
    HASH_SHA256: hashlib.sha256,
    HASH_SHA384: hashlib.sha384,
    HASH_SHA512: hashlib.sha512,
    HASH_MD5: hashlib.md5,
}


def _hash_fun(hash_name):
    hash_fun = HASHES.get(str(hash_name).upper())
    if hash_fun is None:
        raise IntegrityError("Unsupported checksum algorithm (" + str(hash_name) + ")")
    return hash_fun


def hash_from_bytes(data, hash_name=HASH_SHA256):
    return _hash_fun(hash_name)(data).hexdigest()


def hash_from_file(file_name, hash_name=HASH_SHA256):
    hash_fun = _hash_fun(hash_name)
    with open(file_name, 'rb') as f:
        return hash_fun(f.read()).hexdigest()


def verify_checksum(data, checksum):
    """Check `data` against a checksum written as `<algorithm>:<hexdigest>`."""
    algorithm, _, expected = checksum.partition(":")
    if not expected:
        raise IntegrityError("Malformed checksum \"" + str(checksum) + "\"")
    actual = hash_from_bytes(data, algorithm)
    if actual != expected.lower():
        raise IntegrityError("Checksum mismatch: expected " + expected + ", computed " + actual)
    return True
