#!/bin/python3

# SPDX-FileCopyrightText: 2024 noise-fingerprint developers
#
# SPDX-License-Identifier: GPL-3.0-or-later

import os
import shutil
import tempfile
import unittest

import numpy as np

from noise_fingerprint.exception import IntegrityError
from noise_fingerprint.exception import StoreError
from noise_fingerprint.extraction import MODALITY_EYE_Y
from noise_fingerprint.extraction import MODALITY_FACE
from noise_fingerprint.extraction import NoiseSeries
from noise_fingerprint.matching import build_template
from noise_fingerprint.store import TemplateStore
from noise_fingerprint.store import dumps_template
from noise_fingerprint.store import loads_template


def template(user_id="alice", modality=MODALITY_FACE, seed=0):
    values = np.random.default_rng(seed).normal(1.0 / 3.0, 2.0 / 7.0, 800)
    return build_template(user_id, modality, NoiseSeries.from_values(modality, values))


class TestTemplateText(unittest.TestCase):

    def test_round_trip(self):
        original = template()
        text = dumps_template(original)
        loaded = loads_template(text)
        self.assertEqual(loaded.user_id, original.user_id)
        self.assertEqual(loaded.modality, original.modality)
        self.assertEqual(loaded.enroll_count, original.enroll_count)
        self.assertEqual(loaded.moments.n, original.moments.n)
        self.assertEqual(loaded.tail.normality_pass, original.tail.normality_pass)
        np.testing.assert_allclose(loaded.quantiles, original.quantiles, rtol=1e-11)
        self.assertAlmostEqual(loaded.moments.sd, original.moments.sd, places=11)
        self.assertAlmostEqual(loaded.tail.combined_dev, original.tail.combined_dev, places=11)
        self.assertEqual(dumps_template(loaded), text)

    def test_unknown_version(self):
        text = dumps_template(template()).replace("version: 1\n", "version: 2\n")
        with self.assertRaises(StoreError):
            loads_template(text)

    def test_tampered(self):
        text = dumps_template(template())
        tampered = text.replace("user_id: alice", "user_id: mallory")
        with self.assertRaises(IntegrityError):
            loads_template(tampered)

    def test_without_checksum(self):
        text = dumps_template(template())
        body = text[:text.index("checksum:")]
        self.assertEqual(loads_template(body).user_id, "alice")

    def test_missing_field(self):
        text = dumps_template(template())
        body = "\n".join(line for line in text.splitlines()
                         if not line.startswith("moments.sd") and not line.startswith("checksum")) + "\n"
        with self.assertRaises(StoreError):
            loads_template(body)

    def test_multiline_user(self):
        with self.assertRaises(StoreError):
            dumps_template(template("a\nb"))


class TestTemplateStore(unittest.TestCase):

    def setUp(self):
        self.root = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.root)

    def test_save_load(self):
        store = TemplateStore(self.root)
        saved = template("bob/../x", MODALITY_EYE_Y)
        path = store.save(saved)
        self.assertEqual(os.path.dirname(path), self.root)
        self.assertTrue(store.exists("bob/../x", MODALITY_EYE_Y))
        self.assertFalse(store.exists("bob/../x", MODALITY_FACE))
        loaded = store.load("bob/../x", MODALITY_EYE_Y)
        np.testing.assert_allclose(loaded.quantiles, saved.quantiles, rtol=1e-11)

    def test_overwrite(self):
        store = TemplateStore(self.root)
        store.save(template(seed=1))
        second = template(seed=2)
        store.save(second)
        np.testing.assert_allclose(store.load("alice", MODALITY_FACE).quantiles, second.quantiles, rtol=1e-11)
        leftovers = [name for name in os.listdir(self.root) if name.startswith(".tpl-")]
        self.assertEqual(leftovers, [])

    def test_load_from_read_only_store(self):
        store = TemplateStore(self.root)
        path = store.save(template())
        os.remove(path + ".lock")
        os.chmod(path, 0o444)
        os.chmod(self.root, 0o555)
        try:
            self.assertEqual(store.load("alice", MODALITY_FACE).user_id, "alice")
            self.assertEqual(sorted(os.listdir(self.root)), [os.path.basename(path)])
        finally:
            os.chmod(self.root, 0o755)

    def test_missing(self):
        with self.assertRaises(StoreError):
            TemplateStore(self.root).load("nobody", MODALITY_FACE)


if __name__ == '__main__':
    unittest.main()
