#!/bin/python3

# SPDX-FileCopyrightText: 2024 noise-fingerprint developers
#
# SPDX-License-Identifier: GPL-3.0-or-later

import contextlib
import io
import json
import os
import shutil
import tempfile
import unittest

from noise_fingerprint.__main__ import main
from noise_fingerprint.extraction import MODALITY_EYE_Y
from noise_fingerprint.extraction import MODALITY_FACE
from noise_fingerprint.extraction import MODALITY_FINGERPRINT
from noise_fingerprint.extraction import NoiseSeries
from noise_fingerprint.extraction import write_series
from noise_fingerprint.simharness import ModalityParams
from noise_fingerprint.simharness import SyntheticUserSpec
from noise_fingerprint.simharness import generate_series

MODALITIES = [ MODALITY_FINGERPRINT, MODALITY_FACE, MODALITY_EYE_Y ]

SMALL_CONFIG = """users: 3
enroll_n: 200
probe_n: 100
probes_per_user: 2
thresholds:
  steps: 11
attack:
  kinds: [replay]
  observation_n: 100
  probe_n: 100
"""


def user(seed, offset):
    return SyntheticUserSpec(seed, {
        MODALITY_FINGERPRINT: ModalityParams(420.0 + offset * 25.0, 25.0),
        MODALITY_FACE: ModalityParams(380.0 + offset * 30.0, 30.0),
        MODALITY_EYE_Y: ModalityParams(offset * 0.02, 0.02),
    })


class TestCli(unittest.TestCase):

    def setUp(self):
        self.root = tempfile.mkdtemp()
        self.store = os.path.join(self.root, "templates")

    def tearDown(self):
        shutil.rmtree(self.root)

    def run_cli(self, *argv):
        out = io.StringIO()
        err = io.StringIO()
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            code = main(list(argv))
        return code, out.getvalue(), err.getvalue()

    def capture(self, spec, modality, n, draw_seed):
        path = os.path.join(self.root, modality + "-" + str(spec.seed) + "-" + str(draw_seed) + ".csv")
        with open(path, "w") as f:
            write_series(generate_series(spec, modality, n, draw_seed), f)
        return path

    def write_file(self, name, text):
        path = os.path.join(self.root, name)
        with open(path, "w") as f:
            f.write(text)
        return path

    def enroll(self, spec, user_id):
        for modality in MODALITIES:
            code, out, _ = self.run_cli("enroll", user_id, self.capture(spec, modality, 1000, 0),
                                        "--modality", modality, "--store", self.store)
            self.assertEqual(code, 0)
            self.assertIn("Enrolled " + user_id, out)

    def verify(self, spec, user_id, draw_seed):
        probes = [ self.capture(spec, modality, 500, draw_seed) for modality in MODALITIES ]
        return self.run_cli("verify", user_id, "--fingerprint", probes[0], "--face", probes[1],
                            "--eye", probes[2], "--store", self.store)

    def test_enroll_and_verify(self):
        alice = user(1, 0.0)
        self.enroll(alice, "alice")
        code, out, _ = self.verify(alice, "alice", 1)
        self.assertEqual(code, 0)
        self.assertIn("alice: authenticated", out)
        self.assertEqual(len([line for line in out.splitlines() if "score=" in line]), 3)

        code, out, _ = self.verify(user(2, 6.0), "alice", 1)
        self.assertEqual(code, 1)
        self.assertIn("alice: rejected", out)

    def test_verify_unknown_user(self):
        code, _, err = self.verify(user(1, 0.0), "nobody", 1)
        self.assertEqual(code, 2)
        self.assertIn("Failed verify: nobody", err)
        self.assertIn("StoreError", err)

    def test_verify_missing_eye_template(self):
        alice = user(1, 0.0)
        for modality in (MODALITY_FINGERPRINT, MODALITY_FACE):
            code, _, _ = self.run_cli("enroll", "alice", self.capture(alice, modality, 1000, 0),
                                      "--modality", modality, "--store", self.store)
            self.assertEqual(code, 0)
        code, out, err = self.verify(alice, "alice", 1)
        self.assertEqual(code, 2)
        self.assertIn("StoreError", err)
        self.assertIn(MODALITY_EYE_Y, err)
        self.assertNotIn("authenticated", out)

    def test_enroll_truncated_image(self):
        path = os.path.join(self.root, "short.ppm")
        with open(path, "wb") as f:
            f.write(b"P6 2 2 255 " + bytes([200, 120, 100]))
        code, _, err = self.run_cli("enroll", "alice", path, "--modality", MODALITY_FINGERPRINT,
                                    "--store", self.store)
        self.assertEqual(code, 2)
        self.assertIn("TruncationError", err)
        self.assertFalse(os.path.exists(self.store))

    def test_enroll_too_few_pooled_values(self):
        paths = []
        for part in range(2):
            path = os.path.join(self.root, "part" + str(part) + ".csv")
            with open(path, "w") as f:
                values = [float(part * 20 + v) for v in range(15)]
                write_series(NoiseSeries.from_values(MODALITY_FACE, values), f)
            paths.append(path)
        code, _, err = self.run_cli("enroll", "alice", *paths, "--modality", MODALITY_FACE, "--store", self.store)
        self.assertEqual(code, 2)
        self.assertIn("TooShortError", err)

    def test_enroll_needs_modality(self):
        path = self.capture(user(1, 0.0), MODALITY_FACE, 100, 0)
        code, _, err = self.run_cli("enroll", "alice", path, "--store", self.store)
        self.assertEqual(code, 2)
        self.assertIn("ModalityError", err)

    def test_enroll_image(self):
        code, out, _ = self.run_cli("enroll", "carol", "example-data/fingertip.ppm",
                                    "--modality", MODALITY_FINGERPRINT, "--store", self.store)
        self.assertEqual(code, 0)
        self.assertTrue(os.path.isfile(os.path.join(self.store, "carol.fingerprint.tpl")))

    def test_analyze_eye_trace(self):
        code, out, _ = self.run_cli("analyze", "example-data/eye-trace.csv", "--format", "json")
        self.assertEqual(code, 0)
        data = json.loads(out)
        self.assertEqual(data["modality"], MODALITY_EYE_Y)
        self.assertEqual(data["summary"]["displacements"], 250)
        self.assertIn("var_x", data["summary"])
        self.assertIn("var_y", data["summary"])

    def test_analyze_constant_series(self):
        lines = "# modality=face\nframe_index,value\n" + "".join(str(i) + ",5\n" for i in range(100))
        code, _, err = self.run_cli("analyze", self.write_file("flat.csv", lines))
        self.assertEqual(code, 2)
        self.assertIn("DegenerateError", err)

    def test_plot(self):
        output = os.path.join(self.root, "qq.svg")
        code, _, _ = self.run_cli("plot", "example-data/eye-trace.csv", "--kind", "qq", "--output", output)
        self.assertEqual(code, 0)
        with open(output) as f:
            self.assertIn("<svg", f.read())
        code, _, err = self.run_cli("plot", "example-data/eye-trace.csv")
        self.assertEqual(code, 2)
        self.assertIn("DomainError", err)

    def test_simulate_single_user(self):
        code, _, err = self.run_cli("simulate", self.write_file("one.yml", "users: 1\n"))
        self.assertEqual(code, 2)
        self.assertIn("PopulationError", err)

    def test_simulate_repeats(self):
        config = self.write_file("small.yml", SMALL_CONFIG)
        outputs = []
        for name in ("first.csv", "second.csv"):
            path = os.path.join(self.root, name)
            code, _, _ = self.run_cli("simulate", config, "--output", path, "--workers", "2")
            self.assertEqual(code, 0)
            with open(path, "rb") as f:
                outputs.append(f.read())
        self.assertEqual(outputs[0], outputs[1])
        self.assertTrue(outputs[0].startswith(b"threshold,far,frr\n"))
        self.assertIn(b"# config_sha256=", outputs[0])
        self.assertIn(b"# eer=", outputs[0])


if __name__ == '__main__':
    unittest.main()
