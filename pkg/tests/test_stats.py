#!/bin/python3

# SPDX-FileCopyrightText: 2024 noise-fingerprint developers
#
# SPDX-License-Identifier: GPL-3.0-or-later

import math
import unittest

import numpy as np

from noise_fingerprint.exception import DegenerateError
from noise_fingerprint.exception import DomainError
from noise_fingerprint.exception import EmptySeriesError
from noise_fingerprint.exception import TooShortError
from noise_fingerprint.extraction import MODALITY_FACE
from noise_fingerprint.extraction import NoiseSeries
from noise_fingerprint.stats import analyze
from noise_fingerprint.stats import histogram
from noise_fingerprint.stats import inv_norm_cdf
from noise_fingerprint.stats import ks_two_sample
from noise_fingerprint.stats import moments
from noise_fingerprint.stats import qq_normal
from noise_fingerprint.stats import tail_deviation


def normal_cdf(z):
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


class TestMoments(unittest.TestCase):

    def test_small_series(self):
        summary = moments([1.0, 2.0, 3.0, 4.0])
        self.assertEqual(summary.n, 4)
        self.assertAlmostEqual(summary.mean, 2.5)
        self.assertAlmostEqual(summary.sd, math.sqrt(5.0 / 3.0))
        self.assertAlmostEqual(summary.skewness, 0.0)

    def test_degenerate(self):
        with self.assertRaises(DegenerateError):
            moments([3.0] * 10)
        with self.assertRaises(TooShortError):
            moments([1.0])

    def test_gaussian_shape(self):
        values = np.random.default_rng(1).normal(5.0, 2.0, 200000)
        summary = moments(values)
        self.assertAlmostEqual(summary.mean, 5.0, delta=0.02)
        self.assertAlmostEqual(summary.sd, 2.0, delta=0.02)
        self.assertAlmostEqual(summary.skewness, 0.0, delta=0.03)
        self.assertAlmostEqual(summary.excess_kurtosis, 0.0, delta=0.05)


class TestHistogram(unittest.TestCase):

    def test_counts(self):
        hist = histogram([0.0, 1.0, 2.0, 3.0, 4.0], 4)
        self.assertEqual(hist.bin_edges, (0.0, 1.0, 2.0, 3.0, 4.0))
        # the last bin is closed on the right
        self.assertEqual(hist.counts, (1, 1, 1, 2))

    def test_constant_series(self):
        hist = histogram([2.0, 2.0, 2.0])
        self.assertEqual(hist.bin_edges, (1.5, 2.5))
        self.assertEqual(hist.counts, (3,))

    def test_errors(self):
        with self.assertRaises(EmptySeriesError):
            histogram([])
        with self.assertRaises(DomainError):
            histogram([1.0, 2.0], 0)

    def test_total(self):
        rng = np.random.default_rng(2)
        for k in (1, 7, 30, 64):
            values = rng.normal(size=1001)
            hist = histogram(values, k)
            self.assertEqual(len(hist.counts), k)
            self.assertEqual(len(hist.bin_edges), k + 1)
            self.assertEqual(sum(hist.counts), 1001)
            self.assertEqual(hist.bin_edges[0], values.min())
            self.assertEqual(hist.bin_edges[-1], values.max())


class TestInverseNormal(unittest.TestCase):

    def test_known_values(self):
        self.assertAlmostEqual(inv_norm_cdf(0.5), 0.0, places=12)
        self.assertAlmostEqual(inv_norm_cdf(0.975), 1.959963984540054, places=9)
        self.assertAlmostEqual(inv_norm_cdf(0.025), -1.959963984540054, places=9)
        self.assertAlmostEqual(inv_norm_cdf(0.001), -3.090232306167813, places=9)

    def test_domain(self):
        for p in (0.0, 1.0, -0.1, 1.5):
            with self.assertRaises(DomainError):
                inv_norm_cdf(p)

    def test_symmetry(self):
        p = np.linspace(1e-6, 0.5, 1000)
        np.testing.assert_allclose(inv_norm_cdf(p), -inv_norm_cdf(1.0 - p), atol=1e-9)

    def test_round_trip_grid(self):
        p = np.linspace(1e-6, 1.0 - 1e-6, 100000)
        z = inv_norm_cdf(p)
        self.assertTrue(np.all(np.diff(z) > 0))
        worst = max(abs(normal_cdf(float(zi)) - float(pi)) for zi, pi in zip(z, p))
        self.assertLess(worst, 1e-8)


class TestQQ(unittest.TestCase):

    def test_points(self):
        qq = qq_normal([3.0, 1.0, 2.0])
        self.assertEqual(qq.ordered.tolist(), [1.0, 2.0, 3.0])
        self.assertAlmostEqual(qq.fit_mean, 2.0)
        self.assertAlmostEqual(qq.fit_sd, 1.0)
        self.assertAlmostEqual(qq.theoretical[1], 2.0)
        self.assertAlmostEqual(qq.theoretical[0], 2.0 + inv_norm_cdf(0.5 / 3.0))

    def test_too_short(self):
        with self.assertRaises(TooShortError):
            qq_normal([1.0, 2.0])

    def test_fitted_quantiles_are_linear(self):
        values = inv_norm_cdf((np.arange(1, 201) - 0.5) / 200) * 4.0 + 10.0
        qq = qq_normal(values)
        slope, intercept = np.polyfit(qq.theoretical, qq.ordered, 1)
        residual = qq.ordered - (slope * qq.theoretical + intercept)
        self.assertLess(np.max(np.abs(residual)), 1e-9)


class TestTailDeviation(unittest.TestCase):

    def test_errors(self):
        with self.assertRaises(TooShortError):
            tail_deviation(np.arange(39.0))
        with self.assertRaises(DomainError):
            tail_deviation(np.arange(100.0), 0.5)
        with self.assertRaises(DomainError):
            tail_deviation(np.arange(100.0), 0.0)

    def test_ideal_normal(self):
        values = inv_norm_cdf((np.arange(1, 1001) - 0.5) / 1000)
        report = tail_deviation(values)
        self.assertLess(report.combined_dev, 0.05)
        self.assertTrue(report.normality_pass)

    def test_affine_invariance(self):
        values = np.random.default_rng(4).standard_t(3, 500)
        base = tail_deviation(values)
        moved = tail_deviation(values * 7.5 - 300.0)
        self.assertAlmostEqual(base.combined_dev, moved.combined_dev, places=9)
        self.assertAlmostEqual(base.normality_stat, moved.normality_stat, places=6)

    def test_gaussian_against_heavy_tails(self):
        gaussian_passes = 0
        gaussian_dev = []
        heavy = []
        for seed in range(100):
            gaussian = tail_deviation(np.random.default_rng(seed).normal(size=10000))
            gaussian_passes += gaussian.normality_pass
            gaussian_dev.append(gaussian.combined_dev)
            heavy.append(tail_deviation(np.random.default_rng(1000 + seed).standard_t(3, 10000)))
        self.assertGreaterEqual(gaussian_passes, 99)
        self.assertGreaterEqual(sum(not report.normality_pass for report in heavy), 95)
        median = np.median(gaussian_dev)
        self.assertGreaterEqual(sum(report.combined_dev > median for report in heavy), 95)


class TestKolmogorovSmirnov(unittest.TestCase):

    def brute_force(self, a, b):
        worst = 0.0
        for x in np.concatenate([a, b]):
            worst = max(worst, abs(np.mean(a <= x) - np.mean(b <= x)))
        return worst

    def test_simple(self):
        self.assertEqual(ks_two_sample([1.0, 2.0], [1.0, 2.0]), 0.0)
        self.assertEqual(ks_two_sample([1.0, 2.0], [3.0, 4.0]), 1.0)
        self.assertAlmostEqual(ks_two_sample([1.0, 2.0, 3.0, 4.0], [3.0, 4.0]), 0.5)

    def test_empty(self):
        with self.assertRaises(EmptySeriesError):
            ks_two_sample([], [1.0])

    def test_random_instances(self):
        rng = np.random.default_rng(9)
        for _ in range(1000):
            a = rng.integers(0, 10, size=int(rng.integers(1, 51))).astype(float)
            b = rng.integers(0, 10, size=int(rng.integers(1, 51))).astype(float)
            d = ks_two_sample(a, b)
            self.assertAlmostEqual(d, self.brute_force(a, b), places=12)
            self.assertEqual(d, ks_two_sample(b, a))
            self.assertTrue(0.0 <= d <= 1.0)


class TestAnalyze(unittest.TestCase):

    def test_report(self):
        series = NoiseSeries.from_values(MODALITY_FACE, np.random.default_rng(6).normal(100.0, 5.0, 400))
        report = analyze(series, bins=12, extra={"note": 1})
        summary = report.summary()
        self.assertEqual(summary["n"], 400)
        self.assertEqual(summary["note"], 1)
        self.assertIn("A2", summary)
        self.assertEqual(len(report.histogram.counts), 12)
        data = report.as_dict()
        self.assertEqual(data["modality"], MODALITY_FACE)
        self.assertEqual(len(data["qq"]["points"]), 400)

    def test_constant_series(self):
        series = NoiseSeries.from_values(MODALITY_FACE, [5.0] * 100)
        with self.assertRaises(DegenerateError):
            analyze(series)


class TestPerformance(unittest.TestCase):

    def megapixel_image(self, skin_fraction):
        from noise_fingerprint.imaging import RawImage

        rng = np.random.default_rng(0)
        pixels = np.empty((1000, 1000, 3), dtype=np.uint8)
        pixels[..., 0] = rng.integers(180, 220, size=(1000, 1000))
        pixels[..., 1] = rng.integers(110, 130, size=(1000, 1000))
        pixels[..., 2] = rng.integers(90, 110, size=(1000, 1000))
        pixels[rng.random((1000, 1000)) >= skin_fraction] = (255, 255, 255)
        return RawImage(1000, 1000, pixels)

    def test_megapixel_fingerprint(self):
        import time
        from noise_fingerprint.extraction import frame_rgb_sums
        from noise_fingerprint.imaging import skin_mask

        image = self.megapixel_image(1.0)
        start = time.perf_counter()
        series = frame_rgb_sums(image, skin_mask(image))
        analyze(series)
        self.assertLess(time.perf_counter() - start, 2.0)

    def test_megapixel_face(self):
        import time
        from noise_fingerprint.imaging import encode_image
        from noise_fingerprint.pipeline import image_series

        # speckled skin breaks the mask into many runs for the region labelling
        data = encode_image(self.megapixel_image(0.8))
        start = time.perf_counter()
        series = image_series(data, MODALITY_FACE)
        analyze(series)
        self.assertLess(time.perf_counter() - start, 2.0)
        self.assertGreater(len(series), 500000)


if __name__ == '__main__':
    unittest.main()
