import numpy as np
import pytest

from btof import metrics
from btof.errors import DimensionMismatch


def half_mask(h=10, w=10):
    g = np.zeros((h, w), dtype=bool)
    g[: h // 2] = True
    return g


class TestBinarize:
    def test_twice_mean(self):
        s = np.array([0.0, 0.0, 0.3, 0.5, 0.2])  # mean 0.2
        assert metrics.binarize_adaptive(s).tolist() == [False, False, False, True, False]
        assert metrics.binarize_adaptive(np.array([0.39, 0.4, 0.0, 0.0, 0.21])).tolist() == [
            False, True, False, False, False,
        ]

    def test_constant_map(self):
        assert metrics.binarize_adaptive(np.full((3, 3), 0.5)).all()

    def test_zero_map(self):
        assert not metrics.binarize_adaptive(np.zeros((3, 3))).any()


class TestPrecisionRecall:
    def test_equal(self):
        g = half_mask()
        assert metrics.precision_recall(g, g) == (1.0, 1.0)

    def test_disjoint(self):
        g = half_mask()
        assert metrics.precision_recall(~g, g) == (0.0, 0.0)

    def test_equal_area_false_region(self):
        g = np.zeros((4, 4), dtype=bool)
        g[:1] = True
        s = g.copy()
        s[1] = True
        assert metrics.precision_recall(s, g) == (0.5, 1.0)

    def test_vacuous(self):
        g = half_mask()
        assert metrics.precision_recall(np.zeros_like(g), g) == (1.0, 0.0)
        assert metrics.precision_recall(g, np.zeros_like(g))[1] == 1.0

    def test_mismatch(self):
        with pytest.raises(DimensionMismatch):
            metrics.precision_recall(np.zeros((2, 2)), np.zeros((3, 2)))


class TestFMeasure:
    def test_values(self):
        assert metrics.f_measure(1, 1) == pytest.approx(1.0)
        assert metrics.f_measure(1, 0) == 0.0
        assert metrics.f_measure(0, 0) == 0.0
        assert metrics.f_measure(0.5, 1) == pytest.approx(0.5652, abs=1e-4)

    def test_between_p_and_r(self):
        rng = np.random.default_rng(0)
        for p, r in rng.uniform(0.01, 1, (100, 2)):
            f = metrics.f_measure(p, r)
            assert min(p, r) - 1e-12 <= f <= max(p, r) + 1e-12


class TestMaeAndOverlap:
    def test_mae(self):
        g = half_mask()
        assert metrics.mae(g.astype(float), g) == 0.0
        assert metrics.mae(1.0 - g, g) == 1.0
        assert metrics.mae(np.full(g.shape, 0.5), g) == 0.5

    def test_overlap(self):
        g = half_mask()
        assert metrics.overlap_ratio(g, g) == 1.0
        assert metrics.overlap_ratio(~g, g) == 0.0
        assert metrics.overlap_ratio(g, np.ones_like(g)) == 0.5
        empty = np.zeros_like(g)
        assert metrics.overlap_ratio(empty, empty) == 1.0
        assert metrics.overlap_ratio(empty, g) == 0.0


class TestCurves:
    def test_perfect_and_inverted(self):
        g = half_mask()
        assert metrics.curves_and_auc(g.astype(float), g)[2] == 1.0
        assert metrics.curves_and_auc(1.0 - g, g)[2] == 0.0

    def test_noise_near_half(self):
        rng = np.random.default_rng(0)
        g = rng.random((400, 400)) < 0.3
        auc = metrics.curves_and_auc(rng.random((400, 400)), g)[2]
        assert 0.45 <= auc <= 0.55

    def test_shapes_and_monotone(self):
        rng = np.random.default_rng(1)
        g = rng.random((50, 50)) < 0.4
        s = np.clip(g * 0.5 + rng.random((50, 50)) * 0.6, 0, 1)
        pr, roc, auc = metrics.curves_and_auc(s, g)
        assert pr.shape == (256, 2) and roc.shape == (256, 2)
        assert np.all(np.diff(roc[:, 0]) <= 0) and np.all(np.diff(roc[:, 1]) <= 0)
        assert 0.5 < auc <= 1.0

    def test_uint8_input(self):
        g = half_mask()
        assert metrics.curves_and_auc((g * 255).astype(np.uint8), g)[2] == 1.0


class TestReports:
    def test_evaluate_scalars_in_unit_interval(self):
        rng = np.random.default_rng(2)
        g = rng.random((30, 30)) < 0.3
        rep = metrics.evaluate(rng.random((30, 30)), g)
        for v in rep.row():
            assert 0.0 <= v <= 1.0

    def test_mean_report_and_csv(self, tmp_path):
        g = half_mask()
        r1 = metrics.evaluate(g.astype(float), g)
        r2 = metrics.evaluate(np.full(g.shape, 0.5), g)
        mean = metrics.mean_report([r1, r2])
        assert mean.mae == pytest.approx((r1.mae + r2.mae) / 2)
        path = tmp_path / "m.csv"
        metrics.write_metrics_csv(path, [("a", r1), ("b", r2)], mean)
        rows = metrics.read_metrics_csv(path)
        assert [r["image"] for r in rows] == ["a", "b", "mean"]
        assert path.read_text().splitlines()[0] == "image,precision,recall,fmeasure,auc,mae,or"
        curves = tmp_path / "c.csv"
        metrics.write_curves_csv(curves, mean)
        assert len(curves.read_text().splitlines()) == 257

    def test_mean_of_nothing(self):
        with pytest.raises(ValueError):
            metrics.mean_report([])
