import numpy as np
import pytest
from PIL import Image

from btof import cli, metrics
from btof.background import Stage
from btof.config import RunConfig, load_config, save_config
from btof.errors import EmptyDataset, EmptyValidationSet
from btof.harness import calibrate, discover, evaluate_dirs, load_mask, run_dataset, run_image, run_pipeline
from btof.pixelgrid import RasterImage
from btof.synth import KINDS, DatasetEntry, generate, synth

FAST = dict(superpixels=100, max_iters=1)


class TestSynth:
    def test_writes_pairs(self, tmp_path):
        entries = synth("center-object", 7, tmp_path)
        (e,) = entries
        img = np.asarray(Image.open(e.image))
        mask = np.asarray(Image.open(e.mask))
        assert img.shape == (256, 256, 3)
        assert set(np.unique(mask)) == {0, 255}

    def test_same_seed_same_bytes(self, tmp_path):
        a = synth("two-objects", 3, tmp_path / "a")[0]
        b = synth("two-objects", 3, tmp_path / "b")[0]
        assert a.image.read_bytes() == b.image.read_bytes()
        assert a.mask.read_bytes() == b.mask.read_bytes()

    @pytest.mark.parametrize("seed", range(12))
    def test_boundary_object_touches_one_border(self, seed):
        _, mask = generate("boundary-object", seed)
        borders = [mask[0].any(), mask[-1].any(), mask[:, 0].any(), mask[:, -1].any()]
        assert sum(borders) == 1

    @pytest.mark.parametrize("kind", ["center-object", "two-objects"])
    def test_interior_objects_stay_off_borders(self, kind):
        for seed in range(5):
            _, mask = generate(kind, seed)
            assert mask.any()
            assert not (mask[0].any() or mask[-1].any() or mask[:, 0].any() or mask[:, -1].any())

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            generate("three-objects", 0)
        assert len(KINDS) == 3


class TestPipeline:
    def test_center_object_scores_well(self):
        img, mask = generate("center-object", 0)
        res = run_pipeline(RasterImage(img.astype(float)), RunConfig())
        rep = metrics.evaluate(res.final.render(), mask)
        assert rep.f_measure >= 0.8
        assert set(res.stages) == set(Stage)
        for m in res.stages.values():
            px = m.render()
            assert px.shape == mask.shape
            assert px.min() >= 0 and px.max() <= 1

    def test_cluster_count_clamped(self, caplog):
        img, _ = generate("center-object", 1)
        small = img[:64, :64].astype(float)
        res = run_pipeline(RasterImage(small), RunConfig(superpixels=4, k_clusters=50))
        assert res.final.region_scores.size >= 1
        assert "clamping" in caplog.text

    def test_run_image_without_mask(self, tmp_path):
        (e,) = synth("center-object", 0, tmp_path / "data")
        res = run_image(RunConfig(**FAST), DatasetEntry(e.image), tmp_path / "out")
        assert res.report is None
        assert [p.name for p in res.written] == ["center-object_0000_S_final.png"]

    def test_export_stages(self, tmp_path):
        (e,) = synth("center-object", 0, tmp_path / "data")
        res = run_image(RunConfig(**FAST), e, tmp_path / "out", export_stages=True)
        names = {p.name for p in res.written}
        assert names == {f"center-object_0000_{s.value}.png" for s in Stage}
        assert res.report is not None


class TestDataset:
    def test_two_images_three_rows(self, tmp_path):
        synth("center-object", 0, tmp_path / "d", count=2)
        result = run_dataset(RunConfig(**FAST), tmp_path / "d", out_dir=tmp_path / "out")
        rows = metrics.read_metrics_csv(result.metrics_csv)
        assert [r["image"] for r in rows] == ["center-object_0000", "center-object_0001", "mean"]
        for key, attr in zip(metrics.CSV_HEADER[1:], ("precision", "recall", "f_measure", "auc", "mae", "or_score")):
            values = [getattr(r, attr) for _, r in result.reports]
            assert float(rows[2][key]) == pytest.approx(np.mean(values), abs=1e-9)
        assert len(result.curves_csv.read_text().splitlines()) == 257

    def test_corrupt_image_skipped(self, tmp_path):
        synth("center-object", 0, tmp_path / "d", count=10)
        victim = tmp_path / "d" / "images" / "center-object_0004.png"
        victim.write_bytes(victim.read_bytes()[:200])
        result = run_dataset(RunConfig(**FAST), tmp_path / "d", out_dir=tmp_path / "out")
        assert len(result.reports) == 9
        assert [name for name, _ in result.skipped] == ["center-object_0004.png"]

    def test_mismatched_mask_skipped(self, tmp_path):
        synth("center-object", 0, tmp_path / "d", count=2)
        bad = tmp_path / "d" / "masks" / "center-object_0001.png"
        Image.fromarray(np.zeros((100, 100), dtype=np.uint8)).save(bad)
        result = run_dataset(RunConfig(**FAST), tmp_path / "d", out_dir=tmp_path / "out")
        assert [n for n, _ in result.reports] == ["center-object_0000"]
        assert len(result.skipped) == 1

    def test_empty(self, tmp_path):
        with pytest.raises(EmptyDataset):
            run_dataset(RunConfig(), tmp_path)

    def test_discover_flat_layout(self, tmp_path):
        synth("center-object", 0, tmp_path / "d", count=2)
        entries = discover(tmp_path / "d" / "images", tmp_path / "d" / "masks")
        assert [e.stem for e in entries] == ["center-object_0000", "center-object_0001"]
        assert all(e.mask is not None for e in entries)

    def test_load_mask_threshold(self, tmp_path):
        path = tmp_path / "m.png"
        Image.fromarray(np.array([[0, 127], [128, 255]], dtype=np.uint8)).save(path)
        assert load_mask(path).tolist() == [[False, False], [True, True]]


class TestCalibrateAndEval:
    def test_calibrate_writes_weights(self, tmp_path):
        synth("boundary-object", 0, tmp_path / "v", count=2)
        cfg_path = tmp_path / "run.cfg"
        save_config(RunConfig(**FAST), cfg_path)
        cfg = calibrate(load_config(cfg_path), tmp_path / "v", cfg_path)
        stored = load_config(cfg_path).lambdas
        assert stored == cfg.lambdas
        assert sum(stored) == pytest.approx(1.0)
        assert min(stored) >= 0

    def test_calibrate_without_masks(self, tmp_path):
        synth("center-object", 0, tmp_path / "v")
        for p in (tmp_path / "v" / "masks").iterdir():
            p.unlink()
        with pytest.raises(EmptyValidationSet):
            calibrate(RunConfig(), tmp_path / "v")

    def test_eval_matches_run(self, tmp_path):
        synth("center-object", 0, tmp_path / "d", count=2)
        ran = run_dataset(RunConfig(**FAST), tmp_path / "d", out_dir=tmp_path / "out", export_stages=True)
        scored = evaluate_dirs(tmp_path / "out", tmp_path / "d" / "masks", tmp_path / "eval.csv")
        assert [n for n, _ in scored.reports] == [n for n, _ in ran.reports]
        for (_, a), (_, b) in zip(ran.reports, scored.reports):
            # Run scores the float map, eval the 8-bit PNG; the MAE gap is bounded by quantisation.
            assert abs(a.mae - b.mae) <= 0.5 / 255 + 1e-12
            assert a.auc == pytest.approx(b.auc, abs=1e-12)


class TestCli:
    def test_synth_run_eval(self, tmp_path, capsys):
        data = tmp_path / "d"
        assert cli.main(["synth", "center-object", "--seed", "2", "--count", "2", "--out", str(data)]) == 0
        cfg = tmp_path / "run.cfg"
        save_config(RunConfig(**FAST), cfg)
        out = tmp_path / "out"
        assert cli.main(["run", str(data), "--config", str(cfg), "--out", str(out)]) == 0
        assert (out / "metrics.csv").is_file()
        assert "fmeasure=" in capsys.readouterr().out
        assert cli.main(["eval", str(out), str(data / "masks"), "--csv", str(tmp_path / "e.csv")]) == 0
        assert len((tmp_path / "e.csv").read_text().splitlines()) == 4

    def test_single_image(self, tmp_path, capsys):
        (e,) = synth("center-object", 0, tmp_path / "d")
        cfg = tmp_path / "run.cfg"
        save_config(RunConfig(**FAST), cfg)
        rc = cli.main(["run", str(e.image), "--config", str(cfg), "--out", str(tmp_path / "o"),
                       "--gt", str(tmp_path / "d" / "masks")])
        assert rc == 0
        assert "mae=" in capsys.readouterr().out

    def test_calibrate_command(self, tmp_path):
        synth("center-object", 0, tmp_path / "v")
        cfg = tmp_path / "run.cfg"
        save_config(RunConfig(**FAST), cfg)
        assert cli.main(["calibrate", str(tmp_path / "v"), "--config", str(cfg)]) == 0

    def test_errors_return_one(self, tmp_path):
        assert cli.main(["run", str(tmp_path)]) == 1
        bad = tmp_path / "bad.cfg"
        bad.write_text("nonsense = 1\n")
        assert cli.main(["run", str(tmp_path), "--config", str(bad)]) == 1
