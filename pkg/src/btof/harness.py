"""End-to-end orchestration: per-image pipeline, batch evaluation, calibration."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from . import metrics
from .background import SaliencyMap, Stage, aggregate, all_template_maps, fit_weights
from .config import RunConfig, save_config
from .errors import BTOFError, DimensionMismatch, EmptyDataset, EmptyValidationSet, UnreadableFile
from .features import RegionDescriptor, extract_descriptors
from .foreground import foreground_map
from .graph import AffinityGraph, build_graph
from .pixelgrid import RasterImage, SuperpixelMap, load_image, slic, smooth, to_lab
from .refine import refine_stages
from .synth import DatasetEntry

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


@dataclass
class PipelineResult:
    superpixels: SuperpixelMap
    stages: dict[Stage, SaliencyMap] = field(default_factory=dict)

    @property
    def final(self) -> SaliencyMap:
        return self.stages[Stage.FINAL]


@dataclass
class ImageResult:
    stem: str
    final: SaliencyMap
    report: metrics.MetricReport | None
    written: list[Path] = field(default_factory=list)


def prepare(img: RasterImage, cfg: RunConfig) -> tuple[SuperpixelMap, list[RegionDescriptor], AffinityGraph]:
    """Smoothing, superpixels, descriptors and the affinity graph."""
    if cfg.smoother == "l0-approx":
        img = smooth(img, cfg.smooth_strength)
    lab = to_lab(img)
    sp = slic(lab, cfg.superpixels, cfg.compactness)
    descriptors = extract_descriptors(lab, img, sp)
    g = build_graph(sp, descriptors, cfg.sigma2, cfg.distance_params())
    return sp, descriptors, g


def run_pipeline(img: RasterImage, cfg: RunConfig) -> PipelineResult:
    """Compute every stage map for one decoded image."""
    sp, descriptors, g = prepare(img, cfg)
    dp = cfg.distance_params()
    rp = cfg.ranking_params()

    result = PipelineResult(sp)
    templates = all_template_maps(g, sp.labels, rp)
    for m in templates:
        result.stages[m.stage] = m
    bbm = aggregate(templates, cfg.template_weights())
    result.stages[Stage.BBM] = bbm
    fbm = foreground_map(g, bbm, cfg.threshold_params(), rp)
    result.stages[Stage.FBM] = fbm

    hp = cfg.highlight_params()
    if hp.k_clusters > sp.region_count:
        log.warning("k_clusters=%d exceeds %d regions; clamping", hp.k_clusters, sp.region_count)
        hp = type(hp)(hp.gamma1, hp.gamma2, sp.region_count, hp.kmeans_seed)
    final, dec, _ = refine_stages(
        fbm,
        sp,
        descriptors,
        highlight_params=hp,
        distance_params=dp,
        sigma2=cfg.sigma2,
        max_iters=cfg.max_iters,
    )
    if dec is not None:
        result.stages[Stage.DEC] = dec
    result.stages[Stage.FINAL] = final
    return result


def load_mask(path, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Decode a ground-truth image as a boolean mask (grey level > 127)."""
    try:
        with Image.open(path) as im:
            grey = np.asarray(im.convert("L"))
    except OSError as exc:
        raise UnreadableFile(f"{path}: {exc}") from exc
    if shape is not None and grey.shape != shape:
        raise DimensionMismatch(f"mask {path} is {grey.shape[::-1]}, image is {shape[::-1]}")
    return grey > 127


def save_map(pixels: np.ndarray, path) -> Path:
    path = Path(path)
    Image.fromarray(metrics.quantize(pixels)).save(path, format="PNG")
    return path


def run_image(cfg: RunConfig, entry: DatasetEntry, out_dir=None, export_stages: bool | None = None) -> ImageResult:
    """Run the pipeline on one entry and write ``<stem>_S_final.png``.

    Stage maps are written too when ``export_stages`` (default: the config
    flag) is set. A metric report is produced only if the entry has a mask.
    """
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    export = cfg.export_stages if export_stages is None else export_stages

    img = load_image(entry.image)
    gt = load_mask(entry.mask, (img.height, img.width)) if entry.mask is not None else None
    result = run_pipeline(img, cfg)

    written = []
    stages = result.stages.items() if export else [(Stage.FINAL, result.final)]
    for stage, m in stages:
        written.append(save_map(m.render(), out / f"{entry.stem}_{stage.value}.png"))

    report = metrics.evaluate(result.final.render(), gt) if gt is not None else None
    return ImageResult(entry.stem, result.final, report, written)


def _images_in(directory: Path) -> list[Path]:
    return sorted(p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def _find_mask(gt_dir: Path | None, stem: str) -> Path | None:
    if gt_dir is None:
        return None
    for suffix in IMAGE_SUFFIXES + tuple(s.upper() for s in IMAGE_SUFFIXES):
        candidate = gt_dir / f"{stem}{suffix}"
        if candidate.is_file():
            return candidate
    return None


def discover(root, gt_dir=None) -> list[DatasetEntry]:
    """Pair images with masks by file stem, ordered by file name.

    ``root`` may hold the images directly, or ``images/`` and ``masks/``
    subdirectories as written by :func:`btof.synth.synth`.
    """
    root = Path(root)
    image_dir = root / "images" if (root / "images").is_dir() else root
    if gt_dir is None and (root / "masks").is_dir():
        gt_dir = root / "masks"
    gt_dir = Path(gt_dir) if gt_dir is not None else None
    return [DatasetEntry(p, _find_mask(gt_dir, p.stem)) for p in _images_in(image_dir)]


@dataclass
class DatasetResult:
    reports: list[tuple[str, metrics.MetricReport]]
    aggregate: metrics.MetricReport | None
    skipped: list[tuple[str, str]]
    metrics_csv: Path | None
    curves_csv: Path | None


def run_dataset(cfg: RunConfig, root, gt_dir=None, out_dir=None, export_stages: bool | None = None) -> DatasetResult:
    """Run every image under ``root``; write ``metrics.csv`` and ``curves.csv``.

    Failing images are logged and skipped. CSV files are only written when at
    least one image had ground truth.
    """
    entries = discover(root, gt_dir)
    if not entries:
        raise EmptyDataset(f"no PNG/JPEG images under {root}")
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    reports, skipped = [], []
    for entry in entries:
        try:
            res = run_image(cfg, entry, out, export_stages)
        except BTOFError as exc:
            log.warning("skipping %s: %s", entry.image.name, exc)
            skipped.append((entry.image.name, str(exc)))
            continue
        if res.report is not None:
            reports.append((res.stem, res.report))

    if not reports:
        return DatasetResult([], None, skipped, None, None)
    mean = metrics.mean_report([r for _, r in reports])
    metrics_csv, curves_csv = out / "metrics.csv", out / "curves.csv"
    metrics.write_metrics_csv(metrics_csv, reports, mean)
    metrics.write_curves_csv(curves_csv, mean)
    return DatasetResult(reports, mean, skipped, metrics_csv, curves_csv)


def template_maps_for(cfg: RunConfig, img: RasterImage) -> list[SaliencyMap]:
    """The five background-template maps of one image."""
    sp, _, g = prepare(img, cfg)
    return all_template_maps(g, sp.labels, cfg.ranking_params())


def calibrate(cfg: RunConfig, validation_dir, config_path=None, gt_dir=None) -> RunConfig:
    """Fit template weights on a validation set and persist them.

    Returns the updated config; when ``config_path`` is given the config file
    is rewritten with the new ``lambdas``.
    """
    entries = [e for e in discover(validation_dir, gt_dir) if e.mask is not None]
    if not entries:
        raise EmptyValidationSet(f"no image/mask pairs under {validation_dir}")
    pairs = []
    for entry in entries:
        img = load_image(entry.image)
        pairs.append((template_maps_for(cfg, img), load_mask(entry.mask, (img.height, img.width))))
    weights = fit_weights(pairs)
    cfg.lambdas = weights.lam
    cfg.validate()
    if config_path is not None:
        save_config(cfg, config_path)
    return cfg


def evaluate_dirs(saliency_dir, gt_dir, out_csv=None) -> DatasetResult:
    """Score existing saliency PNGs against masks with the same stem.

    Saliency files may carry a stage suffix (``<stem>_S_final.png``); the
    suffix is stripped before looking up the mask.
    """
    saliency_dir, gt_dir = Path(saliency_dir), Path(gt_dir)
    reports, skipped = [], []
    other_stages = tuple(f"_{st.value}" for st in Stage if st is not Stage.FINAL)
    for path in _images_in(saliency_dir):
        stem = path.stem
        if stem.endswith(other_stages):
            continue
        stem = stem.removesuffix(f"_{Stage.FINAL.value}")
        mask_path = _find_mask(gt_dir, stem)
        if mask_path is None:
            skipped.append((path.name, "no matching mask"))
            continue
        try:
            with Image.open(path) as im:
                sal = np.asarray(im.convert("L"))
            gt = load_mask(mask_path, sal.shape)
        except (BTOFError, OSError) as exc:
            skipped.append((path.name, str(exc)))
            continue
        reports.append((stem, metrics.evaluate(sal / 255.0, gt)))
    if not reports:
        raise EmptyDataset(f"no saliency maps with masks under {saliency_dir}")
    mean = metrics.mean_report([r for _, r in reports])
    out_csv = Path(out_csv) if out_csv is not None else None
    if out_csv is not None:
        metrics.write_metrics_csv(out_csv, reports, mean)
    return DatasetResult(reports, mean, skipped, out_csv, None)

