"""Command-line entry point: ``btof run|calibrate|synth|eval``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import RunConfig, load_config
from .errors import BTOFError
from .harness import calibrate, evaluate_dirs, run_dataset, run_image
from .synth import KINDS, DatasetEntry, synth

log = logging.getLogger("btof")


def _config(path) -> RunConfig:
    return load_config(path) if path else RunConfig()


def _print_aggregate(result) -> None:
    if result.aggregate is None:
        print(f"{len(result.skipped)} skipped, no ground truth evaluated")
        return
    a = result.aggregate
    print(
        f"images={len(result.reports)} skipped={len(result.skipped)} "
        f"precision={a.precision:.4f} recall={a.recall:.4f} fmeasure={a.f_measure:.4f} "
        f"auc={a.auc:.4f} mae={a.mae:.4f} or={a.or_score:.4f}"
    )


def cmd_run(args) -> int:
    cfg = _config(args.config)
    target = Path(args.target)
    out = args.out or cfg.output_dir
    if target.is_dir():
        result = run_dataset(cfg, target, args.gt, out, args.export_stages or None)
        _print_aggregate(result)
        return 0
    mask = None
    if args.gt:
        from .harness import _find_mask

        mask = _find_mask(Path(args.gt), target.stem)
    res = run_image(cfg, DatasetEntry(target, mask), out, args.export_stages or None)
    for path in res.written:
        print(path)
    if res.report is not None:
        r = res.report
        print(f"fmeasure={r.f_measure:.4f} auc={r.auc:.4f} mae={r.mae:.4f} or={r.or_score:.4f}")
    return 0


def cmd_calibrate(args) -> int:
    cfg = _config(args.config)
    cfg = calibrate(cfg, args.dir, args.config, args.gt)
    print("lambdas = " + " ".join(f"{v:.6f}" for v in cfg.lambdas))
    return 0


def cmd_synth(args) -> int:
    for entry in synth(args.kind, args.seed, args.out, args.count):
        print(entry.image)
    return 0


def cmd_eval(args) -> int:
    out_csv = Path(args.csv) if args.csv else None
    _print_aggregate(evaluate_dirs(args.saliency_dir, args.gt_dir, out_csv))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="btof", description="Background-template saliency detection")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="compute saliency maps for an image or a directory")
    p.add_argument("target", help="image file or dataset directory")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--out", help="output directory (default: config output_dir)")
    p.add_argument("--export-stages", action="store_true", help="also write every intermediate stage map")
    p.add_argument("--gt", help="directory of ground-truth masks named like the images")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("calibrate", help="fit template weights and write them into the config")
    p.add_argument("dir", help="validation directory")
    p.add_argument("--config", required=True)
    p.add_argument("--gt", help="mask directory (default: <dir>/masks)")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("synth", help="generate synthetic images with masks")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="score existing saliency maps against masks")
    p.add_argument("saliency_dir")
    p.add_argument("gt_dir")
    p.add_argument("--csv", help="write per-image metrics to this CSV")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except BTOFError as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
