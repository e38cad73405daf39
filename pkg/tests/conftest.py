import numpy as np
import pytest

from btof.features import extract_descriptors
from btof.graph import build_graph
from btof.pixelgrid import RasterImage, SuperpixelMap, to_lab


def two_tone(h=32, w=32, left=(20, 40, 200), right=(220, 180, 30)):
    px = np.empty((h, w, 3))
    px[:, : w // 2] = left
    px[:, w // 2 :] = right
    return RasterImage(px)


def grid_labels(h, w, rows, cols):
    """Rectangular block labelling with ``rows * cols`` regions."""
    ys = np.minimum(np.arange(h) * rows // h, rows - 1)
    xs = np.minimum(np.arange(w) * cols // w, cols - 1)
    return ys[:, None] * cols + xs[None, :]


def block_image(colors, h=48, w=48):
    """Image whose grid blocks take the given colours; returns (img, superpixel map)."""
    colors = np.asarray(colors, dtype=np.float64)
    rows, cols = colors.shape[:2]
    labels = grid_labels(h, w, rows, cols)
    px = colors.reshape(-1, 3)[labels]
    return RasterImage(px), SuperpixelMap.from_labels(labels)


@pytest.fixture
def block_graph():
    """3x3 block image with a distinct centre block, plus its graph."""
    colors = np.full((3, 3, 3), 120.0)
    colors[1, 1] = (230, 30, 30)
    img, sp = block_image(colors)
    lab = to_lab(img)
    desc = extract_descriptors(lab, img, sp)
    return sp, desc, build_graph(sp, desc)


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
