#!/usr/bin/env python3
"""Regenerate the committed desk-scale digit dataset (MNIST-format IDX files).

Ten glyph classes drawn seven-segment style on a 28x28 canvas, with random
translation, per-sample intensity, mild blur and additive Gaussian noise.
1000 train / 500 test samples, balanced classes, fixed seed. Output goes to
data/desk_mnist/ and is committed; rerunning must reproduce it byte for byte.
"""
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
from scipy import ndimage

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from quanvkit.probe import write_idx  # noqa: E402

SEED = 20240917
CANVAS = 28
BOX_H, BOX_W, THICK = 20, 12, 3

# seven-segment layout inside the glyph box
_HALF = BOX_H // 2
SEGMENTS = {
    "A": (slice(0, THICK), slice(0, BOX_W)),
    "G": (slice(_HALF - THICK // 2, _HALF - THICK // 2 + THICK), slice(0, BOX_W)),
    "D": (slice(BOX_H - THICK, BOX_H), slice(0, BOX_W)),
    "F": (slice(0, _HALF), slice(0, THICK)),
    "B": (slice(0, _HALF), slice(BOX_W - THICK, BOX_W)),
    "E": (slice(_HALF, BOX_H), slice(0, THICK)),
    "C": (slice(_HALF, BOX_H), slice(BOX_W - THICK, BOX_W)),
}

DIGIT_SEGMENTS = {
    0: "ABCDEF",
    1: "BC",
    2: "ABGED",
    3: "ABGCD",
    4: "FGBC",
    5: "AFGCD",
    6: "AFGECD",
    7: "ABC",
    8: "ABCDEFG",
    9: "ABCDFG",
}


def glyph(digit: int) -> np.ndarray:
    box = np.zeros((BOX_H, BOX_W))
    for seg in DIGIT_SEGMENTS[digit]:
        box[SEGMENTS[seg]] = 1.0
    return box


def render(digit: int, rng: np.random.Generator) -> np.ndarray:
    canvas = np.zeros((CANVAS, CANVAS))
    dr = 4 + int(rng.integers(-1, 2))
    dc = 8 + int(rng.integers(-1, 2))
    canvas[dr : dr + BOX_H, dc : dc + BOX_W] = glyph(digit) * rng.uniform(0.7, 1.0)
    canvas = ndimage.gaussian_filter(canvas, sigma=0.6)
    canvas += rng.normal(0.0, 0.08, size=canvas.shape)
    return np.clip(canvas, 0.0, 1.0)


def make_split(n_per_class: int, rng: np.random.Generator):
    images, labels = [], []
    for digit in range(10):
        for _ in range(n_per_class):
            images.append(render(digit, rng))
            labels.append(digit)
    order = rng.permutation(len(images))
    images = np.stack(images)[order]
    labels = np.asarray(labels, dtype=np.uint8)[order]
    return np.round(images * 255).astype(np.uint8), labels


def main() -> None:
    out_dir = Path(__file__).resolve().parents[1] / "data" / "desk_mnist"
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(SEED)
    train_x, train_y = make_split(100, rng)
    test_x, test_y = make_split(50, rng)
    write_idx(out_dir / "train-images-idx3-ubyte", train_x)
    write_idx(out_dir / "train-labels-idx1-ubyte", train_y)
    write_idx(out_dir / "t10k-images-idx3-ubyte", test_x)
    write_idx(out_dir / "t10k-labels-idx1-ubyte", test_y)
    print(f"wrote {train_x.shape[0]} train / {test_x.shape[0]} test to {out_dir}")


if __name__ == "__main__":
    main()
