#!/usr/bin/env python3
"""Generate the bundled fixture corpus: 12 small synthetic photo-like images.

Deterministic (fixed seed); rerunning reproduces identical files.
Usage: python3 scripts/make_fixtures.py [output_dir]
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from lrimg.image import clamp_quantize, tensor_from_array, save_image  # noqa: E402


def box_blur(a, passes=3):
    for _ in range(passes):
        p = np.pad(a, 1, mode="edge")
        a = (
            p[:-2, :-2] + p[:-2, 1:-1] + p[:-2, 2:]
            + p[1:-1, :-2] + p[1:-1, 1:-1] + p[1:-1, 2:]
            + p[2:, :-2] + p[2:, 1:-1] + p[2:, 2:]
        ) / 9.0
    return a


def cloud(rng, h, w, scale=8, passes=4):
    """Smooth low-frequency field in [0, 1]."""
    coarse = rng.uniform(size=(max(2, h // scale), max(2, w // scale)))
    ys = np.linspace(0, coarse.shape[0] - 1, h)
    xs = np.linspace(0, coarse.shape[1] - 1, w)
    yi = ys.astype(int).clip(0, coarse.shape[0] - 2)
    xi = xs.astype(int).clip(0, coarse.shape[1] - 2)
    fy = (ys - yi)[:, None]
    fx = (xs - xi)[None, :]
    a = (
        coarse[yi][:, xi] * (1 - fy) * (1 - fx)
        + coarse[yi + 1][:, xi] * fy * (1 - fx)
        + coarse[yi][:, xi + 1] * (1 - fy) * fx
        + coarse[yi + 1][:, xi + 1] * fy * fx
    )
    a = box_blur(a, passes)
    a -= a.min()
    peak = a.max()
    return a / peak if peak > 0 else a


def ellipse_mask(h, w, cy, cx, ry, rx, angle=0.0):
    yy, xx = np.mgrid[0:h, 0:w]
    y = yy - cy
    x = xx - cx
    c, s = np.cos(angle), np.sin(angle)
    yr = c * y - s * x
    xr = s * y + c * x
    return (yr / ry) ** 2 + (xr / rx) ** 2 <= 1.0


def scene(rng, h, w, base_lo, base_hi, n_blobs=3, texture=0.12, noise=4.0):
    """Textured background with a few elliptical objects; returns [0, 255]."""
    img = base_lo + (base_hi - base_lo) * cloud(rng, h, w)
    img += texture * 255 * (cloud(rng, h, w, scale=3, passes=1) - 0.5)
    for _ in range(n_blobs):
        cy = rng.uniform(0.2, 0.8) * h
        cx = rng.uniform(0.2, 0.8) * w
        ry = rng.uniform(0.12, 0.3) * h
        rx = rng.uniform(0.12, 0.3) * w
        mask = ellipse_mask(h, w, cy, cx, ry, rx, rng.uniform(0, np.pi))
        level = rng.uniform(40, 215)
        inner = level + 30 * (cloud(rng, h, w, scale=4, passes=1) - 0.5)
        img = np.where(mask, 0.25 * img + 0.75 * inner, img)
    img += noise * rng.standard_normal((h, w))
    return np.clip(img, 0, 255)


def rgb_scene(rng, h, w, **kw):
    base = scene(rng, h, w, 60, 200, **kw)
    tint = [rng.uniform(0.7, 1.0) for _ in range(3)]
    shift = [rng.uniform(0, 40) for _ in range(3)]
    planes = []
    for c in range(3):
        p = tint[c] * base + shift[c] + 12 * (cloud(rng, h, w, scale=6) - 0.5) * 255 * 0.15
        planes.append(np.clip(p, 0, 255))
    return np.stack(planes, axis=2)


def dog_like(rng, h, w):
    """High-contrast object on a distinct textured background (edge-map fixture)."""
    img = 185 + 35 * cloud(rng, h, w, scale=5, passes=2)  # bright grassy field
    img += 18 * (cloud(rng, h, w, scale=2, passes=1) - 0.5)
    body = ellipse_mask(h, w, 0.55 * h, 0.45 * w, 0.28 * h, 0.30 * w, 0.3)
    head = ellipse_mask(h, w, 0.30 * h, 0.68 * w, 0.14 * h, 0.12 * w)
    fur = 55 + 28 * cloud(rng, h, w, scale=3, passes=1)
    img = np.where(body | head, fur, img)
    img += 2.0 * rng.standard_normal((h, w))
    return np.clip(img, 0, 255)


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        Path(__file__).resolve().parents[1] / "fixtures" / "corpus"
    )
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20240817)

    images = []
    images.append(("dog.pgm", dog_like(rng, 64, 80)))
    images.append(("gray-field.pgm", scene(rng, 48, 64, 40, 220)))
    images.append(("gray-rocks.pgm", scene(rng, 56, 56, 30, 180, n_blobs=5, texture=0.2)))
    images.append(("gray-mist.png", scene(rng, 40, 60, 90, 200, n_blobs=1, texture=0.06)))
    images.append(("rgb-meadow.png", rgb_scene(rng, 48, 64)))
    images.append(("rgb-harbor.png", rgb_scene(rng, 64, 48, n_blobs=4)))
    images.append(("rgb-dusk.png", rgb_scene(rng, 40, 56, texture=0.08)))
    images.append(("rgb-canyon.png", rgb_scene(rng, 56, 72, n_blobs=2, texture=0.18)))
    images.append(("rgb-orchard.png", rgb_scene(rng, 44, 44, n_blobs=5)))
    images.append(("rgb-tundra.ppm", rgb_scene(rng, 52, 68, n_blobs=3, texture=0.15)))

    # RGBA: a shaped alpha matte over an RGB scene
    for name, (h, w) in (("rgba-badge.png", (48, 48)), ("rgba-leaf.png", (40, 64))):
        base = rgb_scene(rng, h, w, n_blobs=2)
        alpha = np.full((h, w), 255.0)
        hole = ellipse_mask(h, w, 0.5 * h, 0.5 * w, 0.42 * h, 0.42 * w)
        alpha[~hole] = 0.0
        edge = 200 * cloud(rng, h, w, scale=6)
        alpha = np.where(hole, np.clip(alpha - 0.3 * edge, 0, 255), alpha)
        images.append((name, np.dstack([base, alpha])))

    for name, arr in images:
        t = tensor_from_array(clamp_quantize(arr) if arr.ndim == 2 else
                              np.dstack([clamp_quantize(arr[:, :, c])
                                         for c in range(arr.shape[2])]))
        save_image(t, out / name)
        print(f"{name}: {t.height}x{t.width}x{t.channels}")


if __name__ == "__main__":
    main()
