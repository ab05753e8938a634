"""Deterministic synthetic test images with natural-image statistics.

Real photographs cannot ship with the package, so tests, demos and the
self-test build images that mix the ingredients metrics and JND models react
to: smooth luminance gradients, hard edges, and band-limited texture. The
generator is pure numpy and fully determined by its seed.
"""

from __future__ import annotations

import numpy as np

from .image import ImagePlane, quantize_to_uint8


def synthetic_natural(width: int = 128, height: int = 128, seed: int = 0) -> ImagePlane:
    """A seeded 8-bit test image: gradient background, blobs, edges, texture."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:height, 0:width].astype(np.float64)
    xn, yn = x / max(width - 1, 1), y / max(height - 1, 1)

    img = 90.0 + 70.0 * xn + 40.0 * yn

    # soft blobs
    for _ in range(4):
        cx, cy = rng.uniform(0.1, 0.9, size=2)
        sigma = rng.uniform(0.08, 0.25)
        amp = rng.uniform(-60.0, 60.0)
        img += amp * np.exp(-(((xn - cx) ** 2) + (yn - cy) ** 2) / (2 * sigma**2))

    # a hard vertical and a hard horizontal edge
    img += 45.0 * (xn > rng.uniform(0.35, 0.65))
    img -= 35.0 * (yn > rng.uniform(0.35, 0.65))

    # band-limited texture patch
    fx, fy = rng.uniform(0.15, 0.45, size=2)
    phase = rng.uniform(0, 2 * np.pi)
    texture = 18.0 * np.sin(2 * np.pi * (fx * x + fy * y) + phase)
    mask = ((xn - 0.5) ** 2 + (yn - 0.5) ** 2) < 0.16
    img += texture * mask

    img += rng.normal(0.0, 2.0, size=img.shape)
    return ImagePlane(quantize_to_uint8(img))


def add_noise(plane: ImagePlane, amplitude: float, seed: int = 0) -> ImagePlane:
    """The plane plus i.i.d. Gaussian noise of the given standard deviation."""
    rng = np.random.default_rng(seed)
    noisy = plane.to_float().data + rng.normal(0.0, amplitude, size=(plane.height, plane.width))
    return ImagePlane(quantize_to_uint8(noisy))
