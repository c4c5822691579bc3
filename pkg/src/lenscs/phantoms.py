"""Synthetic piecewise-constant test scenes."""

import numpy as np


def _region_masks(size, n_regions, rng):
    yy, xx = np.mgrid[:size, :size]
    masks = []
    for i in range(n_regions - 1):
        cy, cx = rng.uniform(0.15 * size, 0.85 * size, 2)
        ry, rx = rng.uniform(0.08 * size, 0.25 * size, 2)
        if i % 2 == 0:
            masks.append(((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0)
        else:
            masks.append((np.abs(yy - cy) <= ry) & (np.abs(xx - cx) <= rx))
    return masks


def piecewise_constant(size=64, n_regions=6, seed=0, low=0.1, high=1.0, channels=None):
    """Square phantom of at most ``n_regions`` constant regions.

    Random ellipses and rectangles are painted in turn over a constant
    background, each with an intensity drawn from ``[low, high]``. With
    ``channels`` set, the same regions get independent intensities per
    channel and the result is ``(size, size, channels)``.
    """
    rng = np.random.default_rng(seed)
    masks = _region_masks(size, n_regions, rng)
    nc = 1 if channels is None else int(channels)
    values = rng.uniform(low, high, (n_regions, nc))
    img = np.empty((size, size, nc))
    img[...] = values[0]
    for mask, value in zip(masks, values[1:]):
        img[mask] = value
    return img[..., 0] if channels is None else img


def smooth_source(height, width, seed=0):
    """Slowly varying nonnegative RGB source for pixelization tests."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[:height, :width] / max(height, width)
    chans = []
    for _ in range(3):
        fy, fx, py, px = rng.uniform(0.5, 2.0, 4)
        chans.append(0.5 + 0.25 * np.sin(2 * np.pi * fy * yy + py) * np.cos(2 * np.pi * fx * xx + px))
    return np.stack(chans, axis=-1)
