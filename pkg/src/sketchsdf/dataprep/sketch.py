"""Canny edge extraction turning shading images into synthetic sketches."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

DEFAULT_SIGMA = 1.4
DEFAULT_LOW = 50.0
DEFAULT_HIGH = 150.0


def canny_sketch(
    image: np.ndarray,
    sigma: float = DEFAULT_SIGMA,
    low: float = DEFAULT_LOW,
    high: float = DEFAULT_HIGH,
) -> np.ndarray:
    """Standard Canny, inverted to black strokes on white.

    Gaussian blur, Sobel gradients (L2 magnitude), non-max suppression over
    four quantized directions, double-threshold hysteresis. Thresholds are
    on the 8-bit Sobel magnitude scale. Returns uint8 {0, 255}.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"expected grayscale image, got shape {img.shape}")
    blurred = ndimage.gaussian_filter(img, sigma=sigma)
    # Sobel convention: gx along columns (x), gy along rows (y).
    gx = ndimage.sobel(blurred, axis=1)
    gy = ndimage.sobel(blurred, axis=0)
    mag = np.hypot(gx, gy)
    angle = np.arctan2(gy, gx)

    # Quantize to 0/45/90/135 degrees and suppress non-maxima.
    sector = (np.round(angle / (np.pi / 4)) % 4).astype(int)
    offsets = {
        0: (0, 1),  # horizontal gradient -> compare left/right
        1: (1, 1),  # diagonal
        2: (1, 0),  # vertical gradient -> compare up/down
        3: (1, -1),  # anti-diagonal
    }
    h, w = mag.shape
    keep = np.zeros_like(mag, dtype=bool)
    padded = np.pad(mag, 1, mode="constant")
    for s, (dy, dx) in offsets.items():
        sel = sector == s
        n1 = padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
        n2 = padded[1 - dy : 1 - dy + h, 1 - dx : 1 - dx + w]
        keep |= sel & (mag >= n1) & (mag >= n2)
    nms = np.where(keep, mag, 0.0)

    strong = nms >= high
    weak = nms >= low
    labels, num = ndimage.label(weak, structure=np.ones((3, 3)))
    if num:
        strong_labels = np.unique(labels[strong])
        strong_labels = strong_labels[strong_labels > 0]
        edges = np.isin(labels, strong_labels)
    else:
        edges = strong
    out = np.full(img.shape, 255, dtype=np.uint8)
    out[edges] = 0
    return out


def stroke_pixels(sketch: np.ndarray) -> np.ndarray:
    """(K, 2) array of (row, col) coordinates of non-white pixels."""
    return np.argwhere(np.asarray(sketch) < 255)
