"""One-level orthonormal Haar wavelet transform for RGB rasters.

Each color channel is split into four half-resolution sub-bands.  For a
2x2 pixel block ``[a b; c d]`` the coefficients are

    LL = (a + b + c + d) / 2        LH = (a - b + c - d) / 2
    HL = (a + b - c - d) / 2        HH = (a - b - c + d) / 2

i.e. the orthonormal normalization: the transform is an isometry, so
sub-band energies are directly comparable and total energy equals the
source image energy exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CHANNEL_NAMES = ("R", "G", "B")
BAND_NAMES = ("LL", "LH", "HL", "HH")

#: Fixed layout of the 12 sub-band slots: R-LL, R-LH, ..., B-HH.
BAND_LABELS = tuple(f"{ch}-{band}" for ch in CHANNEL_NAMES for band in BAND_NAMES)

_BAND_INDEX = {label: i for i, label in enumerate(BAND_LABELS)}


def band_index(label: str) -> int:
    """Slot index (0..11) of a sub-band label such as ``"G-HL"``."""
    try:
        return _BAND_INDEX[label]
    except KeyError:
        raise ValueError(f"unknown sub-band label {label!r}; expected one of {BAND_LABELS}") from None


@dataclass
class SubBandStack:
    """The 12 half-resolution sub-bands of one RGB image.

    ``bands`` has shape (12, H/2, W/2) in the fixed :data:`BAND_LABELS`
    order.
    """

    bands: np.ndarray
    source_height: int
    source_width: int

    def __post_init__(self):
        self.bands = np.asarray(self.bands, dtype=np.float64)
        if self.bands.ndim != 3 or self.bands.shape[0] != 12:
            raise ValueError(f"expected 12 sub-band matrices, got array of shape {self.bands.shape}")
        if self.bands.shape[1:] != (self.source_height // 2, self.source_width // 2):
            raise ValueError(
                f"band shape {self.bands.shape[1:]} inconsistent with source size "
                f"{self.source_height}x{self.source_width}"
            )

    def band(self, label: str) -> np.ndarray:
        return self.bands[band_index(label)]

    def copy(self) -> "SubBandStack":
        return SubBandStack(self.bands.copy(), self.source_height, self.source_width)


def haar_dwt(image: np.ndarray) -> SubBandStack:
    """Decompose an (H, W, 3) raster into its :class:`SubBandStack`.

    H and W must be even; upstream loaders guarantee this by cropping.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) raster, got shape {image.shape}")
    height, width = image.shape[:2]
    if height % 2 or width % 2:
        raise ValueError(f"image dimensions must be even, got {height}x{width}")

    a = image[0::2, 0::2]
    b = image[0::2, 1::2]
    c = image[1::2, 0::2]
    d = image[1::2, 1::2]

    ll = (a + b + c + d) / 2.0
    lh = (a - b + c - d) / 2.0
    hl = (a + b - c - d) / 2.0
    hh = (a - b - c + d) / 2.0

    bands = np.empty((12, height // 2, width // 2), dtype=np.float64)
    for ch in range(3):
        bands[4 * ch + 0] = ll[:, :, ch]
        bands[4 * ch + 1] = lh[:, :, ch]
        bands[4 * ch + 2] = hl[:, :, ch]
        bands[4 * ch + 3] = hh[:, :, ch]
    return SubBandStack(bands, height, width)


def haar_idwt(stack: SubBandStack) -> np.ndarray:
    """Exact inverse of :func:`haar_dwt`.

    Returns the (H, W, 3) raster.  No clamping is applied: synthetic
    stacks may reconstruct outside [0, 1].
    """
    h2, w2 = stack.bands.shape[1:]
    image = np.empty((2 * h2, 2 * w2, 3), dtype=np.float64)
    for ch in range(3):
        ll = stack.bands[4 * ch + 0]
        lh = stack.bands[4 * ch + 1]
        hl = stack.bands[4 * ch + 2]
        hh = stack.bands[4 * ch + 3]
        image[0::2, 0::2, ch] = (ll + lh + hl + hh) / 2.0
        image[0::2, 1::2, ch] = (ll - lh + hl - hh) / 2.0
        image[1::2, 0::2, ch] = (ll + lh - hl - hh) / 2.0
        image[1::2, 1::2, ch] = (ll - lh - hl + hh) / 2.0
    return image
