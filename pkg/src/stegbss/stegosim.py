"""Desk-scale steganography generators for building test corpora.

Two embedders are provided, both operating in the Haar sub-band domain:

* a toy invertible coupling stack (``inn_embed`` / ``inn_reveal``) whose
  blocks update the two branches as

      y2 = x2 + phi(x1)
      y1 = x1 * exp(sigmoid(rho(y2))) + eta(y2)

  with phi/rho/eta realized as seeded random zero-bias 3x3 convolutions
  with bounded weights.  Invertibility is structural, it holds for any
  weights;

* an additive mixer (``additive_mix``) that injects the payload's LL
  band into chosen sub-band slots of the cover at a controlled fraction
  of each slot's own energy.

The raw coupling stack multiplies the carrier branch by exp(sigmoid(.))
in (1, e) at every block, about e^0.5 per block even with zero weights,
which would saturate the 8-bit output after a few blocks.  Embedding
therefore rescales the carrier branch by exp(-1/2) (the exact
zero-weight gain) after every forward block, and revealing applies the
inverse factor before every inverse block; the round trip is unaffected,
intermediate magnitudes stay bounded, and the weight cap becomes the
single knob controlling cover distortion.  Pass ``normalize_gain=False``
to observe the raw saturating behavior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .wavelet import BAND_LABELS, SubBandStack, band_index, haar_dwt, haar_idwt

#: Weight cap giving stego PSNR in a realistic 30-45 dB range for the
#: default 16-block net (measured on seeded texture batches).
DEFAULT_WEIGHT_CAP = 0.006

#: Ceiling allowed for any weight cap.
MAX_WEIGHT_CAP = 0.1

DEFAULT_NUM_BLOCKS = 16

#: Sub-band slots that receive payload LL energy by default: the
#: low-frequency LL and LH slots of every channel.
DEFAULT_TARGET_BANDS = ("R-LL", "G-LL", "B-LL", "R-LH", "G-LH", "B-LH")


@dataclass
class CouplingBlockParams:
    """Zero-bias 3x3 kernels for the three block functions."""

    phi: np.ndarray
    rho: np.ndarray
    eta: np.ndarray


@dataclass
class CouplingNet:
    blocks: list[CouplingBlockParams]
    seed: int = 0
    weight_cap: float = DEFAULT_WEIGHT_CAP

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    @classmethod
    def seeded(
        cls,
        seed: int,
        num_blocks: int = DEFAULT_NUM_BLOCKS,
        weight_cap: float = DEFAULT_WEIGHT_CAP,
    ) -> "CouplingNet":
        """Random net with phi centered on a -1/num_blocks center tap.

        The center tap makes the residual branch accumulate roughly the
        negated mean of the carrier path, so revealing with an all-zero
        residual reconstructs a carrier-scale image instead of a dark
        husk; rho and eta stay zero-centered.  All weights respect the
        ``MAX_WEIGHT_CAP`` bound.
        """
        if num_blocks < 1:
            raise ValueError("num_blocks must be >= 1")
        if not 0.0 < weight_cap <= MAX_WEIGHT_CAP:
            raise ValueError(f"weight_cap must be in (0, {MAX_WEIGHT_CAP}]")
        rng = np.random.default_rng(seed)
        center = min(1.0 / num_blocks, MAX_WEIGHT_CAP - weight_cap)
        blocks = []
        for _ in range(num_blocks):
            phi = rng.uniform(-weight_cap, weight_cap, (3, 3))
            phi[1, 1] -= center
            rho = rng.uniform(-weight_cap, weight_cap, (3, 3))
            eta = rng.uniform(-weight_cap, weight_cap, (3, 3))
            blocks.append(CouplingBlockParams(phi, rho, eta))
        return cls(blocks, seed, weight_cap)


def _conv3(fields: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Same-size zero-padded 3x3 convolution of each band independently."""
    padded = np.pad(fields, ((0, 0), (1, 1), (1, 1)))
    out = np.zeros_like(fields)
    h, w = fields.shape[-2:]
    for di in range(3):
        for dj in range(3):
            out += kernel[di, dj] * padded[..., di : di + h, dj : dj + w]
    return out


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def coupling_forward(
    x1: np.ndarray, x2: np.ndarray, block: CouplingBlockParams
) -> tuple[np.ndarray, np.ndarray]:
    """One forward block: y2 first, then the multiplicative carrier update."""
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    if x1.shape != x2.shape:
        raise ValueError(f"branch shapes differ: {x1.shape} vs {x2.shape}")
    y2 = x2 + _conv3(x1, block.phi)
    y1 = x1 * np.exp(_sigmoid(_conv3(y2, block.rho))) + _conv3(y2, block.eta)
    return y1, y2


def coupling_inverse(
    y1: np.ndarray, y2: np.ndarray, block: CouplingBlockParams
) -> tuple[np.ndarray, np.ndarray]:
    """Algebraic inverse of :func:`coupling_forward`."""
    y1 = np.asarray(y1, dtype=np.float64)
    y2 = np.asarray(y2, dtype=np.float64)
    if y1.shape != y2.shape:
        raise ValueError(f"branch shapes differ: {y1.shape} vs {y2.shape}")
    x1 = (y1 - _conv3(y2, block.eta)) * np.exp(-_sigmoid(_conv3(y2, block.rho)))
    x2 = y2 - _conv3(x1, block.phi)
    return x1, x2


_BLOCK_GAIN = math.exp(-0.5)  # zero-weight carrier gain of one block, inverted


def _run_forward(
    x1: np.ndarray, x2: np.ndarray, net: CouplingNet, normalize_gain: bool
) -> tuple[np.ndarray, np.ndarray]:
    for block in net.blocks:
        x1, x2 = coupling_forward(x1, x2, block)
        if normalize_gain:
            x1 = x1 * _BLOCK_GAIN
    return x1, x2


def _run_inverse(
    y1: np.ndarray, y2: np.ndarray, net: CouplingNet, normalize_gain: bool
) -> tuple[np.ndarray, np.ndarray]:
    for block in reversed(net.blocks):
        if normalize_gain:
            y1 = y1 / _BLOCK_GAIN
        y1, y2 = coupling_inverse(y1, y2, block)
    return y1, y2


def quantize_8bit(image: np.ndarray) -> np.ndarray:
    """Clamp to [0, 1] and round to the 8-bit grid (values k/255)."""
    return np.round(np.clip(image, 0.0, 1.0) * 255.0) / 255.0


def inn_embed(
    cover: np.ndarray,
    payload: np.ndarray,
    net: CouplingNet,
    quantize: bool = True,
    normalize_gain: bool = True,
) -> tuple[np.ndarray, SubBandStack]:
    """Hide ``payload`` in ``cover`` through the coupling stack.

    Returns the stego raster and the residual branch (kept only for
    analysis; a real observer never sees it).  With ``quantize`` the
    stego is clamped to [0, 1] and rounded to 8 bits, deliberately
    breaking perfect invertibility the way any exchanged image would.
    """
    cover = np.asarray(cover, dtype=np.float64)
    payload = np.asarray(payload, dtype=np.float64)
    if cover.shape != payload.shape:
        raise ValueError(f"cover shape {cover.shape} != payload shape {payload.shape}")
    cover_stack = haar_dwt(cover)
    payload_stack = haar_dwt(payload)
    y1, y2 = _run_forward(cover_stack.bands, payload_stack.bands, net, normalize_gain)
    stego = haar_idwt(SubBandStack(y1, cover_stack.source_height, cover_stack.source_width))
    if quantize:
        stego = quantize_8bit(stego)
    residual = SubBandStack(y2, cover_stack.source_height, cover_stack.source_width)
    return stego, residual


def inn_reveal(
    stego: np.ndarray,
    net: CouplingNet,
    noise: SubBandStack | None = None,
    quantize: bool = True,
    normalize_gain: bool = True,
) -> np.ndarray:
    """Estimate the payload from a stego raster and a residual guess.

    ``noise`` stands in for the residual branch; None means all zeros,
    which is the keyless-extraction setting.  The estimate is clamped
    to [0, 1] unless ``quantize`` is False.
    """
    stego = np.asarray(stego, dtype=np.float64)
    stego_stack = haar_dwt(stego)
    z1 = stego_stack.bands
    if noise is None:
        z2 = np.zeros_like(z1)
    else:
        if noise.bands.shape != z1.shape:
            raise ValueError(f"noise shape {noise.bands.shape} != expected {z1.shape}")
        z2 = noise.bands
    _, x2 = _run_inverse(z1, z2, net, normalize_gain)
    estimate = haar_idwt(SubBandStack(x2, stego_stack.source_height, stego_stack.source_width))
    if quantize:
        estimate = np.clip(estimate, 0.0, 1.0)
    return estimate


@dataclass
class MixParams:
    """Additive mixer settings.

    ``alpha`` scales the injected payload LL relative to each target
    slot's own energy; 0 disables embedding (identity modulo the
    quantization path), which is the null setting for sanity protocols.
    """

    alpha: float = 0.2
    target_bands: tuple[str, ...] = DEFAULT_TARGET_BANDS

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if not self.target_bands:
            raise ValueError("target_bands must be non-empty")
        for label in self.target_bands:
            band_index(label)  # validates


def additive_mix(
    cover: np.ndarray,
    payload: np.ndarray,
    params: MixParams,
    quantize: bool = True,
) -> np.ndarray:
    """Add energy-matched payload LL content into selected cover slots.

    For each target slot the payload's LL band of the same channel is
    rescaled to the slot's own energy and added with weight ``alpha``,
    mirroring how trained hiding networks concentrate payload
    information in the low-frequency sub-bands.
    """
    cover = np.asarray(cover, dtype=np.float64)
    payload = np.asarray(payload, dtype=np.float64)
    if cover.shape != payload.shape:
        raise ValueError(f"cover shape {cover.shape} != payload shape {payload.shape}")
    cover_stack = haar_dwt(cover)
    payload_stack = haar_dwt(payload)
    bands = cover_stack.bands.copy()
    for label in params.target_bands:
        slot = band_index(label)
        channel = slot // 4
        payload_ll = payload_stack.bands[4 * channel]
        ll_norm = np.linalg.norm(payload_ll)
        scale = np.linalg.norm(bands[slot]) / ll_norm if ll_norm > 0 else 0.0
        bands[slot] = bands[slot] + params.alpha * scale * payload_ll
    stego = haar_idwt(SubBandStack(bands, cover_stack.source_height, cover_stack.source_width))
    return quantize_8bit(stego) if quantize else stego


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB with peak 1.0; equal inputs give inf."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    mse = np.mean((a - b) ** 2)
    if mse == 0.0:
        return math.inf
    return float(10.0 * np.log10(1.0 / mse))


def _spectral_field(rng: np.random.Generator, height: int, width: int, beta: float) -> np.ndarray:
    """Zero-mean unit-variance noise field with a 1/f^beta amplitude falloff."""
    spectrum = rng.standard_normal((height, width)) + 1j * rng.standard_normal((height, width))
    fy = np.fft.fftfreq(height)[:, None]
    fx = np.fft.fftfreq(width)[None, :]
    radius = np.hypot(fy, fx)
    radius[0, 0] = np.inf  # no DC component
    field = np.fft.ifft2(spectrum * radius**-beta).real
    field -= field.mean()
    std = field.std()
    return field / std if std > 0 else field


def synth_texture(height: int, width: int, seed: int) -> np.ndarray:
    """Seeded synthetic textured cover/payload image, 8-bit quantized.

    Combines a smooth large-scale luminance field, a fine detail field,
    and weak per-channel chroma fields, loosely imitating the spectral
    falloff of photographic content.
    """
    if height % 2 or width % 2 or height < 8 or width < 8:
        raise ValueError("texture dimensions must be even and >= 8")
    rng = np.random.default_rng(seed)
    base = _spectral_field(rng, height, width, 1.4)
    detail = _spectral_field(rng, height, width, 0.6)
    image = np.empty((height, width, 3), dtype=np.float64)
    for ch in range(3):
        chroma = _spectral_field(rng, height, width, 1.4)
        image[:, :, ch] = 0.5 + 0.17 * base + 0.05 * detail + 0.06 * chroma
    return quantize_8bit(image)
