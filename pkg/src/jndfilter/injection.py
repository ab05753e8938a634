"""Turn JND thresholds into signal modifications.

Coefficient suppression shrinks each DCT coefficient toward zero by an
amount the threshold says is invisible:

    C_f = 0                                   if |C_o| < J_T
    C_f = sgn(C_o) * sqrt(C_o^2 - p * J_T^2)  otherwise

with a suppression weight p in [0, 1] that is constant (basic), a function
of frequency position (weighted), or additionally of the block type
(blocktype). The alternative strategy low-pass filters each block with a
Gaussian whose width is driven by the block's mean threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.ndimage

from . import dct, jnd
from .image import BLOCK, ImagePlane, pad_to_blocks, tile_blocks, untile_blocks

STRATEGIES = ("suppress_basic", "suppress_weighted", "suppress_blocktype", "gaussian")


def default_p_table() -> np.ndarray:
    """Suppression weights ramping with frequency: 0.3 at DC to 1.0 at the
    last zigzag position."""
    ramp = 0.3 + 0.7 * np.arange(64) / 63.0
    table = np.empty((BLOCK, BLOCK))
    for pos, (u, v) in enumerate(dct.ZIGZAG_ORDER):
        table[u, v] = ramp[pos]
    return table


def default_p_tables_by_class() -> dict[str, np.ndarray]:
    """Class-conditioned weights: suppress texture hardest, plane least."""
    ramp = default_p_table()
    return {
        jnd.PLANE: ramp * 0.6,
        jnd.EDGE: ramp * 0.8,
        jnd.TEXTURE: ramp * 1.0,
    }


@dataclass(frozen=True)
class GaussianParams:
    # defaults put typical blocks near sigma 0.5 under the default threshold
    # model (block mean AC thresholds sit around 100..120), reserving stronger
    # blur for heavily masked content
    sigma_max: float = 1.0
    j_ref: float = 200.0

    def __post_init__(self):
        if not self.sigma_max > 0:
            raise ValueError(f"sigma_max must be > 0, got {self.sigma_max}")
        if not self.j_ref > 0:
            raise ValueError(f"j_ref must be > 0, got {self.j_ref}")


def _validated_p(table) -> np.ndarray:
    arr = np.array(table, dtype=np.float64)
    if arr.shape != (BLOCK, BLOCK):
        raise ValueError(f"p table must be (8, 8), got {arr.shape}")
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("p weights must lie in [0, 1]")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class InjectionConfig:
    strategy: str = "suppress_weighted"
    p_table: np.ndarray = field(default_factory=default_p_table)
    p_tables_by_class: dict = field(default_factory=default_p_tables_by_class)
    gaussian: GaussianParams = field(default_factory=GaussianParams)

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        object.__setattr__(self, "p_table", _validated_p(self.p_table))
        tables = dict(self.p_tables_by_class)
        missing = {jnd.PLANE, jnd.EDGE, jnd.TEXTURE} - set(tables)
        if missing:
            raise ValueError(f"p_tables_by_class missing labels: {sorted(missing)}")
        object.__setattr__(
            self, "p_tables_by_class", {k: _validated_p(v) for k, v in tables.items()}
        )


def suppress_coeff(c_o, j_t, p):
    """Apply the suppression rule elementwise; inputs broadcast."""
    c_o = np.asarray(c_o, dtype=np.float64)
    j_t = np.asarray(j_t, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    # radicand is >= 0 on the kept branch (|c_o| >= j_t, p <= 1); abs only
    # silences sqrt warnings for dead-zone lanes the where() discards
    kept = np.sign(c_o) * np.sqrt(np.abs(c_o * c_o - p * (j_t * j_t)))
    return np.where(np.abs(c_o) < j_t, 0.0, kept)


def _p_for_blocks(labels: np.ndarray, cfg: InjectionConfig) -> np.ndarray:
    if cfg.strategy == "suppress_basic":
        return np.ones((1, BLOCK, BLOCK))
    if cfg.strategy == "suppress_weighted":
        return cfg.p_table[None]
    if cfg.strategy == "suppress_blocktype":
        stacked = np.stack(
            [cfg.p_tables_by_class[name] for name in (jnd.PLANE, jnd.EDGE, jnd.TEXTURE)]
        )
        return stacked[labels]
    raise ValueError(f"strategy {cfg.strategy!r} does not operate on coefficient blocks")


def inject_block(
    coeffs: np.ndarray,
    thresholds: np.ndarray,
    block_class: jnd.BlockClass,
    cfg: InjectionConfig = InjectionConfig(),
) -> np.ndarray:
    """Suppress one coefficient block under the configured strategy."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    thresholds = np.asarray(thresholds, dtype=np.float64)
    if coeffs.shape != thresholds.shape:
        raise ValueError("coefficients and thresholds must have the same shape")
    labels = np.array([(jnd.PLANE, jnd.EDGE, jnd.TEXTURE).index(block_class.label)])
    p = _p_for_blocks(labels, cfg)
    return suppress_coeff(coeffs[None], thresholds[None], p)[0]


def gaussian_sigmas(jnd_map: jnd.JndMap, cfg: InjectionConfig) -> np.ndarray:
    """Per-block filter widths: sigma_max * clamp(E_J / j_ref, 0, 1) with E_J
    the block's mean AC-position threshold."""
    g = cfg.gaussian
    ac = np.ones((BLOCK, BLOCK), dtype=bool)
    ac[0, 0] = False
    e_j = jnd_map.thresholds[..., ac].mean(axis=-1)
    return g.sigma_max * np.clip(e_j / g.j_ref, 0.0, 1.0)


def gaussian_inject(
    plane: ImagePlane, jnd_map: jnd.JndMap, cfg: InjectionConfig = InjectionConfig("gaussian")
) -> ImagePlane:
    """Blockwise Gaussian low-pass with threshold-controlled width.

    sigma = 0 copies the block through untouched. The kernel support crosses
    block borders and always reads the unfiltered input.
    """
    g = cfg.gaussian
    view = pad_to_blocks(plane)
    padded = view.array()
    thr = jnd_map.thresholds
    if thr.shape[:2] != (view.padded_height // BLOCK, view.padded_width // BLOCK):
        raise ValueError("JND map does not match the image block grid")

    sigmas = gaussian_sigmas(jnd_map, cfg)

    r_max = int(np.ceil(3.0 * g.sigma_max))
    work = np.pad(padded, r_max, mode="edge")
    out = padded.copy()
    rows, cols = thr.shape[:2]
    for by in range(rows):
        for bx in range(cols):
            sigma = sigmas[by, bx]
            if sigma == 0.0:
                continue
            radius = int(np.ceil(3.0 * sigma))
            offsets = np.arange(-radius, radius + 1, dtype=np.float64)
            kernel = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
            kernel /= kernel.sum()
            y0 = by * BLOCK + r_max - radius
            x0 = bx * BLOCK + r_max - radius
            region = work[y0 : y0 + BLOCK + 2 * radius, x0 : x0 + BLOCK + 2 * radius]
            tmp = scipy.ndimage.correlate1d(region, kernel, axis=0, mode="constant")
            tmp = tmp[radius : radius + BLOCK]
            tmp = scipy.ndimage.correlate1d(tmp, kernel, axis=1, mode="constant")
            out[by * BLOCK : (by + 1) * BLOCK, bx * BLOCK : (bx + 1) * BLOCK] = tmp[
                :, radius : radius + BLOCK
            ]
    return ImagePlane(np.clip(view.crop(out), 0.0, 255.0))


def prefilter_float(
    plane: ImagePlane,
    params: jnd.JndParams = jnd.JndParams(),
    cfg: InjectionConfig = InjectionConfig(),
    saliency: np.ndarray | None = None,
) -> ImagePlane:
    """Run the pre-filter and return the float result before 8-bit quantization.

    Suppression strategies return the raw inverse-DCT output (unclamped);
    the gaussian strategy is clamped by construction.
    """
    jnd_map = jnd.compute_jnd_map(plane, params, saliency=saliency)
    if cfg.strategy == "gaussian":
        return gaussian_inject(plane, jnd_map, cfg)

    view = pad_to_blocks(plane)
    tiles = tile_blocks(view.array())
    coeffs = dct.dct8_forward(tiles)
    labels, _, _ = jnd.classify_blocks(coeffs, params.classifier)
    p = _p_for_blocks(labels, cfg)
    filtered = suppress_coeff(coeffs, jnd_map.thresholds, p)
    out = untile_blocks(dct.dct8_inverse(filtered))
    return ImagePlane(np.ascontiguousarray(view.crop(out)))


def apply_prefilter(
    plane: ImagePlane,
    params: jnd.JndParams = jnd.JndParams(),
    cfg: InjectionConfig = InjectionConfig(),
    saliency: np.ndarray | None = None,
) -> ImagePlane:
    """Pre-filter an image and quantize back to 8 bits."""
    return prefilter_float(plane, params, cfg, saliency=saliency).to_uint8()
