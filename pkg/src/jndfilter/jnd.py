"""Per-block, per-coefficient JND thresholds for 8x8 DCT coefficients.

The threshold at frequency position (u, v) of a block is the product

    J_T(u, v) = s * J_CSF(u, v) * J_LA * J_CM(u, v) * J_SA

with a base visibility threshold from a contrast-sensitivity model, a
luminance-adaptation factor from the block's mean brightness, an optional
contrast-masking elevation driven by the block's own supra-threshold
coefficients, and an optional saliency factor (identity by default).
Disabled factors contribute exactly 1.0, so the fusion is cleanly separable.

All constants are parameters with package defaults; published threshold
models in this family differ mainly in these constants, and alternative sets
can be supplied through the ``[jnd]`` config section without code changes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import dct
from .image import BLOCK, ImagePlane, pad_to_blocks, tile_blocks

_U, _V = np.mgrid[0:BLOCK, 0:BLOCK].astype(np.float64)

PLANE, EDGE, TEXTURE = "plane", "edge", "texture"


@dataclass(frozen=True)
class CsfParams:
    """Exponential band-pass base-threshold model with oblique correction.

    Spatial frequency is derived from the viewing geometry: ``picture_height``
    pixels watched from ``distance_ratio`` picture heights away. The
    small-angle form is used, so frequency is exactly linear in the ratio.
    """

    a: float = 1.33
    b: float = 0.11
    c: float = 0.18
    oblique: float = 0.6
    picture_height: int = 1080
    distance_ratio: float = 3.0

    def pixels_per_degree(self) -> float:
        return self.distance_ratio * self.picture_height * math.pi / 180.0


@dataclass(frozen=True)
class LaParams:
    """Piecewise-linear U-curve in block mean luma, 1.0 on the mid plateau."""

    dark_knee: float = 60.0
    dark_scale: float = 150.0
    bright_knee: float = 170.0
    bright_scale: float = 425.0


@dataclass(frozen=True)
class CmParams:
    """Clipped power law in the supra-threshold contrast ratio.

    Low-frequency positions (u^2 + v^2 <= protect_radius_sq) of plane and
    edge blocks are exempt, protecting edge structure from over-elevation.
    """

    exponent: float = 0.36
    max_gain: float = 4.0
    protect_radius_sq: float = 16.0


@dataclass(frozen=True)
class ClassifierParams:
    """Three-way DCT-energy block classifier.

    ``lf_split`` separates low-frequency AC positions (zigzag 1..lf_split-1)
    from high-frequency ones. Blocks with total absolute AC energy below
    ``plane_energy`` are plane; otherwise the low-frequency share decides
    between edge and texture.
    """

    plane_energy: float = 300.0
    edge_ratio: float = 0.7
    lf_split: int = 16


@dataclass(frozen=True)
class SaParams:
    """Mapping from a [0, 255] saliency mean to a threshold factor.

    Salient blocks (bright in the map) get ``factor_salient``; non-salient
    blocks get ``factor_background``; linear in between.
    """

    factor_salient: float = 0.5
    factor_background: float = 1.25


@dataclass(frozen=True)
class JndParams:
    s: float = 1.0
    csf: CsfParams = field(default_factory=CsfParams)
    la: LaParams = field(default_factory=LaParams)
    cm: CmParams = field(default_factory=CmParams)
    classifier: ClassifierParams = field(default_factory=ClassifierParams)
    sa: SaParams = field(default_factory=SaParams)
    enable_cm: bool = True
    enable_sa: bool = False

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError(f"summation factor s must be > 0, got {self.s}")
        if self.enable_sa and not (
            self.sa.factor_salient > 0 and self.sa.factor_background > 0
        ):
            raise ValueError("saliency factors must be > 0")


@dataclass(frozen=True)
class BlockClass:
    label: str
    edge_energy: float
    texture_energy: float

    def __post_init__(self):
        if self.label not in (PLANE, EDGE, TEXTURE):
            raise ValueError(f"unknown block label {self.label!r}")


@dataclass(frozen=True)
class JndMap:
    """Thresholds aligned with the padded image's block grid.

    ``thresholds`` has shape (block_rows, block_cols, 8, 8), all entries
    finite and strictly positive.
    """

    thresholds: np.ndarray

    def __post_init__(self):
        t = self.thresholds
        if t.ndim != 4 or t.shape[2:] != (BLOCK, BLOCK):
            raise ValueError(f"thresholds must be (rows, cols, 8, 8), got {t.shape}")
        if not np.all(np.isfinite(t)) or not np.all(t > 0):
            raise ValueError("thresholds must be finite and > 0")

    @property
    def block_rows(self) -> int:
        return self.thresholds.shape[0]

    @property
    def block_cols(self) -> int:
        return self.thresholds.shape[1]


def spatial_frequency(u, v, params: CsfParams):
    """Cycles per degree of DCT position (u, v) under the viewing geometry."""
    return np.hypot(u, v) * params.pixels_per_degree() / (2.0 * BLOCK)


def csf_base(u, v, params: CsfParams = CsfParams()):
    """Base visibility threshold for coefficient (u, v); strictly positive.

    Thresholds rise with spatial frequency (high-frequency basis functions
    need larger coefficients to be visible) and on oblique orientations.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    omega = spatial_frequency(u, v, params)
    band = np.exp(params.c * omega) / (params.a + params.b * omega)

    # orthonormal-DCT basis amplitude normalization
    phi_u = np.where(u == 0, math.sqrt(1.0 / BLOCK), math.sqrt(2.0 / BLOCK))
    phi_v = np.where(v == 0, math.sqrt(1.0 / BLOCK), math.sqrt(2.0 / BLOCK))

    # oblique effect: diagonal orientations are less visible
    sumsq = u * u + v * v
    with np.errstate(invalid="ignore", divide="ignore"):
        sin_phi = np.where(sumsq > 0, 2.0 * u * v / np.where(sumsq > 0, sumsq, 1.0), 0.0)
    cos2 = 1.0 - sin_phi**2
    r = params.oblique
    oblique = 1.0 / (r + (1.0 - r) * cos2)

    return band * oblique / (phi_u * phi_v)


def csf_base_table(params: CsfParams = CsfParams()) -> np.ndarray:
    return csf_base(_U, _V, params)


def luminance_adaptation(mean_luma, params: LaParams = LaParams()):
    """Threshold elevation from block mean luma; >= 1, minimum on the plateau."""
    m = np.asarray(mean_luma, dtype=np.float64)
    dark = 1.0 + (params.dark_knee - m) / params.dark_scale
    bright = 1.0 + (m - params.bright_knee) / params.bright_scale
    return np.where(m <= params.dark_knee, dark, np.where(m >= params.bright_knee, bright, 1.0))


def _block_energies(coeffs: np.ndarray, params: ClassifierParams):
    """Absolute-coefficient sums over the low-frequency-AC and HF regions."""
    pos = dct.ZIGZAG_POSITION
    lf_ac = (pos >= 1) & (pos < params.lf_split)
    hf = pos >= params.lf_split
    mag = np.abs(coeffs)
    edge_energy = mag[..., lf_ac].sum(axis=-1)
    texture_energy = mag[..., hf].sum(axis=-1)
    return edge_energy, texture_energy


def classify_blocks(coeffs: np.ndarray, params: ClassifierParams = ClassifierParams()):
    """Label a stack (..., 8, 8) of coefficient blocks; 0=plane 1=edge 2=texture."""
    edge_energy, texture_energy = _block_energies(coeffs, params)
    total = edge_energy + texture_energy
    labels = np.full(total.shape, 2, dtype=np.intp)
    with np.errstate(invalid="ignore", divide="ignore"):
        lf_share = np.where(total > 0, edge_energy / np.where(total > 0, total, 1.0), 0.0)
    labels[lf_share >= params.edge_ratio] = 1
    labels[total < params.plane_energy] = 0
    return labels, edge_energy, texture_energy


_LABEL_NAMES = (PLANE, EDGE, TEXTURE)


def classify_block(coeffs: np.ndarray, params: ClassifierParams = ClassifierParams()) -> BlockClass:
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape != (BLOCK, BLOCK):
        raise ValueError(f"expected an (8, 8) block, got {coeffs.shape}")
    labels, edge_energy, texture_energy = classify_blocks(coeffs[None], params)
    return BlockClass(
        label=_LABEL_NAMES[labels[0]],
        edge_energy=float(edge_energy[0]),
        texture_energy=float(texture_energy[0]),
    )


def contrast_masking(
    coeffs: np.ndarray,
    base: np.ndarray,
    block_class: BlockClass,
    params: JndParams = JndParams(),
) -> np.ndarray:
    """Per-(u, v) masking factors for one block given its CSF*LA base."""
    labels = np.array([_LABEL_NAMES.index(block_class.label)], dtype=np.intp)
    return contrast_masking_blocks(
        np.asarray(coeffs, dtype=np.float64)[None], np.asarray(base)[None], labels, params
    )[0]


def contrast_masking_blocks(
    coeffs: np.ndarray, base: np.ndarray, labels: np.ndarray, params: JndParams
) -> np.ndarray:
    if not params.enable_cm:
        return np.ones_like(np.asarray(base, dtype=np.float64))
    cm = params.cm
    ratio = np.abs(coeffs) / base
    with np.errstate(invalid="ignore"):
        factors = np.clip(ratio**cm.exponent, 1.0, cm.max_gain)
    protected = (_U**2 + _V**2) <= cm.protect_radius_sq
    non_texture = (labels != 2)[..., None, None]
    return np.where(protected & non_texture, 1.0, factors)


def saliency_factors(saliency_map: ImagePlane, params: JndParams) -> np.ndarray:
    """Per-block J_SA factors from a saliency image (same size as the input)."""
    padded = pad_to_blocks(saliency_map).array()
    means = tile_blocks(padded).mean(axis=(-2, -1))
    sa = params.sa
    return sa.factor_background + (sa.factor_salient - sa.factor_background) * means / 255.0


def compute_jnd_map(
    plane: ImagePlane,
    params: JndParams = JndParams(),
    saliency: np.ndarray | None = None,
) -> JndMap:
    """Thresholds for every block of the (edge-padded) image.

    ``saliency`` is an optional (block_rows, block_cols) array of J_SA
    factors, used only when ``enable_sa`` is set; without it the saliency
    term is the identity.
    """
    padded = pad_to_blocks(plane).array()
    tiles = tile_blocks(padded)
    coeffs = dct.dct8_forward(tiles)

    base = csf_base_table(params.csf)[None, None]
    la = luminance_adaptation(tiles.mean(axis=(-2, -1)), params.la)[..., None, None]
    labels, _, _ = classify_blocks(coeffs, params.classifier)
    cm = contrast_masking_blocks(coeffs, base * la, labels, params)

    thresholds = params.s * base * la * cm
    if params.enable_sa and saliency is not None:
        sal = np.asarray(saliency, dtype=np.float64)
        if sal.shape != tiles.shape[:2]:
            raise ValueError(
                f"saliency factors shape {sal.shape} does not match block grid {tiles.shape[:2]}"
            )
        if not np.all(sal > 0):
            raise ValueError("saliency factors must be > 0")
        thresholds = thresholds * sal[..., None, None]
    return JndMap(thresholds=thresholds)


def default_params() -> JndParams:
    return JndParams()
