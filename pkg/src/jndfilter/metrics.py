"""Full-reference quality metrics on luma planes: PSNR, PSNR-HVS-M, SSIM,
MS-SSIM.

PSNR-family values are capped at 100 dB (identical images would otherwise be
infinite). PSNR-HVS-M follows the reference algorithm of Ponomarenko et al.
(VPQM 2007): CSF-weighted 8x8 DCT coefficient differences with a
between-coefficient contrast-masking reduction; the two 64-entry weight
tables below are the published constants from that reference implementation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dct
from .image import BLOCK
from .losses import _as_float, _filter_valid, _gaussian_window, msssim_value

PSNR_CAP_DB = 100.0

METRIC_NAMES = ("psnr", "psnr_hvsm", "ssim", "msssim")


@dataclass(frozen=True)
class MetricValue:
    name: str
    value: float
    capped: bool = False


# CSF coefficient weights and contrast-masking factors from the PSNR-HVS-M
# reference implementation (Ponomarenko et al., VPQM 2007).
_CSF_WEIGHTS = np.array([
    [1.608443, 2.339554, 2.573509, 1.608443, 1.072295, 0.643377, 0.504610, 0.421887],
    [2.144591, 2.144591, 1.838221, 1.354478, 0.989811, 0.443708, 0.428918, 0.467911],
    [1.838221, 1.979622, 1.608443, 1.072295, 0.643377, 0.451493, 0.372972, 0.459555],
    [1.838221, 1.513829, 1.169777, 0.887417, 0.504610, 0.295806, 0.321689, 0.415082],
    [1.429727, 1.169777, 0.695543, 0.459555, 0.378457, 0.236102, 0.249855, 0.334222],
    [1.072295, 0.735288, 0.467911, 0.402111, 0.317717, 0.247453, 0.227744, 0.279729],
    [0.525206, 0.402111, 0.329937, 0.295806, 0.249855, 0.212687, 0.214459, 0.254803],
    [0.357432, 0.279729, 0.270896, 0.262603, 0.229778, 0.257351, 0.249855, 0.259950],
])
_CSF_WEIGHTS.setflags(write=False)

_MASK_WEIGHTS = np.array([
    [0.390625, 0.826446, 1.000000, 0.390625, 0.173611, 0.062500, 0.038447, 0.026874],
    [0.694444, 0.694444, 0.510204, 0.277008, 0.147929, 0.029727, 0.027778, 0.033058],
    [0.510204, 0.591716, 0.390625, 0.173611, 0.062500, 0.030779, 0.021004, 0.031888],
    [0.510204, 0.346021, 0.206612, 0.118906, 0.038447, 0.013212, 0.015625, 0.026015],
    [0.308642, 0.206612, 0.073046, 0.031888, 0.021626, 0.008417, 0.009426, 0.016866],
    [0.173611, 0.081633, 0.033058, 0.024414, 0.015242, 0.009246, 0.007831, 0.011815],
    [0.041649, 0.024414, 0.016437, 0.013212, 0.009426, 0.006830, 0.006944, 0.009803],
    [0.019290, 0.011815, 0.011080, 0.010412, 0.007972, 0.010000, 0.009426, 0.010203],
])
_MASK_WEIGHTS.setflags(write=False)

_MASK_WEIGHTS_AC = _MASK_WEIGHTS.copy()
_MASK_WEIGHTS_AC[0, 0] = 0.0
_MASK_WEIGHTS_AC.setflags(write=False)


def _pair(ref, dist):
    a, b = _as_float(ref), _as_float(dist)
    if a.shape != b.shape:
        raise ValueError(f"image dimensions differ: {a.shape} vs {b.shape}")
    return a, b


def _capped_psnr(name: str, noise_power: float) -> MetricValue:
    if noise_power <= 0.0:
        return MetricValue(name, PSNR_CAP_DB, capped=True)
    value = 10.0 * np.log10(255.0**2 / noise_power)
    if value >= PSNR_CAP_DB:
        return MetricValue(name, PSNR_CAP_DB, capped=True)
    return MetricValue(name, float(value))


def psnr(ref, dist) -> MetricValue:
    a, b = _pair(ref, dist)
    return _capped_psnr("psnr", float(((a - b) ** 2).mean()))


def _edge_pad_to_blocks(arr: np.ndarray) -> np.ndarray:
    ph = -(-arr.shape[0] // BLOCK) * BLOCK
    pw = -(-arr.shape[1] // BLOCK) * BLOCK
    return np.pad(arr, ((0, ph - arr.shape[0]), (0, pw - arr.shape[1])), mode="edge")


def _tile(arr: np.ndarray) -> np.ndarray:
    h, w = arr.shape
    return arr.reshape(h // BLOCK, BLOCK, w // BLOCK, BLOCK).swapaxes(1, 2).reshape(-1, BLOCK, BLOCK)


def _sum_sq_dev(blocks: np.ndarray, region) -> np.ndarray:
    # MATLAB-style vari: sample variance (ddof=1) times the element count
    sub = blocks[:, region[0], region[1]] if isinstance(region, tuple) else blocks
    flat = sub.reshape(len(blocks), -1)
    return np.var(flat, axis=1, ddof=1) * flat.shape[1]


def _masking_energy(blocks: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    m = ((coeffs**2) * _MASK_WEIGHTS_AC).sum(axis=(-2, -1))
    pop = _sum_sq_dev(blocks, None)
    quad = (
        _sum_sq_dev(blocks, (slice(0, 4), slice(0, 4)))
        + _sum_sq_dev(blocks, (slice(0, 4), slice(4, 8)))
        + _sum_sq_dev(blocks, (slice(4, 8), slice(0, 4)))
        + _sum_sq_dev(blocks, (slice(4, 8), slice(4, 8)))
    )
    ratio = np.where(pop != 0.0, quad / np.where(pop != 0.0, pop, 1.0), 0.0)
    return np.sqrt(m * ratio) / 32.0


def psnr_hvsm(ref, dist) -> MetricValue:
    """CSF-weighted DCT-domain PSNR with between-coefficient masking.

    The masking threshold uses the larger of the two per-block masking
    energies, making the metric symmetric in its arguments.
    """
    a, b = _pair(ref, dist)
    ba = _tile(_edge_pad_to_blocks(a))
    bb = _tile(_edge_pad_to_blocks(b))
    ca = dct.dct8_forward(ba)
    cb = dct.dct8_forward(bb)

    mask = np.maximum(_masking_energy(ba, ca), _masking_energy(bb, cb))
    u = np.abs(ca - cb)
    reduced = np.maximum(u - mask[:, None, None] / _MASK_WEIGHTS, 0.0)
    reduced[:, 0, 0] = u[:, 0, 0]
    weighted = (reduced * _CSF_WEIGHTS) ** 2
    return _capped_psnr("psnr_hvsm", float(weighted.mean()))


_SSIM_C1 = (0.01 * 255.0) ** 2
_SSIM_C2 = (0.03 * 255.0) ** 2


def ssim(ref, dist) -> MetricValue:
    """Single-scale SSIM, 11-tap Gaussian window (sigma 1.5), valid pixels."""
    a, b = _pair(ref, dist)
    k = _gaussian_window()
    if min(a.shape) < len(k):
        raise ValueError(f"image {a.shape} smaller than the {len(k)}-tap SSIM window")
    mu1, mu2 = _filter_valid(a, k), _filter_valid(b, k)
    s11 = _filter_valid(a * a, k) - mu1 * mu1
    s22 = _filter_valid(b * b, k) - mu2 * mu2
    s12 = _filter_valid(a * b, k) - mu1 * mu2
    ssim_map = ((2 * mu1 * mu2 + _SSIM_C1) * (2 * s12 + _SSIM_C2)) / (
        (mu1 * mu1 + mu2 * mu2 + _SSIM_C1) * (s11 + s22 + _SSIM_C2)
    )
    return MetricValue("ssim", float(ssim_map.mean()))


def msssim(ref, dist) -> MetricValue:
    """Multi-scale SSIM; scale count auto-reduces on small images."""
    return MetricValue("msssim", msssim_value(_as_float(ref), _as_float(dist)))


_FUNCS = {"psnr": psnr, "psnr_hvsm": psnr_hvsm, "ssim": ssim, "msssim": msssim}


def compute(name: str, ref, dist) -> MetricValue:
    try:
        fn = _FUNCS[name]
    except KeyError:
        raise ValueError(f"unknown metric {name!r}; expected one of {METRIC_NAMES}") from None
    return fn(ref, dist)


def compute_all(ref, dist) -> dict[str, MetricValue]:
    return {name: _FUNCS[name](ref, dist) for name in METRIC_NAMES}
