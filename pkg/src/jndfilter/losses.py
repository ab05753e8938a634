"""Hybrid spatial/frequency loss kernels with analytic gradients.

The total loss combines pixel fidelity (Charbonnier), multi-scale structural
similarity, and two frequency-domain terms on 8x8 DCT blocks: a residual
energy term against the reference and a bidirectional conservation term
against the original input (low frequencies must not lose magnitude, high
frequencies must not gain any). Every kernel returns its scalar value and
the gradient with respect to the first image, so any external optimizer can
drive them; gradients are validated against central finite differences in
the test suite and the built-in self-test.

Conventions (fixed, documented): spatial terms normalize pixels to [0, 1]
internally; frequency terms use the raw 0..255 scale. Frequency terms are
the mean over blocks of the per-block coefficient sums, making magnitudes
independent of image size. Gradients are always reported on the raw 0..255
input scale.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.ndimage

from . import dct
from .image import BLOCK, ImagePlane

# Multi-scale structural similarity constants: 11-tap Gaussian window with
# sigma 1.5, stabilizers (0.01)^2 and (0.03)^2 on the unit pixel scale, and
# the usual five scale exponents renormalized to sum exactly to 1.
_WINDOW_SIZE = 11
_WINDOW_SIGMA = 1.5
_C1 = 0.01**2
_C2 = 0.03**2
_RAW_SCALE_WEIGHTS = np.array([0.0448, 0.2856, 0.3001, 0.2363, 0.1333])
MSSSIM_SCALE_WEIGHTS = _RAW_SCALE_WEIGHTS / _RAW_SCALE_WEIGHTS.sum()
MSSSIM_SCALE_WEIGHTS.setflags(write=False)


@dataclass(frozen=True)
class LossWeights:
    lambda1: float = 1.0
    lambda2: float = 0.16
    lambda3: float = 0.02
    k: int = 10
    charbonnier_eps: float = 1e-3

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "lambda3"):
            w = getattr(self, name)
            if not (np.isfinite(w) and w >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {w}")
        if not 1 <= self.k <= 63:
            raise ValueError(f"zigzag cutoff k must be in 1..63, got {self.k}")
        if not self.charbonnier_eps > 0:
            raise ValueError("charbonnier_eps must be > 0")


@dataclass(frozen=True)
class LossReport:
    l_c: float
    l_m: float
    l_res: float
    l_cons: float
    l_freq: float
    l_all: float
    grad: np.ndarray | None = None

    def as_dict(self) -> dict:
        return {
            "l_c": self.l_c,
            "l_m": self.l_m,
            "l_res": self.l_res,
            "l_cons": self.l_cons,
            "l_freq": self.l_freq,
            "l_all": self.l_all,
        }


def _as_float(img) -> np.ndarray:
    if isinstance(img, ImagePlane):
        return img.to_float().data
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {arr.shape}")
    return arr


def _check_same_dims(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"image dimensions differ: {a.shape} vs {b.shape}")


# ---------------------------------------------------------------------------
# Charbonnier

def charbonnier(i_f, i_gt, eps: float = 1e-3):
    """Zero-anchored Charbonnier penalty: mean(sqrt(d^2 + eps^2) - eps).

    Returns (value, gradient). `d` is the pixel difference on the [0, 1]
    scale; the subtraction anchors the value at exactly 0 for identical
    images.
    """
    x, y = _as_float(i_f), _as_float(i_gt)
    _check_same_dims(x, y)
    d = (x - y) / 255.0
    core = np.sqrt(d * d + eps * eps)
    # anchor elementwise with the formula's own value at d = 0, so identical
    # inputs give exactly 0.0
    value = float((core - np.sqrt(eps * eps)).mean())
    grad = d / core / (d.size * 255.0)
    return value, grad


# ---------------------------------------------------------------------------
# Multi-scale structural similarity

def _gaussian_window(size: int = _WINDOW_SIZE, sigma: float = _WINDOW_SIGMA) -> np.ndarray:
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    k = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    return k / k.sum()


def _filter_valid(x: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Separable correlation keeping only fully supported output pixels."""
    r = len(k) // 2
    t = scipy.ndimage.correlate1d(x, k, axis=0, mode="constant")[r : x.shape[0] - r]
    t = scipy.ndimage.correlate1d(t, k, axis=1, mode="constant")
    return t[:, r : x.shape[1] - r]


def _filter_adjoint(g: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`_filter_valid` (scatter back over window supports)."""
    return _filter_valid(np.pad(g, len(k) - 1), k)


def _downsample(x: np.ndarray) -> np.ndarray:
    h2, w2 = x.shape[0] // 2, x.shape[1] // 2
    c = x[: 2 * h2, : 2 * w2]
    return (c[0::2, 0::2] + c[1::2, 0::2] + c[0::2, 1::2] + c[1::2, 1::2]) / 4.0


def _downsample_adjoint(g: np.ndarray, shape) -> np.ndarray:
    out = np.zeros(shape)
    q = g / 4.0
    h2, w2 = g.shape
    out[0 : 2 * h2 : 2, 0 : 2 * w2 : 2] = q
    out[1 : 2 * h2 : 2, 0 : 2 * w2 : 2] = q
    out[0 : 2 * h2 : 2, 1 : 2 * w2 : 2] = q
    out[1 : 2 * h2 : 2, 1 : 2 * w2 : 2] = q
    return out


def msssim_scale_count(height: int, width: int, max_scales: int = 5) -> int:
    """Largest usable scale count: every scale must fit the 11-tap window."""
    scales = 0
    size = min(height, width)
    while scales < max_scales and size >= _WINDOW_SIZE:
        scales += 1
        size //= 2
    return scales


def _msssim_engine(x_raw: np.ndarray, y_raw: np.ndarray, scales=None, with_grad=True):
    """MS-SSIM value and (optionally) its gradient with respect to x_raw."""
    _check_same_dims(x_raw, y_raw)
    usable = msssim_scale_count(*x_raw.shape)
    if usable < 1:
        raise ValueError(
            f"image {x_raw.shape} is smaller than the {_WINDOW_SIZE}-tap window"
        )
    if scales is None:
        scales = min(5, usable)
        if scales < 5:
            warnings.warn(
                f"image {x_raw.shape} too small for 5 scales; using {scales}",
                stacklevel=3,
            )
    elif not 1 <= scales <= usable:
        raise ValueError(f"scale count {scales} unusable for image {x_raw.shape}")

    weights = MSSSIM_SCALE_WEIGHTS[:scales] / MSSSIM_SCALE_WEIGHTS[:scales].sum()
    k = _gaussian_window()

    xs, ys = [x_raw / 255.0], [y_raw / 255.0]
    for _ in range(scales - 1):
        xs.append(_downsample(xs[-1]))
        ys.append(_downsample(ys[-1]))

    factors = []
    stash = []
    for j in range(scales):
        x, y = xs[j], ys[j]
        mu1, mu2 = _filter_valid(x, k), _filter_valid(y, k)
        s11 = _filter_valid(x * x, k) - mu1 * mu1
        s22 = _filter_valid(y * y, k) - mu2 * mu2
        s12 = _filter_valid(x * y, k) - mu1 * mu2
        b_cs = s11 + s22 + _C2
        cs = (2.0 * s12 + _C2) / b_cs
        if j < scales - 1:
            factors.append(cs.mean())
            stash.append((mu1, mu2, b_cs, cs, None, None))
        else:
            b_l = mu1 * mu1 + mu2 * mu2 + _C1
            lum = (2.0 * mu1 * mu2 + _C1) / b_l
            factors.append((lum * cs).mean())
            stash.append((mu1, mu2, b_cs, cs, b_l, lum))

    factors = np.array(factors)
    if np.any(factors <= 0.0):
        # Degenerate anti-correlated input; fractional powers of non-positive
        # factors are undefined, so the similarity floors at 0.
        value = 0.0
        grad = np.zeros_like(x_raw) if with_grad else None
        return value, grad
    value = float(np.prod(factors**weights))
    if not with_grad:
        return value, None

    grad = np.zeros_like(xs[-1])
    for j in reversed(range(scales)):
        x, y = xs[j], ys[j]
        mu1, mu2, b_cs, cs, b_l, lum = stash[j]
        n_valid = cs.size
        coeff = value * weights[j] / factors[j]
        if b_l is None:
            g = (2.0 / n_valid) * (
                y * _filter_adjoint(1.0 / b_cs, k)
                - _filter_adjoint(mu2 / b_cs, k)
                - x * _filter_adjoint(cs / b_cs, k)
                + _filter_adjoint(cs * mu1 / b_cs, k)
            )
        else:
            g = (2.0 / n_valid) * (
                _filter_adjoint(cs * (mu2 - lum * mu1) / b_l, k)
                + y * _filter_adjoint(lum / b_cs, k)
                - _filter_adjoint(lum * mu2 / b_cs, k)
                - x * _filter_adjoint(lum * cs / b_cs, k)
                + _filter_adjoint(lum * cs * mu1 / b_cs, k)
            )
        grad = grad + coeff * g
        if j > 0:
            grad = _downsample_adjoint(grad, xs[j - 1].shape)
    return value, grad / 255.0


def msssim_value(i_f, i_gt, scales=None) -> float:
    """Forward-only MS-SSIM on the 0..255 scale (shared with the metrics)."""
    value, _ = _msssim_engine(_as_float(i_f), _as_float(i_gt), scales, with_grad=False)
    return value


def msssim_loss(i_f, i_gt, scales=None):
    """1 - MS-SSIM and its gradient with respect to the first image."""
    value, grad = _msssim_engine(_as_float(i_f), _as_float(i_gt), scales, with_grad=True)
    return 1.0 - value, -grad


# ---------------------------------------------------------------------------
# Frequency-domain terms

def _pad_indices(size: int) -> np.ndarray:
    padded = -(-size // BLOCK) * BLOCK
    return np.minimum(np.arange(padded), size - 1)


def _blocks_of(arr: np.ndarray) -> np.ndarray:
    """Edge-pad to multiples of 8 and tile into (rows, cols, 8, 8)."""
    sy, sx = _pad_indices(arr.shape[0]), _pad_indices(arr.shape[1])
    padded = arr[sy][:, sx]
    h, w = padded.shape
    return padded.reshape(h // BLOCK, BLOCK, w // BLOCK, BLOCK).swapaxes(1, 2)


def _blocks_adjoint(gblocks: np.ndarray, shape) -> np.ndarray:
    """Scatter block-domain gradients back onto the unpadded image."""
    rows, cols = gblocks.shape[:2]
    gpad = gblocks.swapaxes(1, 2).reshape(rows * BLOCK, cols * BLOCK)
    sy, sx = _pad_indices(shape[0]), _pad_indices(shape[1])
    tmp = np.zeros((shape[0], gpad.shape[1]))
    np.add.at(tmp, sy, gpad)
    out = np.zeros(shape)
    np.add.at(out.T, sx, tmp.T)
    return out


def dct_residual_loss(i_f, i_gt):
    """Mean over blocks of the squared coefficient residual (distillation).

    By Parseval this equals the mean per-block pixel-domain squared error;
    the gradient is nonetheless routed through the inverse transform of the
    coefficient gradient, exercising the same chain an optimizer would use.
    """
    x, y = _as_float(i_f), _as_float(i_gt)
    _check_same_dims(x, y)
    cf = dct.dct8_forward(_blocks_of(x))
    cgt = dct.dct8_forward(_blocks_of(y))
    diff = cf - cgt
    n_blocks = diff.shape[0] * diff.shape[1]
    value = float((diff**2).sum() / n_blocks)
    gcoeff = 2.0 * diff / n_blocks
    grad = _blocks_adjoint(dct.dct8_inverse(gcoeff), x.shape)
    return value, grad


def dct_conservation_loss(i_f, i_o, k: int = 10):
    """Bidirectional magnitude constraint against the original input.

    Low-frequency coefficients (first ``k`` zigzag positions) are penalized
    for losing magnitude, high-frequency ones for gaining it:

        mean over blocks of  sum_LF max(0, |C_o| - |C_f|)^2
                           + sum_HF max(0, |C_f| - |C_o|)^2

    Subgradients at the hinge and at C_f = 0 are taken as 0.
    """
    x, o = _as_float(i_f), _as_float(i_o)
    _check_same_dims(x, o)
    part = dct.partition(k)
    cf = dct.dct8_forward(_blocks_of(x))
    co = dct.dct8_forward(_blocks_of(o))
    n_blocks = cf.shape[0] * cf.shape[1]

    lf_gap = np.maximum(0.0, np.abs(co) - np.abs(cf))
    hf_gap = np.maximum(0.0, np.abs(cf) - np.abs(co))
    value = float(
        ((lf_gap**2)[..., part.lf_mask].sum() + (hf_gap**2)[..., part.hf_mask].sum())
        / n_blocks
    )

    sgn = np.sign(cf)
    gcoeff = np.where(
        part.lf_mask, -2.0 * lf_gap * sgn, 2.0 * hf_gap * sgn
    ) / n_blocks
    grad = _blocks_adjoint(dct.dct8_inverse(gcoeff), x.shape)
    return value, grad


# ---------------------------------------------------------------------------
# Combination

def total_loss(i_f, i_gt, i_o, weights: LossWeights = LossWeights(), with_grad: bool = True) -> LossReport:
    """Weighted hybrid loss; gradient is the same weighted combination."""
    l_c, g_c = charbonnier(i_f, i_gt, weights.charbonnier_eps)
    if with_grad:
        l_m, g_m = msssim_loss(i_f, i_gt)
    else:
        l_m, g_m = 1.0 - msssim_value(i_f, i_gt), None
    l_res, g_res = dct_residual_loss(i_f, i_gt)
    l_cons, g_cons = dct_conservation_loss(i_f, i_o, weights.k)

    l_freq = l_res + l_cons
    l_all = weights.lambda1 * l_c + weights.lambda2 * l_m + weights.lambda3 * l_freq
    grad = None
    if with_grad:
        grad = (
            weights.lambda1 * g_c
            + weights.lambda2 * g_m
            + weights.lambda3 * (g_res + g_cons)
        )
    return LossReport(
        l_c=l_c, l_m=l_m, l_res=l_res, l_cons=l_cons, l_freq=l_freq, l_all=l_all, grad=grad
    )
