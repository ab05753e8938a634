"""Frequency-domain JND-guided pre-filtering for perceptual image coding.

The package splits into small layers: image IO and 8x8 tiling
(:mod:`jndfilter.image`), the orthonormal DCT and zigzag partition
(:mod:`jndfilter.dct`), the JND threshold model (:mod:`jndfilter.jnd`),
coefficient injection (:mod:`jndfilter.injection`), hybrid loss kernels with
analytic gradients (:mod:`jndfilter.losses`), quality metrics
(:mod:`jndfilter.metrics`), BD-rate (:mod:`jndfilter.bdrate`), and the
encoder benchmark harness (:mod:`jndfilter.bench`). The ``jndfilter``
console command exposes the whole pipeline.

Top-level names resolve lazily so that light entry points (such as the stub
codec child process) do not pay for the whole scientific stack.
"""

import importlib

__version__ = "0.1.0"

_EXPORTS = {
    "ImagePlane": "image",
    "load_image": "image",
    "pad_to_blocks": "image",
    "save_image": "image",
    "InjectionConfig": "injection",
    "apply_prefilter": "injection",
    "gaussian_inject": "injection",
    "suppress_coeff": "injection",
    "JndMap": "jnd",
    "JndParams": "jnd",
    "compute_jnd_map": "jnd",
    "LossReport": "losses",
    "LossWeights": "losses",
    "total_loss": "losses",
    "MetricValue": "metrics",
    "msssim": "metrics",
    "psnr": "metrics",
    "psnr_hvsm": "metrics",
    "ssim": "metrics",
    "bd_rate": "bdrate",
}

__all__ = sorted(_EXPORTS) + ["__version__"]


def __getattr__(name):
    try:
        module_name = _EXPORTS[name]
    except KeyError:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}") from None
    value = getattr(importlib.import_module(f".{module_name}", __name__), name)
    globals()[name] = value
    return value


def __dir__():
    return __all__
