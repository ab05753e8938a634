"""The metric suite under controlled degradation.

Adds growing Gaussian noise to a test image and prints all four metrics,
then demonstrates the property that separates PSNR-HVS-M from plain PSNR:
noise hidden in busy texture is penalized less than noise on flat areas.
"""

import warnings

import numpy as np

from jndfilter.metrics import compute_all, psnr, psnr_hvsm
from jndfilter.testimages import add_noise, synthetic_natural

warnings.filterwarnings("ignore", message="image .* too small")

image = synthetic_natural(128, 128, seed=3)

print(f"{'noise sigma':>11} {'psnr':>8} {'psnr_hvsm':>10} {'ssim':>8} {'msssim':>8}")
for sigma in (0.0, 2.0, 5.0, 10.0, 20.0, 40.0):
    noisy = add_noise(image, sigma, seed=17) if sigma else image
    values = {name: mv.value for name, mv in compute_all(image, noisy).items()}
    print(f"{sigma:>11.1f} {values['psnr']:>8.2f} {values['psnr_hvsm']:>10.2f} "
          f"{values['ssim']:>8.4f} {values['msssim']:>8.4f}")

# Masking: the same noise power on flat vs textured content
rng = np.random.default_rng(0)
flat = np.full((64, 64), 128.0)
texture = np.clip(128 + 55 * rng.standard_normal((64, 64)), 0, 255)
noise = rng.normal(0, 6, (64, 64))

print("\nsame noise, different content:")
for name, ref in (("flat mid-gray", flat), ("strong texture", texture)):
    dist = np.clip(ref + noise, 0, 255)
    print(f"  {name:<15} psnr {psnr(ref, dist).value:6.2f} dB   "
          f"psnr_hvsm {psnr_hvsm(ref, dist).value:6.2f} dB")
print("\nPSNR barely moves between the two, while PSNR-HVS-M credits the")
print("texture for masking the noise, matching what a viewer reports.")
