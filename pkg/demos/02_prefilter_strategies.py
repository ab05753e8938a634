"""Pre-filtering an image with every injection strategy.

Shows how much frequency-domain energy each strategy deletes, that the
deletion is (by design) hard to see, and saves the filtered images next to
this script for visual inspection.
"""

from pathlib import Path


from jndfilter import dct
from jndfilter.image import pad_to_blocks, save_image, tile_blocks
from jndfilter.injection import InjectionConfig, apply_prefilter
from jndfilter.metrics import psnr, ssim
from jndfilter.testimages import synthetic_natural

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

image = synthetic_natural(128, 128, seed=3)
save_image(image, out_dir / "original.pgm")


def block_energy(plane):
    coeffs = dct.dct8_forward(tile_blocks(pad_to_blocks(plane).array()))
    return float((coeffs**2).sum())


e_orig = block_energy(image)
print(f"original frequency-domain energy: {e_orig:.3e}\n")
print(f"{'strategy':<20} {'energy kept':>12} {'psnr dB':>9} {'ssim':>7}")

for strategy in ("suppress_basic", "suppress_weighted", "suppress_blocktype", "gaussian"):
    filtered = apply_prefilter(image, cfg=InjectionConfig(strategy))
    save_image(filtered, out_dir / f"{strategy}.pgm")
    kept = block_energy(filtered) / e_orig
    p = psnr(image, filtered).value
    s = ssim(image, filtered).value
    print(f"{strategy:<20} {kept:>11.1%} {p:>9.2f} {s:>7.4f}")

print(f"\nfiltered images written to {out_dir}/")
print("The deleted energy is exactly what the JND model predicts the eye")
print("cannot resolve at the configured viewing distance, which is why the")
print("SSIM scores stay near 1 while a real encoder saves bits downstream.")
