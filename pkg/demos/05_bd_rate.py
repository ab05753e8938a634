"""Reading and computing Bjøntegaard delta bitrate.

Builds rate-quality curves by hand to show what the number means: a curve
shifted to 90% of the anchor's bitrate at identical quality is exactly a
-10% BD-rate, quality gains convert into rate savings through the slope of
the curve, and the sign convention is anchored so negative = cheaper.
"""

import numpy as np

from jndfilter.bdrate import bd_rate

anchor_rates = np.array([9400.0, 5200.0, 2700.0, 1500.0])  # bits, QP 27..42
anchor_psnr = np.array([42.8, 39.9, 36.7, 33.8])

print("anchor curve (bits, psnr):")
for r, q in zip(anchor_rates, anchor_psnr):
    print(f"  {r:>8.0f}  {q:.1f}")

cases = {
    "identical curve": (anchor_rates, anchor_psnr),
    "10% cheaper everywhere": (anchor_rates * 0.90, anchor_psnr),
    "10% dearer everywhere": (anchor_rates * 1.10, anchor_psnr),
    "+0.5 dB at same rate": (anchor_rates, anchor_psnr + 0.5),
    "-0.5 dB at same rate": (anchor_rates, anchor_psnr - 0.5),
}

print(f"\n{'test curve':<26} {'BD-rate':>9}")
for name, (rates, quals) in cases.items():
    value = bd_rate(anchor_rates, anchor_psnr, rates, quals)
    print(f"{name:<26} {value:>8.2f}%")

print("\nA quality gain at fixed rate shows up as a bitrate saving because")
print("the integration runs over the quality axis: the +0.5 dB curve reaches")
print("each quality level at the bitrate the anchor needed half a dB earlier.")

# Order of the points never matters; the computation sorts internally.
perm = np.random.default_rng(0).permutation(4)
shuffled = bd_rate(anchor_rates[perm], anchor_psnr[perm],
                   (anchor_rates * 0.9)[perm], anchor_psnr[perm])
print(f"\nshuffled point order gives the same answer: {shuffled:.2f}%")
