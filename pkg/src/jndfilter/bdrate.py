"""Bjøntegaard delta bitrate between two rate-quality curves.

The classic computation: fit log10(bitrate) as a function of the quality
metric for each curve, integrate the difference over the overlapping quality
interval, average, and convert back from the log domain. A negative result
means the test curve needs less bitrate than the anchor at equal quality.

With exactly four points the fit is the classic cubic polynomial (which
interpolates them); with more points a piecewise-cubic monotone (PCHIP)
interpolant is used instead, since a single cubic is not a faithful model of
longer sweeps. Both integrals are evaluated analytically.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.interpolate import PchipInterpolator

MIN_POINTS = 4


def _as_curve(rates, qualities, label: str):
    r = np.asarray(rates, dtype=np.float64)
    q = np.asarray(qualities, dtype=np.float64)
    if r.ndim != 1 or q.ndim != 1 or len(r) != len(q):
        raise ValueError(f"{label}: rates and qualities must be 1-D and equally long")
    if not (np.all(np.isfinite(r)) and np.all(np.isfinite(q))):
        raise ValueError(f"{label}: curve contains non-finite values")
    if np.any(r <= 0):
        raise ValueError(f"{label}: bitrates must be strictly positive")
    order = np.argsort(q, kind="stable")
    return r[order], q[order]


def _prune_non_monotone(rates, qualities, label: str):
    """Drop points until quality and rate are strictly increasing together.

    On each violation between neighbors, the point with the smaller rate gap
    to its remaining neighborhood is discarded (it carries less of the
    curve's rate span), with a warning.
    """
    r = list(rates)
    q = list(qualities)
    while True:
        bad = None
        for i in range(len(r) - 1):
            if not (q[i + 1] > q[i] and r[i + 1] > r[i]):
                bad = i
                break
        if bad is None:
            return np.array(r), np.array(q)

        def rate_gap(idx):
            gaps = []
            if idx > 0:
                gaps.append(abs(r[idx] - r[idx - 1]))
            if idx + 1 < len(r):
                gaps.append(abs(r[idx + 1] - r[idx]))
            return min(gaps) if gaps else 0.0

        drop = bad if rate_gap(bad) < rate_gap(bad + 1) else bad + 1
        warnings.warn(
            f"{label}: dropping non-monotone point (rate={r[drop]:g}, quality={q[drop]:g})",
            stacklevel=3,
        )
        del r[drop], q[drop]


def _log_rate_integral(rates, qualities, lo: float, hi: float) -> float:
    log_rate = np.log10(rates)
    if len(rates) == MIN_POINTS:
        poly = np.polyfit(qualities, log_rate, 3)
        anti = np.polyint(poly)
        return float(np.polyval(anti, hi) - np.polyval(anti, lo))
    anti = PchipInterpolator(qualities, log_rate).antiderivative()
    return float(anti(hi) - anti(lo))


def bd_rate(anchor_rates, anchor_qualities, test_rates, test_qualities) -> float:
    """Average bitrate difference of test vs anchor in percent.

    Each curve needs at least four usable points and the quality ranges must
    overlap. Input point order is irrelevant; non-monotone points are pruned
    with a warning and become fatal only when fewer than four points remain.
    """
    ra, qa = _as_curve(anchor_rates, anchor_qualities, "anchor")
    rt, qt = _as_curve(test_rates, test_qualities, "test")
    if len(ra) < MIN_POINTS or len(rt) < MIN_POINTS:
        raise ValueError(
            f"need at least {MIN_POINTS} points per curve, got {len(ra)} and {len(rt)}"
        )
    ra, qa = _prune_non_monotone(ra, qa, "anchor")
    rt, qt = _prune_non_monotone(rt, qt, "test")
    if len(ra) < MIN_POINTS or len(rt) < MIN_POINTS:
        raise ValueError("fewer than four monotone points remain after pruning")

    lo = max(qa.min(), qt.min())
    hi = min(qa.max(), qt.max())
    if not hi > lo:
        raise ValueError(
            f"quality ranges do not overlap (anchor [{qa.min():g}, {qa.max():g}], "
            f"test [{qt.min():g}, {qt.max():g}])"
        )

    int_anchor = _log_rate_integral(ra, qa, lo, hi)
    int_test = _log_rate_integral(rt, qt, lo, hi)
    avg_diff = (int_test - int_anchor) / (hi - lo)
    return float((10.0**avg_diff - 1.0) * 100.0)
