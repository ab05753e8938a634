"""Built-in numerical verification, runnable on any install.

Ships the independent oracles used during development so users can confirm
the numerics on their own hardware: finite-difference gradient checks for
every loss kernel, transform property checks against a hard-coded zigzag
table and direct energy computations, the injection formula against a
scalar oracle, and the BD-rate computation against a dense trapezoidal
integration of independently fitted cubics.
"""

from __future__ import annotations

import numpy as np

from . import bdrate, dct, injection, losses, metrics

# Canonical JPEG zigzag scan as (u, v) pairs; independent reference for the
# generated table.
ZIGZAG_REFERENCE = (
    (0, 0), (0, 1), (1, 0), (2, 0), (1, 1), (0, 2), (0, 3), (1, 2),
    (2, 1), (3, 0), (4, 0), (3, 1), (2, 2), (1, 3), (0, 4), (0, 5),
    (1, 4), (2, 3), (3, 2), (4, 1), (5, 0), (6, 0), (5, 1), (4, 2),
    (3, 3), (2, 4), (1, 5), (0, 6), (0, 7), (1, 6), (2, 5), (3, 4),
    (4, 3), (5, 2), (6, 1), (7, 0), (7, 1), (6, 2), (5, 3), (4, 4),
    (3, 5), (2, 6), (1, 7), (2, 7), (3, 6), (4, 5), (5, 4), (6, 3),
    (7, 2), (7, 3), (6, 4), (5, 5), (4, 6), (3, 7), (4, 7), (5, 6),
    (6, 5), (7, 4), (7, 5), (6, 6), (5, 7), (6, 7), (7, 6), (7, 7),
)


def finite_difference_gradient(f, x: np.ndarray, step: float = 1e-3) -> np.ndarray:
    """Central finite differences of a scalar function of a 2-D array."""
    grad = np.zeros_like(x, dtype=np.float64)
    for i in range(x.shape[0]):
        for j in range(x.shape[1]):
            xp = x.copy()
            xp[i, j] += step
            xm = x.copy()
            xm[i, j] -= step
            grad[i, j] = (f(xp) - f(xm)) / (2.0 * step)
    return grad


def gradient_relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    denom = max(float(np.linalg.norm(numeric)), 1e-300)
    return float(np.linalg.norm(analytic - numeric)) / denom


def bd_rate_oracle(anchor_rates, anchor_qualities, test_rates, test_qualities, samples=200_001):
    """Independent BD-rate: interpolating cubic via a Vandermonde solve,
    integrated by dense trapezoids."""

    def log_curve(rates, qualities):
        q = np.asarray(qualities, dtype=np.float64)
        order = np.argsort(q)
        q = q[order]
        lr = np.log10(np.asarray(rates, dtype=np.float64)[order])
        coeffs = np.linalg.solve(np.vander(q, 4), lr)
        return q, coeffs

    qa, ca = log_curve(anchor_rates, anchor_qualities)
    qt, ct = log_curve(test_rates, test_qualities)
    lo, hi = max(qa.min(), qt.min()), min(qa.max(), qt.max())
    grid = np.linspace(lo, hi, samples)
    diff = np.polyval(ct, grid) - np.polyval(ca, grid)
    avg = np.trapezoid(diff, grid) / (hi - lo)
    return (10.0**avg - 1.0) * 100.0


# ---------------------------------------------------------------------------
# Check battery

def _check_dct(rng):
    blocks = rng.uniform(-128, 128, size=(1000, 8, 8))
    coeffs = dct.dct8_forward(blocks)
    back = dct.dct8_inverse(coeffs)
    roundtrip = float(np.abs(back - blocks).max())

    energy_pix = (blocks**2).sum(axis=(-2, -1))
    energy_coef = (coeffs**2).sum(axis=(-2, -1))
    parseval = float(np.abs(energy_coef - energy_pix).max() / energy_pix.max())

    m = dct.transform_matrix()
    ortho = float(np.abs(m @ m.T - np.eye(64)).max())

    ok = roundtrip < 1e-9 and parseval < 1e-6 and ortho < 1e-12
    return ok, f"roundtrip {roundtrip:.2e}, parseval {parseval:.2e}, orthonormal {ortho:.2e}"


def _check_zigzag(rng):
    ok = dct.ZIGZAG_ORDER == ZIGZAG_REFERENCE
    return ok, "generated scan matches the 64-entry reference table"


def _check_injection(rng):
    n = 10_000
    c_o = rng.uniform(-60, 60, size=n)
    j_t = rng.uniform(0.1, 40, size=n)
    p = rng.uniform(0, 1, size=n)
    got = injection.suppress_coeff(c_o, j_t, p)

    oracle = np.empty(n)
    for i in range(n):
        if abs(c_o[i]) < j_t[i]:
            oracle[i] = 0.0
        else:
            oracle[i] = np.sign(c_o[i]) * np.sqrt(c_o[i] * c_o[i] - p[i] * (j_t[i] * j_t[i]))
    exact = np.array_equal(got, oracle)
    dead_zone = np.all(got[np.abs(c_o) < j_t] == 0.0)
    shrinks = np.all(np.abs(got) <= np.abs(c_o))
    signs = np.all((got == 0) | (np.sign(got) == np.sign(c_o)))
    ok = exact and dead_zone and shrinks and signs
    return ok, f"oracle match {exact}, dead-zone {dead_zone}, |C_f|<=|C_o| {shrinks}, sign {signs}"


def _check_loss_gradients(rng):
    x = rng.uniform(0, 255, size=(16, 16))
    y = np.clip(x + rng.normal(0, 12, size=(16, 16)), 0, 255)
    o = np.clip(x + rng.normal(0, 9, size=(16, 16)), 0, 255)

    checks = {
        "charbonnier": (lambda a: losses.charbonnier(a, y)[0], losses.charbonnier(x, y)[1], 1e-4),
        "msssim": (lambda a: losses.msssim_loss(a, y, scales=1)[0],
                   losses.msssim_loss(x, y, scales=1)[1], 1e-3),
        "dct_residual": (lambda a: losses.dct_residual_loss(a, y)[0],
                         losses.dct_residual_loss(x, y)[1], 1e-4),
        "dct_conservation": (lambda a: losses.dct_conservation_loss(a, o, 10)[0],
                             losses.dct_conservation_loss(x, o, 10)[1], 1e-4),
    }
    worst = {}
    ok = True
    for name, (fn, analytic, tol) in checks.items():
        err = gradient_relative_error(analytic, finite_difference_gradient(fn, x))
        worst[name] = err
        ok = ok and err <= tol
    detail = ", ".join(f"{k} {v:.2e}" for k, v in worst.items())
    return ok, detail


def _check_bd_rate(rng):
    rates = np.array([8000.0, 4500.0, 2600.0, 1500.0])
    quals = np.array([42.0, 39.5, 36.8, 33.9])
    zero = bdrate.bd_rate(rates, quals, rates, quals)
    shift = bdrate.bd_rate(rates, quals, rates * 1.10, quals)

    worst = 0.0
    worst_anti = 0.0
    for _ in range(20):
        qa = np.sort(rng.uniform(30, 34, 4).cumsum() / 2 + 30)
        ra = np.sort(rng.uniform(1000, 2000, 4).cumsum())
        qt = qa + rng.uniform(-0.4, 0.4, 4)
        rt = ra * rng.uniform(0.8, 1.2)
        got = bdrate.bd_rate(ra, qa, rt, qt)
        want = bd_rate_oracle(ra, qa, rt, qt)
        worst = max(worst, abs(got - want))
        anti = (1 + got / 100.0) * (1 + bdrate.bd_rate(rt, qt, ra, qa) / 100.0) - 1.0
        worst_anti = max(worst_anti, abs(anti))

    ok = zero == 0.0 and abs(shift - 10.0) < 1e-6 and worst < 0.01 and worst_anti < 1e-6
    return ok, (
        f"identity {zero:.3f}, x1.10 shift {shift:.6f}%, oracle gap {worst:.2e}, "
        f"antisymmetry {worst_anti:.2e}"
    )


def _check_metrics(rng):
    img = rng.integers(0, 255, size=(32, 32)).astype(np.uint8)  # 254 max so +1 never clips
    ident = metrics.psnr(img, img)
    uniform = metrics.psnr(img, (img + 1).astype(np.uint8))
    want = 10.0 * np.log10(255.0**2)
    s = metrics.ssim(img, img)
    ok = (
        ident.value == 100.0
        and ident.capped
        and abs(uniform.value - want) < 1e-9
        and s.value == 1.0
    )
    return ok, f"identity {ident.value:.0f} dB, unit error {uniform.value:.4f} dB, ssim {s.value}"


CHECKS = (
    ("dct_properties", _check_dct),
    ("zigzag_table", _check_zigzag),
    ("injection_formula", _check_injection),
    ("loss_gradients", _check_loss_gradients),
    ("bd_rate_oracle", _check_bd_rate),
    ("metric_identities", _check_metrics),
)


def run_selftest(seed: int = 0, emit=print) -> bool:
    """Run every check; prints one PASS/FAIL line each; True if all pass."""
    all_ok = True
    for name, check in CHECKS:
        rng = np.random.default_rng(seed)
        try:
            ok, detail = check(rng)
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        emit(f"{'PASS' if ok else 'FAIL'} {name} ({detail})")
        all_ok = all_ok and ok
    return all_ok
