import numpy as np
import pytest

from jndfilter import selftest
from jndfilter.cli import main


def test_all_checks_pass_default_seed():
    lines = []
    assert selftest.run_selftest(seed=0, emit=lines.append)
    assert len(lines) == len(selftest.CHECKS)
    assert all(line.startswith("PASS") for line in lines)


def test_failing_check_fails_run(monkeypatch):
    def bad_check(rng):
        return False, "intentionally broken"

    monkeypatch.setattr(selftest, "CHECKS", selftest.CHECKS + (("broken", bad_check),))
    lines = []
    assert not selftest.run_selftest(seed=0, emit=lines.append)
    assert lines[-1] == "FAIL broken (intentionally broken)"


def test_raising_check_is_reported_not_propagated(monkeypatch):
    def crashing_check(rng):
        raise RuntimeError("kaput")

    monkeypatch.setattr(selftest, "CHECKS", (("crash", crashing_check),))
    lines = []
    assert not selftest.run_selftest(seed=0, emit=lines.append)
    assert "RuntimeError" in lines[0] and lines[0].startswith("FAIL")


def test_cli_exit_nonzero_on_failure(monkeypatch, capsys):
    monkeypatch.setattr(
        selftest, "CHECKS", (("broken", lambda rng: (False, "nope")),)
    )
    assert main(["selftest"]) == 2


def test_finite_difference_gradient_on_quadratic():
    x = np.arange(12.0).reshape(3, 4)
    grad = selftest.finite_difference_gradient(lambda a: float((a**2).sum()), x, step=1e-4)
    assert np.allclose(grad, 2 * x, atol=1e-6)


def test_zigzag_reference_is_a_permutation():
    assert sorted(selftest.ZIGZAG_REFERENCE) == sorted(
        (u, v) for u in range(8) for v in range(8)
    )


def test_oracle_agrees_with_production_on_exact_cubic():
    quals = np.array([33.0, 36.0, 39.0, 42.0])
    rates = np.array([1500.0, 2700.0, 5200.0, 9400.0])
    from jndfilter.bdrate import bd_rate

    got = bd_rate(rates, quals, rates * 1.25, quals)
    want = selftest.bd_rate_oracle(rates, quals, rates * 1.25, quals)
    assert got == pytest.approx(want, abs=1e-6)
    assert got == pytest.approx(25.0, abs=1e-6)
