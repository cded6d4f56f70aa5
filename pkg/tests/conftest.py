import sys

import numpy as np
import pytest

from pnoma.analytic import NetworkParams


@pytest.fixture(scope="session")
def net():
    return NetworkParams(lam=10.0, eta=4.0, sigma2=1e-9)


def trapezoid_interference(alpha, beta, n=2_000_001):
    """Brute-force I(alpha, beta) with the trapezoid rule."""
    bw1, bw2 = alpha + beta, 1.0 - beta
    fa, fb = 0.5 * bw1, 0.5 * (1.0 + beta)

    def e2(bw):
        x = np.linspace(-bw / 2, bw / 2, n)
        return np.trapezoid(np.sinc(2 * x / bw) ** 2, x)

    f = np.linspace(beta, beta + alpha, n)
    cross = np.trapezoid(np.sinc(2 * (f - fa) / bw1) * np.sinc(2 * (f - fb) / bw2), f)
    return cross ** 2 / (e2(bw1) * e2(bw2))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance summary")
        for line in lines:
            terminalreporter.write_line(line)
