from __future__ import annotations

import numpy as np
import pytest


def central_jet(fn, x, y, h=1e-5):
    """Value, gradient and Hessian of a plain float function by central differences."""
    fx = (fn(x + h, y) - fn(x - h, y)) / (2 * h)
    fy = (fn(x, y + h) - fn(x, y - h)) / (2 * h)
    H = 1e-4
    fxx = (fn(x + H, y) - 2 * fn(x, y) + fn(x - H, y)) / H ** 2
    fyy = (fn(x, y + H) - 2 * fn(x, y) + fn(x, y - H)) / H ** 2
    fxy = (fn(x + H, y + H) - fn(x + H, y - H) - fn(x - H, y + H) + fn(x - H, y - H)) / (4 * H ** 2)
    return fn(x, y), (fx, fy), (fxx, fxy, fyy)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: one test per acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "SUMMARY", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
