import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from laxlab.fields import FieldState, GridSpec, ModelParams

settings.register_profile("laxlab", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("laxlab")

ACCEPTANCE_LINES: list[str] = []


def smooth_state(spec: GridSpec, seed: int = 0, modes: int = 3, amp: float = 0.3) -> FieldState:
    """Band-limited periodic data on ``spec`` with coefficients fixed by ``seed``."""
    rng = np.random.default_rng(seed)
    coeffs = rng.normal(size=(6, modes, 2)) * amp / np.arange(1, modes + 1)[None, :, None]
    k = 2 * math.pi / spec.length
    x = spec.x

    def f(i):
        return sum(coeffs[i, m, 0] * np.cos((m + 1) * k * x) + coeffs[i, m, 1] * np.sin((m + 1) * k * x) for m in range(modes))

    return FieldState(0.0, f(0) + 0.1, f(1), f(2) + 1j * f(3) + 0.4, f(4) + 1j * f(5) - 0.2j)


@pytest.fixture
def spec64():
    return GridSpec(64, 2 * math.pi)


@pytest.fixture
def params():
    return ModelParams(m_s=1.2, m_f=0.8, beta=0.9, g=0.7, theta0=0.6)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
