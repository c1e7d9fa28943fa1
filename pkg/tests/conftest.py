import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def simpson(g, a: float, b: float, n: int = 10**7) -> float:
    """Composite Simpson rule on ``n`` (even) panels; the fixed-grid reference."""
    n += n % 2
    t = np.linspace(a, b, n + 1)
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float((b - a) / (3.0 * n) * np.dot(w, g(t)))


@pytest.fixture(scope="session")
def default_grid():
    from cfprobe.harmonic import default_y_grid

    return default_y_grid()


_ACCEPTANCE: dict[int, str] = {}


def record(ac: int, ok: bool, detail: str) -> None:
    _ACCEPTANCE[ac] = f"AC{ac:<2} {'PASS' if ok else 'FAIL'}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for ac in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[ac])
