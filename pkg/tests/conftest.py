import math
import os
import sys

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from selftrap.equilibrium import solve_equilibrium  # noqa: E402
from selftrap.errors import SolverError  # noqa: E402
from selftrap.linear_response import mechanical_frequency  # noqa: E402
from selftrap.params import ScaledParams  # noqa: E402

settings.register_profile(
    "default", deadline=None, max_examples=60, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

detuning = st.floats(-8.0, 2.0, allow_nan=False)


@st.composite
def scaled_params(draw, eps2=(0.1, 100.0), kappaA=(0.5, 2.0), R=(0.0, 1.0)):
    return ScaledParams(
        eps2=draw(st.floats(*eps2)),
        delta1=draw(detuning),
        delta2=draw(detuning),
        kappaA=draw(st.floats(*kappaA)),
        drive_ratio=draw(st.floats(*R)),
    )


def trapped(p):
    """Equilibrium with omega_M^2 > 0, or None."""
    try:
        eq = solve_equilibrium(p)
    except SolverError:
        return None
    return eq if mechanical_frequency(eq, p) > 0 else None


def random_stable_draws(n, seed=12345, eps2=(0.1, 100.0)):
    """n reproducible (params, equilibrium) pairs with a trapped sphere."""
    import numpy as np

    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        p = ScaledParams(
            eps2=float(rng.uniform(*eps2)),
            delta1=float(rng.uniform(-8, 2)),
            delta2=float(rng.uniform(-8, 2)),
            kappaA=float(rng.uniform(0.5, 2.0)),
            drive_ratio=float(rng.uniform(0.1, 1.0)),
        )
        eq = trapped(p)
        if eq is not None:
            out.append((p, eq))
    return out


@pytest.fixture(scope="session")
def stable_draws():
    return random_stable_draws(100)


QUARTER_PI = math.pi / 4


# -- acceptance reporting --

ACCEPTANCE_RESULTS = {}


class _Criterion:
    def __init__(self, number, title):
        self.number, self.title, self.detail = number, title, ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        detail = self.detail
        if exc is not None and not detail:
            detail = str(exc).splitlines()[0][:160]
        ACCEPTANCE_RESULTS[self.number] = (status, self.title, detail)
        return False


def criterion(number, title):
    """Context manager recording one acceptance criterion's outcome."""
    return _Criterion(number, title)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        status, title, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"[{status}] {n:2d}. {title}: {detail}")
