import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gcpr import Dataset, ModelSpec, TrendTerm

settings.register_profile("ci", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))


def random_walk(rng, T, m=1):
    return np.cumsum(rng.standard_normal((T, m)), axis=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def trend_data():
    """y = 7 + 0.05 t - 5e-3 t^2 + 5 x + u with T = 150."""
    g = np.random.default_rng(7)
    T = 150
    x = random_walk(g, T)
    t = np.arange(1, T + 1)
    y = 7 + 0.05 * t - 5e-3 * t**2 + 5 * x[:, 0] + g.standard_normal(T)
    return Dataset.from_arrays(y, x)


@pytest.fixture
def m3_spec():
    return ModelSpec((TrendTerm.at(0), TrendTerm.at(1), TrendTerm.free()), (2,))


@pytest.fixture
def m4_spec():
    return ModelSpec((TrendTerm.at(0), TrendTerm.at(1), TrendTerm.free()), (1,))


def write_csv(path, y, x, t=None):
    x = np.asarray(x, dtype=float).reshape(len(y), -1)
    t = np.arange(1, len(y) + 1) if t is None else t
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(["t", "y"] + [f"x{i + 1}" for i in range(x.shape[1])]) + "\n")
        for ti, yi, xi in zip(t, y, x):
            fh.write(",".join([str(ti), repr(float(yi))] + [repr(float(v)) for v in xi]) + "\n")
    return path


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one PASS/FAIL/SKIP line for an acceptance criterion."""

    def _emit(name: str, ok: bool | None, detail: str) -> None:
        status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
        line = f"{status} {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return _emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
