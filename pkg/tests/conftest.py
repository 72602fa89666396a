import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from projlab.projections import orthoprojection_onto

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

INF = math.inf


def cgauss(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_projection(rng, n, k):
    """Euclidean orthoprojection onto a random complex k-dim subspace of C^n."""
    return orthoprojection_onto(cgauss(rng, n, k))


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


# criterion number -> (title, passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
