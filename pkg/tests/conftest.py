import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from wintgen import SecondFundamentalForm

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def random_h(rng, n, codim, scale=1.0):
    X = rng.uniform(-scale, scale, size=(codim, n, n))
    return SecondFundamentalForm(0.5 * (X + X.transpose(0, 2, 1)))


def random_orthogonal(rng, k):
    q, r = np.linalg.qr(rng.standard_normal((k, k)))
    return q * np.sign(np.diagonal(r))


@st.composite
def h_forms(draw, n=st.integers(2, 5), codim=st.integers(1, 4), bound=3.0):
    n_ = draw(n)
    c_ = draw(codim)
    seed = draw(st.integers(0, 2**32 - 1))
    scale = draw(st.floats(1e-3, bound))
    return random_h(np.random.default_rng(seed), n_, c_, scale)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, detail = results[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
