import warnings

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from privexp.errors import GenericityViolation
from privexp.model import ModelParams

settings.register_profile("default", deadline=None, max_examples=200)
settings.load_profile("default")

DEFAULT = ModelParams(0.2, 0.9, 1.0, 10.0, 0.6)
P622 = ModelParams(0.2, 0.5, 1.0, 10.0, 0.48)
REMARK6 = ModelParams(0.2, 0.5, 1.0, 10.0, 0.46)
MIXED = ModelParams(0.2, 0.8, 1.0, 10.0, 0.37)


@st.composite
def model_params(draw, lam=(0.01, 0.99), delta=(0.01, 0.99), prior=(0.01, 0.99)):
    success = draw(st.floats(*lam))
    discount = draw(st.floats(*delta))
    cost = draw(st.floats(0.1, 10.0))
    ratio = draw(st.floats(1.01, 20.0))
    p0 = draw(st.floats(*prior))
    return ModelParams(success, discount, cost, cost / success * ratio, p0)


def random_points(n, seed, lam=(0.01, 0.99), delta=(0.01, 0.99), prior=(0.01, 0.99)):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        success = rng.uniform(*lam)
        cost = rng.uniform(0.1, 10.0)
        out.append(ModelParams(success, rng.uniform(*delta), cost,
                               cost / success * rng.uniform(1.01, 20.0), rng.uniform(*prior)))
    return out


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GenericityViolation)
        yield


_CRITERIA = []


def record_criterion(number, title, ok, details):
    line = f"CRITERION {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {details}"
    _CRITERIA.append((number, line))
    print("\n" + line, flush=True)


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_CRITERIA):
            terminalreporter.write_line(line)
