import numpy as np
import pytest

from hdbf import _fallback

try:
    from hdbf import _kernels as _compiled
except ImportError:  # pragma: no cover
    _compiled = None

BACKENDS = [pytest.param(_fallback, id="python")]
if _compiled is not None:
    BACKENDS.append(pytest.param(_compiled, id="compiled"))


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
