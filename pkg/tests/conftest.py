import numpy as np
import pytest

from gim1n import _backend
from gim1n.dist import Deterministic, Erlang, Exponential, Hyperexponential

CLOSED_FAMILIES = ("exp", "erlang2", "hyper2", "det")


def family(name, rho, mu=1.0):
    """Interarrival law of the named family with load ``rho`` against ``mu``."""
    lam = rho * mu
    if name == "exp":
        return Exponential(lam)
    if name == "erlang2":
        return Erlang(2, 2 * lam)
    if name == "hyper2":
        # branch means in ratio 3:1, mixture mean 1/lam
        c = 2 * lam / 3
        return Hyperexponential((0.5, 0.5), (c, 3 * c))
    if name == "det":
        return Deterministic(1.0 / lam)
    raise KeyError(name)


def mm1_loss(rho, k):
    k = np.asarray(k, dtype=float)
    if rho == 1.0:
        return 1.0 / (k + 1.0)
    return (1 - rho) * rho**k / (1 - rho ** (k + 1))


@pytest.fixture(params=["compiled", "python"])
def backend(request, monkeypatch):
    """Run a test once per kernel implementation."""
    if request.param == "compiled":
        if _backend.NAME != "cython":
            pytest.skip("compiled extension not built")
        kernels = _backend.kernels
    else:
        kernels = _backend.python_kernels
    monkeypatch.setattr(_backend, "kernels", kernels)
    return request.param


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
