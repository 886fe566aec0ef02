import numpy as np
import pytest

from gim1n import _backend
from gim1n.dist import completion_probs
from conftest import CLOSED_FAMILIES, family

fallback = _backend.python_kernels
needs_core = pytest.mark.skipif(_backend.NAME != "cython", reason="compiled extension not built")


@needs_core
@pytest.mark.parametrize("name", CLOSED_FAMILIES)
@pytest.mark.parametrize("rho", [0.5, 1.0, 1.8])
def test_march_agrees(name, rho):
    r = completion_probs(family(name, rho), 1.0, 300)
    a, b = np.zeros(301), np.zeros(301)
    a[0] = b[0] = 1.0
    la, wa = _backend.kernels.march(r, a, 300, np.inf)
    lb, wb = fallback.march(r, b, 300, np.inf)
    assert la == lb == 300
    np.testing.assert_allclose(a, b, rtol=1e-12)
    assert wa == pytest.approx(wb, rel=1e-6)


@needs_core
def test_march_stops_at_limit():
    r = completion_probs(family("exp", 0.2), 1.0, 100)
    a, b = np.zeros(101), np.zeros(101)
    a[0] = b[0] = 1.0
    assert _backend.kernels.march(r, a, 100, 1e20)[0] == fallback.march(r, b, 100, 1e20)[0] < 100


@needs_core
@pytest.mark.parametrize("n", [0, 1, 5, 50])
def test_chain_agrees(n):
    rng = np.random.default_rng(4)
    counts = rng.poisson(1.1, 20_000).astype(np.int64)
    for count in (True, False):
        assert _backend.kernels.chain(counts, n, 0, count) == fallback.chain(counts, n, 0, count)


def test_chain_semantics():
    counts = np.array([0, 0, 0, 2, 0], dtype=np.int64)
    # q before arrivals: 0, 1, 2 (lost), 2 (lost), 0; final state 1
    assert fallback.chain(counts, 2, 0, True) == (2, 1)
    assert fallback.chain(counts, 2, 0, False) == (0, 1)
    assert fallback.chain(counts, 0, 0, True) == (5, 0)


def test_fallback_selected_without_extension(monkeypatch):
    import importlib
    import sys

    import gim1n
    from gim1n import _backend

    monkeypatch.setitem(sys.modules, "gim1n._core", None)
    monkeypatch.delattr(gim1n, "_core", raising=False)
    try:
        reloaded = importlib.reload(_backend)
        assert reloaded.NAME == "python"
        assert reloaded.kernels is reloaded.python_kernels
    finally:
        monkeypatch.undo()
        importlib.reload(_backend)


def test_benchmark_runs(capsys):
    import runpy
    from pathlib import Path

    script = Path(__file__).parents[1] / "benchmarks" / "bench_backends.py"
    runpy.run_path(str(script))["main"](["--n", "50", "--steps", "1000", "--repeat", "1"])
    out = capsys.readouterr().out
    assert "march n=50" in out and "chain steps=1000" in out
