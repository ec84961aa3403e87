import pytest

from poisson_outage import _kernel_py
from poisson_outage.kernel import available_backends, get_backend


def test_python_backend_always_available():
    assert "python" in available_backends()
    assert get_backend("python") is _kernel_py


def test_env_selection(monkeypatch):
    monkeypatch.setenv("POISSON_OUTAGE_BACKEND", "python")
    assert get_backend().BACKEND == "python"


def test_auto_prefers_compiled(monkeypatch):
    monkeypatch.delenv("POISSON_OUTAGE_BACKEND", raising=False)
    expected = "compiled" if "compiled" in available_backends() else "python"
    assert get_backend().BACKEND == expected


def test_unknown_backend():
    with pytest.raises(ValueError):
        get_backend("fortran")
