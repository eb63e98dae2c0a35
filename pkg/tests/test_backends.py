import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptscatter import _backend, _pykernels
from ptscatter.constants import DEGENERATE_ENERGY_TOL, HBAR2_2ME

needs_cython = pytest.mark.skipif("cython" not in _backend.available(), reason="compiled backend not built")


def rel(a, b):
    return np.max(np.abs(np.asarray(a) - np.asarray(b)) / np.maximum(1.0, np.abs(np.asarray(b))))


def test_python_backend_always_available():
    assert "python" in _backend.available()


def test_use_backend_round_trip():
    before = _backend.name()
    assert _backend.use_backend("python") == before
    assert _backend.name() == "python" and _backend.kernels() is _pykernels
    _backend.use_backend("auto")
    assert _backend.name() == _backend.available()[0]
    _backend.use_backend(before)


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.use_backend("fortran")


@needs_cython
@settings(max_examples=300, deadline=None)
@given(st.floats(0.0, 0.5), st.floats(0.0, 0.02), st.floats(100, 1000), st.floats(0.01, 2.0))
def test_amplitude_parity(vr, vi, length_nm, e):
    from ptscatter import _ckernels

    args = (e, vr, vi, length_nm, HBAR2_2ME, np.inf, DEGENERATE_ENERGY_TOL)
    sp, *ap = _pykernels.amplitudes(*args)
    sc, *ac = _ckernels.amplitudes(*args)
    assert sp == sc
    if sp == 0:
        assert rel(ac, ap) <= 1e-10


@needs_cython
@pytest.mark.parametrize("spectrum", [0, 1, 2, 3])
def test_sweep_row_parity(spectrum):
    from ptscatter import _ckernels

    e = np.linspace(0.05, 2.0, 2001)
    args = (e, 0.3, 0.005, 500.0, HBAR2_2ME, np.inf, DEGENERATE_ENERGY_TOL, spectrum)
    sp, rp = _pykernels.sweep_rows(*args)
    sc, rc = _ckernels.sweep_rows(*args)
    assert np.array_equal(sp, sc)
    assert rel(rc, rp) <= 1e-9


@needs_cython
def test_quartic_parity():
    from ptscatter import _ckernels

    c = np.poly([1 + 1j, -2, 0.5j, 3])
    rp, ip, okp = _pykernels.quartic_roots(*c[1:], 1e-12, 200)
    rc, ic, okc = _ckernels.quartic_roots(*c[1:], 1e-12, 200)
    assert okp and okc
    assert rel(sorted(rc, key=lambda z: (z.real, z.imag)), sorted(rp, key=lambda z: (z.real, z.imag))) <= 1e-12
