import numpy as np
import pytest

from bwfusion import _backend, _pykernels


def test_reflect_index_whole_sample():
    # d c b | a b c d | c b a
    idx = _pykernels.reflect_index(np.arange(-3, 7), 4)
    assert idx.tolist() == [3, 2, 1, 0, 1, 2, 3, 2, 1, 0]
    assert _pykernels.reflect_index(np.array([-5, 0, 9]), 1).tolist() == [0, 0, 0]


def test_reflect_index_matches_numpy_pad(rng):
    x = rng.normal(size=7)
    pad = 20  # wider than the signal: repeated reflection
    expected = np.pad(x, pad, mode="reflect")
    got = x[_pykernels.reflect_index(np.arange(-pad, 7 + pad), 7)]
    np.testing.assert_array_equal(got, expected)


@pytest.mark.parametrize("step", [1, 2, 4])
@pytest.mark.parametrize("axis", [0, 1])
def test_convolve_axis_against_padding_oracle(backend, rng, step, axis):
    x = rng.normal(size=(13, 17))
    taps = np.array([1, 4, 6, 4, 1]) / 16.0
    pad = 2 * step
    widths = [(0, 0), (0, 0)]
    widths[axis] = (pad, pad)
    xp = np.pad(x, widths, mode="reflect")
    n = x.shape[axis]
    expected = sum(
        t * np.take(xp, np.arange(n) + k * step, axis=axis) for k, t in enumerate(taps)
    )
    got = _backend.convolve_axis(x, taps, step, axis)
    np.testing.assert_allclose(got, expected, rtol=0, atol=1e-14)


@pytest.mark.parametrize("size,stride", [(2, 1), (3, 2), (8, 1), (5, 3)])
def test_window_moments_against_loop(backend, rng, size, stride):
    a = rng.normal(size=(14, 11))
    b = rng.normal(size=(14, 11)) + a
    got = _backend.window_moments(a, b, size, stride)
    ny = (14 - size) // stride + 1
    nx = (11 - size) // stride + 1
    assert got[0].shape == (ny, nx)
    for r in range(ny):
        for c in range(nx):
            wa = a[r * stride:r * stride + size, c * stride:c * stride + size]
            wb = b[r * stride:r * stride + size, c * stride:c * stride + size]
            expected = (wa.mean(), wb.mean(), wa.var(), wb.var(),
                        ((wa - wa.mean()) * (wb - wb.mean())).mean())
            np.testing.assert_allclose([g[r, c] for g in got], expected, rtol=1e-12, atol=1e-14)


@pytest.mark.skipif("cython" not in _backend.available(), reason="extension not built")
def test_backends_agree(rng):
    x = rng.normal(size=(40, 33))
    y = rng.normal(size=(40, 33))
    taps = np.array([1, 4, 6, 4, 1]) / 16.0
    try:
        outs = {}
        for name in ("python", "cython"):
            _backend.use(name)
            outs[name] = (
                _backend.convolve_axis(x, taps, 4, 0),
                _backend.convolve_axis(x, taps, 2, 1),
                _backend.window_moments(x, y, 8, 1),
            )
    finally:
        _backend.use("cython")
    # identical summation order: the filters agree bit for bit
    np.testing.assert_array_equal(outs["python"][0], outs["cython"][0])
    np.testing.assert_array_equal(outs["python"][1], outs["cython"][1])
    np.testing.assert_allclose(outs["python"][2], outs["cython"][2], rtol=1e-12, atol=1e-15)


def test_use_rejects_unknown_backend():
    with pytest.raises(ValueError):
        _backend.use("fortran")


def test_read_only_inputs_accepted(backend, rng):
    x = rng.normal(size=(9, 9))
    x.setflags(write=False)
    _backend.convolve_axis(x, np.ones(3) / 3, 1, 0)
    _backend.window_moments(x, x, 3, 1)


def test_falls_back_without_extension():
    import subprocess
    import sys

    code = (
        "import sys; sys.modules['bwfusion._ckernels'] = None\n"
        "from bwfusion import _backend, decompose\n"
        "import numpy as np\n"
        "assert _backend.name() == 'python' and _backend.available() == ['python']\n"
        "decompose(np.ones((16, 16)), 2)\n"
    )
    subprocess.run([sys.executable, "-c", code], check=True)
