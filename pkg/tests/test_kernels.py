import numpy as np
import pytest

from wavecrest import kernels
from wavecrest.kernels import implementations

from conftest import nodes

impls = implementations()
compiled = impls["compiled"]
python = impls["python"]


def _curve(n):
    a = nodes(n)
    return a + 0.1j * np.cos(a) + 0.05 * np.sin(2 * a) + 0.02j * np.sin(3 * a)


def _direct_cauchy_diff(z, f, g):
    """Independent loop: sum over odd offsets of (f_i - f_j) cot((z_i - z_j)/2) g_j."""
    n = z.size
    out = np.zeros(n, dtype=complex)
    for i in range(n):
        for j in range(n):
            if (i - j) % 2:
                out[i] += (f[i] - f[j]) * np.cos((z[i] - z[j]) / 2) / np.sin((z[i] - z[j]) / 2) * g[j]
    return out


def test_backend_name_is_known():
    assert kernels.BACKEND in ("compiled", "python")


def test_python_backend_matches_direct_loop(rng):
    n = 32
    z = _curve(n)
    f = rng.normal(size=n) + 1j * rng.normal(size=n)
    g = rng.normal(size=n) + 1j * rng.normal(size=n)
    assert np.abs(python.cauchy_diff(z, f, g) - _direct_cauchy_diff(z, f, g)).max() < 1e-11


def test_cot_matrix_zero_on_even_offsets():
    m = python.cot_matrix(_curve(16))
    i, j = np.indices(m.shape)
    assert np.all(m[(i - j) % 2 == 0] == 0)


@pytest.mark.skipif(compiled is None, reason="compiled extension not built")
@pytest.mark.parametrize("n", [16, 64, 128])
def test_backends_agree(n, rng):
    z = _curve(n)
    f = rng.normal(size=n) + 1j * rng.normal(size=n)
    g = rng.normal(size=n) + 1j * rng.normal(size=n)
    unit = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
    speed = 1 + 0.1 * rng.random(n)
    pairs = [
        ("cauchy", (z, g)),
        ("cauchy_diff", (z, f, g)),
        ("imcot_diff", (z, f, g)),
        ("square_diff", (z, f, g)),
        ("abs2_diff", (z, f, g)),
        ("cot_matrix", (z,)),
        ("dlp_matrix", (z, unit, speed)),
    ]
    for name, args in pairs:
        a = getattr(python, name)(*args)
        b = getattr(compiled, name)(*args)
        scale = max(1.0, np.abs(a).max())
        assert np.abs(a - b).max() <= 1e-12 * scale, name


@pytest.mark.skipif(compiled is None, reason="compiled extension not built")
def test_compiled_accepts_read_only_arrays():
    z = _curve(16)
    z.setflags(write=False)
    f = np.ones(16, dtype=complex)
    f.setflags(write=False)
    assert np.all(np.isfinite(compiled.cauchy(z, f)))
