"""Pure numpy alternating-point quadrature sums.

Every routine sums over source nodes ``j`` whose index differs from the
target ``i`` by an odd offset. Weights and prefactors are applied by the
callers in ``wavecrest.curve``. The compiled module ``_kernels`` exposes the
same functions with the same signatures.
"""
import numpy as np


def _odd_columns(n):
    offsets = np.arange(1, n, 2)
    return (np.arange(n)[:, None] + offsets[None, :]) % n


def _cot_half(w):
    """cot(w/2) for complex w, written to avoid cancellation near w = 0."""
    x = 0.5 * w.real
    y = 0.5 * w.imag
    den = 2.0 * (np.sin(x) ** 2 + np.sinh(y) ** 2)
    return (np.sin(2.0 * x) - 1j * np.sinh(2.0 * y)) / den


def _four_sin2_half(w):
    """4 sin^2(w/2) for complex w."""
    x = 0.5 * w.real
    y = 0.5 * w.imag
    s = np.sin(x) * np.cosh(y) + 1j * np.cos(x) * np.sinh(y)
    return 4.0 * s * s


def _pairs(z):
    z = np.asarray(z, dtype=complex)
    cols = _odd_columns(z.size)
    return cols, z[:, None] - z[cols]


def cauchy(z, g):
    cols, dz = _pairs(z)
    g = np.asarray(g, dtype=complex)
    return np.sum(_cot_half(dz) * g[cols], axis=1)


def cauchy_diff(z, f, g):
    cols, dz = _pairs(z)
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    df = f[:, None] - f[cols]
    return np.sum(df * _cot_half(dz) * g[cols], axis=1)


def imcot_diff(z, f, g):
    cols, dz = _pairs(z)
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    df = f[:, None] - f[cols]
    return np.sum(df * _cot_half(dz).imag * g[cols], axis=1)


def square_diff(z, f, g):
    cols, dz = _pairs(z)
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    df = f[:, None] - f[cols]
    return np.sum(df * df / _four_sin2_half(dz) * g[cols], axis=1)


def abs2_diff(z, f, g):
    cols, dz = _pairs(z)
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    df = f[:, None] - f[cols]
    return np.sum((df.real ** 2 + df.imag ** 2) / _four_sin2_half(dz) * g[cols], axis=1)


def cot_matrix(z):
    """Dense n x n matrix of cot((z_i - z_j)/2) on odd offsets, zero elsewhere."""
    cols, dz = _pairs(z)
    n = cols.shape[0]
    out = np.zeros((n, n), dtype=complex)
    np.put_along_axis(out, cols, _cot_half(dz), axis=1)
    return out


def dlp_matrix(z, unit, speed):
    """M[i, j] = Im(unit_i * cot((z_i - z_j)/2)) * speed_j on odd offsets."""
    cols, dz = _pairs(z)
    unit = np.asarray(unit, dtype=complex)
    speed = np.asarray(speed, dtype=float)
    vals = (unit[:, None] * _cot_half(dz)).imag * speed[cols]
    n = cols.shape[0]
    out = np.zeros((n, n))
    np.put_along_axis(out, cols, vals, axis=1)
    return out
