"""Fourier infrastructure on the 2π-periodic line.

Conventions used throughout the package:

* a grid function is a complex numpy array ``f`` of length ``n`` sampled at
  ``alpha_j = 2*pi*j/n``;
* ``f(alpha) = sum_k c_k exp(i k alpha)`` with ``c = dft(f)`` stored in numpy
  FFT order, so ``k`` runs over ``-n/2 .. n/2-1``;
* "holomorphic on the fluid side" means spectrum in ``k < 0``; the flat
  Hilbert transform has multiplier ``-sign(k)`` and kills the mean.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidField, MeanNotZero

DEFAULT_DEALIAS = 2.0 / 3.0


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid on [0, 2π) with an even number of points (at least 16)."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 16 or self.n % 2:
            raise InvalidField(f"grid size n must be even and >= 16, got {self.n!r}")

    @property
    def period(self):
        return 2.0 * np.pi

    @property
    def spacing(self):
        return 2.0 * np.pi / self.n

    @cached_property
    def nodes(self):
        return 2.0 * np.pi * np.arange(self.n) / self.n

    @cached_property
    def wavenumbers(self):
        return wavenumbers(self.n)


def wavenumbers(n):
    """Integer wavenumbers in FFT order, ``-n/2`` at index ``n/2``."""
    return np.fft.fftfreq(n, d=1.0 / n)


def check_field(f, name="field"):
    """Return ``f`` as a complex array, raising InvalidField if it is not finite."""
    arr = np.asarray(f)
    if arr.ndim != 1:
        raise InvalidField(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidField(f"{name} contains non-finite values")
    return arr.astype(complex, copy=False)


def dft(f):
    """Coefficients ``c_k`` with ``f = sum_k c_k e^{ik alpha}``."""
    f = check_field(f)
    return np.fft.fft(f) / f.size


def idft(c):
    c = np.asarray(c, dtype=complex)
    return np.fft.ifft(c) * c.size


def coefficient(c, k):
    """Look up ``c_k`` in an FFT-ordered coefficient array."""
    return c[int(k) % c.size]


def _apply_multiplier(f, mult):
    f = check_field(f)
    return np.fft.ifft(mult * np.fft.fft(f))


def hilbert_flat(f):
    """Periodic Hilbert transform with multiplier ``-sign(k)``.

    Spectrum in ``k < 0`` is left unchanged, ``k > 0`` flips sign, the mean
    is annihilated.
    """
    f = check_field(f)
    return _apply_multiplier(f, -np.sign(wavenumbers(f.size)))


def holo_project(f):
    """``(I + H)/2``: keeps ``k < 0`` and half the mean."""
    f = check_field(f)
    k = wavenumbers(f.size)
    mult = np.where(k < 0, 1.0, 0.0)
    mult[0] = 0.5
    return _apply_multiplier(f, mult)


def holo_part(f):
    """Strict projection onto ``k < 0`` (drops the mean entirely)."""
    f = check_field(f)
    k = wavenumbers(f.size)
    return _apply_multiplier(f, (k < 0).astype(float))


def deriv(f):
    f = check_field(f)
    return _apply_multiplier(f, 1j * wavenumbers(f.size))


def abs_deriv(f):
    """``|D| f``, multiplier ``|k|``."""
    f = check_field(f)
    return _apply_multiplier(f, np.abs(wavenumbers(f.size)))


def halfD(f):
    """``|D|^{1/2} f``, multiplier ``|k|^{1/2}``."""
    f = check_field(f)
    return _apply_multiplier(f, np.sqrt(np.abs(wavenumbers(f.size))))


def antideriv(f, tol=1e-12):
    """Mean-zero antiderivative of a mean-zero grid function.

    Raises MeanNotZero when ``|c_0| > tol * ||f||_2`` (discrete RMS norm).
    """
    f = check_field(f)
    c = np.fft.fft(f) / f.size
    scale = np.sqrt(np.mean(np.abs(f) ** 2))
    if abs(c[0]) > tol * max(scale, np.finfo(float).tiny):
        raise MeanNotZero(f"antideriv needs a mean-zero input, |mean| = {abs(c[0]):.3e}")
    k = wavenumbers(f.size)
    out = np.zeros_like(c)
    nz = k != 0
    out[nz] = c[nz] / (1j * k[nz])
    return np.fft.ifft(out) * f.size


def dealias(f, fraction=DEFAULT_DEALIAS):
    """Zero every coefficient with ``|k| > fraction * n / 2``."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"dealias fraction must lie in (0, 1], got {fraction}")
    f = check_field(f)
    k = wavenumbers(f.size)
    return _apply_multiplier(f, (np.abs(k) <= fraction * f.size / 2).astype(float))


def l2_norm(f):
    """Continuous L2 norm on [0, 2π) by the trapezoid rule."""
    f = np.asarray(f)
    return float(np.sqrt(2.0 * np.pi * np.mean(np.abs(f) ** 2)))


def trig_eval(f, x, order=0):
    """Evaluate the trigonometric interpolant of samples ``f`` (or its
    ``order``-th derivative) at points ``x``.

    The Nyquist coefficient is split symmetrically between ``±n/2`` so the
    interpolant of real data stays real.
    """
    f = np.asarray(f, dtype=complex)
    n = f.size
    c = np.fft.fft(f) / n
    k = wavenumbers(n)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    half = c[n // 2] / 2.0
    c[n // 2] = half
    phase = np.exp(1j * np.outer(x, k))
    return phase @ ((1j * k) ** order * c) + half * (0.5j * n) ** order * np.exp(0.5j * n * x)


def trig_eval_deriv(f, x):
    """Derivative of the trigonometric interpolant at points ``x``."""
    return trig_eval(f, x, order=1)
