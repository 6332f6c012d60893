"""Singular integral operators attached to a periodic curve.

A curve is ``z(alpha) = alpha + p(alpha)`` with ``p`` 2π-periodic. On such a
curve the Cauchy kernel ``z_beta / (z(alpha) - z(beta))`` is replaced by its
periodic image sum ``z_beta * cot((z(alpha) - z(beta)) / 2) / 2`` and the
squared kernel ``1/(z(alpha)-z(beta))^2`` by ``1 / (4 sin^2(...))``. All
principal values are evaluated by the alternating-point trapezoid rule: only
source nodes at odd index offset from the target contribute, each with weight
``2h``.
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.sparse.linalg import gmres

from . import kernels
from ._kernels_py import _odd_columns
from .errors import DegenerateMap, SolverConvergenceError, SurfaceContactError
from .spectral import PeriodicGrid, check_field, deriv, hilbert_flat, wavenumbers

DEFAULT_CHORD_ARC_FLOOR = 1e-3
DEFAULT_SOLVER_TOL = 1e-10
DEFAULT_SOLVER_MAXITER = 200


def chord_arc_constant(z):
    """min over node pairs of |sin(dz/2)| / |sin(dalpha/2)|.

    This is the periodic chord-arc ratio: it vanishes exactly when two
    distinct parameter values map to the same point modulo 2π.
    """
    z = np.asarray(z, dtype=complex)
    n = z.size
    alpha = 2.0 * np.pi * np.arange(n) / n
    best = np.inf
    for m in range(1, n // 2 + 1):
        dz = z - np.roll(z, -m)
        x = 0.5 * dz.real
        y = 0.5 * dz.imag
        chord = np.sqrt(np.sin(x) ** 2 + np.sinh(y) ** 2)
        best = min(best, float(np.min(chord)) / abs(np.sin(0.5 * (alpha[m]))))
    return best


@dataclass(frozen=True, eq=False)
class CurveParam:
    """Samples of a periodic curve ``z = alpha + p`` with cached geometry.

    Parameters
    ----------
    z : array_like
        Curve positions at the nodes ``alpha_j = 2πj/n``.
    chord_arc_floor : float
        Minimum admissible chord-arc constant.

    Raises
    ------
    DegenerateMap
        If ``min |z_alpha| < 1e-6``.
    SurfaceContactError
        If the chord-arc constant is below ``chord_arc_floor``.
    """

    z: np.ndarray
    chord_arc_floor: float = DEFAULT_CHORD_ARC_FLOOR
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        z = check_field(self.z, "curve").copy()
        z.setflags(write=False)
        object.__setattr__(self, "z", z)
        PeriodicGrid(z.size)
        if self.check:
            if np.min(np.abs(self.z_alpha)) < 1e-6:
                raise DegenerateMap("curve has |z_alpha| < 1e-6")
            mu = self.chord_arc
            if mu < self.chord_arc_floor:
                raise SurfaceContactError(
                    f"chord-arc constant {mu:.3e} below floor {self.chord_arc_floor:.1e}"
                )

    @classmethod
    def from_perturbation(cls, p, **kwargs):
        p = check_field(p, "perturbation")
        return cls(PeriodicGrid(p.size).nodes + p, **kwargs)

    @property
    def n(self):
        return self.z.size

    @property
    def spacing(self):
        return 2.0 * np.pi / self.n

    @cached_property
    def alpha(self):
        return PeriodicGrid(self.n).nodes

    @cached_property
    def perturbation(self):
        return self.z - self.alpha

    @cached_property
    def z_alpha(self):
        return 1.0 + deriv(self.perturbation)

    @cached_property
    def speed(self):
        return np.abs(self.z_alpha)

    @cached_property
    def chord_arc(self):
        return chord_arc_constant(self.z)

    @cached_property
    def hilbert_matrix(self):
        """Dense quadrature matrix of the curve Hilbert transform."""
        h = self.spacing
        return (h / (np.pi * 1j)) * kernels.cot_matrix(self.z) * self.z_alpha[None, :]

    @cached_property
    def kstar_matrix(self):
        """Dense quadrature matrix of the double-layer adjoint."""
        unit = self.z_alpha / self.speed
        return -(self.spacing / np.pi) * kernels.dlp_matrix(self.z, unit, self.speed)

    @cached_property
    def k_matrix(self):
        """Dense quadrature matrix of the double-layer operator ``Re(curve Hilbert)``."""
        return self.hilbert_matrix.real


def as_curve(c):
    return c if isinstance(c, CurveParam) else CurveParam(c)


def curve_hilbert(c, f):
    """Curve Hilbert transform of ``f``.

    ``(1/2πi) pv ∫ z_beta cot((z(alpha) - z(beta))/2) f(beta) dbeta`` by the
    alternating-point rule. On the flat curve this is ``hilbert_flat``.
    """
    c = as_curve(c)
    f = check_field(f)
    return (c.spacing / (np.pi * 1j)) * kernels.cauchy(c.z, c.z_alpha * f)


def double_layer_adjoint(c, f):
    """Apply ``K*``, the adjoint double-layer operator, to a real field."""
    c = as_curve(c)
    f = np.asarray(f, dtype=float)
    return c.kstar_matrix @ f


def _solve_identity_plus(matrix, y, tol, maxiter):
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise SolverConvergenceError("right-hand side is not finite")
    ynorm = np.linalg.norm(y)
    if ynorm == 0.0:
        return np.zeros_like(y)
    n = y.size
    op = np.eye(n) + matrix
    restart = min(maxiter, n)
    x, info = gmres(op, y, rtol=tol, atol=0.0, restart=restart, maxiter=max(1, maxiter // restart))
    resid = np.linalg.norm(op @ x - y) / ynorm
    if info != 0 or resid > 10.0 * tol:
        raise SolverConvergenceError(
            f"GMRES stopped with relative residual {resid:.3e} (tolerance {tol:.1e}, cap {maxiter})"
        )
    return x


def solve_I_plus_Kstar(c, y, tol=DEFAULT_SOLVER_TOL, maxiter=DEFAULT_SOLVER_MAXITER):
    """Solve ``(I + K*) x = y`` for real ``x`` by restarted GMRES.

    Raises
    ------
    SolverConvergenceError
        If the relative residual does not reach ``tol`` within ``maxiter``
        iterations.
    """
    return _solve_identity_plus(as_curve(c).kstar_matrix, y, tol, maxiter)


def solve_I_plus_K(c, y, tol=DEFAULT_SOLVER_TOL, maxiter=DEFAULT_SOLVER_MAXITER):
    """Solve ``(I + K) x = y`` with ``K = Re(curve Hilbert)`` acting on real fields."""
    return _solve_identity_plus(as_curve(c).k_matrix, y, tol, maxiter)


def commutator_bracket(c, f, g):
    """``[f, H](g_alpha / z_alpha)`` as one difference-quotient quadrature.

    Equals ``(1/πi) ∫ (f(alpha) - f(beta)) cot((z(alpha) - z(beta))/2)/2 g_beta dbeta``.
    """
    c = as_curve(c)
    f = check_field(f, "f")
    g = check_field(g, "g")
    return (c.spacing / (np.pi * 1j)) * kernels.cauchy_diff(c.z, f, deriv(g))


def square_bracket(c, f, h):
    """``(1/πi) ∫ (f(alpha) - f(beta))^2 / (4 sin^2((z(alpha) - z(beta))/2)) h(beta) dbeta``."""
    c = as_curve(c)
    f = check_field(f, "f")
    h = check_field(h, "h")
    return (2.0 * c.spacing / (np.pi * 1j)) * kernels.square_diff(c.z, f, h)


def holo_project_curve(c, f):
    """``(I + H)/2`` on the curve."""
    c = as_curve(c)
    f = check_field(f)
    return 0.5 * (f + c.hilbert_matrix @ f)


# Generic multilinear operators -------------------------------------------


@dataclass
class KernelSpec:
    """Data for the multilinear singular operators ``c1_op`` and ``c2_op``.

    Every function ``A(x)`` is given as ``slope * x + a(x)`` with ``a``
    periodic, so the periodic difference quotient is
    ``slope + (a(x) - a(y)) * cot((x - y)/2) / 2``.

    Parameters
    ----------
    F : callable
        Applied elementwise to the difference quotient of ``H``.
    H : array_like
        Periodic part of ``H(x) = H_slope * x + H(x)`` (complex encodes R^2).
    A : sequence of array_like
        Periodic parts of ``A_1 .. A_m`` (real).
    A_slopes : sequence of float
        Linear parts of ``A_1 .. A_m``.
    H_slope : complex
    """

    F: Callable
    H: np.ndarray
    A: Sequence[np.ndarray]
    A_slopes: Sequence[float]
    H_slope: complex = 1.0

    def __post_init__(self):
        self.H = check_field(self.H, "H")
        self.A = [np.asarray(a, dtype=float) for a in self.A]
        self.A_slopes = [float(s) for s in self.A_slopes]
        if len(self.A) < 1 or len(self.A) != len(self.A_slopes):
            raise ValueError("KernelSpec needs m >= 1 functions A with matching slopes")
        for a in self.A:
            if a.shape != self.H.shape:
                raise ValueError("all KernelSpec samples must share one grid")
        z = PeriodicGrid(self.H.size).nodes + self.H
        if self.H_slope == 1.0 and chord_arc_constant(z) < DEFAULT_CHORD_ARC_FLOOR:
            raise SurfaceContactError("H violates the chord-arc floor")

    @property
    def m(self):
        return len(self.A)


def _multilinear_kernel(spec):
    n = spec.H.size
    cols = _odd_columns(n)
    alpha = PeriodicGrid(n).nodes
    diff = alpha[:, None] - alpha[cols]
    kappa = 0.5 / np.tan(0.5 * diff)
    quotient_H = spec.H_slope + (spec.H[:, None] - spec.H[cols]) * kappa
    kern = np.asarray(spec.F(quotient_H), dtype=complex) * np.ones_like(kappa)
    for slope, a in zip(spec.A_slopes, spec.A):
        kern = kern * (slope + (a[:, None] - a[cols]) * kappa)
    return cols, kappa, kern


def c1_op(spec, f):
    """pv ∫ F(DH) Π DA_i · κ(x - y) f(y) dy with κ = cot(·/2)/2 (periodic 1/(x - y))."""
    f = check_field(f)
    cols, kappa, kern = _multilinear_kernel(spec)
    h = 2.0 * np.pi / f.size
    return 2.0 * h * np.sum(kern * kappa * f[cols], axis=1)


def c2_op(spec, f):
    """∫ F(DH) Π DA_i · f'(y) dy, the derivative-form companion of ``c1_op``."""
    f = check_field(f)
    cols, _, kern = _multilinear_kernel(spec)
    h = 2.0 * np.pi / f.size
    return 2.0 * h * np.sum(kern * deriv(f)[cols], axis=1)


# Identity battery -----------------------------------------------------------


def _band_limited(rng, n, kmax):
    k = wavenumbers(n)
    c = np.zeros(n, dtype=complex)
    band = (np.abs(k) <= kmax) & (k != 0)
    c[band] = (rng.normal(size=band.sum()) + 1j * rng.normal(size=band.sum())) / (1.0 + np.abs(k[band])) ** 2
    return np.fft.ifft(c) * n


def identity_battery(curves, fields, dt, seed=0):
    """Residuals of the commutator identities on a sampled curve motion.

    Parameters
    ----------
    curves : sequence of CurveParam or array_like
        At least three curves at uniform spacing ``dt``.
    fields : sequence of array_like
        A field sampled at the same times.
    dt : float
    seed : int
        Seed for the random band-limited pairs.

    Returns
    -------
    dict
        ``time_identity``: sup residual of the time-derivative identity at
        the middle sample; ``holomorphic_pair``: sup of ``[f, H]g`` for
        ``f = e^{-iz}``, ``g = e^{-2iz}``; ``product_identity``: sup of
        ``[f, H]Hg + [Hf, H]g`` for random band-limited ``f, g`` on the
        middle curve; ``product_identity_flat``: the same on the flat curve.
    """
    curves = [as_curve(c) for c in curves]
    if len(curves) < 3 or len(curves) != len(fields):
        raise ValueError("identity_battery needs >= 3 matching curve and field samples")
    mid = len(curves) // 2
    c0, c1, c2 = curves[mid - 1], curves[mid], curves[mid + 1]
    f0, f1, f2 = (check_field(fields[i]) for i in (mid - 1, mid, mid + 1))

    lhs = (curve_hilbert(c2, f2) - curve_hilbert(c0, f0)) / (2.0 * dt)
    f_t = (f2 - f0) / (2.0 * dt)
    z_t = (c2.z - c0.z) / (2.0 * dt)
    rhs = curve_hilbert(c1, f_t) + commutator_bracket(c1, z_t, f1)
    time_res = float(np.max(np.abs(lhs - rhs)))

    f = np.exp(-1j * c1.z)
    g = np.exp(-2j * c1.z)
    pair_res = float(np.max(np.abs(f * curve_hilbert(c1, g) - curve_hilbert(c1, f * g))))

    rng = np.random.default_rng(seed)
    n = c1.n
    fb = _band_limited(rng, n, n // 8)
    gb = _band_limited(rng, n, n // 8)

    def product_residual(c, hil):
        # drop the constant component of g, which the periodic identity does not see
        g0 = hil(hil(gb))
        hg = hil(g0)
        hf = hil(fb)
        r = fb * hil(hg) - hil(fb * hg) + hf * hg - hil(hf * g0)
        return float(np.max(np.abs(r)))

    prod_res = product_residual(c1, lambda x: curve_hilbert(c1, x))
    flat_res = product_residual(None, hilbert_flat)
    return {
        "time_identity": time_res,
        "holomorphic_pair": pair_res,
        "product_identity": prod_res,
        "product_identity_flat": flat_res,
    }
