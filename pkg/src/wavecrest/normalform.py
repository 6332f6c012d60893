"""Normal-form quantities and their structural checks.

Given Lagrangian samples ``(z, z_t, z_tt)`` this module builds the real
coordinate change ``k`` from the curve alone, the transformed unknown
``Pi = (I - H)(z - conj z)`` and its pull-back ``theta = Pi o k^{-1}``, and
evaluates both sides of the exact identities satisfied by ``k_t`` and
``a k_alpha`` and of the cubic equation for ``Pi``.
"""
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .curve import CurveParam, as_curve, commutator_bracket, curve_hilbert, solve_I_plus_K
from . import kernels
from .errors import InterpolationError, MonotonicityError, SolverConvergenceError
from .spectral import PeriodicGrid, check_field, deriv, trig_eval

IMAG_TOL = 1e-8
INVERSE_TOL = 1e-13


def compute_k(z, tol=1e-12):
    """Real coordinate change ``k - alpha`` with zero mean.

    ``k = conj(z) + (I + H)/2 (I + K)^{-1} (z - conj z)`` with ``K = Re H``.

    Raises
    ------
    SolverConvergenceError
        If the (I + K) solve fails or ``Im k`` exceeds ``1e-8``.
    MonotonicityError
        If ``min k' <= 0``.
    """
    c = as_curve(z)
    x = solve_I_plus_K(c, c.z.imag, tol=tol)
    G = 1j * x + 1j * curve_hilbert(c, x)
    k = np.conj(c.z) + G
    if np.abs(k.imag).max() > IMAG_TOL:
        raise SolverConvergenceError(f"coordinate change not real: max |Im k| = {np.abs(k.imag).max():.3e}")
    q = k.real - c.alpha
    q = q - q.mean()
    if (1.0 + deriv(q).real).min() <= 0.0:
        raise MonotonicityError("coordinate change k is not monotone")
    return q


def invert_map(q, targets=None, tol=INVERSE_TOL, maxiter=60):
    """Solve ``beta + q(beta) = target`` for each target (default: the nodes).

    ``q`` is interpolated trigonometrically; Newton steps are safeguarded by
    bisection inside a bracket that is guaranteed by monotonicity.
    """
    q = np.asarray(q, dtype=float)
    n = q.size
    if targets is None:
        targets = PeriodicGrid(n).nodes
    targets = np.asarray(targets, dtype=float)
    dq = deriv(q).real
    if (1.0 + dq).min() <= 0.0:
        raise MonotonicityError("map is not monotone")
    qc = q.astype(complex)
    margin = 1.5 * np.abs(q).max() + 1e-12
    lo = targets - margin
    hi = targets + margin
    f_lo = lo + trig_eval(qc, lo).real - targets
    f_hi = hi + trig_eval(qc, hi).real - targets
    if np.any(f_lo > 0) or np.any(f_hi < 0):
        raise InterpolationError("could not bracket the inverse map")
    beta = targets - trig_eval(qc, targets).real
    for _ in range(maxiter):
        beta = np.clip(beta, lo, hi)
        f = beta + trig_eval(qc, beta).real - targets
        fp = 1.0 + trig_eval(qc, beta, 1).real
        neg = f < 0
        lo = np.where(neg, beta, lo)
        hi = np.where(neg, hi, beta)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = beta - f / fp
        bad = ~np.isfinite(newton) | (newton <= lo) | (newton >= hi) | (fp <= 0)
        nxt = np.where(bad, 0.5 * (lo + hi), newton)
        done = np.abs(nxt - beta) < tol
        beta = nxt
        if np.all(done):
            break
    else:
        raise InterpolationError("inverse map did not converge")
    resid = np.abs(beta + trig_eval(qc, beta).real - targets).max()
    if resid > 1e-10:
        raise InterpolationError(f"inverse map residual {resid:.3e}")
    return beta


def compose(f, beta):
    """Periodic samples ``f`` evaluated at the points ``beta``."""
    return trig_eval(check_field(f), beta)


def compute_Pi(z):
    c = as_curve(z)
    y = 2j * c.z.imag
    return y - curve_hilbert(c, y)


def compute_Pi_theta(z, q=None):
    """``Pi = (I - H)(z - conj z)`` and ``theta = Pi o k^{-1}``.

    Returns
    -------
    Pi, theta : ndarray
    zeta : ndarray
        The curve in the new coordinate, ``z o k^{-1}``.
    """
    c = as_curve(z)
    if q is None:
        q = compute_k(c)
    kinv = invert_map(q)
    Pi = compute_Pi(c)
    theta = compose(Pi, kinv)
    zeta = kinv + compose(c.perturbation, kinv)
    return Pi, theta, zeta


def theta_constraint(theta, zeta, modulo_constant=True):
    """Sup of ``(I + H_zeta) theta``, optionally after removing its mean."""
    r = theta + curve_hilbert(CurveParam(zeta, check=False), theta)
    if modulo_constant:
        r = r - r.mean()
    return float(np.abs(r).max())


# Trajectory windows ---------------------------------------------------------


@dataclass
class TrajectoryWindow:
    """Uniformly spaced Lagrangian samples ``(t, z, z_t, z_tt)``."""

    times: list
    z: list
    zt: list
    ztt: list

    def __post_init__(self):
        if len(self.times) < 5 or not (len(self.times) == len(self.z) == len(self.zt) == len(self.ztt)):
            raise ValueError("a window needs >= 5 matching samples")
        d = np.diff(self.times)
        if np.ptp(d) > 1e-9 * max(abs(d[0]), 1e-300):
            raise ValueError("window samples must be uniformly spaced")

    @property
    def dt(self):
        return float(self.times[1] - self.times[0])

    @property
    def mid(self):
        return len(self.times) // 2

    def __len__(self):
        return len(self.times)


def _check_order(order):
    if order not in (2, 4):
        raise ValueError(f"stencil_order must be 2 or 4, got {order!r}")
    return order


def _first_difference(samples, i, dt, order=4):
    if order == 4:
        return (-samples[i + 2] + 8 * samples[i + 1] - 8 * samples[i - 1] + samples[i - 2]) / (12 * dt)
    return (samples[i + 1] - samples[i - 1]) / (2 * dt)


def _second_difference(samples, i, dt, order=4):
    if order == 4:
        return (-samples[i + 2] + 16 * samples[i + 1] - 30 * samples[i] + 16 * samples[i - 1]
                - samples[i - 2]) / (12 * dt ** 2)
    return (samples[i + 1] - 2 * samples[i] + samples[i - 1]) / dt ** 2


def window_from_riemann(state, dt, samples=5, fraction=2.0 / 3.0):
    """Advance a marker-carrying Riemann state ``samples - 1`` steps of size ``dt``, recording Lagrangian fields."""
    from .riemann import lagrangian_fields, step_rk4

    times, zs, zts, ztts = [], [], [], []
    for i in range(samples):
        if i:
            state = step_rk4(state, dt, fraction)
        z, zt, ztt = lagrangian_fields(state)
        times.append(state.t)
        zs.append(z)
        zts.append(zt)
        ztts.append(ztt)
    return TrajectoryWindow(times, zs, zts, ztts)


def window_from_lagrangian(state, dt, samples=5, fraction=2.0 / 3.0):
    from .lagrangian import step_lag

    times, zs, zts, ztts = [], [], [], []
    for i in range(samples):
        if i:
            state = step_lag(state, dt, fraction)
        times.append(state.t)
        zs.append(state.z)
        zts.append(state.zt)
        ztts.append(state.ztt)
    return TrajectoryWindow(times, zs, zts, ztts)


@dataclass
class NormalFormFields:
    """Normal-form data at the middle sample of a window.

    ``b_f`` and ``Aminus1_f`` live in the new coordinate; the ``*_formula``
    entries are the commutator sides of the two identities, also in the new
    coordinate; residuals compare both sides (the first modulo a constant).
    """

    k_map: np.ndarray
    theta: np.ndarray
    b_f: np.ndarray
    Aminus1_f: np.ndarray
    b_formula: np.ndarray
    Aminus1_formula: np.ndarray
    residual_b: float
    residual_A: float
    extras: dict = field(default_factory=dict)


def compute_b_A_formulas(window, stencil_order=4):
    """Evaluate both sides of the identities for ``b = k_t o k^{-1}`` and ``A = (a k_alpha) o k^{-1}``.

    In the Lagrangian frame they read
    ``(I - H) k_t = -[z_t, H] (conj z - k)_alpha / z_alpha`` (up to a real
    constant in the periodic setting) and
    ``(I - H)(a k_alpha - 1) = i[z_t, H] conj(z_t)_alpha / z_alpha + i[z_tt, H] (conj z - k)_alpha / z_alpha``;
    composing with ``k^{-1}`` gives the stated form since the curve Hilbert
    transform commutes with reparametrization. ``stencil_order`` (2 or 4)
    selects the centred difference used for ``k_t``.
    """
    m = window.mid
    qs = [compute_k(z) for z in window.z]
    c = CurveParam(window.z[m])
    q = qs[m]
    alpha = c.alpha
    k = alpha + q
    kt = _first_difference(qs, m, window.dt, _check_order(stencil_order))
    zt, ztt = window.zt[m], window.ztt[m]
    a = np.abs(ztt + 1j) / c.speed
    kalpha = 1.0 + deriv(q).real
    zbar_minus_k = np.conj(c.perturbation) - q

    lhs_b = kt - curve_hilbert(c, kt)
    rhs_b = -commutator_bracket(c, zt, zbar_minus_k)
    diff_b = lhs_b - rhs_b
    diff_b = diff_b - diff_b.mean()

    am1 = a * kalpha - 1.0
    lhs_A = am1 - curve_hilbert(c, am1)
    rhs_A = 1j * commutator_bracket(c, zt, np.conj(zt)) + 1j * commutator_bracket(c, ztt, zbar_minus_k)

    kinv = invert_map(q)
    Pi = compute_Pi(c)
    return NormalFormFields(
        k_map=q,
        theta=compose(Pi, kinv),
        b_f=compose(kt, kinv).real,
        Aminus1_f=compose(am1, kinv).real,
        b_formula=compose(rhs_b, kinv),
        Aminus1_formula=compose(rhs_A, kinv),
        residual_b=float(np.abs(diff_b).max()),
        residual_A=float(np.abs(lhs_A - rhs_A).max()),
        extras={"b_constant": complex((lhs_b - rhs_b).mean()), "k": k},
    )


def cubic_rhs(z, zt):
    """Periodic right side of the cubic equation for ``Pi``, in the Lagrangian frame.

    ``-(2/π) ∫ Δz_t Im cot(Δz/2) ∂z_t + (2/π) ∫ (Δz_t)^2 / (4 sin^2(Δz/2)) ∂Im z``.
    """
    c = as_curve(z)
    h = c.spacing
    dzt = deriv(zt)
    first = kernels.imcot_diff(c.z, zt, dzt)
    second = kernels.square_diff(c.z, zt, deriv(c.z.imag.astype(complex)) + 0j)
    return -(2.0 / np.pi) * 2.0 * h * first + (2.0 / np.pi) * 2.0 * h * second


def cubic_residual(window, return_parts=False, stencil_order=4):
    """Sup of ``(∂t^2 - i a ∂)Pi - RHS`` at the middle sample.

    The identity is evaluated in the Lagrangian frame; precomposition with
    ``k^{-1}`` maps it to the new-coordinate form with
    ``D_t^2 - i A ∂``, leaving the sup norm unchanged. ``stencil_order``
    (2 or 4) selects the centred second difference.
    """
    m = window.mid
    Pis = [compute_Pi(z) for z in window.z]
    c = CurveParam(window.z[m])
    a = np.abs(window.ztt[m] + 1j) / c.speed
    lhs = _second_difference(Pis, m, window.dt, _check_order(stencil_order)) - 1j * a * deriv(Pis[m])
    rhs = cubic_rhs(c, window.zt[m])
    res = float(np.abs(lhs - rhs).max())
    if return_parts:
        return res, lhs, rhs
    return res


# Scaling study ------------------------------------------------------------------


@dataclass
class ScalingReport:
    epsilons: list
    norms_b: list
    norms_Aminus1: list
    norms_rhs_cubic: list
    norms_residual: list
    fitted_slopes: tuple = ()

    def __post_init__(self):
        e = list(self.epsilons)
        if len(e) < 3 or any(b >= a for a, b in zip(e, e[1:])):
            raise ValueError("epsilons must be strictly decreasing with >= 3 entries")
        if not self.fitted_slopes:
            le = np.log(e)
            self.fitted_slopes = tuple(
                float(np.polyfit(le, np.log(np.asarray(v)), 1)[0])
                for v in (self.norms_b, self.norms_Aminus1, self.norms_rhs_cubic, self.norms_residual)
            )

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["eps", "norm_b", "norm_Aminus1", "norm_rhs_cubic"])
            for row in zip(self.epsilons, self.norms_b, self.norms_Aminus1, self.norms_rhs_cubic):
                wr.writerow([format(float(v), ".17g") for v in row])

    def summary(self):
        names = ("b", "Aminus1", "rhs_cubic", "residual")
        return "slopes: " + ", ".join(f"{k}={format(v, '.17g')}" for k, v in zip(names, self.fitted_slopes))


def scaling_point(cfg, eps, horizon, window_dt=None, samples=5):
    """Norms of the quadratic and cubic quantities for one amplitude."""
    from .riemann import initial_state, plan_steps, step_rk4

    c = cfg.with_updates(init_eps=eps, init_kind=cfg.init_kind if cfg.init_kind != "rest" else "single_mode",
                         t_end=horizon)
    state = initial_state(c)
    state.markers = PeriodicGrid(c.n).nodes.copy()
    dt, steps = plan_steps(c, state)
    for _ in range(steps):
        state = step_rk4(state, dt, c.dealias)
    if window_dt is None:
        window_dt = min(eps ** 1.5, 0.01)
    win = window_from_riemann(state, window_dt, samples, c.dealias)
    nf = compute_b_A_formulas(win)
    res = cubic_residual(win)
    m = win.mid
    rhs = cubic_rhs(win.z[m], win.zt[m])
    return {
        "norm_b": float(np.abs(nf.b_formula).max()),
        "norm_Aminus1": float(np.abs(nf.Aminus1_formula).max()),
        "norm_rhs_cubic": float(np.abs(rhs).max()),
        "norm_residual": res,
        "residual_b": nf.residual_b,
        "residual_A": nf.residual_A,
    }


def scaling_study(eps_list, k_mode=1, horizon=1.0, cfg=None, n=128, workers=1):
    """Fit log-log slopes of the normal-form quantities against amplitude."""
    from .config import SolverConfig

    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 3 or any(b >= a for a, b in zip(eps_list, eps_list[1:])) or max(eps_list) > 0.05:
        raise ValueError("eps_list needs >= 3 strictly decreasing values, all <= 0.05")
    if cfg is None:
        # standing waves: a single traveling mode has no non-constant quadratic part in A - 1
        cfg = SolverConfig(n=n, init_kind="single_mode", init_k=k_mode, init_travel=0)
    else:
        cfg = cfg.with_updates(init_k=k_mode)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as ex:
            pts = list(ex.map(scaling_point, [cfg] * len(eps_list), eps_list, [horizon] * len(eps_list)))
    else:
        pts = [scaling_point(cfg, e, horizon) for e in eps_list]
    return ScalingReport(
        epsilons=eps_list,
        norms_b=[p["norm_b"] for p in pts],
        norms_Aminus1=[p["norm_Aminus1"] for p in pts],
        norms_rhs_cubic=[p["norm_rhs_cubic"] for p in pts],
        norms_residual=[p["norm_residual"] for p in pts],
    )
