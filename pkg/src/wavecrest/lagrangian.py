"""Cross-validation integrator in Lagrangian coordinates.

Evolves the particle positions ``z``, velocities ``z_t`` and accelerations
``z_tt`` of the interface. The curve operators are rebuilt on the moving
curve at every stage, and the coefficient ``a_t |z_alpha|`` comes from a
second-kind integral equation with the adjoint double-layer operator.
"""
import math
from dataclasses import dataclass

import numpy as np

from .curve import (
    DEFAULT_CHORD_ARC_FLOOR,
    DEFAULT_SOLVER_TOL,
    CurveParam,
    commutator_bracket,
    holo_project_curve,
    solve_I_plus_Kstar,
    square_bracket,
)
from .errors import NumericalBlowup, TaylorDegeneracyError
from .spectral import DEFAULT_DEALIAS, PeriodicGrid, dealias, deriv, trig_eval
from .timestep import rk4_step

A_ZA_FLOOR = 1e-8


@dataclass
class LagrangianState:
    t: float
    z: np.ndarray
    zt: np.ndarray
    ztt: np.ndarray

    @property
    def n(self):
        return self.z.size

    @property
    def perturbation(self):
        return self.z - PeriodicGrid(self.n).nodes


@dataclass
class LagAux:
    a_za: np.ndarray
    at_za: np.ndarray
    unit: np.ndarray
    curve: CurveParam


def compute_lag_aux(state, tol=DEFAULT_SOLVER_TOL, chord_arc_floor=DEFAULT_CHORD_ARC_FLOOR):
    """``a|z_alpha| = |z_tt + i|`` and ``a_t|z_alpha|`` from ``(I + K*) x = rhs``."""
    c = CurveParam(state.z, chord_arc_floor=chord_arc_floor)
    zt, ztt = state.zt, state.ztt
    a_za = np.abs(ztt + 1j)
    if a_za.min() < A_ZA_FLOOR:
        raise TaylorDegeneracyError(f"|z_tt + i| fell to {a_za.min():.3e}")
    zbt = np.conj(zt)
    rhs = (
        2.0 * commutator_bracket(c, ztt, zbt)
        + 2.0 * commutator_bracket(c, zt, np.conj(ztt))
        - square_bracket(c, zt, deriv(zbt))
    )
    rhs_real = (1j * c.z_alpha / c.speed * rhs).real
    at_za = solve_I_plus_Kstar(c, rhs_real, tol=tol)
    unit = (np.conj(ztt) - 1j) / a_za
    return LagAux(a_za=a_za, at_za=at_za, unit=unit, curve=c)


def _lag_rhs(y, fraction, tol, floor):
    p, zt, ztt = y
    alpha = PeriodicGrid(p.size).nodes
    state = LagrangianState(0.0, alpha + p, zt, ztt)
    aux = compute_lag_aux(state, tol, floor)
    a = aux.a_za / aux.curve.speed
    dzbtt = -1j * a * deriv(np.conj(zt)) + aux.unit * aux.at_za
    dztt = dealias(np.conj(dzbtt), fraction)
    if not np.all(np.isfinite(dztt)):
        raise NumericalBlowup("non-finite Lagrangian right-hand side")
    return zt, ztt, dztt


def rhs_lag(state, fraction=DEFAULT_DEALIAS, tol=DEFAULT_SOLVER_TOL, chord_arc_floor=DEFAULT_CHORD_ARC_FLOOR):
    """``(dz, dz_t, dz_tt)``."""
    return _lag_rhs((state.perturbation, state.zt, state.ztt), fraction, tol, chord_arc_floor)


def project_velocity(state):
    """Replace ``conj(z_t)`` by its curve-holomorphic part ``(I + H)/2 conj(z_t)``."""
    c = CurveParam(state.z, check=False)
    zbt = holo_project_curve(c, np.conj(state.zt))
    return LagrangianState(state.t, state.z, np.conj(zbt), state.ztt)


def step_lag(state, dt, fraction=DEFAULT_DEALIAS, tol=DEFAULT_SOLVER_TOL,
             chord_arc_floor=DEFAULT_CHORD_ARC_FLOOR):
    y = (state.perturbation, state.zt, state.ztt)
    p, zt, ztt = rk4_step(lambda s: _lag_rhs(s, fraction, tol, chord_arc_floor), y, dt)
    alpha = PeriodicGrid(p.size).nodes
    return LagrangianState(state.t + dt, alpha + p, zt, ztt)


def holo_residual_lag(state):
    """Sup of ``(I - H) conj(z_t)`` on the current curve."""
    c = CurveParam(state.z, check=False)
    zbt = np.conj(state.zt)
    return float(np.max(np.abs(zbt - c.hilbert_matrix @ zbt)))


def cfl_dt_lag(state, fraction=DEFAULT_DEALIAS, safety=0.5):
    speed = CurveParam(state.z, check=False).speed
    a_eff = np.abs(state.ztt + 1j) / speed ** 2
    kmax = state.n * fraction / 2.0
    return safety * 2.8 / math.sqrt(kmax * a_eff.max())


def run_lagrangian(state, t_end, dt, cadence=5, fraction=DEFAULT_DEALIAS, tol=DEFAULT_SOLVER_TOL,
                   chord_arc_floor=DEFAULT_CHORD_ARC_FLOOR, callback=None):
    """Integrate to ``t_end`` with a fixed step near ``dt``; projects every ``cadence`` steps."""
    steps = max(1, int(math.ceil(t_end / dt - 1e-9))) if t_end > 0 else 0
    dt = t_end / steps if steps else 0.0
    for i in range(1, steps + 1):
        state = step_lag(state, dt, fraction, tol, chord_arc_floor)
        if cadence and i % cadence == 0:
            state = project_velocity(state)
        if callback is not None:
            callback(i, state)
    return state


def measure_frequency_lag(k, eps=1e-3, n=64, periods=1.0, samples_per_period=20):
    """Angular frequency of small traveling single-mode data, from the phase of mode ``-k`` of ``conj(z_t)``."""
    from .config import SolverConfig
    from .riemann import initial_state, reconstruct_interface

    cfg = SolverConfig(n=n, init_kind="single_mode", init_k=k, init_eps=eps, init_travel=1)
    rs = initial_state(cfg)
    alpha = PeriodicGrid(n).nodes
    st = LagrangianState(0.0, alpha + reconstruct_interface(rs), np.conj(rs.u), np.conj(rs.w))
    T = periods * 2 * math.pi / math.sqrt(k)
    nsamp = int(periods * samples_per_period)
    sub = max(1, int(math.ceil(T / nsamp / cfl_dt_lag(st))))
    dt = T / (nsamp * sub)
    times, phases = [0.0], [np.angle(np.fft.fft(np.conj(st.zt))[-k])]
    for i in range(nsamp * sub):
        st = step_lag(st, dt)
        if (i + 1) % sub == 0:
            times.append(st.t)
            phases.append(np.angle(np.fft.fft(np.conj(st.zt))[-k]))
    return abs(np.polyfit(times, np.unwrap(phases), 1)[0])


# Curve distance -------------------------------------------------------------


def _nearest_parameter(points, p, iters=30):
    """For each point, the parameter of the closest point on ``beta + p(beta)``."""
    n = p.size
    alpha = PeriodicGrid(n).nodes
    nodes = alpha + p
    beta = np.empty(points.size)
    for i, q in enumerate(points):
        d = np.abs(q - nodes[:, None] - 2.0 * np.pi * np.array([-1, 0, 1])[None, :])
        j, m = np.unravel_index(np.argmin(d), d.shape)
        beta[i] = alpha[j] + 2.0 * np.pi * (m - 1)
    for _ in range(iters):
        B = beta + trig_eval(p, beta)
        B1 = 1.0 + trig_eval(p, beta, 1)
        B2 = trig_eval(p, beta, 2)
        r = points - B
        g = -np.real(np.conj(r) * B1)
        hess = np.abs(B1) ** 2 - np.real(np.conj(r) * B2)
        step = g / hess
        beta = beta - step
        if np.max(np.abs(step)) < 1e-15:
            break
    return beta


def curve_distance(points, p):
    """Distance from each point to the periodic curve ``beta + p(beta)``."""
    beta = _nearest_parameter(points, p)
    return np.abs(points - beta - trig_eval(p, beta))


def hausdorff_distance(p1, p2):
    """Symmetric Hausdorff distance between two periodic curves ``alpha + p``.

    Nodes of each curve are projected onto the trigonometric interpolant of
    the other by Newton's method, so the result does not depend on how the
    two curves are parametrized.
    """
    a1 = PeriodicGrid(p1.size).nodes + p1
    a2 = PeriodicGrid(p2.size).nodes + p2
    return float(max(curve_distance(a1, p2).max(), curve_distance(a2, p1).max()))


@dataclass
class CrossValidationReport:
    t: float
    n: int
    dt: float
    hausdorff: float
    position_sup: float
    velocity_sup: float
    holo_residual: float

    def as_dict(self):
        return dict(self.__dict__)


def cross_validate(cfg, t_end=None):
    """Run both formulations from matched data and compare at the final time.

    Returns
    -------
    CrossValidationReport
        ``hausdorff`` compares the interfaces as point sets;
        ``position_sup`` and ``velocity_sup`` compare particle positions and
        velocities at matching Lagrangian labels (the Riemann run advects the
        labels with the drift ``B``).
    """
    from .riemann import initial_state, lagrangian_fields, plan_steps, reconstruct_interface, step_rk4

    T = cfg.t_end if t_end is None else t_end
    rs = initial_state(cfg)
    alpha = PeriodicGrid(cfg.n).nodes
    ls = LagrangianState(0.0, alpha + reconstruct_interface(rs), np.conj(rs.u), np.conj(rs.w))
    rs.markers = alpha.copy()
    dt, steps = plan_steps(cfg.with_updates(t_end=T), rs)
    dt = min(dt, cfl_dt_lag(ls, cfg.dealias)) if steps else 0.0
    steps = max(1, int(math.ceil(T / dt - 1e-9))) if T > 0 else 0
    dt = T / steps if steps else 0.0
    for i in range(1, steps + 1):
        project = cfg.projection_cadence > 0 and i % cfg.projection_cadence == 0
        rs = step_rk4(rs, dt, cfg.dealias, project=project)
        ls = step_lag(ls, dt, cfg.dealias, cfg.solver_tol, cfg.chord_arc_floor)
        if cfg.lag_projection_cadence and i % cfg.lag_projection_cadence == 0:
            ls = project_velocity(ls)
    pR = reconstruct_interface(rs)
    zR, ztR, _ = lagrangian_fields(rs)
    return CrossValidationReport(
        t=T,
        n=cfg.n,
        dt=dt,
        hausdorff=hausdorff_distance(pR, ls.perturbation),
        position_sup=float(np.max(np.abs(zR - ls.z))),
        velocity_sup=float(np.max(np.abs(ztR - ls.zt))),
        holo_residual=holo_residual_lag(ls),
    )


def write_snapshot_lag(path, state):
    """CSV snapshot ``alpha,Rez,Imz,Reu,Imu,Rew,Imw`` with ``u = conj(z_t)``, ``w = conj(z_tt)``."""
    from .riemann import RiemannState, write_snapshot

    rs = RiemannState(state.t, np.conj(state.zt), np.conj(state.ztt))
    write_snapshot(path, rs, p=state.perturbation, columns=("z",))
