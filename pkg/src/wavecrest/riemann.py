"""Free-surface evolution in the Riemann-mapping variable.

The unknowns are the conjugate velocity ``u`` and conjugate acceleration
``w`` sampled on the flat parameter line, with ``Z_t = conj(u)`` and
``Z_tt = conj(w)``. The interface itself is never evolved: ``Z_alpha`` is
recovered algebraically from ``(u, w)`` and integrated once in space, with
only its mean carried as a separate scalar.
"""
import csv
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .curve import CurveParam, chord_arc_constant
from .errors import (
    DegenerateMap,
    NotHolomorphic,
    NumericalBlowup,
    SurfaceContactError,
    TaylorDegeneracyError,
    WavecrestError,
)
from .spectral import (
    DEFAULT_DEALIAS,
    PeriodicGrid,
    abs_deriv,
    antideriv,
    check_field,
    dealias,
    deriv,
    hilbert_flat,
    holo_part,
    l2_norm,
    trig_eval,
    wavenumbers,
)
from .timestep import rk4_step

from . import kernels

TAYLOR_FLOOR = 1.0 - 1e-6
ACCEL_FLOOR = 1e-8
HOLO_TOL = 1e-10


@dataclass
class RiemannState:
    """Evolved unknowns.

    Attributes
    ----------
    t : float
    u : ndarray
        Conjugate velocity, spectrum in ``k < 0``.
    w : ndarray
        Conjugate acceleration.
    zbar_mean : complex
        Mean of ``Z - alpha'``.
    markers : ndarray or None
        Riemann-variable positions ``h(alpha_j, t)`` of particles that sat on
        the nodes at t = 0, carried only when Lagrangian output is requested.
    """

    t: float
    u: np.ndarray
    w: np.ndarray
    zbar_mean: complex = 0.0
    markers: np.ndarray = None

    @property
    def n(self):
        return self.u.size


@dataclass
class AuxFields:
    A1: np.ndarray
    invZa: np.ndarray
    Acal: np.ndarray
    B: np.ndarray
    atOverA: np.ndarray
    g: np.ndarray


@dataclass
class DiagnosticsRecord:
    t: float
    energy: float
    taylor_min: float
    A1_min: float
    chord_arc: float
    holo_residual: float
    mean_height: float

    FIELDS = ("t", "energy", "taylor_min", "A1_min", "chord_arc", "holo_residual", "mean_height")

    def as_row(self):
        return [getattr(self, k) for k in self.FIELDS]


def _comm(f, g):
    """Flat commutator ``[f, H] g``."""
    return f * hilbert_flat(g) - hilbert_flat(f * g)


def compute_A1(u):
    """``A1 = 1 - Im [Z_t, H] d(u)`` with ``Z_t = conj(u)``, evaluated spectrally."""
    u = check_field(u, "u")
    return 1.0 - _comm(np.conj(u), deriv(u)).imag


def compute_A1_quadrature(u):
    """Positive-kernel form ``1 + (1/8π) ∫ |Z_t(a) - Z_t(b)|^2 / sin^2((a - b)/2) db``."""
    u = check_field(u, "u")
    n = u.size
    alpha = PeriodicGrid(n).nodes.astype(complex)
    h = 2.0 * np.pi / n
    s = kernels.abs2_diff(alpha, u, np.ones(n, dtype=complex))
    return 1.0 + (2.0 * h / (2.0 * np.pi)) * s.real


def square_bracket_flat(f, g):
    """``(1/πi) ∫ (f(a) - f(b))^2 / (4 sin^2((a - b)/2)) g(b) db`` via commutators.

    Uses ``[f, f; g] = -([f^2, H] dg - 2 [f, H] d(f g))``, an integration-by-parts
    identity that holds exactly for the periodic kernel.
    """
    return -(_comm(f * f, deriv(g)) - 2.0 * _comm(f, deriv(f * g)))


def compute_aux(u, w):
    """Auxiliary fields of the quasilinear system.

    Raises
    ------
    TaylorDegeneracyError
        If ``min A1 < 1 - 1e-6`` or ``|w - i|`` drops below ``1e-8``.
    """
    u = check_field(u, "u")
    w = check_field(w, "w")
    A1 = compute_A1(u)
    if A1.min() < TAYLOR_FLOOR:
        raise TaylorDegeneracyError(f"A1 fell to {A1.min():.6e} (< 1 - 1e-6)")
    wmi = w - 1j
    if np.abs(wmi).min() < ACCEL_FLOOR:
        raise TaylorDegeneracyError(f"|w - i| fell to {np.abs(wmi).min():.3e}")
    Zt = np.conj(u)
    Ztt = np.conj(w)
    invZa = 1j * wmi / A1
    Acal = A1 * np.abs(invZa) ** 2
    B = _comm(Zt, invZa - 1.0).real + 2.0 * Zt.real
    du = deriv(u)
    Dzbar = invZa * du
    num = 2.0 * _comm(Zt, deriv(w)) + 2.0 * _comm(Ztt, du) - square_bracket_flat(Zt, Dzbar)
    atOverA = -num.imag / A1
    return AuxFields(A1=A1, invZa=invZa, Acal=Acal, B=B, atOverA=atOverA, g=wmi * atOverA)


def _riemann_rhs(y, fraction):
    u, w, zm, markers = y
    aux = compute_aux(u, w)
    du = deriv(u)
    dudt = dealias(-aux.B * du + w, fraction)
    dwdt = dealias(-aux.B * deriv(w) - 1j * aux.Acal * du + aux.g, fraction)
    dzm = np.mean(np.conj(u) - aux.B / aux.invZa)
    dm = None if markers is None else trig_eval(aux.B.astype(complex), markers).real
    for arr in (dudt, dwdt):
        if not np.all(np.isfinite(arr)):
            raise NumericalBlowup("non-finite right-hand side")
    return dudt, dwdt, dzm, dm


def rhs(state, fraction=DEFAULT_DEALIAS):
    """Time derivatives ``(du/dt, dw/dt)`` of the state."""
    dudt, dwdt, _, _ = _riemann_rhs((state.u, state.w, state.zbar_mean, None), fraction)
    return dudt, dwdt


def project_state(u, w):
    """Restore the holomorphicity constraints.

    ``u`` is projected onto ``k < 0``. ``w`` is not projected directly: the
    holomorphic quantity is ``1/Z_alpha - 1 = i(w - i)/A1 - 1``, which is
    projected and mapped back to ``w``.
    """
    u = holo_part(u)
    A1 = compute_A1(u)
    q = 1j * (w - 1j) / A1 - 1.0
    q = holo_part(q)
    w = 1j - 1j * A1 * (1.0 + q)
    return u, w


def step_rk4(state, dt, fraction=DEFAULT_DEALIAS, project=True):
    """One RK4 step, followed by projection when ``project`` is true."""
    y = (state.u, state.w, complex(state.zbar_mean), state.markers)
    u, w, zm, markers = rk4_step(lambda s: _riemann_rhs(s, fraction), y, dt)
    if project:
        u, w = project_state(u, w)
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(w)) and np.isfinite(zm)):
        raise NumericalBlowup(f"non-finite state at t = {state.t + dt:.6g}")
    return RiemannState(t=state.t + dt, u=u, w=w, zbar_mean=zm, markers=markers)


# Initial data ---------------------------------------------------------------


def _check_holomorphic(f, name, tol=1e-10):
    c = np.fft.fft(f) / f.size
    k = wavenumbers(f.size)
    bad = np.abs(c[k >= 0]).max(initial=0.0)
    scale = max(np.abs(c).max(initial=0.0), 1.0)
    if bad > tol * scale:
        raise NotHolomorphic(f"{name} has spectrum at k >= 0 (max |c_k| = {bad:.3e})")


def init_state(surface, u0, zbar_mean=0.0, t=0.0):
    """Build a compatible state from ``Z_alpha - 1`` and the initial ``u``.

    ``w`` follows from ``1/Z_alpha = i(w - i)/A1``.

    Raises
    ------
    NotHolomorphic
        If either input has spectrum at ``k >= 0``.
    DegenerateMap
        If ``min |Z_alpha| < 1e-3``.
    """
    surface = check_field(surface, "surface")
    u0 = check_field(u0, "u0")
    if surface.size != u0.size:
        raise ValueError("surface and u0 must share one grid")
    PeriodicGrid(surface.size)
    _check_holomorphic(surface, "Z_alpha - 1")
    _check_holomorphic(u0, "u0")
    Za = 1.0 + surface
    if np.abs(Za).min() < 1e-3:
        raise DegenerateMap(f"min |Z_alpha| = {np.abs(Za).min():.3e} < 1e-3")
    A1 = compute_A1(u0)
    invZ = 1.0 / Za
    w = 1j - 1j * A1 * invZ
    back = 1j * (w - 1j) / A1
    if np.abs(back - invZ).max() > 1e-10:
        raise DegenerateMap("1/Z_alpha round trip failed")
    return RiemannState(t=t, u=u0.copy(), w=w, zbar_mean=complex(zbar_mean))


def graph_parametrization(n, eps, k=1, phase=0.0, iters=200, tol=1e-14):
    """Conformal parametrization of the graph ``y = eps cos(k (x + phase))``.

    Returns the perturbation ``Z - alpha`` with spectrum in ``k < 0`` plus a
    constant. Solved by fixed-point iteration on the height.
    """
    alpha = PeriodicGrid(n).nodes
    y = eps * np.cos(k * (alpha + phase))
    for _ in range(iters):
        x = (1j * hilbert_flat(y)).real
        y_new = eps * np.cos(k * (alpha + x + phase))
        if np.abs(y_new - y).max() < tol:
            y = y_new
            break
        y = y_new
    x = (1j * hilbert_flat(y)).real
    return x + 1j * y


def initial_state(cfg):
    """Initial state described by a SolverConfig."""
    n = cfg.n
    alpha = PeriodicGrid(n).nodes
    k = cfg.init_k
    eps = cfg.init_eps
    if cfg.init_kind == "rest" or eps == 0.0:
        zero = np.zeros(n, dtype=complex)
        return init_state(zero, zero)
    mode = np.exp(-1j * k * (alpha + cfg.init_phase))
    if cfg.init_kind == "single_mode":
        p = 1j * eps * mode
        zbar_mean = 0.0
    else:
        p = graph_parametrization(n, eps, k, cfg.init_phase)
        zbar_mean = np.mean(p)
    surface = deriv(p)
    u0 = cfg.init_travel * eps * math.sqrt(k) * mode
    return init_state(surface, u0, zbar_mean=zbar_mean)


# Reconstruction and diagnostics -------------------------------------------


def interface_derivative(state):
    A1 = compute_A1(state.u)
    return A1 / (1j * (state.w - 1j))


def reconstruct_interface(state, chord_arc_floor=None):
    """Samples of ``Z - alpha'``.

    Raises
    ------
    SurfaceContactError
        If ``chord_arc_floor`` is given and the curve violates it.
    """
    Za = interface_derivative(state)
    d = Za - 1.0
    d = d - np.mean(d)
    p = antideriv(d) + state.zbar_mean
    if chord_arc_floor is not None:
        mu = chord_arc_constant(PeriodicGrid(p.size).nodes + p)
        if mu < chord_arc_floor:
            raise SurfaceContactError(f"chord-arc {mu:.3e} below floor at t = {state.t:.6g}")
    return p


def energy(state, s=0.0):
    """``|| |D|^s w ||^2 + || |D|^(s+1/2) u ||^2`` (L2 on one period)."""
    k = np.abs(wavenumbers(state.n))
    cw = np.fft.fft(state.w) / state.n
    cu = np.fft.fft(state.u) / state.n
    ks = np.where(k > 0, k ** s, 1.0 if s == 0 else 0.0)
    return float(2.0 * np.pi * np.sum(ks ** 2 * np.abs(cw) ** 2 + ks ** 2 * k * np.abs(cu) ** 2))


def mean_height(p, Za):
    """Mean water level ``(1/2π) ∫ Im Z · Re Z_alpha dalpha``, conserved by the flow."""
    return float(np.mean(p.imag * Za.real))


def holo_residual(u):
    return l2_norm(u - hilbert_flat(u))


def diagnostics(state, s=0.0):
    A1 = compute_A1(state.u)
    Za = A1 / (1j * (state.w - 1j))
    p = reconstruct_interface(state)
    alpha = PeriodicGrid(state.n).nodes
    return DiagnosticsRecord(
        t=float(state.t),
        energy=energy(state, s),
        taylor_min=float(np.min(A1 / np.abs(Za))),
        A1_min=float(A1.min()),
        chord_arc=chord_arc_constant(alpha + p),
        holo_residual=holo_residual(state.u),
        mean_height=mean_height(p, Za),
    )


def cfl_dt(state, fraction=DEFAULT_DEALIAS, safety=0.5):
    """``safety * min(h/(|B|max + 0.1), 2.8/sqrt(kmax * max Acal))``."""
    aux = compute_aux(state.u, state.w)
    h = 2.0 * np.pi / state.n
    kmax = state.n * fraction / 2.0
    return safety * min(h / (np.abs(aux.B).max() + 0.1), 2.8 / math.sqrt(kmax * aux.Acal.max()))


def plan_steps(cfg, state):
    """Step size and count reaching ``cfg.t_end`` exactly."""
    if cfg.t_end == 0:
        return 0.0, 0
    dt = cfl_dt(state, cfg.dealias) if cfg.dt_auto else cfg.dt
    steps = max(1, int(math.ceil(cfg.t_end / dt - 1e-9)))
    return cfg.t_end / steps, steps


# Driver ---------------------------------------------------------------------


def _fmt(x):
    return format(float(x), ".17g")


def write_snapshot(path, state, p=None, columns=("Z",)):
    """CSV snapshot ``alpha,ReZ,ImZ,Reu,Imu,Rew,Imw``."""
    if p is None:
        p = reconstruct_interface(state)
    alpha = PeriodicGrid(state.n).nodes
    Z = alpha + p
    name = columns[0]
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["alpha", f"Re{name}", f"Im{name}", "Reu", "Imu", "Rew", "Imw"])
        for j in range(state.n):
            wr.writerow([_fmt(v) for v in (alpha[j], Z[j].real, Z[j].imag, state.u[j].real,
                                           state.u[j].imag, state.w[j].real, state.w[j].imag)])


def write_diagnostics(path, records):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(DiagnosticsRecord.FIELDS)
        for r in records:
            wr.writerow([_fmt(v) for v in r.as_row()])


@dataclass
class RunResult:
    states: list
    records: list
    dt: float
    steps: int
    error: WavecrestError = None
    files: list = field(default_factory=list)
    t_last: float = 0.0

    @property
    def completed(self):
        return self.error is None


def run(cfg, state=None, keep_states=True, track_markers=False, callback=None):
    """Integrate from the configured initial data to ``cfg.t_end``.

    Typed errors stop the loop; the partial trajectory and the error are
    returned (and flushed to ``cfg.output_dir`` when set) rather than raised.

    Parameters
    ----------
    cfg : SolverConfig
    state : RiemannState, optional
        Overrides the configured initial data.
    keep_states : bool
        Store the state at every output tick.
    track_markers : bool
        Also advect particle markers (needed for Lagrangian windows).
    callback : callable, optional
        Called as ``callback(step, state)`` after every step.
    """
    out_dir = cfg.output_dir or None
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    states, records, files = [], [], []
    dt, steps, error = 0.0, 0, None
    last, emitted = None, False

    def emit(index, st):
        rec = diagnostics(st, cfg.energy_s)
        records.append(rec)
        if keep_states:
            states.append(st)
        if out_dir:
            path = os.path.join(out_dir, f"snap_{index:06d}.csv")
            write_snapshot(path, st)
            files.append(path)

    try:
        if state is None:
            state = initial_state(cfg)
        if track_markers and state.markers is None:
            state = replace(state, markers=PeriodicGrid(state.n).nodes.copy())
        dt, steps = plan_steps(cfg, state)
        emit(0, state)
        last, emitted, tick = state, True, 0
        for i in range(1, steps + 1):
            project = cfg.projection_cadence > 0 and i % cfg.projection_cadence == 0
            new = step_rk4(state, dt, cfg.dealias, project=project)
            if cfg.chord_arc_floor:
                reconstruct_interface(new, cfg.chord_arc_floor)
            state = last = new
            emitted = False
            if callback is not None:
                callback(i, state)
            if (cfg.output_cadence and i % cfg.output_cadence == 0) or i == steps:
                tick += 1
                emit(tick, state)
                emitted = True
    except WavecrestError as exc:
        error = exc
        if last is not None and not emitted:
            # keep the last good state on disk
            try:
                emit(tick + 1, last)
            except WavecrestError:
                pass
    if out_dir:
        path = os.path.join(out_dir, "diagnostics.csv")
        write_diagnostics(path, records)
        files.append(path)
    t_last = last.t if last is not None else 0.0
    return RunResult(states=states, records=records, dt=dt, steps=steps, error=error, files=files, t_last=t_last)


def lagrangian_fields(state):
    """Lagrangian ``(z, z_t, z_tt)`` at the particle markers of ``state``."""
    if state.markers is None:
        raise ValueError("state carries no particle markers")
    m = state.markers
    p = reconstruct_interface(state)
    z = m + trig_eval(p, m)
    zt = np.conj(trig_eval(state.u, m))
    ztt = np.conj(trig_eval(state.w, m))
    return z, zt, ztt


def measure_frequency(k, eps=1e-3, n=128, periods=2.0, samples_per_period=40, fraction=DEFAULT_DEALIAS):
    """Angular frequency of a small traveling single-mode wave.

    Fits the unwrapped phase of the ``-k`` Fourier coefficient of ``u``.
    """
    from .config import SolverConfig

    omega0 = math.sqrt(k)
    cfg = SolverConfig(n=n, init_kind="single_mode", init_k=k, init_eps=eps, init_travel=1,
                       dealias=fraction, t_end=periods * 2 * math.pi / omega0)
    state = initial_state(cfg)
    dt_cfl, _ = plan_steps(cfg, state)
    T = cfg.t_end
    nsamp = int(periods * samples_per_period)
    sub = max(1, int(math.ceil(T / nsamp / dt_cfl)))
    dt = T / (nsamp * sub)
    times, phases = [0.0], [np.angle(np.fft.fft(state.u)[-k])]
    for i in range(nsamp * sub):
        state = step_rk4(state, dt, fraction)
        if (i + 1) % sub == 0:
            times.append(state.t)
            phases.append(np.angle(np.fft.fft(state.u)[-k]))
    slope = np.polyfit(times, np.unwrap(phases), 1)[0]
    return abs(slope)
