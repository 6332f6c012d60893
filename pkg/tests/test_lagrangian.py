import csv
import math

import numpy as np
import pytest

from wavecrest.config import SolverConfig
from wavecrest.curve import commutator_bracket, double_layer_adjoint, square_bracket
from wavecrest.lagrangian import (
    LagrangianState,
    compute_lag_aux,
    cross_validate,
    hausdorff_distance,
    holo_residual_lag,
    measure_frequency_lag,
    project_velocity,
    rhs_lag,
    run_lagrangian,
    step_lag,
    write_snapshot_lag,
)
from wavecrest.riemann import compute_aux, initial_state, reconstruct_interface
from wavecrest.spectral import deriv

from conftest import nodes


def rest(n=32):
    z = np.zeros(n, dtype=complex)
    return LagrangianState(0.0, nodes(n) + z, z.copy(), z.copy())


def from_riemann(n=64, eps=0.01, k=1, travel=1):
    rs = initial_state(SolverConfig(n=n, init_kind="single_mode", init_k=k, init_eps=eps, init_travel=travel))
    ls = LagrangianState(0.0, nodes(n) + reconstruct_interface(rs), np.conj(rs.u), np.conj(rs.w))
    return rs, ls


class TestAux:
    def test_rest(self):
        aux = compute_lag_aux(rest())
        assert np.all(aux.a_za == 1) and np.abs(aux.at_za).max() == 0

    def test_rest_rhs(self):
        dz, dzt, dztt = rhs_lag(rest())
        assert max(np.abs(dz).max(), np.abs(dzt).max(), np.abs(dztt).max()) == 0

    def test_matches_riemann_at_initial_time(self):
        # both parametrizations coincide at t = 0
        rs, ls = from_riemann(n=128, eps=0.02)
        aux = compute_lag_aux(ls)
        ref = compute_aux(rs.u, rs.w).atOverA
        assert np.abs(aux.at_za / aux.a_za - ref).max() < 1e-5

    def test_real_and_solved(self):
        _, ls = from_riemann(eps=0.05)
        aux = compute_lag_aux(ls)
        assert aux.at_za.dtype == np.float64
        assert np.abs(aux.a_za - np.abs(ls.ztt + 1j)).max() == 0
        assert np.all(aux.a_za > 0)
        c = aux.curve
        zbt = np.conj(ls.zt)
        rhs = (2 * commutator_bracket(c, ls.ztt, zbt) + 2 * commutator_bracket(c, ls.zt, np.conj(ls.ztt))
               - square_bracket(c, ls.zt, deriv(zbt)))
        y = (1j * c.z_alpha / c.speed * rhs).real
        r = aux.at_za + double_layer_adjoint(c, aux.at_za) - y
        assert np.linalg.norm(r) <= 1e-10 * np.linalg.norm(y)


class TestStepping:
    def test_rest_fixed_point(self):
        s = run_lagrangian(rest(), 1.0, 0.1)
        assert np.abs(s.perturbation).max() < 1e-13
        assert np.abs(s.zt).max() < 1e-13

    def test_frequency(self):
        om = measure_frequency_lag(1, eps=1e-3, n=32)
        assert om == pytest.approx(1.0, rel=0.01)

    def test_rk4_order(self):
        _, s0 = from_riemann(n=32, eps=0.05)
        T = 0.5

        def integrate(m):
            s = s0
            for _ in range(m):
                s = step_lag(s, T / m)
            return s.z

        ref = integrate(160)
        errs = [np.abs(integrate(m) - ref).max() for m in (5, 10, 20)]
        order = -np.polyfit(np.log([5, 10, 20]), np.log(errs), 1)[0]
        assert order == pytest.approx(4, abs=0.3)

    def test_projection_does_not_increase_residual(self):
        _, s = from_riemann(n=32, eps=0.05)
        for _ in range(5):
            s = step_lag(s, 0.1)
        before = holo_residual_lag(s)
        after = holo_residual_lag(project_velocity(s))
        assert after <= before + 1e-15


class TestDistance:
    def test_reparametrized_curve(self):
        n = 64
        a = nodes(n)
        p1 = 0.05j * np.cos(a)
        s = a + 0.1 * np.sin(a)
        p2 = (s - a) + 0.05j * np.cos(s)
        assert hausdorff_distance(p1, p2) < 1e-10

    def test_vertical_shift(self):
        a = nodes(64)
        p = 0.05j * np.cos(a)
        d = hausdorff_distance(p, p + 1e-4j)
        assert d == pytest.approx(1e-4, rel=0.01)

    def test_symmetry(self):
        a = nodes(32)
        p1 = 0.05j * np.cos(a)
        p2 = 0.04j * np.cos(a) + 0.01 * np.sin(2 * a)
        assert hausdorff_distance(p1, p2) == pytest.approx(hausdorff_distance(p2, p1), rel=1e-12)


class TestCrossValidation:
    def test_rest(self):
        rep = cross_validate(SolverConfig(n=32, t_end=1.0))
        assert rep.hausdorff <= 1e-12

    def test_small_wave_and_refinement(self):
        cfg = SolverConfig(n=64, init_kind="single_mode", init_k=1, init_eps=0.01, t_end=0.5)
        fine = cross_validate(cfg)
        coarse = cross_validate(cfg.with_updates(n=32))
        assert fine.hausdorff < 1e-6
        assert fine.hausdorff < coarse.hausdorff
        assert fine.velocity_sup < 1e-6


def test_snapshot_schema(tmp_path):
    path = tmp_path / "lag.csv"
    write_snapshot_lag(path, rest(16))
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["alpha", "Rez", "Imz", "Reu", "Imu", "Rew", "Imw"]
    assert len(rows) == 17
    assert float(rows[5][1]) == pytest.approx(2 * math.pi * 4 / 16, abs=1e-15)
