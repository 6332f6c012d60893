"""Command-line driver: ``wavecrest run|identities|convergence|scaling|crossvalidate``.

Every invocation writes ``manifest.json`` into the output directory, also
when it fails. Exit codes: 0 success, 1 configuration, 2 numerical blow-up,
3 surface contact, 4 solver convergence, 5 Taylor degeneracy, 6 a check in
a PASS/FAIL table failed.
"""
import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
import time

import numpy as np

from . import __version__
from .config import SolverConfig, load_config
from .errors import ConfigError, WavecrestError

CHECK_FAILED = 6


class CheckTable:
    """Collects (name, measured, threshold, passed) rows and prints them."""

    def __init__(self, out=None):
        self.rows = []
        self.out = out or sys.stdout

    def add(self, name, measured, threshold, passed=None, relation="<="):
        if passed is None:
            passed = bool(measured <= threshold)
        self.rows.append((name, float(measured), threshold, bool(passed), relation))
        status = "PASS" if passed else "FAIL"
        thr = threshold if isinstance(threshold, str) else format(threshold, ".17g")
        print(f"{status}  {name:<46s} {format(float(measured), '.17g'):>24s}  {relation} {thr}", file=self.out)
        return passed

    @property
    def ok(self):
        return all(r[3] for r in self.rows)

    def as_list(self):
        return [{"name": r[0], "measured": r[1], "threshold": r[2], "passed": r[3]} for r in self.rows]


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, manifest):
    """Atomically write ``manifest.json`` (temp file + rename)."""
    os.makedirs(out_dir, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=".manifest-", suffix=".json")
    with os.fdopen(fd, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    final = os.path.join(out_dir, "manifest.json")
    os.replace(tmp, final)
    return final


def _threads():
    try:
        return max(1, int(os.environ.get("WAVECREST_THREADS", "1")))
    except ValueError:
        return 1


def _resolve_config(args, default):
    cfg = load_config(args.config) if args.config else default
    updates = {}
    if args.n is not None:
        updates["n"] = args.n
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.out is not None:
        updates["output_dir"] = args.out
    if updates:
        try:
            cfg = cfg.with_updates(**updates)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
    return cfg


# Subcommands --------------------------------------------------------------


def cmd_run(cfg, ctx):
    from .riemann import run

    result = run(cfg, keep_states=False)
    ctx["files"].extend(result.files)
    recs = result.records
    if recs:
        e0 = recs[0].energy
        drift = max(abs(r.energy - e0) for r in recs) / e0 if e0 > 0 else 0.0
        ctx["summary"] = {
            "steps": result.steps,
            "dt": result.dt,
            "t_final": recs[-1].t,
            "energy_drift": drift,
            "A1_min": min(r.A1_min for r in recs),
            "taylor_min": min(r.taylor_min for r in recs),
            "mean_height_drift": max(abs(r.mean_height - recs[0].mean_height) for r in recs),
        }
        ctx["summary"]["t_final"] = result.t_last
        verb = "completed" if result.error is None else "stopped after"
        print(f"{verb} t = {result.t_last:.6g} with dt = {result.dt:.6g}; "
              f"energy drift {drift:.3e}; min A1 {ctx['summary']['A1_min']:.12f}")
        sys.stdout.flush()
    if result.error is not None:
        raise type(result.error)(f"{result.error} (last good time t = {result.t_last:.6g})")
    return 0


def cmd_identities(cfg, ctx):
    from .curve import (
        CurveParam,
        KernelSpec,
        c1_op,
        c2_op,
        curve_hilbert,
        double_layer_adjoint,
        identity_battery,
        solve_I_plus_Kstar,
    )
    from .riemann import compute_A1, compute_A1_quadrature
    from .spectral import PeriodicGrid, deriv, hilbert_flat, wavenumbers

    n, rng = cfg.n, np.random.default_rng(cfg.seed)
    alpha = PeriodicGrid(n).nodes
    k = wavenumbers(n)
    tab = CheckTable()

    def band(kmax, holo=False):
        mask = (np.abs(k) <= kmax) & (k != 0)
        if holo:
            mask &= k < 0
        c = np.zeros(n, dtype=complex)
        c[mask] = (rng.normal(size=mask.sum()) + 1j * rng.normal(size=mask.sum())) / (1 + np.abs(k[mask])) ** 2
        return np.fft.ifft(c) * n

    f = band(n // 2 - 1)
    tab.add("flat H^2 = I on mean-zero fields", np.abs(hilbert_flat(hilbert_flat(f)) - f).max(), 1e-13)
    curve = CurveParam(alpha + 0.1j * np.exp(-1j * alpha) + 0.05 * np.exp(-2j * alpha) + 0.02 * np.cos(alpha))
    tab.add("curve H1 = 0", np.abs(curve_hilbert(curve, np.ones(n))).max(), 1e-8)
    g = np.exp(-1j * curve.z)
    tab.add("(I - H) e^{-iz} = 0", np.abs(g - curve_hilbert(curve, g)).max(), 1e-8)
    flat = CurveParam(alpha + 0j)
    tab.add("flat-curve reduction", np.abs(curve_hilbert(flat, f) - hilbert_flat(f)).max(), 1e-10)

    def family(dt):
        ts = (-dt, 0.0, dt)
        cs = [CurveParam(alpha + 0.1j * np.cos(alpha + t) + 0.05 * (1 + t) * np.sin(2 * alpha) + 0.3 * t) for t in ts]
        fs = [np.cos(alpha) * np.exp(t) + np.sin(3 * alpha + t) for t in ts]
        return cs, fs

    dts = (0.02, 0.01, 0.005)
    reps = [identity_battery(*family(dt), dt, seed=cfg.seed) for dt in dts]
    tres = [r["time_identity"] for r in reps]
    rate = float(np.polyfit(np.log(dts), np.log(tres), 1)[0])
    tab.add("time-derivative commutator identity rate", rate, "2 +- 0.2", abs(rate - 2) <= 0.2, "~")
    tab.add("[f,H]g = 0 for holomorphic f, g", reps[-1]["holomorphic_pair"], 1e-8)
    tab.add("[f,H]Hg + [Hf,H]g = 0 (flat)", reps[-1]["product_identity_flat"], 1e-10)
    tab.add("[f,H]Hg + [Hf,H]g = 0 (curve)", reps[-1]["product_identity"], 1e-8)

    c0 = CurveParam(alpha + 0.01j * np.cos(alpha))
    y = np.cos(2 * alpha) + 0.3 * np.sin(alpha)
    x = solve_I_plus_Kstar(c0, y, tol=cfg.solver_tol)
    s, t = y.copy(), y.copy()
    for _ in range(8):
        t = -double_layer_adjoint(c0, t)
        s = s + t
    tab.add("(I + K*) solve vs Neumann series", np.abs(x - s).max(), 1e-9)

    a1 = 0.3 * np.sin(alpha) + 0.1 * np.cos(2 * alpha)
    a2 = 0.2 * np.cos(alpha)
    spec = KernelSpec(lambda q: 1.0 / q ** 2, 0.1 * np.exp(-1j * alpha), [a1, a2], [0.7, 0.0])
    lam = 1.7
    spec_l = KernelSpec(spec.F, spec.H, [lam * a1, lam * a2], [lam * 0.7, 0.0])
    ff = np.exp(-2j * alpha) + 0.5 * np.cos(3 * alpha)
    base = c1_op(spec, ff)
    tab.add("C1 multilinear scaling (relative)", np.abs(c1_op(spec_l, ff) - lam ** 2 * base).max() / np.abs(base).max(), 1e-12)
    spec1 = KernelSpec(lambda q: 1.0, np.zeros(n), [a1], [0.7])
    h = 2 * np.pi / n
    oracle = (-c1_op(spec1, ff) + np.pi * 1j * hilbert_flat((0.7 + deriv(a1).real) * ff)
              - 0.25 * (a1 * np.sum(ff) * h - np.sum(a1 * ff) * h))
    tab.add("C2 vs integration-by-parts expansion", np.abs(c2_op(spec1, ff) - oracle).max(), 1e-8)
    spec0 = KernelSpec(lambda q: 1.0, np.zeros(n), [np.zeros(n)], [1.0])
    tab.add("C1 with A = x equals pi i H", np.abs(c1_op(spec0, ff) - np.pi * 1j * hilbert_flat(ff)).max(), 1e-10)

    u = 0.1 * band(n // 4, holo=True) / max(np.abs(band(n // 4, holo=True)).max(), 1e-300)
    tab.add("A1 commutator vs quadrature form", np.abs(compute_A1(u) - compute_A1_quadrature(u)).max(), 1e-8)
    for eps in (1e-2, 1e-3):
        v = eps * np.exp(-1j * alpha)
        tab.add(f"A1 = 1 + eps^2 at eps = {eps:g}", np.abs(compute_A1(v) - 1 - eps ** 2).max(), 1e-10)
    ctx["checks"] = tab.as_list()
    return 0 if tab.ok else CHECK_FAILED


def cmd_convergence(cfg, ctx):
    from .curve import CurveParam, curve_hilbert
    from .riemann import initial_state, measure_frequency, step_rk4
    from .spectral import PeriodicGrid

    tab = CheckTable()
    base = SolverConfig(n=64, init_kind="single_mode", init_k=1, init_eps=0.05, init_travel=1)
    s0 = initial_state(base)

    def integrate(steps, t_end=1.0):
        s = s0
        for _ in range(steps):
            s = step_rk4(s, t_end / steps)
        return s

    ref = integrate(320)
    errs = [np.abs(integrate(m).u - ref.u).max() for m in (10, 20, 40)]
    order = float(np.polyfit(np.log([1 / 10, 1 / 20, 1 / 40]), np.log(errs), 1)[0])
    tab.add("RK4 temporal order (Richardson)", order, "4 +- 0.2", abs(order - 4) <= 0.2, "~")

    errs = []
    ns = (16, 32, 64, 128, 256)
    for m in ns:
        a = PeriodicGrid(m).nodes
        c = CurveParam(a + 0.2j * np.cos(a) + 0.1 * np.sin(2 * a))
        g = np.exp(-1j * c.z)
        errs.append(float(np.abs(g - curve_hilbert(c, g)).max()))
    ok = all(e2 <= e1 / 10 or e2 <= 1e-11 for e1, e2 in zip(errs, errs[1:]))
    tab.add("curve-Hilbert spectral convergence (final error)", errs[-1], 1e-11, ok)
    for kk in (1, 2, 4):
        om = measure_frequency(kk, eps=1e-3, n=128)
        rel = abs(om / math.sqrt(kk) - 1)
        tab.add(f"dispersion omega^2 = |k| at k = {kk}", rel, 0.005 + 1e-3)
    ctx["checks"] = tab.as_list()
    return 0 if tab.ok else CHECK_FAILED


def cmd_scaling(cfg, ctx):
    from .normalform import scaling_study

    tab = CheckTable()
    eps = list(cfg.scaling_eps)
    rep = scaling_study(eps, k_mode=cfg.init_k, horizon=cfg.scaling_horizon,
                        cfg=cfg.with_updates(init_kind="single_mode"), workers=min(_threads(), len(eps)))
    sb, sa, sc, _ = rep.fitted_slopes
    tab.add("slope of |b|", sb, "2 +- 0.15", abs(sb - 2) <= 0.15, "~")
    tab.add("slope of |A - 1|", sa, "2 +- 0.15", abs(sa - 2) <= 0.15, "~")
    tab.add("slope of cubic right side", sc, "3 +- 0.2", abs(sc - 3) <= 0.2, "~")
    for e, r in zip(eps, rep.norms_residual):
        tab.add(f"cubic identity residual at eps = {e:g}", r, 10 * e ** 3)
    out = cfg.output_dir
    path = os.path.join(out, "scaling.csv")
    rep.write_csv(path)
    slopes = os.path.join(out, "scaling_slopes.txt")
    with open(slopes, "w") as fh:
        fh.write(rep.summary() + "\n")
    ctx["files"].extend([path, slopes])
    print(rep.summary())
    ctx["checks"] = tab.as_list()
    return 0 if tab.ok else CHECK_FAILED


def cmd_crossvalidate(cfg, ctx):
    from .lagrangian import cross_validate

    tab = CheckTable()
    fine = cross_validate(cfg)
    coarse = cross_validate(cfg.with_updates(n=max(16, cfg.n // 2)))
    tab.add(f"Hausdorff distance at n = {fine.n}, T = {fine.t:g}", fine.hausdorff, 1e-6)
    tab.add("distance decreases under refinement", fine.hausdorff, coarse.hausdorff,
            fine.hausdorff < coarse.hausdorff or fine.hausdorff < 1e-12)
    tab.add("particle velocity agreement", fine.velocity_sup, 1e-6)
    ctx["summary"] = {"fine": fine.as_dict(), "coarse": coarse.as_dict()}
    ctx["checks"] = tab.as_list()
    return 0 if tab.ok else CHECK_FAILED


COMMANDS = {
    "run": (cmd_run, SolverConfig()),
    "identities": (cmd_identities, SolverConfig(n=256, seed=7)),
    "convergence": (cmd_convergence, SolverConfig()),
    "scaling": (cmd_scaling, SolverConfig(init_kind="single_mode", init_k=1, init_travel=0)),
    "crossvalidate": (cmd_crossvalidate, SolverConfig(n=128, init_kind="single_mode", init_k=1,
                                                      init_eps=0.01, t_end=1.0)),
}


def build_parser():
    p = argparse.ArgumentParser(prog="wavecrest", description="Periodic water-wave laboratory.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--n", type=int, help="grid size override")
    p.add_argument("--seed", type=int, help="seed for pseudo-random test fields")
    p.add_argument("--out", help="output directory override")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    func, default = COMMANDS[args.command]
    started = time.time()
    ctx = {"files": [], "checks": None, "summary": None}
    cfg = None
    cause, code, message = "completed", 0, ""
    out_dir = args.out or "wavecrest-out"
    try:
        cfg = _resolve_config(args, default)
        if not cfg.output_dir:
            cfg = cfg.with_updates(output_dir=out_dir)
        out_dir = cfg.output_dir
        os.makedirs(out_dir, exist_ok=True)
        code = func(cfg, ctx)
        if code:
            cause, message = "checks failed", "one or more checks failed"
    except WavecrestError as exc:
        code, cause, message = exc.exit_code, type(exc).__name__, str(exc)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    except OSError as exc:
        code, cause, message = 1, "OSError", str(exc)
        print(f"error: {exc}", file=sys.stderr)
    finally:
        files = []
        for path in ctx["files"]:
            if os.path.exists(path):
                files.append({"path": os.path.relpath(path, out_dir), "sha256": _sha256(path)})
        manifest = {
            "command": args.command,
            "version": __version__,
            "config": cfg.as_dict() if cfg is not None else None,
            "started": started,
            "finished": time.time(),
            "termination": cause,
            "exit_code": code,
            "message": message,
            "files": files,
            "checks": ctx["checks"],
            "summary": ctx["summary"],
        }
        try:
            write_manifest(out_dir, manifest)
        except OSError as exc:
            print(f"error: could not write manifest: {exc}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
