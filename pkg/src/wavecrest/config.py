"""Flat ``key = value`` run configuration."""
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .errors import ConfigError

INIT_KINDS = ("rest", "single_mode", "graph")


@dataclass(frozen=True)
class SolverConfig:
    """Validated run parameters.

    ``dt`` is used when ``dt_auto`` is false; otherwise the step is derived
    from the CFL rule at t = 0 and shrunk so that an integer number of steps
    reaches ``t_end``. ``projection_cadence = 0`` disables projection.
    ``output_cadence`` counts steps between snapshots (0: first and last only).
    """

    n: int = 128
    dt: float = 0.01
    dt_auto: bool = True
    t_end: float = 1.0
    dealias: float = 2.0 / 3.0
    projection_cadence: int = 1
    init_kind: str = "rest"
    init_k: int = 1
    init_eps: float = 0.0
    init_phase: float = 0.0
    init_travel: int = 0
    output_dir: str = ""
    output_cadence: int = 0
    seed: int = 0
    solver_tol: float = 1e-10
    chord_arc_floor: float = 1e-3
    energy_s: float = 0.0
    lag_projection_cadence: int = 5
    scaling_eps: tuple = (0.02, 0.01, 0.005)
    scaling_horizon: float = 1.0

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 16 or self.n % 2:
            raise ConfigError(f"n must be an even integer >= 16, got {self.n!r}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt!r}")
        if not self.t_end >= 0:
            raise ConfigError(f"t_end must be >= 0, got {self.t_end!r}")
        if not 0 < self.dealias <= 1:
            raise ConfigError(f"dealias must lie in (0, 1], got {self.dealias!r}")
        if self.projection_cadence < 0 or self.lag_projection_cadence < 0:
            raise ConfigError("projection cadences must be >= 0")
        if self.output_cadence < 0:
            raise ConfigError(f"output_cadence must be >= 0, got {self.output_cadence!r}")
        if self.init_kind not in INIT_KINDS:
            raise ConfigError(f"init.kind must be one of {INIT_KINDS}, got {self.init_kind!r}")
        if self.init_k < 1:
            raise ConfigError(f"init.k must be a positive integer, got {self.init_k!r}")
        if self.init_travel not in (-1, 0, 1):
            raise ConfigError(f"init.travel must be -1, 0 or 1, got {self.init_travel!r}")
        if not self.solver_tol > 0 or not self.chord_arc_floor > 0:
            raise ConfigError("solver_tol and chord_arc_floor must be positive")
        eps = tuple(self.scaling_eps)
        if len(eps) < 3 or any(b >= a for a, b in zip(eps, eps[1:])) or max(eps) > 0.05:
            raise ConfigError("scaling.eps needs >= 3 strictly decreasing values, all <= 0.05")

    def with_updates(self, **kw):
        return replace(self, **kw)

    def as_dict(self):
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


# config key -> (field name, parser)
def _bool(s):
    low = s.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _int(s):
    v = float(s)
    if v != int(v):
        raise ValueError(f"not an integer: {s!r}")
    return int(v)


def _floats(s):
    return tuple(float(x) for x in s.replace(",", " ").split())


KEYS = {
    "n": ("n", _int),
    "dt": ("dt", float),
    "dt_auto": ("dt_auto", _bool),
    "t_end": ("t_end", float),
    "dealias": ("dealias", float),
    "projection_cadence": ("projection_cadence", _int),
    "init.kind": ("init_kind", str.strip),
    "init.k": ("init_k", _int),
    "init.eps": ("init_eps", float),
    "init.phase": ("init_phase", float),
    "init.travel": ("init_travel", _int),
    "output_dir": ("output_dir", str.strip),
    "output_cadence": ("output_cadence", _int),
    "seed": ("seed", _int),
    "solver_tol": ("solver_tol", float),
    "chord_arc_floor": ("chord_arc_floor", float),
    "energy_s": ("energy_s", float),
    "lagrangian.projection_cadence": ("lag_projection_cadence", _int),
    "scaling.eps": ("scaling_eps", _floats),
    "scaling.horizon": ("scaling_horizon", float),
}


def parse_config_text(text):
    """Parse ``key = value`` lines (``#`` starts a comment) into a SolverConfig.

    A bare ``dt = ...`` without ``dt_auto`` switches the automatic step off.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        name, conv = KEYS[key]
        try:
            values[name] = conv(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    if "dt" in values and "dt_auto" not in values:
        values["dt_auto"] = False
    return SolverConfig(**values)


def load_config(path):
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {str(p)!r}: {exc.strerror}") from None
    return parse_config_text(text)
