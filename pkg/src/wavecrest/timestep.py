"""Classical four-stage Runge-Kutta step on tuples of arrays/scalars."""


def _axpy(y, k, a):
    return tuple(None if yi is None else yi + a * ki for yi, ki in zip(y, k))


def rk4_step(f, y, dt):
    """Advance ``y`` (a tuple whose entries may be None) by ``dt`` under ``dy/dt = f(y)``."""
    k1 = f(y)
    k2 = f(_axpy(y, k1, 0.5 * dt))
    k3 = f(_axpy(y, k2, 0.5 * dt))
    k4 = f(_axpy(y, k3, dt))
    out = []
    for yi, a, b, c, d in zip(y, k1, k2, k3, k4):
        if yi is None:
            out.append(None)
        else:
            out.append(yi + (dt / 6.0) * (a + 2.0 * b + 2.0 * c + d))
    return tuple(out)
