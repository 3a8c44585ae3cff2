"""Compiled explicit-Euler kernel for u_t = Lap0 log u - R0.

The arithmetic mirrors geometry.radial_laplacian with a ghost boundary node,
so curvature_of_state and the stepper agree to rounding.
"""
import math

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn

# status codes returned by advance()
RUNNING = 0
REACHED_TMAX = 1
BLOWUP = 2
UNDERFLOW = 3
POSITIVITY = 4


@njit(cache=True)
def curvature(u, f, h, k_base, k0, R0, R):
    """Fill R with (R0 - Lap0 log u)/u and return (max R, min u)."""
    n = u.shape[0]
    h2 = h * h
    v0 = math.log(u[0])
    v1 = math.log(u[1])
    lap = 4.0 * (v1 - v0) / h2
    R[0] = (R0[0] - lap) / u[0]
    rmax = R[0]
    umin = u[0]
    vm = v0
    vc = v1
    for i in range(1, n - 1):
        vp = math.log(u[i + 1])
        fl = 0.5 * (f[i - 1] + f[i])
        fr = 0.5 * (f[i] + f[i + 1])
        lap = (fr * (vp - vc) - fl * (vc - vm)) / (f[i] * h2)
        R[i] = (R0[i] - lap) / u[i]
        if R[i] > rmax:
            rmax = R[i]
        if u[i] < umin:
            umin = u[i]
        vm = vc
        vc = vp
    # ghost node: (log u)_r = 2 k0 (sqrt(u) - 1) at r = L
    g = 2.0 * k0 * (math.sqrt(u[n - 1]) - 1.0)
    ghost = vm + 2.0 * h * g
    lap = (ghost - 2.0 * vc + vm) / h2 + k_base * g
    R[n - 1] = (R0[n - 1] - lap) / u[n - 1]
    if R[n - 1] > rmax:
        rmax = R[n - 1]
    if u[n - 1] < umin:
        umin = u[n - 1]
    return rmax, umin


@njit(cache=True)
def advance(u, f, h, k_base, k0, R0, cfl, dt_min, t, t_max, r_blowup, max_steps, R, work):
    """Take up to max_steps Euler steps in place.

    Returns (status, t, steps_taken, rmax) where rmax is the curvature maximum
    of the state held in ``u`` on exit.
    """
    n = u.shape[0]
    steps = 0
    rmax, umin = curvature(u, f, h, k_base, k0, R0, R)
    while True:
        if rmax >= r_blowup:
            return BLOWUP, t, steps, rmax
        if t >= t_max:
            return REACHED_TMAX, t, steps, rmax
        if steps >= max_steps:
            return RUNNING, t, steps, rmax
        dt = cfl * h * h * umin / 2.0
        clipped = False
        if t + dt >= t_max:
            dt = t_max - t
            clipped = True
        if dt < dt_min and not clipped:
            return UNDERFLOW, t, steps, rmax
        for i in range(n):
            work[i] = u[i] - dt * u[i] * R[i]
            if not work[i] > 0.0:
                return POSITIVITY, t, steps, rmax
        for i in range(n):
            u[i] = work[i]
        t = t_max if clipped else t + dt
        steps += 1
        rmax, umin = curvature(u, f, h, k_base, k0, R0, R)


def new_buffers(n):
    return np.empty(n), np.empty(n)
