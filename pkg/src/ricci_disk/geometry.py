"""Rotationally symmetric metrics ds^2 = drho^2 + f(rho)^2 domega^2 on the disk.

A metric is stored as samples of the warping function ``f`` on a uniform
geodesic-radius grid ``rho_i = i*h``, ``i = 0..N``.  Pole regularity is
handled with parity ghosts: ``f`` is odd across ``rho = 0``, curvature and
conformal factors are even.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import make_interp_spline

MIN_INTERVALS = 16
ISO_POLE_EXCLUSION = 4  # nodes skipped near the pole in the isoperimetric scan


class MalformedProfileError(ValueError):
    """A warping profile violates the RadialMetric invariants."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message if index is None else f"{message} (grid index {index})")
        self.index = index


class PositivityError(ValueError):
    """A conformal factor is not strictly positive."""


# ---------------------------------------------------------------------------
# finite-difference stencils on a uniform grid
# ---------------------------------------------------------------------------

def d1_end(y: np.ndarray, h: float) -> float:
    """Second-order one-sided first derivative at the last node."""
    return (3.0 * y[-1] - 4.0 * y[-2] + y[-3]) / (2.0 * h)


def d2_end(y: np.ndarray, h: float) -> float:
    """Second-order one-sided second derivative at the last node."""
    return (2.0 * y[-1] - 5.0 * y[-2] + 4.0 * y[-3] - y[-4]) / h**2


def d2_end_matched(y: np.ndarray, h: float) -> float:
    """One-sided second derivative whose leading error equals the centred one.

    Expands as y'' + (h^2/12) y^(4) + O(h^4), like the three-point centred
    stencil, so curvature errors stay smooth up to the boundary.
    """
    return (4.0 * y[-1] - 14.0 * y[-2] + 20.0 * y[-3] - 15.0 * y[-4] + 6.0 * y[-5] - y[-6]) / h**2


def d3_end(y: np.ndarray, h: float) -> float:
    """Second-order one-sided third derivative at the last node."""
    return (5.0 * y[-1] - 18.0 * y[-2] + 24.0 * y[-3] - 14.0 * y[-4] + 3.0 * y[-5]) / (2.0 * h**3)


def d1_odd(y: np.ndarray, h: float) -> np.ndarray:
    """First derivative of a function that is odd across the pole."""
    out = np.empty_like(y)
    out[1:-1] = (y[2:] - y[:-2]) / (2.0 * h)
    out[0] = y[1] / h  # (y_1 - y_{-1}) / 2h with y_{-1} = -y_1
    out[-1] = d1_end(y, h)
    return out


def d1_even(y: np.ndarray, h: float) -> np.ndarray:
    """First derivative of a function that is even across the pole."""
    out = np.empty_like(y)
    out[1:-1] = (y[2:] - y[:-2]) / (2.0 * h)
    out[0] = 0.0
    out[-1] = d1_end(y, h)
    return out


def d2_even(y: np.ndarray, h: float) -> np.ndarray:
    out = np.empty_like(y)
    out[1:-1] = (y[2:] - 2.0 * y[1:-1] + y[:-2]) / h**2
    out[0] = 2.0 * (y[1] - y[0]) / h**2
    out[-1] = d2_end(y, h)
    return out


def trapezoid_weights(n_nodes: int, h: float) -> np.ndarray:
    w = np.full(n_nodes, h)
    w[0] = w[-1] = 0.5 * h
    return w


def cumulative_trapezoid(y: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * h * (y[1:] + y[:-1]))
    return out


def radial_laplacian(f: np.ndarray, phi: np.ndarray, h: float, boundary_slope: float | None = None) -> np.ndarray:
    """Laplacian of an even radial function, phi'' + (f'/f) phi'.

    Interior rows use the conservative form (1/f)(f phi')'; the pole row is
    2 phi''(0).  At the outer node phi' is taken from ``boundary_slope`` when
    given (ghost node), otherwise from a one-sided second-order stencil.
    """
    lap = np.empty_like(phi)
    fm = 0.5 * (f[1:] + f[:-1])
    flux = fm * np.diff(phi)
    lap[1:-1] = (flux[1:] - flux[:-1]) / (f[1:-1] * h**2)
    lap[0] = 4.0 * (phi[1] - phi[0]) / h**2
    if boundary_slope is None:
        lap[-1] = d2_end(phi, h) + d1_end(f, h) / f[-1] * d1_end(phi, h)
    else:
        ghost = phi[-2] + 2.0 * h * boundary_slope
        lap[-1] = (ghost - 2.0 * phi[-1] + phi[-2]) / h**2 + d1_end(f, h) / f[-1] * boundary_slope
    return lap


# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialMetric:
    """Warping-function samples ``f[i] = f(i*h)`` with geodesic radius ``L = N*h``."""

    h: float
    f: np.ndarray = field(repr=False)

    def __post_init__(self):
        f = np.array(self.f, dtype=float)
        f.setflags(write=False)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "h", float(self.h))
        if f.ndim != 1 or f.size - 1 < MIN_INTERVALS:
            raise MalformedProfileError(f"need at least {MIN_INTERVALS} intervals, got {f.size - 1}")
        if not self.h > 0:
            raise MalformedProfileError(f"grid spacing must be positive, got {self.h}")
        bad = np.flatnonzero(~np.isfinite(f))
        if bad.size:
            raise MalformedProfileError("non-finite warping sample", int(bad[0]))
        scale = np.max(np.abs(f))
        if abs(f[0]) > 1e-12 * max(scale, self.h):
            raise MalformedProfileError(f"f(0) must vanish, got {f[0]:.3e}", 0)
        bad = np.flatnonzero(f[1:] <= 0.0)
        if bad.size:
            raise MalformedProfileError("warping function must be positive away from the pole", int(bad[0]) + 1)
        # fourth-order estimate of f'(0) for an odd function
        slope = (8.0 * f[1] - f[2]) / (6.0 * self.h)
        if abs(slope - 1.0) > 0.05:
            raise MalformedProfileError(f"f'(0) = {slope:.4f}, expected 1 (cone point at the pole)", 0)

    @property
    def N(self) -> int:
        return self.f.size - 1

    @property
    def L(self) -> float:
        return self.N * self.h

    @property
    def rho(self) -> np.ndarray:
        return self.h * np.arange(self.N + 1)

    def scaled(self, c: float) -> RadialMetric:
        """The metric c*g (lengths multiplied by sqrt(c))."""
        s = np.sqrt(c)
        return RadialMetric(self.h * s, self.f * s)

    def to_json(self) -> dict:
        return {"h": self.h, "f": self.f.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> RadialMetric:
        return cls(float(data["h"]), np.asarray(data["f"], dtype=float))


@dataclass(frozen=True)
class CurvatureField:
    R: np.ndarray = field(repr=False)

    @property
    def max(self) -> float:
        return float(np.max(self.R))

    @property
    def min(self) -> float:
        return float(np.min(self.R))


@dataclass(frozen=True)
class Measures:
    area: float
    length: float
    ball_area: np.ndarray = field(repr=False)
    circle_length: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class IsoperimetricInfimum:
    value: float
    rho: float
    index: int


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def scalar_curvature(m: RadialMetric) -> CurvatureField:
    """R = -2 f''/f, with the pole value -2 f'''(0) from the odd extension."""
    f, h = m.f, m.h
    R = np.empty_like(f)
    R[1:-1] = -2.0 * (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (h**2 * f[1:-1])
    # Pole: f'''(0) from the odd extension.  P = (f2 - 2 f1)/h^3 and
    # Q = (f3 - 3 f1)/h^3 are combined so the O(h^2) error matches the limit
    # of the centred interior stencil; R' near the pole then stays O(h^2).
    P = (f[2] - 2.0 * f[1]) / h**3
    Q = (f[3] - 3.0 * f[1]) / h**3
    R[0] = -2.0 * (5.0 * P / 3.0 - Q / 6.0)
    R[-1] = -2.0 * d2_end_matched(f, h) / f[-1]
    bad = np.flatnonzero(~np.isfinite(R))
    if bad.size:
        raise MalformedProfileError("non-finite scalar curvature", int(bad[0]))
    return CurvatureField(R)


def boundary_geodesic_curvature(m: RadialMetric) -> float:
    """f'(L)/f(L) measured against the outward normal."""
    return float(d1_end(m.f, m.h) / m.f[-1])


def area_and_lengths(m: RadialMetric) -> Measures:
    ball = 2.0 * np.pi * cumulative_trapezoid(m.f, m.h)
    circle = 2.0 * np.pi * m.f
    return Measures(float(ball[-1]), float(circle[-1]), ball, circle)


def total_curvature(m: RadialMetric, R: np.ndarray | None = None) -> float:
    """Trapezoid approximation of the integral of R dA."""
    if R is None:
        R = scalar_curvature(m).R
    return float(2.0 * np.pi * np.sum(trapezoid_weights(m.N + 1, m.h) * R * m.f))


def isoperimetric_ratios(m: RadialMetric) -> np.ndarray:
    """l(dB_rho)^2 / A(B_rho) at every node; NaN inside the pole exclusion zone."""
    meas = area_and_lengths(m)
    ratio = np.full(m.N + 1, np.nan)
    k = ISO_POLE_EXCLUSION
    ratio[k:] = meas.circle_length[k:] ** 2 / meas.ball_area[k:]
    return ratio


def isoperimetric_infimum(m: RadialMetric) -> IsoperimetricInfimum:
    ratio = isoperimetric_ratios(m)
    i = int(np.nanargmin(ratio))
    return IsoperimetricInfimum(float(ratio[i]), float(m.rho[i]), i)


def fermi_riccati_residual(m: RadialMetric) -> float:
    """max |dk/ds - k^2 - R/2| over interior Fermi nodes with s <= L/2.

    ``s = L - rho`` is the distance to the boundary and ``k(s) = f'/f`` is the
    geodesic curvature of the parallel circle, so that the hemisphere gives
    ``k = tan s``.  Nodes adjacent to the boundary are skipped because their
    centred difference would mix in the one-sided boundary stencil.
    """
    f, h = m.f, m.h
    R = scalar_curvature(m).R
    k = d1_odd(f, h)[1:] / f[1:]
    # reverse so that index j corresponds to s = j*h
    k_s = k[::-1]
    R_s = R[1:][::-1]
    dk = (k_s[2:] - k_s[:-2]) / (2.0 * h)  # at j = 1 .. len-2
    j = np.arange(1, k_s.size - 1)
    keep = (j >= 2) & (j * h <= 0.5 * m.L + 1e-12 * m.L)
    resid = dk - k_s[1:-1] ** 2 - 0.5 * R_s[1:-1]
    return float(np.max(np.abs(resid[keep])))


def _odd_spline(x: np.ndarray, y: np.ndarray, k: int = 5):
    xs = np.concatenate([-x[:0:-1], x])
    ys = np.concatenate([-y[:0:-1], y])
    return make_interp_spline(xs, ys, k=k)


def _even_spline(x: np.ndarray, y: np.ndarray, k: int = 5):
    xs = np.concatenate([-x[:0:-1], x])
    ys = np.concatenate([y[:0:-1], y])
    return make_interp_spline(xs, ys, k=k)


def realize_conformal(base: RadialMetric, u: np.ndarray) -> RadialMetric:
    """Arclength profile of the metric u*g0, resampled to a uniform grid.

    The new radius is rho_g(r) = int_0^r sqrt(u) dr' and the warping function
    is sqrt(u)*f0.  Both are interpolated by quintic splines of their parity
    extensions across the pole, which keeps the second and third differences
    used by the curvature stencils at high order.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != base.f.shape:
        raise ValueError(f"conformal factor has shape {u.shape}, base grid has {base.f.shape}")
    bad = np.flatnonzero(~(u > 0.0))
    if bad.size:
        raise PositivityError(f"conformal factor must be positive; u[{bad[0]}] = {u[bad[0]]:.3e}")
    r = base.rho
    su = np.sqrt(u)
    if np.all(u == 1.0):
        return RadialMetric(base.h, base.f.copy())
    rho_g = _even_spline(r, su).antiderivative()(r)
    rho_g -= rho_g[0]
    F = su * base.f
    L_g = rho_g[-1]
    grid = np.linspace(0.0, L_g, base.N + 1)
    Fg = _odd_spline(rho_g, F)(grid)
    Fg[0] = 0.0
    return RadialMetric(L_g / base.N, Fg)


def resample(m: RadialMetric, N: int) -> RadialMetric:
    """Resample a profile onto N intervals over the same geodesic radius."""
    if N == m.N:
        return m
    grid = np.linspace(0.0, m.L, N + 1)
    f = _odd_spline(m.rho, m.f)(grid)
    f[0] = 0.0
    return RadialMetric(m.L / N, f)
