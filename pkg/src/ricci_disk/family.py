"""The family f_eps(r) = (1 - eps) sin r + eps r and its boundary radius.

The boundary radius r0 is where f''' = 2 f'' f' / f, which makes the
boundary compatibility dR/dr = k_g R hold.  Existence of a root is not
assumed: each bracket is certified by an explicit sign scan.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagnostics import boundary_identity_residual_metric
from .geometry import RadialMetric, d1_even, scalar_curvature


class NoRootError(ValueError):
    def __init__(self, epsilon: float, bracket: tuple[float, float], endpoint_values: tuple[float, float]):
        self.epsilon = epsilon
        self.bracket = bracket
        self.endpoint_values = endpoint_values
        a, b = bracket
        fa, fb = endpoint_values
        super().__init__(
            f"no sign change of the boundary equation for eps={epsilon} on [{a:.6g}, {b:.6g}]: "
            f"LHS(a)={fa:.6g}, LHS(b)={fb:.6g}"
        )


@dataclass(frozen=True)
class FamilyParams:
    epsilon: float
    bracket: tuple[float, float] = (np.pi / 2, np.pi)
    tol: float = 1e-12
    scan_points: int = 4096

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        a, b = self.bracket
        if not a < b:
            raise ValueError(f"empty bracket {self.bracket}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class BoundaryRoot:
    r0: float
    bracket: tuple[float, float]  # certifying pair with opposite signs
    residual: float
    slope: float  # f'(r0)


def boundary_equation(r, epsilon: float):
    """eps r cos r - 2 eps sin r - (1 - eps) cos r sin r."""
    return epsilon * r * np.cos(r) - 2.0 * epsilon * np.sin(r) - (1.0 - epsilon) * np.cos(r) * np.sin(r)


def profile(r, epsilon: float):
    return (1.0 - epsilon) * np.sin(r) + epsilon * r


def profile_slope(r, epsilon: float):
    return (1.0 - epsilon) * np.cos(r) + epsilon


def gaussian_curvature(r, epsilon: float):
    """K = 1 / (1 + (eps/(1-eps)) r / sin r), with K(0) = 1 - eps."""
    r = np.asarray(r, dtype=float)
    ratio = np.ones_like(r)
    nz = r != 0
    ratio[nz] = r[nz] / np.sin(r[nz])
    return 1.0 / (1.0 + epsilon / (1.0 - epsilon) * ratio)


def family_boundary_radius(p: FamilyParams) -> BoundaryRoot:
    a, b = p.bracket
    xs = np.linspace(a, b, p.scan_points + 1)
    ys = boundary_equation(xs, p.epsilon)
    flips = np.flatnonzero(np.sign(ys[:-1]) * np.sign(ys[1:]) <= 0)
    if flips.size == 0:
        raise NoRootError(p.epsilon, (a, b), (float(ys[0]), float(ys[-1])))
    i = int(flips[0])
    lo, hi = float(xs[i]), float(xs[i + 1])
    flo = boundary_equation(lo, p.epsilon)
    if flo == 0.0:
        hi = lo
    while hi - lo > p.tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = boundary_equation(mid, p.epsilon)
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    r0 = 0.5 * (lo + hi)
    slope = float(profile_slope(r0, p.epsilon))
    if not slope < 0:
        raise NoRootError(p.epsilon, (lo, hi), (float(boundary_equation(lo, p.epsilon)), float(boundary_equation(hi, p.epsilon))))
    return BoundaryRoot(r0, (lo, hi), float(abs(boundary_equation(r0, p.epsilon))), slope)


def family_profile(epsilon: float, L: float, N: int) -> RadialMetric:
    """f_eps sampled on [0, L] for an arbitrary radius L."""
    r = np.linspace(0.0, L, N + 1)
    return RadialMetric(L / N, profile(r, epsilon))


def family_metric(p: FamilyParams, N: int) -> RadialMetric:
    root = family_boundary_radius(p)
    return family_profile(p.epsilon, root.r0, N)


@dataclass(frozen=True)
class P1P2Report:
    p1: bool
    p1_violation: float  # largest positive part of R' (or of -R) found
    p2: float  # boundary identity residual |dR/dnu - k_g R|


def verify_P1_P2(m: RadialMetric, tol: float | None = None) -> P1P2Report:
    """Check R > 0, R radially nonincreasing, and dR/dnu = k_g R at the boundary."""
    if tol is None:
        tol = 10.0 * m.h**2
    R = scalar_curvature(m).R
    dR = d1_even(R, m.h)[1:-1]
    violation = max(float(np.max(dR, initial=0.0)), float(np.max(-R, initial=0.0)))
    p1 = bool(np.all(R > 0) and np.all(dR <= tol))
    return P1P2Report(p1, violation, boundary_identity_residual_metric(m))


def provenance(p: FamilyParams, root: BoundaryRoot) -> dict:
    return {
        "epsilon": p.epsilon,
        "r0": root.r0,
        "bracket": list(root.bracket),
        "residual": root.residual,
        "f_prime_r0": root.slope,
        "k0": root.slope / float(profile(root.r0, p.epsilon)),
    }
