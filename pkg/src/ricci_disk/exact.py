"""Closed-form reference geometries and exact flow solutions."""
from __future__ import annotations

import numpy as np

from .geometry import RadialMetric


class PastBlowupError(ValueError):
    pass


def cigar_metric(L: float, N: int) -> RadialMetric:
    """Cigar soliton dx^2+dy^2 / (1+x^2+y^2) in geodesic polar form, f = tanh(rho).

    The Euclidean radius is alpha = sinh(rho), and the curvature
    4/(1+alpha^2) becomes 4 sech^2(rho).
    """
    if not L > 0:
        raise ValueError(f"cigar radius must be positive, got {L}")
    rho = np.linspace(0.0, L, N + 1)
    return RadialMetric(L / N, np.tanh(rho))


def cigar_curvature(rho):
    return 4.0 / np.cosh(rho) ** 2


def cigar_curvature_euclidean(x, y):
    return 4.0 / (1.0 + x**2 + y**2)


def spherical_cap_metric(K: float, rho_max: float, N: int) -> RadialMetric:
    if not K > 0:
        raise ValueError(f"cap curvature must be positive, got {K}")
    a = np.sqrt(K)
    if not 0 < rho_max < np.pi / a:
        raise ValueError(f"cap radius must lie in (0, pi/sqrt(K)) = (0, {np.pi / a:.6g}), got {rho_max}")
    rho = np.linspace(0.0, rho_max, N + 1)
    return RadialMetric(rho_max / N, np.sin(a * rho) / a)


def hemisphere_metric(N: int, K: float = 1.0) -> RadialMetric:
    return spherical_cap_metric(K, np.pi / (2.0 * np.sqrt(K)), N)


def flat_disk_metric(rho0: float, N: int) -> RadialMetric:
    if not rho0 > 0:
        raise ValueError(f"disk radius must be positive, got {rho0}")
    rho = np.linspace(0.0, rho0, N + 1)
    return RadialMetric(rho0 / N, rho)


def shrinking_cap_oracle(R0: float, t: float) -> tuple[float, float]:
    """Spatially constant solution u = 1 - R0 t, R = R0 / (1 - R0 t)."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    if R0 * t >= 1.0:
        raise PastBlowupError(f"t = {t} is at or past the blow-up time 1/R0 = {1.0 / R0}")
    u = 1.0 - R0 * t
    return u, R0 / u


def bumped_hemisphere_metric(N: int, amplitude: float = 0.05) -> RadialMetric:
    """Hemisphere profile multiplied by the radial bump 1 + a sin^2(rho).

    Keeps f'(0) = 1 and f'(pi/2) = 0, so the boundary stays geodesic, and
    R = 2 (1 - 6a + 9a sin^2) / (1 + a sin^2) > 0 for small a.
    """
    rho = np.linspace(0.0, np.pi / 2, N + 1)
    s = np.sin(rho)
    return RadialMetric((np.pi / 2) / N, s * (1.0 + amplitude * s**2))


def bumped_hemisphere_curvature(rho, amplitude: float = 0.05):
    s2 = np.sin(rho) ** 2
    return 2.0 * (1.0 - 6.0 * amplitude + 9.0 * amplitude * s2) / (1.0 + amplitude * s2)
