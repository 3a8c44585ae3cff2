"""Per-snapshot observables: curvature statistics, potential function,
boundary identities, radial monotonicity and derivative monitors."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import (
    RadialMetric,
    area_and_lengths,
    boundary_geodesic_curvature,
    cumulative_trapezoid,
    d1_end,
    d1_even,
    d2_end,
    d3_end,
    isoperimetric_infimum,
    radial_laplacian,
    realize_conformal,
    scalar_curvature,
    trapezoid_weights,
)

CSV_COLUMNS = (
    "t", "t_normalized", "r_max", "r_min", "r_avg", "area", "boundary_length", "iso_ratio",
    "k_measured", "w_max", "shi_ratio", "boundary_identity_residual", "area_rate_residual", "mu",
)


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    t_normalized: float | None
    r_max: float
    r_min: float
    r_avg: float
    area: float
    boundary_length: float
    iso_ratio: float
    k_measured: float
    w_max: float
    shi_ratio: float | None
    boundary_identity_residual: float
    area_rate_residual: float | None
    mu: float | None = None
    snapshot: int = field(default=0, compare=False)

    def csv_row(self) -> list[str]:
        return ["" if getattr(self, c) is None else repr(float(getattr(self, c))) for c in CSV_COLUMNS]

    @classmethod
    def from_csv_row(cls, row: dict, snapshot: int = 0) -> DiagnosticsRecord:
        vals = {c: (None if row[c] == "" else float(row[c])) for c in CSV_COLUMNS}
        return cls(**vals, snapshot=snapshot)


@dataclass(frozen=True)
class CurvatureStats:
    r_max: float
    r_min: float
    r_avg: float


@dataclass(frozen=True)
class Potential:
    f: np.ndarray = field(repr=False)
    fprime: np.ndarray = field(repr=False)
    r_avg: float
    R: np.ndarray = field(repr=False)


# ---------------------------------------------------------------------------
# metric-level observables
# ---------------------------------------------------------------------------

def _area_weights(m: RadialMetric) -> np.ndarray:
    return 2.0 * np.pi * trapezoid_weights(m.N + 1, m.h) * m.f


def curvature_stats(m: RadialMetric, R: np.ndarray | None = None) -> CurvatureStats:
    if R is None:
        R = scalar_curvature(m).R
    w = _area_weights(m)
    return CurvatureStats(float(np.max(R)), float(np.min(R)), float(np.sum(w * R) / np.sum(w)))


def potential_function(m: RadialMetric) -> Potential:
    """Mean-zero Neumann solution of Lap f = R - r by radial quadrature.

    F f'(rho) = int_0^rho (R - r) F ds, which vanishes at rho = L because r is
    the average of R under the same trapezoid rule.
    """
    R = scalar_curvature(m).R
    r_avg = curvature_stats(m, R).r_avg
    F = m.f
    flux = cumulative_trapezoid((R - r_avg) * F, m.h)
    fp = np.zeros_like(F)
    fp[1:] = flux[1:] / F[1:]
    pot = cumulative_trapezoid(fp, m.h)
    w = _area_weights(m)
    pot -= np.sum(w * pot) / np.sum(w)
    return Potential(pot, fp, r_avg, R)


def potential_laplacian(m: RadialMetric, pot: Potential) -> np.ndarray:
    """Lap f recomputed from the potential values by finite differences."""
    return radial_laplacian(m.f, pot.f, m.h)


def h_function(m: RadialMetric, pot: Potential) -> np.ndarray:
    """h = Lap f + |grad f|^2 = (R - r) + f'^2."""
    return (pot.R - pot.r_avg) + pot.fprime**2


def boundary_curvature_slope(m: RadialMetric) -> float:
    """dR/drho at the boundary from one-sided derivatives of f.

    R' = -2 (f''' f - f'' f') / f^2, so no difference of already-differenced
    curvature samples is taken.
    """
    f, h = m.f, m.h
    f1, f2, f3 = d1_end(f, h), d2_end(f, h), d3_end(f, h)
    return float(-2.0 * (f3 * f[-1] - f2 * f1) / f[-1] ** 2)


def boundary_identity_residual_metric(m: RadialMetric, k: float | None = None) -> float:
    """|dR/dnu - k R| at the boundary; k defaults to the measured geodesic curvature."""
    if k is None:
        k = boundary_geodesic_curvature(m)
    R_L = -2.0 * d2_end(m.f, m.h) / m.f[-1]
    return float(abs(boundary_curvature_slope(m) - k * R_L))


def boundary_identity_residual(s) -> float:
    """Boundary identity residual of a ConformalState against its prescribed k0."""
    return boundary_identity_residual_metric(realize_conformal(s.base, s.u), s.k0)


def radial_w_values(m: RadialMetric, R: np.ndarray | None = None) -> np.ndarray:
    if R is None:
        R = scalar_curvature(m).R
    return (m.f * d1_even(R, m.h))[1:-1]


def radial_w_max(m: RadialMetric, R: np.ndarray | None = None) -> float:
    """max over interior nodes of w = F R_rho."""
    return float(np.max(radial_w_values(m, R)))


# ---------------------------------------------------------------------------
# trajectory-level observables
# ---------------------------------------------------------------------------

def _shi(t: float, slope: float, sup_rmax: float) -> float:
    return math.sqrt(t) * abs(slope) / max(1.0, sup_rmax)


def shi_ratio(traj, index: int) -> float:
    """sqrt(t) |dR/dnu| / max(1, sup_[0,t] R_max) at a snapshot with t > 0."""
    if index < 1 or traj.snapshots[index].t <= 0:
        raise ValueError("shi_ratio needs a snapshot with t > 0")
    snap = traj.snapshots[index]
    m = realize_conformal(traj.base, snap.u)
    sup = max(s.r_max for s in traj.snapshots[: index + 1])
    return _shi(snap.t, boundary_curvature_slope(m), sup)


@dataclass(frozen=True)
class RatioTrend:
    t: np.ndarray
    ratio: np.ndarray
    window_min: float
    window_max: float
    window_start: int


def ratio_trend(records, window: float = 0.1) -> RatioTrend:
    """R_max/R_min per record and its extremes over the final fraction of records."""
    if len(records) < 2:
        raise ValueError("ratio_trend needs at least two records")
    if any(not r.r_min > 0 for r in records):
        raise ValueError("ratio_trend needs R_min > 0 in every record")
    t = np.array([r.t for r in records])
    ratio = np.array([r.r_max / r.r_min for r in records])
    n = max(1, int(math.ceil(window * len(records))))
    tail = ratio[-n:]
    return RatioTrend(t, ratio, float(tail.min()), float(tail.max()), len(records) - n)


def record_for_metric(m: RadialMetric, t: float, k0: float, snapshot: int = 0) -> DiagnosticsRecord:
    R = scalar_curvature(m).R
    stats = curvature_stats(m, R)
    meas = area_and_lengths(m)
    return DiagnosticsRecord(
        t=t,
        t_normalized=None,
        r_max=stats.r_max,
        r_min=stats.r_min,
        r_avg=stats.r_avg,
        area=meas.area,
        boundary_length=meas.length,
        iso_ratio=isoperimetric_infimum(m).value,
        k_measured=boundary_geodesic_curvature(m),
        w_max=radial_w_max(m, R),
        shi_ratio=None,
        boundary_identity_residual=boundary_identity_residual_metric(m, k0),
        area_rate_residual=None,
        snapshot=snapshot,
    )


def area_rate_residual(prev: DiagnosticsRecord, cur: DiagnosticsRecord) -> float:
    """Relative mismatch of dA/dt against -int R dA over one record interval
    (absolute when the expected rate vanishes, as on a flat disk)."""
    dAdt = (cur.area - prev.area) / (cur.t - prev.t)
    expected = -0.5 * (cur.r_avg * cur.area + prev.r_avg * prev.area)
    return float(abs(dAdt - expected) / (abs(expected) or 1.0))


def compute_records(traj, cadence: int = 1) -> list[DiagnosticsRecord]:
    from .flow import normalized_times

    n = len(traj.snapshots)
    picks = [i for i in range(n) if i % cadence == 0]
    if picks[-1] != n - 1:
        picks.append(n - 1)
    out: list[DiagnosticsRecord] = []
    sup = -math.inf
    last = 0
    for i in picks:
        snap = traj.snapshots[i]
        for s in traj.snapshots[last: i + 1]:
            sup = max(sup, s.r_max)
        last = i + 1
        m = realize_conformal(traj.base, snap.u)
        rec = record_for_metric(m, snap.t, traj.k0, snapshot=i)
        extra = {}
        if snap.t > 0:
            extra["shi_ratio"] = _shi(snap.t, boundary_curvature_slope(m), sup)
        if out:
            extra["area_rate_residual"] = area_rate_residual(out[-1], rec)
        if extra:
            rec = replace(rec, **extra)
        out.append(rec)
    if len(out) >= 2:
        tn = normalized_times([r.t for r in out], [r.area for r in out])
        out = [replace(r, t_normalized=float(x)) for r, x in zip(out, tn)]
    return out

