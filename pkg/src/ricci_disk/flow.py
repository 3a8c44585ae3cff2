"""Boundary-value Ricci flow on the disk in conformal form.

The metric is g(t) = u(., t) g0 and the flow dg/dt = -R g with prescribed
boundary geodesic curvature k0 becomes

    u_t = Lap0 log u - R0,        u_r(L) = 2 u k0 (sqrt(u) - 1),    u(., 0) = 1,

where Lap0 and R0 belong to the fixed base metric g0 and the boundary
condition is written against the g0 unit normal d/dr.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .geometry import (
    RadialMetric,
    CurvatureField,
    area_and_lengths,
    boundary_geodesic_curvature,
    radial_laplacian,
    realize_conformal,
    scalar_curvature,
)

log = logging.getLogger(__name__)


class Termination(str, enum.Enum):
    REACHED_TMAX = "ReachedTMax"
    BLOWUP_DETECTED = "BlowupDetected"
    STEP_UNDERFLOW = "StepUnderflow"
    POSITIVITY_LOST = "PositivityLost"


class FlowError(RuntimeError):
    termination: Termination


class PositivityLostError(FlowError):
    termination = Termination.POSITIVITY_LOST


class StepUnderflowError(FlowError):
    termination = Termination.STEP_UNDERFLOW


class MalformedTrajectoryError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    N: int
    t_max: float
    cfl_safety: float = 0.2
    r_blowup: float = 1e6
    dt_min: float = 1e-14
    output_every: int = 1000

    def __post_init__(self):
        if self.N < 16:
            raise ValueError(f"N must be at least 16, got {self.N}")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        for name in ("t_max", "r_blowup", "dt_min"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.output_every < 1:
            raise ValueError("output_every must be at least 1")


@dataclass(frozen=True)
class ConformalState:
    base: RadialMetric
    R0: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    t: float
    k0: float
    step: int = 0

    def __post_init__(self):
        if not np.all(self.u > 0):
            raise PositivityLostError(f"u must be positive, min u = {np.min(self.u):.3e}")


@dataclass(frozen=True)
class Snapshot:
    t: float
    u: np.ndarray = field(repr=False)
    step: int
    r_max: float  # max of curvature_of_state at this snapshot


@dataclass
class Trajectory:
    base: RadialMetric
    config: SolverConfig
    k0: float
    snapshots: list[Snapshot] = field(default_factory=list)
    records: list = field(default_factory=list)
    termination: Termination | None = None
    blowup_time: float | None = None
    message: str = ""

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    def state(self, index: int) -> ConformalState:
        s = self.snapshots[index]
        return ConformalState(self.base, scalar_curvature(self.base).R, s.u, s.t, self.k0, s.step)


# ---------------------------------------------------------------------------

def initialize(base: RadialMetric) -> ConformalState:
    R0 = scalar_curvature(base).R
    return ConformalState(base, R0, np.ones(base.N + 1), 0.0, boundary_geodesic_curvature(base), 0)


def _kernel_args(s: ConformalState):
    f = np.ascontiguousarray(s.base.f)
    return f, s.base.h, boundary_geodesic_curvature(s.base), s.k0, np.ascontiguousarray(s.R0)


def curvature_of_state(s: ConformalState) -> CurvatureField:
    """R = (R0 - Lap0 log u)/u on the base grid."""
    v = np.log(s.u)
    slope = 2.0 * s.k0 * (np.sqrt(s.u[-1]) - 1.0)
    lap = radial_laplacian(s.base.f, v, s.base.h, boundary_slope=slope)
    return CurvatureField((s.R0 - lap) / s.u)


def step(s: ConformalState, cfg: SolverConfig) -> ConformalState:
    """One explicit Euler step with dt = cfl * h^2 * min(u) / 2."""
    u = np.array(s.u, dtype=float)
    R, work = _kernels.new_buffers(u.size)
    f, h, k_base, k0, R0 = _kernel_args(s)
    status, t, n, _ = _kernels.advance(u, f, h, k_base, k0, R0, cfg.cfl_safety, cfg.dt_min,
                                       s.t, math.inf, math.inf, 1, R, work)
    if status == _kernels.UNDERFLOW:
        raise StepUnderflowError(f"time step below dt_min={cfg.dt_min} at t={s.t}")
    if status == _kernels.POSITIVITY:
        raise PositivityLostError(f"conformal factor lost positivity at t={s.t}")
    return ConformalState(s.base, s.R0, u, t, s.k0, s.step + n)


def estimate_blowup_time(times, r_max) -> float:
    """Extrapolate R_max ~ C/(T - t) over the last decade of R_max growth."""
    times = np.asarray(times, dtype=float)
    r_max = np.asarray(r_max, dtype=float)
    top = r_max[-1]
    sel = np.flatnonzero(r_max >= top / 10.0)
    if sel.size < 2:
        sel = np.arange(max(0, times.size - 2), times.size)
    if sel.size < 2:
        return float(times[-1])
    slope, intercept = np.polyfit(times[sel], 1.0 / r_max[sel], 1)
    if not slope < 0:
        return float(times[-1])
    return float(-intercept / slope)


def run(base: RadialMetric, cfg: SolverConfig, resume: Trajectory | None = None,
        diagnostics_cadence: int = 1) -> Trajectory:
    """Integrate until t_max, curvature blow-up, or solver breakdown.

    A snapshot is taken every ``cfg.output_every`` accepted steps and at
    termination; diagnostics records are then computed for every
    ``diagnostics_cadence``-th snapshot and the last one.  ``resume`` continues
    a trajectory truncated at one of its snapshots.
    """
    if base.N != cfg.N:
        raise ValueError(f"base grid has N={base.N}, config asks for N={cfg.N}")
    state = initialize(base)
    traj = Trajectory(base, cfg, state.k0)
    if resume is not None and resume.snapshots:
        traj.snapshots = list(resume.snapshots)
        last = traj.snapshots[-1]
        state = ConformalState(base, state.R0, np.array(last.u), last.t, state.k0, last.step)

    u = np.array(state.u, dtype=float)
    R, work = _kernels.new_buffers(u.size)
    f, h, k_base, k0, R0 = _kernel_args(state)
    t, nstep = state.t, state.step
    if not traj.snapshots:
        rmax, _ = _kernels.curvature(u, f, h, k_base, k0, R0, R)
        traj.snapshots.append(Snapshot(t, u.copy(), nstep, float(rmax)))

    while True:
        status, t, n, rmax = _kernels.advance(u, f, h, k_base, k0, R0, cfg.cfl_safety, cfg.dt_min,
                                              t, cfg.t_max, cfg.r_blowup, cfg.output_every, R, work)
        nstep += n
        if n > 0:
            traj.snapshots.append(Snapshot(t, u.copy(), nstep, float(rmax)))
        if status == _kernels.RUNNING:
            continue
        traj.termination = {
            _kernels.REACHED_TMAX: Termination.REACHED_TMAX,
            _kernels.BLOWUP: Termination.BLOWUP_DETECTED,
            _kernels.UNDERFLOW: Termination.STEP_UNDERFLOW,
            _kernels.POSITIVITY: Termination.POSITIVITY_LOST,
        }[status]
        break

    if traj.termination is Termination.BLOWUP_DETECTED:
        traj.blowup_time = estimate_blowup_time(traj.times, [s.r_max for s in traj.snapshots])
    elif traj.termination is not Termination.REACHED_TMAX:
        traj.message = f"{traj.termination.value} at t={t:.12g} after {nstep} steps"
    log.info("run finished: %s at t=%.6g (%d steps, %d snapshots)",
             traj.termination.value, t, nstep, len(traj.snapshots))

    from .diagnostics import compute_records
    traj.records = compute_records(traj, cadence=diagnostics_cadence)
    return traj


def truncate(traj: Trajectory, step: int) -> Trajectory:
    """The prefix of ``traj`` ending at the snapshot with the given step count."""
    keep = [s for s in traj.snapshots if s.step <= step]
    if not keep or keep[-1].step != step:
        raise MalformedTrajectoryError(f"no snapshot at step {step}")
    return Trajectory(traj.base, traj.config, traj.k0, keep)


# ---------------------------------------------------------------------------
# normalized flow
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalizedTrajectory:
    t: np.ndarray
    t_normalized: np.ndarray
    area: np.ndarray  # unnormalized areas A(t)
    metrics: list[RadialMetric] = field(repr=False)  # each scaled to unit area
    u_normalized: list[np.ndarray] = field(repr=False)
    k_normalized: np.ndarray = field(repr=False)
    boundary_length: np.ndarray = field(repr=False)  # of the unit-area metrics


def normalized_times(t, area) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    area = np.asarray(area, dtype=float)
    if t.size < 2 or np.any(np.diff(t) <= 0):
        raise MalformedTrajectoryError("normalization needs at least two strictly increasing times")
    if np.any(~(area > 0)):
        raise MalformedTrajectoryError("normalization needs positive areas")
    out = np.zeros_like(t)
    out[1:] = np.cumsum(0.5 * np.diff(t) * (1.0 / area[1:] + 1.0 / area[:-1]))
    return out


def normalize(traj: Trajectory) -> NormalizedTrajectory:
    """Rescale every snapshot to unit area and reparameterize time by int 1/A."""
    if len(traj.snapshots) < 2:
        raise MalformedTrajectoryError("normalization needs at least two snapshots")
    t = traj.times
    realized = [realize_conformal(traj.base, s.u) for s in traj.snapshots]
    area = np.array([area_and_lengths(m).area for m in realized])
    tn = normalized_times(t, area)
    metrics = [m.scaled(1.0 / a) for m, a in zip(realized, area)]
    lengths = np.array([area_and_lengths(m).length for m in metrics])
    return NormalizedTrajectory(
        t=t,
        t_normalized=tn,
        area=area,
        metrics=metrics,
        u_normalized=[s.u / a for s, a in zip(traj.snapshots, area)],
        k_normalized=traj.k0 * np.sqrt(area),
        boundary_length=lengths,
    )

