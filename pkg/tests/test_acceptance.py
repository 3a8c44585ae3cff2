"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line
that is echoed in the terminal summary."""
import math
import time

import numpy as np
import pytest
from hypothesis import HealthCheck, Phase, given, settings

from profiles import concave_profile, profile_params
from ricci_disk import exact
from ricci_disk.diagnostics import (
    h_function,
    potential_function,
    potential_laplacian,
    ratio_trend,
)
from ricci_disk.entropy import annulus_area, cigar_entropy_probe, mu, normalized_constant, w_functional
from ricci_disk.family import FamilyParams, boundary_equation, family_boundary_radius, family_metric, profile_slope
from ricci_disk.flow import SolverConfig, Termination, initialize, run, step
from ricci_disk.geometry import (
    cumulative_trapezoid,
    d1_end,
    fermi_riccati_residual,
    isoperimetric_infimum,
    realize_conformal,
)

FIFTY = settings(max_examples=50, derandomize=True, deadline=None, database=None,
                 phases=[Phase.explicit, Phase.generate], suppress_health_check=list(HealthCheck))
TWENTY = settings(FIFTY, max_examples=20)


def _rel(a, b):
    return abs(a - b) / abs(b)


# -- shared long runs -------------------------------------------------------

@pytest.fixture(scope="module")
def bumped_run():
    m = exact.bumped_hemisphere_metric(512)
    cfg = SolverConfig(N=512, t_max=10.0, r_blowup=1e3, output_every=5000)
    t0 = time.perf_counter()
    traj = run(m, cfg)
    return traj, time.perf_counter() - t0


@pytest.fixture(scope="module")
def family_runs():
    out = {}
    for eps in (0.02, 0.05):
        m = family_metric(FamilyParams(eps), 256)
        out[eps] = run(m, SolverConfig(N=256, t_max=10.0, r_blowup=1e3, output_every=2000))
    return out


# -- 1 ----------------------------------------------------------------------

def test_c01_hemisphere_exact_solution(report):
    m = exact.hemisphere_metric(512)
    run(exact.hemisphere_metric(32), SolverConfig(N=32, t_max=1e-3))  # warm the compiled kernel
    t0 = time.perf_counter()
    traj = run(m, SolverConfig(N=512, t_max=1.0, r_blowup=100.0))
    elapsed = time.perf_counter() - t0
    t = traj.times
    rmax = np.array([s.r_max for s in traj.snapshots])
    exact_r = 2.0 / (1.0 - 2.0 * t)
    err = float(np.max(np.abs(rmax - exact_r) / exact_r))
    terr = _rel(traj.blowup_time, 0.5)
    ok = (traj.termination is Termination.BLOWUP_DETECTED and rmax[-1] >= 100.0
          and err < 0.02 and terr < 0.02 and elapsed < 30.0)
    report(1, ok, f"max rel R err {err:.2e}, T_est {traj.blowup_time:.6f} (rel {terr:.2e}), {elapsed:.1f} s")
    assert ok


# -- 2 ----------------------------------------------------------------------

def test_c02_flat_disk_stationary(report):
    s = initialize(exact.flat_disk_metric(1.0, 128))
    cfg = SolverConfig(N=128, t_max=1e9)
    worst = 0.0
    for _ in range(10_000):
        s = step(s, cfg)
        worst = max(worst, float(np.max(np.abs(s.u - 1.0))))
    ok = worst < 1e-10
    report(2, ok, f"max|u-1| = {worst:.2e} over 10^4 steps (t = {s.t:.3e})")
    assert ok


# -- 3 ----------------------------------------------------------------------

def test_c03_positivity_preserved(report):
    results = []

    @TWENTY
    @given(profile_params)
    def case(params):
        m = concave_profile(*params, N=64)
        traj = run(m, SolverConfig(N=64, t_max=5.0, r_blowup=1e3, output_every=200))
        rmin = min(r.r_min for r in traj.records)
        results.append((rmin, -10.0 * m.h**2, traj.termination))

    case()
    bad = [r for r in results if r[0] < r[1] or r[2] in (Termination.POSITIVITY_LOST, Termination.STEP_UNDERFLOW)]
    margin = min(r[0] - r[1] for r in results)
    ok = len(results) >= 20 and not bad
    report(3, ok, f"{len(results)} profiles, {len(bad)} violations, min(R_min + 10h^2) = {margin:.3e}")
    assert ok


# -- 4 ----------------------------------------------------------------------

def _family_area_rates(traj):
    recs = traj.records
    out = []
    for a, b in zip(recs, recs[1:]):
        if b.r_max > 50.0:  # smooth segments only
            break
        dadt = (b.area - a.area) / (b.t - a.t)
        lbar = 0.5 * (a.boundary_length + b.boundary_length)
        out.append((dadt, lbar))
    return out


def test_c04_gauss_bonnet_blowup_bound(report, family_runs):
    traj = family_runs[0.05]
    A0 = traj.records[0].area
    k0 = traj.k0
    rates = _family_area_rates(traj)
    literal = max(_rel(d, -2 * math.pi + k0 * l) for d, l in rates)
    corrected = max(_rel(d, -4 * math.pi + 2 * k0 * l) for d, l in rates)
    bound = A0 / (2 * math.pi) * 1.05
    blowup_ok = traj.blowup_time is not None and traj.blowup_time <= bound
    ok = k0 < 0 and blowup_ok and literal < 0.01
    report(4, ok, f"T_est {traj.blowup_time:.4f} <= A(0)/2pi*1.05 = {bound:.4f}: {blowup_ok}; "
                  f"dA/dt vs -2pi + k0 l: rel err {literal:.3f} (ratio 2, see ledger); "
                  f"vs -int R dA = -4pi + 2 k0 l: {corrected:.1e}")
    # the blow-up bound and the Gauss-Bonnet rate that follows from A' = -int R dA hold
    assert k0 < 0 and blowup_ok
    assert traj.blowup_time <= A0 / (4 * math.pi)
    assert corrected < 0.01


@pytest.mark.xfail(strict=True, reason="-2pi + k0 l is half of -int R dA = -4pi + 2 k0 l")
def test_c04_literal_area_rate(family_runs):
    traj = family_runs[0.05]
    rates = _family_area_rates(traj)
    assert max(_rel(d, -2 * math.pi + traj.k0 * l) for d, l in rates) < 0.01


# -- 5 ----------------------------------------------------------------------

def test_c05_uniformization(report, bumped_run):
    traj, elapsed = bumped_run
    R0 = traj.records[0]
    rt = ratio_trend(traj.records)
    ok = (R0.r_min > 0 and traj.k0 >= 0 and traj.termination is Termination.BLOWUP_DETECTED
          and rt.window_max <= 1.05 and elapsed < 300)
    report(5, ok, f"initial ratio {rt.ratio[0]:.3f}, final-10% ratio in [{rt.window_min:.6f}, {rt.window_max:.6f}], "
                  f"{elapsed:.1f} s")
    assert ok


# -- 6 ----------------------------------------------------------------------

def test_c06_isoperimetric_boundary_minimum(report):
    gaps = []

    @FIFTY
    @given(profile_params)
    def case(params):
        m = concave_profile(*params, N=256)
        area = cumulative_trapezoid(2 * np.pi * m.f, m.h)
        length = 2 * np.pi * m.f
        brute = np.min(length[1:] ** 2 / area[1:])
        gaps.append(abs(brute - isoperimetric_infimum(m).value))
        gaps.append(abs(brute - length[-1] ** 2 / area[-1]))

    case()
    worst = max(gaps)
    ok = len(gaps) >= 100 and worst <= 1e-12
    report(6, ok, f"{len(gaps) // 2} profiles, max |brute-force min - boundary value| = {worst:.1e}")
    assert ok


# -- 7 ----------------------------------------------------------------------

def test_c07_radial_monotonicity(report, family_runs):
    parts = []
    ok = True
    for eps, traj in family_runs.items():
        h = traj.base.h
        w = max(r.w_max for r in traj.records)
        ok &= w <= 10 * h
        parts.append(f"eps={eps}: max F R_rho = {w:.2e} (10h = {10 * h:.2e}, {len(traj.records)} records)")
    report(7, ok, "; ".join(parts))
    assert ok


# -- 8 ----------------------------------------------------------------------

def test_c08_fermi_riccati_order(report):
    cases = {
        "hemisphere": exact.hemisphere_metric,
        "flat disk": lambda N: exact.flat_disk_metric(1.0, N),
        "cigar": lambda N: exact.cigar_metric(5.0, N),
    }
    parts = []
    ok = True
    for name, make in cases.items():
        e = [fermi_riccati_residual(make(N)) for N in (64, 128, 256)]
        orders = [math.log2(e[0] / e[1]), math.log2(e[1] / e[2])]
        ok &= all(abs(p - 2.0) <= 0.5 for p in orders)
        parts.append(f"{name} {orders[0]:.2f}/{orders[1]:.2f}")
    report(8, ok, "observed orders " + ", ".join(parts))
    assert ok


# -- 9 ----------------------------------------------------------------------

def test_c09_entropy_consistency(report, bumped_run):
    hm = exact.hemisphere_metric(2048)
    W = w_functional(hm, normalized_constant(hm, 1.0), 1.0)
    werr = abs(W + math.log(2))

    traj, _ = bumped_run
    T = traj.blowup_time
    idx = np.linspace(0, len(traj.snapshots) - 1, 10).astype(int)
    mus = []
    for i in idx:
        s = traj.snapshots[i]
        mus.append(mu(realize_conformal(traj.base, s.u), T - s.t).mu)
    drops = np.diff(mus)
    worst = float(np.min(drops))
    ok = werr < 1e-6 and worst >= -1e-3
    report(9, ok, f"|W + log 2| = {werr:.1e} (N=2048); mu from {mus[0]:.5f} to {mus[-1]:.5f}, "
                  f"smallest increment {worst:.1e}")
    assert ok


# -- 10 ---------------------------------------------------------------------

def test_c10_cigar_probe(report):
    probes = {r: cigar_entropy_probe(r) for r in (8, 16, 32)}
    W = [probes[r].W for r in (8, 16, 32)]
    decreasing = W[0] > W[1] > W[2]
    dc = [probes[2 * r].c - probes[r].c + math.log(2) for r in (8, 16)]
    cig = exact.cigar_metric(60.0, 6000)
    ann = annulus_area(cig, 20.0, 40.0) / (2 * math.pi * 20.0)
    iso = isoperimetric_infimum(exact.cigar_metric(40.0, 4000)).value / isoperimetric_infimum(
        exact.cigar_metric(20.0, 2000)).value
    ok = decreasing and max(map(abs, dc)) <= 0.2 and abs(ann - 1) <= 0.02 and iso < 0.5
    report(10, ok, f"W = {W[0]:.4f} > {W[1]:.4f} > {W[2]:.4f}; c(2r)-c(r)+log2 = {dc[0]:.1e}, {dc[1]:.1e}; "
                   f"A(20,40)/(2pi 20) = {ann:.5f}; iso(40)/iso(20) = {iso:.3f}")
    assert ok


# -- 11 ---------------------------------------------------------------------

BUNDLED = {
    "hemisphere": exact.hemisphere_metric,
    "cap": lambda N: exact.spherical_cap_metric(2.0, 1.5, N),
    "flat disk": lambda N: exact.flat_disk_metric(1.0, N),
    "cigar": lambda N: exact.cigar_metric(5.0, N),
    "family 0.05": lambda N: family_metric(FamilyParams(0.05), N),
    "bumped cap": exact.bumped_hemisphere_metric,
}


def _potential_errors(m):
    p = potential_function(m)
    lap = potential_laplacian(m, p)
    e_lap = float(np.max(np.abs(lap - (p.R - p.r_avg))))
    # h at the boundary rebuilt from finite differences of the potential values
    h_fd = lap[-1] + d1_end(p.f, m.h) ** 2
    e_h = abs(h_fd - (p.R[-1] - p.r_avg))
    assert h_function(m, p)[-1] == pytest.approx(p.R[-1] - p.r_avg, abs=1e-12)
    return e_lap, e_h, abs(p.fprime[-1])


def _order_ok(e1, e2):
    return e2 < 1e-10 or math.log2(e1 / e2) >= 1.5


def test_c11_potential_identities(report):
    ok = True
    parts = []
    for name, make in BUNDLED.items():
        a = _potential_errors(make(128))
        b = _potential_errors(make(256))
        good = _order_ok(a[0], b[0]) and _order_ok(a[1], b[1]) and max(a[2], b[2]) <= 1e-8
        ok &= good
        parts.append(f"{name}: lap {b[0]:.1e}, h(L) {b[1]:.1e}, f'(L) {b[2]:.0e}")
    report(11, ok, "; ".join(parts))
    assert ok


# -- 12 ---------------------------------------------------------------------

def dense_root(eps, n=1_000_000):
    """First sign change of the boundary equation on a dense grid, refined by
    linear interpolation between the two bracketing samples."""
    x = np.linspace(np.pi / 2, 3 * np.pi / 4, n + 1)
    y = boundary_equation(x, eps)
    i = int(np.flatnonzero(np.sign(y[:-1]) != np.sign(y[1:]))[0])
    return x[i] - y[i] * (x[i + 1] - x[i]) / (y[i + 1] - y[i])


def test_c12_root_certification(report):
    ok = True
    parts = []
    for eps in (0.01, 0.02, 0.05, 0.1):
        root = family_boundary_radius(FamilyParams(eps))
        oracle = dense_root(eps)
        lhs = abs(boundary_equation(root.r0, eps))
        good = (np.pi / 2 < root.r0 < 3 * np.pi / 4 and lhs < 1e-10
                and profile_slope(root.r0, eps) < 0 and abs(root.r0 - oracle) < 1e-9)
        ok &= good
        parts.append(f"eps={eps}: r0={root.r0:.10f} |LHS|={lhs:.0e} |r0-oracle|={abs(root.r0 - oracle):.0e}")
    report(12, ok, "; ".join(parts))
    assert ok
