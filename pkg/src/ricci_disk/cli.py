"""Command-line front end.

    ricci-disk run --config PATH [--resume SNAPSHOT]
    ricci-disk family --epsilon X [--grid N] [--out PATH]
    ricci-disk probe --cigar-entropy --r-list 8,16,32 [--cutoff-mult M]

Exit codes: 0 success, 1 bad input, 2 solver breakdown (run) or tail-mass
error (probe), 3 no boundary root (family).
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__, exact, store
from .diagnostics import ratio_trend
from .entropy import EntropyOptions, TailMassError, cigar_entropy_probe, mu
from .family import FamilyParams, NoRootError, family_boundary_radius, family_profile, provenance
from .flow import MalformedTrajectoryError, SolverConfig, Termination, Trajectory, normalize, run
from .geometry import MalformedProfileError, RadialMetric, realize_conformal, resample

log = logging.getLogger("ricci_disk")

SEED_ENV = "RICCI_DISK_SEED"

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_BREAKDOWN = 2
EXIT_NO_ROOT = 3


class ConfigError(ValueError):
    pass


_INITIAL_KEYS = {
    "hemisphere": (),
    "cap": ("K", "rhoMax"),
    "flatDisk": ("rho0",),
    "cigar": ("L",),
    "family": ("epsilon",),
    "file": ("path",),
}
_SOLVER_KEYS = {
    "N": "N",
    "tMax": "t_max",
    "cflSafety": "cfl_safety",
    "rBlowup": "r_blowup",
    "dtMin": "dt_min",
    "outputEvery": "output_every",
}
_ENTROPY_KEYS = {
    "maxIters": "max_iters",
    "stepTol": "step_tol",
    "gradTol": "grad_tol",
    "restarts": "restarts",
    "grid": "grid",
}


@dataclass(frozen=True)
class EntropySchedule:
    every: int = 1  # evaluate mu on every k-th diagnostics record
    tau: float | str = "blowup"  # a fixed tau, or "blowup" for tau = T_est - t
    options: EntropyOptions = field(default_factory=EntropyOptions)


@dataclass(frozen=True)
class RunConfig:
    initial: dict
    solver: SolverConfig
    out_dir: Path
    diagnostics_cadence: int = 1
    entropy: EntropySchedule | None = None
    seed: int = 0
    raw: dict = field(default_factory=dict, repr=False)


def _require(d, key, kind=dict):
    if key not in d:
        raise ConfigError(f"missing key '{key}'")
    if kind is not None and not isinstance(d[key], kind):
        raise ConfigError(f"'{key}' must be a {kind.__name__}")
    return d[key]


def _unknown(d: dict, allowed, where: str):
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ConfigError(f"unknown keys in {where}: {', '.join(extra)}")


def parse_config(data: dict, base_dir: Path = Path(".")) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    _unknown(data, ("initial", "solver", "diagnosticsCadence", "entropy", "outDir", "seed"), "config")

    initial = _require(data, "initial")
    kind = initial.get("type")
    if kind not in _INITIAL_KEYS:
        raise ConfigError(f"initial.type must be one of {sorted(_INITIAL_KEYS)}, got {kind!r}")
    _unknown(initial, ("type",) + _INITIAL_KEYS[kind], f"initial ({kind})")
    for k in _INITIAL_KEYS[kind]:
        _require(initial, k, None)

    solver = _require(data, "solver")
    _unknown(solver, _SOLVER_KEYS, "solver")
    try:
        cfg = SolverConfig(**{_SOLVER_KEYS[k]: v for k, v in solver.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"solver: {exc}") from exc

    cadence = data.get("diagnosticsCadence", 1)
    if not isinstance(cadence, int) or cadence < 1:
        raise ConfigError("diagnosticsCadence must be a positive integer")

    sched = None
    if data.get("entropy") is not None:
        ent = data["entropy"]
        if not isinstance(ent, dict):
            raise ConfigError("entropy must be an object")
        _unknown(ent, ("every", "tau", "options"), "entropy")
        tau = ent.get("tau", "blowup")
        if not (tau == "blowup" or (isinstance(tau, (int, float)) and tau > 0)):
            raise ConfigError("entropy.tau must be 'blowup' or a positive number")
        every = ent.get("every", 1)
        if not isinstance(every, int) or every < 1:
            raise ConfigError("entropy.every must be a positive integer")
        opts = ent.get("options", {})
        _unknown(opts, _ENTROPY_KEYS, "entropy.options")
        try:
            eo = EntropyOptions(**{_ENTROPY_KEYS[k]: v for k, v in opts.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"entropy.options: {exc}") from exc
        sched = EntropySchedule(every, tau if tau == "blowup" else float(tau), eo)

    out_dir = _require(data, "outDir", str)
    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            seed = int(env)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from exc

    out = Path(out_dir)
    if not out.is_absolute():
        out = base_dir / out
    if kind == "file" and not Path(initial["path"]).is_absolute():
        initial = dict(initial, path=str(base_dir / initial["path"]))
    return RunConfig(initial, cfg, out, cadence, sched, seed, data)


def build_initial(initial: dict, N: int) -> RadialMetric:
    kind = initial["type"]
    try:
        if kind == "hemisphere":
            return exact.hemisphere_metric(N)
        if kind == "cap":
            return exact.spherical_cap_metric(float(initial["K"]), float(initial["rhoMax"]), N)
        if kind == "flatDisk":
            return exact.flat_disk_metric(float(initial["rho0"]), N)
        if kind == "cigar":
            return exact.cigar_metric(float(initial["L"]), N)
        if kind == "family":
            p = FamilyParams(float(initial["epsilon"]))
            return family_profile(p.epsilon, family_boundary_radius(p).r0, N)
        with open(initial["path"]) as fh:
            d = json.load(fh)
        m = RadialMetric.from_json(d.get("profile", d))
        return m if m.N == N else resample(m, N)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"initial condition ({kind}): {exc}") from exc


def _entropy_records(traj: Trajectory, sched: EntropySchedule, seed: int, errors: list) -> None:
    if sched.tau == "blowup" and traj.blowup_time is None:
        errors.append("entropy skipped: tau = 'blowup' needs a detected blow-up")
        return
    out = list(traj.records)
    for j, rec in enumerate(out):
        if j % sched.every:
            continue
        tau = traj.blowup_time - rec.t if sched.tau == "blowup" else sched.tau
        if not tau > 0:
            continue
        m = realize_conformal(traj.base, traj.snapshots[rec.snapshot].u)
        rng = np.random.default_rng([seed, rec.snapshot])
        res = mu(m, tau, sched.options, rng)
        if not res.converged:
            errors.append(f"mu not converged at t={rec.t!r}")
        out[j] = replace(rec, mu=res.mu)
    traj.records = out


def _finite_or_none(x):
    return None if x is None or not math.isfinite(x) else x


def execute(cfg: RunConfig, resume: str | None = None) -> tuple[int, dict]:
    t0 = time.perf_counter()
    errors: list[str] = []
    base = build_initial(cfg.initial, cfg.solver.N)
    prior = None
    if resume is not None:
        snaps = store.snapshots_up_to(resume)
        stored = store.read_base(Path(resume).parent.parent)
        if stored.N != base.N or stored.h != base.h or not np.array_equal(stored.f, base.f):
            raise ConfigError("resume snapshot was produced from a different base metric")
        prior = Trajectory(base, cfg.solver, 0.0, snaps)
    traj = run(base, cfg.solver, resume=prior, diagnostics_cadence=cfg.diagnostics_cadence)
    t_run = time.perf_counter() - t0
    if traj.message:
        errors.append(traj.message)
    if cfg.entropy is not None:
        _entropy_records(traj, cfg.entropy, cfg.seed, errors)
    t_diag = time.perf_counter() - t0 - t_run

    summary = {}
    if len(traj.snapshots) >= 2:
        try:
            nt = normalize(traj)
            summary["normalized_time_final"] = float(nt.t_normalized[-1])
            summary["normalized_boundary_curvature_final"] = float(nt.k_normalized[-1])
        except MalformedTrajectoryError as exc:
            errors.append(str(exc))
    if len(traj.records) >= 2 and all(r.r_min > 0 for r in traj.records):
        rt = ratio_trend(traj.records)
        summary["ratio_window_min"] = rt.window_min
        summary["ratio_window_max"] = rt.window_max
    shi = [r.shi_ratio for r in traj.records if r.shi_ratio is not None]

    manifest = {
        "version": __version__,
        "config": cfg.raw,
        "seed": cfg.seed,
        "resumed_from": None if resume is None else str(resume),
        "termination": traj.termination.value,
        "t_final": traj.snapshots[-1].t,
        "steps": traj.snapshots[-1].step,
        "blowup_time": traj.blowup_time,
        "k0": traj.k0,
        "snapshots": len(traj.snapshots),
        "records": len(traj.records),
        "shi_bound": _finite_or_none(max(shi)) if shi else None,
        "summary": summary,
        "timings": {"run_s": t_run, "diagnostics_s": t_diag, "total_s": time.perf_counter() - t0},
        "errors": errors,
    }
    store.write_trajectory(cfg.out_dir, traj, manifest)
    ok = traj.termination in (Termination.REACHED_TMAX, Termination.BLOWUP_DETECTED)
    return (EXIT_OK if ok else EXIT_BREAKDOWN), manifest


def cmd_run(args) -> int:
    path = Path(args.config)
    try:
        with open(path) as fh:
            data = json.load(fh)
        cfg = parse_config(data, path.parent)
    except (OSError, ValueError) as exc:
        # ConfigError and JSONDecodeError are ValueErrors; nothing is written
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        code, manifest = execute(cfg, args.resume)
    except (ConfigError, MalformedTrajectoryError, MalformedProfileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        store.write_manifest(cfg.out_dir, {"config": cfg.raw, "seed": cfg.seed, "termination": None,
                                           "errors": [str(exc)]})
        return EXIT_INPUT
    print(f"{manifest['termination']} at t={manifest['t_final']:.10g} "
          f"({manifest['steps']} steps, {manifest['snapshots']} snapshots) -> {cfg.out_dir}")
    return code


def cmd_family(args) -> int:
    try:
        p = FamilyParams(args.epsilon)
        if args.grid < 16:
            raise ValueError("--grid must be at least 16")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        root = family_boundary_radius(p)
    except NoRootError as exc:
        print(f"no root: {exc}", file=sys.stderr)
        return EXIT_NO_ROOT
    m = family_profile(p.epsilon, root.r0, args.grid)
    text = json.dumps({"profile": m.to_json(), "provenance": provenance(p, root)}, indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(f"r0 = {root.r0!r} -> {args.out}")
    else:
        print(text)
    return EXIT_OK


def _parse_r_list(s: str) -> list[float]:
    parts = [x.strip() for x in s.split(",") if x.strip()]
    if not parts:
        raise ValueError("empty --r-list")
    vals = [float(x) for x in parts]
    bad = [v for v in vals if not (math.isfinite(v) and v >= 4)]
    if bad:
        raise ValueError(f"r values must be at least 4, got {bad}")
    return vals


def cmd_probe(args) -> int:
    if not args.cigar_entropy:
        print("error: probe needs --cigar-entropy", file=sys.stderr)
        return EXIT_INPUT
    try:
        rs = _parse_r_list(args.r_list)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    rows = []
    try:
        for r in rs:
            rows.append(cigar_entropy_probe(r, args.cutoff_mult * r))
    except TailMassError as exc:
        print(f"tail mass error: {exc}", file=sys.stderr)
        return EXIT_BREAKDOWN
    print("r,c,W")
    for p in rows:
        print(f"{p.r!r},{p.c!r},{p.W!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ricci-disk", description="Boundary-value Ricci flow on the radial disk.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate the flow from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--resume", default=None, help="snapshot file to continue from")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("family", help="certified boundary radius and profile of f_eps")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("probe", help="entropy of the cigar test function")
    p.add_argument("--cigar-entropy", action="store_true")
    p.add_argument("--r-list", required=True)
    p.add_argument("--cutoff-mult", type=float, default=8.0)
    p.set_defaults(func=cmd_probe)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
