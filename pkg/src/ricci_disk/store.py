"""On-disk trajectory layout.

    out_dir/
        manifest.json        config echo, termination, timings, errors, seed
        base.json            the base metric g0
        snapshots/NNNN.json  t, u, step, r_max and a reference to base.json
        diagnostics.csv      one row per diagnostics record

JSON floats are written with repr, so a snapshot reloads bit-for-bit.
"""
from __future__ import annotations

import csv
import json
import os
import re
from pathlib import Path

import numpy as np

from .diagnostics import CSV_COLUMNS
from .flow import MalformedTrajectoryError, Snapshot, Trajectory
from .geometry import RadialMetric

BASE_FILE = "base.json"
MANIFEST_FILE = "manifest.json"
CSV_FILE = "diagnostics.csv"
SNAPSHOT_DIR = "snapshots"
_SNAP_RE = re.compile(r"^(\d{4,})\.json$")


def snapshot_name(index: int) -> str:
    return f"{index:04d}.json"


def _dump(path: Path, data) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")
    os.replace(tmp, path)


def write_snapshot(path: Path, snap: Snapshot) -> None:
    _dump(path, {"t": snap.t, "step": snap.step, "r_max": snap.r_max,
                 "base": BASE_FILE, "u": snap.u.tolist()})


def read_snapshot(path) -> Snapshot:
    path = Path(path)
    try:
        with open(path) as fh:
            d = json.load(fh)
        return Snapshot(float(d["t"]), np.asarray(d["u"], dtype=float), int(d["step"]), float(d["r_max"]))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise MalformedTrajectoryError(f"cannot read snapshot {path}: {exc}") from exc


def write_csv(path: Path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow(r.csv_row())


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        if tuple(r) != CSV_COLUMNS:
            raise MalformedTrajectoryError(f"unexpected diagnostics columns in {path}")
    return rows


def write_trajectory(out_dir, traj: Trajectory, manifest: dict) -> None:
    out = Path(out_dir)
    snaps = out / SNAPSHOT_DIR
    snaps.mkdir(parents=True, exist_ok=True)
    for old in snaps.iterdir():
        if _SNAP_RE.match(old.name):
            old.unlink()
    _dump(out / BASE_FILE, traj.base.to_json())
    for i, s in enumerate(traj.snapshots):
        write_snapshot(snaps / snapshot_name(i), s)
    write_csv(out / CSV_FILE, traj.records)
    _dump(out / MANIFEST_FILE, manifest)


def write_manifest(out_dir, manifest: dict) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _dump(out / MANIFEST_FILE, manifest)


def read_base(out_dir) -> RadialMetric:
    with open(Path(out_dir) / BASE_FILE) as fh:
        return RadialMetric.from_json(json.load(fh))


def snapshots_up_to(snapshot_path) -> list[Snapshot]:
    """All snapshots of a run directory up to and including ``snapshot_path``."""
    path = Path(snapshot_path)
    m = _SNAP_RE.match(path.name)
    if m is None or not path.is_file():
        raise MalformedTrajectoryError(f"{path} is not a snapshot file")
    last = int(m.group(1))
    out = []
    for i in range(last + 1):
        p = path.parent / snapshot_name(i)
        if not p.is_file():
            raise MalformedTrajectoryError(f"missing snapshot {p}")
        out.append(read_snapshot(p))
    steps = [s.step for s in out]
    if any(b <= a for a, b in zip(steps, steps[1:])):
        raise MalformedTrajectoryError("snapshot steps are not increasing")
    return out
