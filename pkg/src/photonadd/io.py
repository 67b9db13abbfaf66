"""On-disk formats for datasets, reconstructions, sweeps and photon statistics.

Datasets are CSV with a ``protocol,seed,convention=...`` header line followed
by one ``shot_id,phase_index,theta_rel,theta_global,x1,x2`` record per shot.
Reals are written with 17 significant digits, which round-trips IEEE doubles
exactly.  Sidecar ``.meta.json`` files carry the
generator metadata.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .entanglement import NptSweepRow
from .fock import DensityOperator, TruncatedSpace
from .homodyne import CONVENTION, QuadratureDataset
from .photon_stats import JointPhotonDistribution
from .tomography import ReconstructionConfig, ReconstructionResult

DATASET_COLUMNS = ("shot_id", "phase_index", "theta_rel", "theta_global", "x1", "x2")
BLOB_MAGIC = b"PHADRHO1"
_HEADER = struct.Struct("<8sQ")  # 16 bytes: magic, per-operator dimension


class FormatError(ValueError):
    pass


def _sidecar(path: Path) -> Path:
    return path.with_name(path.name + ".meta.json")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


# ----------------------------------------------------------------------------
# datasets
# ----------------------------------------------------------------------------

def write_dataset(ds: QuadratureDataset, path) -> Path:
    path = Path(path)
    table = np.empty(len(ds), dtype=[("a", "i8"), ("b", "i8"), ("c", "f8"), ("d", "f8"), ("e", "f8"), ("f", "f8")])
    for name, col in zip("abcdef", DATASET_COLUMNS):
        table[name] = getattr(ds, col)
    with path.open("w", newline="\n") as fh:
        fh.write(f"{ds.protocol},{ds.seed},convention={CONVENTION}\n")
        np.savetxt(fh, table, fmt="%d,%d,%.17g,%.17g,%.17g,%.17g")
    write_json(_sidecar(path), {"meta": ds.meta, "ac_transformed": ds.ac_transformed})
    return path


def read_dataset(path) -> QuadratureDataset:
    path = Path(path)
    with path.open() as fh:
        head = fh.readline().strip().split(",")
        if len(head) != 3 or not head[2].startswith("convention="):
            raise FormatError(f"{path}: bad dataset header {head!r}")
        if head[2] != f"convention={CONVENTION}":
            raise FormatError(f"{path}: unsupported quadrature {head[2]!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2, dtype=np.float64)
    if data.size == 0:
        data = np.empty((0, 6))
    meta, ac = {}, False
    if _sidecar(path).exists():
        side = json.loads(_sidecar(path).read_text())
        meta, ac = side.get("meta", {}), bool(side.get("ac_transformed", False))
    return QuadratureDataset(
        protocol=head[0], seed=int(head[1]),
        shot_id=data[:, 0].astype(np.int64), phase_index=data[:, 1].astype(np.int64),
        theta_rel=data[:, 2].copy(), theta_global=data[:, 3].copy(),
        x1=data[:, 4].copy(), x2=data[:, 5].copy(), meta=meta, ac_transformed=ac)


# ----------------------------------------------------------------------------
# density matrices and reconstructions
# ----------------------------------------------------------------------------

def write_rho_blob(rho: DensityOperator, path) -> Path:
    """16-byte header (magic, dimension) then row-major interleaved re/im float64 LE."""
    path = Path(path)
    m = np.ascontiguousarray(rho.matrix, dtype="<c16")
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(BLOB_MAGIC, m.shape[0]))
        fh.write(m.view("<f8").tobytes())
    return path


def read_rho_blob(path, modes: int = 2) -> DensityOperator:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated blob")
    magic, dim = _HEADER.unpack_from(raw)
    if magic != BLOB_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if body.size != 2 * dim * dim:
        raise FormatError(f"{path}: expected {2 * dim * dim} values, found {body.size}")
    m = body.view("<c16").reshape(dim, dim).astype(np.complex128)
    d = round(dim ** (1.0 / modes))
    if d ** modes != dim:
        raise FormatError(f"{path}: dimension {dim} is not a {modes}-mode product space")
    return DensityOperator(TruncatedSpace(d - 1, modes), m)


def write_rho_csv(rho: DensityOperator, path) -> Path:
    """Human-readable export: one row per matrix row, entries as re,im pairs."""
    path = Path(path)
    m = rho.matrix
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"{k}_{part}" for k in range(m.shape[1]) for part in ("re", "im")])
        for row in m:
            w.writerow([f"{v:.17g}" for z in row for v in (z.real, z.imag)])
    return path


def read_rho_csv(path, modes: int = 2) -> DensityOperator:
    vals = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    m = vals[:, 0::2] + 1j * vals[:, 1::2]
    d = round(m.shape[0] ** (1.0 / modes))
    return DensityOperator(TruncatedSpace(d - 1, modes), m)


def write_result(result: ReconstructionResult, stem, extra: dict | None = None) -> dict:
    """Write ``stem.json``, ``stem.rho.bin`` and ``stem.rho.csv``; return their paths."""
    stem = Path(stem)
    blob = write_rho_blob(result.rho, stem.with_name(stem.name + ".rho.bin"))
    csv_path = write_rho_csv(result.rho, stem.with_name(stem.name + ".rho.csv"))
    payload = {
        "config": result.config.to_dict(),
        "cutoff": result.rho.space.cutoff,
        "iterations_used": result.iterations_used,
        "converged": result.converged,
        "final_log_likelihood": result.final_log_likelihood,
        "likelihood_trace": result.likelihood_trace,
        "distance_trace": result.distance_trace,
        "dilution_steps": result.dilution_steps,
        "wall_time": result.wall_time,
        "rho_blob": blob.name,
        "rho_csv": csv_path.name,
    }
    payload.update(extra or {})
    json_path = stem.with_name(stem.name + ".json")
    write_json(json_path, payload)
    return {"json": json_path, "blob": blob, "csv": csv_path}


def read_result(json_path) -> ReconstructionResult:
    json_path = Path(json_path)
    meta = json.loads(json_path.read_text())
    rho = read_rho_blob(json_path.with_name(meta["rho_blob"]))
    return ReconstructionResult(
        rho=rho, iterations_used=meta["iterations_used"], converged=meta["converged"],
        final_log_likelihood=meta["final_log_likelihood"],
        likelihood_trace=np.asarray(meta["likelihood_trace"], dtype=np.float64),
        wall_time=meta["wall_time"], config=ReconstructionConfig.from_dict(meta["config"]),
        distance_trace=np.asarray(meta["distance_trace"], dtype=np.float64),
        dilution_steps=meta["dilution_steps"])


# ----------------------------------------------------------------------------
# sweeps and photon statistics
# ----------------------------------------------------------------------------

SWEEP_COLUMNS = ("nbar", "phi", "npt", "noise_tag")


def write_sweep(rows, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([f"{r.nbar:.17g}", f"{r.phi:.17g}", f"{r.npt:.17g}", r.noise_tag])
    return path


def read_sweep(path) -> list[NptSweepRow]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != SWEEP_COLUMNS:
            raise FormatError(f"{path}: unexpected sweep columns {header!r}")
        return [NptSweepRow(float(a), float(b), float(c), d) for a, b, c, d in reader]


def write_jpd(jpd: JointPhotonDistribution, path) -> Path:
    path = Path(path)
    c = jpd.cutoff
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n1", "n2", "p"])
        for n1 in range(c + 1):
            for n2 in range(c + 1):
                w.writerow([n1, n2, f"{jpd.table[n1, n2]:.17g}"])
    return path


def read_jpd(path) -> JointPhotonDistribution:
    vals = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    d = int(vals[:, 0].max()) + 1
    table = np.zeros((d, d))
    table[vals[:, 0].astype(int), vals[:, 1].astype(int)] = vals[:, 2]
    return JointPhotonDistribution(table)


def write_delta_n(dist: dict, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["delta_n", "p"])
        for k in sorted(dist):
            w.writerow([k, f"{dist[k]:.17g}"])
    return path


def read_delta_n(path) -> dict[int, float]:
    vals = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {int(k): float(p) for k, p in vals}
