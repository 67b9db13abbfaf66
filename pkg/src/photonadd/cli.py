"""Command-line front end.

    photonadd state       build the configured noisy state, write rho + summary
    photonadd sweep-npt   negativity vs mean photon number, one CSV per config
    photonadd simulate    sample a homodyne dataset
    photonadd reconstruct MLE reconstruction of a dataset
    photonadd stats       photon-number statistics of a state or reconstruction
    photonadd bench       timing report

Exit codes: 0 success, 2 configuration or usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import io
from .bench import run_benchmark
from .channels import apply_full_noise, phase_average
from .config import (PRESETS, ConfigError, ExperimentConfig, config_hash, parse_config, preset_dict,
                     with_seed)
from .entanglement import negativity, npt_sweep
from .fock import DensityOperator, TruncatedSpace, TruncationError, guard_cutoff
from .homodyne import GridError, sample_shots, sample_shots_displaced_frame
from .photon_stats import delta_n_distribution, discorrelation_score, joint_photon_distribution
from .states import StateRecipe
from .tomography import ReconstructionError, ac_reconstruct, ac_transform, bin_dataset, mle_reconstruct

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3
# dense state output beyond this per-mode cutoff would need gigabytes
STATE_MAX_CUTOFF = 45

log = logging.getLogger("photonadd")


class UsageError(ConfigError):
    pass


def _resolve(args) -> tuple[ExperimentConfig, dict]:
    if args.config and args.preset:
        raise UsageError("give either --config or --preset, not both")
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    elif args.preset:
        raw = preset_dict(args.preset)
    else:
        raw = {"schema_version": 1}
    if args.seed is not None:
        raw = with_seed(raw, args.seed)
    cfg = parse_config(raw)
    return cfg, raw


def _summary_header(raw: dict) -> dict:
    return {"config_hash": config_hash(raw), "experiment_config": raw}


def _state(cfg: ExperimentConfig) -> DensityOperator:
    cutoff = guard_cutoff(cfg.alpha)
    if cutoff > STATE_MAX_CUTOFF:
        raise ConfigError(f"|alpha|={abs(cfg.alpha):g} needs per-mode cutoff {cutoff}; dense state output is "
                          f"limited to {STATE_MAX_CUTOFF} (use sweep-npt or simulate instead)")
    return apply_full_noise(StateRecipe(cfg.alpha, cfg.phi, TruncatedSpace(cutoff, 2)), cfg.noise)


def _stats_payload(rho: DensityOperator, out: Path, prefix: str) -> dict:
    jpd = joint_photon_distribution(rho)
    dn = delta_n_distribution(jpd)
    io.write_jpd(jpd, out / f"{prefix}jpd.csv")
    io.write_delta_n(dn, out / f"{prefix}delta_n.csv")
    try:
        score = discorrelation_score(jpd)
    except ValueError:
        score = None
    return {"discorrelation_score": score, "p_delta_n": {str(k): dn[k] for k in range(-3, 4) if k in dn},
            "jpd_total": jpd.total}


def cmd_state(args) -> int:
    cfg, raw = _resolve(args)
    out = _outdir(args)
    rho = _state(cfg)
    io.write_rho_blob(rho, out / "state.rho.bin")
    io.write_rho_csv(rho, out / "state.rho.csv")
    summary = _summary_header(raw)
    summary.update({
        "cutoff": rho.space.cutoff,
        "negativity": negativity(rho),
        "negativity_phase_averaged": negativity(phase_average(rho)),
    })
    summary.update(_stats_payload(rho, out, "state."))
    io.write_json(out / "state.summary.json", summary)
    print(f"negativity {summary['negativity']:.6f} (phase averaged {summary['negativity_phase_averaged']:.6f})")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg, raw = _resolve(args)
    if cfg.sweep is None:
        raise UsageError("config has no 'sweep' section (alpha_list / nbar_list)")
    out = _outdir(args)
    rows = []
    for curve in cfg.sweep.curves:
        rows += npt_sweep(curve.phi, cfg.sweep.alpha_list, curve.noise, phase_averaged=curve.phase_averaged,
                          method=cfg.sweep.method, cutoff=cfg.sweep.cutoff)
    path = io.write_sweep(rows, out / "sweep.csv")
    io.write_json(out / "sweep.meta.json", _summary_header(raw))
    print(f"{len(rows)} rows -> {path}")
    return EXIT_OK


def simulate(cfg: ExperimentConfig):
    # the recipe's space is only materialized by the direct sampler
    recipe = StateRecipe(cfg.alpha, cfg.phi)
    if cfg.resolved_sampler() == "direct":
        return sample_shots(recipe, cfg.protocol, cfg.counts_per_phase, cfg.noise, seed=cfg.seed)
    return sample_shots_displaced_frame(recipe, cfg.protocol, cfg.counts_per_phase, cfg.noise, seed=cfg.seed)


def cmd_simulate(args) -> int:
    cfg, raw = _resolve(args)
    out = _outdir(args)
    ds = simulate(cfg)
    ds.meta["config_hash"] = config_hash(raw)
    path = io.write_dataset(ds, out / "dataset.csv")
    print(f"{len(ds)} shots ({ds.meta['sampler']} sampler) -> {path}")
    return EXIT_OK


def reconstruct(ds, cfg: ExperimentConfig):
    sub = cfg.reconstruction.subspace
    if (sub == "small") != (ds.protocol == "locked_global"):
        raise ConfigError(f"protocol {ds.protocol!r} does not match reconstruction subspace {sub!r} "
                          "(phase_averaged pairs with block_diagonal, locked_global with small)")
    if sub == "small":
        return ac_reconstruct(ds if ds.ac_transformed else ac_transform(ds), cfg.reconstruction)
    return mle_reconstruct(bin_dataset(ds, cfg.reconstruction.bin_width), cfg.reconstruction)


def cmd_reconstruct(args) -> int:
    cfg, raw = _resolve(args)
    out = _outdir(args)
    ds_path = Path(args.dataset) if args.dataset else out / "dataset.csv"
    ds = io.read_dataset(ds_path)
    res = reconstruct(ds, cfg)
    extra = _summary_header(raw)
    extra.update({"dataset": str(ds_path), "negativity": negativity(res.rho)})
    extra.update(_stats_payload(res.rho, out, "reconstruction."))
    io.write_result(res, out / "reconstruction", extra)
    print(f"negativity {extra['negativity']:.6f} after {res.iterations_used} iterations "
          f"({'converged' if res.converged else 'iteration cap'}, {res.wall_time:.1f}s)")
    return EXIT_OK


def cmd_stats(args) -> int:
    cfg, raw = _resolve(args)
    out = _outdir(args)
    rho = io.read_rho_blob(args.rho) if args.rho else _state(cfg)
    summary = _summary_header(raw)
    summary["source"] = args.rho or "config"
    summary.update(_stats_payload(rho, out, "stats."))
    io.write_json(out / "stats.summary.json", summary)
    score = summary["discorrelation_score"]
    print("discorrelation score " + ("undefined" if score is None else f"{score:.6f}"))
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg, raw = _resolve(args)
    out = _outdir(args)
    opts = dict(cfg.bench)
    if args.quick:
        opts.setdefault("nbar_list", [1])
        opts.setdefault("counts_per_phase", 5000)
        opts.setdefault("max_iterations", 50)
        opts.setdefault("dense_iterations", 3)
        opts.setdefault("equivalence_iterations", 20)
    report = run_benchmark(seed=cfg.seed, **opts)
    report.update(_summary_header(raw))
    io.write_json(out / "bench.json", report)
    return EXIT_OK


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="experiment config (JSON)")
    common.add_argument("--preset", choices=PRESETS, help="shipped config preset")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out", metavar="DIR", default="photonadd-out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="photonadd", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("state", parents=[common], help="noisy state, negativity and photon statistics") \
        .set_defaults(fn=cmd_state)
    sub.add_parser("sweep-npt", parents=[common], help="negativity sweep to CSV").set_defaults(fn=cmd_sweep)
    sub.add_parser("simulate", parents=[common], help="homodyne dataset").set_defaults(fn=cmd_simulate)
    r = sub.add_parser("reconstruct", parents=[common], help="maximum-likelihood reconstruction")
    r.add_argument("--dataset", metavar="PATH", help="dataset CSV (default OUT/dataset.csv)")
    r.set_defaults(fn=cmd_reconstruct)
    s = sub.add_parser("stats", parents=[common], help="joint photon-number statistics")
    s.add_argument("--rho", metavar="PATH", help="density-matrix blob (default: state from config)")
    s.set_defaults(fn=cmd_stats)
    b = sub.add_parser("bench", parents=[common], help="timing report")
    b.add_argument("--quick", action="store_true", help="small smoke-test sizes")
    b.set_defaults(fn=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.fn(args)
    except (ConfigError, io.FormatError, FileNotFoundError) as exc:
        print(f"photonadd: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ReconstructionError, GridError, TruncationError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"photonadd: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
