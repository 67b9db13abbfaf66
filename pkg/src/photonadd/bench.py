"""Timing harness: block vs dense reconstruction and numba vs numpy kernels."""

from __future__ import annotations

import math
import os
import platform
import time

import numpy as np

from . import _accel, kernels
from .channels import NoiseModel
from .homodyne import sample_shots_displaced_frame
from .states import StateRecipe
from .tomography import ReconstructionConfig, bin_dataset, mle_reconstruct, reconstruction_cutoff

BENCH_ETA = 0.68


def machine_descriptor() -> dict:
    import scipy

    numba_version = None
    if _accel.HAS_NUMBA:
        import numba

        numba_version = numba.__version__
    return {
        "platform": platform.platform(),
        "machine": platform.machine(),
        "processor": platform.processor(),
        "cpu_count": os.cpu_count(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba_version,
        "kernel_backend": _accel.backend_name(),
    }


def _histogram(nbar: float, counts_per_phase: int, seed: int):
    recipe = StateRecipe(math.sqrt(nbar), math.pi)
    ds = sample_shots_displaced_frame(recipe, "phase_averaged", counts_per_phase,
                                      NoiseModel.symmetric(BENCH_ETA), seed=seed)
    return bin_dataset(ds)


def time_reconstruction(nbar: float, counts_per_phase: int = 50_000, seed: int = 0,
                        max_iterations: int = 5000, dense: bool = False, hist=None) -> dict:
    hist = hist if hist is not None else _histogram(nbar, counts_per_phase, seed)
    cfg = ReconstructionConfig(cutoff=reconstruction_cutoff(nbar), max_iterations=max_iterations, dense=dense)
    res = mle_reconstruct(hist, cfg)
    return {
        "nbar": nbar, "cutoff": cfg.cutoff, "dense": dense, "wall_time": res.wall_time,
        "iterations": res.iterations_used, "converged": res.converged,
        "per_iteration": res.wall_time / max(res.iterations_used, 1),
        "final_log_likelihood": res.final_log_likelihood, "result": res,
    }


def dense_vs_block(nbar: float, iterations: int, counts_per_phase: int = 50_000, seed: int = 0) -> dict:
    """Run both paths for the same fixed number of iterations and compare."""
    hist = _histogram(nbar, counts_per_phase, seed)
    block = time_reconstruction(nbar, max_iterations=iterations, hist=hist)
    dense = time_reconstruction(nbar, max_iterations=iterations, dense=True, hist=hist)
    diff = float(np.max(np.abs(block["result"].rho.matrix - dense["result"].rho.matrix)))
    return {
        "nbar": nbar, "iterations": iterations,
        "block_wall_time": block["wall_time"], "dense_wall_time": dense["wall_time"],
        "speedup": dense["wall_time"] / block["wall_time"],
        "max_abs_difference": diff,
    }


def _best_of(fn, repeat: int = 3) -> float:
    best = math.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def kernel_timings(repeat: int = 3) -> dict:
    """Wall time of each kernel on both backends (numba timed after warm-up)."""
    rng = np.random.default_rng(0)
    x = np.linspace(-12, 12, 2001)
    rho = rng.normal(size=(30, 30, 30, 30)) + 1j * rng.normal(size=(30, 30, 30, 30))
    i1 = rng.integers(-60, 60, 450_000)
    i2 = rng.integers(-60, 60, 450_000)
    herm2 = kernels.hermite_functions_numpy(1, x)
    core = np.zeros((2, 2, 2, 2), dtype=np.complex128)
    core[0, 1, 0, 1] = core[1, 0, 1, 0] = 0.5
    core[0, 1, 1, 0] = core[1, 0, 0, 1] = -0.5
    n = 50_000
    th = rng.uniform(0, 2 * math.pi, n)
    u1, u2 = rng.random(n), rng.random(n)
    cases = {
        "hermite_functions": lambda f: f(60, x),
        "displacement_matrix": lambda f: f(2.0 + 1.0j, 60),
        "apply_loss": lambda f: f(rho, 0.6),
        "bin_counts": lambda f: f(i1, i2),
        "sample_pairs": lambda f: f(core, herm2, x[0], x[1] - x[0], th, th + 0.5, u1, u2),
    }
    out = {}
    for name, call in cases.items():
        row = {"numpy": _best_of(lambda: call(getattr(kernels, name + "_numpy")), repeat)}
        if _accel.HAS_NUMBA:
            nb = getattr(kernels, name + "_numba")
            call(nb)  # compile
            row["numba"] = _best_of(lambda: call(nb), repeat)
            row["speedup"] = row["numpy"] / row["numba"]
        out[name] = row
    return out


def run_benchmark(nbar_list=(1, 4, 6), counts_per_phase: int = 50_000, seed: int = 0,
                  max_iterations: int = 5000, dense_iterations: int = 10, equivalence_iterations: int = 200,
                  include_kernels: bool = True, log=print) -> dict:
    """Full timing report; ``log`` receives one progress line per stage."""
    report = {"machine": machine_descriptor(), "reconstruction": [], "eta": BENCH_ETA,
              "counts_per_phase": counts_per_phase, "seed": seed}
    for nbar in nbar_list:
        row = time_reconstruction(nbar, counts_per_phase, seed, max_iterations)
        row.pop("result")
        report["reconstruction"].append(row)
        log(f"nbar={nbar:g} cutoff={row['cutoff']} iterations={row['iterations']} "
            f"wall={row['wall_time']:.1f}s per-iteration={row['per_iteration'] * 1e3:.1f}ms")
    eq = dense_vs_block(1, equivalence_iterations, counts_per_phase, seed)
    report["equivalence_nbar1"] = eq
    log(f"block vs dense at nbar=1: max |diff| = {eq['max_abs_difference']:.2e}")
    sp = dense_vs_block(4, dense_iterations, counts_per_phase, seed)
    report["speedup_nbar4"] = sp
    log(f"block vs dense at nbar=4: speedup {sp['speedup']:.1f}x, max |diff| = {sp['max_abs_difference']:.2e}")
    if include_kernels:
        report["kernels"] = kernel_timings()
        for name, row in report["kernels"].items():
            log(f"kernel {name}: " + ", ".join(f"{k}={v:.4g}" for k, v in row.items()))
    return report
