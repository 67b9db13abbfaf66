"""Two-mode homodyne statistics and synthetic shot generation.

Quadrature convention: x_theta = (a e^{-i theta} + a^dag e^{i theta}) / sqrt(2),
so the vacuum variance is 1/2 and <n|x_theta> = e^{i n theta} psi_n(x).

Mode 1 is measured at the global LO phase theta_g, mode 2 at
theta_g + theta_rel.  theta_rel runs over a 9-point grid on [0, pi].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterator, NamedTuple

import numpy as np

from . import kernels
from .channels import (NoiseModel, apply_full_noise, dephase_global, displaced_frame_core,
                       phase_average)
from .fock import DensityOperator, partial_trace
from .states import StateRecipe

CONVENTION = "vac-var-0.5"
PROTOCOLS = ("phase_averaged", "locked_global")
N_PHASES = 9
GRID_POINTS = 2001
BOUNDARY_MASS_TOL = 1e-6


class GridError(ValueError):
    """Quadrature grid does not contain the state's probability mass."""


def relative_phases(n: int = N_PHASES) -> np.ndarray:
    """Uniform grid over [0, pi] including both endpoints."""
    return np.linspace(0.0, math.pi, n)


def quadrature_wavefunction(n: int, x):
    """psi_n(x) = pi^{-1/4} (2^n n!)^{-1/2} H_n(x) exp(-x^2/2), via the stable recurrence."""
    xa = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = kernels.hermite_functions(int(n), xa)[:, n]
    return float(out[0]) if np.ndim(x) == 0 else out


def grid_half_width(rho: DensityOperator) -> float:
    """Half-width sqrt(2 nbar_max + 1/2) + 6, an upper bound on sqrt(2)|<a>| + 6."""
    if rho.space.modes == 2:
        nbar = max(_mean_photons(partial_trace(rho, k)) for k in (0, 1))
    else:
        nbar = _mean_photons(rho)
    return math.sqrt(2 * nbar + 0.5) + 6.0


def _mean_photons(rho1: DensityOperator) -> float:
    return float(np.real(np.diag(rho1.matrix)) @ np.arange(rho1.space.dim_mode))


def default_grid(rho: DensityOperator, points: int = GRID_POINTS) -> np.ndarray:
    L = grid_half_width(rho)
    return np.linspace(-L, L, points)


def _conditional_operators(rho4: np.ndarray, phi1: np.ndarray, chunk: int = 128) -> np.ndarray:
    """sigma_i[a, b] = sum_{n,m} phi1[i,n] conj(phi1[i,m]) rho[n, a, m, b] for every grid row i."""
    c = rho4.shape[0]
    flat = np.ascontiguousarray(rho4.transpose(0, 1, 3, 2)).reshape(c * c * c, c)
    out = np.empty((phi1.shape[0], c, c), dtype=np.complex128)
    for lo in range(0, phi1.shape[0], chunk):
        blk = phi1[lo:lo + chunk]
        x = (flat @ blk.conj().T).reshape(c, c * c, -1)
        out[lo:lo + chunk] = np.einsum("in,nki->ik", blk, x).reshape(-1, c, c)
    return out


def _pdf_from_sigma(sigma: np.ndarray, herm2: np.ndarray, theta2: float) -> np.ndarray:
    c = sigma.shape[1]
    n = np.arange(c)
    rot = np.exp(-1j * theta2 * (n[:, None] - n[None, :]))
    s = (sigma * rot).real.reshape(sigma.shape[0], c * c)
    pairs = (herm2[:, :, None] * herm2[:, None, :]).reshape(herm2.shape[0], c * c)
    return s @ pairs.T


def _check_mass(pdf: np.ndarray, grid: np.ndarray) -> None:
    h = grid[1] - grid[0]
    mass = pdf.sum() * h * h
    if 1.0 - mass > BOUNDARY_MASS_TOL:
        raise GridError(f"grid [{grid[0]:.3g}, {grid[-1]:.3g}] misses {1 - mass:.3g} of the probability")


def joint_quadrature_pdf(rho: DensityOperator, theta1: float, theta2: float,
                         grid: np.ndarray | None = None) -> np.ndarray:
    """Joint density P(x1, x2) on ``grid`` x ``grid`` (rows: x1, columns: x2)."""
    if rho.space.modes != 2:
        raise ValueError("joint_quadrature_pdf needs a two-mode state")
    grid = default_grid(rho) if grid is None else np.asarray(grid, dtype=np.float64)
    herm = kernels.hermite_functions(rho.space.cutoff, grid)
    n = np.arange(rho.space.dim_mode)
    sigma = _conditional_operators(rho.as_tensor(), herm * np.exp(-1j * n * theta1))
    pdf = _pdf_from_sigma(sigma, herm, theta2)
    _check_mass(pdf, grid)
    return pdf


class QuadratureShot(NamedTuple):
    shot_id: int
    phase_index: int
    theta_rel: float
    theta_global: float
    x1: float
    x2: float


@dataclass
class QuadratureDataset:
    """Columnar store of homodyne shots, grouped by relative-phase index."""

    protocol: str
    seed: int
    shot_id: np.ndarray
    phase_index: np.ndarray
    theta_rel: np.ndarray
    theta_global: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    meta: dict = field(default_factory=dict)
    ac_transformed: bool = False

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        n = len(self.x1)
        for name in ("shot_id", "phase_index", "theta_rel", "theta_global", "x2"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"column {name} has the wrong length")

    def __len__(self) -> int:
        return len(self.x1)

    @property
    def phase_indices(self) -> np.ndarray:
        return np.unique(self.phase_index)

    def counts_per_phase(self) -> dict[int, int]:
        idx, counts = np.unique(self.phase_index, return_counts=True)
        return {int(i): int(c) for i, c in zip(idx, counts)}

    def phase_of(self, index: int) -> float:
        return float(self.theta_rel[np.flatnonzero(self.phase_index == index)[0]])

    def group(self, index: int) -> QuadratureDataset:
        sel = self.phase_index == index
        return replace(self, **{k: getattr(self, k)[sel] for k in
                                ("shot_id", "phase_index", "theta_rel", "theta_global", "x1", "x2")})

    def shots(self) -> Iterator[QuadratureShot]:
        for row in zip(self.shot_id, self.phase_index, self.theta_rel, self.theta_global, self.x1, self.x2):
            yield QuadratureShot(int(row[0]), int(row[1]), *map(float, row[2:]))


def _detected_state(source, protocol: str, noise: NoiseModel) -> DensityOperator:
    if isinstance(source, StateRecipe):
        # LO-phase noise is handled below, per protocol
        rho = apply_full_noise(source, replace(noise, sigma_global=0.0))
    elif isinstance(source, DensityOperator):
        rho = source
    else:
        raise TypeError(f"expected StateRecipe or DensityOperator, got {type(source).__name__}")
    if protocol == "phase_averaged":
        return phase_average(rho)
    return dephase_global(rho, noise.sigma_global)


def _draw_global_phases(rng: np.random.Generator, protocol: str, n: int, sigma: float) -> np.ndarray:
    if protocol == "phase_averaged":
        return rng.uniform(0.0, 2 * math.pi, n)
    return rng.normal(0.0, 1.0, n) * sigma


def _assemble(protocol, seed, thetas, groups, meta) -> QuadratureDataset:
    phase_index = np.concatenate([np.full(len(g[0]), k, dtype=np.int64) for k, g in enumerate(groups)])
    theta_rel = thetas[phase_index]
    return QuadratureDataset(
        protocol=protocol, seed=int(seed),
        shot_id=np.arange(len(phase_index), dtype=np.int64),
        phase_index=phase_index, theta_rel=theta_rel,
        theta_global=np.concatenate([g[0] for g in groups]),
        x1=np.concatenate([g[1] for g in groups]),
        x2=np.concatenate([g[2] for g in groups]),
        meta=meta)


def _recipe_meta(source) -> dict | None:
    if isinstance(source, StateRecipe):
        return {"alpha": [source.alpha.real, source.alpha.imag], "phi": source.phi,
                "cutoff": source.space.cutoff, "nbar": source.nbar}
    return None


def sample_shots(source, protocol: str, counts_per_phase: int, noise: NoiseModel | None = None,
                 seed: int = 0, grid_points: int = GRID_POINTS, n_phases: int = N_PHASES) -> QuadratureDataset:
    """Sample shots directly from the full two-mode state.

    A StateRecipe is pushed through the noise model; a DensityOperator is
    taken as the state reaching the detector.  The random LO phase of either
    protocol acts on the measured pair only through the phase-averaged (or
    Gaussian-dephased) state, so (x1, x2) are drawn from that state and the
    recorded theta_global values are independent draws of the LO phase.
    """
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}")
    if counts_per_phase < 1:
        raise ValueError("counts_per_phase must be >= 1")
    noise = noise or NoiseModel()
    rho = _detected_state(source, protocol, noise)
    grid = default_grid(rho, grid_points)
    h = grid[1] - grid[0]
    herm = kernels.hermite_functions(rho.space.cutoff, grid)
    sigma = _conditional_operators(rho.as_tensor(), herm)
    thetas = relative_phases(n_phases)
    streams = np.random.SeedSequence(seed).spawn(n_phases)
    groups = []
    for k, theta in enumerate(thetas):
        rng = np.random.Generator(np.random.PCG64(streams[k]))
        tg = _draw_global_phases(rng, protocol, counts_per_phase, noise.sigma_global)
        u1 = rng.random(counts_per_phase)
        u2 = rng.random(counts_per_phase)
        pdf = _pdf_from_sigma(sigma, herm, theta)
        _check_mass(pdf, grid)
        i1, x1 = kernels.draw_from_pdf(pdf.sum(axis=1), u1, grid[0], h)
        x2 = np.empty(counts_per_phase)
        for lo in range(0, counts_per_phase, 4096):
            sl = slice(lo, lo + 4096)
            _, x2[sl] = kernels.draw_cells(pdf[i1[sl]], u2[sl], grid[0], h)
        groups.append((tg, x1, x2))
    meta = {"convention": CONVENTION, "sampler": "direct", "recipe": _recipe_meta(source),
            "noise": noise.to_dict(), "counts_per_phase": counts_per_phase, "grid_points": grid_points,
            "nbar_axis": "|alpha|^2"}
    return _assemble(protocol, seed, thetas, groups, meta)


def sample_shots_displaced_frame(recipe: StateRecipe, protocol: str, counts_per_phase: int,
                                 noise: NoiseModel | None = None, seed: int = 0, core_cutoff: int = 1,
                                 grid_points: int = GRID_POINTS, n_phases: int = N_PHASES) -> QuadratureDataset:
    """Sample the small undisplaced core and add the mean field shot by shot.

    Each shot's LO phases (theta_g, theta_g + theta_rel) are applied exactly,
    including the rotation of the mean field by theta_g, so the cost does not
    depend on |alpha|.
    """
    if not isinstance(recipe, StateRecipe):
        raise TypeError("displaced-frame sampling needs a StateRecipe (displaced-core form)")
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}")
    if counts_per_phase < 1:
        raise ValueError("counts_per_phase must be >= 1")
    noise = noise or NoiseModel()
    dc = displaced_frame_core(recipe, noise, core_cutoff)
    grid = default_grid(dc.core, grid_points)
    h = grid[1] - grid[0]
    herm = kernels.hermite_functions(core_cutoff, grid)
    core4 = dc.core.as_tensor()
    thetas = relative_phases(n_phases)
    streams = np.random.SeedSequence(seed).spawn(n_phases)
    groups = []
    for k, theta in enumerate(thetas):
        rng = np.random.Generator(np.random.PCG64(streams[k]))
        tg = _draw_global_phases(rng, protocol, counts_per_phase, noise.sigma_global)
        u1 = rng.random(counts_per_phase)
        u2 = rng.random(counts_per_phase)
        th1 = tg
        th2 = tg + theta
        c1, c2 = kernels.sample_pairs(core4, herm, grid[0], h, th1, th2, u1, u2)
        x1 = c1 + math.sqrt(2) * np.real(dc.beta1 * np.exp(-1j * th1))
        x2 = c2 + math.sqrt(2) * np.real(dc.beta2 * np.exp(-1j * th2))
        groups.append((tg, x1, x2))
    meta = {"convention": CONVENTION, "sampler": "displaced_frame", "recipe": _recipe_meta(recipe),
            "noise": noise.to_dict(), "counts_per_phase": counts_per_phase, "grid_points": grid_points,
            "core_cutoff": core_cutoff, "nbar_axis": "|alpha|^2"}
    return _assemble(protocol, seed, thetas, groups, meta)
