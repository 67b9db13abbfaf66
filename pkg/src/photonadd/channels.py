"""Noise channels turning the ideal addition state into the detected one.

Composition used throughout: state-phase dephasing -> preparation mixing ->
per-mode loss -> global (LO) phase dephasing.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .fock import DensityOperator, TruncatedSpace, displacement_op
from .states import StateRecipe, addition_core, delocalized_addition_state, separable_coherent_pair

DEFAULT_PHASE_POINTS = 41
# +-6 sigma; a +-4 sigma window biases the averaged second moment by ~1e-3
PHASE_SUPPORT_SIGMAS = 6.0


@dataclass(frozen=True)
class NoiseModel:
    eta_mode1: float = 1.0
    eta_mode2: float = 1.0
    sigma_phi: float = 0.0
    sigma_global: float = 0.0
    visibility: float = 1.0
    mixing_weight: float | None = None  # overrides the visibility-derived weight

    def __post_init__(self):
        for name in ("eta_mode1", "eta_mode2", "visibility"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {v!r}")
        for name in ("sigma_phi", "sigma_global"):
            v = getattr(self, name)
            if not v >= 0.0:
                raise ValueError(f"{name} must be >= 0, got {v!r}")
        if self.mixing_weight is not None and not 0.0 <= self.mixing_weight <= 1.0:
            raise ValueError(f"mixing_weight must lie in [0, 1], got {self.mixing_weight!r}")

    @classmethod
    def symmetric(cls, eta=1.0, sigma=0.0, visibility=1.0) -> NoiseModel:
        return cls(eta, eta, sigma, sigma, visibility)

    @property
    def is_identity(self) -> bool:
        return (self.eta_mode1 == 1 and self.eta_mode2 == 1 and self.sigma_phi == 0
                and self.sigma_global == 0 and self.visibility == 1 and not self.mixing_weight)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> NoiseModel:
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        extra = set(d) - set(known)
        if extra:
            raise ValueError(f"unknown noise fields: {sorted(extra)}")
        return cls(**known)

    def tag(self) -> str:
        parts = [f"eta={self.eta_mode1:g}/{self.eta_mode2:g}"]
        if self.sigma_phi or self.sigma_global:
            parts.append(f"sphi={self.sigma_phi:.4g},sglob={self.sigma_global:.4g}")
        if self.visibility < 1 or self.mixing_weight:
            parts.append(f"V={self.visibility:g}" if self.mixing_weight is None else f"p={self.mixing_weight:g}")
        return ";".join(parts)


def total_photon_number(space: TruncatedSpace) -> np.ndarray:
    n = np.arange(space.dim_mode)
    if space.modes == 1:
        return n
    return (n[:, None] + n[None, :]).ravel()


def loss_channel(rho: DensityOperator, eta: float, mode: int = 0) -> DensityOperator:
    """Pure-loss channel with transmission ``eta`` on mode ``mode`` (0 or 1)."""
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta!r}")
    if eta == 1.0:
        return DensityOperator(rho.space, rho.matrix.copy())
    d = rho.space.dim_mode
    if rho.space.modes == 1:
        if mode != 0:
            raise ValueError("single-mode state has only mode 0")
        out = kernels.apply_loss(rho.matrix.reshape(d, 1, d, 1), eta)
    elif mode == 0:
        out = kernels.apply_loss(rho.as_tensor(), eta)
    elif mode == 1:
        t = rho.as_tensor().transpose(1, 0, 3, 2)
        out = kernels.apply_loss(t, eta).transpose(1, 0, 3, 2)
    else:
        raise ValueError(f"mode index must be 0 or 1, got {mode!r}")
    return DensityOperator(rho.space, np.ascontiguousarray(out).reshape(rho.space.dim, rho.space.dim))


def gaussian_phase_grid(sigma: float, grid_points: int = DEFAULT_PHASE_POINTS,
                        support: float = PHASE_SUPPORT_SIGMAS):
    """Offsets and normalized Simpson x Gaussian weights on [-support*sigma, support*sigma]."""
    if grid_points < 11 or grid_points % 2 == 0:
        raise ValueError(f"grid_points must be odd and >= 11, got {grid_points!r}")
    if sigma == 0:
        return np.zeros(1), np.ones(1)
    offsets = np.linspace(-support * sigma, support * sigma, grid_points)
    simpson = np.ones(grid_points)
    simpson[1:-1:2] = 4.0
    simpson[2:-1:2] = 2.0
    w = simpson * np.exp(-0.5 * (offsets / sigma) ** 2)
    return offsets, w / w.sum()


def dephase_state_phase(recipe: StateRecipe, sigma_phi: float,
                        grid_points: int = DEFAULT_PHASE_POINTS) -> DensityOperator:
    """Gaussian mixture over the superposition phase around ``recipe.phi``."""
    if sigma_phi < 0:
        raise ValueError("sigma_phi must be >= 0")
    offsets, weights = gaussian_phase_grid(sigma_phi, grid_points)
    kets = np.stack([
        delocalized_addition_state(StateRecipe(recipe.alpha, recipe.phi + o, recipe.space)).amplitudes
        for o in offsets], axis=1)
    return DensityOperator(recipe.space, (kets * weights) @ kets.conj().T)


def dephase_global(rho: DensityOperator, sigma_global: float,
                   grid_points: int = DEFAULT_PHASE_POINTS, method: str = "analytic") -> DensityOperator:
    """Average over a common random phase exp(i theta (n1 + n2)), theta ~ N(0, sigma^2).

    ``method="analytic"`` multiplies block coherences by exp(-sigma^2 (N-M)^2 / 2);
    ``method="grid"`` does the explicit Simpson average (cross-check).
    """
    if sigma_global < 0:
        raise ValueError("sigma_global must be >= 0")
    if sigma_global == 0:
        return DensityOperator(rho.space, rho.matrix.copy())
    ntot = total_photon_number(rho.space)
    delta = ntot[:, None] - ntot[None, :]
    if method == "analytic":
        factor = np.exp(-0.5 * sigma_global ** 2 * delta ** 2)
    elif method == "grid":
        offsets, weights = gaussian_phase_grid(sigma_global, grid_points)
        factor = np.tensordot(weights, np.exp(1j * offsets[:, None, None] * delta[None]), axes=1)
    else:
        raise ValueError(f"unknown method {method!r}")
    return DensityOperator(rho.space, rho.matrix * factor)


def phase_average(rho: DensityOperator) -> DensityOperator:
    """Uniform average over the global phase: keep only total-photon-number blocks."""
    ntot = total_photon_number(rho.space)
    return DensityOperator(rho.space, np.where(ntot[:, None] == ntot[None, :], rho.matrix, 0))


def mixing_weight(alpha: complex, visibility: float) -> float:
    """Weight of the separable |alpha, alpha> admixture for a given interferometer visibility.

    False heralds leak through the dark port with relative rate
    eps = (1 - V)/(1 + V), scaled by the even-state heralding rate 1 + 2|alpha|^2.
    """
    if not 0.0 < visibility <= 1.0:
        raise ValueError(f"visibility must lie in (0, 1], got {visibility!r}")
    eps = (1.0 - visibility) / (1.0 + visibility)
    x = eps * (1.0 + 2.0 * abs(alpha) ** 2)
    return x / (1.0 + x)


def preparation_mixing(ideal: DensityOperator, alpha: complex, visibility: float = 1.0,
                       weight: float | None = None) -> DensityOperator:
    """(1 - p) ideal + p |alpha, alpha><alpha, alpha|."""
    p = mixing_weight(alpha, visibility) if weight is None else float(weight)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mixing weight must lie in [0, 1], got {p!r}")
    if p == 0.0:
        return DensityOperator(ideal.space, ideal.matrix.copy())
    sep = separable_coherent_pair(alpha, ideal.space).amplitudes
    return DensityOperator(ideal.space, (1 - p) * ideal.matrix + p * np.outer(sep, sep.conj()))


def apply_full_noise(recipe: StateRecipe, noise: NoiseModel,
                     grid_points: int = DEFAULT_PHASE_POINTS) -> DensityOperator:
    rho = dephase_state_phase(recipe, noise.sigma_phi, grid_points)
    rho = preparation_mixing(rho, recipe.alpha, noise.visibility, noise.mixing_weight)
    rho = loss_channel(rho, noise.eta_mode1, 0)
    rho = loss_channel(rho, noise.eta_mode2, 1)
    return dephase_global(rho, noise.sigma_global, grid_points)


@dataclass
class DisplacedCore:
    """Detected state written as D(beta1) x D(beta2) core D^dag x D^dag.

    Holds everything of the noise model except the global phase dephasing,
    which rotates the displacement and so cannot live in the core.
    """

    core: DensityOperator
    beta1: complex
    beta2: complex


def displaced_frame_core(recipe: StateRecipe, noise: NoiseModel | None = None,
                         core_cutoff: int = 1, grid_points: int = DEFAULT_PHASE_POINTS) -> DisplacedCore:
    """Small-space representation of the noisy state, independent of |alpha|.

    Loss commutes with displacement up to the amplitude rescaling
    alpha -> sqrt(eta) alpha, so loss is applied to the core directly.
    """
    noise = noise or NoiseModel()
    space = TruncatedSpace(core_cutoff, 2)
    d = space.dim_mode

    def embed(small):
        full = np.zeros((d, d), dtype=np.complex128)
        full[:2, :2] = small.reshape(2, 2)
        return full.ravel()

    offsets, weights = gaussian_phase_grid(noise.sigma_phi, grid_points)
    kets = np.stack([embed(addition_core(recipe.alpha, recipe.phi + o)) for o in offsets], axis=1)
    core = (kets * weights) @ kets.conj().T
    p = mixing_weight(recipe.alpha, noise.visibility) if noise.mixing_weight is None else noise.mixing_weight
    if p:
        vac = np.zeros(space.dim)
        vac[0] = 1.0
        core = (1 - p) * core + p * np.outer(vac, vac)
    rho = DensityOperator(space, core)
    rho = loss_channel(rho, noise.eta_mode1, 0)
    rho = loss_channel(rho, noise.eta_mode2, 1)
    return DisplacedCore(rho, math.sqrt(noise.eta_mode1) * recipe.alpha, math.sqrt(noise.eta_mode2) * recipe.alpha)


def displace_core(dc: DisplacedCore, cutoff: int) -> DensityOperator:
    """Rebuild the full two-mode state from a displaced core in a larger space."""
    space = TruncatedSpace(cutoff, 2)
    c = dc.core.space.dim_mode
    d1 = displacement_op(dc.beta1, space.single())[:, :c]
    d2 = displacement_op(dc.beta2, space.single())[:, :c]
    u = np.kron(d1, d2)
    return DensityOperator(space, u @ dc.core.matrix @ u.conj().T)
