"""Partial transpose, negativity and negativity-vs-amplitude sweeps.

Negativity here is the sum of |negative eigenvalues| of the partial transpose,
i.e. (||rho^T2||_1 - 1)/2, which is 1/2 for the single-photon entangled state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import (NoiseModel, apply_full_noise, dephase_global, displace_core,
                       displaced_frame_core, phase_average, total_photon_number)
from .fock import DensityOperator, TruncatedSpace, guard_cutoff
from .states import StateRecipe

NPT_CONVENTION = "sum of |negative eigenvalues| of the partial transpose"
_CLAMP = 1e-9


def partial_transpose(rho: DensityOperator, mode: int = 1) -> np.ndarray:
    """Transpose on mode ``mode``: <n1,n2|rho^T2|m1,m2> = <n1,m2|rho|m1,n2>."""
    if rho.space.modes != 2:
        raise ValueError("partial transpose needs a two-mode operator")
    t = rho.as_tensor()
    if mode == 1:
        pt = t.transpose(0, 3, 2, 1)
    elif mode == 0:
        pt = t.transpose(2, 1, 0, 3)
    else:
        raise ValueError(f"mode index must be 0 or 1, got {mode!r}")
    return np.ascontiguousarray(pt).reshape(rho.space.dim, rho.space.dim)


def _is_block_diagonal(rho: DensityOperator) -> bool:
    ntot = total_photon_number(rho.space)
    off = ntot[:, None] != ntot[None, :]
    return not np.any(rho.matrix[off])


def partial_transpose_spectrum(rho: DensityOperator) -> np.ndarray:
    """Eigenvalues of the partial transpose (mode 1), ascending.

    States with exact total-photon-number block structure have a partial
    transpose that is block diagonal in n1 - n2; those blocks are
    diagonalized separately.
    """
    pt = partial_transpose(rho, 1)
    pt = 0.5 * (pt + pt.conj().T)
    if not _is_block_diagonal(rho):
        return np.linalg.eigvalsh(pt)
    n = np.arange(rho.space.dim_mode)
    diff = (n[:, None] - n[None, :]).ravel()
    parts = []
    for delta in np.unique(diff):
        idx = np.flatnonzero(diff == delta)
        parts.append(np.linalg.eigvalsh(pt[np.ix_(idx, idx)]))
    return np.sort(np.concatenate(parts))


def negativity(rho: DensityOperator, herm_tol: float = 1e-8) -> float:
    if rho.space.modes != 2:
        raise ValueError("negativity needs a two-mode density operator")
    m = rho.matrix
    dev = np.max(np.abs(m - m.conj().T))
    if dev > herm_tol:
        raise ValueError(f"density operator is not Hermitian (max deviation {dev:.3g})")
    ev = partial_transpose_spectrum(rho)
    neg = float(-ev[ev < 0].sum())
    return 0.0 if neg < _CLAMP else neg


def lossy_bell_negativity(eta: float) -> float:
    """Closed form for the single-photon entangled state after symmetric loss eta.

    The negative eigenvalue lives on span{|0,0>, |1,1>} of the partial
    transpose: [sqrt((1-eta)^2 + eta^2) - (1-eta)] / 2.
    """
    return 0.5 * (math.sqrt((1 - eta) ** 2 + eta ** 2) - (1 - eta))


@dataclass(frozen=True)
class NptSweepRow:
    nbar: float
    phi: float
    npt: float
    noise_tag: str


def noise_tag(noise: NoiseModel | None, phase_averaged: bool = False) -> str:
    base = "ideal" if noise is None or noise.is_identity else noise.tag()
    return base + (";phase-averaged" if phase_averaged else "")


def npt_at(recipe: StateRecipe, noise: NoiseModel | None = None, *, phase_averaged: bool = False,
           method: str = "auto", cutoff: int | None = None) -> float:
    """Negativity of the noisy addition state.

    ``method``:
      * ``"core"``   - negativity of the undisplaced core (exact when no global
        phase noise acts, by local-unitary invariance);
      * ``"full"``   - displace the lossy core into a full Fock space, then apply
        global phase noise or averaging;
      * ``"direct"`` - build everything in the recipe's Fock space;
      * ``"auto"``   - ``core`` when allowed, ``full`` otherwise.
    """
    noise = noise or NoiseModel()
    global_noise = phase_averaged or noise.sigma_global > 0
    if method == "auto":
        method = "full" if global_noise else "core"
    if method == "core":
        if global_noise:
            raise ValueError("core method cannot represent global phase noise")
        return negativity(displaced_frame_core(recipe, noise).core)
    if method == "full":
        dc = displaced_frame_core(recipe, noise)
        c = cutoff or guard_cutoff(max(abs(dc.beta1), abs(dc.beta2)))
        rho = displace_core(dc, c)
    elif method == "direct":
        if cutoff is not None:
            recipe = StateRecipe(recipe.alpha, recipe.phi, TruncatedSpace(cutoff, 2))
        rho = apply_full_noise(recipe, NoiseModel(noise.eta_mode1, noise.eta_mode2, noise.sigma_phi, 0.0,
                                                  noise.visibility, noise.mixing_weight))
    else:
        raise ValueError(f"unknown method {method!r}")
    rho = phase_average(rho) if phase_averaged else dephase_global(rho, noise.sigma_global)
    return negativity(rho)


def npt_sweep(phi: float, alpha_list, noise: NoiseModel | None = None, *, phase_averaged: bool = False,
              method: str = "auto", cutoff: int | None = None) -> list[NptSweepRow]:
    """Negativity over a list of coherent amplitudes, sorted by nbar = |alpha|^2."""
    alphas = sorted((complex(a) for a in alpha_list), key=abs)
    if not alphas:
        raise ValueError("alpha_list is empty")
    tag = noise_tag(noise, phase_averaged)
    rows = []
    for a in alphas:
        recipe = StateRecipe(a, phi, TruncatedSpace(max(cutoff or 1, guard_cutoff(a)), 2))
        npt = npt_at(recipe, noise, phase_averaged=phase_averaged, method=method, cutoff=cutoff)
        rows.append(NptSweepRow(abs(a) ** 2, recipe.phi, npt, tag))
    return rows
