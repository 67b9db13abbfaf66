"""States produced by delocalized single-photon addition onto two modes.

The central object is (a1^dag + e^{i phi} a2^dag)|alpha>|alpha>, normalized.
It equals the displaced single-photon entangled state plus a separable
|alpha, alpha> component whose weight alpha^*(1 + e^{i phi}) vanishes for the
odd superposition phi = pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fock import (PureKet, TruncatedSpace, check_guard, coherent_ket, displacement_op, fock_ket,
                   guard_cutoff, tensor)

TWO_PI = 2 * math.pi


def wrap_phase(phi: float) -> float:
    """Map a phase onto [0, 2 pi)."""
    w = math.fmod(float(phi), TWO_PI)
    if w < 0:
        w += TWO_PI
    return 0.0 if w >= TWO_PI else w


def unit_phase(phi: float) -> complex:
    """e^{i phi}, exact at multiples of pi/2 so the odd state keeps an exactly null diagonal."""
    q = 2.0 * wrap_phase(phi) / math.pi
    if q == round(q):
        return (1.0, 1j, -1.0, -1j)[int(round(q)) % 4]
    return complex(np.exp(1j * phi))


def addition_norm(alpha: complex, phi: float) -> float:
    """Squared norm of the unnormalized addition state: 2[1 + |alpha|^2 (1 + cos phi)]."""
    return 2.0 * (1.0 + abs(alpha) ** 2 * (1.0 + math.cos(phi)))


@dataclass(frozen=True)
class StateRecipe:
    """Parameters (alpha, phi) of the addition state and the Fock space hosting it.

    ``space`` defaults to the smallest two-mode space passing the truncation
    guard for ``alpha``.
    """

    alpha: complex
    phi: float = math.pi
    space: TruncatedSpace | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "phi", wrap_phase(self.phi))
        space = self.space or TruncatedSpace(guard_cutoff(self.alpha), 2)
        if space.modes != 2:
            space = space.pair()
        check_guard(self.alpha, space.cutoff)
        object.__setattr__(self, "space", space)

    @property
    def nbar(self) -> float:
        """Mean photon number axis value |alpha|^2 (not the state's full per-mode mean)."""
        return abs(self.alpha) ** 2


def _add_photon(ket: PureKet, phi: float) -> PureKet:
    """Apply a1^dag + e^{i phi} a2^dag without normalizing.

    Works elementwise on the (n1, n2) amplitude grid; the truncated a^dag
    drops the top Fock level.  Avoiding a matrix-vector product keeps the two
    terms bitwise symmetric, so the odd state's diagonal cancels exactly.
    """
    d = ket.space.dim_mode
    psi = ket.amplitudes.reshape(d, d)
    root = np.sqrt(np.arange(d, dtype=np.float64))
    out = np.zeros_like(psi)
    out[1:, :] += root[1:, None] * psi[:-1, :]
    out[:, 1:] += unit_phase(phi) * (root[None, 1:] * psi[:, :-1])
    return PureKet(ket.space, out.ravel())


def unnormalized_addition(recipe: StateRecipe) -> PureKet:
    single = recipe.space.single()
    c = coherent_ket(recipe.alpha, single).amplitudes
    # vectorized complex products are not bitwise commutative; symmetrize |alpha, alpha> exactly
    grid = np.outer(c, c)
    grid = 0.5 * (grid + grid.T)
    return _add_photon(PureKet(recipe.space, grid.ravel()), recipe.phi)


def delocalized_addition_state(recipe: StateRecipe) -> PureKet:
    return unnormalized_addition(recipe).normalize()


def odd_state(alpha: complex, space: TruncatedSpace | None = None) -> PureKet:
    """(a1^dag - a2^dag)|alpha, alpha> / sqrt(2)."""
    return delocalized_addition_state(StateRecipe(alpha, math.pi, space))


def even_state(alpha: complex, space: TruncatedSpace | None = None) -> PureKet:
    return delocalized_addition_state(StateRecipe(alpha, 0.0, space))


def _pair_space(alpha, space):
    space = space or TruncatedSpace(guard_cutoff(alpha), 2)
    return space if space.modes == 2 else space.pair()


def single_photon_entangled(phi: float, space: TruncatedSpace) -> PureKet:
    """(|1,0> + e^{i phi}|0,1>) / sqrt(2)."""
    space = _pair_space(0, space)
    amps = fock_ket(space, 1, 0).amplitudes + unit_phase(phi) * fock_ket(space, 0, 1).amplitudes
    return PureKet(space, amps / math.sqrt(2))


def displaced_bell(alpha: complex, phi: float, space: TruncatedSpace | None = None) -> PureKet:
    """D(alpha) x D(alpha) applied to the single-photon entangled state."""
    space = _pair_space(alpha, space)
    d = displacement_op(alpha, space.single())
    bell = single_photon_entangled(phi, space)
    return PureKet(space, np.kron(d, d) @ bell.amplitudes)


def separable_coherent_pair(alpha: complex, space: TruncatedSpace | None = None) -> PureKet:
    space = _pair_space(alpha, space)
    c = coherent_ket(alpha, space.single())
    return tensor(c, c)


def decomposed_addition_state(recipe: StateRecipe) -> PureKet:
    """Same state built as sqrt(2) D x D |bell> + alpha^*(1 + e^{i phi})|alpha, alpha>."""
    bell = displaced_bell(recipe.alpha, recipe.phi, recipe.space)
    sep = separable_coherent_pair(recipe.alpha, recipe.space)
    weight = np.conj(recipe.alpha) * (1 + unit_phase(recipe.phi))
    return PureKet(recipe.space, math.sqrt(2) * bell.amplitudes + weight * sep.amplitudes).normalize()


def general_delocalized_addition(input1: PureKet, input2: PureKet, phi: float) -> PureKet:
    """Normalized (a1^dag + e^{i phi} a2^dag)(input1 x input2) for arbitrary kets."""
    raw = _add_photon(tensor(input1, input2), phi)
    if raw.norm() < 1e-300:
        raise ValueError("photon addition produced the zero vector")
    return raw.normalize()


def addition_core(alpha: complex, phi: float) -> np.ndarray:
    """Amplitudes on {|0,0>, |0,1>, |1,0>, |1,1>} of the undisplaced core.

    The addition state equals D(alpha) x D(alpha) applied to
    (|1,0> + e^{i phi}|0,1> + alpha^*(1 + e^{i phi})|0,0>) / sqrt(N).
    """
    phase = unit_phase(phi)
    core = np.array([np.conj(alpha) * (1 + phase), phase, 1.0, 0.0], dtype=np.complex128)
    return core / math.sqrt(addition_norm(alpha, phi))
