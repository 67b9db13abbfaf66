"""Truncated Fock-space linear algebra for one or two bosonic modes.

Two-mode objects use row-major (n1, n2) ordering: basis index ``n1 * d + n2``
with ``d = cutoff + 1``.  Operators are plain complex ndarrays; states carry
their space so dimension mismatches are caught early.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-9
PSD_TOL = 1e-8


class TruncationError(ValueError):
    """A coherent amplitude is too large for the Fock cutoff."""


class SpaceMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class TruncatedSpace:
    cutoff: int
    modes: int = 1

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 1:
            raise ValueError(f"cutoff must be an integer >= 1, got {self.cutoff!r}")
        if self.modes not in (1, 2):
            raise ValueError(f"modes must be 1 or 2, got {self.modes!r}")

    @property
    def dim_mode(self) -> int:
        return self.cutoff + 1

    @property
    def dim(self) -> int:
        return self.dim_mode ** self.modes

    def single(self) -> TruncatedSpace:
        return TruncatedSpace(self.cutoff, 1)

    def pair(self) -> TruncatedSpace:
        return TruncatedSpace(self.cutoff, 2)

    def index(self, n1: int, n2: int | None = None) -> int:
        if self.modes == 1:
            return n1
        return n1 * self.dim_mode + n2


def guard_cutoff(alpha: complex) -> int:
    """Smallest cutoff passing the truncation guard |a|^2 + 6|a| + 12 <= cutoff."""
    r = abs(alpha)
    return int(math.ceil(r * r + 6 * r + 12 - 1e-12))


def check_guard(alpha: complex, cutoff: int) -> None:
    r = abs(alpha)
    if r * r + 6 * r + 12 > cutoff + 1e-12:
        raise TruncationError(
            f"|alpha|={r:.4g} needs cutoff >= {guard_cutoff(alpha)} (got {cutoff})")


@dataclass
class PureKet:
    space: TruncatedSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (self.space.dim,):
            raise SpaceMismatchError(
                f"amplitudes of shape {self.amplitudes.shape} do not fit {self.space}")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> PureKet:
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return PureKet(self.space, self.amplitudes / nrm)

    def dm(self) -> DensityOperator:
        return DensityOperator(self.space, np.outer(self.amplitudes, self.amplitudes.conj()))

    def expect(self, op: np.ndarray) -> complex:
        return complex(self.amplitudes.conj() @ (op @ self.amplitudes))


@dataclass
class DensityOperator:
    space: TruncatedSpace
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.complex128)
        if self.matrix.shape != (self.space.dim, self.space.dim):
            raise SpaceMismatchError(
                f"matrix of shape {self.matrix.shape} does not fit {self.space}")

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def expect(self, op: np.ndarray) -> complex:
        return complex(np.trace(self.matrix @ op))

    def normalized(self) -> DensityOperator:
        return DensityOperator(self.space, self.matrix / self.trace().real)

    def as_tensor(self) -> np.ndarray:
        """Two-mode matrix as a (d, d, d, d) array indexed [n1, n2, m1, m2]."""
        d = self.space.dim_mode
        if self.space.modes != 2:
            raise ValueError("as_tensor needs a two-mode operator")
        return self.matrix.reshape(d, d, d, d)

    def validate(self, *, herm_tol=HERMITIAN_TOL, trace_tol=TRACE_TOL, psd_tol=PSD_TOL) -> None:
        """Raise ValueError unless Hermitian, unit trace and PSD to tolerance."""
        m = self.matrix
        herm = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if herm > herm_tol:
            raise ValueError(f"not Hermitian (max deviation {herm:.3g})")
        tr = self.trace()
        if abs(tr - 1) > trace_tol:
            raise ValueError(f"trace {tr:.12g} is not 1")
        lo = np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]
        if lo < -psd_tol:
            raise ValueError(f"negative eigenvalue {lo:.3g}")


def _require_single(space: TruncatedSpace) -> None:
    if space.modes != 1:
        raise ValueError("operator is defined on a single-mode space")


def creation_op(space: TruncatedSpace) -> np.ndarray:
    _require_single(space)
    return np.diag(np.sqrt(np.arange(1, space.dim_mode)), -1).astype(np.complex128)


def annihilation_op(space: TruncatedSpace) -> np.ndarray:
    _require_single(space)
    return np.diag(np.sqrt(np.arange(1, space.dim_mode)), 1).astype(np.complex128)


def number_op(space: TruncatedSpace) -> np.ndarray:
    _require_single(space)
    return np.diag(np.arange(space.dim_mode)).astype(np.complex128)


def fock_ket(space: TruncatedSpace, n1: int, n2: int | None = None) -> PureKet:
    amps = np.zeros(space.dim, dtype=np.complex128)
    amps[space.index(n1, n2)] = 1.0
    return PureKet(space, amps)


def coherent_ket(alpha: complex, space: TruncatedSpace) -> PureKet:
    """Coherent state truncated at the cutoff and renormalized."""
    _require_single(space)
    check_guard(alpha, space.cutoff)
    alpha = complex(alpha)
    n = np.arange(space.dim_mode)
    if alpha == 0:
        amps = (n == 0).astype(np.complex128)
    else:
        # log-space magnitude avoids overflow of alpha**n / sqrt(n!)
        logmag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * np.array(
            [math.lgamma(k + 1) for k in n])
        amps = np.exp(logmag) * np.exp(1j * n * np.angle(alpha))
    return PureKet(space, amps).normalize()


def displacement_op(alpha: complex, space: TruncatedSpace) -> np.ndarray:
    """Truncated D(alpha) from the closed-form Laguerre matrix elements.

    The truncated matrix is unitary only on the low-photon subspace the guard
    protects; columns near the cutoff leak weight out of the retained space.
    """
    _require_single(space)
    check_guard(alpha, space.cutoff)
    return kernels.displacement_matrix(alpha, space.cutoff)


def _payload(x):
    if isinstance(x, (PureKet, DensityOperator)):
        return x.space, (x.amplitudes if isinstance(x, PureKet) else x.matrix)
    return None, np.asarray(x)


def tensor(a, b):
    """Kronecker product of two single-mode objects in (n1, n2) order.

    Accepts PureKet, DensityOperator or raw ndarrays; returns the same kind.
    """
    sa, xa = _payload(a)
    sb, xb = _payload(b)
    if xa.shape != xb.shape:
        raise SpaceMismatchError(f"cutoff mismatch: {xa.shape} vs {xb.shape}")
    for s in (sa, sb):
        if s is not None and s.modes != 1:
            raise ValueError("tensor expects single-mode factors")
    out = np.kron(xa, xb)
    space = (sa or sb)
    if space is None:
        return out
    pair = space.pair()
    if isinstance(a, PureKet) and isinstance(b, PureKet):
        return PureKet(pair, out)
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        return DensityOperator(pair, out)
    return out


def partial_trace(rho: DensityOperator, keep: int) -> DensityOperator:
    """Reduced state of mode ``keep`` (0 or 1)."""
    if rho.space.modes != 2:
        raise ValueError("partial_trace needs a two-mode density operator")
    t = rho.as_tensor()
    if keep == 0:
        red = np.einsum("ajbj->ab", t)
    elif keep == 1:
        red = np.einsum("jajb->ab", t)
    else:
        raise ValueError(f"mode index must be 0 or 1, got {keep!r}")
    return DensityOperator(rho.space.single(), red)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def fidelity(a, b) -> float:
    """|<a|b>|^2 for kets, <a|rho|a> for mixed pairs, Uhlmann fidelity otherwise."""
    if a.space != b.space:
        raise SpaceMismatchError(f"{a.space} vs {b.space}")
    if isinstance(a, PureKet) and isinstance(b, PureKet):
        f = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    elif isinstance(a, PureKet):
        f = b.expect(np.outer(a.amplitudes, a.amplitudes.conj())).real
    elif isinstance(b, PureKet):
        f = a.expect(np.outer(b.amplitudes, b.amplitudes.conj())).real
    else:
        sa = _psd_sqrt(a.matrix)
        inner = sa @ b.matrix @ sa
        ev = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
        f = float(np.sum(np.sqrt(np.clip(ev, 0, None)))) ** 2
    return float(min(max(f, 0.0), 1.0))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    diff = a - b
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))

