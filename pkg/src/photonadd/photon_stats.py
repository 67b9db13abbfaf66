"""Joint photon-number statistics, photon-number differences and discorrelation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import DensityOperator

NORM_TOL = 1e-6


@dataclass(frozen=True)
class JointPhotonDistribution:
    table: np.ndarray  # P[n1, n2]

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.float64)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ValueError("joint distribution table must be square")
        if np.any(t < -1e-12):
            raise ValueError("joint distribution has negative entries")
        object.__setattr__(self, "table", np.clip(t, 0.0, None))

    @property
    def cutoff(self) -> int:
        return self.table.shape[0] - 1

    @property
    def total(self) -> float:
        return float(self.table.sum())

    def diagonal(self) -> np.ndarray:
        return np.diag(self.table).copy()

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.total - 1.0) <= tol

    def marginal(self, mode: int) -> np.ndarray:
        return self.table.sum(axis=1 - mode)


def joint_photon_distribution(rho: DensityOperator) -> JointPhotonDistribution:
    """P(n1, n2) = <n1, n2|rho|n1, n2>."""
    if rho.space.modes != 2:
        raise ValueError("joint photon distribution needs a two-mode state")
    d = rho.space.dim_mode
    return JointPhotonDistribution(np.real(np.diag(rho.matrix)).reshape(d, d))


def delta_n_distribution(jpd: JointPhotonDistribution) -> dict[int, float]:
    """P(dn) for dn = n1 - n2, keyed from -cutoff to +cutoff."""
    t = jpd.table
    c = jpd.cutoff
    # diagonal k of t holds entries with n2 - n1 = k
    return {-k: float(np.trace(t, offset=k)) for k in range(c, -c - 1, -1)}


def discorrelation_score(jpd: JointPhotonDistribution) -> float:
    """1 - P(dn=0) / max(P(dn=+1), P(dn=-1)).

    Equals 1 for a null diagonal and is <= 0 when dn = 0 is not a local
    minimum.  This scalar is a derived summary, not a measured quantity.
    """
    if np.count_nonzero(jpd.table > 0) <= 1:
        raise ValueError("degenerate photon-number distribution (all mass at one point)")
    dn = delta_n_distribution(jpd)
    side = max(dn.get(1, 0.0), dn.get(-1, 0.0))
    if side <= 0:
        raise ValueError("P(dn = +-1) vanishes; discorrelation score undefined")
    return 1.0 - dn[0] / side
