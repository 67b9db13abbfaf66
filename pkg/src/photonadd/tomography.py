"""Iterative maximum-likelihood (R rho R) reconstruction from binned homodyne data.

Each bin's POVM element is area * |v><v| at the bin centre, with
v_{n1 n2} = e^{i(n1 th1 + n2 th2)} psi_n1(x1) psi_n2(x2).  Averaging over a
uniform global LO phase keeps only the total-photon-number blocks of |v><v|,
so the phase-averaged likelihood never needs inter-block elements and the
state is stored and iterated block by block.

Within one phase setting all bins share the phase vector, so both the bin
probabilities and the R operator reduce to real products with the table of
psi_n1(x1) psi_n2(x2) values:

    p_j = area * psi_j^T Re(D^dag rho D) psi_j
    R   = area * D (sum_j w_j psi_j psi_j^T) D^dag

The block-diagonal path evaluates these on each phase group's bin grid through
separable one-mode contractions (see _BlockModel).
"""

from __future__ import annotations

import logging
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import kernels
from .channels import phase_average, total_photon_number
from .fock import DensityOperator, TruncatedSpace
from .homodyne import QuadratureDataset

log = logging.getLogger(__name__)

SUBSPACES = ("block_diagonal", "small")
TILE_ROWS = 4096
LIKELIHOOD_SLACK = 1e-12
PROB_FLOOR = 1e-300
MAX_DILUTIONS = 30


class ReconstructionError(RuntimeError):
    """Likelihood decreased beyond the slack and dilution could not recover."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


# ----------------------------------------------------------------------------
# Binning
# ----------------------------------------------------------------------------

@dataclass
class BinnedHistogram:
    """Per-phase 2-D histograms over (x1, x2) bins of width ``bin_width``.

    Bin (i1, i2) covers [i1 w, (i1 + 1) w) x [i2 w, (i2 + 1) w); only occupied
    bins are stored.
    """

    protocol: str
    bin_width: float
    theta_rel: np.ndarray
    bins: list
    counts: list
    ac_transformed: bool = False

    @property
    def n_groups(self) -> int:
        return len(self.bins)

    @property
    def total(self) -> int:
        return int(sum(int(c.sum()) for c in self.counts))

    def group_totals(self) -> list[int]:
        return [int(c.sum()) for c in self.counts]

    def centers(self, s: int):
        b = self.bins[s]
        return (b[:, 0] + 0.5) * self.bin_width, (b[:, 1] + 0.5) * self.bin_width

    def edges(self, s: int):
        """Bin edges along x1 and x2 spanning the occupied range of group ``s``."""
        b = self.bins[s]
        w = self.bin_width
        return (np.arange(b[:, 0].min(), b[:, 0].max() + 2) * w,
                np.arange(b[:, 1].min(), b[:, 1].max() + 2) * w)


def bin_dataset(ds: QuadratureDataset, bin_width: float = 0.1, x_range=None) -> BinnedHistogram:
    """Histogram every phase group on a grid aligned to 0.

    With ``x_range=(lo, hi)``, shots outside the range are counted in the edge
    bins and a warning is emitted.
    """
    if len(ds) == 0:
        raise ValueError("dataset is empty")
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    thetas, bins, counts = [], [], []
    for k in ds.phase_indices:
        g = ds.group(int(k))
        i1 = np.floor(g.x1 / bin_width).astype(np.int64)
        i2 = np.floor(g.x2 / bin_width).astype(np.int64)
        if x_range is not None:
            lo = int(math.floor(x_range[0] / bin_width))
            hi = int(math.ceil(x_range[1] / bin_width)) - 1
            outside = int(np.sum((i1 < lo) | (i1 > hi) | (i2 < lo) | (i2 > hi)))
            if outside:
                warnings.warn(f"{outside} shots outside {x_range} folded into edge bins", stacklevel=2)
            i1 = np.clip(i1, lo, hi)
            i2 = np.clip(i2, lo, hi)
        pairs, cnt = kernels.bin_counts(i1, i2)
        thetas.append(g.theta_rel[0])
        bins.append(pairs)
        counts.append(cnt)
    return BinnedHistogram(ds.protocol, float(bin_width), np.asarray(thetas), bins, counts, ds.ac_transformed)


# ----------------------------------------------------------------------------
# POVM elements
# ----------------------------------------------------------------------------

def _basis(cutoff: int):
    n = np.arange(cutoff + 1)
    n1 = np.repeat(n, cutoff + 1)
    n2 = np.tile(n, cutoff + 1)
    return n1, n2


def povm_element(bin_index, theta1: float, theta2: float, space: TruncatedSpace,
                 bin_width: float = 0.1, phase_averaged: bool = False) -> np.ndarray:
    """Dense POVM element of one bin (midpoint rule times bin area)."""
    if space.modes != 2:
        raise ValueError("povm_element needs a two-mode space")
    i1, i2 = bin_index
    x1 = (i1 + 0.5) * bin_width
    x2 = (i2 + 0.5) * bin_width
    h1 = kernels.hermite_functions(space.cutoff, np.array([x1]))[0]
    h2 = kernels.hermite_functions(space.cutoff, np.array([x2]))[0]
    n1, n2 = _basis(space.cutoff)
    v = h1[n1] * h2[n2] * np.exp(1j * (n1 * theta1 + n2 * theta2))
    pi = bin_width ** 2 * np.outer(v, v.conj())
    if phase_averaged:
        ntot = n1 + n2
        pi = np.where(ntot[:, None] == ntot[None, :], pi, 0)
    return pi


# ----------------------------------------------------------------------------
# Configuration and result
# ----------------------------------------------------------------------------

@dataclass
class ReconstructionConfig:
    subspace: str = "block_diagonal"
    cutoff: int = 10          # per-mode cutoff of the block-diagonal space
    n_max: int = 2            # per-mode cutoff of the small space
    bin_width: float = 0.1
    max_iterations: int = 5000
    convergence_tol: float = 1e-7
    parallel_chunks: int = 1
    dense: bool = False       # naive full-matrix path, for benchmarking

    def __post_init__(self):
        if self.subspace not in SUBSPACES:
            raise ValueError(f"subspace must be one of {SUBSPACES}, got {self.subspace!r}")
        if not self.bin_width > 0:
            raise ValueError("bin_width must be positive")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be positive")
        if self.max_iterations < 1 or self.parallel_chunks < 1:
            raise ValueError("max_iterations and parallel_chunks must be >= 1")
        if self.cutoff < 1 or self.n_max < 1:
            raise ValueError("cutoffs must be >= 1")

    @property
    def space(self) -> TruncatedSpace:
        return TruncatedSpace(self.cutoff if self.subspace == "block_diagonal" else self.n_max, 2)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> ReconstructionConfig:
        extra = set(d) - set(cls.__dataclass_fields__)
        if extra:
            raise ValueError(f"unknown reconstruction fields: {sorted(extra)}")
        return cls(**d)


@dataclass
class ReconstructionResult:
    rho: DensityOperator
    iterations_used: int
    converged: bool
    final_log_likelihood: float
    likelihood_trace: np.ndarray
    wall_time: float
    config: ReconstructionConfig
    distance_trace: np.ndarray = field(default_factory=lambda: np.zeros(0))
    dilution_steps: int = 0


# ----------------------------------------------------------------------------
# Likelihood model
# ----------------------------------------------------------------------------

class _Model:
    """Full-matrix bin tables for one histogram; the naive reference path."""

    def __init__(self, hist: BinnedHistogram, cutoff: int, phase_averaged: bool):
        self.space = TruncatedSpace(cutoff, 2)
        n1, n2 = _basis(cutoff)
        ntot = n1 + n2
        order = np.arange(n1.size)
        self.blocks = [(0, n1.size)]
        self.mask = (ntot[:, None] == ntot[None, :]) if phase_averaged else None
        self.order = order
        self.n1 = n1[order]
        self.n2 = n2[order]
        self.area = hist.bin_width ** 2
        total = hist.total
        self.psi, self.phase, self.freq, self.counts = [], [], [], []
        for s in range(hist.n_groups):
            x1, x2 = hist.centers(s)
            h1 = kernels.hermite_functions(cutoff, x1)
            h2 = kernels.hermite_functions(cutoff, x2)
            full = h1[:, self.n1] * h2[:, self.n2]
            self.psi.append([np.ascontiguousarray(full[:, a:b]) for a, b in self.blocks])
            # mode 1 at the nominal global phase 0, mode 2 at theta_rel
            self.phase.append(np.exp(1j * self.n2 * hist.theta_rel[s]))
            self.counts.append(hist.counts[s].astype(np.float64))
            self.freq.append(hist.counts[s] / total)
        self.total = total
        self.tiles = [(s, lo, min(lo + TILE_ROWS, len(self.freq[s])))
                      for s in range(hist.n_groups) for lo in range(0, len(self.freq[s]), TILE_ROWS)]

    def _tile(self, tile, rho_blocks, want_r):
        s, lo, hi = tile
        psi = [x[lo:hi] for x in self.psi[s]]
        d = self.phase[s]
        rows = hi - lo
        # one scratch area reused by every block; fresh per-block arrays are
        # large enough to be mmap'd and page-faulted on each call
        scratch = np.empty(rows * max(b - a for a, b in self.blocks))
        p = np.zeros(rows)
        for (a, b), x, rb in zip(self.blocks, psi, rho_blocks):
            db = d[a:b]
            # .real of a complex array is strided; BLAS needs it contiguous
            rot = np.ascontiguousarray((db.conj()[:, None] * rb * db[None, :]).real)
            xr = np.matmul(x, rot, out=scratch[:rows * (b - a)].reshape(rows, b - a))
            p += np.einsum("ij,ij->i", xr, x)
        p *= self.area
        if np.any(p < PROB_FLOOR):
            p = np.maximum(p, PROB_FLOOR)
        if not want_r:
            return p, None
        sw = np.sqrt(self.freq[s][lo:hi] / p)[:, None]
        gram = []
        for x in psi:
            y = np.multiply(x, sw, out=scratch[:x.size].reshape(x.shape))
            gram.append(y.T @ y)  # numpy dispatches A.T @ A to syrk
        return p, gram

    def evaluate(self, rho_blocks, want_r=True, workers=1):
        """Log-likelihood (count weighted) and, optionally, the R operator blocks."""
        fn = lambda t: self._tile(t, rho_blocks, want_r)  # noqa: E731
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                parts = list(ex.map(fn, self.tiles))
        else:
            parts = [fn(t) for t in self.tiles]
        loglik = 0.0
        floored = 0
        for (s, lo, hi), (p, _) in zip(self.tiles, parts):
            floored += int(np.sum(p <= PROB_FLOOR))
            loglik += float(self.counts[s][lo:hi] @ np.log(p))
        if floored:
            warnings.warn(f"{floored} bins with probability below {PROB_FLOOR:g} were floored", stacklevel=3)
        if not want_r:
            return loglik, None
        # fixed-order reduction: tiles in construction order, phase rotation per group
        r_blocks = [np.zeros((b - a, b - a), dtype=np.complex128) for a, b in self.blocks]
        for (s, _, _), (_, gram) in zip(self.tiles, parts):
            d = self.phase[s]
            for k, (a, b) in enumerate(self.blocks):
                db = d[a:b]
                r_blocks[k] += db[:, None] * gram[k] * db.conj()[None, :]
        for k in range(len(r_blocks)):
            r_blocks[k] *= self.area
            if self.mask is not None:
                r_blocks[k] = np.where(self.mask[np.ix_(self.order, self.order)], r_blocks[k], 0)
        return loglik, r_blocks

    def split(self, rho: np.ndarray):
        m = rho[np.ix_(self.order, self.order)]
        return [m[a:b, a:b].copy() for a, b in self.blocks]

    def assemble(self, rho_blocks) -> DensityOperator:
        dim = self.space.dim
        out = np.zeros((dim, dim), dtype=np.complex128)
        for (a, b), rb in zip(self.blocks, rho_blocks):
            idx = self.order[a:b]
            out[np.ix_(idx, idx)] = rb
        return DensityOperator(self.space, out)

    def maximally_mixed(self):
        dim = self.space.dim
        return [np.eye(b - a, dtype=np.complex128) / dim for a, b in self.blocks]


class _BlockModel(_Model):
    """Block-diagonal model evaluated on each phase group's rectangular bin grid.

    Inside block N every element couples (a, N-a) with (b, N-b), so with
    e = b - a and j = N - a the bin probability separates into two small
    contractions:

        B[e, a, x2] = sum_j S[e, a, j] psi_j(x2) psi_{j-e}(x2)
        p(x1, x2)   = sum_{e, a} psi_a(x1) psi_{a+e}(x1) B[e, a, x2]

    with S the phase-rotated real part of rho laid out by (e, a, j).  The R
    operator runs the same two steps in reverse on the grid of weights.  The
    cost scales with the grid size times the cutoff squared rather than with
    the number of bins times the block sizes squared.
    """

    def __init__(self, hist: BinnedHistogram, cutoff: int):
        self.space = TruncatedSpace(cutoff, 2)
        n1, n2 = _basis(cutoff)
        ntot = n1 + n2
        self.order = np.lexsort((n2, ntot))
        sizes = np.bincount(ntot[self.order])
        bounds = np.concatenate([[0], np.cumsum(sizes)])
        self.blocks = [(int(bounds[i]), int(bounds[i + 1])) for i in range(len(sizes))]
        self.mask = None
        self.n1 = n1[self.order]
        self.n2 = n2[self.order]
        self.area = hist.bin_width ** 2
        self.total = hist.total
        d = cutoff + 1
        # every block element, flattened block by block in row-major order
        rows, cols = [], []
        for a, b in self.blocks:
            r, c = np.meshgrid(np.arange(a, b), np.arange(a, b), indexing="ij")
            rows.append(r.ravel())
            cols.append(c.ravel())
        rows, cols = np.concatenate(rows), np.concatenate(cols)
        self.e = self.n1[cols] - self.n1[rows]
        self.slot = ((self.e + cutoff) * d + self.n1[rows]) * d + self.n2[rows]
        self.shape = (2 * cutoff + 1, d, d)
        self.sizes = [(b - a) ** 2 for a, b in self.blocks]
        shift = np.arange(-cutoff, cutoff + 1)
        self.groups = []
        for s in range(hist.n_groups):
            bins = hist.bins[s]
            lo = bins.min(axis=0)
            hi = bins.max(axis=0)
            g1 = kernels.hermite_functions(cutoff, (np.arange(lo[0], hi[0] + 1) + 0.5) * hist.bin_width)
            g2 = kernels.hermite_functions(cutoff, (np.arange(lo[1], hi[1] + 1) + 0.5) * hist.bin_width)
            self.groups.append({
                "theta": float(hist.theta_rel[s]),
                "idx": (bins[:, 0] - lo[0], bins[:, 1] - lo[1]),
                "grid": (g1.shape[0], g2.shape[0]),
                # psi_a(x1) psi_{a+e}(x1), rows ordered (e, a)
                "h1": _shifted_products(g1, -shift).transpose(0, 2, 1).reshape(-1, g1.shape[0]),
                "q2": _shifted_products(g2, shift),
                "counts": hist.counts[s].astype(np.float64),
                "freq": hist.counts[s] / self.total,
            })

    def _group(self, g, flat, want_r):
        s = np.zeros(self.shape)
        s.reshape(-1)[self.slot] = (flat * np.exp(-1j * self.e * g["theta"])).real
        b = np.matmul(s, g["q2"].transpose(0, 2, 1))
        p = (g["h1"].T @ b.reshape(-1, b.shape[-1]))[g["idx"]] * self.area
        if np.any(p < PROB_FLOOR):
            p = np.maximum(p, PROB_FLOOR)
        if not want_r:
            return p, None
        w = np.zeros(g["grid"])
        w[g["idx"]] = g["freq"] / p
        c = (g["h1"] @ w).reshape(self.shape[0], self.shape[1], -1)
        gram = np.matmul(c, g["q2"]).reshape(-1)[self.slot]
        return p, gram * np.exp(1j * self.e * g["theta"])

    def evaluate(self, rho_blocks, want_r=True, workers=1):
        flat = np.concatenate([rb.ravel() for rb in rho_blocks])
        fn = lambda g: self._group(g, flat, want_r)  # noqa: E731
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                parts = list(ex.map(fn, self.groups))
        else:
            parts = [fn(g) for g in self.groups]
        floored = sum(int(np.sum(p <= PROB_FLOOR)) for p, _ in parts)
        if floored:
            warnings.warn(f"{floored} bins with probability below {PROB_FLOOR:g} were floored", stacklevel=3)
        loglik = sum(float(g["counts"] @ np.log(p)) for g, (p, _) in zip(self.groups, parts))
        if not want_r:
            return loglik, None
        # fixed-order reduction over phase groups
        r = np.zeros(self.slot.size, dtype=np.complex128)
        for _, gram in parts:
            r += gram
        r *= self.area
        out, at = [], 0
        for (a, b), size in zip(self.blocks, self.sizes):
            out.append(r[at:at + size].reshape(b - a, b - a))
            at += size
        return loglik, out


def _shifted_products(g: np.ndarray, shift: np.ndarray) -> np.ndarray:
    """T[e, x, j] = psi_j(x) psi_{j-e}(x), zero where j - e falls outside the cutoff."""
    d = g.shape[1]
    j = np.arange(d)
    k = j[None, :] - shift[:, None]
    valid = (k >= 0) & (k < d)
    out = g[:, None, :] * np.where(valid, g[:, np.clip(k, 0, d - 1)], 0.0)
    return np.ascontiguousarray(out.transpose(1, 0, 2))


def _normalize(blocks):
    tr = sum(np.trace(b).real for b in blocks)
    return [0.5 * (b + b.conj().T) / tr for b in blocks]


def _rrr(rho_blocks, r_blocks, dilution=None):
    out = []
    for rb, r in zip(rho_blocks, r_blocks):
        if dilution is not None:
            r = (np.eye(r.shape[0]) + dilution * r) / (1.0 + dilution)
        out.append(r @ rb @ r)
    return _normalize(out)


def _block_distance(a_blocks, b_blocks) -> float:
    return 0.5 * sum(float(np.abs(np.linalg.eigvalsh(0.5 * ((x - y) + (x - y).conj().T))).sum())
                     for x, y in zip(a_blocks, b_blocks))


def _is_phase_averaged(hist: BinnedHistogram, cfg: ReconstructionConfig) -> bool:
    if cfg.subspace == "block_diagonal":
        return True
    return hist.protocol == "phase_averaged"


def mle_reconstruct(hist: BinnedHistogram, cfg: ReconstructionConfig | None = None,
                    initial: DensityOperator | None = None) -> ReconstructionResult:
    """R rho R iteration from the maximally mixed state.

    Stops when the trace distance between successive iterates drops below
    ``cfg.convergence_tol`` or after ``cfg.max_iterations``.  A step that lowers
    the likelihood is retried with diluted steps (I + eps R)/(1 + eps); if no
    dilution helps, ReconstructionError is raised.
    """
    cfg = cfg or ReconstructionConfig()
    if hist.total == 0:
        raise ValueError("histogram is empty")
    if abs(hist.bin_width - cfg.bin_width) > 1e-15:
        hist_note = f"histogram bin width {hist.bin_width} overrides config {cfg.bin_width}"
        log.debug(hist_note)
    start = time.perf_counter()
    averaged = _is_phase_averaged(hist, cfg)
    if cfg.subspace == "block_diagonal" and not cfg.dense:
        model = _BlockModel(hist, cfg.space.cutoff)
    else:
        model = _Model(hist, cfg.space.cutoff, averaged)
    rho = model.split(initial.matrix) if initial is not None else model.maximally_mixed()
    rho = _normalize(rho)
    loglik, r_blocks = model.evaluate(rho, workers=cfg.parallel_chunks)
    trace = [loglik]
    dist_trace = []
    converged = False
    dilutions = 0
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        cand = _rrr(rho, r_blocks)
        cand_ll, cand_r = model.evaluate(cand, workers=cfg.parallel_chunks)
        slack = LIKELIHOOD_SLACK * max(1.0, abs(loglik))
        if cand_ll < loglik - slack:
            eps = 1.0
            for _ in range(MAX_DILUTIONS):
                cand = _rrr(rho, r_blocks, dilution=eps)
                cand_ll, cand_r = model.evaluate(cand, workers=cfg.parallel_chunks)
                dilutions += 1
                if cand_ll >= loglik - slack:
                    break
                eps *= 0.5
            else:
                raise ReconstructionError(
                    f"likelihood decreased at iteration {it}",
                    {"iteration": it, "loglik": loglik, "candidate": cand_ll,
                     "likelihood_trace": np.array(trace)})
        dist = _block_distance(cand, rho)
        rho, loglik, r_blocks = cand, cand_ll, cand_r
        trace.append(loglik)
        dist_trace.append(dist)
        if dist < cfg.convergence_tol:
            converged = True
            break
    out = model.assemble(rho)
    return ReconstructionResult(
        rho=out, iterations_used=it, converged=converged, final_log_likelihood=loglik,
        likelihood_trace=np.array(trace), wall_time=time.perf_counter() - start, config=cfg,
        distance_trace=np.array(dist_trace), dilution_steps=dilutions)


def log_likelihood(rho: DensityOperator, hist: BinnedHistogram) -> float:
    """sum_j counts_j log Tr(Pi_j rho) over occupied bins."""
    averaged = hist.protocol == "phase_averaged"
    model = _Model(hist, rho.space.cutoff, averaged)
    m = phase_average(rho).matrix if averaged else rho.matrix
    ll, _ = model.evaluate(model.split(m), want_r=False)
    return ll


def per_shot_log_likelihood(rho: DensityOperator, ds: QuadratureDataset) -> float:
    """Unbinned sum of log densities at the recorded quadrature values (oracle)."""
    averaged = ds.protocol == "phase_averaged"
    m = phase_average(rho).matrix if averaged else rho.matrix
    n1, n2 = _basis(rho.space.cutoff)
    total = 0.0
    for k in ds.phase_indices:
        g = ds.group(int(k))
        h1 = kernels.hermite_functions(rho.space.cutoff, g.x1)
        h2 = kernels.hermite_functions(rho.space.cutoff, g.x2)
        v = h1[:, n1] * h2[:, n2] * np.exp(1j * n2 * g.theta_rel[0])
        dens = np.einsum("ij,ij->i", v.conj() @ m, v).real
        total += float(np.sum(np.log(np.maximum(dens, PROB_FLOOR))))
    return total


# ----------------------------------------------------------------------------
# ac-tomography
# ----------------------------------------------------------------------------

def ac_transform(ds: QuadratureDataset) -> QuadratureDataset:
    """Subtract the per-phase, per-mode sample means (numerical displacement to the origin)."""
    if ds.protocol != "locked_global":
        raise ValueError("ac_transform needs locked_global data; phase-averaged means carry no displacement")
    x1 = ds.x1.copy()
    x2 = ds.x2.copy()
    means = {}
    for k in ds.phase_indices:
        sel = ds.phase_index == k
        m1 = x1[sel].mean()
        m2 = x2[sel].mean()
        x1[sel] -= m1
        x2[sel] -= m2
        means[int(k)] = [float(m1), float(m2)]
    meta = dict(ds.meta, ac_means=means)
    return replace(ds, x1=x1, x2=x2, meta=meta, ac_transformed=True)


def ac_reconstruct(ds: QuadratureDataset, cfg: ReconstructionConfig | None = None) -> ReconstructionResult:
    """MLE in the fixed n <= n_max (default 2) per-mode space of mean-subtracted data."""
    cfg = cfg or ReconstructionConfig(subspace="small")
    if cfg.subspace != "small":
        raise ValueError(f"ac-tomography needs subspace 'small', config has {cfg.subspace!r}")
    if not ds.ac_transformed:
        raise ValueError("dataset has not been mean-subtracted; run ac_transform first")
    return mle_reconstruct(bin_dataset(ds, cfg.bin_width), cfg)


def reconstruction_cutoff(nbar: float) -> int:
    """Per-mode cutoff for block-diagonal reconstruction: ceil(nbar + 6 sqrt(nbar) + 4)."""
    return int(math.ceil(nbar + 6 * math.sqrt(nbar) + 4 - 1e-12))


def restrict(rho: DensityOperator, cutoff: int) -> DensityOperator:
    """Project a two-mode state onto n1, n2 <= cutoff and renormalize."""
    d = rho.space.dim_mode
    keep = np.arange(cutoff + 1)
    idx = (keep[:, None] * d + keep[None, :]).ravel()
    sub = rho.matrix[np.ix_(idx, idx)]
    return DensityOperator(TruncatedSpace(cutoff, 2), sub / np.trace(sub).real)


def total_photon_blocks(space: TruncatedSpace) -> np.ndarray:
    return total_photon_number(space)
