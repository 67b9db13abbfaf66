"""Hot numerical kernels, each in a numba and a pure-numpy flavour.

The public names (``hermite_functions``, ``displacement_matrix``, ...) point at
the numba implementation unless ``PHOTONADD_DISABLE_NUMBA`` is set.  Both
flavours stay importable under ``*_numba`` / ``*_numpy`` so tests and the
benchmark can compare them directly.

The two flavours are written independently (loop recurrences vs. vectorized
numpy/scipy), which makes their agreement a useful cross-check in itself.
"""

import math

import numpy as np
from scipy import special

from ._accel import USE_NUMBA, njit

_PI_QUARTER = math.pi ** -0.25


# ----------------------------------------------------------------------------
# Hermite functions psi_n(x) with vacuum variance 1/2
# ----------------------------------------------------------------------------

@njit
def _hermite_functions_nb(nmax, x):
    out = np.empty((x.shape[0], nmax + 1))
    for i in range(x.shape[0]):
        xi = x[i]
        p_prev = _PI_QUARTER * math.exp(-0.5 * xi * xi)
        out[i, 0] = p_prev
        if nmax == 0:
            continue
        p_cur = math.sqrt(2.0) * xi * p_prev
        out[i, 1] = p_cur
        for n in range(1, nmax):
            p_next = math.sqrt(2.0 / (n + 1)) * xi * p_cur - math.sqrt(n / (n + 1.0)) * p_prev
            out[i, n + 1] = p_next
            p_prev = p_cur
            p_cur = p_next
    return out


def hermite_functions_numba(nmax, x):
    return _hermite_functions_nb(int(nmax), np.ascontiguousarray(x, dtype=np.float64))


def hermite_functions_numpy(nmax, x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty((x.shape[0], nmax + 1))
    out[:, 0] = _PI_QUARTER * np.exp(-0.5 * x * x)
    if nmax >= 1:
        out[:, 1] = np.sqrt(2.0) * x * out[:, 0]
    for n in range(1, nmax):
        out[:, n + 1] = np.sqrt(2.0 / (n + 1)) * x * out[:, n] - np.sqrt(n / (n + 1.0)) * out[:, n - 1]
    return out


# ----------------------------------------------------------------------------
# Displacement operator matrix elements (associated Laguerre closed form)
# ----------------------------------------------------------------------------

@njit
def _displacement_nb(alpha_re, alpha_im, cutoff):
    d = cutoff + 1
    out = np.zeros((d, d), dtype=np.complex128)
    r = math.hypot(alpha_re, alpha_im)
    if r == 0.0:
        for n in range(d):
            out[n, n] = 1.0
        return out
    x = r * r
    arg = math.atan2(alpha_im, alpha_re)
    logr = math.log(r)
    lgam = np.empty(d)
    for n in range(d):
        lgam[n] = math.lgamma(n + 1.0)
    for k in range(d):
        lower_phase = complex(math.cos(k * arg), math.sin(k * arg))
        upper_phase = (-1.0) ** k * lower_phase.conjugate()
        l_prev2 = 0.0
        l_prev = 0.0
        for j in range(d - k):
            # three-term recurrence for L_j^{(k)}(x)
            if j == 0:
                lag = 1.0
            elif j == 1:
                lag = 1.0 + k - x
            else:
                lag = ((2 * j - 1 + k - x) * l_prev - (j - 1 + k) * l_prev2) / j
            l_prev2 = l_prev
            l_prev = lag
            mag = math.exp(0.5 * (lgam[j] - lgam[j + k]) + k * logr - 0.5 * x) * lag
            out[j + k, j] = mag * lower_phase
            if k > 0:
                out[j, j + k] = mag * upper_phase
    return out


def displacement_matrix_numba(alpha, cutoff):
    alpha = complex(alpha)
    return _displacement_nb(alpha.real, alpha.imag, int(cutoff))


def displacement_matrix_numpy(alpha, cutoff):
    alpha = complex(alpha)
    d = int(cutoff) + 1
    if alpha == 0:
        return np.eye(d, dtype=np.complex128)
    m, n = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    lo = np.minimum(m, n)
    k = np.abs(m - n)
    x = abs(alpha) ** 2
    lag = special.eval_genlaguerre(lo, k, x)
    logmag = 0.5 * (special.gammaln(lo + 1) - special.gammaln(lo + k + 1)) + k * np.log(abs(alpha)) - 0.5 * x
    base = np.where(m >= n, alpha / abs(alpha), -np.conj(alpha) / abs(alpha))
    return np.exp(logmag) * lag * base ** k


# ----------------------------------------------------------------------------
# Photon loss on one tensor factor
# ----------------------------------------------------------------------------

def loss_amplitudes(d, eta):
    """Table B[n, k] = sqrt(C(n, k) (1-eta)^k eta^(n-k)) for k <= n < d."""
    n = np.arange(d)[:, None]
    k = np.arange(d)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        w = special.comb(n, k) * (1.0 - eta) ** k * eta ** (n - k)
    w = np.where(k <= n, w, 0.0)
    return np.sqrt(np.nan_to_num(w))


@njit
def _loss_nb(rho, amp):
    d, b1, _, b2 = rho.shape
    out = np.zeros_like(rho)
    for n in range(d):
        for m in range(d):
            kmax = d - 1 - max(n, m)
            for k in range(kmax + 1):
                c = amp[n + k, k] * amp[m + k, k]
                if c == 0.0:
                    continue
                for i in range(b1):
                    for j in range(b2):
                        out[n, i, m, j] += c * rho[n + k, i, m + k, j]
    return out


def apply_loss_numba(rho4, eta):
    """Loss on axes (0, 2) of a (d, b, d, b) operator array."""
    rho4 = np.ascontiguousarray(rho4, dtype=np.complex128)
    return _loss_nb(rho4, loss_amplitudes(rho4.shape[0], eta))


def apply_loss_numpy(rho4, eta):
    rho4 = np.asarray(rho4, dtype=np.complex128)
    d = rho4.shape[0]
    amp = loss_amplitudes(d, eta)
    out = np.zeros_like(rho4)
    for k in range(d):
        a = amp[k:, k]
        out[: d - k, :, : d - k, :] += (a[:, None] * a[None, :])[:, None, :, None] * rho4[k:, :, k:, :]
    return out


# ----------------------------------------------------------------------------
# Histogram binning of (i1, i2) integer pairs
# ----------------------------------------------------------------------------

@njit
def _bin_counts_nb(i1, i2):
    n = i1.shape[0]
    lo1 = i1.min()
    lo2 = i2.min()
    span2 = i2.max() - lo2 + 1
    keys = (i1 - lo1) * span2 + (i2 - lo2)
    keys = np.sort(keys)
    uniq = np.empty(n, dtype=np.int64)
    counts = np.empty(n, dtype=np.int64)
    u = 0
    for j in range(n):
        if j == 0 or keys[j] != keys[j - 1]:
            uniq[u] = keys[j]
            counts[u] = 1
            u += 1
        else:
            counts[u - 1] += 1
    pairs = np.empty((u, 2), dtype=np.int64)
    for j in range(u):
        pairs[j, 0] = uniq[j] // span2 + lo1
        pairs[j, 1] = uniq[j] % span2 + lo2
    return pairs, counts[:u].copy()


def bin_counts_numba(i1, i2):
    return _bin_counts_nb(np.ascontiguousarray(i1, dtype=np.int64), np.ascontiguousarray(i2, dtype=np.int64))


def bin_counts_numpy(i1, i2):
    pairs, counts = np.unique(np.stack([np.asarray(i1, np.int64), np.asarray(i2, np.int64)], axis=1),
                              axis=0, return_counts=True)
    return pairs, counts.astype(np.int64)


# ----------------------------------------------------------------------------
# Per-shot inverse-CDF sampling of a small two-mode state at arbitrary angles
# ----------------------------------------------------------------------------

@njit
def _draw_cell(p, u, x0, h):
    total = 0.0
    for g in range(p.shape[0]):
        if p[g] < 0.0:
            p[g] = 0.0
        total += p[g]
    t = u * total
    acc = 0.0
    for g in range(p.shape[0]):
        nxt = acc + p[g]
        if nxt > t:
            frac = (t - acc) / p[g]
            return g, x0 + (g - 0.5 + frac) * h
        acc = nxt
    g = p.shape[0] - 1
    return g, x0 + (g + 0.5) * h


@njit
def _sample_pairs_nb(rho4, herm, x0, h, th1, th2, u1, u2):
    c = rho4.shape[0]
    n_grid = herm.shape[0]
    n_shots = th1.shape[0]
    rho1 = np.zeros((c, c), dtype=np.complex128)
    for n in range(c):
        for m in range(c):
            for a in range(c):
                rho1[n, m] += rho4[n, a, m, a]
    x1 = np.empty(n_shots)
    x2 = np.empty(n_shots)
    p = np.empty(n_grid)
    coef = np.empty((c, c))
    w = np.empty(c, dtype=np.complex128)
    sigma = np.empty((c, c), dtype=np.complex128)
    for s in range(n_shots):
        for n in range(c):
            for m in range(c):
                ph = -(n - m) * th1[s]
                coef[n, m] = (rho1[n, m] * complex(math.cos(ph), math.sin(ph))).real
        for g in range(n_grid):
            acc = 0.0
            for n in range(c):
                hn = herm[g, n]
                for m in range(c):
                    acc += hn * herm[g, m] * coef[n, m]
            p[g] = acc
        gi, x1[s] = _draw_cell(p, u1[s], x0, h)
        for n in range(c):
            w[n] = herm[gi, n] * complex(math.cos(n * th1[s]), -math.sin(n * th1[s]))
        for a in range(c):
            for b in range(c):
                acc_c = 0.0 + 0.0j
                for n in range(c):
                    for m in range(c):
                        acc_c += w[n] * w[m].conjugate() * rho4[n, a, m, b]
                sigma[a, b] = acc_c
        for a in range(c):
            for b in range(c):
                ph = -(a - b) * th2[s]
                coef[a, b] = (sigma[a, b] * complex(math.cos(ph), math.sin(ph))).real
        for g in range(n_grid):
            acc = 0.0
            for a in range(c):
                ha = herm[g, a]
                for b in range(c):
                    acc += ha * herm[g, b] * coef[a, b]
            p[g] = acc
        _, x2[s] = _draw_cell(p, u2[s], x0, h)
    return x1, x2


def sample_pairs_numba(rho4, herm, x0, h, th1, th2, u1, u2):
    """Draw one (x1, x2) pair per shot from ``rho4`` measured at (th1[s], th2[s]).

    ``herm`` holds the Hermite functions on a uniform grid starting at ``x0``
    with spacing ``h``; cells are centred on grid points.
    """
    f = np.ascontiguousarray
    return _sample_pairs_nb(f(rho4, dtype=np.complex128), f(herm, dtype=np.float64), float(x0), float(h),
                            f(th1, dtype=np.float64), f(th2, dtype=np.float64),
                            f(u1, dtype=np.float64), f(u2, dtype=np.float64))


def draw_from_pdf(p, u, x0, h):
    """Inverse-CDF draws from one piecewise-constant density on cells centred at x0 + g h."""
    p = np.clip(np.asarray(p, dtype=np.float64), 0.0, None)
    cdf = np.cumsum(p)
    t = np.asarray(u) * cdf[-1]
    idx = np.minimum(np.searchsorted(cdf, t, side="right"), p.shape[0] - 1)
    prev = np.where(idx > 0, cdf[np.maximum(idx - 1, 0)], 0.0)
    frac = (t - prev) / p[idx]
    return idx, x0 + (idx - 0.5 + frac) * h


def draw_cells(p, u, x0, h):
    """Row-wise inverse-CDF draws: one density row per draw."""
    p = np.clip(p, 0.0, None)
    cdf = np.cumsum(p, axis=1)
    t = u * cdf[:, -1]
    idx = np.minimum((cdf <= t[:, None]).sum(axis=1), p.shape[1] - 1)
    rows = np.arange(p.shape[0])
    prev = np.where(idx > 0, cdf[rows, np.maximum(idx - 1, 0)], 0.0)
    pi = p[rows, idx]
    frac = np.where(pi > 0, (t - prev) / np.where(pi > 0, pi, 1.0), 1.0)
    return idx, x0 + (idx - 0.5 + frac) * h


def sample_pairs_numpy(rho4, herm, x0, h, th1, th2, u1, u2, chunk=512):
    rho4 = np.asarray(rho4, dtype=np.complex128)
    c = rho4.shape[0]
    rho1 = np.einsum("nama->nm", rho4)
    nidx = np.arange(c)
    diff = nidx[:, None] - nidx[None, :]
    pair_table = (herm[:, :, None] * herm[:, None, :]).reshape(herm.shape[0], c * c)
    th1 = np.asarray(th1, dtype=np.float64)
    th2 = np.asarray(th2, dtype=np.float64)
    x1 = np.empty(th1.shape[0])
    x2 = np.empty(th1.shape[0])
    for lo in range(0, th1.shape[0], chunk):
        sl = slice(lo, lo + chunk)
        t1 = th1[sl]
        coef = (rho1[None] * np.exp(-1j * diff[None] * t1[:, None, None])).real
        p = coef.reshape(-1, c * c) @ pair_table.T
        gi, x1[sl] = draw_cells(p, u1[sl], x0, h)
        w = herm[gi] * np.exp(-1j * nidx[None, :] * t1[:, None])
        sigma = np.einsum("sn,sm,namb->sab", w, w.conj(), rho4)
        coef = (sigma * np.exp(-1j * diff[None] * th2[sl][:, None, None])).real
        p = coef.reshape(-1, c * c) @ pair_table.T
        _, x2[sl] = draw_cells(p, u2[sl], x0, h)
    return x1, x2


if USE_NUMBA:
    hermite_functions = hermite_functions_numba
    displacement_matrix = displacement_matrix_numba
    apply_loss = apply_loss_numba
    bin_counts = bin_counts_numba
    sample_pairs = sample_pairs_numba
else:
    hermite_functions = hermite_functions_numpy
    displacement_matrix = displacement_matrix_numpy
    apply_loss = apply_loss_numpy
    bin_counts = bin_counts_numpy
    sample_pairs = sample_pairs_numpy
