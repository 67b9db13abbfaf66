"""Shared oracles and cached datasets.

Oracles here are written independently of the package: matrix exponentials,
explicit Kraus sums and factorial formulas.
"""

import math
import time

import numpy as np
import pytest
from scipy.linalg import expm

from photonadd.channels import NoiseModel

FIG3_UPPER_NOISE = NoiseModel.symmetric(0.68)
FIG3_LOWER_NOISE = NoiseModel(0.64, 0.64, math.pi / 100, math.pi / 100, 0.996)


def ladder_oracle(cutoff):
    """a as an explicit loop over sqrt(n) entries."""
    a = np.zeros((cutoff + 1, cutoff + 1))
    for n in range(1, cutoff + 1):
        a[n - 1, n] = math.sqrt(n)
    return a


def expm_displacement(alpha, cutoff, pad=60):
    """exp(alpha a^dag - alpha^* a) in a padded space, cropped to the cutoff."""
    a = ladder_oracle(cutoff + pad).astype(complex)
    d = expm(alpha * a.T - np.conj(alpha) * a)
    return d[: cutoff + 1, : cutoff + 1]


def laguerre_displacement(alpha, cutoff):
    """Matrix elements from the explicit associated-Laguerre sum (factorials)."""
    d = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    x = abs(alpha) ** 2
    for m in range(cutoff + 1):
        for n in range(cutoff + 1):
            k, j = min(m, n), abs(m - n)
            lag = sum((-1) ** i * math.comb(k + j, k - i) * x ** i / math.factorial(i) for i in range(k + 1))
            pref = math.sqrt(math.factorial(k) / math.factorial(k + j)) * math.exp(-x / 2)
            amp = alpha ** j if m >= n else (-np.conj(alpha)) ** j
            d[m, n] = pref * amp * lag
    return d


def kraus_loss_single(rho, eta):
    """Sum_k A_k rho A_k^dag with A_k|n> = sqrt(C(n,k)(1-eta)^k eta^(n-k))|n-k>."""
    d = rho.shape[0]
    out = np.zeros_like(rho)
    for k in range(d):
        a = np.zeros((d, d))
        for n in range(k, d):
            a[n - k, n] = math.sqrt(math.comb(n, k) * (1 - eta) ** k * eta ** (n - k))
        out += a @ rho @ a.T
    return out


def kraus_loss_two_mode(rho, eta1, eta2):
    d = round(math.sqrt(rho.shape[0]))
    out = np.zeros_like(rho)
    ops1, ops2 = [], []
    for eta, ops in ((eta1, ops1), (eta2, ops2)):
        for k in range(d):
            a = np.zeros((d, d))
            for n in range(k, d):
                a[n - k, n] = math.sqrt(math.comb(n, k) * (1 - eta) ** k * eta ** (n - k))
            ops.append(a)
    for a1 in ops1:
        for a2 in ops2:
            k = np.kron(a1, a2)
            out += k @ rho @ k.T
    return out


def pt_negativity_oracle(m):
    """Negativity by explicit index-loop partial transpose and full eigvalsh."""
    dim = m.shape[0]
    d = round(math.sqrt(dim))
    pt = np.zeros_like(m)
    for n1 in range(d):
        for n2 in range(d):
            for m1 in range(d):
                for m2 in range(d):
                    pt[n1 * d + n2, m1 * d + m2] = m[n1 * d + m2, m1 * d + n2]
    ev = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    return float(-ev[ev < 0].sum())


# wall-clock seconds of the expensive session fixtures
TIMINGS: dict[str, float] = {}


@pytest.fixture(scope="session")
def odd_alpha1_phase_averaged():
    """Seeded 9 x 50,000 phase-averaged dataset of the eta=0.68 odd state at alpha=1."""
    from photonadd.homodyne import sample_shots_displaced_frame
    from photonadd.states import StateRecipe

    start = time.perf_counter()
    ds = sample_shots_displaced_frame(StateRecipe(1.0, math.pi), "phase_averaged", 50_000,
                                      FIG3_UPPER_NOISE, seed=1)
    TIMINGS["odd_alpha1_phase_averaged"] = time.perf_counter() - start
    return ds


@pytest.fixture(scope="session")
def odd_alpha1_reconstruction(odd_alpha1_phase_averaged):
    from photonadd.tomography import ReconstructionConfig, bin_dataset, mle_reconstruct, reconstruction_cutoff

    start = time.perf_counter()
    hist = bin_dataset(odd_alpha1_phase_averaged)
    res = mle_reconstruct(hist, ReconstructionConfig(cutoff=reconstruction_cutoff(1)))
    TIMINGS["odd_alpha1_reconstruction"] = time.perf_counter() - start + TIMINGS["odd_alpha1_phase_averaged"]
    return hist, res


@pytest.fixture(scope="session")
def odd_alpha2_reconstruction():
    """Phase-averaged eta=0.68 odd state at alpha=2 (seed 34), reconstructed at cutoff 20."""
    from photonadd.homodyne import sample_shots_displaced_frame
    from photonadd.states import StateRecipe
    from photonadd.tomography import ReconstructionConfig, bin_dataset, mle_reconstruct, reconstruction_cutoff

    ds = sample_shots_displaced_frame(StateRecipe(2.0, math.pi), "phase_averaged", 50_000,
                                      FIG3_UPPER_NOISE, seed=34)
    return mle_reconstruct(bin_dataset(ds), ReconstructionConfig(cutoff=reconstruction_cutoff(4)))


# acceptance criteria register here; one line each is printed after the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
