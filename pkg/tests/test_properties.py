import math

import numpy as np
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from photonadd.channels import dephase_global, loss_channel, phase_average, preparation_mixing
from photonadd.entanglement import negativity, partial_transpose
from photonadd.fock import DensityOperator, TruncatedSpace, fidelity, guard_cutoff
from photonadd.homodyne import QuadratureDataset
from photonadd.io import read_dataset, write_dataset
from photonadd.photon_stats import delta_n_distribution, joint_photon_distribution
from photonadd.states import StateRecipe, addition_norm, unnormalized_addition, wrap_phase
from photonadd.tomography import bin_dataset

SETTINGS = settings(max_examples=25, deadline=None)
seeds = st.integers(0, 2 ** 32 - 1)
etas = st.floats(0.01, 1.0)


def random_state(seed, cutoff, rank=None):
    rng = np.random.default_rng(seed)
    s = TruncatedSpace(cutoff, 2)
    k = rank or s.dim
    m = rng.normal(size=(s.dim, k)) + 1j * rng.normal(size=(s.dim, k))
    rho = m @ m.conj().T
    return DensityOperator(s, rho / np.trace(rho).real)


def random_unitary(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def assert_tp_psd(rho, tol=1e-10):
    m = rho.matrix
    assert abs(np.trace(m) - 1) < tol
    assert np.max(np.abs(m - m.conj().T)) < tol
    assert np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0] > -1e-9


@SETTINGS
@given(seeds, st.integers(1, 4), etas, st.sampled_from([0, 1]))
def test_loss_trace_preserving_psd(seed, cutoff, eta, mode):
    assert_tp_psd(loss_channel(random_state(seed, cutoff), eta, mode))


@SETTINGS
@given(seeds, st.integers(1, 4), st.floats(0.0, 3.0))
def test_dephasing_trace_preserving_psd(seed, cutoff, sigma):
    rho = random_state(seed, cutoff)
    assert_tp_psd(dephase_global(rho, sigma))
    assert_tp_psd(phase_average(rho))


@SETTINGS
@given(seeds, st.floats(0.0, 1.5), st.floats(0.0, 1.0))
def test_mixing_trace_preserving_psd(seed, alpha, weight):
    rho = random_state(seed, guard_cutoff(alpha))
    assert_tp_psd(preparation_mixing(rho, alpha, weight=weight))


@SETTINGS
@given(seeds, st.integers(1, 3))
def test_negativity_local_unitary_invariant(seed, cutoff):
    rho = random_state(seed, cutoff, rank=2)
    rng = np.random.default_rng(seed + 1)
    d = cutoff + 1
    u = np.kron(random_unitary(rng, d), random_unitary(rng, d))
    moved = DensityOperator(rho.space, u @ rho.matrix @ u.conj().T)
    assert abs(negativity(moved) - negativity(rho)) < 1e-7


@SETTINGS
@given(seeds, st.integers(1, 3))
def test_partial_transpose_involution_and_trace(seed, cutoff):
    rho = random_state(seed, cutoff)
    pt = partial_transpose(rho)
    assert np.trace(pt) == np.trace(rho.matrix)
    assert np.array_equal(partial_transpose(DensityOperator(rho.space, pt)), rho.matrix)


@SETTINGS
@given(seeds, seeds, st.integers(1, 3))
def test_fidelity_bounds_and_symmetry(s1, s2, cutoff):
    a, b = random_state(s1, cutoff), random_state(s2, cutoff)
    f = fidelity(a, b)
    assert -1e-9 <= f <= 1 + 1e-9
    assert abs(f - fidelity(b, a)) < 1e-7


@SETTINGS
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-10, 10))
def test_addition_norm_formula(re, im, phi):
    alpha = complex(re, im)
    raw = unnormalized_addition(StateRecipe(alpha, phi))
    assert abs(raw.norm() ** 2 - addition_norm(alpha, phi)) < 1e-7
    assert 0 <= wrap_phase(phi) < 2 * math.pi


@SETTINGS
@given(st.floats(0, 10))
def test_guard_formula(r):
    assert guard_cutoff(r) >= r * r + 6 * r + 12


@SETTINGS
@given(seeds, st.integers(1, 4))
def test_delta_n_sums_to_total(seed, cutoff):
    jpd = joint_photon_distribution(random_state(seed, cutoff))
    assert abs(sum(delta_n_distribution(jpd).values()) - jpd.total) < 1e-12


finite = st.floats(-20, 20, allow_nan=False, allow_subnormal=True)


@settings(max_examples=20, deadline=None)
@given(arrays(np.float64, st.integers(1, 40), elements=finite), st.floats(0.01, 1.0))
def test_binning_preserves_total(x, w):
    n = len(x)
    ds = QuadratureDataset("locked_global", 0, np.arange(n), np.arange(n) % 3, np.zeros(n), np.zeros(n),
                           x, x[::-1].copy())
    h = bin_dataset(ds, w)
    assert h.total == n
    assert sum(h.group_totals()) == n


@settings(max_examples=15, deadline=None)
@given(x=arrays(np.float64, st.integers(1, 30), elements=finite), seed=seeds)
def test_dataset_io_bit_exact(x, seed, tmp_path_factory):
    n = len(x)
    ds = QuadratureDataset("phase_averaged", seed, np.arange(n), np.arange(n) % 9, x / 7, x * math.pi,
                           x, -x / 3)
    p = write_dataset(ds, tmp_path_factory.mktemp("io") / "d.csv")
    back = read_dataset(p)
    for col in ("shot_id", "phase_index", "theta_rel", "theta_global", "x1", "x2"):
        assert np.array_equal(getattr(back, col), getattr(ds, col))
