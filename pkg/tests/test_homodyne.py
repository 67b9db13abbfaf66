import math
import time

import numpy as np
import pytest
from scipy import stats

from conftest import FIG3_LOWER_NOISE
from photonadd.channels import NoiseModel
from photonadd.fock import TruncatedSpace, coherent_ket, fock_ket, tensor
from photonadd.homodyne import (GridError, QuadratureDataset, default_grid, joint_quadrature_pdf,
                                quadrature_wavefunction, relative_phases, sample_shots,
                                sample_shots_displaced_frame)
from photonadd.states import StateRecipe

PI = math.pi


def moments(pdf, grid):
    h = grid[1] - grid[0]
    w = pdf * h * h
    m1 = (w.sum(axis=1) @ grid, w.sum(axis=0) @ grid)
    v1 = w.sum(axis=1) @ (grid - m1[0]) ** 2
    v2 = w.sum(axis=0) @ (grid - m1[1]) ** 2
    return w.sum(), m1, (v1, v2)


def test_relative_phases():
    t = relative_phases()
    assert len(t) == 9 and t[0] == 0.0 and t[-1] == PI
    assert np.allclose(np.diff(t), PI / 8)


def test_wavefunction_values():
    assert quadrature_wavefunction(0, 0.0) == pytest.approx(0.7511255444649425, abs=1e-15)
    assert quadrature_wavefunction(1, 0.0) == 0.0
    x = np.linspace(-10, 10, 2001)
    for n in (0, 3, 12):
        assert np.sum(quadrature_wavefunction(n, x) ** 2) * (x[1] - x[0]) == pytest.approx(1.0, abs=1e-10)


def test_vacuum_pdf():
    s = TruncatedSpace(12, 2)
    rho = fock_ket(s, 0, 0).dm()
    grid = default_grid(rho)
    pdf = joint_quadrature_pdf(rho, 0.3, 1.1, grid)
    mass, mean, var = moments(pdf, grid)
    assert mass == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(var, 0.5, atol=1e-9)
    g = np.exp(-grid ** 2) / math.sqrt(PI)
    assert np.allclose(pdf, np.outer(g, g), atol=1e-12)


def test_coherent_mean():
    s = TruncatedSpace(28)
    rho = tensor(coherent_ket(2.0, s), fock_ket(s, 0)).dm()
    grid = default_grid(rho)
    _, mean, var = moments(joint_quadrature_pdf(rho, 0.0, 0.0, grid), grid)
    assert mean[0] == pytest.approx(2 * math.sqrt(2), abs=1e-8)
    assert mean[1] == pytest.approx(0.0, abs=1e-10)
    assert var[0] == pytest.approx(0.5, abs=1e-8)
    # rotating the LO by pi/2 moves the mean to the other quadrature
    _, mean, _ = moments(joint_quadrature_pdf(rho, PI / 2, 0.0, grid), grid)
    assert mean[0] == pytest.approx(0.0, abs=1e-8)


def test_single_photon_variance():
    s = TruncatedSpace(12)
    rho = tensor(fock_ket(s, 1), fock_ket(s, 0)).dm()
    grid = default_grid(rho)
    _, _, var = moments(joint_quadrature_pdf(rho, 0.7, 0.0, grid), grid)
    assert var[0] == pytest.approx(1.5, abs=1e-9)


def test_grid_too_narrow():
    s = TruncatedSpace(28)
    rho = tensor(coherent_ket(2.0, s), fock_ket(s, 0)).dm()
    with pytest.raises(GridError):
        joint_quadrature_pdf(rho, 0.0, 0.0, np.linspace(-2, 2, 201))


def test_vacuum_sampling_statistics():
    ds = sample_shots(StateRecipe(0.0, 0.0), "locked_global", 4000, seed=9, n_phases=3)
    assert ds.counts_per_phase() == {0: 4000, 1: 4000, 2: 4000}
    g = ds.group(2)
    # alpha = 0, phi = 0 is a single delocalized photon: each mode is (|0><0| + |1><1|)/2, variance 1
    assert np.var(g.x1) == pytest.approx(1.0, abs=0.06)
    assert np.mean(g.x1) == pytest.approx(0.0, abs=0.05)


def test_sampling_deterministic_and_seeded():
    r = StateRecipe(0.5, PI)
    a = sample_shots(r, "phase_averaged", 500, NoiseModel.symmetric(0.8), seed=5, n_phases=2)
    b = sample_shots(r, "phase_averaged", 500, NoiseModel.symmetric(0.8), seed=5, n_phases=2)
    c = sample_shots(r, "phase_averaged", 500, NoiseModel.symmetric(0.8), seed=6, n_phases=2)
    for col in ("x1", "x2", "theta_global"):
        assert np.array_equal(getattr(a, col), getattr(b, col))
    assert not np.array_equal(a.x1, c.x1)
    assert a.meta["convention"] == "vac-var-0.5"


def test_dataset_schema():
    ds = sample_shots(StateRecipe(0.0), "locked_global", 10, seed=0, n_phases=2)
    assert len(ds) == 20 and list(ds.shot_id) == list(range(20))
    assert ds.phase_of(1) == PI
    assert len(list(ds.shots())) == 20
    with pytest.raises(ValueError):
        QuadratureDataset("nope", 0, *[np.zeros(1)] * 6)
    with pytest.raises(ValueError):
        sample_shots(StateRecipe(0.0), "locked", 10)
    with pytest.raises(ValueError):
        sample_shots(StateRecipe(0.0), "locked_global", 0)


def test_samplers_agree_at_alpha0():
    r = StateRecipe(0.0, PI)
    noise = NoiseModel.symmetric(0.68)
    a = sample_shots(r, "phase_averaged", 3000, noise, seed=2, n_phases=2)
    b = sample_shots_displaced_frame(r, "phase_averaged", 3000, noise, seed=12, n_phases=2)
    for k in (0, 1):
        for col in ("x1", "x2"):
            p = stats.ks_2samp(getattr(a.group(k), col), getattr(b.group(k), col)).pvalue
            assert p > 1e-3


def test_samplers_agree_at_alpha2():
    r = StateRecipe(2.0, PI)
    noise = NoiseModel.symmetric(0.68)
    a = sample_shots(r, "locked_global", 6000, noise, seed=2, n_phases=1)
    b = sample_shots_displaced_frame(r, "locked_global", 6000, noise, seed=3, n_phases=1)
    for col in ("x1", "x2"):
        x, y = getattr(a, col), getattr(b, col)
        # mean sqrt(2 eta) alpha, variance ~1 per mode
        assert np.mean(x) == pytest.approx(2 * math.sqrt(2 * 0.68), abs=0.05)
        assert np.mean(y) == pytest.approx(np.mean(x), abs=0.05)
        assert np.var(y) == pytest.approx(np.var(x), rel=0.08)
        assert stats.ks_2samp(x, y).pvalue > 1e-3


@pytest.mark.parametrize("alpha", [0.0, 2.0])
def test_odd_state_correlations_sign_definite(alpha):
    # for the odd state the sum x1 + x2 carries the reduced variance at theta_rel = 0
    r = StateRecipe(alpha, PI)
    sampler = sample_shots if alpha == 0.0 else sample_shots_displaced_frame
    ds = sampler(r, "locked_global", 50_000, seed=21, n_phases=1)
    cov = np.cov(ds.x1, ds.x2)
    assert cov[0, 1] < 0
    assert np.var(ds.x1 + ds.x2) < cov[0, 0] + cov[1, 1]
    assert np.var(ds.x1 - ds.x2) > cov[0, 0] + cov[1, 1]


def test_displaced_sampler_macroscopic_mean_and_cost():
    r0 = StateRecipe(0.0, PI)
    rbig = StateRecipe(7.75, PI)
    t0 = time.perf_counter()
    sample_shots_displaced_frame(r0, "locked_global", 20_000, FIG3_LOWER_NOISE, seed=1, n_phases=2)
    t_small = time.perf_counter() - t0
    t0 = time.perf_counter()
    ds = sample_shots_displaced_frame(rbig, "locked_global", 20_000, FIG3_LOWER_NOISE, seed=1, n_phases=2)
    t_big = time.perf_counter() - t0
    assert t_big < 3 * t_small + 1.0
    assert np.mean(ds.x1) == pytest.approx(7.75 * math.sqrt(2 * 0.64), abs=0.05)
    assert ds.meta["sampler"] == "displaced_frame"
