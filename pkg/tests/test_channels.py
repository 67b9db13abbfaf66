import math

import numpy as np
import pytest

from conftest import FIG3_LOWER_NOISE, FIG3_UPPER_NOISE, kraus_loss_single, kraus_loss_two_mode, pt_negativity_oracle
from photonadd.channels import (NoiseModel, apply_full_noise, dephase_global, dephase_state_phase,
                                displace_core, displaced_frame_core, gaussian_phase_grid, loss_channel,
                                mixing_weight, phase_average, preparation_mixing, total_photon_number)
from photonadd.entanglement import negativity
from photonadd.fock import (DensityOperator, TruncatedSpace, coherent_ket, displacement_op, fidelity, fock_ket,
                            guard_cutoff)
from photonadd.states import StateRecipe, delocalized_addition_state, odd_state

PI = math.pi


def assert_valid(rho, tol=1e-10):
    assert abs(rho.trace() - 1) < tol
    m = rho.matrix
    assert np.max(np.abs(m - m.conj().T)) < 1e-10
    assert np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0] > -1e-8


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(eta_mode1=0.0)
    with pytest.raises(ValueError):
        NoiseModel(visibility=1.2)
    with pytest.raises(ValueError):
        NoiseModel(sigma_phi=-0.1)
    with pytest.raises(ValueError):
        NoiseModel(mixing_weight=1.5)
    n = NoiseModel(0.5, 0.6, 0.01, 0.02, 0.9)
    assert NoiseModel.from_dict(n.to_dict()) == n
    with pytest.raises(ValueError):
        NoiseModel.from_dict({"eta": 0.5})
    assert NoiseModel().is_identity and not n.is_identity


def test_loss_identity_at_unit_eta():
    rho = odd_state(1.0).dm()
    assert np.array_equal(loss_channel(rho, 1.0, 0).matrix, rho.matrix)


def test_loss_single_photon():
    s = TruncatedSpace(3)
    out = loss_channel(fock_ket(s, 1).dm(), 0.3)
    assert np.allclose(out.matrix, np.diag([0.7, 0.3, 0, 0]), atol=1e-15)


def test_loss_coherent_shrinks():
    s = TruncatedSpace(31)
    out = loss_channel(coherent_ket(2.0 + 1.0j, s).dm(), 0.6)
    assert fidelity(coherent_ket(math.sqrt(0.6) * (2.0 + 1.0j), s), out) >= 1 - 1e-8


def test_loss_matches_kraus_oracle_single():
    rng = np.random.default_rng(5)
    m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    m = m @ m.conj().T
    m /= np.trace(m)
    out = loss_channel(DensityOperator(TruncatedSpace(7), m), 0.37)
    assert np.allclose(out.matrix, kraus_loss_single(m, 0.37), atol=1e-14)


def test_loss_matches_kraus_oracle_two_mode():
    rho = apply_full_noise(StateRecipe(0.4, 2.0, TruncatedSpace(15, 2)), NoiseModel())
    out = loss_channel(loss_channel(rho, 0.6, 0), 0.8, 1)
    assert np.allclose(out.matrix, kraus_loss_two_mode(rho.matrix, 0.6, 0.8), atol=1e-13)


def test_loss_rejects_bad_eta():
    rho = fock_ket(TruncatedSpace(2), 1).dm()
    with pytest.raises(ValueError):
        loss_channel(rho, 1.5)
    with pytest.raises(ValueError):
        loss_channel(rho, 0.5, mode=1)


def test_loss_commutes_with_displacement():
    for alpha in (0.5, 1.0 + 0.5j, 2.0):
        s = TruncatedSpace(guard_cutoff(alpha), 2)
        core = odd_state(0.0, s).dm()
        d = displacement_op(alpha, s.single())
        dd = np.kron(d, d)
        displaced = DensityOperator(s, dd @ core.matrix @ dd.conj().T)
        lhs = loss_channel(loss_channel(displaced, 0.6, 0), 0.6, 1)
        ds = displacement_op(math.sqrt(0.6) * alpha, s.single())
        dds = np.kron(ds, ds)
        lossy_core = loss_channel(loss_channel(core, 0.6, 0), 0.6, 1)
        rhs = DensityOperator(s, dds @ lossy_core.matrix @ dds.conj().T)
        assert fidelity(lhs, rhs) >= 1 - 1e-7


def test_phase_grid():
    off, w = gaussian_phase_grid(0.1)
    assert len(off) == 41 and w.sum() == pytest.approx(1.0)
    assert off[-1] == pytest.approx(0.6)
    with pytest.raises(ValueError):
        gaussian_phase_grid(0.1, 10)
    with pytest.raises(ValueError):
        gaussian_phase_grid(0.1, 9)


def test_state_phase_dephasing():
    r = StateRecipe(2.0, PI)
    pure = delocalized_addition_state(r).dm()
    assert np.allclose(dephase_state_phase(r, 0.0).matrix, pure.matrix)
    noisy = dephase_state_phase(r, PI / 100)
    assert abs(noisy.trace() - 1) < 1e-10
    assert negativity(noisy) < negativity(pure)


def test_global_dephasing():
    rho = odd_state(1.0).dm()
    assert np.array_equal(dephase_global(rho, 0.0).matrix, rho.matrix)
    strong = dephase_global(rho, 10.0)
    ntot = total_photon_number(rho.space)
    off = ntot[:, None] != ntot[None, :]
    assert np.max(np.abs(strong.matrix[off])) < 1e-8
    a = dephase_global(rho, PI / 100, method="analytic")
    g = dephase_global(rho, PI / 100, method="grid")
    assert np.max(np.abs(a.matrix - g.matrix)) < 1e-6
    with pytest.raises(ValueError):
        dephase_global(rho, 0.1, method="nope")


def test_phase_average_zeroes_off_blocks():
    rho = phase_average(odd_state(1.0).dm())
    ntot = total_photon_number(rho.space)
    assert not np.any(rho.matrix[ntot[:, None] != ntot[None, :]])
    assert_valid(rho)


def test_mixing_weight():
    assert mixing_weight(0.0, 1.0) == 0.0
    assert mixing_weight(0.0, 0.996) == pytest.approx(0.002, abs=1e-12)
    ws = [mixing_weight(math.sqrt(n), 0.996) for n in range(10)]
    assert all(b > a for a, b in zip(ws, ws[1:]))
    with pytest.raises(ValueError):
        mixing_weight(1.0, 0.0)


def test_preparation_mixing():
    rho = odd_state(1.0).dm()
    assert np.array_equal(preparation_mixing(rho, 1.0, 1.0).matrix, rho.matrix)
    mixed = preparation_mixing(rho, 1.0, 0.9)
    assert_valid(mixed)
    with pytest.raises(ValueError):
        preparation_mixing(rho, 1.0, weight=2.0)


def test_full_noise_identity_is_pure():
    r = StateRecipe(1.0, 0.5)
    rho = apply_full_noise(r, NoiseModel())
    assert fidelity(delocalized_addition_state(r), rho) == pytest.approx(1.0, abs=1e-12)


def test_full_noise_valid_and_trace_preserving():
    rho = apply_full_noise(StateRecipe(1.5, PI), FIG3_LOWER_NOISE)
    assert_valid(rho)


def test_fig3_upper_model_matches_brute_force():
    r = StateRecipe(1.0, PI)
    model = apply_full_noise(r, FIG3_UPPER_NOISE)
    brute = kraus_loss_two_mode(delocalized_addition_state(r).dm().matrix, 0.68, 0.68)
    assert negativity(model) == pytest.approx(pt_negativity_oracle(brute), abs=1e-9)


def test_fig3_lower_model_decreasing():
    from photonadd.entanglement import npt_at

    vals = [npt_at(StateRecipe(math.sqrt(n), PI), FIG3_LOWER_NOISE) for n in (1, 4, 9, 16)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_displaced_core_rebuilds_full_model():
    r = StateRecipe(1.2 + 0.3j, PI)
    noise = NoiseModel(0.7, 0.8, 0.05, 0.0, 0.98)
    dc = displaced_frame_core(r, noise)
    full = displace_core(dc, r.space.cutoff)
    assert fidelity(full, apply_full_noise(r, noise)) >= 1 - 1e-9
    assert dc.core.space.cutoff == 1


def test_odd_negativity_flat_under_loss():
    vals = [negativity(apply_full_noise(StateRecipe(a, PI), NoiseModel.symmetric(0.6))) for a in (0, 1, 2)]
    assert max(vals) - min(vals) < 1e-4
