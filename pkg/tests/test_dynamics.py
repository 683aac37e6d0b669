import numpy as np
import pytest

import _oracles as oracles
from ottokz import (
    BathSpec,
    FixedDuration,
    ToSteadyState,
    energy,
    evolve_dissipative,
    evolve_unitary_ramp,
    ground_state_projector,
    jump_operators,
    liouvillian_matrix,
    liouvillian_rhs,
    steady_state_direct,
    tim_hamiltonian4,
    tim_mode,
    validate_density_matrix,
)
from ottokz.dynamics import DegenerateSteadyStateError


def random_density_matrix(rng):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


MIXED = np.eye(4) / 4.0


def test_bath_spec_rejects_negative_rates():
    with pytest.raises(ValueError):
        BathSpec(1.0, -0.1, 1.0, 0.0)


def test_jump_operators_cascade():
    c_k, c_k_dag, c_mk, c_mk_dag = jump_operators()
    ket = lambda i: np.eye(4)[:, i]
    assert np.allclose(c_k @ ket(1), ket(0))
    assert np.allclose(c_k @ ket(3), ket(2))
    assert np.allclose(c_mk @ ket(2), ket(0))
    assert np.allclose(c_mk @ ket(3), -ket(1))
    assert np.allclose(c_k_dag, c_k.conj().T)
    assert np.allclose(c_mk_dag, c_mk.conj().T)


def test_pairing_term_consistent_with_jump_operators():
    # the |00><11| coupling of the mode Hamiltonian equals c_k^dag c_-k^dag
    c_k, _, c_mk, _ = jump_operators()
    pair = c_k.conj().T @ c_mk.conj().T
    assert pair[3, 0] == 1.0
    h4 = tim_hamiltonian4(2.0, 1.0)
    b = 2 * np.sin(1.0)
    assert np.allclose(h4[0, 3], b)


def test_rhs_balanced_bath_fixes_maximally_mixed():
    h4 = tim_hamiltonian4(3.0, 0.7)
    out = liouvillian_rhs(MIXED, h4, BathSpec.tim(1.0, 1.0))
    assert np.max(np.abs(out)) < 1e-14


def test_rhs_pure_loss_from_doubly_occupied():
    rho = np.zeros((4, 4), complex)
    rho[3, 3] = 1.0
    out = liouvillian_rhs(rho, np.zeros((4, 4)), BathSpec.tim(1.0, 0.0))
    assert out[1, 1].real == pytest.approx(1.0)
    assert out[2, 2].real == pytest.approx(1.0)
    assert out[3, 3].real == pytest.approx(-2.0)


def test_rhs_traceless_and_hermitian():
    rng = np.random.default_rng(3)
    bath = BathSpec(0.3, 1.2, 0.8, 0.1)
    for _ in range(10):
        rho = random_density_matrix(rng)
        h4 = tim_hamiltonian4(rng.uniform(-4, 4), rng.uniform(0.2, 3.0))
        out = liouvillian_rhs(rho, h4, bath)
        assert abs(np.trace(out)) < 1e-14
        assert np.max(np.abs(out - out.conj().T)) < 1e-12


def test_rhs_rejects_non_hermitian_state():
    rho = MIXED.copy().astype(complex)
    rho[0, 1] = 0.3
    with pytest.raises(ValueError):
        liouvillian_rhs(rho, np.zeros((4, 4)), BathSpec.tim(1.0, 0.0))


def test_superoperator_matches_rhs():
    rng = np.random.default_rng(11)
    bath = BathSpec(0.5, 0.9, 1.1, 0.2)
    h4 = tim_hamiltonian4(1.4, 2.0)
    sup = liouvillian_matrix(h4, bath)
    for _ in range(5):
        rho = random_density_matrix(rng)
        direct = liouvillian_rhs(rho, h4, bath)
        assert np.allclose((sup @ rho.reshape(16)).reshape(4, 4), direct, atol=1e-13)


def test_steady_state_balanced_bath_is_maximally_mixed():
    rho = steady_state_direct(tim_hamiltonian4(0.3, 1.1), BathSpec.tim(1.0, 1.0))
    assert np.allclose(rho, MIXED, atol=1e-10)


def test_steady_state_pure_loss_diagonal_hamiltonian():
    # with no pairing term and negative diagonal, |00> is the ground state
    from ottokz import ModeHamiltonian

    h4 = ModeHamiltonian(k=1.0, diag=-6.0, offdiag=0.0).matrix4()
    rho = steady_state_direct(h4, BathSpec.tim(1.0, 0.0))
    expect = np.zeros((4, 4))
    expect[0, 0] = 1.0
    assert np.allclose(rho, expect, atol=1e-10)


def test_steady_state_rate_equation_ratios():
    rho = steady_state_direct(np.zeros((4, 4)), BathSpec.tim(0.5, 1.0))
    p = oracles.two_rate_steady_populations(0.5, 1.0)
    assert np.allclose(np.diag(rho).real, p, atol=1e-12)
    assert rho[1, 1].real / rho[0, 0].real == pytest.approx(2.0, rel=1e-9)


def test_steady_state_energizing_matches_closed_form():
    mu = 0.995
    want = oracles.two_rate_steady_populations(mu, 1.0)
    for k in (0.3, np.pi / 2, 2.8):
        rho = steady_state_direct(tim_hamiltonian4(70.0, k), BathSpec.tim(mu, 1.0))
        assert np.allclose(np.diag(rho).real, want, atol=1e-6)


def test_steady_state_degenerate_detection():
    with pytest.raises(DegenerateSteadyStateError):
        steady_state_direct(tim_hamiltonian4(2.0, 1.0), BathSpec(0.0, 0.0, 0.0, 0.0))


def test_pure_loss_ground_population_large_negative_field():
    # the dark state |00> competes with the pairing term; the worst grid mode
    # at h = -5 retains ~98% ground population (exact solver is the oracle)
    mode = tim_mode(-5.0, np.pi / 2)
    rho = steady_state_direct(mode.matrix4(), BathSpec.tim(1.0, 0.0))
    g = ground_state_projector(mode)
    pop = float(np.trace(g @ rho).real)
    assert pop > 0.97
    # deep in the paramagnetic phase the dark state is essentially the ground state
    mode = tim_mode(-40.0, np.pi / 2)
    rho = steady_state_direct(mode.matrix4(), BathSpec.tim(1.0, 0.0))
    g = ground_state_projector(mode)
    assert float(np.trace(g @ rho).real) > 0.999


def test_evolve_fixed_duration_decays_to_steady_state():
    h4 = tim_hamiltonian4(2.0, 1.3)
    bath = BathSpec.tim(1.0, 0.5)
    target = steady_state_direct(h4, bath)
    rho = evolve_dissipative(MIXED, h4, bath, FixedDuration(30.0))
    assert np.linalg.norm(rho - target) < 1e-8
    validate_density_matrix(rho, tol=1e-10)


def test_evolve_to_steady_state_both_methods_agree():
    rng = np.random.default_rng(21)
    for _ in range(3):
        h4 = tim_hamiltonian4(rng.uniform(-3, 3), rng.uniform(0.3, 2.8))
        bath = BathSpec.tim(rng.uniform(0.5, 1.5), rng.uniform(0.1, 1.0))
        rho0 = random_density_matrix(rng)
        direct = evolve_dissipative(rho0, h4, bath, ToSteadyState(method="direct"))
        evolved = evolve_dissipative(rho0, h4, bath, ToSteadyState(tol=1e-11, method="evolve"))
        assert np.linalg.norm(direct - evolved) < 1e-8


def test_sudden_ramp_is_identity():
    rng = np.random.default_rng(5)
    rho0 = random_density_matrix(rng)
    out = evolve_unitary_ramp(rho0, 1.2, 5.0, -5.0, 1e-9)
    assert np.max(np.abs(out - rho0)) < 1e-6


def test_adiabatic_ramp_tracks_ground_state():
    # gapped path: no critical point between h = 2 and h = 10
    mode0 = tim_mode(2.0, 2.0)
    rho0 = ground_state_projector(mode0)
    out = evolve_unitary_ramp(rho0, 2.0, 2.0, 10.0, 200.0)
    g1 = ground_state_projector(tim_mode(10.0, 2.0))
    fidelity = float(np.trace(out @ g1).real)
    assert fidelity > 0.999


def test_ramp_preserves_spectrum_and_middle_block():
    rng = np.random.default_rng(9)
    rho0 = random_density_matrix(rng)
    out = evolve_unitary_ramp(rho0, 0.9, -5.0, 70.0, 3.0)
    assert np.allclose(
        np.sort(np.linalg.eigvalsh(out)), np.sort(np.linalg.eigvalsh(rho0)), atol=1e-10
    )
    assert out[1, 1] == pytest.approx(rho0[1, 1], abs=1e-12)
    assert out[2, 2] == pytest.approx(rho0[2, 2], abs=1e-12)
    assert out[1, 2] == pytest.approx(rho0[1, 2], abs=1e-12)
    assert abs(np.trace(out).real - 1.0) < 1e-12


def test_ramp_matches_fine_step_oracle():
    # independent RK4 wavefunction integration, ten times smaller step
    k, h0, h1, tau = np.pi / 2, -5.0, 70.0, 100.0
    mode = tim_mode(h0, k)
    rho = evolve_unitary_ramp(ground_state_projector(mode), k, h0, h1, tau)
    _, vecs = np.linalg.eigh(tim_mode(h1, k).matrix4())
    p_exc = float((vecs[:, 3].conj() @ rho @ vecs[:, 3]).real)

    omega = 2 * np.sqrt(71.0**2 + 1.0)
    psi = oracles.rk4_ramp_state(k, h0, h1, tau, dt=0.05 / omega)
    p_oracle = oracles.excitation_probability(psi, h1, k)
    assert p_exc == pytest.approx(p_oracle, abs=1e-6)


def test_ramp_halving_step_is_converged():
    rng = np.random.default_rng(17)
    rho0 = random_density_matrix(rng)
    a = evolve_unitary_ramp(rho0, 2.5, -5.0, 70.0, 50.0, eta=0.5)
    b = evolve_unitary_ramp(rho0, 2.5, -5.0, 70.0, 50.0, eta=0.25)
    assert np.linalg.norm(a - b) < 1e-8


def test_energy_values():
    h4 = tim_hamiltonian4(3.0, 1.0)
    assert energy(MIXED, h4) == pytest.approx(0.0, abs=1e-14)
    mode = tim_mode(3.0, 1.0)
    from ottokz import gap

    assert energy(ground_state_projector(mode), h4) == pytest.approx(-gap(mode), rel=1e-12)
    # diagonal energizing state at strong field
    mu = 0.995
    p = oracles.two_rate_steady_populations(mu, 1.0)
    rho = np.diag(p).astype(complex)
    want = 2 * (70.0 + np.cos(1.0)) * (mu - 1) / (mu + 1)
    assert energy(rho, tim_hamiltonian4(70.0, 1.0)) == pytest.approx(want, rel=1e-12)


def test_validate_density_matrix_rejects_bad_states():
    with pytest.raises(ValueError):
        validate_density_matrix(np.eye(4))  # trace 4
    bad = MIXED.astype(complex).copy()
    bad[0, 1] = 0.2
    with pytest.raises(ValueError):
        validate_density_matrix(bad)
    neg = np.diag([0.6, 0.5, -0.1, 0.0]).astype(complex)
    with pytest.raises(ValueError):
        validate_density_matrix(neg)
