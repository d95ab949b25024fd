import numpy as np
import pytest
import scipy.linalg

from cavity_beats.composite import (
    EliminationCheck,
    annihilation,
    build_hamiltonian,
    build_system,
    evolve_composite,
    excited_vacuum,
    lindblad_rhs,
    reduced_from_composite,
    validate_elimination,
)
from cavity_beats.integrator import IntegratorConfig
from cavity_beats.linalg import commutator, kron, partial_trace_field
from cavity_beats.model import CouplingSet, midpoint_levels


def _tuned_system(omega=1.0, g=0.3, n_max=1):
    levels, cavity = midpoint_levels(omega + 1.0, omega, omega)
    couplings = CouplingSet.uniform(g)
    system = build_system(couplings, levels, cavity, n_max_a=n_max, n_max_b=n_max)
    return system, levels, couplings


def test_annihilation_ladder():
    a = annihilation(2)
    want = np.array([[0, 1, 0], [0, 0, np.sqrt(2)], [0, 0, 0]], dtype=complex)
    assert np.allclose(a, want, atol=1e-15)
    n = a.conj().T @ a
    assert np.allclose(np.diag(n), [0.0, 1.0, 2.0])


def test_hamiltonian_matrix_elements():
    system, levels, couplings = _tuned_system(omega=1.0, g=0.3)
    h = system.hamiltonian
    assert np.max(np.abs(h - h.conj().T)) == 0.0
    # basis index is (atom * 2 + n_a) * 2 + n_b for single-photon truncation
    assert h[6, 0] == -1j * couplings.G_1e   # |1,1,0> <- |e,0,0>
    assert h[10, 0] == -1j * couplings.G_2e  # |2,1,0> <- |e,0,0>
    assert h[13, 4] == -1j * couplings.G_g1  # |g,0,1> <- |1,0,0>
    assert h[13, 8] == -1j * couplings.G_g2  # |g,0,1> <- |2,0,0>
    assert h[0, 0] == levels.omega_eg
    assert h[6, 6] == levels.omega_1g + 2.0  # bare level plus one a photon
    assert h[13, 13] == 1.0                  # one b photon over the ground state


def test_excitation_number_is_conserved_by_h():
    system, _, _ = _tuned_system()
    ia = np.eye(2, dtype=complex)
    n_atom = kron(kron(np.diag([2.0, 1.0, 1.0, 0.0]).astype(complex), ia), ia)
    n_exc = n_atom + system.a_op.conj().T @ system.a_op + system.b_op.conj().T @ system.b_op
    assert np.max(np.abs(commutator(system.hamiltonian, n_exc))) == 0.0


def _liouvillian_matrix(system):
    # row-major vectorization: vec(A rho B) = (A kron B^T) vec(rho)
    d = system.dim
    eye = np.eye(d, dtype=complex)
    h = system.hamiltonian
    out = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for op, kappa in ((system.a_op, system.kappa_a), (system.b_op, system.kappa_b)):
        n = op.conj().T @ op
        out -= kappa * (np.kron(n, eye) + np.kron(eye, n.T) - 2 * np.kron(op, op.conj()))
    return out


def test_lindblad_rhs_matches_liouvillian_matrix():
    system, _, _ = _tuned_system()
    lio = _liouvillian_matrix(system)
    rng = np.random.default_rng(13)
    for _ in range(10):
        rho = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
        got = lindblad_rhs(rho, system)
        want = (lio @ rho.ravel()).reshape(16, 16)
        assert np.max(np.abs(got - want)) < 1e-12


def test_evolution_matches_matrix_exponential():
    system, _, _ = _tuned_system()
    rho0 = excited_vacuum(system)
    t = np.array([0.0, 0.85, 1.7])
    states = evolve_composite(rho0, t, system)
    lio = _liouvillian_matrix(system)
    for i, ti in enumerate(t):
        want = (scipy.linalg.expm(lio * ti) @ rho0.ravel()).reshape(16, 16)
        assert np.max(np.abs(states[i] - want)) < 1e-8


def test_trace_kept_and_excitations_drain():
    system, _, _ = _tuned_system()
    t = np.linspace(0.0, 10.0, 101)
    states = evolve_composite(excited_vacuum(system), t, system)
    traces = np.einsum("nii->n", states)
    assert np.max(np.abs(traces - 1.0)) < 1e-12
    n_exc_atom = kron(
        kron(np.diag([2.0, 1.0, 1.0, 0.0]).astype(complex), np.eye(2)), np.eye(2)
    )
    n_op = (
        n_exc_atom
        + system.a_op.conj().T @ system.a_op
        + system.b_op.conj().T @ system.b_op
    )
    n_mean = np.einsum("nij,ji->n", states, n_op).real
    assert np.all(np.diff(n_mean) < 1e-9)
    assert n_mean[0] == pytest.approx(2.0, abs=1e-12)


def test_single_photon_truncation_is_complete():
    # from the singly excited initial state the two-photon sectors are dark
    sys1, levels, _ = _tuned_system(n_max=1)
    sys2, _, _ = _tuned_system(n_max=2)
    t = np.linspace(0.0, 5.0, 26)
    red1 = reduced_from_composite(evolve_composite(excited_vacuum(sys1), t, sys1), t, sys1, levels)
    red2 = reduced_from_composite(evolve_composite(excited_vacuum(sys2), t, sys2), t, sys2, levels)
    assert np.max(np.abs(red1.states - red2.states)) < 1e-12


def test_reduced_from_composite_applies_rotation():
    system, levels, _ = _tuned_system()
    t = np.array([0.0, 1.3])
    states = evolve_composite(excited_vacuum(system), t, system)
    series = reduced_from_composite(states, t, system, levels)
    atom = partial_trace_field(states[1], system.dims)
    phase = np.exp(1j * (levels.omega_1g - levels.omega_2g) * t[1])
    assert series.states[1][1, 2] == pytest.approx(atom[1, 2] * phase, abs=1e-12)
    # populations are phase-free
    assert series.states[1][0, 0] == pytest.approx(atom[0, 0], abs=1e-12)


@pytest.mark.filterwarnings("ignore:positivity violated")
def test_validate_elimination_shrinks_with_coupling():
    check = validate_elimination(g_values=(0.3, 0.15), samples=101)
    assert check.g_values == (0.3, 0.15)
    assert check.monotone
    assert all(d > 0 for d in check.deviations)
    # deviation scales like g^2: a factor 2 in g buys about a factor 4
    ratio = check.deviations[0] / check.deviations[1]
    assert 2.0 < ratio < 8.0


def test_validate_elimination_input_checks():
    with pytest.raises(ValueError):
        validate_elimination(g_values=(0.2,))
    with pytest.raises(ValueError):
        validate_elimination(g_values=(0.2, -0.1))


def test_elimination_check_monotone_property():
    good = EliminationCheck(g_values=(0.2, 0.1), deviations=(1e-2, 1e-3))
    bad = EliminationCheck(g_values=(0.2, 0.1), deviations=(1e-3, 1e-2))
    assert good.monotone and not bad.monotone
