"""
Tests for quantum scenarios, network behaviors and steered states.
"""

import numpy as np
import pytest

from netnl.core.exceptions import DimensionError, PreconditionError, UndefinedConditionalError
from netnl.services import linalg, quantum
from netnl.services.behaviors import PartyDescriptor, condition_on_b, correlator, expectation, outcome_weights
from netnl.services.classical import chsh


@pytest.mark.unit
class TestIngredients:

    def test_pauli_z(self):
        assert np.allclose(quantum.pauli('z').matrix, np.diag([1, -1]))

    def test_unknown_pauli_axis(self):
        with pytest.raises(PreconditionError):
            quantum.pauli('w')

    def test_bell_states(self):
        assert np.allclose(quantum.bell_state(0, 0).ravel(), np.array([1, 0, 0, 1]) / np.sqrt(2))
        assert np.allclose(quantum.bell_state(0, 1).ravel(), np.array([0, 1, 1, 0]) / np.sqrt(2))
        assert np.allclose(quantum.bell_state(1, 0).ravel(), np.array([1, 0, 0, -1]) / np.sqrt(2))
        assert np.allclose(quantum.bell_state(1, 1).ravel(), np.array([0, 1, -1, 0]) / np.sqrt(2))

    def test_bell_states_orthonormal(self):
        basis = np.hstack([quantum.bell_state(b >> 1, b & 1) for b in range(4)])
        assert linalg.max_norm(basis.conj().T @ basis - np.eye(4)) < 1e-12

    def test_bsm_povm(self):
        povm = quantum.bsm_povm()
        assert linalg.max_norm(sum(povm.effects) - np.eye(4)) < 1e-12
        assert np.allclose(povm.effects[0], quantum.bell_projector(0))
        for i in range(4):
            for j in range(i + 1, 4):
                assert linalg.max_norm(povm.effects[i] @ povm.effects[j]) < 1e-12

    def test_observable_to_povm(self):
        povm = quantum.observable_to_povm(quantum.pauli('z'))
        assert np.allclose(povm.effects[0], np.diag([1, 0]))
        assert np.allclose(povm.effects[1], np.diag([0, 1]))

    def test_observable_to_povm_rank_one(self):
        a0, _ = quantum.reference_observables()
        povm = quantum.observable_to_povm(a0)
        assert linalg.max_norm(povm.effects[0] + povm.effects[1] - np.eye(2)) < 1e-12
        for effect in povm.effects:
            assert np.allclose(np.sort(linalg.hermitian_eigen(effect).eigenvalues), [0.0, 1.0])

    def test_non_dichotomic_observable(self):
        with pytest.raises(PreconditionError):
            quantum.observable_to_povm(np.diag([1.0, -1.0]) + 0.1 * np.eye(2))

    def test_incomplete_povm(self):
        with pytest.raises(PreconditionError):
            quantum.Povm((np.diag([1.0, 0.0]), np.diag([0.0, 0.5])))

    def test_density_matrix_rejects_negative(self):
        with pytest.raises(PreconditionError):
            quantum.DensityMatrix(np.diag([1.5, -0.5]))

    def test_joint_povm_requires_commuting(self):
        with pytest.raises(PreconditionError):
            quantum.joint_povm(quantum.pauli('z'), quantum.pauli('x'))

    def test_reference_observables_anticommute(self):
        a0, a1 = quantum.reference_observables()
        assert linalg.max_norm(linalg.anticommutator(a0.matrix, a1.matrix)) < 1e-12


@pytest.mark.unit
class TestScenarioValidation:

    def test_wrong_state_dimension(self):
        with pytest.raises(DimensionError):
            quantum._bilocality_scenario(
                (quantum.observable_to_povm(quantum.pauli('z')),), (quantum.bsm_povm(),),
                (quantum.observable_to_povm(quantum.pauli('z')),),
                quantum.DensityMatrix.maximally_mixed(2), quantum.phi_plus(),
            )

    def test_product_eigenstate_is_deterministic(self):
        zero = quantum.DensityMatrix(np.diag([1.0, 0.0, 0.0, 0.0]))
        z = quantum.observable_to_povm(quantum.pauli('z'))
        zz = quantum.Povm(tuple(np.kron(z.effects[a], z.effects[b]) for a in range(2) for b in range(2)))
        s = quantum._bilocality_scenario((z,), (zz,), (z,), zero, zero)
        p = quantum.network_behavior(s)
        assert abs(p.table[0, 0, 0, 0, 0, 0] - 1.0) < 1e-12


@pytest.mark.integration
class TestReferenceExperiment:

    def test_bob_marginal_uniform(self, reference_behavior):
        assert np.max(np.abs(outcome_weights(reference_behavior, 0) - 0.25)) <= 1e-12

    def test_conditional_correlator_table(self, reference_behavior):
        for b in range(4):
            b1, b2 = b >> 1, b & 1
            conditional = condition_on_b(reference_behavior, 0, b).behavior
            for x in range(2):
                assert abs(expectation(conditional, 'A', x)) <= 1e-12
                assert abs(expectation(conditional, 'C', x)) <= 1e-12
                for z in range(2):
                    if x == z:
                        expected = (-1) ** b1 if b1 == b2 else 0
                    else:
                        expected = (-1) ** b1 if b1 == 1 - b2 else 0
                    assert abs(correlator(conditional, x, z) - expected) <= 1e-12

    def test_steered_states(self, reference_scenario):
        weight, state = quantum.steered_state(reference_scenario, 0)
        assert abs(weight - 0.25) < 1e-12
        assert linalg.max_norm(state.matrix - quantum.bell_projector(0)) < 1e-12
        weight, state = quantum.steered_state(reference_scenario, 3)
        assert abs(weight - 0.25) < 1e-12
        assert linalg.max_norm(state.matrix - quantum.bell_projector(3)) < 1e-12

    def test_steered_probabilities_match_marginal(self, reference_scenario, reference_behavior):
        weights = outcome_weights(reference_behavior, 0)
        for b in range(4):
            assert abs(quantum.steered_state(reference_scenario, b)[0] - weights[b]) < 1e-12

    def test_mixture_identity(self, reference_scenario, swap_scenario):
        assert quantum.mixture_defect(reference_scenario) <= 1e-12
        assert quantum.mixture_defect(swap_scenario) <= 1e-12

    def test_source_marginal(self, reference_scenario):
        rho_a = quantum.source_marginal(reference_scenario, 'S_AB', 'A')
        assert np.allclose(rho_a.matrix, np.eye(2) / 2)
        with pytest.raises(DimensionError):
            quantum.source_marginal(reference_scenario, 'S_AB', 'C')

    def test_behavior_is_normalized(self, reference_behavior):
        sums = reference_behavior.table.sum(axis=(3, 4, 5))
        assert np.max(np.abs(sums - 1.0)) <= 1e-10


@pytest.mark.integration
class TestSwapEventReady:

    def test_uniform_bob_marginal(self, swap_behavior):
        assert np.max(np.abs(outcome_weights(swap_behavior, 0) - 0.25)) <= 1e-12

    def test_conditional_chsh_is_tsirelson(self, swap_behavior):
        for b in range(4):
            conditional = condition_on_b(swap_behavior, 0, b).behavior
            assert abs(chsh(conditional) - 2 * np.sqrt(2)) <= 1e-9

    def test_unconditioned_correlators_vanish(self, swap_behavior):
        for x in range(2):
            for z in range(2):
                assert abs(correlator(swap_behavior, x, z)) <= 1e-12


@pytest.mark.unit
class TestSteeringEdgeCases:

    def test_zero_probability_outcome(self):
        zero = quantum.DensityMatrix(np.diag([1.0, 0.0, 0.0, 0.0]))
        z = quantum.observable_to_povm(quantum.pauli('z'))
        s = quantum._bilocality_scenario((z,), (quantum.bsm_povm(),), (z,), zero, zero)
        with pytest.raises(UndefinedConditionalError):
            quantum.steered_state(s, 1)

    def test_trivial_bob_effect_gives_product(self):
        trivial = quantum.Povm(tuple(np.eye(4) / 4 for _ in range(4)))
        z = quantum.observable_to_povm(quantum.pauli('z'))
        s = quantum._bilocality_scenario((z,), (trivial,), (z,), quantum.phi_plus(), quantum.phi_plus())
        _, state = quantum.steered_state(s, 2)
        assert linalg.max_norm(state.matrix - np.eye(4) / 4) < 1e-12

    def test_source_noise(self, reference_scenario):
        noisy = quantum.with_source_noise(reference_scenario, 1.0)
        p = quantum.network_behavior(noisy)
        assert np.allclose(p.table, 1.0 / 16)

    def test_junk_augmented_behavior_matches_reference(self, reference_behavior):
        junk = quantum.network_behavior(quantum.junk_augmented_experiment())
        assert junk.max_difference(reference_behavior) < 1e-12
