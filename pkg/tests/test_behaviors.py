"""
Tests for network behaviors: validation, marginals, conditioning,
correlators and the JSON document format.
"""

import json

import numpy as np
import pytest

from netnl.core.constants import FORMAT_VERSION
from netnl.core.exceptions import (
    BehaviorValidationError,
    ContractError,
    DimensionError,
    DocumentFormatError,
    NoSignalingViolationError,
    UndefinedConditionalError,
)
from netnl.services.behaviors import (
    NetworkBehavior,
    PartyDescriptor,
    behavior_frame,
    condition_on_b,
    conditional_correlators,
    correlator,
    deserialize,
    deterministic_behavior,
    fix_inputs,
    from_document,
    marginal,
    mix,
    outcome_weights,
    serialize,
    to_document,
    uniform_behavior,
    validate_behavior,
)
from tests.helpers import pr_box


def b1_sign(b):
    return (-1) ** (b >> 1)


@pytest.mark.unit
class TestConstruction:

    def test_shape_mismatch(self, chsh_parties):
        with pytest.raises(DimensionError):
            NetworkBehavior(chsh_parties, np.zeros((2, 2, 2)))

    def test_duplicate_names(self):
        parties = (PartyDescriptor('A', 1, 2), PartyDescriptor('A', 1, 2))
        with pytest.raises(DimensionError):
            NetworkBehavior(parties, np.full((1, 1, 2, 2), 0.25))

    def test_empty_party(self):
        with pytest.raises(DimensionError):
            PartyDescriptor('A', 0, 2)

    def test_non_finite_entry(self, chsh_parties):
        table = np.full((2, 2, 2, 2), 0.25)
        table[0, 0, 0, 0] = np.nan
        with pytest.raises(BehaviorValidationError):
            NetworkBehavior(chsh_parties, table)

    def test_table_is_read_only(self, reference_behavior):
        with pytest.raises(ValueError):
            reference_behavior.table[0, 0, 0, 0, 0, 0] = 1.0

    def test_unknown_party(self, reference_behavior):
        with pytest.raises(ContractError):
            reference_behavior.index_of('D')

    def test_max_difference_shape_mismatch(self, reference_behavior, chsh_parties):
        with pytest.raises(DimensionError):
            reference_behavior.max_difference(uniform_behavior(chsh_parties))


@pytest.mark.unit
class TestValidation:

    def test_quantum_behaviors_are_valid(self, reference_behavior, swap_behavior):
        validate_behavior(reference_behavior)
        validate_behavior(swap_behavior)

    def test_negative_entry(self, chsh_parties):
        table = np.full((2, 2, 2, 2), 0.25)
        table[0, 1, 0, 0] = -0.01
        table[0, 1, 0, 1] = 0.26
        with pytest.raises(BehaviorValidationError) as excinfo:
            validate_behavior(NetworkBehavior(chsh_parties, table))
        assert excinfo.value.location == "entry (0, 1, 0, 0)"

    def test_misnormalized_tuple_is_named(self, chsh_parties):
        table = np.full((2, 2, 2, 2), 0.25)
        table[1, 0, 0, 0] += 1e-3
        with pytest.raises(BehaviorValidationError) as excinfo:
            validate_behavior(NetworkBehavior(chsh_parties, table))
        assert excinfo.value.location == "inputs (1, 0)"
        assert excinfo.value.deviation == pytest.approx(1e-3)

    def test_signaling(self, chsh_parties):
        # C outputs A's input.
        table = np.zeros((2, 2, 2, 2))
        for x in range(2):
            table[x, :, :, x] = 0.5
        with pytest.raises(NoSignalingViolationError) as excinfo:
            validate_behavior(NetworkBehavior(chsh_parties, table))
        assert excinfo.value.party == 'A'

    def test_pr_box_is_valid(self, chsh_parties):
        validate_behavior(NetworkBehavior(chsh_parties, pr_box()))


@pytest.mark.unit
class TestMarginalAndInputs:

    def test_reference_marginal_on_b_is_uniform(self, reference_behavior):
        m = marginal(reference_behavior, ['B'])
        assert m.names == ('B',)
        assert np.allclose(m.table, 0.25, atol=1e-12)

    def test_marginal_of_product_is_factor(self):
        parties = (PartyDescriptor('A', 2, 2), PartyDescriptor('C', 2, 3))
        p = deterministic_behavior(parties, [[1, 0], [2, 2]])
        m = marginal(p, ['A'], fixed_inputs={'C': 1})
        assert np.array_equal(m.table, np.array([[0.0, 1.0], [1.0, 0.0]]))

    def test_marginal_onto_all_parties_is_identity(self, reference_behavior):
        m = marginal(reference_behavior, ['A', 'B', 'C'])
        assert m.max_difference(reference_behavior) == 0.0

    def test_free_input_removal_is_rejected(self, reference_behavior):
        with pytest.raises(ContractError):
            marginal(reference_behavior, ['A'])

    def test_fixed_input_out_of_range(self, reference_behavior):
        with pytest.raises(ContractError):
            marginal(reference_behavior, ['A'], fixed_inputs={'C': 2})

    def test_empty_marginal(self, reference_behavior):
        with pytest.raises(ContractError):
            marginal(reference_behavior, [])

    def test_fix_inputs(self, reference_behavior):
        fixed = fix_inputs(reference_behavior, {'A': 1, 'C': 0})
        assert fixed.input_shape == (1, 1, 1)
        assert np.array_equal(fixed.table[0, 0, 0], reference_behavior.table[1, 0, 0])
        validate_behavior(fixed)

    def test_fix_inputs_out_of_range(self, reference_behavior):
        with pytest.raises(ContractError):
            fix_inputs(reference_behavior, {'B': 1})


@pytest.mark.unit
class TestConditioning:

    def test_reference_conditional_correlators(self, reference_behavior):
        conditional = condition_on_b(reference_behavior, 0, 0)
        assert conditional.weight == pytest.approx(0.25, abs=1e-12)
        assert conditional.behavior.names == ('A', 'C')
        assert correlator(conditional.behavior, 0, 0) == pytest.approx(1.0, abs=1e-10)
        assert correlator(conditional.behavior, 1, 1) == pytest.approx(1.0, abs=1e-10)
        assert correlator(conditional.behavior, 0, 1) == pytest.approx(0.0, abs=1e-10)
        assert correlator(conditional.behavior, 1, 0) == pytest.approx(0.0, abs=1e-10)

    def test_conditional_correlator_table(self, reference_behavior):
        frame = conditional_correlators(reference_behavior)
        assert list(frame['b']) == [0, 1, 2, 3]
        assert np.allclose(frame['weight'], 0.25, atol=1e-12)
        assert np.allclose(frame['E00'], [1, 0, 0, -1], atol=1e-10)
        assert np.allclose(frame['E11'], [1, 0, 0, -1], atol=1e-10)
        assert np.allclose(frame['E01'], [0, 1, -1, 0], atol=1e-10)
        assert np.allclose(frame['<A0>'], 0.0, atol=1e-10)

    def test_conditional_correlators_need_three_parties(self, chsh_parties):
        with pytest.raises(ContractError):
            conditional_correlators(uniform_behavior(chsh_parties))

    def test_zero_weight_outcome(self, bilocality_parties):
        p = deterministic_behavior(bilocality_parties, [[0, 1], [2], [1, 1]])
        with pytest.raises(UndefinedConditionalError) as excinfo:
            condition_on_b(p, 0, 1)
        assert excinfo.value.outcome == 1

    def test_zero_weight_rows_are_nan(self, bilocality_parties):
        p = deterministic_behavior(bilocality_parties, [[0, 1], [2], [1, 1]])
        frame = conditional_correlators(p)
        assert np.isnan(frame.loc[0, 'E00'])
        assert frame.loc[2, 'E00'] == pytest.approx(-1.0)

    def test_deterministic_conditional_is_restriction(self, bilocality_parties):
        p = deterministic_behavior(bilocality_parties, [[0, 1], [3], [1, 0]])
        conditional = condition_on_b(p, 0, 3)
        expected = deterministic_behavior((bilocality_parties[0], bilocality_parties[2]), [[0, 1], [1, 0]])
        assert conditional.weight == 1.0
        assert conditional.behavior.max_difference(expected) == 0.0

    def test_outcome_out_of_range(self, reference_behavior):
        with pytest.raises(ContractError):
            condition_on_b(reference_behavior, 0, 4)

    def test_signaling_middle_party(self):
        # B outputs A's input.
        parties = (PartyDescriptor('A', 2, 2), PartyDescriptor('B', 1, 2), PartyDescriptor('C', 1, 2))
        table = np.zeros((2, 1, 1, 2, 2, 2))
        for x in range(2):
            table[x, 0, 0, :, x, :] = 0.25
        with pytest.raises(NoSignalingViolationError):
            condition_on_b(NetworkBehavior(parties, table), 0, 0)

    def test_weights_sum_to_one(self, reference_behavior, swap_behavior):
        for p in (reference_behavior, swap_behavior):
            for y in range(p.party('B').inputs):
                assert outcome_weights(p, y).sum() == pytest.approx(1.0, abs=1e-10)


@pytest.mark.unit
class TestCorrelators:

    def test_reference_with_b1_sign(self, reference_behavior):
        for x in range(2):
            for z in range(2):
                assert correlator(reference_behavior, x, z, b1_sign) == pytest.approx(0.5, abs=1e-10)

    def test_reference_without_sign_vanishes(self, reference_behavior):
        for x in range(2):
            for z in range(2):
                assert correlator(reference_behavior, x, z) == pytest.approx(0.0, abs=1e-10)

    def test_uniform_vanishes(self, bilocality_parties):
        p = uniform_behavior(bilocality_parties)
        assert correlator(p, 1, 0, b1_sign) == pytest.approx(0.0, abs=1e-12)

    def test_linearity(self, rng, reference_behavior, bilocality_parties):
        other = deterministic_behavior(bilocality_parties, [[1, 0], [2], [0, 0]])
        for _ in range(10):
            w = float(rng.uniform())
            mixed = mix(reference_behavior, other, w)
            expected = (w * correlator(reference_behavior, 0, 1, b1_sign)
                        + (1 - w) * correlator(other, 0, 1, b1_sign))
            assert correlator(mixed, 0, 1, b1_sign) == pytest.approx(expected, abs=1e-12)

    def test_non_binary_outputs(self):
        parties = (PartyDescriptor('A', 1, 3), PartyDescriptor('C', 1, 2))
        with pytest.raises(ContractError):
            correlator(uniform_behavior(parties), 0, 0)


@pytest.mark.unit
class TestMixing:

    def test_mix_endpoints(self, reference_behavior, bilocality_parties):
        noise = uniform_behavior(bilocality_parties)
        assert mix(reference_behavior, noise, 1.0).max_difference(reference_behavior) == 0.0
        assert mix(reference_behavior, noise, 0.0).max_difference(noise) == 0.0

    def test_mix_rejects_bad_weight(self, reference_behavior, bilocality_parties):
        with pytest.raises(ContractError):
            mix(reference_behavior, uniform_behavior(bilocality_parties), 1.5)

    def test_mix_rejects_other_parties(self, reference_behavior, chsh_parties):
        with pytest.raises(ContractError):
            mix(reference_behavior, uniform_behavior(chsh_parties), 0.5)

    def test_deterministic_wrong_response_length(self, chsh_parties):
        with pytest.raises(DimensionError):
            deterministic_behavior(chsh_parties, [[0], [0, 1]])

    def test_behavior_frame(self, reference_behavior):
        frame = behavior_frame(reference_behavior)
        assert len(frame) == reference_behavior.table.size
        assert {'x_A', 'x_B', 'x_C', 'o_A', 'o_B', 'o_C', 'p'} <= set(frame.columns)
        assert frame['p'].sum() == pytest.approx(4.0)


@pytest.mark.unit
class TestDocuments:

    def test_roundtrip_is_exact(self, reference_behavior, swap_behavior):
        for p in (reference_behavior, swap_behavior):
            restored = deserialize(serialize(p))
            assert restored.parties == p.parties
            assert np.array_equal(restored.table, p.table)

    def test_document_fields(self, reference_behavior):
        document = to_document(reference_behavior)
        assert document['format_version'] == FORMAT_VERSION
        assert document['parties'][1] == {'name': 'B', 'inputs': 1, 'outputs': 4}
        assert len(document['p']) == reference_behavior.table.size

    def test_invalid_json(self):
        with pytest.raises(DocumentFormatError) as excinfo:
            deserialize("{not json", source='broken.json')
        assert excinfo.value.path == 'broken.json'
        assert excinfo.value.location.startswith('line 1')

    def test_wrong_version(self, reference_behavior):
        document = to_document(reference_behavior)
        document['format_version'] = 99
        with pytest.raises(DocumentFormatError) as excinfo:
            from_document(document)
        assert excinfo.value.location == '$.format_version'

    def test_wrong_entry_count(self, reference_behavior):
        document = to_document(reference_behavior)
        document['p'] = document['p'][:-1]
        with pytest.raises(DocumentFormatError) as excinfo:
            from_document(document)
        assert excinfo.value.location == '$.p'

    def test_malformed_party(self, reference_behavior):
        document = to_document(reference_behavior)
        del document['parties'][2]['outputs']
        with pytest.raises(DocumentFormatError) as excinfo:
            from_document(document)
        assert excinfo.value.location == '$.parties[2]'

    def test_not_an_object(self):
        with pytest.raises(DocumentFormatError):
            deserialize(json.dumps([1, 2, 3]))

    def test_negative_entry_fails_validation(self, chsh_parties):
        p = uniform_behavior(chsh_parties)
        document = to_document(p)
        document['p'][0] = -0.5
        document['p'][1] = 1.0
        with pytest.raises(BehaviorValidationError):
            from_document(document)

    def test_misnormalized_document_names_tuple(self, chsh_parties):
        document = to_document(uniform_behavior(chsh_parties))
        document['p'][-1] += 1e-3
        with pytest.raises(BehaviorValidationError) as excinfo:
            from_document(document)
        assert excinfo.value.location == "inputs (1, 1)"
