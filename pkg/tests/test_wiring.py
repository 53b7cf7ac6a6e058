"""
Tests for quantum boxes, wiring programs, exact wired evaluation and the
conditional locality witness.
"""

import json

import numpy as np
import pytest

from netnl.core.exceptions import (
    BehaviorValidationError,
    CapacityError,
    ContractError,
    DimensionError,
    NoSignalingViolationError,
    ProgramError,
)
from netnl.services.behaviors import PartyDescriptor, mix
from netnl.services.classical import chsh
from netnl.services.wiring import (
    Emit,
    QuantumBox,
    SourceResource,
    Terminal,
    Use,
    WiredScenario,
    WiringProgram,
    compile_program,
    conditional_locality_witness,
    crossed_order_wiring,
    deterministic_box,
    embedded_bipartite,
    evaluate_wired,
    fritz_behavior,
    fritz_wiring,
    random_quantum_box,
    random_wired_scenario,
    tsirelson_box,
    validate_program,
    wired_scenario_from_document,
    wired_scenario_to_document,
)
from tests.helpers import pr_box


@pytest.fixture
def line_sources():
    return (
        SourceResource.shared('S_AB', ('A', 'B'), (tsirelson_box(),)),
        SourceResource.shared('S_BC', ('B', 'C'), (tsirelson_box(),)),
    )


@pytest.fixture
def line_parties():
    return (PartyDescriptor('A', 2, 2), PartyDescriptor('B', 1, 4), PartyDescriptor('C', 2, 2))


@pytest.mark.unit
class TestBoxes:

    def test_tsirelson_box_chsh(self):
        assert chsh(tsirelson_box().as_behavior()) == pytest.approx(2 * np.sqrt(2), abs=1e-10)

    def test_deterministic_box(self):
        box = deterministic_box([1, 0], [0, 0])
        assert box.table[0, 1, 1, 0] == 1.0
        assert box.inputs == (2, 2)
        assert box.side_alphabet(1) == (2, 2)

    def test_pr_box_is_accepted_without_realization(self):
        assert chsh(QuantumBox(pr_box()).as_behavior()) == pytest.approx(4.0)

    def test_wrong_rank(self):
        with pytest.raises(DimensionError):
            QuantumBox(np.full((2, 2, 2), 0.25))

    def test_signaling_box(self):
        table = np.zeros((2, 2, 2, 2))
        for x in range(2):
            table[x, :, :, x] = 0.5
        with pytest.raises(NoSignalingViolationError):
            QuantumBox(table)

    def test_realization_mismatch(self):
        box = tsirelson_box()
        with pytest.raises(BehaviorValidationError):
            QuantumBox(np.full((2, 2, 2, 2), 0.25), box.realization)

    def test_source_needs_distinct_endpoints(self):
        with pytest.raises(DimensionError):
            SourceResource('S', ('A', 'A'), np.array([1.0]))

    def test_source_share_normalization(self):
        with pytest.raises(BehaviorValidationError):
            SourceResource('S', ('A', 'B'), np.array([0.5, 0.6]))

    def test_share_only_source(self):
        source = SourceResource('S', ('A', 'B'), np.array([0.25, 0.75]))
        assert source.support == 2
        assert source.box_count == 0
        assert source.side_of('B') == 1
        assert source.side_of('C') is None


@pytest.mark.unit
class TestPrograms:

    def test_foreign_terminal(self, line_sources, line_parties):
        with pytest.raises(ProgramError) as excinfo:
            compile_program(line_sources, line_parties[2],
                            lambda h: None if h.steps else (Terminal('S_AB', 0, 0), 0),
                            lambda h: 0)
        assert excinfo.value.party == 'C'

    def test_reused_terminal(self, line_sources, line_parties):
        terminal = Terminal('S_AB', 0, 0)
        with pytest.raises(ProgramError) as excinfo:
            compile_program(line_sources, line_parties[0], lambda h: (terminal, 0), lambda h: 0)
        assert excinfo.value.step == 1

    def test_missing_history(self, line_sources, line_parties):
        with pytest.raises(ProgramError) as excinfo:
            compile_program(line_sources, line_parties[0], lambda h: None,
                            lambda h: h.output_of(Terminal('S_AB', 0, 0)))
        assert excinfo.value.step == 0

    def test_last_output_without_steps(self, line_sources, line_parties):
        with pytest.raises(ProgramError):
            compile_program(line_sources, line_parties[0], lambda h: None, lambda h: h.last_output)

    def test_output_out_of_range(self, line_sources, line_parties):
        with pytest.raises(ProgramError):
            compile_program(line_sources, line_parties[0], lambda h: None, lambda h: 2)

    def test_box_input_out_of_range(self, line_sources, line_parties):
        with pytest.raises(ProgramError):
            compile_program(line_sources, line_parties[0],
                            lambda h: None if h.steps else (Terminal('S_AB', 0, 0), 5),
                            lambda h: 0)

    def test_missing_context(self, line_sources, line_parties):
        program = WiringProgram('A', {(0, (0,)): Emit(0)})
        with pytest.raises(ProgramError):
            validate_program(program, line_parties[0], line_sources)

    def test_branch_count(self, line_sources, line_parties):
        node = Use(Terminal('S_AB', 0, 0), 0, (Emit(0),))
        program = WiringProgram('A', {(0, (0,)): node, (1, (0,)): Emit(0)})
        with pytest.raises(ProgramError):
            validate_program(program, line_parties[0], line_sources)

    def test_compiled_tree(self, line_sources, line_parties):
        terminal = Terminal('S_AB', 0, 0)
        program = compile_program(line_sources, line_parties[0],
                                  lambda h: None if h.steps else (terminal, h.x), lambda h: h.last_output)
        root = program.roots[(1, (0,))]
        assert root == Use(terminal, 1, (Emit(0), Emit(1)))
        assert program.terminals() == (terminal,)

    def test_missing_program(self, line_sources, line_parties):
        with pytest.raises(ProgramError):
            WiredScenario(line_parties, line_sources, {})


@pytest.mark.integration
class TestFritzWiring:

    def test_wired_matches_quantum(self):
        wired = evaluate_wired(fritz_wiring())
        assert wired.max_difference(fritz_behavior()) <= 1e-9

    def test_embedded_chsh(self):
        assert chsh(embedded_bipartite(fritz_behavior())) == pytest.approx(2 * np.sqrt(2), abs=1e-9)

    def test_conditionals_are_local(self):
        report = conditional_locality_witness(evaluate_wired(fritz_wiring()))
        assert report.wirable_consistent
        assert len(report.verdicts) == 4

    def test_embedded_needs_fritz_shape(self, reference_behavior):
        with pytest.raises(ContractError):
            embedded_bipartite(reference_behavior)

    def test_assignment_count_and_cap(self):
        w = fritz_wiring()
        assert w.assignment_count() == 16
        with pytest.raises(CapacityError) as excinfo:
            evaluate_wired(w, cap=2)
        assert excinfo.value.required == 16

    def test_document_roundtrip(self):
        w = fritz_wiring()
        text = json.dumps(wired_scenario_to_document(w))
        restored = wired_scenario_from_document(json.loads(text))
        assert evaluate_wired(restored).max_difference(evaluate_wired(w)) <= 1e-12


@pytest.mark.integration
class TestWiredBehaviors:

    def test_crossed_order(self):
        w = crossed_order_wiring()
        p = evaluate_wired(w)
        assert p.names == ('A', 'B', 'C')
        assert conditional_locality_witness(p).wirable_consistent

    def test_line_with_tsirelson_boxes(self, line_sources, line_parties):
        alice_t, bob_ab, bob_bc, charlie_t = (Terminal('S_AB', 0, 0), Terminal('S_AB', 0, 1),
                                              Terminal('S_BC', 0, 0), Terminal('S_BC', 0, 1))

        def bob_select(h):
            if not h.steps:
                return bob_ab, 0
            if len(h.steps) == 1:
                return bob_bc, h.last_output
            return None

        programs = {
            'A': compile_program(line_sources, line_parties[0],
                                 lambda h: None if h.steps else (alice_t, h.x), lambda h: h.last_output),
            'B': compile_program(line_sources, line_parties[1], bob_select,
                                 lambda h: 2 * h.output_of(bob_ab) + h.output_of(bob_bc)),
            'C': compile_program(line_sources, line_parties[2],
                                 lambda h: None if h.steps else (charlie_t, h.x), lambda h: h.last_output),
        }
        p = evaluate_wired(WiredScenario(line_parties, line_sources, programs))
        report = conditional_locality_witness(p)
        assert report.wirable_consistent
        assert report.max_chsh <= 2.0 + 1e-9

    def test_linear_in_box_tables(self):
        w = random_wired_scenario(3)
        rng = np.random.default_rng(11)
        source = w.sources[0]
        original = source.box(0, 0)
        replacement = random_quantum_box(rng)

        def with_first_box(box):
            families = ((box,) + source.boxes_by_share[0][1:],) + source.boxes_by_share[1:]
            swapped = SourceResource(source.name, source.endpoints, source.share_probs, families)
            return evaluate_wired(WiredScenario(w.parties, (swapped,) + w.sources[1:], w.programs))

        for weight in (0.25, 0.6):
            mixed_box = QuantumBox(weight * original.table + (1 - weight) * replacement.table)
            expected = mix(with_first_box(original), with_first_box(replacement), weight)
            assert with_first_box(mixed_box).max_difference(expected) <= 1e-12

    def test_linear_in_share_distributions(self, line_parties):
        rng = np.random.default_rng(12)
        families = ((tsirelson_box(),), (random_quantum_box(rng),))
        alice_t, bob_ab, bob_bc, charlie_t = (Terminal('S_AB', 0, 0), Terminal('S_AB', 0, 1),
                                              Terminal('S_BC', 0, 0), Terminal('S_BC', 0, 1))
        bc = SourceResource.shared('S_BC', ('B', 'C'), (random_quantum_box(rng),))

        def bob_select(h):
            if not h.steps:
                return bob_ab, h.shares[0]
            if len(h.steps) == 1:
                return bob_bc, h.last_output
            return None

        def with_shares(probs):
            sources = (SourceResource('S_AB', ('A', 'B'), np.array(probs), families), bc)
            programs = {
                'A': compile_program(sources, line_parties[0],
                                     lambda h: None if h.steps else (alice_t, h.x),
                                     lambda h: h.last_output ^ h.shares[0]),
                'B': compile_program(sources, line_parties[1], bob_select,
                                     lambda h: 2 * h.output_of(bob_ab) + h.output_of(bob_bc)),
                'C': compile_program(sources, line_parties[2],
                                     lambda h: None if h.steps else (charlie_t, h.x), lambda h: h.last_output),
            }
            return evaluate_wired(WiredScenario(line_parties, sources, programs))

        first, second = with_shares([1.0, 0.0]), with_shares([0.0, 1.0])
        assert first.max_difference(second) > 1e-6
        for weight in (0.3, 0.75):
            expected = mix(first, second, weight)
            assert with_shares([weight, 1 - weight]).max_difference(expected) <= 1e-12

    def test_seed_zero_builds_and_is_consistent(self):
        p = evaluate_wired(random_wired_scenario(0))
        assert conditional_locality_witness(p).wirable_consistent

    def test_random_scenario_is_deterministic_in_seed(self):
        first = evaluate_wired(random_wired_scenario(7))
        second = evaluate_wired(random_wired_scenario(7))
        assert first.max_difference(second) == 0.0

    @pytest.mark.slow
    def test_random_scenarios_are_wirable_consistent(self):
        for seed in range(100):
            p = evaluate_wired(random_wired_scenario(seed))
            report = conditional_locality_witness(p)
            assert report.wirable_consistent, f"seed {seed}: {report.to_frame()}"


@pytest.mark.integration
class TestWitness:

    def test_swap_event_ready_is_not_wirable(self, swap_behavior):
        report = conditional_locality_witness(swap_behavior)
        assert not report.wirable_consistent
        assert report.summary() == 'not quantum-wirable'
        assert report.max_chsh == pytest.approx(2 * np.sqrt(2), abs=1e-9)

    def test_reference_is_consistent(self, reference_behavior):
        report = conditional_locality_witness(reference_behavior)
        assert report.wirable_consistent
        assert [v.b for v in report.verdicts] == [0, 1, 2, 3]

    def test_report_document(self, swap_behavior):
        document = conditional_locality_witness(swap_behavior).to_document()
        assert document['wirable_consistent'] is False
        assert len(document['conditionals']) == 4
        assert all(c['witness_gap'] > 0 for c in document['conditionals'])
