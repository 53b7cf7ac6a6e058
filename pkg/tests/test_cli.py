"""
End-to-end tests of the command-line interface.
"""

import json
import os

import openpyxl
import pytest
from click.testing import CliRunner

from netnl import __version__
from netnl.cli import EXIT_FAILED, EXIT_INPUT, EXIT_OK, cli
from netnl.services.behaviors import PartyDescriptor, from_document, marginal, to_document, uniform_behavior


@pytest.fixture
def runner():
    return CliRunner()


def run_in(runner, args):
    return runner.invoke(cli, args, catch_exceptions=False)


@pytest.mark.integration
class TestSimulate:

    def test_reference_document(self, runner):
        with runner.isolated_filesystem():
            result = run_in(runner, ['simulate', '--scenario', 'reference', '--out', 'ref.json'])
            assert result.exit_code == EXIT_OK, result.output
            assert "Behavior written to ref.json" in result.output
            with open('ref.json') as f:
                p = from_document(json.load(f))
            bob = marginal(p, ['B'])
            assert bob.table.ravel().tolist() == pytest.approx([0.25] * 4, abs=1e-12)

    def test_default_output_path(self, runner):
        with runner.isolated_filesystem():
            result = run_in(runner, ['simulate', '--scenario', 'swap-event-ready'])
            assert result.exit_code == EXIT_OK, result.output
            assert os.path.exists(os.path.join('data', 'output', 'swap-event-ready.behavior.json'))

    def test_fritz_prints_embedded_chsh(self, runner):
        with runner.isolated_filesystem():
            result = run_in(runner, ['simulate', '--scenario', 'fritz', '--out', 'fritz.json'])
            assert result.exit_code == EXIT_OK, result.output
            assert "Embedded CHSH of p(bc|yz): 2.8284271247" in result.output

    def test_unknown_scenario(self, runner):
        with runner.isolated_filesystem():
            result = run_in(runner, ['simulate', '--scenario', 'nosuch'])
            assert result.exit_code == EXIT_INPUT
            assert "Unknown scenario" in result.output

    def test_malformed_jordan_family(self, runner):
        with runner.isolated_filesystem():
            result = run_in(runner, ['simulate', '--scenario', 'jordan:0.1'])
            assert result.exit_code == EXIT_INPUT

    def test_workbook(self, runner):
        with runner.isolated_filesystem():
            result = run_in(runner, ['simulate', '--scenario', 'reference', '--out', 'ref.json',
                                     '--xlsx', 'ref.xlsx'])
            assert result.exit_code == EXIT_OK, result.output
            wb = openpyxl.load_workbook('ref.xlsx')
            assert wb.sheetnames == ['behavior', 'correlators']


@pytest.mark.integration
class TestClassify:

    def test_reference_expectations(self, runner):
        with runner.isolated_filesystem():
            result = run_in(runner, ['classify', '--scenario', 'reference', '--expect', 'local',
                                     '--expect', 'bilocal-violation', '--expect', 'wirable-consistent'])
            assert result.exit_code == EXIT_OK, result.output
            assert "Bell local: yes" in result.output
            assert "S = 1.4142135624" in result.output
            assert "genuine network nonlocality evidence: no" in result.output

    def test_swap_event_ready_expectations(self, runner):
        with runner.isolated_filesystem():
            result = run_in(runner, ['classify', '--scenario', 'swap-event-ready',
                                     '--expect', 'nonlocal', '--expect', 'not-wirable', '--out', 'swap.json'])
            assert result.exit_code == EXIT_OK, result.output
            with open('swap.json') as f:
                document = json.load(f)
            assert document['bell_local']['feasible'] is False
            assert document['witness']['verdict'] == 'not quantum-wirable'
            assert document['expectations'] == {'nonlocal': True, 'not-wirable': True}

    def test_failed_expectation(self, runner):
        with runner.isolated_filesystem():
            result = run_in(runner, ['classify', '--scenario', 'reference', '--expect', 'nonlocal'])
            assert result.exit_code == EXIT_FAILED
            assert "FAILED: expectation 'nonlocal' does not hold" in result.output

    def test_expectation_without_score(self, runner):
        with runner.isolated_filesystem():
            p = uniform_behavior((PartyDescriptor('A', 2, 2), PartyDescriptor('C', 2, 2)))
            with open('pair.json', 'w') as f:
                json.dump(to_document(p), f)
            result = run_in(runner, ['classify', '--behavior', 'pair.json', '--expect', 'bilocal-violation'])
            assert result.exit_code == EXIT_FAILED
            assert "Bilocality: n/a" in result.output
            assert "cannot be evaluated" in result.output

    def test_behavior_file_roundtrip(self, runner):
        with runner.isolated_filesystem():
            run_in(runner, ['simulate', '--scenario', 'reference', '--out', 'ref.json'])
            result = run_in(runner, ['classify', '--behavior', 'ref.json', '--expect', 'bilocal-violation'])
            assert result.exit_code == EXIT_OK, result.output

    def test_invalid_behavior_file(self, runner):
        with runner.isolated_filesystem():
            document = to_document(uniform_behavior((PartyDescriptor('A', 2, 2), PartyDescriptor('C', 2, 2))))
            document['p'][0] += 1e-3
            with open('bad.json', 'w') as f:
                json.dump(document, f)
            result = run_in(runner, ['classify', '--behavior', 'bad.json'])
            assert result.exit_code == EXIT_INPUT
            assert "not normalized" in result.output

    def test_missing_behavior_file(self, runner):
        with runner.isolated_filesystem():
            result = run_in(runner, ['classify', '--behavior', 'missing.json'])
            assert result.exit_code == EXIT_INPUT

    def test_scenario_and_behavior_together(self, runner):
        with runner.isolated_filesystem():
            result = run_in(runner, ['classify', '--scenario', 'reference', '--behavior', 'ref.json'])
            assert result.exit_code == EXIT_INPUT

    def test_strategy_cap(self, runner):
        with runner.isolated_filesystem():
            result = run_in(runner, ['classify', '--scenario', 'reference', '--strategy-cap', '10'])
            assert result.exit_code == EXIT_INPUT
            assert "exceed the cap" in result.output

    def test_highs_backend_and_workbook(self, runner):
        with runner.isolated_filesystem():
            result = run_in(runner, ['classify', '--scenario', 'swap-event-ready', '--backend', 'highs',
                                     '--expect', 'nonlocal', '--xlsx', 'swap.xlsx'])
            assert result.exit_code == EXIT_OK, result.output
            wb = openpyxl.load_workbook('swap.xlsx')
            assert wb.sheetnames == ['summary', 'behavior', 'witness']
            assert wb['summary']['A1'].font.bold

    def test_non_positive_tolerance(self, runner):
        result = run_in(runner, ['classify', '--scenario', 'reference', '--tol', '0'])
        assert result.exit_code == EXIT_INPUT


@pytest.mark.integration
class TestSelftest:

    def test_reference_passes(self, runner):
        with runner.isolated_filesystem():
            result = run_in(runner, ['selftest', '--out', 'selftest.json'])
            assert result.exit_code == EXIT_OK, result.output
            assert "Verdict: pass" in result.output
            with open('selftest.json') as f:
                document = json.load(f)
            assert document['verdict'] == 'pass'
            assert set(document['fidelities']) == {'00', '01', '10', '11'}

    def test_source_noise_fails(self, runner):
        with runner.isolated_filesystem():
            result = run_in(runner, ['selftest', '--noise', '0.01'])
            assert result.exit_code == EXIT_FAILED
            assert "Verdict: fail" in result.output

    def test_junk_scenario(self, runner):
        with runner.isolated_filesystem():
            result = run_in(runner, ['selftest', '--scenario', 'junk'])
            assert result.exit_code == EXIT_OK, result.output

    def test_behavior_file(self, runner):
        with runner.isolated_filesystem():
            run_in(runner, ['simulate', '--scenario', 'reference', '--out', 'ref.json'])
            result = run_in(runner, ['selftest', '--behavior', 'ref.json'])
            assert result.exit_code == EXIT_OK, result.output

    def test_noisy_behavior_file_fails(self, runner):
        with runner.isolated_filesystem():
            run_in(runner, ['simulate', '--scenario', 'reference', '--noise', '0.01', '--out', 'noisy.json'])
            result = run_in(runner, ['selftest', '--behavior', 'noisy.json'])
            assert result.exit_code == EXIT_FAILED, result.output
            assert "Verdict: fail" in result.output

    def test_commuting_family(self, runner):
        with runner.isolated_filesystem():
            result = run_in(runner, ['selftest', '--scenario', 'jordan:pi|pi', '--out', 'pi.json'])
            assert "Commuting family: S = " in result.output
            assert result.exit_code == EXIT_FAILED
            with open('pi.json') as f:
                document = json.load(f)
            assert document['commuting']['roundtrip_error'] <= 1e-12

    def test_sweep(self, runner):
        with runner.isolated_filesystem():
            result = run_in(runner, ['selftest', '--sweep', '12', '--seed', '1'])
            assert result.exit_code == EXIT_OK, result.output
            assert "Block sweep over 12 triples" in result.output


@pytest.mark.integration
class TestWiringCommand:

    def test_fritz_demo(self, runner):
        with runner.isolated_filesystem():
            result = run_in(runner, ['wiring', '--demo', 'fritz'])
            assert result.exit_code == EXIT_OK, result.output
            assert "Fritz wiring vs quantum evaluation: max gap" in result.output
            assert "1 of 1 wired behaviors have only local conditionals" in result.output

    def test_crossed_demo(self, runner):
        with runner.isolated_filesystem():
            result = run_in(runner, ['wiring', '--demo', 'crossed'])
            assert result.exit_code == EXIT_OK, result.output

    def test_random_batch_and_replay(self, runner):
        with runner.isolated_filesystem():
            result = run_in(runner, ['wiring', '--demo', 'random', '--count', '3', '--seed', '11',
                                     '--save-scenario', 'last.json', '--out', 'batch.json'])
            assert result.exit_code == EXIT_OK, result.output
            assert "3 of 3 wired behaviors" in result.output
            with open('batch.json') as f:
                assert json.load(f)['seeds'] == [11, 13]

            replay = run_in(runner, ['wiring', '--replay', 'last.json'])
            assert replay.exit_code == EXIT_OK, replay.output
            assert "1 of 1 wired behaviors" in replay.output

    def test_replay_of_wrong_document(self, runner):
        with runner.isolated_filesystem():
            run_in(runner, ['simulate', '--scenario', 'reference', '--out', 'ref.json'])
            result = run_in(runner, ['wiring', '--replay', 'ref.json'])
            assert result.exit_code == EXIT_INPUT

    def test_enumeration_cap(self, runner):
        with runner.isolated_filesystem():
            result = run_in(runner, ['wiring', '--demo', 'fritz', '--cap', '2'])
            assert result.exit_code == EXIT_INPUT


@pytest.mark.unit
def test_version(runner):
    result = run_in(runner, ['--version'])
    assert result.exit_code == EXIT_OK
    assert __version__ in result.output
