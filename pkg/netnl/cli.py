# netnl/cli.py
"""
Command-Line Interface.

Four commands share one set of conventions:

    simulate   build a scenario and write its behavior document
    classify   Bell locality, bilocality score and conditional-locality witness
    selftest   certify the Bell-state-measurement self-test on a scenario
    wiring     evaluate box wirings (Fritz replay, crossed order, random batches)

Exit codes are the same for every command: 0 when all checks pass, 1 when a
declared expectation or a verdict fails, 2 on usage or input errors.
"""

import functools
import logging
import os
import re
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import click
import pandas as pd

from . import __version__, configure_logging
from .config import Config
from .core.constants import FORMAT_VERSION, BlockCase, Expectation, LpBackend
from .core.exceptions import ConfigurationError, ContractError, NetnlError, PreconditionError
from .core.models import WitnessReport
from .persistence.document_store import read_document, read_text, write_document
from .services import behaviors, classical, quantum, selftest, wiring
from .services.behaviors import NetworkBehavior
from .services.jordan import jordan_scenario
from .services.report_generation import export_workbook
from .utils.format_utils import format_float, format_vector, parse_jordan_spec

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2

SCENARIOS = {
    'reference': quantum.reference_experiment,
    'swap-event-ready': quantum.swap_event_ready_experiment,
    'fritz': wiring.fritz_triangle,
    'junk': quantum.junk_augmented_experiment,
}
JORDAN_PREFIX = 'jordan:'


class InputError(click.ClickException):
    """Invalid files, documents or parameters (exit code 2)."""
    exit_code = EXIT_INPUT


@dataclass(frozen=True)
class RunConfig:
    """Options of one command invocation, with Config defaults filled in."""
    command: str
    scenario: Optional[str] = None
    behavior_path: Optional[str] = None
    tolerance: float = Config.DEFAULT_TOLERANCE
    out: Optional[str] = None
    xlsx: Optional[str] = None
    seed: int = 0
    noise: float = 0.0
    enumeration_cap: int = Config.ENUMERATION_CAP
    strategy_cap: int = Config.STRATEGY_CAP
    backend: str = Config.LP_BACKEND
    expectations: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.tolerance <= 0:
            raise click.BadParameter(f"tolerance must be positive, got {self.tolerance}.", param_hint='--tol')
        if self.scenario and self.behavior_path:
            raise click.UsageError("Give either --scenario or --behavior, not both.")
        for path in (self.out, self.xlsx, self.behavior_path):
            if path is not None and not str(path).strip():
                raise click.BadParameter("Paths must not be empty.")


def _translate_errors(command):
    """Domain and configuration errors become exit code 2 with a one-line message."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except (NetnlError, ConfigurationError) as e:
            logger.warning(f"{command.__name__} rejected its input: {e}")
            raise InputError(str(e)) from e
    return wrapper


def _slug(name: str) -> str:
    return re.sub(r'[^a-z0-9]+', '-', name.lower()).strip('-') or 'scenario'


def build_scenario(name: str) -> quantum.NetworkScenario:
    """
    Raises:
        click.UsageError: for an unknown name or a malformed Jordan family.
    """
    key = name.strip().lower()
    if key.startswith(JORDAN_PREFIX):
        try:
            family = parse_jordan_spec(name.strip())
        except ValueError as e:
            raise click.UsageError(f"Invalid Jordan family '{name}': {e}") from e
        return jordan_scenario(family)
    factory = SCENARIOS.get(key)
    if factory is None:
        choices = ', '.join(sorted(SCENARIOS))
        raise click.UsageError(f"Unknown scenario '{name}'. Choose from {choices} or jordan:<thetas>|<phis>.")
    return factory()


def load_behavior(run: RunConfig) -> NetworkBehavior:
    """Reads `--behavior` or evaluates `--scenario`."""
    if run.behavior_path:
        return behaviors.deserialize(read_text(run.behavior_path), source=run.behavior_path)
    if not run.scenario:
        raise click.UsageError("One of --scenario or --behavior is required.")
    return quantum.network_behavior(build_scenario(run.scenario))


def _emit(document: Dict, run: RunConfig, sheets: Optional[Dict[str, pd.DataFrame]] = None) -> None:
    if run.out:
        write_document(run.out, document)
        click.echo(f"Report written to {run.out}")
    if run.xlsx:
        export_workbook(sheets or {}, run.xlsx)
        click.echo(f"Workbook written to {run.xlsx}")


def _print_frame(title: str, frame: pd.DataFrame) -> None:
    click.echo(title)
    click.echo(frame.to_string(index=False, float_format=lambda v: f"{v:.10f}"))


def _finish(failures) -> None:
    for message in failures:
        click.echo(f"FAILED: {message}")
    if failures:
        click.get_current_context().exit(EXIT_FAILED)


_scenario_option = click.option('--scenario', help="reference, swap-event-ready, fritz, junk or jordan:<thetas>|<phis>[|wA|wC].")
_behavior_option = click.option('--behavior', 'behavior_path', type=click.Path(dir_okay=False),
                                help="Behavior document to read instead of a scenario.")
_tol_option = click.option('--tol', 'tolerance', type=click.FloatRange(min=0.0, min_open=True),
                           default=Config.DEFAULT_TOLERANCE, show_default=True)
_out_option = click.option('--out', type=click.Path(dir_okay=False), help="JSON report path.")
_xlsx_option = click.option('--xlsx', type=click.Path(dir_okay=False), help="Also export the report tables to a workbook.")
_strategy_cap_option = click.option('--strategy-cap', type=click.IntRange(min=1), envvar=['NETNL_STRATEGY_CAP', 'NETNL_CAP'],
                                    default=Config.STRATEGY_CAP, show_default=True,
                                    help="Maximum number of deterministic strategies in the locality LP.")
_backend_option = click.option('--backend', type=click.Choice([LpBackend.SIMPLEX, LpBackend.HIGHS]),
                               default=Config.LP_BACKEND, show_default=True)


@click.group()
@click.version_option(__version__, prog_name='netnl')
def cli():
    """Network nonlocality simulator, classifier and self-test verifier."""
    configure_logging(Config)


# --- simulate ---

@cli.command()
@click.option('--scenario', required=True,
              help="reference, swap-event-ready, fritz, junk or jordan:<thetas>|<phis>[|wA|wC].")
@click.option('--noise', type=click.FloatRange(0.0, 1.0), default=0.0, show_default=True,
              help="Weight of uniform noise mixed into the behavior.")
@_out_option
@_xlsx_option
@_translate_errors
def simulate(scenario, noise, out, xlsx):
    """Evaluate a scenario and write its behavior document."""
    out = out or os.path.join(Config.OUTPUT_DIR, f"{_slug(scenario)}.behavior.json")
    run = RunConfig('simulate', scenario=scenario, noise=noise, out=out, xlsx=xlsx)
    p = quantum.network_behavior(build_scenario(run.scenario))
    if run.noise > 0.0:
        p = behaviors.mix(behaviors.uniform_behavior(p.parties), p, run.noise)
    logger.info(f"Simulated scenario '{run.scenario}' (noise {run.noise}).")

    shape = ', '.join(f"{q.name}({q.inputs} in, {q.outputs} out)" for q in p.parties)
    click.echo(f"Scenario: {run.scenario}  parties: {shape}")
    sheets = {'behavior': behaviors.behavior_frame(p)}
    if p.n_parties == 3:
        click.echo(f"p(b) of {p.parties[1].name}: {format_vector(behaviors.outcome_weights(p, 0))}")
        try:
            correlators = behaviors.conditional_correlators(p)
        except ContractError:
            correlators = None
        if correlators is not None:
            _print_frame("Conditional expectations and correlators:", correlators)
            sheets['correlators'] = correlators
    if p.input_shape == (1, 1, 1) and p.output_shape == (4, 4, 4):
        embedded = wiring.embedded_bipartite(p)
        click.echo(f"Embedded CHSH of p(bc|yz): {format_float(classical.chsh(embedded))}")

    write_document(run.out, behaviors.to_document(p))
    click.echo(f"Behavior written to {run.out}")
    if run.xlsx:
        export_workbook(sheets, run.xlsx)
        click.echo(f"Workbook written to {run.xlsx}")


# --- classify ---

def _expectation_results(feasible: bool, score, witness: Optional[WitnessReport], genuine: bool,
                         tol: float) -> Dict[str, Optional[bool]]:
    """Outcome of every expectation label; None where it cannot be evaluated."""
    violates = None if score is None else score.violates(tol)
    consistent = None if witness is None else witness.wirable_consistent
    return {
        Expectation.LOCAL: feasible,
        Expectation.NONLOCAL: not feasible,
        Expectation.BILOCAL_VIOLATION: violates,
        Expectation.BILOCAL_COMPATIBLE: None if violates is None else not violates,
        Expectation.WIRABLE_CONSISTENT: consistent,
        Expectation.NOT_WIRABLE: None if consistent is None else not consistent,
        Expectation.GENUINE: genuine,
    }


@cli.command()
@_scenario_option
@_behavior_option
@click.option('--expect', 'expectations', multiple=True, type=click.Choice(Expectation.ALL),
              help="Verdict that must hold; repeat for several.")
@_tol_option
@_strategy_cap_option
@_backend_option
@_out_option
@_xlsx_option
@_translate_errors
def classify(scenario, behavior_path, expectations, tolerance, strategy_cap, backend, out, xlsx):
    """Bell locality, bilocality score and conditional-locality witness."""
    run = RunConfig('classify', scenario=scenario, behavior_path=behavior_path, tolerance=tolerance,
                    out=out, xlsx=xlsx, strategy_cap=strategy_cap, backend=backend,
                    expectations=tuple(expectations))
    p = load_behavior(run)

    certificate = classical.is_bell_local(p, cap=run.strategy_cap, backend=run.backend)
    try:
        score = classical.bilocality_score(p)
    except ContractError:
        score = None
    witness = None
    if p.n_parties == 3:
        witness = wiring.conditional_locality_witness(p, cap=run.strategy_cap, backend=run.backend)
    not_wirable = witness is not None and not witness.wirable_consistent
    non_bilocal = score is not None and score.violates(run.tolerance)
    genuine = not_wirable and non_bilocal

    if certificate.feasible:
        click.echo(f"Bell local: yes (residual {certificate.residual:.2e}, "
                   f"{len(certificate.support())} of {certificate.strategy_count} strategies used)")
    else:
        click.echo(f"Bell local: no (witness gap {format_float(certificate.witness_gap)})")
    if score is None:
        click.echo("Bilocality: n/a for this shape")
    else:
        click.echo(f"Bilocality: I = {format_float(score.i_value)}, J = {format_float(score.j_value)}, "
                   f"S = {format_float(score.s_value)}")
    if witness is not None:
        _print_frame(f"Conditional locality ({witness.summary()}):", witness.to_frame())
    click.echo(f"Genuineness summary: genuine network nonlocality evidence: {'yes' if genuine else 'no'} "
               f"(not wirable: {'yes' if not_wirable else 'no'}, non-bilocal: {'yes' if non_bilocal else 'no'})")

    results = _expectation_results(certificate.feasible, score, witness, genuine, run.tolerance)
    failures = []
    for label in run.expectations:
        if results[label] is None:
            failures.append(f"expectation '{label}' cannot be evaluated for this behavior")
        elif not results[label]:
            failures.append(f"expectation '{label}' does not hold")

    document = {
        'format_version': FORMAT_VERSION,
        'source': run.behavior_path or run.scenario,
        'bell_local': certificate.to_document(),
        'bilocality': None if score is None else score.to_document(),
        'witness': None if witness is None else witness.to_document(),
        'genuine': genuine,
        'expectations': {label: results[label] for label in run.expectations},
    }
    summary = pd.DataFrame([
        {'check': 'bell_local', 'value': certificate.feasible},
        {'check': 'S', 'value': None if score is None else score.s_value},
        {'check': 'wirable_consistent', 'value': None if witness is None else witness.wirable_consistent},
        {'check': 'genuine', 'value': genuine},
    ])
    sheets = {'summary': summary, 'behavior': behaviors.behavior_frame(p)}
    if witness is not None:
        sheets['witness'] = witness.to_frame()
    _emit(document, run, sheets)
    _finish(failures)


# --- selftest ---

@cli.command(name='selftest')
@_scenario_option
@_behavior_option
@_tol_option
@click.option('--noise', type=click.FloatRange(0.0, 1.0), default=0.0, show_default=True,
              help="White-noise weight mixed into every source state.")
@click.option('--sweep', type=click.IntRange(min=0), default=0, show_default=True,
              help="Also classify this many constraint-satisfying block triples.")
@click.option('--seed', type=int, default=0, show_default=True)
@_out_option
@_xlsx_option
@_translate_errors
def selftest_command(scenario, behavior_path, tolerance, noise, sweep, seed, out, xlsx):
    """Certify the Bell-state-measurement self-test."""
    if not scenario and not behavior_path:
        scenario = 'reference'
    run = RunConfig('selftest', scenario=scenario, behavior_path=behavior_path, tolerance=tolerance,
                    noise=noise, seed=seed, out=out, xlsx=xlsx)
    failures = []
    extra: Dict = {}

    if run.behavior_path:
        report = selftest.verify_reference_correlations(load_behavior(run), run.tolerance)
    else:
        s = build_scenario(run.scenario)
        if run.noise > 0.0:
            s = quantum.with_source_noise(s, run.noise)
        report = selftest.certify_theorem(s, run.tolerance)
        if run.scenario.strip().lower().startswith(JORDAN_PREFIX) and run.noise == 0.0:
            try:
                demo = selftest.commuting_family_demo(parse_jordan_spec(run.scenario.strip()))
            except PreconditionError:
                demo = None
            if demo is not None:
                click.echo(f"Commuting family: S = {format_float(demo.score.s_value)}, "
                           f"bilocal model roundtrip error {demo.roundtrip_error:.2e}")
                extra['commuting'] = {'S': demo.score.s_value, 'roundtrip_error': demo.roundtrip_error}

    _print_frame("Self-test checks:", report.to_frame())
    if report.blocks:
        _print_frame("Jordan blocks:", report.blocks_frame())

    sheets = {'checks': report.to_frame(), 'blocks': report.blocks_frame()}
    if sweep > 0:
        frame = selftest.sweep_block_solutions(sweep, run.seed)
        counts = {str(k): int(v) for k, v in frame['case'].value_counts().items()}
        click.echo(f"Block sweep over {sweep} triples: {counts}")
        extra['sweep'] = counts
        sheets['sweep'] = frame
        if counts.get(BlockCase.NONE, 0):
            failures.append(f"{counts[BlockCase.NONE]} sweep triples fit no solution family")

    click.echo(f"Verdict: {report.verdict}")
    if not report.passed:
        failures.append("self-test verdict is fail")

    document = report.to_document()
    document.update(extra)
    _emit(document, run, sheets)
    _finish(failures)


# --- wiring ---

def _wired_summary(name: str, p: NetworkBehavior, witness: WitnessReport) -> Dict:
    return {
        'name': name,
        'shape': [[q.inputs, q.outputs] for q in p.parties],
        'wirable_consistent': witness.wirable_consistent,
        'max_chsh': witness.max_chsh,
        'conditionals': len(witness.verdicts),
    }


@cli.command(name='wiring')
@click.option('--demo', type=click.Choice(['fritz', 'crossed', 'random']), default='fritz', show_default=True)
@click.option('--replay', type=click.Path(dir_okay=False), help="Wired scenario document to evaluate instead of a demo.")
@click.option('--count', type=click.IntRange(min=1), default=100, show_default=True,
              help="Number of random wired scenarios.")
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--cap', 'enumeration_cap', type=click.IntRange(min=1), envvar='NETNL_CAP',
              default=Config.ENUMERATION_CAP, show_default=True,
              help="Maximum share/outcome assignments in exact wired evaluation.")
@_strategy_cap_option
@_backend_option
@_tol_option
@click.option('--save-scenario', type=click.Path(dir_okay=False),
              help="Write the (last) evaluated wired scenario document here.")
@_out_option
@_xlsx_option
@_translate_errors
def wiring_command(demo, replay, count, seed, enumeration_cap, strategy_cap, backend, tolerance,
                   save_scenario, out, xlsx):
    """Evaluate box wirings and run the conditional-locality witness on them."""
    run = RunConfig('wiring', tolerance=tolerance, out=out, xlsx=xlsx, seed=seed,
                    enumeration_cap=enumeration_cap, strategy_cap=strategy_cap, backend=backend)
    failures = []
    rows = []
    document: Dict = {'format_version': FORMAT_VERSION, 'demo': 'replay' if replay else demo}

    def evaluate(name, scenario):
        p = wiring.evaluate_wired(scenario, cap=run.enumeration_cap)
        witness = wiring.conditional_locality_witness(p, cap=run.strategy_cap, backend=run.backend)
        rows.append(_wired_summary(name, p, witness))
        if not witness.wirable_consistent:
            failures.append(f"wired scenario '{name}' has a nonlocal conditional")
        return p

    if replay:
        scenario = wiring.wired_scenario_from_document(read_document(replay), source=replay)
        evaluate(os.path.basename(replay), scenario)
    elif demo == 'fritz':
        scenario = wiring.fritz_wiring()
        wired = evaluate('fritz', scenario)
        gap = wired.max_difference(wiring.fritz_behavior())
        embedded_chsh = classical.chsh(wiring.embedded_bipartite(wired))
        click.echo(f"Fritz wiring vs quantum evaluation: max gap {gap:.2e}")
        click.echo(f"Embedded CHSH of the wired behavior: {format_float(embedded_chsh)}")
        document.update({'max_gap': gap, 'embedded_chsh': embedded_chsh})
        if gap > run.tolerance:
            failures.append(f"wired and quantum Fritz behaviors differ by {gap:.2e}")
    elif demo == 'crossed':
        scenario = wiring.crossed_order_wiring()
        evaluate('crossed', scenario)
    else:
        scenario = None
        for offset in range(count):
            scenario = wiring.random_wired_scenario(run.seed + offset)
            evaluate(f"seed-{run.seed + offset}", scenario)
        document['seeds'] = [run.seed, run.seed + count - 1]

    frame = pd.DataFrame(rows, columns=['name', 'shape', 'wirable_consistent', 'max_chsh', 'conditionals'])
    _print_frame("Wired scenarios:", frame)
    consistent = int(frame['wirable_consistent'].sum())
    click.echo(f"{consistent} of {len(frame)} wired behaviors have only local conditionals")

    if save_scenario and scenario is not None:
        write_document(save_scenario, wiring.wired_scenario_to_document(scenario))
        click.echo(f"Wired scenario written to {save_scenario}")
    document['scenarios'] = rows
    document['passed'] = not failures
    _emit(document, run, {'wired': frame.astype({'shape': str})})
    _finish(failures)


def main():
    cli(prog_name='netnl')


if __name__ == '__main__':
    main()
