# netnl/services/selftest.py
"""
Self-Test Certification Service Module.

Checks a bilocality behavior against the reference correlations (uniform
Bob marginal, vanishing conditional marginals, the conditional correlator
table), then certifies a concrete quantum realization: anticommutation of
the outer observables on the support of their reduced states, Bell-state
fidelity and PPT minimum of every extracted steered state, and the
solution family of every occupied Jordan block.

Also hosts the commuting-branch demonstration (explicit bilocal model for
θ = φ = π families) and the block-solution sweep.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from ..config import Config
from ..core.constants import COMMUTING_BLOCK_TOL, PROBABILITY_FLOOR
from ..core.exceptions import ContractError, PreconditionError, UndefinedConditionalError
from ..core.models import BilocalityScore, BilocalModel, JordanFamily, SelfTestReport
from . import linalg
from .behaviors import NetworkBehavior, PartyDescriptor, condition_on_b, correlator, expectation, outcome_weights
from .classical import bilocal_model_from_parent, bilocality_score, evaluate_bilocal_model
from .jordan import (
    BLOCK_SIGNS,
    block_analysis,
    classify_block_solution,
    extraction_channels,
    extraction_target,
    jordan_observables,
    jordan_scenario,
)
from .quantum import (
    NetworkScenario,
    joint_povm,
    network_behavior,
    outer_observables,
    reduced_state,
    steered_state,
)

logger = logging.getLogger(__name__)


def expected_correlator(b: int, x: int, z: int) -> float:
    """(−1)^b1 δ(b1, b2) when x = z, else (−1)^b1 δ(b1, 1 − b2)."""
    b1, b2 = b >> 1, b & 1
    if x == z:
        return float((-1) ** b1) if b1 == b2 else 0.0
    return float((-1) ** b1) if b1 == 1 - b2 else 0.0


def verify_reference_correlations(p: NetworkBehavior, tol: Optional[float] = None) -> SelfTestReport:
    """
    Deviations of p from the reference targets: p(b) = 1/4, all conditional
    single-party expectations 0 and the conditional correlator table.
    An outcome with zero weight counts as a deviation of 1.

    Raises:
        ContractError: unless A, C have binary inputs and outputs and B has
            no input and four outcomes.
    """
    tol = Config.DEFAULT_TOLERANCE if tol is None else tol
    if p.n_parties != 3 or p.input_shape != (2, 1, 2) or p.output_shape != (2, 4, 2):
        raise ContractError("Reference correlations need the (2,1,2) inputs / (2,4,2) outputs shape.",
                            operation='verify_reference_correlations')

    weights = outcome_weights(p, 0)
    bob_deviation = float(np.max(np.abs(weights - 0.25)))
    marginal_deviation = 0.0
    correlator_deviation = 0.0
    for b in range(4):
        if weights[b] <= PROBABILITY_FLOOR:
            logger.warning(f"Outcome b={b} has zero weight; conditional targets cannot be met.")
            marginal_deviation = correlator_deviation = 1.0
            continue
        conditional = condition_on_b(p, 0, b).behavior
        for x in range(2):
            marginal_deviation = max(marginal_deviation,
                                     abs(expectation(conditional, 'A', x)),
                                     abs(expectation(conditional, 'C', x)))
            for z in range(2):
                gap = abs(correlator(conditional, x, z) - expected_correlator(b, x, z))
                correlator_deviation = max(correlator_deviation, gap)

    logger.debug(f"Reference deviations: bob {bob_deviation:.2e}, marginals {marginal_deviation:.2e}, "
                 f"correlators {correlator_deviation:.2e}.")
    return SelfTestReport(
        tolerance=tol,
        bob_marginal_deviation=bob_deviation,
        marginal_deviation=marginal_deviation,
        correlator_deviation=correlator_deviation,
    )


def _support_anticommutator_norm(s: NetworkScenario, party: str) -> float:
    o0, o1 = outer_observables(s, party)
    support = linalg.support_projector(reduced_state(s, party).matrix)
    return linalg.spectral_norm(support @ linalg.anticommutator(o0.matrix, o1.matrix) @ support)


def certify_theorem(s: NetworkScenario, tol: Optional[float] = None) -> SelfTestReport:
    """
    Full certification of a concrete bilocality realization: reference
    correlations, anticommutator norms on the reduced-state supports,
    extracted Bell fidelities and PPT minima per outcome, bilocality score
    and the Jordan block classification.
    """
    tol = Config.DEFAULT_TOLERANCE if tol is None else tol
    p = network_behavior(s)
    report = verify_reference_correlations(p, tol)
    report.anticommutator_norm_a = _support_anticommutator_norm(s, 'A')
    report.anticommutator_norm_c = _support_anticommutator_norm(s, 'C')

    channels = extraction_channels(*outer_observables(s, 'A'), *outer_observables(s, 'C'))
    for b in range(4):
        try:
            _, state = steered_state(s, b)
        except UndefinedConditionalError:
            report.fidelities[b] = 0.0
            continue
        extracted = channels.apply_pair(state.matrix)
        report.fidelities[b] = linalg.fidelity_pure(extracted, extraction_target(b))
        partial = linalg.partial_transpose(extracted, [2, 2], [1])
        report.ppt_minima[b] = linalg.min_eigenvalue((partial + partial.conj().T) / 2)

    report.bilocality_s = bilocality_score(p).s_value
    report.blocks = block_analysis(s, channels)
    logger.info(f"Self-test verdict '{report.verdict}' (min fidelity {min(report.fidelities.values()):.12f}).")
    return report


@dataclass(frozen=True, eq=False)
class CommutingDemo:
    behavior: NetworkBehavior
    model: BilocalModel
    score: BilocalityScore
    roundtrip_error: float
    parent: np.ndarray


def commuting_family_demo(f: JordanFamily) -> CommutingDemo:
    """
    For a family whose blocks all commute, evaluates the behavior, measures
    each party's two observables jointly to get the parent distribution
    p(a0, a1, b, c0, c1), builds the explicit bilocal model from it and
    re-evaluates the model.

    Raises:
        PreconditionError: if some block does not commute.
        ConstructionInapplicableError: if the parent's outer marginals are
            correlated, which a bilocality scenario cannot produce.
    """
    angles = np.concatenate([f.thetas, f.phis])
    if np.max(np.abs(np.sin(angles))) > COMMUTING_BLOCK_TOL:
        raise PreconditionError("Every block angle must be 0 or π.", check='commuting',
                                deviation=float(np.max(np.abs(np.sin(angles)))))
    s = jordan_scenario(f)
    p = network_behavior(s)

    a0, a1, c0, c1 = jordan_observables(f)
    joint = NetworkScenario(
        (PartyDescriptor('A', 1, 4), s.party('B'), PartyDescriptor('C', 1, 4)),
        s.sources, s.states,
        {'A': (joint_povm(a0, a1),), 'B': s.measurements['B'], 'C': (joint_povm(c0, c1),)},
    )
    parent = network_behavior(joint).table[0, 0, 0].reshape(2, 2, 4, 2, 2)

    model = bilocal_model_from_parent(parent, p.parties)
    roundtrip = evaluate_bilocal_model(model, p.names).max_difference(p)
    score = bilocality_score(p)
    logger.info(f"Commuting family: S = {score.s_value:.12f}, bilocal roundtrip error {roundtrip:.2e}.")
    return CommutingDemo(p, model, score, roundtrip, parent)


def sweep_block_solutions(n: int = 10_000, seed: int = 0) -> pd.DataFrame:
    """
    Classifies n triples (θ, φ, 2Re r) that satisfy the unit constraint,
    drawn from the three solution families in turn and cycling over b.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n):
        b = i % 4
        sign = BLOCK_SIGNS[b]
        family = i % 3
        if family == 0:
            theta = phi = rng.uniform(0.0, 2 * np.pi)
            two_re_r = sign
        elif family == 1:
            theta = rng.uniform(0.0, 2 * np.pi)
            phi = (2 * np.pi - theta) % (2 * np.pi)
            two_re_r = -sign
        else:
            theta = phi = float(rng.choice([0.0, np.pi]))
            two_re_r = rng.uniform(-1.0, 1.0)
        rows.append({
            'family': family, 'b': b, 'theta': theta, 'phi': phi, 'two_re_r': two_re_r,
            'case': classify_block_solution(theta, phi, two_re_r, b),
        })
    frame = pd.DataFrame(rows)
    logger.info(f"Block sweep over {n} triples: {frame['case'].value_counts().to_dict()}.")
    return frame
