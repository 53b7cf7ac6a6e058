# netnl/services/classical.py
"""
Classical Model Classification Service Module.

Decides Bell locality of a network behavior with a local-polytope LP over
deterministic strategies, evaluates CHSH and the bilocality score, and
builds explicit bilocal models: the no-input construction
p(a,b,c) = p(a)p(c)p(b|a,c) and its lift through a Fine parent distribution
to behaviors with inputs.

Strategy order: party-major (first party most significant), and within a
party the response tuple is read lexicographically with input 0 most
significant. A certificate's weights and a parent distribution therefore
share one flat index.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..config import Config
from ..core.constants import (
    INDEPENDENCE_TOL,
    LP_FEASIBILITY_TOL,
    PROBABILITY_FLOOR,
)
from ..core.exceptions import CapacityError, ConstructionInapplicableError, ContractError
from ..core.models import BilocalityScore, BilocalModel, LocalityCertificate
from .behaviors import NetworkBehavior, PartyDescriptor, correlator, deterministic_behavior
from .simplex import solve_phase_one

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DeterministicStrategy:
    """One response table per party: responses[k][x] is party k's output on input x."""
    responses: Tuple[Tuple[int, ...], ...]

    def behavior(self, parties: Sequence[PartyDescriptor]) -> NetworkBehavior:
        return deterministic_behavior(parties, self.responses)


# --- Strategy Enumeration ---

def _party_strategy_count(party: PartyDescriptor) -> int:
    return party.outputs ** party.inputs


def strategy_count(parties: Sequence[PartyDescriptor]) -> int:
    return int(np.prod([_party_strategy_count(q) for q in parties], dtype=object))


def _check_cap(parties: Sequence[PartyDescriptor], cap: Optional[int]) -> int:
    cap = Config.STRATEGY_CAP if cap is None else cap
    count = strategy_count(parties)
    if count > cap:
        raise CapacityError(
            f"{count} deterministic strategies exceed the cap of {cap}.",
            required=count, cap=cap,
        )
    return count


def enumerate_strategies(parties: Sequence[PartyDescriptor], cap: Optional[int] = None) -> Iterator[DeterministicStrategy]:
    """
    Yields every deterministic strategy in certificate index order.

    Raises:
        CapacityError: if the strategy count exceeds `cap`.
    """
    _check_cap(parties, cap)
    per_party = [list(itertools.product(range(q.outputs), repeat=q.inputs)) for q in parties]
    for combo in itertools.product(*per_party):
        yield DeterministicStrategy(tuple(combo))


def response_one_hot(party: PartyDescriptor) -> np.ndarray:
    """O[s, x, a] = 1 iff the party's s-th response table answers a on input x."""
    responses = np.array(list(itertools.product(range(party.outputs), repeat=party.inputs)), dtype=int)
    responses = responses.reshape(-1, party.inputs)
    one_hot = np.zeros((responses.shape[0], party.inputs, party.outputs))
    s_idx, x_idx = np.meshgrid(np.arange(responses.shape[0]), np.arange(party.inputs), indexing='ij')
    one_hot[s_idx, x_idx, responses] = 1.0
    return one_hot


def strategy_matrix(parties: Sequence[PartyDescriptor], cap: Optional[int] = None) -> np.ndarray:
    """Rows are deterministic behaviors (flattened tables) in certificate index order."""
    count = _check_cap(parties, cap)
    n = len(parties)
    operands = []
    for k, party in enumerate(parties):
        operands += [response_one_hot(party), [k, n + k, 2 * n + k]]
    table = np.einsum(*operands, list(range(3 * n)))
    return table.reshape(count, -1)


def _descriptor_tuples(parties: Sequence[PartyDescriptor]) -> Tuple[Tuple[str, int, int], ...]:
    return tuple((q.name, q.inputs, q.outputs) for q in parties)


def _descriptors(cert: LocalityCertificate) -> Tuple[PartyDescriptor, ...]:
    return tuple(PartyDescriptor(n, i, o) for n, i, o in cert.parties)


# --- Bell Locality ---

def is_bell_local(
    p: NetworkBehavior,
    cap: Optional[int] = None,
    backend: Optional[str] = None,
    tol: float = LP_FEASIBILITY_TOL,
) -> LocalityCertificate:
    """
    Local-polytope membership as a phase-1 LP: find λ ≥ 0 with
    Σ_j λ_j d_j = p and Σ_j λ_j = 1.

    Feasible certificates carry normalized weights and the reconstruction
    residual. Infeasible ones carry the Farkas witness w and its gap
    ⟨w, p⟩ − max_j ⟨w, d_j⟩.

    Raises:
        CapacityError: if the strategy count exceeds the cap.
        SolverError: on numerical failure of the LP.
    """
    d = strategy_matrix(p.parties, cap)
    target = p.table.ravel()
    n_entries = target.size
    a = np.vstack([d.T, np.ones((1, d.shape[0]))])
    b = np.concatenate([target, [1.0]])
    backend = backend or Config.LP_BACKEND

    result = solve_phase_one(a, b, backend=backend)
    feasible = result.objective <= tol
    parties = _descriptor_tuples(p.parties)

    if feasible:
        weights = np.clip(result.x, 0.0, None)
        weights = weights / weights.sum()
        residual = float(np.max(np.abs(d.T @ weights - target)))
        logger.info(f"Behavior over {p.names} is Bell-local ({d.shape[0]} strategies, residual {residual:.2e}).")
        return LocalityCertificate(
            feasible=True, residual=residual, objective=result.objective,
            strategy_count=d.shape[0], parties=parties, backend=result.backend,
            iterations=result.iterations, weights=weights,
        )

    witness = result.y[:n_entries]
    gap = float(witness @ target - np.max(d @ witness))
    logger.info(f"Behavior over {p.names} is not Bell-local (objective {result.objective:.3e}, witness gap {gap:.3e}).")
    return LocalityCertificate(
        feasible=False, residual=result.objective, objective=result.objective,
        strategy_count=d.shape[0], parties=parties, backend=result.backend,
        iterations=result.iterations, witness=witness, witness_gap=gap,
    )


def chsh(p: NetworkBehavior) -> float:
    """
    max over relabelings of |E00 + E01 + E10 + E11 − 2 E_k|.

    Raises:
        ContractError: unless p is bipartite with binary inputs and outputs.
    """
    if p.n_parties != 2 or p.input_shape != (2, 2) or p.output_shape != (2, 2):
        raise ContractError("CHSH needs a bipartite behavior with binary inputs and outputs.",
                            operation='chsh')
    e = np.array([correlator(p, x, z) for x in range(2) for z in range(2)])
    return float(np.max(np.abs(e.sum() - 2.0 * e)))


def chsh_facet_local(p: NetworkBehavior, tol: float = 1e-9) -> bool:
    """Brute-force membership for the CHSH scenario: positivity and all eight facets."""
    return bool(np.min(p.table) >= -tol and chsh(p) <= 2.0 + tol)


# --- Bilocality ---

def _check_bilocality_shape(p: NetworkBehavior, operation: str) -> None:
    if p.n_parties != 3 or p.input_shape != (2, 1, 2) or p.output_shape != (2, 4, 2):
        raise ContractError(
            "Expected A and C with binary inputs/outputs and B with no input and four outcomes.",
            operation=operation,
        )


def bilocality_score(p: NetworkBehavior) -> BilocalityScore:
    """
    I = ¼ Σ ⟨A_x B⁰ C_z⟩ and J = ¼ Σ (−1)^(x+z) ⟨A_x B¹ C_z⟩ with
    B⁰ = (−1)^b1, B¹ = (−1)^b2 for b = 2·b1 + b2.
    """
    _check_bilocality_shape(p, 'bilocality_score')

    def b_zero(b):
        return (-1.0) ** (b >> 1)

    def b_one(b):
        return (-1.0) ** (b & 1)

    i_value = sum(correlator(p, x, z, b_zero) for x in range(2) for z in range(2)) / 4.0
    j_value = sum((-1.0) ** (x + z) * correlator(p, x, z, b_one) for x in range(2) for z in range(2)) / 4.0
    return BilocalityScore(float(i_value), float(j_value))


def evaluate_bilocal_model(m: BilocalModel, names: Sequence[str] = ('A', 'B', 'C')) -> NetworkBehavior:
    """p(abc|xyz) = Σ_{λ,μ} p(λ) q(μ) p(a|x,λ) p(b|y,λ,μ) p(c|z,μ)."""
    table = np.einsum('l,m,xla,ylmb,zmc->xyzabc', m.p_lambda, m.q_mu, m.alice, m.bob, m.charlie)
    parties = tuple(PartyDescriptor(name, n_in, n_out) for name, (n_in, n_out) in zip(names, m.shape))
    return NetworkBehavior(parties, table)


def bilocal_model_no_input(p: NetworkBehavior, tol: float = INDEPENDENCE_TOL) -> BilocalModel:
    """
    λ ~ p(a) with Alice answering λ, μ ~ p(c) with Charlie answering μ,
    and Bob answering from p(b | a=λ, c=μ).

    Raises:
        ContractError: if some party has an input or p is not tripartite.
        ConstructionInapplicableError: if p(a,c) ≠ p(a)p(c) beyond `tol`.
    """
    if p.n_parties != 3 or p.input_shape != (1, 1, 1):
        raise ContractError("The no-input bilocal construction needs three parties without inputs.",
                            operation='bilocal_model_no_input')
    joint = p.table[0, 0, 0]
    p_ac = joint.sum(axis=1)
    p_a = p_ac.sum(axis=1)
    p_c = p_ac.sum(axis=0)
    dependence = float(np.max(np.abs(p_ac - np.outer(p_a, p_c))))
    if dependence > tol:
        raise ConstructionInapplicableError(
            "Alice's and Charlie's outputs are correlated; p(a,c) does not factorize.",
            construction='bilocal_model_no_input', deviation=dependence,
        )

    n_a, n_b, n_c = joint.shape
    defined = p_ac > PROBABILITY_FLOOR
    safe = np.where(defined, p_ac, 1.0)
    bob = np.where(defined[:, None, :], joint / safe[:, None, :], 1.0 / n_b)
    bob = bob.transpose(0, 2, 1)
    logger.debug(f"Built no-input bilocal model with |λ|={n_a}, |μ|={n_c} (dependence {dependence:.2e}).")
    return BilocalModel(
        p_lambda=np.clip(p_a, 0.0, None) / p_a.sum(),
        q_mu=np.clip(p_c, 0.0, None) / p_c.sum(),
        alice=np.eye(n_a)[None, :, :],
        bob=bob[None, :, :, :],
        charlie=np.eye(n_c)[None, :, :],
    )


def random_bilocal_model(
    rng: np.random.Generator,
    n_lambda: int = 3,
    n_mu: int = 3,
    shape: Tuple[Tuple[int, int], ...] = ((2, 2), (1, 4), (2, 2)),
) -> BilocalModel:
    """Random finite model with Dirichlet-distributed sources and responses."""
    (xa, oa), (yb, ob), (zc, oc) = shape
    return BilocalModel(
        p_lambda=rng.dirichlet(np.ones(n_lambda)),
        q_mu=rng.dirichlet(np.ones(n_mu)),
        alice=rng.dirichlet(np.ones(oa), size=(xa, n_lambda)),
        bob=rng.dirichlet(np.ones(ob), size=(yb, n_lambda, n_mu)),
        charlie=rng.dirichlet(np.ones(oc), size=(zc, n_mu)),
    )


# --- Fine Parent Distribution ---

def fine_parent(cert: LocalityCertificate) -> np.ndarray:
    """
    Joint distribution over every party's full response tuple, e.g.
    p(a0, a1, b, c0, c1) with shape (2, 2, 4, 2, 2) for the reference scenario.

    Raises:
        ContractError: if the certificate is infeasible.
    """
    if not cert.feasible or cert.weights is None:
        raise ContractError("A Fine parent exists only for feasible certificates.", operation='fine_parent')
    shape = tuple(o for _, n_in, o in cert.parties for _ in range(n_in))
    return cert.weights.reshape(shape)


def parent_to_behavior(parent: np.ndarray, parties: Sequence[PartyDescriptor]) -> NetworkBehavior:
    """No-input behavior whose outcome for party k is its whole response tuple (flat index)."""
    coarse = tuple(PartyDescriptor(q.name, 1, _party_strategy_count(q)) for q in parties)
    table = np.asarray(parent, dtype=float).reshape((1,) * len(coarse) + tuple(q.outputs for q in coarse))
    return NetworkBehavior(coarse, table)


def behavior_from_parent(parent: np.ndarray, parties: Sequence[PartyDescriptor]) -> NetworkBehavior:
    """Selects a_x, b_y, c_z from the parent for every input tuple."""
    n = len(parties)
    weights = np.asarray(parent, dtype=float).reshape(tuple(_party_strategy_count(q) for q in parties))
    operands = [weights, list(range(n))]
    for k, party in enumerate(parties):
        operands += [response_one_hot(party), [k, n + k, 2 * n + k]]
    table = np.einsum(*operands, list(range(n, 3 * n)))
    return NetworkBehavior(tuple(parties), table)


def bilocal_model_from_parent(
    parent: np.ndarray,
    parties: Sequence[PartyDescriptor],
    tol: float = INDEPENDENCE_TOL,
) -> BilocalModel:
    """
    Builds the no-input model on the parent's response tuples, then lets
    each party output the entry of its tuple selected by its input.

    Raises:
        ConstructionInapplicableError: if Alice's and Charlie's response
            tuples are correlated in the parent.
    """
    parties = tuple(parties)
    if len(parties) != 3:
        raise ContractError("Bilocal models need exactly three parties.", operation='bilocal_model_from_parent')
    coarse = bilocal_model_no_input(parent_to_behavior(parent, parties), tol=tol)
    one_hot = [response_one_hot(q) for q in parties]
    return BilocalModel(
        p_lambda=coarse.p_lambda,
        q_mu=coarse.q_mu,
        alice=np.einsum('lk,kxa->xla', coarse.alice[0], one_hot[0]),
        bob=np.einsum('lmk,kyb->ylmb', coarse.bob[0], one_hot[1]),
        charlie=np.einsum('mk,kzc->zmc', coarse.charlie[0], one_hot[2]),
    )


def bilocal_model_from_certificate(cert: LocalityCertificate, tol: float = INDEPENDENCE_TOL) -> BilocalModel:
    return bilocal_model_from_parent(fine_parent(cert), _descriptors(cert), tol=tol)


def certificate_strategies(cert: LocalityCertificate, threshold: float = 1e-12) -> List[Tuple[float, DeterministicStrategy]]:
    """Weighted strategies in the certificate's support."""
    parties = _descriptors(cert)
    per_party = [list(itertools.product(range(q.outputs), repeat=q.inputs)) for q in parties]
    counts = tuple(len(s) for s in per_party)
    support = []
    for index, weight in cert.support(threshold).items():
        digits = np.unravel_index(index, counts)
        support.append((weight, DeterministicStrategy(tuple(per_party[k][d] for k, d in enumerate(digits)))))
    return support
