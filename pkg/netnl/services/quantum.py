# netnl/services/quantum.py
"""
Quantum Network Scenario Service Module.

Builds quantum network scenarios (sources distributing density matrices,
parties measuring POVMs on the subsystems they receive) and evaluates them:
the network behavior p(outputs|inputs) and the states steered on the outer
parties by an outcome of the middle party.

Subsystem layout: sources are tensored in declaration order, each source's
endpoints in declaration order. Before evaluation the global state is
permuted into party-grouped order (parties in declaration order, each
party's subsystems in source order), so for the bilocality network the
order is (A, B1, B2, C).

Bell-state measurement labeling: outcome b = 2*b1 + b2 with
b=0 ↔ Φ⁺, b=1 ↔ Ψ⁺, b=2 ↔ Φ⁻, b=3 ↔ Ψ⁻.
"""

import logging
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np

from ..core.constants import (
    DICHOTOMIC_TOL,
    PROBABILITY_FLOOR,
    STRUCTURAL_TOL,
)
from ..core.exceptions import (
    DimensionError,
    PreconditionError,
    UndefinedConditionalError,
)
from . import linalg
from .behaviors import NetworkBehavior, PartyDescriptor, validate_behavior

logger = logging.getLogger(__name__)

_PAULI = {
    'x': np.array([[0, 1], [1, 0]], dtype=complex),
    'y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'z': np.array([[1, 0], [0, -1]], dtype=complex),
}


def _frozen(m) -> np.ndarray:
    arr = np.array(m, dtype=complex)
    arr.setflags(write=False)
    return arr


# --- Domain Types ---

@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator."""
    matrix: np.ndarray

    def __post_init__(self):
        m = linalg.as_cmat(self.matrix, 'density matrix')
        if m.shape[0] != m.shape[1]:
            raise DimensionError("Density matrix must be square.", actual=m.shape)
        trace_defect = abs(np.trace(m) - 1.0)
        if trace_defect > STRUCTURAL_TOL:
            raise PreconditionError("Density matrix must have unit trace.", check='trace',
                                    deviation=float(trace_defect))
        lowest = linalg.hermitian_eigen(m, tol=STRUCTURAL_TOL).min_eigenvalue
        if lowest < -STRUCTURAL_TOL:
            raise PreconditionError("Density matrix must be positive semidefinite.", check='psd',
                                    deviation=lowest)
        object.__setattr__(self, 'matrix', _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_pure(cls, psi) -> 'DensityMatrix':
        vec = linalg.as_cmat(psi, 'state vector').reshape(-1)
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > STRUCTURAL_TOL:
            raise PreconditionError("State vector must have unit norm.", check='norm',
                                    deviation=float(abs(norm - 1.0)))
        return cls(linalg.projector(vec))

    @classmethod
    def maximally_mixed(cls, dim: int) -> 'DensityMatrix':
        return cls(np.eye(dim, dtype=complex) / dim)


@dataclass(frozen=True, eq=False)
class Povm:
    """Finite list of PSD effects summing to the identity."""
    effects: Tuple[np.ndarray, ...]
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        effects = tuple(linalg.as_cmat(e, 'POVM effect') for e in self.effects)
        if not effects:
            raise DimensionError("A POVM needs at least one effect.")
        dim = effects[0].shape[0]
        for e in effects:
            if e.shape != (dim, dim):
                raise DimensionError("All POVM effects must be square and of equal size.",
                                     expected=(dim, dim), actual=e.shape)
            lowest = linalg.hermitian_eigen(e, tol=STRUCTURAL_TOL).min_eigenvalue
            if lowest < -STRUCTURAL_TOL:
                raise PreconditionError("POVM effect is not positive semidefinite.", check='psd',
                                        deviation=lowest)
        completeness = linalg.max_norm(sum(effects) - np.eye(dim))
        if completeness > STRUCTURAL_TOL:
            raise PreconditionError("POVM effects do not sum to the identity.", check='completeness',
                                    deviation=completeness)
        labels = tuple(self.labels) or tuple(str(i) for i in range(len(effects)))
        if len(labels) != len(effects):
            raise DimensionError("One label per effect is required.",
                                 expected=len(effects), actual=len(labels))
        object.__setattr__(self, 'effects', tuple(_frozen(e) for e in effects))
        object.__setattr__(self, 'labels', labels)

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.effects)

    def stacked(self) -> np.ndarray:
        return np.stack(self.effects)


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian observable with eigenvalues ±1."""
    matrix: np.ndarray

    def __post_init__(self):
        m = linalg.as_cmat(self.matrix, 'observable')
        if m.shape[0] != m.shape[1]:
            raise DimensionError("Observable must be square.", actual=m.shape)
        defect = linalg.hermiticity_defect(m)
        if defect > STRUCTURAL_TOL:
            raise PreconditionError("Observable is not Hermitian.", check='hermitian', deviation=defect)
        square_defect = linalg.max_norm(m @ m - np.eye(m.shape[0]))
        if square_defect > DICHOTOMIC_TOL:
            raise PreconditionError("Observable does not square to the identity.", check='dichotomic',
                                    deviation=square_defect)
        object.__setattr__(self, 'matrix', _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class Source:
    """A source feeding `parties[i]` a subsystem of dimension `dims[i]`."""
    name: str
    parties: Tuple[str, ...]
    dims: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'parties', tuple(self.parties))
        object.__setattr__(self, 'dims', tuple(int(d) for d in self.dims))
        if len(self.parties) != len(self.dims) or not self.parties:
            raise DimensionError(f"Source '{self.name}' needs one dimension per endpoint.",
                                 expected=len(self.parties), actual=len(self.dims))

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))


@dataclass(frozen=True, eq=False)
class NetworkScenario:
    """
    Parties, sources with their states, and one POVM per (party, input).
    `measurements[name][x]` is the POVM of party `name` at input x.
    """
    parties: Tuple[PartyDescriptor, ...]
    sources: Tuple[Source, ...]
    states: Tuple[DensityMatrix, ...]
    measurements: Mapping[str, Tuple[Povm, ...]] = field(default_factory=dict)

    def __post_init__(self):
        parties = tuple(self.parties)
        sources = tuple(self.sources)
        states = tuple(self.states)
        object.__setattr__(self, 'parties', parties)
        object.__setattr__(self, 'sources', sources)
        object.__setattr__(self, 'states', states)
        object.__setattr__(self, 'measurements',
                           MappingProxyType({k: tuple(v) for k, v in self.measurements.items()}))

        names = [p.name for p in parties]
        if len(states) != len(sources):
            raise DimensionError("One state per source is required.", expected=len(sources), actual=len(states))
        for source, state in zip(sources, states):
            unknown = [q for q in source.parties if q not in names]
            if unknown:
                raise DimensionError(f"Source '{source.name}' feeds unknown parties {unknown}.")
            if state.dim != source.dim:
                raise DimensionError(f"State of source '{source.name}' has the wrong dimension.",
                                     expected=source.dim, actual=state.dim)
        for party in parties:
            povms = self.measurements.get(party.name)
            if povms is None or len(povms) != party.inputs:
                raise DimensionError(f"Party '{party.name}' needs one POVM per input.",
                                     expected=party.inputs, actual=0 if povms is None else len(povms))
            dims = self.party_dims(party.name)
            if not dims:
                raise DimensionError(f"Party '{party.name}' receives no subsystem.")
            local_dim = int(np.prod(dims))
            for x, povm in enumerate(povms):
                if povm.dim != local_dim:
                    raise DimensionError(
                        f"POVM of '{party.name}' at input {x} does not act on its incoming subsystems.",
                        expected=local_dim, actual=povm.dim,
                    )
                if povm.n_outcomes != party.outputs:
                    raise DimensionError(f"POVM of '{party.name}' at input {x} has the wrong outcome count.",
                                         expected=party.outputs, actual=povm.n_outcomes)

    def party(self, name: str) -> PartyDescriptor:
        for p in self.parties:
            if p.name == name:
                return p
        raise DimensionError(f"Unknown party '{name}'.")

    def subsystems(self) -> Tuple[Tuple[str, int], ...]:
        """(party, dimension) per subsystem in source order."""
        return tuple((q, d) for s in self.sources for q, d in zip(s.parties, s.dims))

    def party_dims(self, name: str) -> Tuple[int, ...]:
        return tuple(d for q, d in self.subsystems() if q == name)

    def party_order(self) -> Tuple[int, ...]:
        """Permutation from source order to party-grouped order."""
        layout = self.subsystems()
        return tuple(i for p in self.parties for i, (q, _) in enumerate(layout) if q == p.name)


# --- Ingredients ---

def pauli(axis: str) -> Observable:
    try:
        return Observable(_PAULI[axis.lower()])
    except KeyError:
        raise PreconditionError(f"Unknown Pauli axis '{axis}'.", check='axis') from None


def bell_state(b1: int, b2: int) -> np.ndarray:
    """(|0,b2⟩ + (−1)^b1 |1,1−b2⟩)/√2 as a 4×1 column vector."""
    vec = np.zeros(4, dtype=complex)
    vec[b2] = 1.0
    vec[2 + (1 - b2)] = (-1.0) ** b1
    return (vec / np.sqrt(2)).reshape(4, 1)


def bell_projector(b: int) -> np.ndarray:
    return linalg.projector(bell_state(b >> 1, b & 1))


def bsm_povm() -> Povm:
    """Projective Bell-state measurement, outcome b = 2*b1 + b2."""
    return Povm(tuple(bell_projector(b) for b in range(4)), labels=('00', '01', '10', '11'))


def observable_to_povm(o) -> Povm:
    """{(I+O)/2, (I−O)/2}: outcome 0 ↔ eigenvalue +1, outcome 1 ↔ eigenvalue −1."""
    obs = o if isinstance(o, Observable) else Observable(o)
    identity = np.eye(obs.dim)
    return Povm(((identity + obs.matrix) / 2, (identity - obs.matrix) / 2))


def povm_to_observable(povm: Povm) -> Observable:
    if povm.n_outcomes != 2:
        raise PreconditionError("Only two-outcome POVMs define a ±1 observable.", check='outcomes')
    return Observable(povm.effects[0] - povm.effects[1])


def joint_povm(o0: Observable, o1: Observable) -> Povm:
    """
    Joint measurement of two commuting observables; outcome index 2*a0 + a1.

    Raises:
        PreconditionError: if the observables do not commute.
    """
    commutator = linalg.max_norm(o0.matrix @ o1.matrix - o1.matrix @ o0.matrix)
    if commutator > DICHOTOMIC_TOL:
        raise PreconditionError("Observables do not commute.", check='commuting', deviation=commutator)
    first = observable_to_povm(o0).effects
    second = observable_to_povm(o1).effects
    return Povm(tuple(first[a0] @ second[a1] for a0 in range(2) for a1 in range(2)))


def mix_states(rho: DensityMatrix, sigma: DensityMatrix, weight: float) -> DensityMatrix:
    """weight·ρ + (1 − weight)·σ."""
    if rho.dim != sigma.dim:
        raise DimensionError("Mixed states must have equal dimension.", expected=rho.dim, actual=sigma.dim)
    return DensityMatrix(weight * rho.matrix + (1.0 - weight) * sigma.matrix)


def with_source_noise(s: NetworkScenario, noise: float) -> NetworkScenario:
    """Replaces every source state ρ by (1 − noise)·ρ + noise·1/d."""
    if not 0.0 <= noise <= 1.0:
        raise PreconditionError(f"Noise weight {noise} outside [0, 1].", check='noise')
    states = tuple(mix_states(st, DensityMatrix.maximally_mixed(st.dim), 1.0 - noise) for st in s.states)
    return NetworkScenario(s.parties, s.sources, states, dict(s.measurements))


# --- Evaluation ---

def global_state(s: NetworkScenario, cap: Optional[int] = None) -> Tuple[np.ndarray, Tuple[int, ...]]:
    """Global density matrix in party-grouped order and the per-party dimensions."""
    rho = linalg.kron_all([st.matrix for st in s.states], cap=cap)
    layout = s.subsystems()
    dims = [d for _, d in layout]
    rho = linalg.permute_subsystems(rho, dims, s.party_order())
    party_dims = tuple(int(np.prod(s.party_dims(p.name))) for p in s.parties)
    return rho, party_dims


def network_behavior(s: NetworkScenario, cap: Optional[int] = None) -> NetworkBehavior:
    """
    p(outputs|inputs) = Tr[(⊗_k M^k_{o_k|x_k}) (⊗_sources ρ_s)].

    Raises:
        DimensionError: if the global state exceeds the tensor-product cap.
    """
    rho, party_dims = global_state(s, cap=cap)
    n = len(s.parties)
    rho_tensor = rho.reshape(party_dims + party_dims)

    operands = []
    for k, party in enumerate(s.parties):
        effects = np.stack([povm.stacked() for povm in s.measurements[party.name]])
        operands += [effects, [k, n + k, 2 * n + k, 3 * n + k]]
    operands += [rho_tensor, [3 * n + k for k in range(n)] + [2 * n + k for k in range(n)]]
    raw = np.einsum(*operands, list(range(2 * n)), optimize=True)

    imag = float(np.max(np.abs(raw.imag))) if raw.size else 0.0
    if imag > STRUCTURAL_TOL:
        logger.warning(f"Behavior has imaginary residue {imag:.3e}.")
    table = np.clip(raw.real, 0.0, 1.0)
    behavior = NetworkBehavior(s.parties, table)
    validate_behavior(behavior, STRUCTURAL_TOL)
    logger.debug(f"Evaluated network behavior with shape {table.shape}.")
    return behavior


def reduced_state(s: NetworkScenario, party: str, cap: Optional[int] = None) -> DensityMatrix:
    """State of one party's subsystems (source marginal for single-source parties)."""
    rho, party_dims = global_state(s, cap=cap)
    k = [p.name for p in s.parties].index(party)
    reduced = linalg.partial_trace(rho, party_dims, keep=[k])
    return DensityMatrix((reduced + reduced.conj().T) / 2)


def source_marginal(s: NetworkScenario, source: str, party: str) -> DensityMatrix:
    """State of the subsystem `source` sends to `party` (e.g. ρ_A from S_AB)."""
    for src, state in zip(s.sources, s.states):
        if src.name != source:
            continue
        if party not in src.parties:
            raise DimensionError(f"Source '{source}' does not feed party '{party}'.")
        keep = [i for i, q in enumerate(src.parties) if q == party]
        reduced = linalg.partial_trace(state.matrix, list(src.dims), keep=keep)
        return DensityMatrix((reduced + reduced.conj().T) / 2)
    raise DimensionError(f"Unknown source '{source}'.")


def steered_state(
    s: NetworkScenario,
    b: int,
    y: int = 0,
    party: str = 'B',
    cap: Optional[int] = None,
) -> Tuple[float, DensityMatrix]:
    """
    Probability of outcome `b` of `party` at input `y` and the normalized
    state it prepares on the remaining parties (in party order).

    Raises:
        UndefinedConditionalError: if the outcome has zero probability.
    """
    rho, party_dims = global_state(s, cap=cap)
    names = [p.name for p in s.parties]
    k = names.index(party)
    effect = s.measurements[party][y].effects[b]
    factors = [effect if j == k else np.eye(d) for j, d in enumerate(party_dims)]
    embedded = linalg.kron_all(factors, cap=max(rho.size, cap or 0))
    keep = [j for j in range(len(names)) if j != k]
    unnormalized = linalg.partial_trace(embedded @ rho, party_dims, keep=keep)
    probability = float(np.trace(unnormalized).real)
    if probability <= PROBABILITY_FLOOR:
        raise UndefinedConditionalError(
            f"Steered state undefined: outcome b={b} of '{party}' has zero probability.",
            outcome=b, probability=probability,
        )
    state = unnormalized / probability
    return probability, DensityMatrix((state + state.conj().T) / 2)


def mixture_defect(s: NetworkScenario, party: str = 'B', y: int = 0) -> float:
    """max-norm of Σ_b p(b)ϱ_b − ⊗_{other parties} ρ_party."""
    names = [p.name for p in s.parties]
    others = [n for n in names if n != party]
    total = None
    for b in range(s.party(party).outputs):
        try:
            weight, state = steered_state(s, b, y=y, party=party)
        except UndefinedConditionalError:
            continue
        term = weight * state.matrix
        total = term if total is None else total + term
    product = linalg.kron_all([reduced_state(s, n).matrix for n in others])
    return linalg.max_norm(total - product)


# --- Scenarios ---

def _bilocality_scenario(
    alice: Sequence[Povm],
    bob: Sequence[Povm],
    charlie: Sequence[Povm],
    rho_ab: DensityMatrix,
    rho_bc: DensityMatrix,
    alice_dim: int = 2,
    charlie_dim: int = 2,
) -> NetworkScenario:
    parties = (
        PartyDescriptor('A', len(alice), alice[0].n_outcomes),
        PartyDescriptor('B', len(bob), bob[0].n_outcomes),
        PartyDescriptor('C', len(charlie), charlie[0].n_outcomes),
    )
    sources = (
        Source('S_AB', ('A', 'B'), (alice_dim, 2)),
        Source('S_BC', ('B', 'C'), (2, charlie_dim)),
    )
    return NetworkScenario(parties, sources, (rho_ab, rho_bc),
                           {'A': tuple(alice), 'B': tuple(bob), 'C': tuple(charlie)})


def phi_plus() -> DensityMatrix:
    return DensityMatrix(bell_projector(0))


def reference_observables() -> Tuple[Observable, Observable]:
    """(σx+σz)/√2 and (σx−σz)/√2, used by both Alice and Charlie."""
    x, z = _PAULI['x'], _PAULI['z']
    return Observable((x + z) / np.sqrt(2)), Observable((x - z) / np.sqrt(2))


def reference_experiment() -> NetworkScenario:
    """Both sources Φ⁺, Bob performs the Bell-state measurement without input."""
    a0, a1 = reference_observables()
    outer = (observable_to_povm(a0), observable_to_povm(a1))
    return _bilocality_scenario(outer, (bsm_povm(),), outer, phi_plus(), phi_plus())


def swap_event_ready_experiment() -> NetworkScenario:
    """Alice measures σz, σx; Charlie (σz±σx)/√2; sources Φ⁺; Bob the BSM."""
    x, z = _PAULI['x'], _PAULI['z']
    alice = (observable_to_povm(z), observable_to_povm(x))
    charlie = (observable_to_povm((z + x) / np.sqrt(2)), observable_to_povm((z - x) / np.sqrt(2)))
    return _bilocality_scenario(alice, (bsm_povm(),), charlie, phi_plus(), phi_plus())


def with_observables(
    alice: Sequence[Observable],
    charlie: Sequence[Observable],
    rho_ab: Optional[DensityMatrix] = None,
    rho_bc: Optional[DensityMatrix] = None,
) -> NetworkScenario:
    """Bilocality scenario with Bob's BSM and the given ±1 observables."""
    rho_ab = rho_ab or phi_plus()
    rho_bc = rho_bc or phi_plus()
    alice_dim = alice[0].dim
    charlie_dim = charlie[0].dim
    return _bilocality_scenario(
        tuple(observable_to_povm(o) for o in alice), (bsm_povm(),),
        tuple(observable_to_povm(o) for o in charlie), rho_ab, rho_bc,
        alice_dim=alice_dim, charlie_dim=charlie_dim,
    )


def junk_augmented_experiment(junk: Optional[DensityMatrix] = None) -> NetworkScenario:
    """
    Reference experiment with an ancilla A'' on Alice's side. Source S_AB
    emits τ ⊗ Φ⁺ in order (A'', A', B1) and Alice measures 1 ⊗ A_x.
    """
    junk = junk or DensityMatrix(np.array([[0.6, 0.2], [0.2, 0.4]]))
    a0, a1 = reference_observables()
    identity = np.eye(junk.dim)
    alice = (Observable(np.kron(identity, a0.matrix)), Observable(np.kron(identity, a1.matrix)))
    rho_ab = DensityMatrix(np.kron(junk.matrix, bell_projector(0)))
    return with_observables(alice, (a0, a1), rho_ab=rho_ab)


def outer_observables(s: NetworkScenario, party: str) -> Tuple[Observable, ...]:
    return tuple(povm_to_observable(povm) for povm in s.measurements[party])
