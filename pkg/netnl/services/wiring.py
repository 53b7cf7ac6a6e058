# netnl/services/wiring.py
"""
Quantum-Wirable Resource Service Module.

Sources distribute a classical share and a list of quantum boxes to their
two endpoints. Each party runs a local program that, step by step, picks
one of its unused terminals, feeds it an input computed from its history
(own input, visible shares, earlier terminal outputs) and finally computes
its output. Programs are compiled into finite decision trees, so adaptive
orderings are plain branches.

`evaluate_wired` sums exactly over share tuples and joint box-outcome
assignments; there is no sampling. A terminal a party never reaches is
evaluated at input 0, which is harmless because boxes are no-signaling.
"""

import itertools
import logging
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..config import Config
from ..core.constants import PROBABILITY_FLOOR, STRUCTURAL_TOL, WIRED_FORMAT_VERSION
from ..core.exceptions import (
    BehaviorValidationError,
    CapacityError,
    ContractError,
    DimensionError,
    DocumentFormatError,
    ProgramError,
)
from ..core.models import ConditionalVerdict, WitnessReport
from . import linalg
from .behaviors import (
    NetworkBehavior,
    PartyDescriptor,
    condition_on_b,
    outcome_weights,
    validate_behavior,
)
from .classical import chsh, is_bell_local
from .quantum import (
    DensityMatrix,
    NetworkScenario,
    Povm,
    Source,
    bell_projector,
    network_behavior,
    observable_to_povm,
    pauli,
)

logger = logging.getLogger(__name__)


# --- Resources ---

@dataclass(frozen=True)
class Terminal:
    """One side of one box: `side` 0 belongs to the source's first endpoint."""
    source: str
    box: int
    side: int


@dataclass(frozen=True, eq=False)
class BoxRealization:
    state: DensityMatrix
    left: Tuple[Povm, ...]
    right: Tuple[Povm, ...]


def _box_table(state: DensityMatrix, left: Sequence[Povm], right: Sequence[Povm]) -> np.ndarray:
    d_left, d_right = left[0].dim, right[0].dim
    if state.dim != d_left * d_right:
        raise DimensionError("Box state does not match the measured subsystems.",
                             expected=d_left * d_right, actual=state.dim)
    for povms in (left, right):
        if len({(p.dim, p.n_outcomes) for p in povms}) != 1:
            raise DimensionError("All POVMs on one side of a box need the same dimension and outcome count.")
    m_left = np.stack([p.stacked() for p in left])
    m_right = np.stack([p.stacked() for p in right])
    rho = state.matrix.reshape(d_left, d_right, d_left, d_right)
    raw = np.einsum('xaij,ybkl,jlik->xyab', m_left, m_right, rho)
    return np.clip(raw.real, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class QuantumBox:
    """p(α,β|X,Y) stored as table[X, Y, α, β], optionally with a quantum realization."""
    table: np.ndarray
    realization: Optional[BoxRealization] = None

    def __post_init__(self):
        table = np.array(self.table, dtype=float)
        if table.ndim != 4:
            raise DimensionError("Box table must have shape (X, Y, α, β).", actual=table.shape)
        as_behavior = NetworkBehavior(
            (PartyDescriptor('left', table.shape[0], table.shape[2]),
             PartyDescriptor('right', table.shape[1], table.shape[3])),
            table,
        )
        validate_behavior(as_behavior, STRUCTURAL_TOL)
        if self.realization is not None:
            expected = _box_table(self.realization.state, self.realization.left, self.realization.right)
            defect = linalg.max_norm(expected - table)
            if defect > STRUCTURAL_TOL:
                raise BehaviorValidationError("Box table does not match its realization.",
                                              location='realization', deviation=defect)
        table.setflags(write=False)
        object.__setattr__(self, 'table', table)

    @property
    def inputs(self) -> Tuple[int, int]:
        return self.table.shape[0], self.table.shape[1]

    @property
    def outputs(self) -> Tuple[int, int]:
        return self.table.shape[2], self.table.shape[3]

    def side_alphabet(self, side: int) -> Tuple[int, int]:
        """(input count, output count) of one side."""
        return self.table.shape[side], self.table.shape[2 + side]

    def as_behavior(self, names: Tuple[str, str] = ('left', 'right')) -> NetworkBehavior:
        return NetworkBehavior(
            (PartyDescriptor(names[0], self.inputs[0], self.outputs[0]),
             PartyDescriptor(names[1], self.inputs[1], self.outputs[1])),
            self.table,
        )


def quantum_box(sigma: DensityMatrix, povms_left: Sequence[Povm], povms_right: Sequence[Povm]) -> QuantumBox:
    """
    p(α,β|X,Y) = Tr[(N_{α|X} ⊗ N_{β|Y}) σ].

    Raises:
        DimensionError: if σ does not act on the two measured subsystems.
    """
    left, right = tuple(povms_left), tuple(povms_right)
    realization = BoxRealization(sigma, left, right)
    return QuantumBox(_box_table(sigma, left, right), realization)


def deterministic_box(left_responses: Sequence[int], right_responses: Sequence[int],
                      outputs: Tuple[int, int] = (2, 2)) -> QuantumBox:
    """Classical box answering left_responses[X] and right_responses[Y]."""
    table = np.zeros((len(left_responses), len(right_responses)) + tuple(outputs))
    for x, a in enumerate(left_responses):
        for y, b in enumerate(right_responses):
            table[x, y, a, b] = 1.0
    return QuantumBox(table)


def tsirelson_box() -> QuantumBox:
    """Φ⁺ with σz, σx on the left and (σz ± σx)/√2 on the right."""
    z, x = pauli('z').matrix, pauli('x').matrix
    left = (observable_to_povm(z), observable_to_povm(x))
    right = (observable_to_povm((z + x) / np.sqrt(2)), observable_to_povm((z - x) / np.sqrt(2)))
    return quantum_box(DensityMatrix(bell_projector(0)), left, right)


def _random_projective_qubit_povm(rng: np.random.Generator) -> Povm:
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, _ = np.linalg.qr(g)
    return Povm(tuple(linalg.projector(q[:, k]) for k in range(2)))


def random_quantum_box(rng: np.random.Generator, inputs: Tuple[int, int] = (2, 2)) -> QuantumBox:
    """Random mixed two-qubit state G G†/Tr with random projective qubit measurements."""
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    state = DensityMatrix((rho + rho.conj().T) / 2)
    left = tuple(_random_projective_qubit_povm(rng) for _ in range(inputs[0]))
    right = tuple(_random_projective_qubit_povm(rng) for _ in range(inputs[1]))
    return quantum_box(state, left, right)


@dataclass(frozen=True, eq=False)
class SourceResource:
    """
    Classical share with finite support plus the boxes delivered for each
    share value. `boxes_by_share[s]` lists the boxes emitted with share s;
    every share value carries the same number of boxes with equal alphabets.
    """
    name: str
    endpoints: Tuple[str, str]
    share_probs: np.ndarray
    boxes_by_share: Tuple[Tuple[QuantumBox, ...], ...] = ()

    def __post_init__(self):
        endpoints = tuple(self.endpoints)
        if len(endpoints) != 2 or endpoints[0] == endpoints[1]:
            raise DimensionError(f"Source '{self.name}' needs two distinct endpoints.", actual=endpoints)
        probs = np.array(self.share_probs, dtype=float).reshape(-1)
        if probs.size == 0 or np.any(probs < -STRUCTURAL_TOL) or abs(probs.sum() - 1.0) > STRUCTURAL_TOL:
            raise BehaviorValidationError(f"Share distribution of '{self.name}' is not normalized.",
                                          location=self.name)
        boxes = tuple(tuple(b) for b in self.boxes_by_share) or tuple(() for _ in probs)
        if len(boxes) != probs.size:
            raise DimensionError(f"Source '{self.name}' needs one box list per share value.",
                                 expected=probs.size, actual=len(boxes))
        shapes = {tuple(b.table.shape for b in family) for family in boxes}
        if len(shapes) != 1:
            raise DimensionError(f"Box families of '{self.name}' differ between share values.")
        probs.setflags(write=False)
        object.__setattr__(self, 'endpoints', endpoints)
        object.__setattr__(self, 'share_probs', probs)
        object.__setattr__(self, 'boxes_by_share', boxes)

    @classmethod
    def shared(cls, name: str, endpoints: Tuple[str, str], boxes: Sequence[QuantumBox],
               share_probs: Sequence[float] = (1.0,)) -> 'SourceResource':
        """Same boxes for every share value."""
        boxes = tuple(boxes)
        return cls(name, endpoints, np.asarray(share_probs, dtype=float), tuple(boxes for _ in share_probs))

    @property
    def support(self) -> int:
        return int(self.share_probs.size)

    @property
    def box_count(self) -> int:
        return len(self.boxes_by_share[0])

    def side_of(self, party: str) -> Optional[int]:
        return self.endpoints.index(party) if party in self.endpoints else None

    def box(self, share: int, index: int) -> QuantumBox:
        return self.boxes_by_share[share][index]


# --- Programs ---

@dataclass(frozen=True)
class Emit:
    output: int


@dataclass(frozen=True)
class Use:
    """Feed `box_input` to `terminal`, then continue with `branches[output]`."""
    terminal: Terminal
    box_input: int
    branches: Tuple['Node', ...]


Node = Union[Emit, Use]
Context = Tuple[int, Tuple[int, ...]]


@dataclass(frozen=True)
class History:
    """What a party knows at a step: its input, visible shares and earlier terminal results."""
    x: int
    shares: Tuple[int, ...]
    steps: Tuple[Tuple[Terminal, int, int], ...] = ()

    def output_of(self, terminal: Terminal) -> int:
        for used, _, out in self.steps:
            if used == terminal:
                return out
        raise KeyError(terminal)

    @property
    def used(self) -> Tuple[Terminal, ...]:
        return tuple(t for t, _, _ in self.steps)

    @property
    def last_output(self) -> int:
        if not self.steps:
            raise IndexError('no terminal has been used yet')
        return self.steps[-1][2]


@dataclass(frozen=True, eq=False)
class WiringProgram:
    """Decision tree per context (party input, visible shares in source order)."""
    party: str
    roots: Mapping[Context, Node] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'roots', MappingProxyType(dict(self.roots)))

    def terminals(self) -> Tuple[Terminal, ...]:
        found = []

        def visit(node):
            if isinstance(node, Use):
                if node.terminal not in found:
                    found.append(node.terminal)
                for child in node.branches:
                    visit(child)

        for root in self.roots.values():
            visit(root)
        return tuple(found)


def _party_terminals(sources: Sequence[SourceResource], party: str) -> Dict[Terminal, Tuple[int, int]]:
    """Every terminal delivered to `party` with its (input count, output count)."""
    terminals = {}
    for source in sources:
        side = source.side_of(party)
        if side is None:
            continue
        for index in range(source.box_count):
            terminals[Terminal(source.name, index, side)] = source.box(0, index).side_alphabet(side)
    return terminals


def _contexts(sources: Sequence[SourceResource], party: PartyDescriptor) -> List[Context]:
    supports = [range(s.support) for s in sources if s.side_of(party.name) is not None]
    return [(x, tuple(shares)) for x in range(party.inputs) for shares in itertools.product(*supports)]


def _validate_node(node: Node, party: PartyDescriptor, terminals: Mapping[Terminal, Tuple[int, int]],
                   used: Tuple[Terminal, ...]) -> None:
    step = len(used)
    if isinstance(node, Emit):
        if not 0 <= node.output < party.outputs:
            raise ProgramError(f"Output {node.output} out of range for '{party.name}'.",
                               party=party.name, step=step)
        return
    if not isinstance(node, Use):
        raise ProgramError(f"Unknown program node {node!r}.", party=party.name, step=step)
    terminal = node.terminal
    if terminal not in terminals:
        raise ProgramError(f"Terminal {terminal} is not delivered to '{party.name}'.",
                           party=party.name, step=step, terminal=terminal)
    if terminal in used:
        raise ProgramError(f"Terminal {terminal} is used twice.", party=party.name, step=step, terminal=terminal)
    n_in, n_out = terminals[terminal]
    if not 0 <= node.box_input < n_in:
        raise ProgramError(f"Box input {node.box_input} out of range.", party=party.name, step=step,
                           terminal=terminal)
    if len(node.branches) != n_out:
        raise ProgramError("One branch per terminal output is required.", party=party.name, step=step,
                           terminal=terminal)
    for child in node.branches:
        _validate_node(child, party, terminals, used + (terminal,))


def validate_program(program: WiringProgram, party: PartyDescriptor, sources: Sequence[SourceResource]) -> None:
    """
    Raises:
        ProgramError: on a missing context, a foreign or reused terminal, or
            an out-of-range input or output.
    """
    terminals = _party_terminals(sources, party.name)
    for context in _contexts(sources, party):
        if context not in program.roots:
            raise ProgramError(f"No program for context {context}.", party=party.name, step=0)
        _validate_node(program.roots[context], party, terminals, ())


def compile_program(
    sources: Sequence[SourceResource],
    party: PartyDescriptor,
    select: Callable[[History], Optional[Tuple[Terminal, int]]],
    output: Callable[[History], int],
) -> WiringProgram:
    """
    Builds the decision tree of a history-based program.

    `select(history)` returns the next (terminal, input) or None to stop;
    `output(history)` gives the party's output once it stops.

    Raises:
        ProgramError: naming the step at which a function read missing
            history or returned an invalid choice.
    """
    terminals = _party_terminals(sources, party.name)

    def build(history: History) -> Node:
        step = len(history.steps)
        try:
            choice = select(history)
            if choice is None:
                return Emit(int(output(history)))
        except (KeyError, IndexError) as e:
            raise ProgramError(f"Program of '{party.name}' referenced missing history: {e}",
                               party=party.name, step=step) from e
        terminal, box_input = choice
        if terminal not in terminals or terminal in history.used:
            raise ProgramError(f"Terminal {terminal} is unavailable at this step.",
                               party=party.name, step=step, terminal=terminal)
        n_out = terminals[terminal][1]
        branches = tuple(
            build(History(history.x, history.shares, history.steps + ((terminal, int(box_input), o),)))
            for o in range(n_out)
        )
        return Use(terminal, int(box_input), branches)

    roots = {context: build(History(context[0], context[1])) for context in _contexts(sources, party)}
    program = WiringProgram(party.name, roots)
    validate_program(program, party, sources)
    return program


# --- Wired Scenarios ---

@dataclass(frozen=True, eq=False)
class WiredScenario:
    parties: Tuple[PartyDescriptor, ...]
    sources: Tuple[SourceResource, ...]
    programs: Mapping[str, WiringProgram]

    def __post_init__(self):
        parties = tuple(self.parties)
        sources = tuple(self.sources)
        names = [p.name for p in parties]
        for source in sources:
            unknown = [q for q in source.endpoints if q not in names]
            if unknown:
                raise DimensionError(f"Source '{source.name}' feeds unknown parties {unknown}.")
        if len({s.name for s in sources}) != len(sources):
            raise DimensionError("Source names must be unique.")
        for party in parties:
            program = self.programs.get(party.name)
            if program is None:
                raise ProgramError(f"Party '{party.name}' has no program.", party=party.name)
            validate_program(program, party, sources)
        object.__setattr__(self, 'parties', parties)
        object.__setattr__(self, 'sources', sources)
        object.__setattr__(self, 'programs', MappingProxyType(dict(self.programs)))

    def assignment_count(self) -> int:
        shares = int(np.prod([s.support for s in self.sources]))
        outcomes = int(np.prod([int(np.prod(s.box(0, i).outputs)) for s in self.sources for i in range(s.box_count)]))
        return shares * outcomes


def _walk(node: Node, outcomes: Mapping[Terminal, int]) -> Tuple[int, Dict[Terminal, int]]:
    inputs = {}
    while isinstance(node, Use):
        inputs[node.terminal] = node.box_input
        node = node.branches[outcomes[node.terminal]]
    return node.output, inputs


def evaluate_wired(w: WiredScenario, cap: Optional[int] = None) -> NetworkBehavior:
    """
    Exact wired behavior: Σ over share tuples and joint box outcomes of
    p(shares) Π_boxes p(α,β|X,Y), with X, Y produced by the programs.

    Raises:
        CapacityError: if share tuples × outcome assignments exceed the cap.
    """
    cap = Config.ENUMERATION_CAP if cap is None else cap
    required = w.assignment_count()
    if required > cap:
        raise CapacityError(f"{required} share/outcome assignments exceed the cap of {cap}.",
                            required=required, cap=cap)

    box_slots = [(s_idx, i) for s_idx, s in enumerate(w.sources) for i in range(s.box_count)]
    slot_terminals = [
        (Terminal(w.sources[s].name, i, 0), Terminal(w.sources[s].name, i, 1)) for s, i in box_slots
    ]
    slot_outcomes = [
        list(itertools.product(*(range(n) for n in w.sources[s].box(0, i).outputs))) for s, i in box_slots
    ]
    visible = {
        p.name: [k for k, s in enumerate(w.sources) if s.side_of(p.name) is not None] for p in w.parties
    }
    own_terminals = {p.name: tuple(_party_terminals(w.sources, p.name)) for p in w.parties}
    walk_cache: Dict[Tuple, Tuple[int, Dict[Terminal, int]]] = {}

    def run(party: PartyDescriptor, context: Context, outcomes: Dict[Terminal, int]):
        key = (party.name, context, tuple(outcomes[t] for t in own_terminals[party.name]))
        if key not in walk_cache:
            walk_cache[key] = _walk(w.programs[party.name].roots[context], outcomes)
        return walk_cache[key]

    table = np.zeros(tuple(p.inputs for p in w.parties) + tuple(p.outputs for p in w.parties))
    for shares in itertools.product(*(range(s.support) for s in w.sources)):
        weight = float(np.prod([s.share_probs[v] for s, v in zip(w.sources, shares)]))
        if weight <= 0.0:
            continue
        tables = [w.sources[s].box(shares[s], i).table for s, i in box_slots]
        for assignment in itertools.product(*slot_outcomes):
            outcomes = {}
            for (left, right), (alpha, beta) in zip(slot_terminals, assignment):
                outcomes[left] = alpha
                outcomes[right] = beta
            for inputs in itertools.product(*(range(p.inputs) for p in w.parties)):
                box_inputs: Dict[Terminal, int] = {}
                outputs = []
                for party, x in zip(w.parties, inputs):
                    context = (x, tuple(shares[k] for k in visible[party.name]))
                    out, used = run(party, context, outcomes)
                    outputs.append(out)
                    box_inputs.update(used)
                probability = weight
                for (left, right), (alpha, beta), box_table in zip(slot_terminals, assignment, tables):
                    probability *= box_table[box_inputs.get(left, 0), box_inputs.get(right, 0), alpha, beta]
                    if probability == 0.0:
                        break
                table[tuple(inputs) + tuple(outputs)] += probability

    behavior = NetworkBehavior(w.parties, np.clip(table, 0.0, 1.0))
    validate_behavior(behavior, STRUCTURAL_TOL)
    logger.debug(f"Evaluated wired scenario over {required} share/outcome assignments.")
    return behavior


# --- Witness ---

def conditional_locality_witness(
    p: NetworkBehavior,
    party: Optional[str] = None,
    cap: Optional[int] = None,
    backend: Optional[str] = None,
) -> WitnessReport:
    """
    Runs the locality LP on p(ac|xz, b) for every (y, b) of the conditioning
    party with p(b|y) above the floor. One nonlocal conditional certifies
    that p is not quantum-wirable.
    """
    conditioning = p.party(party) if party is not None else p.parties[1]
    verdicts = []
    for y in range(conditioning.inputs):
        weights = outcome_weights(p, y, party=conditioning.name)
        for b, weight in enumerate(weights):
            if weight <= PROBABILITY_FLOOR:
                logger.debug(f"Skipping outcome b={b} at y={y}: zero weight.")
                continue
            conditional = condition_on_b(p, y, b, party=conditioning.name)
            certificate = is_bell_local(conditional.behavior, cap=cap, backend=backend)
            behavior = conditional.behavior
            value = None
            if behavior.n_parties == 2 and behavior.input_shape == (2, 2) and behavior.output_shape == (2, 2):
                value = chsh(behavior)
            verdicts.append(ConditionalVerdict(y, b, conditional.weight, certificate.feasible, value, certificate))
    report = WitnessReport(tuple(verdicts))
    logger.info(f"Conditional locality witness: {report.summary()} ({len(verdicts)} conditionals).")
    return report


# --- Fritz Construction ---

def fritz_triangle() -> NetworkScenario:
    """
    Triangle with S_AB, S_AC distributing perfectly correlated uniform bits
    and S_BC a Φ⁺ pair. Outputs: A = 2y+z, B = 2y+b, C = 2z+c, where B and C
    measure the CHSH-optimal observables chosen by their classical bit.
    """
    correlated = DensityMatrix(np.diag([0.5, 0.0, 0.0, 0.5]).astype(complex))
    basis = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    z, x = pauli('z').matrix, pauli('x').matrix
    bob_povms = (observable_to_povm(z), observable_to_povm(x))
    charlie_povms = (observable_to_povm((z + x) / np.sqrt(2)), observable_to_povm((z - x) / np.sqrt(2)))

    alice = Povm(tuple(np.kron(basis[y], basis[zz]) for y in range(2) for zz in range(2)))
    bob = Povm(tuple(np.kron(basis[y], bob_povms[y].effects[b]) for y in range(2) for b in range(2)))
    charlie = Povm(tuple(np.kron(basis[zz], charlie_povms[zz].effects[c]) for zz in range(2) for c in range(2)))

    parties = (PartyDescriptor('A', 1, 4), PartyDescriptor('B', 1, 4), PartyDescriptor('C', 1, 4))
    sources = (
        Source('S_AB', ('A', 'B'), (2, 2)),
        Source('S_AC', ('A', 'C'), (2, 2)),
        Source('S_BC', ('B', 'C'), (2, 2)),
    )
    return NetworkScenario(parties, sources, (correlated, correlated, DensityMatrix(bell_projector(0))),
                           {'A': (alice,), 'B': (bob,), 'C': (charlie,)})


def fritz_behavior() -> NetworkBehavior:
    return network_behavior(fritz_triangle())


def embedded_bipartite(p: NetworkBehavior) -> NetworkBehavior:
    """
    p(b,c|y,z) read off a Fritz-type behavior, where A reports (y,z) and B, C
    report their classical bit next to their measurement outcome.
    """
    if p.input_shape != (1, 1, 1) or p.output_shape != (4, 4, 4):
        raise ContractError("Expected three parties without inputs and four outputs each.",
                            operation='embedded_bipartite')
    joint = p.table[0, 0, 0]
    table = np.zeros((2, 2, 2, 2))
    for y, z, b, c in itertools.product(range(2), repeat=4):
        weight = joint[2 * y + z].sum()
        if weight <= PROBABILITY_FLOOR:
            raise ContractError(f"Classical bits (y={y}, z={z}) never occur.", operation='embedded_bipartite')
        table[y, z, b, c] = joint[2 * y + z, 2 * y + b, 2 * z + c] / weight
    return NetworkBehavior((PartyDescriptor('B', 2, 2), PartyDescriptor('C', 2, 2)), table)


def fritz_wiring() -> WiredScenario:
    """
    S_AB and S_AC carry only shares λ, μ; S_BC carries the Tsirelson box.
    Alice outputs (λ, μ); Bob feeds λ into his box terminal and outputs
    (λ, β); Charlie does the same with μ.
    """
    parties = (PartyDescriptor('A', 1, 4), PartyDescriptor('B', 1, 4), PartyDescriptor('C', 1, 4))
    sources = (
        SourceResource('S_AB', ('A', 'B'), np.array([0.5, 0.5])),
        SourceResource('S_AC', ('A', 'C'), np.array([0.5, 0.5])),
        SourceResource.shared('S_BC', ('B', 'C'), (tsirelson_box(),)),
    )
    bob_terminal = Terminal('S_BC', 0, 0)
    charlie_terminal = Terminal('S_BC', 0, 1)

    programs = {
        'A': compile_program(sources, parties[0], lambda h: None, lambda h: 2 * h.shares[0] + h.shares[1]),
        'B': compile_program(
            sources, parties[1],
            lambda h: None if h.steps else (bob_terminal, h.shares[0]),
            lambda h: 2 * h.shares[0] + h.output_of(bob_terminal),
        ),
        'C': compile_program(
            sources, parties[2],
            lambda h: None if h.steps else (charlie_terminal, h.shares[0]),
            lambda h: 2 * h.shares[0] + h.output_of(charlie_terminal),
        ),
    }
    return WiredScenario(parties, sources, programs)


def crossed_order_wiring() -> WiredScenario:
    """
    Bob and Charlie share two Tsirelson boxes and use them in input-dependent
    opposite orders, each feeding one box output into the next box input.
    """
    parties = (PartyDescriptor('A', 2, 2), PartyDescriptor('B', 1, 2), PartyDescriptor('C', 2, 2))
    sources = (
        SourceResource.shared('S_AB', ('A', 'B'), (tsirelson_box(),)),
        SourceResource.shared('S_BC', ('B', 'C'), (tsirelson_box(), tsirelson_box())),
    )
    alice_t = Terminal('S_AB', 0, 0)
    bob_ab = Terminal('S_AB', 0, 1)
    bob_bc = (Terminal('S_BC', 0, 0), Terminal('S_BC', 1, 0))
    charlie_bc = (Terminal('S_BC', 0, 1), Terminal('S_BC', 1, 1))

    def bob_select(h: History):
        order = (bob_ab, bob_bc[0], bob_bc[1])
        if len(h.steps) == len(order):
            return None
        return order[len(h.steps)], h.last_output if h.steps else 0

    def charlie_select(h: History):
        order = (charlie_bc[1], charlie_bc[0]) if h.x == 0 else (charlie_bc[0], charlie_bc[1])
        if len(h.steps) == 2:
            return None
        return order[len(h.steps)], h.last_output if h.steps else h.x

    programs = {
        'A': compile_program(sources, parties[0],
                             lambda h: None if h.steps else (alice_t, h.x), lambda h: h.last_output),
        'B': compile_program(sources, parties[1], bob_select, lambda h: h.last_output),
        'C': compile_program(sources, parties[2], charlie_select, lambda h: h.last_output),
    }
    return WiredScenario(parties, sources, programs)


# --- Random Scenarios ---

@dataclass(frozen=True)
class WiringLimits:
    max_boxes_per_source: int = 2
    max_share_support: int = 4
    bob_outputs: Tuple[int, ...] = (2, 4)
    share_families: bool = True
    stop_probability: float = 0.25


def _random_tree(rng: np.random.Generator, party: PartyDescriptor, terminals: Mapping[Terminal, Tuple[int, int]],
                 used: Tuple[Terminal, ...], stop_probability: float) -> Node:
    available = [t for t in terminals if t not in used]
    if not available or (used and rng.random() < stop_probability):
        return Emit(int(rng.integers(party.outputs)))
    terminal = available[int(rng.integers(len(available)))]
    n_in, n_out = terminals[terminal]
    box_input = int(rng.integers(n_in))
    branches = tuple(_random_tree(rng, party, terminals, used + (terminal,), stop_probability) for _ in range(n_out))
    return Use(terminal, box_input, branches)


def random_wired_scenario(seed: int, limits: WiringLimits = WiringLimits()) -> WiredScenario:
    """
    Bilocality network A(2 inputs, 2 outputs), B(no input), C(2, 2) with
    random quantum boxes, random shares (optionally indexing box families)
    and random, possibly adaptive, decision-tree programs. Deterministic in `seed`.
    """
    rng = np.random.default_rng(seed)
    n_bob = int(limits.bob_outputs[int(rng.integers(len(limits.bob_outputs)))])
    parties = (PartyDescriptor('A', 2, 2), PartyDescriptor('B', 1, n_bob), PartyDescriptor('C', 2, 2))

    sources = []
    for name, endpoints in (('S_AB', ('A', 'B')), ('S_BC', ('B', 'C'))):
        n_boxes = int(rng.integers(1, limits.max_boxes_per_source + 1))
        support = int(rng.integers(1, limits.max_share_support + 1))
        probs = rng.dirichlet(np.ones(support))
        if limits.share_families and rng.random() < 0.5:
            families = tuple(tuple(random_quantum_box(rng) for _ in range(n_boxes)) for _ in range(support))
            sources.append(SourceResource(name, endpoints, probs, families))
        else:
            boxes = tuple(random_quantum_box(rng) for _ in range(n_boxes))
            sources.append(SourceResource.shared(name, endpoints, boxes, probs))

    programs = {}
    for party in parties:
        terminals = _party_terminals(sources, party.name)
        roots = {
            context: _random_tree(rng, party, terminals, (), limits.stop_probability)
            for context in _contexts(sources, party)
        }
        programs[party.name] = WiringProgram(party.name, roots)
    return WiredScenario(parties, tuple(sources), programs)


# --- Documents ---

def _node_to_document(node: Node) -> Dict:
    if isinstance(node, Emit):
        return {'emit': node.output}
    return {
        'use': [node.terminal.source, node.terminal.box, node.terminal.side],
        'input': node.box_input,
        'branches': [_node_to_document(child) for child in node.branches],
    }


def _node_from_document(document, location: str, source: Optional[str]) -> Node:
    try:
        if 'emit' in document:
            return Emit(int(document['emit']))
        name, box, side = document['use']
        branches = tuple(
            _node_from_document(child, f"{location}.branches[{i}]", source)
            for i, child in enumerate(document['branches'])
        )
        return Use(Terminal(str(name), int(box), int(side)), int(document['input']), branches)
    except (KeyError, TypeError, ValueError) as e:
        raise DocumentFormatError(f"Malformed program node: {e}", path=source, location=location) from e


def wired_scenario_to_document(w: WiredScenario) -> Dict:
    """Box tables, shares and program trees; quantum realizations are not stored."""
    return {
        'format_version': WIRED_FORMAT_VERSION,
        'parties': [{'name': p.name, 'inputs': p.inputs, 'outputs': p.outputs} for p in w.parties],
        'sources': [
            {
                'name': s.name,
                'endpoints': list(s.endpoints),
                'share_probs': [float(v) for v in s.share_probs],
                'boxes_by_share': [
                    [{'shape': list(b.table.shape), 'table': [float(v) for v in b.table.ravel()]} for b in family]
                    for family in s.boxes_by_share
                ],
            }
            for s in w.sources
        ],
        'programs': {
            name: [
                {'x': context[0], 'shares': list(context[1]), 'node': _node_to_document(node)}
                for context, node in program.roots.items()
            ]
            for name, program in w.programs.items()
        },
    }


def wired_scenario_from_document(document: Dict, source: Optional[str] = None) -> WiredScenario:
    """
    Raises:
        DocumentFormatError: on structural problems, with a JSON-path location.
        ProgramError: if a decoded program is invalid.
    """
    if not isinstance(document, dict) or document.get('format_version') != WIRED_FORMAT_VERSION:
        raise DocumentFormatError("Not a wired-scenario document of a supported version.",
                                  path=source, location='$.format_version')
    try:
        parties = tuple(PartyDescriptor(str(p['name']), int(p['inputs']), int(p['outputs']))
                        for p in document['parties'])
    except (KeyError, TypeError, ValueError) as e:
        raise DocumentFormatError(f"Malformed parties: {e}", path=source, location='$.parties') from e

    sources = []
    for i, entry in enumerate(document.get('sources', [])):
        location = f"$.sources[{i}]"
        try:
            families = tuple(
                tuple(QuantumBox(np.array(b['table'], dtype=float).reshape(b['shape'])) for b in family)
                for family in entry['boxes_by_share']
            )
            sources.append(SourceResource(str(entry['name']), tuple(entry['endpoints']),
                                          np.array(entry['share_probs'], dtype=float), families))
        except (KeyError, TypeError, ValueError) as e:
            raise DocumentFormatError(f"Malformed source: {e}", path=source, location=location) from e

    programs = {}
    raw_programs = document.get('programs')
    if not isinstance(raw_programs, dict):
        raise DocumentFormatError("Field 'programs' must be an object.", path=source, location='$.programs')
    for name, entries in raw_programs.items():
        roots = {}
        for j, entry in enumerate(entries):
            location = f"$.programs.{name}[{j}]"
            try:
                context = (int(entry['x']), tuple(int(v) for v in entry['shares']))
            except (KeyError, TypeError, ValueError) as e:
                raise DocumentFormatError(f"Malformed program context: {e}", path=source, location=location) from e
            roots[context] = _node_from_document(entry.get('node', {}), f"{location}.node", source)
        programs[name] = WiringProgram(name, roots)
    return WiredScenario(parties, tuple(sources), programs)
