# netnl/services/behaviors.py
"""
Network Behavior Service Module.

A behavior is a conditional distribution p(outputs | inputs) over the parties
of a network, stored as a dense tensor indexed inputs-major then outputs,
i.e. p[x][y][z][a][b][c] for three parties. An input cardinality of 1 encodes
"no input".

This module owns the canonical representation, its validation, the algebra
used by the classifiers (marginals, input fixing, conditioning on the middle
party, correlators) and the JSON interchange format.
"""

import itertools
import json
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..core.constants import ENTRY_TOL, FORMAT_VERSION, PROBABILITY_FLOOR, STRUCTURAL_TOL
from ..core.exceptions import (
    BehaviorValidationError,
    ContractError,
    DimensionError,
    DocumentFormatError,
    NoSignalingViolationError,
    UndefinedConditionalError,
)

logger = logging.getLogger(__name__)

PartyRef = Union[str, int]


@dataclass(frozen=True)
class PartyDescriptor:
    name: str
    inputs: int
    outputs: int

    def __post_init__(self):
        if self.inputs < 1 or self.outputs < 1:
            raise DimensionError(
                f"Party '{self.name}' must have at least one input and one output.",
                actual=(self.inputs, self.outputs),
            )


@dataclass(frozen=True, eq=False)
class NetworkBehavior:
    """
    Probability tensor over the given parties.

    Construction checks shape and finiteness only; `validate` checks the
    probabilistic invariants.
    """
    parties: Tuple[PartyDescriptor, ...]
    table: np.ndarray

    def __post_init__(self):
        parties = tuple(self.parties)
        names = [p.name for p in parties]
        if len(set(names)) != len(names):
            raise DimensionError("Party names must be unique.", actual=names)
        table = np.array(self.table, dtype=float)
        expected = tuple(p.inputs for p in parties) + tuple(p.outputs for p in parties)
        if table.shape != expected:
            raise DimensionError("Probability tensor shape does not match the parties.",
                                 expected=expected, actual=table.shape)
        if not np.all(np.isfinite(table)):
            raise BehaviorValidationError("Probability tensor contains NaN or infinite entries.")
        table.setflags(write=False)
        object.__setattr__(self, 'parties', parties)
        object.__setattr__(self, 'table', table)

    @property
    def n_parties(self) -> int:
        return len(self.parties)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(p.name for p in self.parties)

    @property
    def input_shape(self) -> Tuple[int, ...]:
        return tuple(p.inputs for p in self.parties)

    @property
    def output_shape(self) -> Tuple[int, ...]:
        return tuple(p.outputs for p in self.parties)

    def index_of(self, party: PartyRef) -> int:
        if isinstance(party, (int, np.integer)):
            if not 0 <= party < self.n_parties:
                raise ContractError(f"Party index {party} out of range.")
            return int(party)
        try:
            return self.names.index(party)
        except ValueError:
            raise ContractError(f"Unknown party '{party}'.", operation='index_of') from None

    def party(self, party: PartyRef) -> PartyDescriptor:
        return self.parties[self.index_of(party)]

    def probability(self, inputs: Sequence[int], outputs: Sequence[int]) -> float:
        return float(self.table[tuple(inputs) + tuple(outputs)])

    def validate(self, tol: float = STRUCTURAL_TOL) -> 'NetworkBehavior':
        validate_behavior(self, tol)
        return self

    def max_difference(self, other: 'NetworkBehavior') -> float:
        if self.table.shape != other.table.shape:
            raise DimensionError("Behaviors have different shapes.",
                                 expected=self.table.shape, actual=other.table.shape)
        return float(np.max(np.abs(self.table - other.table)))


@dataclass(frozen=True, eq=False)
class ConditionalBipartiteBehavior:
    """p(ac|xz, b) for an outcome b of the conditioning party at input y."""
    party: str
    y: int
    b: int
    weight: float
    behavior: NetworkBehavior


def _output_axes(p: NetworkBehavior) -> Tuple[int, ...]:
    n = p.n_parties
    return tuple(range(n, 2 * n))


def validate_behavior(p: NetworkBehavior, tol: float = STRUCTURAL_TOL) -> None:
    """
    Checks entries in [0, 1], normalization per input tuple and no-signaling
    for every party.

    Raises:
        BehaviorValidationError: naming the offending entry or input tuple.
        NoSignalingViolationError: naming the signaling party.
    """
    table = p.table
    n = p.n_parties
    low = table < -ENTRY_TOL
    high = table > 1 + ENTRY_TOL
    if np.any(low) or np.any(high):
        bad = tuple(int(i) for i in np.argwhere(low | high)[0])
        raise BehaviorValidationError(
            f"Probability entry out of [0, 1] at index {bad}.",
            location=f"entry {bad}", deviation=float(table[bad]),
        )

    totals = table.sum(axis=_output_axes(p))
    norm_defect = np.abs(totals - 1.0)
    if np.max(norm_defect) > tol:
        worst = tuple(int(i) for i in np.unravel_index(np.argmax(norm_defect), norm_defect.shape))
        raise BehaviorValidationError(
            f"Behavior is not normalized for input tuple {worst}.",
            location=f"inputs {worst}", deviation=float(norm_defect[worst]),
        )

    for k, party in enumerate(p.parties):
        if party.inputs == 1:
            continue
        summed = table.sum(axis=n + k)
        reference = np.take(summed, [0], axis=k)
        deviation = float(np.max(np.abs(summed - reference)))
        if deviation > tol:
            raise NoSignalingViolationError(
                f"Marginal of the other parties depends on the input of '{party.name}'.",
                party=party.name, deviation=deviation,
            )


def marginal(
    p: NetworkBehavior,
    parties: Iterable[PartyRef],
    fixed_inputs: Optional[Mapping[PartyRef, int]] = None,
) -> NetworkBehavior:
    """
    Marginal onto `parties` (kept in their original order).

    Removed parties must either have a single input or a fixed input given
    in `fixed_inputs`.

    Raises:
        ContractError: when a removed party has a free input.
    """
    keep = sorted({p.index_of(q) for q in parties})
    if not keep:
        raise ContractError("A marginal must keep at least one party.", operation='marginal')
    fixed = {p.index_of(k): int(v) for k, v in (fixed_inputs or {}).items()}
    n = p.n_parties

    index = []
    for k, party in enumerate(p.parties):
        if k in keep:
            index.append(slice(None))
            continue
        if party.inputs == 1:
            index.append(0)
        elif k in fixed:
            if not 0 <= fixed[k] < party.inputs:
                raise ContractError(f"Fixed input {fixed[k]} out of range for '{party.name}'.",
                                    operation='marginal')
            index.append(fixed[k])
        else:
            raise ContractError(
                f"Cannot marginalize '{party.name}': it has {party.inputs} inputs and none is fixed.",
                operation='marginal',
            )
    selected = p.table[tuple(index) + (slice(None),) * n]
    # Input axes of removed parties are gone; their output axes follow the kept inputs.
    removed_output_axes = tuple(len(keep) + k for k in range(n) if k not in keep)
    table = selected.sum(axis=removed_output_axes) if removed_output_axes else selected
    return NetworkBehavior(tuple(p.parties[k] for k in keep), table)


def fix_inputs(p: NetworkBehavior, inputs: Mapping[PartyRef, int]) -> NetworkBehavior:
    """Restricts the listed parties to one input each (their input cardinality becomes 1)."""
    table = p.table
    parties = list(p.parties)
    for ref, value in inputs.items():
        k = p.index_of(ref)
        party = parties[k]
        if not 0 <= int(value) < party.inputs:
            raise ContractError(f"Input {value} out of range for '{party.name}'.", operation='fix_inputs')
        table = np.take(table, [int(value)], axis=k)
        parties[k] = PartyDescriptor(party.name, 1, party.outputs)
    return NetworkBehavior(tuple(parties), table)


def _conditioning_index(p: NetworkBehavior, party: Optional[PartyRef]) -> int:
    if party is not None:
        return p.index_of(party)
    if p.n_parties != 3:
        raise ContractError("Conditioning party must be named for non-tripartite behaviors.",
                            operation='condition_on_b')
    return 1


def outcome_weights(p: NetworkBehavior, y: int, party: Optional[PartyRef] = None) -> np.ndarray:
    """p(b | y) for every outcome b, read at input 0 of the other parties."""
    k = _conditioning_index(p, party)
    n = p.n_parties
    others = [j for j in range(n) if j != k]
    index = [0] * n
    index[k] = y
    sliced = p.table[tuple(index)]
    return sliced.sum(axis=tuple(others))


def condition_on_b(
    p: NetworkBehavior,
    y: int,
    b: int,
    party: Optional[PartyRef] = None,
    tol: float = STRUCTURAL_TOL,
) -> ConditionalBipartiteBehavior:
    """
    Conditional behavior of the remaining parties given outcome `b` of the
    conditioning party (the middle party by default) at input `y`.

    Raises:
        UndefinedConditionalError: if p(b|y) is (numerically) zero.
        NoSignalingViolationError: if p(b|y) depends on the other inputs.
    """
    k = _conditioning_index(p, party)
    n = p.n_parties
    cond_party = p.parties[k]
    if not 0 <= y < cond_party.inputs or not 0 <= b < cond_party.outputs:
        raise ContractError(f"(y={y}, b={b}) out of range for '{cond_party.name}'.",
                            operation='condition_on_b')

    sliced = np.take(np.take(p.table, y, axis=k), b, axis=n - 1 + k)
    # sliced axes: other inputs (n-1), other outputs (n-1)
    other_out_axes = tuple(range(n - 1, 2 * (n - 1)))
    weights = sliced.sum(axis=other_out_axes)
    weight = float(weights.flat[0])
    spread = float(np.max(np.abs(weights - weight)))
    if spread > tol:
        raise NoSignalingViolationError(
            f"p(b={b}|y={y}) depends on the inputs of the other parties.",
            party=cond_party.name, deviation=spread,
        )
    if weight <= PROBABILITY_FLOOR:
        raise UndefinedConditionalError(
            f"Outcome b={b} of '{cond_party.name}' has zero probability at y={y}.",
            outcome=b, probability=weight,
        )

    expand = weights.reshape(weights.shape + (1,) * (n - 1))
    table = sliced / expand
    parties = tuple(q for j, q in enumerate(p.parties) if j != k)
    conditional = NetworkBehavior(parties, table)
    try:
        validate_behavior(conditional, tol / weight)
    except BehaviorValidationError as e:
        raise NoSignalingViolationError(f"Conditional behavior is invalid: {e}",
                                        party=cond_party.name) from e
    return ConditionalBipartiteBehavior(cond_party.name, int(y), int(b), weight, conditional)


def _binary_check(p: NetworkBehavior, indices: Sequence[int], operation: str) -> None:
    for k in indices:
        if p.parties[k].outputs != 2:
            raise ContractError(
                f"Party '{p.parties[k].name}' must have binary outputs for {operation}.",
                operation=operation,
            )


def correlator(
    p: NetworkBehavior,
    x: int,
    z: int,
    sign_fn: Optional[Callable[[int], float]] = None,
    y: int = 0,
) -> float:
    """
    Σ (−1)^a (−1)^c s(b) p(abc|xyz) for a tripartite behavior, or
    Σ (−1)^(a+c) p(ac|xz) for a bipartite one (`sign_fn` and `y` ignored).

    Raises:
        ContractError: if the outer parties do not have binary outputs.
    """
    if p.n_parties == 2:
        _binary_check(p, (0, 1), 'correlator')
        block = p.table[x, z]
        signs = np.array([[1.0, -1.0], [-1.0, 1.0]])
        return float(np.sum(signs * block))
    if p.n_parties != 3:
        raise ContractError("Correlators are defined for two- or three-party behaviors.",
                            operation='correlator')
    _binary_check(p, (0, 2), 'correlator')
    block = p.table[x, y, z]
    n_b = p.parties[1].outputs
    s = np.array([1.0 if sign_fn is None else float(sign_fn(b)) for b in range(n_b)])
    parity = np.array([1.0, -1.0])
    return float(np.einsum('abc,a,b,c->', block, parity, s, parity))


def expectation(p: NetworkBehavior, party: PartyRef, x: int,
                fixed_inputs: Optional[Mapping[PartyRef, int]] = None) -> float:
    """Σ (−1)^a p(a|x) for a binary-output party."""
    k = p.index_of(party)
    _binary_check(p, (k,), 'expectation')
    fixed = {j: 0 for j in range(p.n_parties) if j != k}
    for ref, value in (fixed_inputs or {}).items():
        j = p.index_of(ref)
        if j != k:
            fixed[j] = int(value)
    single = marginal(p, [k], fixed_inputs=fixed)
    return float(single.table[x, 0] - single.table[x, 1])


def conditional_correlators(p: NetworkBehavior, y: int = 0) -> pd.DataFrame:
    """
    One row per outcome b of the middle party: p(b|y), the conditional
    expectations of the outer parties and the conditional correlators
    E_xz. Outcomes with zero weight get NaN entries.

    Raises:
        ContractError: unless p is tripartite with binary outer outputs.
    """
    if p.n_parties != 3:
        raise ContractError("Conditional correlators need a tripartite behavior.",
                            operation='conditional_correlators')
    _binary_check(p, (0, 2), 'conditional_correlators')
    first, second = p.parties[0], p.parties[2]
    rows = []
    for b, weight in enumerate(outcome_weights(p, y)):
        row = {'b': b, 'weight': float(weight)}
        try:
            conditional = condition_on_b(p, y, b).behavior
        except UndefinedConditionalError:
            conditional = None
        for x in range(first.inputs):
            row[f'<{first.name}{x}>'] = np.nan if conditional is None else expectation(conditional, 0, x)
        for z in range(second.inputs):
            row[f'<{second.name}{z}>'] = np.nan if conditional is None else expectation(conditional, 1, z)
        for x in range(first.inputs):
            for z in range(second.inputs):
                row[f'E{x}{z}'] = np.nan if conditional is None else correlator(conditional, x, z)
        rows.append(row)
    return pd.DataFrame(rows)


def uniform_behavior(parties: Sequence[PartyDescriptor]) -> NetworkBehavior:
    parties = tuple(parties)
    shape = tuple(q.inputs for q in parties) + tuple(q.outputs for q in parties)
    n_out = int(np.prod([q.outputs for q in parties]))
    return NetworkBehavior(parties, np.full(shape, 1.0 / n_out))


def deterministic_behavior(parties: Sequence[PartyDescriptor],
                           responses: Sequence[Sequence[int]]) -> NetworkBehavior:
    """Point-mass behavior where party k answers responses[k][x_k]."""
    parties = tuple(parties)
    table = np.ones((1,) * 0)
    for party, response in zip(parties, responses):
        if len(response) != party.inputs:
            raise DimensionError(f"Response table of '{party.name}' has the wrong length.",
                                 expected=party.inputs, actual=len(response))
        one_hot = np.zeros((party.inputs, party.outputs))
        one_hot[np.arange(party.inputs), list(response)] = 1.0
        table = np.multiply.outer(table, one_hot)
    # Axes are (x0, a0, x1, a1, ...); reorder to inputs-major.
    n = len(parties)
    order = [2 * k for k in range(n)] + [2 * k + 1 for k in range(n)]
    return NetworkBehavior(parties, table.transpose(order))


def mix(p: NetworkBehavior, q: NetworkBehavior, weight: float) -> NetworkBehavior:
    """weight·p + (1 − weight)·q."""
    if p.parties != q.parties:
        raise ContractError("Only behaviors over the same parties can be mixed.", operation='mix')
    if not 0.0 <= weight <= 1.0:
        raise ContractError(f"Mixing weight {weight} outside [0, 1].", operation='mix')
    return NetworkBehavior(p.parties, weight * p.table + (1.0 - weight) * q.table)


def behavior_frame(p: NetworkBehavior) -> pd.DataFrame:
    """Long-format table: one row per (inputs, outputs) with its probability."""
    rows = []
    names = p.names
    for idx in itertools.product(*(range(s) for s in p.table.shape)):
        row = {f"x_{name}": idx[k] for k, name in enumerate(names)}
        row.update({f"o_{name}": idx[p.n_parties + k] for k, name in enumerate(names)})
        row['p'] = float(p.table[idx])
        rows.append(row)
    return pd.DataFrame(rows)


def to_document(p: NetworkBehavior) -> Dict:
    return {
        'format_version': FORMAT_VERSION,
        'parties': [{'name': q.name, 'inputs': q.inputs, 'outputs': q.outputs} for q in p.parties],
        'p': [float(v) for v in p.table.ravel()],
    }


def serialize(p: NetworkBehavior) -> str:
    """JSON text; floats are written with round-trip precision."""
    return json.dumps(to_document(p), indent=2)


def from_document(document: Dict, tol: float = STRUCTURAL_TOL, source: Optional[str] = None) -> NetworkBehavior:
    """
    Builds and validates a behavior from a parsed document.

    Raises:
        DocumentFormatError: on missing fields or wrong sizes.
        BehaviorValidationError / NoSignalingViolationError: on invariant violations.
    """
    if not isinstance(document, dict):
        raise DocumentFormatError("Behavior document must be a JSON object.", path=source, location='$')
    version = document.get('format_version')
    if version != FORMAT_VERSION:
        raise DocumentFormatError(f"Unsupported format_version {version!r}.",
                                  path=source, location='$.format_version')
    raw_parties = document.get('parties')
    if not isinstance(raw_parties, list) or not raw_parties:
        raise DocumentFormatError("Field 'parties' must be a non-empty list.", path=source, location='$.parties')
    parties = []
    for i, entry in enumerate(raw_parties):
        try:
            parties.append(PartyDescriptor(str(entry['name']), int(entry['inputs']), int(entry['outputs'])))
        except (KeyError, TypeError, ValueError, DimensionError) as e:
            raise DocumentFormatError(f"Malformed party entry: {e}", path=source,
                                      location=f"$.parties[{i}]") from e
    values = document.get('p')
    if not isinstance(values, list):
        raise DocumentFormatError("Field 'p' must be a list.", path=source, location='$.p')
    shape = tuple(q.inputs for q in parties) + tuple(q.outputs for q in parties)
    if len(values) != int(np.prod(shape)):
        raise DocumentFormatError(
            f"Field 'p' has {len(values)} entries, expected {int(np.prod(shape))}.",
            path=source, location='$.p',
        )
    try:
        table = np.array(values, dtype=float).reshape(shape)
    except (TypeError, ValueError) as e:
        raise DocumentFormatError(f"Non-numeric probability entry: {e}", path=source, location='$.p') from e
    behavior = NetworkBehavior(tuple(parties), table)
    validate_behavior(behavior, tol)
    return behavior


def deserialize(text: str, tol: float = STRUCTURAL_TOL, source: Optional[str] = None) -> NetworkBehavior:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentFormatError(f"Invalid JSON: {e.msg}", path=source,
                                  location=f"line {e.lineno} column {e.colno}") from e
    return from_document(document, tol=tol, source=source)
