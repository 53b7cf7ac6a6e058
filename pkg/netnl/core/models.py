"""
Core domain result models
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from .constants import (
    ALGEBRAIC_TOL,
    BELL_LABELS,
    BOB_OUTCOME_BITS,
    FORMAT_VERSION,
    BlockCase,
    Verdict,
)
from .exceptions import PreconditionError


def _check_distribution(values: np.ndarray, name: str, tol: float = ALGEBRAIC_TOL) -> None:
    if np.any(values < -tol):
        raise PreconditionError(f"{name} has negative entries.", check='nonnegative')
    defect = np.max(np.abs(values.sum(axis=-1) - 1.0))
    if defect > tol:
        raise PreconditionError(f"{name} is not normalized.", check='normalized', deviation=float(defect))


@dataclass(frozen=True, eq=False)
class LocalityCertificate:
    """Outcome of the local-polytope LP for one behavior"""
    feasible: bool
    residual: float
    objective: float
    strategy_count: int
    parties: Tuple[Tuple[str, int, int], ...]
    backend: str
    iterations: int
    weights: Optional[np.ndarray] = None
    witness: Optional[np.ndarray] = None
    witness_gap: Optional[float] = None

    def support(self, threshold: float = 1e-12) -> Dict[int, float]:
        if self.weights is None:
            return {}
        return {int(i): float(w) for i, w in enumerate(self.weights) if w > threshold}

    def to_document(self) -> Dict:
        return {
            'format_version': FORMAT_VERSION,
            'parties': [{'name': n, 'inputs': i, 'outputs': o} for n, i, o in self.parties],
            'feasible': self.feasible,
            'residual': self.residual,
            'objective': self.objective,
            'strategy_count': self.strategy_count,
            'backend': self.backend,
            'iterations': self.iterations,
            'weights': {str(k): v for k, v in self.support().items()},
            'witness': None if self.witness is None else [float(v) for v in self.witness],
            'witness_gap': self.witness_gap,
        }


@dataclass(frozen=True, eq=False)
class BilocalModel:
    """
    Finite bilocal model: p(λ), q(μ) and response tables
    alice[x, λ, a], bob[y, λ, μ, b], charlie[z, μ, c].
    """
    p_lambda: np.ndarray
    q_mu: np.ndarray
    alice: np.ndarray
    bob: np.ndarray
    charlie: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ('p_lambda', 'q_mu', 'alice', 'bob', 'charlie'):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            arrays[name] = arr
            object.__setattr__(self, name, arr)
        n_lambda, n_mu = arrays['p_lambda'].shape[0], arrays['q_mu'].shape[0]
        if arrays['alice'].shape[1] != n_lambda or arrays['charlie'].shape[1] != n_mu \
                or arrays['bob'].shape[1:3] != (n_lambda, n_mu):
            raise PreconditionError("Response tables do not match the hidden-variable supports.",
                                    check='shape')
        for name, arr in arrays.items():
            _check_distribution(arr, name)

    @property
    def shape(self) -> Tuple[Tuple[int, int], ...]:
        """(inputs, outputs) for Alice, Bob, Charlie."""
        return (
            (self.alice.shape[0], self.alice.shape[2]),
            (self.bob.shape[0], self.bob.shape[3]),
            (self.charlie.shape[0], self.charlie.shape[2]),
        )


@dataclass(frozen=True)
class BilocalityScore:
    i_value: float
    j_value: float

    @property
    def s_value(self) -> float:
        return math.sqrt(abs(self.i_value)) + math.sqrt(abs(self.j_value))

    def violates(self, tol: float = 1e-9) -> bool:
        return self.s_value > 1.0 + tol

    def to_document(self) -> Dict:
        return {'I': self.i_value, 'J': self.j_value, 'S': self.s_value}


@dataclass(frozen=True, eq=False)
class ConditionalVerdict:
    """Locality of p(ac|xz, b) for one outcome of the middle party"""
    y: int
    b: int
    weight: float
    local: bool
    chsh: Optional[float]
    certificate: LocalityCertificate


@dataclass(frozen=True, eq=False)
class WitnessReport:
    """Per-outcome conditional locality; one nonlocal conditional rules out wirability"""
    verdicts: Tuple[ConditionalVerdict, ...]

    @property
    def wirable_consistent(self) -> bool:
        return all(v.local for v in self.verdicts)

    @property
    def max_chsh(self) -> Optional[float]:
        values = [v.chsh for v in self.verdicts if v.chsh is not None]
        return max(values) if values else None

    def summary(self) -> str:
        return 'consistent with quantum-wirable' if self.wirable_consistent else 'not quantum-wirable'

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([
            {
                'y': v.y,
                'b': v.b,
                'weight': v.weight,
                'chsh': v.chsh,
                'local': v.local,
                'residual': v.certificate.residual,
                'witness_gap': v.certificate.witness_gap,
            }
            for v in self.verdicts
        ], columns=['y', 'b', 'weight', 'chsh', 'local', 'residual', 'witness_gap'])

    def to_document(self) -> Dict:
        return {
            'verdict': self.summary(),
            'wirable_consistent': self.wirable_consistent,
            'conditionals': [
                {
                    'y': v.y, 'b': v.b, 'weight': v.weight, 'chsh': v.chsh, 'local': v.local,
                    'residual': v.certificate.residual, 'witness_gap': v.certificate.witness_gap,
                }
                for v in self.verdicts
            ],
        }


@dataclass(frozen=True)
class BlockVerdict:
    """Classification of one occupied (α, γ) block of a steered state"""
    b: int
    alpha: int
    gamma: int
    weight: float
    theta: float
    phi: float
    q: float
    r: complex
    case: str


@dataclass(frozen=True, eq=False)
class JordanFamily:
    """
    Block parametrization of Alice's and Charlie's observables.

    q[b, α, γ] and r[b, α, γ] are the block coefficients of the steered
    states (zero where not measured); blocks must satisfy |r|² ≤ q(1−q).
    """
    thetas: np.ndarray
    phis: np.ndarray
    alice_weights: np.ndarray
    charlie_weights: np.ndarray
    q: np.ndarray = None
    r: np.ndarray = None

    def __post_init__(self):
        thetas = np.atleast_1d(np.array(self.thetas, dtype=float))
        phis = np.atleast_1d(np.array(self.phis, dtype=float))
        wa = np.atleast_1d(np.array(self.alice_weights, dtype=float))
        wc = np.atleast_1d(np.array(self.charlie_weights, dtype=float))
        if wa.shape != thetas.shape or wc.shape != phis.shape:
            raise PreconditionError("One weight per block is required.", check='shape')
        _check_distribution(wa, 'alice_weights', tol=1e-10)
        _check_distribution(wc, 'charlie_weights', tol=1e-10)
        shape = (4, thetas.size, phis.size)
        q = np.zeros(shape) if self.q is None else np.array(self.q, dtype=float)
        r = np.zeros(shape, dtype=complex) if self.r is None else np.array(self.r, dtype=complex)
        if q.shape != shape or r.shape != shape:
            raise PreconditionError("Block coefficients must have shape (4, blocks_A, blocks_C).", check='shape')
        excess = np.abs(r) ** 2 - q * (1.0 - q)
        if np.any(q < -1e-9) or np.any(q > 1 + 1e-9) or np.max(excess) > 1e-9:
            raise PreconditionError("Block coefficients violate positivity |r|² ≤ q(1−q).",
                                    check='positivity', deviation=float(np.max(excess)))
        for name, arr in (('thetas', thetas), ('phis', phis), ('alice_weights', wa),
                          ('charlie_weights', wc), ('q', q), ('r', r)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_angles(cls, thetas, phis, alice_weights=None, charlie_weights=None) -> 'JordanFamily':
        thetas = np.atleast_1d(np.array(thetas, dtype=float))
        phis = np.atleast_1d(np.array(phis, dtype=float))
        if alice_weights is None:
            alice_weights = np.full(thetas.size, 1.0 / thetas.size)
        if charlie_weights is None:
            charlie_weights = np.full(phis.size, 1.0 / phis.size)
        return cls(thetas, phis, alice_weights, charlie_weights)

    @property
    def alice_blocks(self) -> int:
        return int(self.thetas.size)

    @property
    def charlie_blocks(self) -> int:
        return int(self.phis.size)


@dataclass
class SelfTestReport:
    """Deviations, norms and fidelities gathered while certifying the self-test"""
    tolerance: float
    bob_marginal_deviation: float
    marginal_deviation: float
    correlator_deviation: float
    anticommutator_norm_a: Optional[float] = None
    anticommutator_norm_c: Optional[float] = None
    fidelities: Dict[int, float] = field(default_factory=dict)
    ppt_minima: Dict[int, float] = field(default_factory=dict)
    bilocality_s: Optional[float] = None
    blocks: List[BlockVerdict] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        checks = [self.bob_marginal_deviation, self.marginal_deviation, self.correlator_deviation]
        checks += [v for v in (self.anticommutator_norm_a, self.anticommutator_norm_c) if v is not None]
        if any(v > self.tolerance for v in checks):
            return Verdict.FAIL
        if any(f < 1.0 - self.tolerance for f in self.fidelities.values()):
            return Verdict.FAIL
        return Verdict.PASS

    @property
    def passed(self) -> bool:
        return self.verdict == Verdict.PASS

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {'check': 'bob_marginal_deviation', 'value': self.bob_marginal_deviation},
            {'check': 'marginal_deviation', 'value': self.marginal_deviation},
            {'check': 'correlator_deviation', 'value': self.correlator_deviation},
        ]
        if self.anticommutator_norm_a is not None:
            rows.append({'check': 'anticommutator_norm_a', 'value': self.anticommutator_norm_a})
        if self.anticommutator_norm_c is not None:
            rows.append({'check': 'anticommutator_norm_c', 'value': self.anticommutator_norm_c})
        for b, value in sorted(self.fidelities.items()):
            rows.append({'check': f'fidelity_{BOB_OUTCOME_BITS[b]}', 'value': value})
        for b, value in sorted(self.ppt_minima.items()):
            rows.append({'check': f'ppt_min_{BOB_OUTCOME_BITS[b]}', 'value': value})
        if self.bilocality_s is not None:
            rows.append({'check': 'bilocality_S', 'value': self.bilocality_s})
        return pd.DataFrame(rows, columns=['check', 'value'])

    def blocks_frame(self) -> pd.DataFrame:
        return pd.DataFrame([
            {
                'b': BOB_OUTCOME_BITS[blk.b], 'alpha': blk.alpha, 'gamma': blk.gamma,
                'weight': blk.weight, 'theta': blk.theta, 'phi': blk.phi,
                'q': blk.q, 'two_re_r': 2 * blk.r.real, 'case': blk.case,
            }
            for blk in self.blocks
        ], columns=['b', 'alpha', 'gamma', 'weight', 'theta', 'phi', 'q', 'two_re_r', 'case'])

    def to_document(self) -> Dict:
        return {
            'format_version': FORMAT_VERSION,
            'verdict': self.verdict,
            'tolerance': self.tolerance,
            'bob_marginal_deviation': self.bob_marginal_deviation,
            'marginal_deviation': self.marginal_deviation,
            'correlator_deviation': self.correlator_deviation,
            'anticommutator_norm_a': self.anticommutator_norm_a,
            'anticommutator_norm_c': self.anticommutator_norm_c,
            'fidelities': {BOB_OUTCOME_BITS[b]: v for b, v in sorted(self.fidelities.items())},
            'fidelity_targets': {BOB_OUTCOME_BITS[b]: BELL_LABELS[b] for b in sorted(self.fidelities)},
            'ppt_minima': {BOB_OUTCOME_BITS[b]: v for b, v in sorted(self.ppt_minima.items())},
            'bilocality_S': self.bilocality_s,
            'block_cases': sorted({blk.case for blk in self.blocks} - {BlockCase.NONE}),
            'blocks': self.blocks_frame().to_dict(orient='records'),
        }
