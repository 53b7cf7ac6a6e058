# netnl/services/jordan.py
"""
Jordan Frame Service Module.

Two ±1 observables split into 2×2 and 1×1 blocks on which the first acts as
σz and the second as cos θ σz + sin θ σx. `canonical_frame` constructs that
basis as a map V onto ℂ^k ⊗ ℂ², block α spanning rows 2α and 2α+1, so the
block (junk) index is the left tensor factor. 1×1 blocks are embedded into
2×2 blocks with a zero row.

The same frames give the extraction channels Λ(ρ) = Tr_junk[V ρ V†] and the
per-block coefficients of the states steered by Bob's outcomes.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import block_diag

from ..core.constants import (
    BLOCK_CONSTRAINT_TOL,
    CLUSTER_TOL,
    COMMUTING_BLOCK_TOL,
    PROBABILITY_FLOOR,
    BlockCase,
)
from ..core.exceptions import PreconditionError, UndefinedConditionalError
from ..core.models import BlockVerdict, JordanFamily
from . import linalg
from .quantum import (
    DensityMatrix,
    NetworkScenario,
    Observable,
    bell_projector,
    bell_state,
    outer_observables,
    reduced_state,
    steered_state,
    with_observables,
)

logger = logging.getLogger(__name__)

_SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)

# Sign in front of sin θ sin φ · 2Re(r) in the unit constraint, per Bob outcome b = 2*b1 + b2.
BLOCK_SIGNS = {0: 1.0, 1: -1.0, 2: 1.0, 3: -1.0}


@dataclass(frozen=True, eq=False)
class JordanFrame:
    """
    isometry: V with shape (2k, d); V O0 V† = 1_k ⊗ σz and
    V O1 V† = ⊕ (cos θ_α σz + sin θ_α σx) on the occupied rows.
    """
    isometry: np.ndarray
    thetas: np.ndarray
    commuting: np.ndarray
    embedded: np.ndarray

    @property
    def blocks(self) -> int:
        return int(self.thetas.size)

    def apply(self, rho) -> np.ndarray:
        """Λ(ρ) = Tr_junk[V ρ V†]."""
        v = self.isometry
        return linalg.partial_trace(v @ linalg.as_cmat(rho) @ v.conj().T, [self.blocks, 2], keep=[1])

    def block_weights(self, rho) -> np.ndarray:
        """Weight of each block in ρ."""
        v = self.isometry
        diag = np.real(np.diag(v @ linalg.as_cmat(rho) @ v.conj().T)).reshape(self.blocks, 2)
        return diag.sum(axis=1)


def _clusters(values: np.ndarray, tol: float) -> List[List[int]]:
    groups = [[0]]
    for i in range(1, values.size):
        if values[i] - values[i - 1] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def canonical_frame(o0: Observable, o1: Observable, tol: float = CLUSTER_TOL) -> JordanFrame:
    """
    Constructive Jordan decomposition of two ±1 observables.

    The anticommutator {O0, O1}/2 is constant (= cos θ) on each block, so its
    eigenspaces group the blocks. Inside an eigenspace with |cos θ| < 1 each
    +1 eigenvector u of O0 is paired with v = (O1 u − cos θ u)/sin θ, which
    fixes the phase so that the block's σx component is sin θ ≥ 0. On
    commuting eigenspaces (cos θ = ±1) +1 and −1 eigenvectors of O0 are
    paired arbitrarily; unpaired vectors become embedded 1×1 blocks.

    Raises:
        PreconditionError: if the observables have different dimensions.
    """
    if o0.dim != o1.dim:
        raise PreconditionError("Observables act on different spaces.", check='dimension')
    m0, m1 = o0.matrix, o1.matrix
    half_anti = linalg.anticommutator(m0, m1) / 2
    eig = linalg.hermitian_eigen((half_anti + half_anti.conj().T) / 2)

    rows, thetas, commuting, embedded = [], [], [], []
    zero = np.zeros(o0.dim, dtype=complex)
    for group in _clusters(eig.eigenvalues, tol):
        c = float(np.clip(np.mean(eig.eigenvalues[group]), -1.0, 1.0))
        q = eig.eigenvectors[:, group]
        restricted = q.conj().T @ m0 @ q
        local = linalg.hermitian_eigen((restricted + restricted.conj().T) / 2)
        plus = [q @ local.eigenvectors[:, i] for i in range(len(group)) if local.eigenvalues[i] > 0]
        minus = [q @ local.eigenvectors[:, i] for i in range(len(group)) if local.eigenvalues[i] <= 0]

        if abs(c) < 1.0 - COMMUTING_BLOCK_TOL:
            sin_theta = np.sqrt(1.0 - c * c)
            for u in plus:
                v = (m1 @ u - c * u) / sin_theta
                rows += [u, v]
                thetas.append(float(np.arccos(c)))
                commuting.append(False)
                embedded.append(False)
            continue

        theta = 0.0 if c > 0 else float(np.pi)
        paired = min(len(plus), len(minus))
        for u, w in zip(plus[:paired], minus[:paired]):
            rows += [u, w]
            thetas.append(theta)
            commuting.append(True)
            embedded.append(False)
        for u in plus[paired:]:
            rows += [u, zero]
            thetas.append(theta)
            commuting.append(True)
            embedded.append(True)
        for w in minus[paired:]:
            rows += [zero, w]
            thetas.append(theta)
            commuting.append(True)
            embedded.append(True)

    isometry = np.array([r.conj() for r in rows])
    logger.debug(f"Jordan frame: {len(thetas)} blocks, angles {np.round(thetas, 6).tolist()}.")
    return JordanFrame(isometry, np.array(thetas), np.array(commuting), np.array(embedded))


def rotation_u(phi: float) -> np.ndarray:
    """U_γ = [[cos φ/2, sin φ/2], [−sin φ/2, cos φ/2]]."""
    c, s = np.cos(phi / 2), np.sin(phi / 2)
    return np.array([[c, s], [-s, c]], dtype=complex)


def tilde_rotation() -> np.ndarray:
    """Ũ = (1/√2)[[1, 1], [−1, 1]], the block rotation at φ = π/2."""
    return rotation_u(np.pi / 2)


def extraction_target(b: int) -> np.ndarray:
    """
    Bell-state target of the extracted state for outcome b:
    Φ⁺ (00), (1⊗Ũ†)Φ⁻ (01), (1⊗Ũ†)Ψ⁺ (10), Ψ⁻ (11).
    """
    rotate = np.kron(np.eye(2), tilde_rotation().conj().T)
    if b == 0:
        return bell_state(0, 0)
    if b == 1:
        return rotate @ bell_state(1, 0)
    if b == 2:
        return rotate @ bell_state(0, 1)
    if b == 3:
        return bell_state(1, 1)
    raise PreconditionError(f"Bob outcome {b} out of range.", check='outcome')


@dataclass(frozen=True, eq=False)
class ExtractionChannels:
    """Λ_A and Λ_C built from the canonical frames of Alice's and Charlie's observables."""
    alice: JordanFrame
    charlie: JordanFrame

    @property
    def tilde(self) -> np.ndarray:
        return tilde_rotation()

    def apply_pair(self, rho) -> np.ndarray:
        """(Λ_A ⊗ Λ_C)(ρ) for a state on A ⊗ C."""
        v = linalg.kron(self.alice.isometry, self.charlie.isometry)
        mapped = v @ linalg.as_cmat(rho) @ v.conj().T
        dims = [self.alice.blocks, 2, self.charlie.blocks, 2]
        return linalg.partial_trace(mapped, dims, keep=[1, 3])


def extraction_channels(a0: Observable, a1: Observable, c0: Observable, c1: Observable) -> ExtractionChannels:
    return ExtractionChannels(canonical_frame(a0, a1), canonical_frame(c0, c1))


# --- Block Analysis ---

def classify_block_solution(theta: float, phi: float, two_re_r: float, b: int) -> str:
    """
    Which solution family of cos θ cos φ + s_b sin θ sin φ · 2Re(r) = 1 the
    triple belongs to: '1a' (θ = φ), '1b' (θ = 2π − φ), '2' (commuting
    block, sin θ sin φ = 0) or 'none' when the constraint fails.
    """
    sign = BLOCK_SIGNS[b]
    residual = abs(np.cos(theta) * np.cos(phi) + sign * np.sin(theta) * np.sin(phi) * two_re_r - 1.0)
    if residual > BLOCK_CONSTRAINT_TOL:
        return BlockCase.NONE
    if abs(np.sin(theta) * np.sin(phi)) <= COMMUTING_BLOCK_TOL:
        return BlockCase.COMMUTING
    return BlockCase.EQUAL_ANGLES if sign * two_re_r >= 0 else BlockCase.MIRRORED_ANGLES


def _block_coefficients(block: np.ndarray, b: int) -> Tuple[float, complex]:
    if b in (0, 1):
        return float(block[0, 0].real), complex(block[0, 3])
    return float(block[1, 1].real), complex(block[1, 2])


def block_analysis(s: NetworkScenario, channels: Optional[ExtractionChannels] = None) -> List[BlockVerdict]:
    """
    Reads q and r of every occupied (α, γ) block of each steered state in
    the canonical frames (Charlie's blocks rotated by U_γ for b ∈ {01, 10})
    and classifies the block.
    """
    if channels is None:
        channels = extraction_channels(*outer_observables(s, 'A'), *outer_observables(s, 'C'))
    frame_a, frame_c = channels.alice, channels.charlie
    k_a, k_c = frame_a.blocks, frame_c.blocks
    v = linalg.kron(frame_a.isometry, frame_c.isometry)
    rotations = np.kron(np.eye(2 * k_a), block_diag(*[rotation_u(phi) for phi in frame_c.thetas]))

    verdicts = []
    for b in range(4):
        try:
            _, state = steered_state(s, b)
        except UndefinedConditionalError:
            logger.debug(f"Outcome {b} never occurs; no blocks to analyse.")
            continue
        mapped = v @ state.matrix @ v.conj().T
        if b in (1, 2):
            mapped = rotations @ mapped @ rotations.conj().T
        tensor = mapped.reshape(k_a, 2, k_c, 2, k_a, 2, k_c, 2)
        for alpha in range(k_a):
            for gamma in range(k_c):
                block = tensor[alpha, :, gamma, :, alpha, :, gamma, :].reshape(4, 4)
                weight = float(np.trace(block).real)
                if weight <= PROBABILITY_FLOOR:
                    continue
                q, r = _block_coefficients(block / weight, b)
                theta, phi = float(frame_a.thetas[alpha]), float(frame_c.thetas[gamma])
                case = classify_block_solution(theta, phi, 2 * r.real, b)
                verdicts.append(BlockVerdict(b, alpha, gamma, weight, theta, phi, q, r, case))
    return verdicts


# --- Families ---

def jordan_observables(f: JordanFamily) -> Tuple[Observable, Observable, Observable, Observable]:
    """A0 = ⊕σz, A1 = ⊕(cos θ_α σz + sin θ_α σx), and likewise C0, C1 with φ_γ."""
    def pair(angles):
        first = block_diag(*[_SIGMA_Z for _ in angles])
        second = block_diag(*[np.cos(t) * _SIGMA_Z + np.sin(t) * _SIGMA_X for t in angles])
        return Observable(first), Observable(second)

    a0, a1 = pair(f.thetas)
    c0, c1 = pair(f.phis)
    return a0, a1, c0, c1


def jordan_scenario(f: JordanFamily) -> NetworkScenario:
    """
    Bilocality scenario with the family's observables. S_AB emits
    diag(w_A) ⊗ Φ⁺ on (A'', A', B1) and S_BC emits Φ⁺ ⊗ diag(w_C) on
    (B2, C'', C'), so block weights live on the junk registers.

    Raises:
        DimensionError: if the global state exceeds the tensor-product cap.
    """
    a0, a1, c0, c1 = jordan_observables(f)
    k_a, k_c = f.alice_blocks, f.charlie_blocks
    phi_plus = bell_projector(0)
    rho_ab = np.kron(np.diag(f.alice_weights), phi_plus)
    rho_bc = linalg.permute_subsystems(np.kron(np.diag(f.charlie_weights), phi_plus), [k_c, 2, 2], [1, 0, 2])
    return with_observables((a0, a1), (c0, c1), rho_ab=DensityMatrix(rho_ab), rho_bc=DensityMatrix(rho_bc))


def jordan_family_from_scenario(s: NetworkScenario) -> JordanFamily:
    """Angles, block weights of the reduced states and q, r of every steered block."""
    channels = extraction_channels(*outer_observables(s, 'A'), *outer_observables(s, 'C'))
    frame_a, frame_c = channels.alice, channels.charlie
    w_a = frame_a.block_weights(reduced_state(s, 'A').matrix)
    w_c = frame_c.block_weights(reduced_state(s, 'C').matrix)
    shape = (4, frame_a.blocks, frame_c.blocks)
    q = np.zeros(shape)
    r = np.zeros(shape, dtype=complex)
    for verdict in block_analysis(s, channels):
        q[verdict.b, verdict.alpha, verdict.gamma] = verdict.q
        r[verdict.b, verdict.alpha, verdict.gamma] = verdict.r
    return JordanFamily(frame_a.thetas, frame_c.thetas, w_a / w_a.sum(), w_c / w_c.sum(), q=q, r=r)
