# netnl/services/linalg.py
"""
Dense Complex Linear Algebra Kernel.

Small-matrix helpers used by every quantum computation in the package:
tensor products with a size cap, partial traces and transposes, subsystem
permutations, a cyclic Jacobi eigensolver for Hermitian matrices and a few
derived quantities (fidelity, spectral norm, support projector).

Convention: subsystem 0 is the leftmost tensor factor.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from ..config import Config
from ..core.constants import ALGEBRAIC_TOL, STRUCTURAL_TOL, SUPPORT_TOL
from ..core.exceptions import DimensionError, PreconditionError, SolverError

logger = logging.getLogger(__name__)

CMat = np.ndarray

_MAX_JACOBI_SWEEPS = 100


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Eigenvalues sorted ascending, eigenvectors as orthonormal columns."""
    eigenvalues: np.ndarray
    eigenvectors: CMat

    def reconstruct(self) -> CMat:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def max_eigenvalue(self) -> float:
        return float(self.eigenvalues[-1])


def as_cmat(m, name: str = 'matrix') -> CMat:
    """Converts input to a finite 2-D complex array. 1-D input becomes a column vector."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionError(f"{name} must be a non-empty 2-D array.", actual=arr.shape)
    if not np.all(np.isfinite(arr)):
        raise PreconditionError(f"{name} contains NaN or infinite entries.", check='finite')
    return arr


def _square(m: CMat, name: str = 'matrix') -> CMat:
    m = as_cmat(m, name)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square.", actual=m.shape)
    return m


def dagger(m) -> CMat:
    return np.conj(as_cmat(m)).T


def projector(psi) -> CMat:
    v = as_cmat(psi, 'state vector').reshape(-1, 1)
    return v @ v.conj().T


def max_norm(m) -> float:
    """Largest absolute entry."""
    arr = np.asarray(m)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def hermiticity_defect(m) -> float:
    m = _square(m)
    return max_norm(m - m.conj().T)


def kron(a, b, cap: Optional[int] = None) -> CMat:
    """
    Kronecker product a ⊗ b.

    Raises:
        DimensionError: if the product would have more entries than `cap`
            (default `Config.KRON_ENTRY_CAP`).
    """
    a = as_cmat(a, 'left factor')
    b = as_cmat(b, 'right factor')
    cap = Config.KRON_ENTRY_CAP if cap is None else cap
    entries = a.size * b.size
    if entries > cap:
        raise DimensionError(
            f"Tensor product with {entries} entries exceeds the cap of {cap}.",
            expected=cap, actual=entries,
        )
    return np.kron(a, b)


def kron_all(factors: Sequence, cap: Optional[int] = None) -> CMat:
    if not factors:
        raise DimensionError("kron_all needs at least one factor.")
    result = as_cmat(factors[0])
    for factor in factors[1:]:
        result = kron(result, factor, cap=cap)
    return result


def _check_dims(m: CMat, dims: Sequence[int]) -> list:
    dims = [int(d) for d in dims]
    if not dims or any(d <= 0 for d in dims):
        raise DimensionError("Subsystem dimensions must be positive.", actual=dims)
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise DimensionError(
            "Operator dimension does not match the product of subsystem dimensions.",
            expected=(total, total), actual=m.shape,
        )
    return dims


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> CMat:
    """
    Traces out every subsystem not listed in `keep`.
    The kept subsystems appear in ascending order.
    """
    m = _square(m)
    dims = _check_dims(m, dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise DimensionError("keep must be a non-empty subset of subsystem indices.", actual=keep)
    tensor = m.reshape(dims + dims)
    row_idx = list(range(n))
    col_idx = [n + k if k in keep else k for k in range(n)]
    out_idx = keep + [n + k for k in keep]
    reduced = np.einsum(tensor, row_idx + col_idx, out_idx)
    d_keep = int(np.prod([dims[k] for k in keep]))
    return reduced.reshape(d_keep, d_keep)


def partial_transpose(m, dims: Sequence[int], systems: Iterable[int]) -> CMat:
    """Transposes the listed subsystems in the computational basis."""
    m = _square(m)
    dims = _check_dims(m, dims)
    n = len(dims)
    systems = set(int(s) for s in systems)
    if any(s < 0 or s >= n for s in systems):
        raise DimensionError("Partial transpose subsystem out of range.", actual=sorted(systems))
    axes = list(range(2 * n))
    for s in systems:
        axes[s], axes[n + s] = axes[n + s], axes[s]
    total = m.shape[0]
    return m.reshape(dims + dims).transpose(axes).reshape(total, total)


def permute_subsystems(m, dims: Sequence[int], order: Sequence[int]) -> CMat:
    """Returns the operator whose subsystem i is subsystem order[i] of `m`."""
    m = _square(m)
    dims = _check_dims(m, dims)
    n = len(dims)
    order = [int(o) for o in order]
    if sorted(order) != list(range(n)):
        raise DimensionError("order must be a permutation of the subsystem indices.", actual=order)
    total = m.shape[0]
    axes = order + [n + o for o in order]
    return m.reshape(dims + dims).transpose(axes).reshape(total, total)


def hermitian_eigen(m, tol: float = STRUCTURAL_TOL) -> EigenDecomposition:
    """
    Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Each rotation first removes the phase of the pivot entry, then applies
    the real symmetric Jacobi rotation that zeroes it. Sweeps continue until
    the off-diagonal Frobenius norm is at rounding level.

    Raises:
        PreconditionError: if `m` is not Hermitian within `tol`.
        SolverError: if the sweeps do not converge.
    """
    m = _square(m)
    defect = hermiticity_defect(m)
    if defect > tol:
        raise PreconditionError("Matrix is not Hermitian.", check='hermitian', deviation=defect)

    n = m.shape[0]
    a = (m + m.conj().T) / 2
    v = np.eye(n, dtype=complex)
    scale = max(float(np.linalg.norm(a)), np.finfo(float).tiny)
    threshold = max(1e-15, n * np.finfo(float).eps) * scale

    for sweep in range(_MAX_JACOBI_SWEEPS):
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                beta = a[p, q]
                magnitude = abs(beta)
                if magnitude <= 1e-300:
                    continue
                phase = beta / magnitude
                tau = (a[q, q].real - a[p, p].real) / (2.0 * magnitude)
                sign = 1.0 if tau >= 0 else -1.0
                t = sign / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                rotation = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                pq = [p, q]
                a[:, pq] = a[:, pq] @ rotation
                a[pq, :] = rotation.conj().T @ a[pq, :]
                a[p, q] = 0.0
                a[q, p] = 0.0
                v[:, pq] = v[:, pq] @ rotation
    else:
        raise SolverError("Jacobi eigensolver did not converge.", iterations=_MAX_JACOBI_SWEEPS)

    eigenvalues = np.real(np.diag(a)).copy()
    order = np.argsort(eigenvalues, kind='stable')
    logger.debug(f"Jacobi eigensolver converged for dimension {n} after {sweep} sweeps.")
    return EigenDecomposition(eigenvalues=eigenvalues[order], eigenvectors=v[:, order])


def min_eigenvalue(m) -> float:
    return hermitian_eigen(m).min_eigenvalue


def spectral_norm(m) -> float:
    """Largest singular value, computed from the Hermitian square m†m."""
    m = as_cmat(m)
    gram = m.conj().T @ m
    top = hermitian_eigen((gram + gram.conj().T) / 2).max_eigenvalue
    return float(np.sqrt(max(top, 0.0)))


def support_projector(rho, tol: float = SUPPORT_TOL) -> CMat:
    """Projector onto the span of eigenvectors with eigenvalue above `tol`."""
    eig = hermitian_eigen(rho)
    cols = eig.eigenvectors[:, eig.eigenvalues > tol]
    return cols @ cols.conj().T


def anticommutator(a, b) -> CMat:
    a = as_cmat(a)
    b = as_cmat(b)
    return a @ b + b @ a


def fidelity_pure(rho, psi) -> float:
    """
    Overlap ⟨ψ|ρ|ψ⟩ of a density matrix with a pure state.

    Raises:
        DimensionError: if the state vector does not match the matrix.
    """
    rho = _square(rho, 'density matrix')
    vec = as_cmat(psi, 'state vector').reshape(-1)
    if vec.shape[0] != rho.shape[0]:
        raise DimensionError(
            "State vector dimension does not match the density matrix.",
            expected=rho.shape[0], actual=vec.shape[0],
        )
    value = np.vdot(vec, rho @ vec)
    if abs(value.imag) > ALGEBRAIC_TOL:
        logger.warning(f"Fidelity has imaginary residue {value.imag:.3e}; input may not be Hermitian.")
    return float(min(max(value.real, 0.0), 1.0))
