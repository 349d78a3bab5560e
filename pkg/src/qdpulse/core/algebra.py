"""Dense complex linear algebra for the 16-dimensional four-dot problem

Matrices are plain ``numpy.ndarray`` objects of dtype complex128 laid out
row-major. Composite indices of a bipartite space follow
``(x, y) -> x * dim_b + y``; ``composite_index``/``split_index`` own that rule.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from qdpulse.core.errors import (
    DimensionMismatch,
    NoConvergence,
    NotHermitian,
    NotPositive,
)

logger = logging.getLogger(__name__)

ComplexMatrix = np.ndarray

MAX_DIM = 64
POSITIVITY_FLOOR = 1e-7
JACOBI_MAX_SWEEPS = 100
JACOBI_REL_TOL = 1e-12


def frozen(a: np.ndarray) -> np.ndarray:
    """Return a read-only copy of ``a``"""
    out = np.array(a, dtype=complex, copy=True)
    out.flags.writeable = False
    return out


IDENTITY_2 = frozen(np.eye(2))
SIGMA_X = frozen([[0, 1], [1, 0]])
SIGMA_Y = frozen([[0, -1j], [1j, 0]])
SIGMA_Z = frozen([[1, 0], [0, -1]])
SIGMA_MINUS = frozen((SIGMA_X - 1j * SIGMA_Y) / 2)
SIGMA_PLUS = frozen((SIGMA_X + 1j * SIGMA_Y) / 2)


def as_matrix(a) -> ComplexMatrix:
    """Coerce to a square complex matrix

    Raises:
        DimensionMismatch: if the input is not square or its size is out of range
    """
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not 0 < m.shape[0] <= MAX_DIM:
        raise DimensionMismatch(f"dimension {m.shape[0]} outside 1..{MAX_DIM}")
    return m


def composite_index(x: int, y: int, dim_b: int) -> int:
    """Row-major index of the product basis state (x, y)"""
    return x * dim_b + y


def split_index(index: int, dim_b: int) -> Tuple[int, int]:
    """Inverse of ``composite_index``"""
    return divmod(index, dim_b)


def kron(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Kronecker product, ``result[i*db+k, j*db+l] = a[i,j] * b[k,l]``"""
    return np.kron(as_matrix(a), as_matrix(b))


def dagger(a: ComplexMatrix) -> ComplexMatrix:
    """Conjugate transpose"""
    return as_matrix(a).conj().T


def matmul(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Matrix product of two matrices of equal dimension"""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def trace(a: ComplexMatrix) -> complex:
    """Sum of the diagonal

    Args:
        a: Square matrix

    Returns:
        Trace as a Python complex
    """
    return complex(np.trace(as_matrix(a)))


def frobenius_norm(a: ComplexMatrix) -> float:
    """Frobenius norm sqrt(sum |a_ij|^2)

    Args:
        a: Square matrix

    Returns:
        Norm as a float
    """
    return float(np.linalg.norm(as_matrix(a), "fro"))


def allclose(a: ComplexMatrix, b: ComplexMatrix, *, atol: float) -> bool:
    """Elementwise comparison with an explicit absolute tolerance"""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        return False
    return bool(np.max(np.abs(a - b), initial=0.0) <= atol)


def hermiticity_drift(a: ComplexMatrix) -> float:
    """Largest elementwise deviation ``|a - a^dagger|``"""
    a = np.asarray(a)
    return float(np.max(np.abs(a - a.conj().T)))


def anticommutator(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """{a, b} = ab + ba

    Raises:
        DimensionMismatch: if the dimensions differ
    """
    return matmul(a, b) + matmul(b, a)


def commutator(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """[a, b] = ab - ba

    Raises:
        DimensionMismatch: if the dimensions differ
    """
    return matmul(a, b) - matmul(b, a)


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues paired with the columns of a unitary matrix"""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> ComplexMatrix:
        """Rebuild V diag(w) V^dagger"""
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def __len__(self) -> int:
        return len(self.eigenvalues)


def jacobi_eigh(a: ComplexMatrix, max_sweeps: int = JACOBI_MAX_SWEEPS,
                rel_tol: float = JACOBI_REL_TOL) -> Spectrum:
    """Cyclic complex Jacobi diagonalization of a Hermitian matrix

    Each rotation removes the phase of the pivot ``a[p, q]`` and then applies
    the real Jacobi rotation that zeroes it.

    Args:
        a: Hermitian matrix
        max_sweeps: Sweep budget
        rel_tol: Stop once the off-diagonal Frobenius mass drops below
            ``rel_tol * ||a||_F``

    Returns:
        Spectrum sorted ascending

    Raises:
        NoConvergence: if the sweep budget is exhausted
    """
    work = np.array(as_matrix(a), copy=True)
    n = work.shape[0]
    vectors = np.eye(n, dtype=complex)
    scale = np.linalg.norm(work, "fro")
    threshold = rel_tol * scale

    def off_mass() -> float:
        return float(np.sqrt(max(0.0, np.linalg.norm(work, "fro") ** 2
                                 - np.sum(np.abs(np.diag(work)) ** 2))))

    residual = off_mass()
    sweeps = 0
    while residual >= threshold and scale > 0.0:
        if sweeps >= max_sweeps:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps", residual)
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = work[p, q]
                mag = abs(g)
                if mag == 0.0:
                    continue
                phase = g / mag
                app, aqq = work[p, p].real, work[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                t = 1.0 / (abs(tau) + np.sqrt(1.0 + tau * tau))
                if tau < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rot = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                cols = [p, q]
                work[:, cols] = work[:, cols] @ rot
                work[cols, :] = rot.conj().T @ work[cols, :]
                work[p, q] = work[q, p] = 0.0
                vectors[:, cols] = vectors[:, cols] @ rot
        sweeps += 1
        residual = off_mass()

    logger.debug(f"Jacobi converged after {sweeps} sweeps (residual={residual:.2e})")
    values = np.real(np.diag(work))
    order = np.argsort(values, kind="stable")
    return Spectrum(eigenvalues=values[order], eigenvectors=vectors[:, order])


def hermitian_eig(a: ComplexMatrix, tol: float = 1e-10, method: str = "lapack") -> Spectrum:
    """Eigendecomposition of a Hermitian matrix

    Args:
        a: Matrix to decompose
        tol: Allowed ``max|a - a^dagger|``
        method: ``"lapack"`` (numpy.linalg.eigh) or ``"jacobi"``

    Raises:
        NotHermitian: if ``a`` deviates from its adjoint by more than ``tol``
    """
    a = as_matrix(a)
    drift = hermiticity_drift(a)
    if drift > tol:
        raise NotHermitian(f"matrix is not Hermitian within {tol:g} (drift={drift:.3e})")
    if method == "jacobi":
        return jacobi_eigh(a)
    if method != "lapack":
        raise ValueError(f"Unknown eigensolver method: {method}")
    values, vectors = np.linalg.eigh((a + a.conj().T) / 2)
    return Spectrum(eigenvalues=values, eigenvectors=vectors)


def eigvalsh(a: ComplexMatrix) -> np.ndarray:
    """Ascending eigenvalues of the Hermitian part of ``a``"""
    a = np.asarray(a)
    return np.linalg.eigvalsh((a + a.conj().T) / 2)


def _partial_transpose(rho: ComplexMatrix, dim_a: int, dim_b: int, axes) -> ComplexMatrix:
    rho = as_matrix(rho)
    if rho.shape[0] != dim_a * dim_b:
        raise DimensionMismatch(
            f"matrix of dimension {rho.shape[0]} is not a {dim_a}x{dim_b} bipartition"
        )
    return rho.reshape(dim_a, dim_b, dim_a, dim_b).transpose(axes).reshape(rho.shape)


def partial_transpose_first(rho: ComplexMatrix, dim_a: int, dim_b: int) -> ComplexMatrix:
    """Transpose the first tensor factor: ``out[(a',b),(a,b')] = rho[(a,b),(a',b')]``"""
    return _partial_transpose(rho, dim_a, dim_b, (2, 1, 0, 3))


def partial_transpose_second(rho: ComplexMatrix, dim_a: int, dim_b: int) -> ComplexMatrix:
    """Transpose the second tensor factor: ``out[(a,b'),(a',b)] = rho[(a,b),(a',b')]``"""
    return _partial_transpose(rho, dim_a, dim_b, (0, 3, 2, 1))


def hermitian_sqrt(a: ComplexMatrix, floor: float = POSITIVITY_FLOOR) -> ComplexMatrix:
    """Principal square root of a positive semidefinite Hermitian matrix

    Eigenvalues in ``[-floor, 0)`` are treated as round-off and clipped to zero.

    Raises:
        NotPositive: if an eigenvalue lies below ``-floor``
    """
    values, vectors = np.linalg.eigh((np.asarray(a) + np.asarray(a).conj().T) / 2)
    if values[0] < -floor:
        raise NotPositive(f"eigenvalue {values[0]:.3e} below -{floor:g}")
    roots = np.sqrt(np.clip(values, 0.0, None))
    return (vectors * roots) @ vectors.conj().T
