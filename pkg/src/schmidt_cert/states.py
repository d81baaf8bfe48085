"""Bipartite state primitives on C^d (x) C^d.

Composite index convention: ``i*d + j`` corresponds to ``|i>|j>``, so a
length-d**2 vector reshapes row-major into the d x d coefficient matrix
used by the Schmidt decomposition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import polar
from scipy.stats import unitary_group

from .errors import DimensionError, ValidationError

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10


def local_dim(size: int) -> int:
    """Local dimension d of a composite space of dimension ``size`` = d**2."""
    d = math.isqrt(size)
    if d * d != size or d < 1:
        raise DimensionError(f"composite dimension {size} is not a perfect square")
    return d


def validate_state_vector(psi, d: int | None = None, tol: float = NORM_TOL) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    dd = local_dim(psi.size)
    if d is not None and dd != d:
        raise DimensionError(f"state has local dimension {dd}, expected {d}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol:
        raise ValidationError(f"state vector norm {norm!r} differs from 1 by more than {tol}")
    return psi


def validate_density_matrix(
    rho,
    d: int | None = None,
    hermitian_tol: float = HERMITIAN_TOL,
    trace_tol: float = TRACE_TOL,
    psd_tol: float = PSD_TOL,
) -> np.ndarray:
    """Check that ``rho`` is a valid bipartite density matrix and return it as an array.

    Raises
    ------
    DimensionError
        If ``rho`` is not square of size d**2 (or does not match ``d``).
    ValidationError
        If ``rho`` is not Hermitian, not unit trace, or has an eigenvalue
        below ``-psd_tol``.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"density matrix must be square, got shape {rho.shape}")
    dd = local_dim(rho.shape[0])
    if d is not None and dd != d:
        raise DimensionError(f"density matrix has local dimension {dd}, expected {d}")
    herm_dev = np.abs(rho - rho.conj().T).max()
    if herm_dev > hermitian_tol:
        raise ValidationError(f"density matrix not Hermitian (deviation {herm_dev:.3e})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise ValidationError(f"density matrix trace {tr!r} differs from 1")
    lam_min = np.linalg.eigvalsh(rho)[0]
    if lam_min < -psd_tol:
        raise ValidationError(f"density matrix has negative eigenvalue {lam_min:.3e}")
    return rho


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    return np.outer(psi, psi.conj())


def max_entangled_state(d: int) -> np.ndarray:
    """(1/sqrt(d)) sum_i |ii>."""
    if int(d) != d or d < 2:
        raise DimensionError(f"local dimension must be an integer >= 2, got {d!r}")
    d = int(d)
    psi = np.zeros(d * d, dtype=complex)
    psi[np.arange(d) * (d + 1)] = 1.0 / math.sqrt(d)
    return psi


def conjugate_local(vec) -> np.ndarray:
    """Entrywise complex conjugate in the computational basis."""
    return np.conj(np.asarray(vec, dtype=complex))


def product_state(alpha, beta) -> np.ndarray:
    return np.kron(np.asarray(alpha, dtype=complex), np.asarray(beta, dtype=complex))


@dataclass(frozen=True)
class SchmidtDecomposition:
    coefficients: np.ndarray
    left_vectors: np.ndarray  # columns are |alpha_i>
    right_vectors: np.ndarray  # columns are |beta_i>
    rank: int

    def reconstruct(self) -> np.ndarray:
        d = self.left_vectors.shape[0]
        mat = (self.left_vectors * self.coefficients) @ self.right_vectors.T
        return mat.reshape(d * d)


def schmidt_decompose(psi, tol: float = 1e-10) -> SchmidtDecomposition:
    """Schmidt decomposition via the SVD of the d x d coefficient matrix.

    The rank counts coefficients strictly greater than ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    psi = validate_state_vector(psi)
    d = local_dim(psi.size)
    u, s, vh = np.linalg.svd(psi.reshape(d, d))
    return SchmidtDecomposition(
        coefficients=s,
        left_vectors=u,
        right_vectors=vh.T,
        rank=int(np.count_nonzero(s > tol)),
    )


def fidelity_overlap(rho, d: int | None = None) -> float:
    """<phi+|rho|phi+>, the identity-unitary evaluation of the entanglement fidelity."""
    rho = validate_density_matrix(rho, d)
    dd = local_dim(rho.shape[0])
    idx = np.arange(dd) * (dd + 1)
    value = rho[np.ix_(idx, idx)].sum().real / dd
    return float(min(max(value, 0.0), 1.0))


def _fidelity_form(rho: np.ndarray, d: int) -> np.ndarray:
    # f(U) = u^H Q u with u = vec(U) (row-major), Q[(a,b),(c,e)] = conj(rho[(b,a),(e,c)]) / d
    t = rho.reshape(d, d, d, d).transpose(1, 0, 3, 2).reshape(d * d, d * d)
    return np.conj(t) / d


def _rotated_overlap(q: np.ndarray, u: np.ndarray) -> float:
    vec = u.reshape(-1)
    return float(np.vdot(vec, q @ vec).real)


def fidelity_ascent(
    rho,
    max_iters: int = 500,
    restarts: int = 4,
    seed: int = 0,
    tol: float = 1e-13,
) -> float:
    """Heuristic maximisation of <phi+|(U x 1) rho (U x 1)^dag|phi+> over unitaries U.

    Each iteration builds the alignment matrix (the gradient of the overlap,
    a convex quadratic form in U) and replaces U with the unitary factor of
    its polar decomposition, which never decreases the overlap. The first
    start is the identity; the remaining ``restarts`` are Haar-random.

    The result is a lower bound on the true maximum, not a certificate.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    rho = validate_density_matrix(rho)
    d = local_dim(rho.shape[0])
    q = _fidelity_form(rho, d)
    rng = np.random.default_rng(seed)

    starts = [np.eye(d, dtype=complex)]
    for _ in range(restarts):
        starts.append(unitary_group.rvs(d, random_state=rng))

    best = 0.0
    for u in starts:
        value = _rotated_overlap(q, u)
        for _ in range(max_iters):
            grad = (q @ u.reshape(-1)).reshape(d, d)
            if np.abs(grad).max() == 0.0:
                break
            u_new = polar(grad)[0]
            new_value = _rotated_overlap(q, u_new)
            if new_value < value:
                break
            u, improved = u_new, new_value - value
            value = new_value
            if improved <= tol:
                break
        best = max(best, value)
    return float(min(best, 1.0))
