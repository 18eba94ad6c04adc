r"""Phase-space linear algebra.

Index convention, used everywhere in the package: phase-space vectors are
ordered mode-major, ``(q_1, p_1, q_2, p_2, ...)``, so each mode occupies a
contiguous 2x2 block. The symplectic form is then

.. math:: \Delta = \bigoplus_{k=1}^n \begin{pmatrix} 0 & 1 \\ -1 & 0 \end{pmatrix},

and ``[phi_f, phi_g] = i (f, Delta g)`` for the field operators
``phi_f = f . (q, p)``.
"""

import numpy as np
from scipy.linalg import schur

from .exceptions import InvalidDimensionError, InvalidStateError, NumericalFailureError

#: slack used by every positivity test
POSITIVITY_SLACK = 1e-10

#: residual tolerance for the Williamson factorisation
WILLIAMSON_TOL = 1e-8

_J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def standard_symplectic_form(n):
    """Symplectic form on ``n`` modes in mode-major ordering.

    Args:
        n (int): number of modes, ``n >= 1``.

    Returns:
        array[float]: the ``2n x 2n`` block-diagonal matrix with blocks ``[[0, 1], [-1, 0]]``.
    """
    if int(n) != n or n < 1:
        raise InvalidDimensionError(f"mode count must be a positive integer, got {n!r}")
    return np.kron(np.eye(int(n)), _J2)


def mode_count(matrix):
    """Number of modes of a square even-dimensional phase-space matrix."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidDimensionError(f"expected a square matrix, got shape {matrix.shape}")
    if matrix.shape[0] % 2 or matrix.shape[0] == 0:
        raise InvalidDimensionError(f"phase-space dimension must be even and positive, got {matrix.shape[0]}")
    return matrix.shape[0] // 2


def hermitian_min_eig(matrix):
    """Smallest eigenvalue of the Hermitian part of ``matrix``.

    The input is symmetrised as ``(M + M^H) / 2`` first, so small roundoff
    asymmetries do not matter.
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidDimensionError(f"expected a square matrix, got shape {matrix.shape}")
    herm = 0.5 * (matrix + matrix.conj().T)
    return float(np.linalg.eigvalsh(herm)[0])


def symplectic_inverse(S, delta=None):
    """Inverse of a symplectic matrix, ``S^{-1} = -Delta S^T Delta``."""
    if delta is None:
        delta = standard_symplectic_form(mode_count(S))
    return -delta @ S.T @ delta


def symplectic_residual(S, delta):
    """Max-norm of ``S^T Delta S - Delta``."""
    return float(np.max(np.abs(S.T @ delta @ S - delta)))


def symplectic_eigenvalues(A, delta=None):
    """Symplectic eigenvalues of ``A`` in descending order.

    These are the moduli of the eigenvalues of ``i Delta A``, which come in
    ``+/-`` pairs; each pair contributes one value.
    """
    n = mode_count(A)
    if delta is None:
        delta = standard_symplectic_form(n)
    ev = np.sort(np.abs(np.linalg.eigvals(1j * delta @ A)).real)[::-1]
    return ev[::2].copy()


def _williamson_single_mode(A):
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    if not (A[0, 0] > 0 and det > 0):
        raise InvalidStateError("covariance matrix is not positive definite")
    nu = np.sqrt(det)
    # A / nu has unit determinant, so its symmetric square root is symplectic
    M = A / nu
    S = (M + np.eye(2)) / np.sqrt(np.trace(M) + 2.0)
    return S, np.array([nu])


def _williamson_schur(A, delta):
    n = A.shape[0] // 2
    evals, evecs = np.linalg.eigh(A)
    if evals[0] <= 0:
        raise InvalidStateError("covariance matrix is not positive definite")
    a_half = (evecs * np.sqrt(evals)) @ evecs.T
    a_mhalf = (evecs / np.sqrt(evals)) @ evecs.T
    M = a_mhalf @ delta @ a_mhalf
    M = 0.5 * (M - M.T)
    T, O = schur(M, output="real")

    t = np.empty(n)
    for k in range(n):
        i = 2 * k
        tk = 0.5 * (T[i, i + 1] - T[i + 1, i])
        if tk < 0:
            O[:, [i, i + 1]] = O[:, [i + 1, i]]
            tk = -tk
        t[k] = tk
    nu = 1.0 / t
    order = np.argsort(-nu, kind="stable")
    perm = np.concatenate([[2 * k, 2 * k + 1] for k in order])
    O = O[:, perm]
    nu = nu[order]
    d_mhalf = np.repeat(1.0 / np.sqrt(nu), 2)
    S = d_mhalf[:, None] * (O.T @ a_half)
    return S, nu


def williamson(A, delta=None):
    r"""Williamson normal form of a real symmetric positive-definite matrix.

    Finds a symplectic ``S`` and symplectic eigenvalues ``nu`` such that

    .. math:: S^T D S = A, \qquad D = \bigoplus_k \nu_k \mathbb{1}_2 .

    A single mode uses the closed form ``S = sqrt(A / sqrt(det A))``. Larger
    matrices go through the real Schur form of ``A^{-1/2} Delta A^{-1/2}``.

    Args:
        A (array[float]): ``2n x 2n`` covariance matrix.
        delta (array[float]): symplectic form, defaults to the standard one.

    Returns:
        tuple[array, array]: ``(S, nu)`` with ``nu`` sorted in descending order.

    Raises:
        InvalidStateError: if ``A`` is not positive definite.
        NumericalFailureError: if the factorisation residuals exceed ``1e-8``.
    """
    A = np.asarray(A, dtype=float)
    n = mode_count(A)
    if delta is None:
        delta = standard_symplectic_form(n)
    A = 0.5 * (A + A.T)
    if n == 1 and np.array_equal(delta, _J2):
        S, nu = _williamson_single_mode(A)
    else:
        S, nu = _williamson_schur(A, delta)

    scale = max(1.0, float(np.max(np.abs(A))))
    D = np.diag(np.repeat(nu, 2))
    r_symp = symplectic_residual(S, delta)
    r_rec = float(np.max(np.abs(S.T @ D @ S - A)))
    if r_symp > WILLIAMSON_TOL or r_rec > WILLIAMSON_TOL * scale:
        raise NumericalFailureError(
            f"Williamson residuals too large: symplectic {r_symp:.3e}, reconstruction {r_rec:.3e}"
        )
    return S, nu
