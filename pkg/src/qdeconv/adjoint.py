r"""Metric adjoints of a Gaussian channel on the first-moment sector.

Given a prior with covariance ``A`` and a channel ``(X, Y)`` with output
covariance ``B = X^T A X + Y``, the transpose of the channel with respect to
an information metric at the prior maps field operators as
``phi_f -> phi_{X_* f}``. Two metrics have closed forms:

* square-root metric (the transpose is the Petz recovery channel)::

      X_* = R^B_{-1/2} (B + i/2 Delta)^{-1} X^T (A + i/2 Delta) R^A_{1/2}

* Bures metric, and the classical Fisher metric on the same sector::

      X_* = B^{-1} X^T A

``X_*`` is returned as a real matrix; for the square-root metric the
imaginary part of the complex product is measured and must vanish first.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    InvalidDimensionError,
    NumericalFailureError,
    SingularMatrixError,
    WrongMetricError,
)
from .gaussian import GaussianState, apply_channel
from .imtime import EPSILON_PURITY, _normal_form_propagator, normal_modes

#: relative tolerance on the imaginary part of the square-root kernel
REALNESS_TOL = 1e-8


class MetricKind(enum.Enum):
    SQUARE_ROOT = "sqrt"
    BURES = "bures"
    CLASSICAL_FISHER = "classical"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown metric {value!r}; expected one of {names}") from None


@dataclass(frozen=True, eq=False)
class ReconstructionKernel:
    """A real reconstruction kernel ``X_*`` and the model that produced it.

    ``r_prior`` and ``r_noisy`` hold ``R^A_{1/2}`` and ``R^B_{1/2}`` for the
    square-root metric (``None`` otherwise); ``imag_max`` is the largest
    discarded imaginary entry.
    """

    X_star: np.ndarray
    metric: MetricKind
    prior_cov: np.ndarray
    noisy_cov: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    delta: np.ndarray
    imag_max: float = 0.0
    r_prior: np.ndarray = None
    r_noisy: np.ndarray = None


def bures_kernel_matrix(A, X, B):
    """``B^{-1} X^T A`` for matrices of any matching square shape."""
    A, X, B = (np.atleast_2d(np.asarray(m, dtype=float)) for m in (A, X, B))
    try:
        return np.linalg.solve(B, X.T @ A)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("noisy covariance B is singular") from exc


def petz_kernel_formula(A, B, X, delta, r_prior, r_noisy_minus):
    """Direct dense evaluation of the square-root-metric kernel.

    Evaluates ``R^B_{-1/2} (B + i/2 Delta)^{-1} X^T (A + i/2 Delta) R^A_{1/2}``
    with a general complex inverse, from explicitly supplied propagators.
    Passing ``delta = 0`` and identity propagators gives the classical limit.

    Returns:
        array[complex]
    """
    KB = B + 0.5j * delta
    KA = A + 0.5j * delta
    try:
        return r_noisy_minus @ np.linalg.solve(KB, X.T @ KA @ r_prior)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("B + (i/2) Delta is singular") from exc


def _resolvent_times_propagator(modes):
    # R^B_{-1/2} (B + i/2 Delta)^{-1}, with the inverse taken in Williamson
    # coordinates where it is 2x2 per mode and exact in closed form
    n = len(modes.nu)
    inner = np.zeros((2 * n, 2 * n), dtype=complex)
    R = _normal_form_propagator(modes.beta_omega, -0.5)
    for k, nu in enumerate(modes.nu):
        blk = slice(2 * k, 2 * k + 2)
        inv = np.array([[nu, -0.5j], [0.5j, nu]]) / ((nu - 0.5) * (nu + 0.5))
        inner[blk, blk] = R[blk, blk] @ inv
    return modes.S_inv @ inner @ modes.S_inv.T


def _state_times_propagator(modes):
    # (A + i/2 Delta) R^A_{1/2} = S^T [(D + i/2 Delta) R'_{1/2}] S, using
    # S^T Delta S = Delta; the bracket is 2x2 per mode
    n = len(modes.nu)
    inner = np.zeros((2 * n, 2 * n), dtype=complex)
    R = _normal_form_propagator(modes.beta_omega, 0.5)
    for k, nu in enumerate(modes.nu):
        blk = slice(2 * k, 2 * k + 2)
        inner[blk, blk] = np.array([[nu, 0.5j], [-0.5j, nu]]) @ R[blk, blk]
    return modes.S.T @ inner @ modes.S


def _prepare(prior, chan, check):
    noisy = apply_channel(chan, prior, check=check)
    return prior.cov, noisy.cov, chan.X, chan.Y, prior.delta


def transpose_kernel_sqrt(prior, chan, epsilon_purity=EPSILON_PURITY, check=True):
    """Transpose of ``chan`` at ``prior`` for the square-root metric.

    Raises:
        PuritySingularityError: if a mode of the prior or of the noisy state
            has symplectic eigenvalue within ``epsilon_purity`` of 1/2.
        NumericalFailureError: if the complex kernel is not real to within
            ``1e-8`` relative.
    """
    A, B, X, Y, delta = _prepare(prior, chan, check)
    ma = normal_modes(A, delta, epsilon_purity)
    mb = normal_modes(B, delta, epsilon_purity)
    r_prior = ma.S_inv @ _normal_form_propagator(ma.beta_omega, 0.5) @ ma.S
    r_noisy = mb.S_inv @ _normal_form_propagator(mb.beta_omega, 0.5) @ mb.S
    Xs = _resolvent_times_propagator(mb) @ X.T @ _state_times_propagator(ma)

    imag_max = float(np.max(np.abs(Xs.imag)))
    scale = float(np.max(np.abs(Xs.real)))
    if imag_max > REALNESS_TOL * max(scale, np.finfo(float).tiny):
        raise NumericalFailureError(
            f"square-root kernel has imaginary part {imag_max:.3e} (scale {scale:.3e})"
        )
    return ReconstructionKernel(
        Xs.real.copy(), MetricKind.SQUARE_ROOT, A, B, X, Y, delta, imag_max, r_prior, r_noisy
    )


def transpose_kernel_bures(prior, chan, check=True, metric=MetricKind.BURES):
    """Transpose of ``chan`` at ``prior`` for the Bures metric, ``B^{-1} X^T A``."""
    A, B, X, Y, delta = _prepare(prior, chan, check)
    return ReconstructionKernel(bures_kernel_matrix(A, X, B), metric, A, B, X, Y, delta)


def transpose_kernel(metric, prior, chan, **kwargs):
    """Dispatch on ``metric``; the classical Fisher kernel reuses the Bures formula."""
    metric = MetricKind.parse(metric)
    if metric is MetricKind.SQUARE_ROOT:
        return transpose_kernel_sqrt(prior, chan, **kwargs)
    kwargs.pop("epsilon_purity", None)
    return transpose_kernel_bures(prior, chan, metric=metric, **kwargs)


def classical_limit_kernel(prior, chan):
    """Square-root formula evaluated with ``Delta = 0`` and ``R = 1``."""
    A, B, X, _, _ = _prepare(prior, chan, check=False)
    eye = np.eye(A.shape[0])
    return petz_kernel_formula(A, B, X, np.zeros_like(A), eye, eye).real


def adjointness_residual(kernel, f, g):
    """Normalised violation of the adjointness relation for one probe pair.

    For the square-root metric the two sides are
    ``(f, (A + i/2 Delta) R^A_{1/2} X g)`` and ``(X_* f, (B + i/2 Delta) R^B_{1/2} g)``;
    for Bures and classical Fisher they are ``(f, A X g)`` and ``(X_* f, B g)``.
    The scalar product is conjugate-linear in its first slot.
    """
    f = np.asarray(f)
    g = np.asarray(g)
    dim = kernel.X_star.shape[0]
    if f.shape != (dim,) or g.shape != (dim,):
        raise InvalidDimensionError(f"probe vectors must have shape ({dim},)")
    A, B, X, delta = kernel.prior_cov, kernel.noisy_cov, kernel.X, kernel.delta
    if kernel.metric is MetricKind.SQUARE_ROOT:
        lhs = np.vdot(f, (A + 0.5j * delta) @ (kernel.r_prior @ (X @ g)))
        rhs = np.vdot(kernel.X_star @ f, (B + 0.5j * delta) @ (kernel.r_noisy @ g))
    else:
        lhs = np.vdot(f, A @ (X @ g))
        rhs = np.vdot(kernel.X_star @ f, B @ g)
    return float(abs(lhs - rhs) / (max(abs(lhs), abs(rhs)) + 1e-300))


def contraction_spectrum(kernel):
    """Eigenvalues of ``X X_*``; they lie in ``[0, 1]`` for a contractive metric."""
    return np.linalg.eigvals(kernel.X @ kernel.X_star)


def petz_covariance_recovery(kernel, measured_cov):
    """Covariance produced by the Petz recovery channel from ``measured_cov``.

    Returns ``X_*^T B' X_* + (A - X_*^T B X_*)``.
    """
    if kernel.metric is not MetricKind.SQUARE_ROOT:
        raise WrongMetricError(f"Petz recovery needs a square-root kernel, got {kernel.metric.value}")
    Bp = np.asarray(measured_cov, dtype=float)
    if Bp.shape != kernel.noisy_cov.shape:
        raise InvalidDimensionError(f"measured covariance has shape {Bp.shape}")
    Xs = kernel.X_star
    out = Xs.T @ (Bp - kernel.noisy_cov) @ Xs + kernel.prior_cov
    return 0.5 * (out + out.T)


def recovered_state(kernel, measured_cov):
    """:func:`petz_covariance_recovery` wrapped as a :class:`GaussianState`."""
    return GaussianState(petz_covariance_recovery(kernel, measured_cov), delta=kernel.delta)
