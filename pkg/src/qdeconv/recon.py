"""Reconstruction maps acting on measured first moments.

Every method collapses to one real matrix ``M_rec`` with ``F = M_rec F'``:

=================  ===========================================
adjoint            ``X_*^T``
tikhonov           ``((X_* X + lam 1)^{-1} X_*)^T``
pseudo             ``((X_* X)^+ X_*)^T``
naive              ``(X^{-1})^T``
wiener             ``(B^{-1} X^T A)^T``  (Bures kernel, own tag)
=================  ===========================================

``X`` acts on first moments as ``F' = X^T F``, so ``naive`` is the exact
inverse of the noiseless forward map. ``wiener`` is numerically the Bures
adjoint; only its statistical reading differs.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .adjoint import MetricKind, transpose_kernel
from .exceptions import InvalidDimensionError, ParameterError, SingularMatrixError


class MethodKind(enum.Enum):
    ADJOINT = "adjoint"
    PSEUDO_INVERSE = "pseudo"
    TIKHONOV = "tikhonov"
    NAIVE = "naive"
    WIENER = "wiener"


@dataclass(frozen=True)
class ReconstructionMethod:
    """A reconstruction scheme.

    Attributes:
        kind: which family of map.
        metric: metric used for ``X_*`` (``None`` for naive and Wiener).
        lam: Tikhonov weight, ``L = lam * 1``.
        rank_tol: relative singular-value cutoff of the pseudo-inverse.
    """

    kind: MethodKind
    metric: MetricKind = None
    lam: float = 0.0
    rank_tol: float = 1e-10

    def __post_init__(self):
        if self.kind in (MethodKind.NAIVE, MethodKind.WIENER):
            if self.metric is not None and self.kind is MethodKind.NAIVE:
                raise ParameterError("the naive inverse does not use a metric")
            if self.metric is MetricKind.SQUARE_ROOT:
                raise ParameterError("the Wiener filter is the Bures/classical kernel, not the square-root one")
        elif self.metric is None:
            raise ParameterError(f"method {self.kind.value} needs a metric")
        if not self.lam >= 0:
            raise ParameterError(f"lambda must be >= 0, got {self.lam}")
        if not 0 < self.rank_tol < 1:
            raise ParameterError(f"rank_tol must lie in (0, 1), got {self.rank_tol}")

    @classmethod
    def adjoint(cls, metric):
        return cls(MethodKind.ADJOINT, MetricKind.parse(metric))

    @classmethod
    def tikhonov(cls, metric, lam):
        return cls(MethodKind.TIKHONOV, MetricKind.parse(metric), lam=float(lam))

    @classmethod
    def pseudo_inverse(cls, metric, rank_tol=1e-10):
        return cls(MethodKind.PSEUDO_INVERSE, MetricKind.parse(metric), rank_tol=float(rank_tol))

    @classmethod
    def naive(cls):
        return cls(MethodKind.NAIVE)

    @classmethod
    def wiener(cls):
        return cls(MethodKind.WIENER)

    @classmethod
    def from_name(cls, name, lam=0.0, rank_tol=1e-10):
        """Parse CLI names such as ``adjoint-sqrt``, ``tikhonov-bures``, ``naive``."""
        name = name.strip().lower()
        if name == "naive":
            return cls.naive()
        if name == "wiener":
            return cls.wiener()
        family, _, metric = name.partition("-")
        try:
            metric = MetricKind.parse(metric)
        except ValueError as exc:
            raise ParameterError(f"unknown reconstruction method {name!r}") from exc
        if family == "adjoint":
            return cls.adjoint(metric)
        if family == "tikhonov":
            return cls.tikhonov(metric, lam)
        if family == "pseudo":
            return cls.pseudo_inverse(metric, rank_tol)
        raise ParameterError(f"unknown reconstruction method {name!r}")

    @property
    def kernel_metric(self):
        """Metric whose kernel this method needs (Bures for Wiener)."""
        if self.kind is MethodKind.WIENER:
            return MetricKind.BURES
        return self.metric

    @property
    def name(self):
        if self.metric is None:
            return self.kind.value
        return f"{self.kind.value}-{self.metric.value}"


def regularized_matrix(method, x_star, X, sigma_ref=None):
    """Combine a kernel ``X_*`` and the forward matrix ``X`` into ``M_rec``.

    Works on any square shape, including 1x1 blocks.

    Args:
        method (ReconstructionMethod): scheme to apply.
        x_star (array): reconstruction kernel (ignored for ``naive``).
        X (array): forward action on first moments.
        sigma_ref (float): reference largest singular value for the
            pseudo-inverse cutoff. Defaults to the largest singular value of
            ``X_* X`` itself; pass a global value when the matrix is one block
            of a larger block-diagonal operator.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    kind = method.kind
    if kind is MethodKind.NAIVE:
        try:
            return np.linalg.inv(X).T
        except np.linalg.LinAlgError as exc:
            raise SingularMatrixError("forward matrix X is singular; naive inverse undefined") from exc
    x_star = np.atleast_2d(np.asarray(x_star, dtype=float))
    if x_star.shape != X.shape:
        raise InvalidDimensionError(f"kernel shape {x_star.shape} does not match X {X.shape}")
    if kind in (MethodKind.ADJOINT, MethodKind.WIENER):
        return x_star.T.copy()
    gram = x_star @ X
    if kind is MethodKind.TIKHONOV:
        reg = gram + method.lam * np.eye(gram.shape[0])
        try:
            return np.linalg.solve(reg, x_star).T
        except np.linalg.LinAlgError as exc:
            raise SingularMatrixError("X_* X + lambda is singular; use lambda > 0") from exc
    U, sv, Vt = np.linalg.svd(gram)
    ref = sv[0] if sigma_ref is None else float(sigma_ref)
    keep = sv > method.rank_tol * ref
    inv_sv = np.where(keep, 1.0 / np.where(keep, sv, 1.0), 0.0)
    pinv = (Vt.T * inv_sv) @ U.T
    return (pinv @ x_star).T


def moment_reconstruction_matrix(method, prior, chan, sigma_ref=None, **kernel_kwargs):
    """``M_rec`` for a Gaussian prior and channel; see the module table."""
    if method.kind is MethodKind.NAIVE:
        return regularized_matrix(method, None, chan.X)
    kernel = transpose_kernel(method.kernel_metric, prior, chan, **kernel_kwargs)
    return regularized_matrix(method, kernel.X_star, chan.X, sigma_ref)


def reconstruct_moments(m_rec, measured):
    """Apply ``M_rec`` to measured first moments."""
    m_rec = np.atleast_2d(np.asarray(m_rec, dtype=float))
    measured = np.asarray(measured, dtype=float)
    if measured.shape != (m_rec.shape[1],):
        raise InvalidDimensionError(
            f"measured moments have shape {measured.shape}, expected ({m_rec.shape[1]},)"
        )
    return m_rec @ measured
