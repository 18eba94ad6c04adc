r"""Gaussian states and Gaussian channels on a finite phase space.

A state is described by its covariance ``A`` (and first moments). A channel
``(X, Y)`` acts in the Heisenberg picture by ``W_f -> W_{Xf}`` up to a
Gaussian factor, so that

.. math:: A \mapsto B = X^T A X + Y, \qquad m \mapsto X^T m .

``X`` is kept real throughout; complexification only happens inside the
metric computations.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidChannelError, InvalidDimensionError, InvalidStateError
from .symplectic import POSITIVITY_SLACK, hermitian_min_eig, mode_count, standard_symplectic_form

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Validity:
    """Outcome of a state or channel validity test."""

    ok: bool
    min_eig: float
    asymmetry: float = 0.0

    def __bool__(self):
        return self.ok


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Gaussian state given by covariance ``cov`` and first moments ``mean``.

    The constructor checks shapes only, so that invalid covariances can
    still be built and inspected with :func:`validate_state`.
    """

    cov: np.ndarray
    mean: np.ndarray = None
    delta: np.ndarray = None

    def __post_init__(self):
        cov = np.array(self.cov, dtype=float)
        n = mode_count(cov)
        mean = np.zeros(2 * n) if self.mean is None else np.array(self.mean, dtype=float)
        delta = standard_symplectic_form(n) if self.delta is None else np.array(self.delta, dtype=float)
        if mean.shape != (2 * n,):
            raise InvalidDimensionError(f"mean has shape {mean.shape}, expected {(2 * n,)}")
        if delta.shape != cov.shape:
            raise InvalidDimensionError("symplectic form and covariance differ in shape")
        for name, value in (("cov", cov), ("mean", mean), ("delta", delta)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def n_modes(self):
        return self.cov.shape[0] // 2


@dataclass(frozen=True, eq=False)
class GaussianChannel:
    """Gaussian channel ``(X, Y)``; see the module docstring for the action."""

    X: np.ndarray
    Y: np.ndarray
    delta: np.ndarray = None

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        Y = np.array(self.Y, dtype=float)
        n = mode_count(X)
        if Y.shape != X.shape:
            raise InvalidDimensionError(f"X has shape {X.shape} but Y has shape {Y.shape}")
        delta = standard_symplectic_form(n) if self.delta is None else np.array(self.delta, dtype=float)
        if delta.shape != X.shape:
            raise InvalidDimensionError("symplectic form and channel matrices differ in shape")
        for name, value in (("X", X), ("Y", Y), ("delta", delta)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def n_modes(self):
        return self.X.shape[0] // 2

    @classmethod
    def identity(cls, n):
        return cls(np.eye(2 * n), np.zeros((2 * n, 2 * n)))


def thermal_covariance(beta, omega):
    """Covariance of a unit-mass oscillator of frequency ``omega`` at inverse temperature ``beta``.

    ``A = coth(beta*omega/2)/2 * diag(1/omega, omega)``.
    """
    if beta <= 0 or omega <= 0:
        raise InvalidStateError(f"need beta > 0 and omega > 0, got beta={beta}, omega={omega}")
    nu = 0.5 / np.tanh(0.5 * beta * omega)
    return np.diag([nu / omega, nu * omega])


def validate_state(state, slack=POSITIVITY_SLACK):
    """Check symmetry of ``A`` and the uncertainty relation ``A + (i/2) Delta >= 0``."""
    A = state.cov
    asym = float(np.max(np.abs(A - A.T)))
    min_eig = hermitian_min_eig(A + 0.5j * state.delta)
    ok = asym < SYMMETRY_TOL and min_eig >= -slack
    return Validity(ok, min_eig, asym)


def channel_positivity_matrix(channel, printed_sign=False):
    """Hermitian matrix whose positivity is complete positivity of ``channel``.

    The default is ``Y + (i/2) Delta - (i/2) X^T Delta X``. With
    ``printed_sign=True`` the variant ``Y + (i/2) X^T Delta X + (i/2) Delta``
    is returned instead; it rejects the identity channel and is kept only
    for comparison.
    """
    X, Y, delta = channel.X, channel.Y, channel.delta
    sign = 1.0 if printed_sign else -1.0
    return Y + 0.5j * delta + sign * 0.5j * (X.T @ delta @ X)


def validate_channel(channel, slack=POSITIVITY_SLACK, printed_sign=False):
    """Complete-positivity test for a Gaussian channel."""
    asym = float(np.max(np.abs(channel.Y - channel.Y.T)))
    min_eig = hermitian_min_eig(channel_positivity_matrix(channel, printed_sign))
    return Validity(asym < SYMMETRY_TOL and min_eig >= -slack, min_eig, asym)


def _check_compatible(channel, state):
    if channel.X.shape != state.cov.shape:
        raise InvalidDimensionError(
            f"channel acts on {channel.n_modes} modes but the state has {state.n_modes}"
        )


def apply_channel(channel, state, check=True):
    """Image of ``state`` under ``channel``.

    Args:
        channel (GaussianChannel): the channel ``(X, Y)``.
        state (GaussianState): the input state.
        check (bool): validate both inputs first.

    Returns:
        GaussianState: covariance ``X^T A X + Y`` and mean ``X^T m``.
    """
    _check_compatible(channel, state)
    if check:
        v = validate_channel(channel)
        if not v:
            raise InvalidChannelError(f"channel violates complete positivity (min eig {v.min_eig:.3e})")
        v = validate_state(state)
        if not v:
            raise InvalidStateError(f"state violates the uncertainty relation (min eig {v.min_eig:.3e})")
    X = channel.X
    B = X.T @ state.cov @ X + channel.Y
    B = 0.5 * (B + B.T)
    return GaussianState(B, X.T @ state.mean, state.delta)


def compose(first, second):
    """Channel equal to applying ``first`` and then ``second``."""
    X1, Y1 = first.X, first.Y
    X2, Y2 = second.X, second.Y
    Y = X2.T @ Y1 @ X2 + Y2
    return GaussianChannel(X1 @ X2, 0.5 * (Y + Y.T), first.delta)
