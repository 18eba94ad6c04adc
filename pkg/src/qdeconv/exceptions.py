"""Exception hierarchy shared by every module of the package."""

import numpy as np


class QDeconvError(Exception):
    """Base class for all errors raised by qdeconv."""


class InvalidDimensionError(QDeconvError, ValueError):
    """Matrix or vector shapes are incompatible with the phase space."""


class InvalidStateError(QDeconvError, ValueError):
    """A covariance matrix is not a valid (or not a positive-definite) state."""


class InvalidChannelError(QDeconvError, ValueError):
    """A channel (X, Y) violates complete positivity."""


class ParameterError(QDeconvError, ValueError):
    """A scalar parameter is out of its allowed range."""


class PuritySingularityError(QDeconvError, ValueError):
    """A mode is too close to pure for the imaginary-time propagator.

    Attributes:
        nu: the offending symplectic eigenvalue.
    """

    def __init__(self, message, nu=None):
        super().__init__(message)
        self.nu = nu


class PropagatorOverflowError(QDeconvError, OverflowError):
    """cosh/sinh of the imaginary-time argument overflows double precision."""


class SingularMatrixError(QDeconvError, np.linalg.LinAlgError):
    """A matrix that must be inverted is singular."""


class NumericalFailureError(QDeconvError, ArithmeticError):
    """A computed quantity failed its self-consistency residual check."""


class WrongMetricError(QDeconvError, ValueError):
    """An operation received a kernel computed for a different metric."""


class ConfigError(QDeconvError, ValueError):
    """A configuration file or command-line setting is invalid."""
