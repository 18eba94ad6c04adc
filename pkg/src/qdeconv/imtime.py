r"""Imaginary-time propagators ``R_s`` on the complexified phase space.

For a Gaussian state ``rho = exp(-H)`` with quadratic ``H``, conjugation by
``rho^s`` acts linearly on field operators,
``rho^s phi_f rho^{-s} = phi_{R_s f}``. For one oscillator with frequency
``omega`` and ``beta*omega = b``:

.. math::

    R_s = \begin{pmatrix} \cosh(bs) & -i\omega\sinh(bs) \\
                          i\sinh(bs)/\omega & \cosh(bs) \end{pmatrix}.

The multimode case is obtained in Williamson coordinates, where every mode
is an isotropic (``omega = 1``) oscillator.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import PropagatorOverflowError, PuritySingularityError
from .symplectic import standard_symplectic_form, symplectic_inverse, williamson

#: default floor on ``nu - 1/2`` below which a mode counts as pure
EPSILON_PURITY = 1e-9

#: largest |beta*omega*s| for which cosh stays comfortably inside double range
MAX_EXPONENT = 350.0


def symplectic_eigs_to_thermal(nu, epsilon_purity=EPSILON_PURITY):
    """Invert ``nu = coth(b/2)/2`` for the dimensionless ``b = beta*omega``.

    Args:
        nu (float): symplectic eigenvalue.
        epsilon_purity (float): minimal admissible ``nu - 1/2``.

    Raises:
        PuritySingularityError: if ``nu <= 1/2 + epsilon_purity``.
    """
    nu = float(nu)
    if not nu > 0.5 + epsilon_purity:
        raise PuritySingularityError(
            f"symplectic eigenvalue {nu!r} is within {epsilon_purity:g} of a pure mode", nu=nu
        )
    return float(np.log1p(2.0 / (2.0 * nu - 1.0)))


def single_mode_propagator(beta_omega, omega, s):
    """2x2 complex matrix ``R_s`` of a single oscillator."""
    arg = beta_omega * s
    if abs(arg) > MAX_EXPONENT:
        raise PropagatorOverflowError(f"|beta*omega*s| = {abs(arg):g} exceeds {MAX_EXPONENT:g}")
    c, sh = np.cosh(arg), np.sinh(arg)
    return np.array([[c, -1j * omega * sh], [1j * sh / omega, c]])


@dataclass(frozen=True, eq=False)
class NormalModes:
    """Williamson data of a covariance: ``S^T diag(nu) S = M``."""

    S: np.ndarray
    S_inv: np.ndarray
    nu: np.ndarray
    beta_omega: np.ndarray


def normal_modes(M, delta=None, epsilon_purity=EPSILON_PURITY):
    """Williamson decomposition plus per-mode thermal parameters."""
    M = np.asarray(M, dtype=float)
    if delta is None:
        delta = standard_symplectic_form(M.shape[0] // 2)
    S, nu = williamson(M, delta)
    bw = np.array([symplectic_eigs_to_thermal(v, epsilon_purity) for v in nu])
    return NormalModes(S, symplectic_inverse(S, delta), nu, bw)


def _normal_form_propagator(beta_omega, s):
    n = len(beta_omega)
    R = np.zeros((2 * n, 2 * n), dtype=complex)
    for k, b in enumerate(beta_omega):
        R[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = single_mode_propagator(b, 1.0, s)
    return R


@dataclass(frozen=True, eq=False)
class ImaginaryTimePropagator:
    """``R_s`` for the state with covariance ``cov``."""

    cov: np.ndarray
    s: float
    matrix: np.ndarray


def propagator(M, delta=None, s=0.5, epsilon_purity=EPSILON_PURITY, modes=None):
    """Imaginary-time propagator ``R_s^M = S^{-1} R'_s S``.

    ``R'_s`` is block diagonal in the Williamson coordinates of ``M``.

    Args:
        M (array[float]): covariance matrix.
        delta (array[float]): symplectic form, defaults to the standard one.
        s (float): imaginary time.
        epsilon_purity (float): purity floor passed to :func:`symplectic_eigs_to_thermal`.
        modes (NormalModes): precomputed decomposition of ``M`` (optional).

    Returns:
        ImaginaryTimePropagator
    """
    if modes is None:
        modes = normal_modes(M, delta, epsilon_purity)
    R = modes.S_inv @ _normal_form_propagator(modes.beta_omega, s) @ modes.S
    return ImaginaryTimePropagator(np.asarray(M, dtype=float), float(s), R)
