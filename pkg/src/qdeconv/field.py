r"""Thermal massless scalar field on a periodic 1-D grid.

The field lives on ``N`` sites ``x_j = j a``. Momentum modes use the
continuum values ``k_j = 2 pi j / (N a)``, ``j = -N/2 .. N/2-1``, stored in
:func:`numpy.fft.fftfreq` order. Each mode carries

* prior ``A_k = coth(beta w_k / 2)/2 * diag(1/w_k, w_k)``, ``w_k = sqrt(m^2 + k^2)``;
* smoothing ``X_k = x_k 1``, ``x_k = exp(-sigma^2 k^2 / 2)``;
* noise ``Y_k = (y/2)(1 - x_k^2) 1``, the least noise that keeps the
  channel completely positive (saturated at ``y = 1``).

All per-mode matrices are diagonal, so every map on first moments is a pair
of Fourier multipliers, one for ``q`` and one for ``p``.
"""

from dataclasses import dataclass, replace

import numpy as np

from .adjoint import MetricKind, transpose_kernel
from .exceptions import InvalidDimensionError, NumericalFailureError, ParameterError, PuritySingularityError
from .gaussian import GaussianChannel, GaussianState, thermal_covariance
from .imtime import EPSILON_PURITY
from .recon import MethodKind, regularized_matrix

STATUS_OK = "ok"
STATUS_PURE = "excluded-pure"
STATUS_ZERO = "excluded-zero-mode"

#: largest admissible off-diagonal entry of a per-mode 2x2 kernel block
DIAGONAL_TOL = 1e-8


@dataclass(frozen=True)
class FieldModel:
    """Parameters of the scalar-field example; defaults give the reference spectrum."""

    n_sites: int = 128
    lattice_spacing: float = 1.0
    beta: float = 0.01
    mass: float = 1e-6
    sigma: float = 2.0
    y: float = 1.0
    metric: MetricKind = MetricKind.SQUARE_ROOT
    lam: float = 0.0
    epsilon_purity: float = EPSILON_PURITY

    def __post_init__(self):
        object.__setattr__(self, "metric", MetricKind.parse(self.metric))
        n = self.n_sites
        if int(n) != n or n < 2 or (int(n) & (int(n) - 1)):
            raise ParameterError(f"n_sites must be a power of two >= 2, got {n!r}")
        checks = [
            (self.lattice_spacing > 0, "lattice_spacing must be > 0"),
            (self.beta > 0, "beta must be > 0"),
            (self.mass >= 0, "mass must be >= 0"),
            (self.sigma >= 0, "sigma must be >= 0"),
            (self.y >= 1, "y must be >= 1 for a completely positive channel"),
            (self.lam >= 0, "lambda must be >= 0"),
            (self.epsilon_purity > 0, "epsilon_purity must be > 0"),
        ]
        for ok, message in checks:
            if not ok:
                raise ParameterError(message)

    def momenta(self):
        """Momentum grid in FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.n_sites, d=self.lattice_spacing)

    def positions(self):
        return self.lattice_spacing * np.arange(self.n_sites)

    def smoothing(self, k):
        return np.exp(-0.5 * self.sigma**2 * np.asarray(k) ** 2)


@dataclass(frozen=True, eq=False)
class FieldData:
    """First moments ``<q_j>`` and ``<p_j>`` on every site."""

    q: np.ndarray
    p: np.ndarray = None

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        p = np.zeros_like(q) if self.p is None else np.array(self.p, dtype=float)
        if q.ndim != 1 or p.shape != q.shape:
            raise InvalidDimensionError(f"q and p must be 1-D of equal length, got {q.shape}, {p.shape}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    def __len__(self):
        return len(self.q)

    def as_phase_vector(self):
        """Mode-major vector ``(q_0, p_0, q_1, p_1, ...)``."""
        return np.column_stack([self.q, self.p]).ravel()

    @classmethod
    def from_phase_vector(cls, v):
        v = np.asarray(v, dtype=float).reshape(-1, 2)
        return cls(v[:, 0], v[:, 1])


@dataclass(frozen=True, eq=False)
class ModeBlock:
    """Prior, channel and noisy covariance for one momentum mode.

    ``prior`` and ``channel`` are ``None`` for an unregulated zero mode.
    """

    index: int
    k: float
    omega: float
    x: float
    prior: GaussianState = None
    channel: GaussianChannel = None
    noisy_cov: np.ndarray = None

    @property
    def status(self):
        return STATUS_ZERO if self.prior is None else STATUS_OK


def build_mode_blocks(model):
    """Per-mode ``(A_k, X_k, Y_k, B_k)`` for every momentum in FFT order."""
    blocks = []
    for j, k in enumerate(model.momenta()):
        omega = float(np.hypot(model.mass, k))
        x = float(model.smoothing(k))
        if omega == 0.0:
            blocks.append(ModeBlock(j, float(k), omega, x))
            continue
        A = thermal_covariance(model.beta, omega)
        X = x * np.eye(2)
        Y = 0.5 * model.y * (1.0 - x * x) * np.eye(2)
        B = x * x * A + Y
        blocks.append(ModeBlock(j, float(k), omega, x, GaussianState(A), GaussianChannel(X, Y), B))
    return blocks


@dataclass(frozen=True, eq=False)
class KernelSpectrum:
    """Diagonal of ``X_*(k)`` per mode, in FFT order.

    ``eig_q`` / ``eig_p`` are the entries acting on the field and on its
    conjugate momentum; they are ``nan`` where ``status`` is not ``ok``.
    ``offdiag`` records the largest off-diagonal entry of each block.
    """

    metric: MetricKind
    k: np.ndarray
    omega: np.ndarray
    x: np.ndarray
    eig_q: np.ndarray
    eig_p: np.ndarray
    offdiag: np.ndarray
    status: tuple

    @property
    def naive_inverse(self):
        return 1.0 / self.x

    @property
    def ok(self):
        return np.array([s == STATUS_OK for s in self.status])

    def nonnegative_order(self):
        """Indices of the modes with ``k >= 0`` plus the Nyquist mode, sorted by ``|k|``."""
        idx = np.flatnonzero(self.k >= 0)
        nyq = np.flatnonzero(self.k == -np.abs(self.k).max())
        idx = np.concatenate([idx, nyq]) if self.k.size % 2 == 0 else idx
        return idx[np.argsort(np.abs(self.k[idx]), kind="stable")]


def _block_kernel(block, metric, model):
    kernel = transpose_kernel(metric, block.prior, block.channel, epsilon_purity=model.epsilon_purity)
    Xs = kernel.X_star
    off = max(abs(Xs[0, 1]), abs(Xs[1, 0]))
    if off > DIAGONAL_TOL:
        raise NumericalFailureError(f"kernel block at k={block.k:g} is not diagonal (off-diagonal {off:.3e})")
    return Xs, off


def kernel_spectrum(model, metric=None):
    """Reconstruction-kernel spectrum over the momentum grid.

    Modes whose noisy state is within ``epsilon_purity`` of pure are reported
    with status ``excluded-pure``; an unregulated zero mode (``mass = 0``) is
    reported as ``excluded-zero-mode``.
    """
    metric = model.metric if metric is None else MetricKind.parse(metric)
    blocks = build_mode_blocks(model)
    n = len(blocks)
    eq, ep, off = np.full(n, np.nan), np.full(n, np.nan), np.zeros(n)
    status = []
    for i, block in enumerate(blocks):
        if block.prior is None:
            status.append(STATUS_ZERO)
            continue
        try:
            Xs, off[i] = _block_kernel(block, metric, model)
        except PuritySingularityError:
            status.append(STATUS_PURE)
            continue
        eq[i], ep[i] = Xs[0, 0], Xs[1, 1]
        status.append(STATUS_OK)
    return KernelSpectrum(
        metric,
        np.array([b.k for b in blocks]),
        np.array([b.omega for b in blocks]),
        np.array([b.x for b in blocks]),
        eq,
        ep,
        off,
        tuple(status),
    )


def forward_multipliers(model):
    """Fourier multipliers of the channel on ``(q, p)`` first moments."""
    x = model.smoothing(model.momenta())
    return x.copy(), x.copy()


def reconstruction_multipliers(model, method):
    """Fourier multipliers of a reconstruction method on ``(q, p)``.

    Excluded-pure modes get multiplier 0, an unregulated zero mode gets 1.
    The pseudo-inverse cutoff is relative to the largest singular value of
    ``X_* X`` over the whole grid.

    Returns:
        tuple[array, array, tuple[str]]: ``(mult_q, mult_p, status)``
    """
    blocks = build_mode_blocks(model)
    n = len(blocks)
    mq, mp = np.zeros(n), np.zeros(n)
    status = [STATUS_OK] * n
    kernels = [None] * n
    for i, block in enumerate(blocks):
        if block.prior is None:
            mq[i] = mp[i] = 1.0
            status[i] = STATUS_ZERO
        elif method.kind is not MethodKind.NAIVE:
            try:
                kernels[i] = _block_kernel(block, method.kernel_metric, model)[0]
            except PuritySingularityError:
                status[i] = STATUS_PURE

    sigma_ref = None
    if method.kind is MethodKind.PSEUDO_INVERSE:
        sigma_ref = max(
            np.linalg.norm(kernels[i] @ blocks[i].channel.X, 2) for i in range(n) if kernels[i] is not None
        )
    for i, block in enumerate(blocks):
        if status[i] != STATUS_OK:
            continue
        m = regularized_matrix(method, kernels[i], block.channel.X, sigma_ref)
        mq[i], mp[i] = m[0, 0], m[1, 1]
    return mq, mp, tuple(status)


def _check_length(model, data):
    if len(data) != model.n_sites:
        raise InvalidDimensionError(f"data has {len(data)} sites, model has {model.n_sites}")


def apply_kernel_fft(model, multipliers, data):
    """Apply per-mode multipliers ``(mult_q, mult_p)`` to sampled first moments.

    The multipliers must be even in ``k`` (checked); the transform then maps
    real data to real data and is carried out with a real FFT.
    """
    _check_length(model, data)
    n = model.n_sites
    mirror = (-np.arange(n)) % n
    out = []
    for values, mult in zip((data.q, data.p), multipliers[:2]):
        mult = np.asarray(mult, dtype=float)
        if mult.shape != values.shape:
            raise InvalidDimensionError("multiplier length does not match the data")
        scale = max(1.0, float(np.max(np.abs(mult))))
        if np.max(np.abs(mult - mult[mirror])) > 1e-12 * scale:
            raise NumericalFailureError("multipliers are not even in k; output would not be real")
        out.append(np.fft.irfft(np.fft.rfft(values) * mult[: n // 2 + 1], n=n))
    return FieldData(*out)


def dense_operator(model, multipliers):
    """Real-space ``2N x 2N`` phase-space matrix of the multipliers.

    Built from explicit cosine sums, independently of the FFT path, in the
    mode-major ordering ``(q_0, p_0, q_1, p_1, ...)``.
    """
    n = model.n_sites
    k = model.momenta()
    x = model.positions()
    sep = x[:, None] - x[None, :]
    phase = np.cos(k[None, None, :] * sep[:, :, None])
    out = np.zeros((2 * n, 2 * n))
    for quad, mult in enumerate(multipliers[:2]):
        out[quad::2, quad::2] = phase @ np.asarray(mult, dtype=float) / n
    return out


def apply_dense(model, multipliers, data):
    _check_length(model, data)
    return FieldData.from_phase_vector(dense_operator(model, multipliers) @ data.as_phase_vector())


def simulate_measurement(model, truth, noise_std=0.0, seed=0):
    """Smooth ``truth`` with the channel and add i.i.d. Gaussian error.

    The noise has standard deviation ``noise_std`` per site and quadrature
    and is drawn from ``numpy.random.default_rng(seed)``, ``q`` first.
    """
    if noise_std < 0:
        raise ParameterError("noise_std must be >= 0")
    smooth = apply_kernel_fft(model, forward_multipliers(model), truth)
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, noise_std, size=(2, model.n_sites)) if noise_std > 0 else np.zeros((2, model.n_sites))
    return FieldData(smooth.q + noise[0], smooth.p + noise[1])


def reconstruct(model, method, data):
    """Reconstructed first moments from measured ``data``."""
    mq, mp, _ = reconstruction_multipliers(model, method)
    return apply_kernel_fft(model, (mq, mp), data)


def bumps(model):
    """Test signal: Gaussian bumps of width ``4a`` at ``N/4`` (height 1) and ``5N/8`` (height -0.6)."""
    a = model.lattice_spacing
    x = model.positions()
    width = 4 * a
    centers = ((model.n_sites // 4) * a, (5 * model.n_sites // 8) * a)
    q = np.exp(-0.5 * ((x - centers[0]) / width) ** 2) - 0.6 * np.exp(-0.5 * ((x - centers[1]) / width) ** 2)
    return FieldData(q)


def with_metric(model, metric):
    return replace(model, metric=MetricKind.parse(metric))
