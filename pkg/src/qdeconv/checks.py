"""Invariant suite run by ``qdeconv validate`` and reused by the tests.

Each check returns the worst value it observed next to its tolerance, so a
failure report says by how much an identity was missed.
"""

import json
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import expm

from .adjoint import (
    MetricKind,
    adjointness_residual,
    classical_limit_kernel,
    contraction_spectrum,
    transpose_kernel,
)
from .field import (
    FieldData,
    apply_dense,
    apply_kernel_fft,
    build_mode_blocks,
    forward_multipliers,
    kernel_spectrum,
    reconstruction_multipliers,
)
from .gaussian import GaussianChannel, GaussianState, validate_channel, validate_state
from .imtime import propagator
from .recon import ReconstructionMethod
from .symplectic import standard_symplectic_form, symplectic_residual, williamson

ADJOINTNESS_TOL = 1e-8
PROPAGATOR_TOL = 1e-8
CLASSICAL_TOL = 1e-12
CONTRACTION_TOL = 1e-8
FFT_TOL = 1e-10
WILLIAMSON_TOL = 1e-8
NU_RANGE = (0.500001, 50.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tol: float
    passed: bool

    @classmethod
    def upper(cls, name, value, tol):
        value = float(value)
        return cls(name, value, tol, bool(value < tol))


def random_symplectic(rng, n, scale=0.4):
    """``expm(Delta H)`` for a random symmetric ``H``."""
    H = rng.normal(size=(2 * n, 2 * n)) * scale
    return expm(standard_symplectic_form(n) @ (H + H.T))


def random_model(rng, n=None, nu_range=NU_RANGE, min_noisy_gap=1e-6):
    """Random valid prior and completely positive channel on ``n <= 4`` modes.

    The prior has symplectic eigenvalues log-uniform in ``nu_range``. The
    channel noise is the smallest multiple of the identity that restores
    complete positivity plus a random positive part. Models whose output has
    a mode within ``min_noisy_gap`` of pure are redrawn.
    """
    if n is None:
        n = int(rng.integers(1, 5))
    delta = standard_symplectic_form(n)
    while True:
        S = random_symplectic(rng, n)
        nu = np.exp(rng.uniform(np.log(nu_range[0]), np.log(nu_range[1]), n))
        A = S.T @ np.diag(np.repeat(nu, 2)) @ S
        A = 0.5 * (A + A.T)
        X = rng.normal(size=(2 * n, 2 * n)) * 0.7
        floor = np.abs(np.linalg.eigvalsh(0.5j * (delta - X.T @ delta @ X))).max()
        G = rng.normal(size=(2 * n, 2 * n))
        Y = floor * np.eye(2 * n) + rng.uniform(0, 1) * G @ G.T / (2 * n)
        Y = 0.5 * (Y + Y.T)
        prior, chan = GaussianState(A), GaussianChannel(X, Y)
        B = X.T @ A @ X + Y
        _, nu_b = williamson(0.5 * (B + B.T))
        if nu_b.min() - 0.5 > min_noisy_gap:
            return prior, chan


def random_probe(rng, dim):
    return rng.normal(size=dim) + 1j * rng.normal(size=dim)


def propagator_residuals(M, delta):
    """Worst violations of the four ``R_s`` identities at ``s = +-1/2``."""
    eye = np.eye(M.shape[0])
    K = M + 0.5j * delta
    rp = propagator(M, delta, 0.5).matrix
    rm = propagator(M, delta, -0.5).matrix
    r0 = propagator(M, delta, 0.0).matrix
    kscale = float(np.max(np.abs(K)))
    return {
        "R_0 = 1": float(np.max(np.abs(r0 - eye))),
        "R_s R_-s = 1": float(max(np.max(np.abs(rp @ rm - eye)), np.max(np.abs(rm @ rp - eye)))),
        "conj(R_s) = R_-s": float(np.max(np.abs(rp.conj() - rm)) / max(1.0, np.max(np.abs(rm)))),
        "R_s^T K R_s = K": float(
            max(np.max(np.abs(r.T @ K @ r - K)) for r in (rp, rm)) / kscale
        ),
    }


def model_checks(prior, chan, rng, probes=20):
    """Worst-case values of every per-model invariant.

    Returns:
        dict[str, float]
    """
    out = {}
    delta = prior.delta
    S, nu = williamson(prior.cov, delta)
    D = np.diag(np.repeat(nu, 2))
    out["williamson symplectic residual"] = symplectic_residual(S, delta)
    out["williamson reconstruction residual"] = float(
        np.max(np.abs(S.T @ D @ S - prior.cov)) / max(1.0, np.max(np.abs(prior.cov)))
    )
    B = chan.X.T @ prior.cov @ chan.X + chan.Y
    B = 0.5 * (B + B.T)
    for M in (prior.cov, B):
        for name, value in propagator_residuals(M, delta).items():
            key = f"propagator {name}"
            out[key] = max(out.get(key, 0.0), value)

    dim = delta.shape[0]
    pairs = [(random_probe(rng, dim), random_probe(rng, dim)) for _ in range(probes)]
    contraction_imag, contraction_low, contraction_high = 0.0, 0.0, 0.0
    for metric in MetricKind:
        kernel = transpose_kernel(metric, prior, chan)
        out[f"adjointness {metric.value}"] = max(adjointness_residual(kernel, f, g) for f, g in pairs)
        ev = contraction_spectrum(kernel)
        contraction_imag = max(contraction_imag, float(np.max(np.abs(ev.imag))))
        contraction_low = max(contraction_low, float(-np.min(ev.real)))
        contraction_high = max(contraction_high, float(np.max(ev.real) - 1.0))
        if metric is MetricKind.SQUARE_ROOT:
            scale = float(np.max(np.abs(kernel.X_star)))
            out["sqrt kernel imaginary part"] = kernel.imag_max / scale
        if metric is MetricKind.BURES:
            bures = kernel.X_star
    classical = classical_limit_kernel(prior, chan)
    out["classical limit = bures"] = float(np.max(np.abs(classical - bures)) / np.max(np.abs(bures)))
    out["contraction eig imag"] = contraction_imag
    out["contraction eig below 0"] = max(contraction_low, 0.0)
    out["contraction eig above 1"] = max(contraction_high, 0.0)
    return out


MODEL_TOLERANCES = {
    "williamson symplectic residual": WILLIAMSON_TOL,
    "williamson reconstruction residual": WILLIAMSON_TOL,
    "propagator R_0 = 1": PROPAGATOR_TOL,
    "propagator R_s R_-s = 1": 1e-9,
    "propagator conj(R_s) = R_-s": 1e-9,
    "propagator R_s^T K R_s = K": PROPAGATOR_TOL,
    "adjointness sqrt": ADJOINTNESS_TOL,
    "adjointness bures": ADJOINTNESS_TOL,
    "adjointness classical": ADJOINTNESS_TOL,
    "sqrt kernel imaginary part": 1e-8,
    "classical limit = bures": CLASSICAL_TOL,
    "contraction eig imag": CONTRACTION_TOL,
    "contraction eig below 0": CONTRACTION_TOL,
    "contraction eig above 1": CONTRACTION_TOL,
}


def field_checks(model):
    """Invariants of the scalar-field example at ``model``'s parameters."""
    out = []
    blocks = [b for b in build_mode_blocks(model) if b.prior is not None]
    out.append(CheckResult.upper(
        "field prior validity (-min eig)",
        max(0.0, -min(validate_state(b.prior).min_eig for b in blocks)), 1e-10,
    ))
    out.append(CheckResult.upper(
        "field channel validity (-min eig)",
        max(0.0, -min(validate_channel(b.channel).min_eig for b in blocks)), 1e-10,
    ))
    for metric in (MetricKind.SQUARE_ROOT, MetricKind.BURES):
        spec = kernel_spectrum(model, metric)
        ok = spec.ok
        out.append(CheckResult.upper(f"field {metric.value} block off-diagonal", spec.offdiag[ok].max(), 1e-8))
        mirror = (-np.arange(model.n_sites)) % model.n_sites
        parity = np.nanmax(np.abs(np.nan_to_num(spec.eig_q - spec.eig_q[mirror])))
        out.append(CheckResult.upper(f"field {metric.value} parity", parity, 1e-12))
        sector = np.nanmax(np.abs(spec.x * np.where(ok, np.maximum(spec.eig_q, spec.eig_p), 0.0)))
        out.append(CheckResult.upper(f"field {metric.value} sector bound - 1", max(sector - 1.0, 0.0), 1e-8))

    small = replace(model, n_sites=min(model.n_sites, 64))
    rng = np.random.default_rng(0)
    data = FieldData(rng.normal(size=small.n_sites), rng.normal(size=small.n_sites))
    worst = 0.0
    for mult in (forward_multipliers(small), reconstruction_multipliers(small, ReconstructionMethod.adjoint("bures"))[:2]):
        a = apply_kernel_fft(small, mult, data)
        b = apply_dense(small, mult, data)
        worst = max(worst, np.abs(a.q - b.q).max(), np.abs(a.p - b.p).max())
    out.append(CheckResult.upper("field FFT vs dense", worst, FFT_TOL))
    return out


def run_suite(model, trials=20, seed=0, probes=20):
    """Run the field checks on ``model`` and the per-model checks on random models.

    Returns:
        tuple[list[CheckResult], list]: results and the random models that
        failed, as ``(prior, chan, failing check names)``.
    """
    results = field_checks(model)
    rng = np.random.default_rng(seed)
    worst = {}
    failures = []
    # a few well-separated modes of the configured field join the random models
    models = [(b.prior, b.channel) for b in build_mode_blocks(model)
              if b.prior is not None and _noisy_gap(b) > 1e-6][:8]
    models += [random_model(rng) for _ in range(trials)]
    for prior, chan in models:
        values = model_checks(prior, chan, rng, probes)
        bad = [k for k, v in values.items() if not v < MODEL_TOLERANCES[k]]
        if bad:
            failures.append((prior, chan, bad))
        for k, v in values.items():
            worst[k] = max(worst.get(k, 0.0), v)
    for name, tol in MODEL_TOLERANCES.items():
        if name in worst:
            results.append(CheckResult.upper(name, worst[name], tol))
    return results, failures


def _noisy_gap(block):
    return float(np.sqrt(np.linalg.det(block.noisy_cov)) - 0.5)


def serialize_model(prior, chan, failed=()):
    """JSON text that :func:`deserialize_model` turns back into the same model."""
    return json.dumps(
        {
            "prior_cov": prior.cov.tolist(),
            "mean": prior.mean.tolist(),
            "X": chan.X.tolist(),
            "Y": chan.Y.tolist(),
            "failed": list(failed),
        }
    )


def deserialize_model(text):
    d = json.loads(text)
    return GaussianState(np.array(d["prior_cov"]), np.array(d["mean"])), GaussianChannel(
        np.array(d["X"]), np.array(d["Y"])
    )


def format_table(results):
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  {'worst':>10}  {'tol':>8}  result"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {r.value:>10.3e}  {r.tol:>8.1e}  {'PASS' if r.passed else 'FAIL'}")
    return "\n".join(lines)
