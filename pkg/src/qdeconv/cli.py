"""Command-line interface: ``qdeconv {kernel,simulate,reconstruct,validate}``.

Exit codes: 0 success, 1 invariant failure, 2 usage or configuration error.
"""

import argparse
import contextlib
import sys

import numpy as np

from . import __version__
from .adjoint import MetricKind
from .checks import MODEL_TOLERANCES, deserialize_model, format_table, model_checks, run_suite, serialize_model
from .exceptions import ConfigError, ParameterError, QDeconvError
from .field import FieldData, bumps, kernel_spectrum, reconstruct, simulate_measurement
from .io import (
    config_items,
    load_config,
    read_table,
    with_overrides,
    write_table,
)
from .recon import MethodKind, ReconstructionMethod

METHODS = (
    "adjoint-sqrt",
    "adjoint-bures",
    "adjoint-classical",
    "tikhonov-sqrt",
    "tikhonov-bures",
    "pseudo-sqrt",
    "pseudo-bures",
    "naive",
    "wiener",
)


@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="\n") as fh:
            yield fh


def _header(command, cfg, extra=()):
    return [f"qdeconv {command}"] + config_items(cfg) + list(extra)


def _data_columns(model, data):
    return ["x", "q", "p"], [model.positions(), data.q, data.p]


def _read_data(path, model):
    try:
        meta, table = read_table(path)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    if "q" not in table:
        raise ConfigError(f"{path}: missing column 'q'")
    q = table["q"]
    p = table.get("p", np.zeros_like(q))
    if len(q) != model.n_sites:
        raise ConfigError(f"{path}: has {len(q)} sites but n_sites = {model.n_sites}")
    return meta, FieldData(q, p)


def cmd_kernel(args, cfg):
    model = cfg.model()
    sq = kernel_spectrum(model, MetricKind.SQUARE_ROOT)
    bu = kernel_spectrum(model, MetricKind.BURES)
    order = sq.nonnegative_order()
    status = [sq.status[i] if sq.status[i] != "ok" else bu.status[i] for i in order]
    columns = ["k", "omega", "x", "eig_q_sqrt", "eig_p_sqrt", "eig_q_bures", "eig_p_bures", "naive_inverse", "status"]
    data = [
        np.abs(sq.k[order]),
        sq.omega[order],
        sq.x[order],
        sq.eig_q[order],
        sq.eig_p[order],
        bu.eig_q[order],
        bu.eig_p[order],
        sq.naive_inverse[order],
        status,
    ]
    with _output(args.output) as fh:
        write_table(fh, columns, data, _header("kernel", cfg))
    return 0


def cmd_simulate(args, cfg):
    model = cfg.model()
    if args.truth == "builtin:bumps":
        truth = bumps(model)
    else:
        _, truth = _read_data(args.truth, model)
    measured = simulate_measurement(model, truth, cfg.noise_std, cfg.seed)
    columns, data = _data_columns(model, measured)
    with _output(args.output) as fh:
        write_table(fh, columns, data, _header("simulate", cfg, [("truth", args.truth)]))
    return 0


def _method(args, cfg):
    name = args.method or f"adjoint-{(cfg.metric or MetricKind.SQUARE_ROOT).value}"
    method = ReconstructionMethod.from_name(name, lam=cfg.lam, rank_tol=args.rank_tol)
    if cfg.metric is not None:
        wanted = method.kernel_metric
        compatible = {MetricKind.BURES, MetricKind.CLASSICAL_FISHER}
        clash = wanted is not None and wanted is not cfg.metric and not (
            method.kind is MethodKind.WIENER and cfg.metric in compatible
        )
        if clash:
            raise ConfigError(f"method {name} is incompatible with configured metric {cfg.metric.value}")
    return method


def cmd_reconstruct(args, cfg):
    model = cfg.model()
    method = _method(args, cfg)
    _, measured = _read_data(args.input, model)
    result = reconstruct(model, method, measured)
    columns, data = _data_columns(model, result)
    extra = [("method", method.name), ("input", args.input)]
    with _output(args.output) as fh:
        write_table(fh, columns, data, _header("reconstruct", cfg, extra))
    return 0


def cmd_validate(args, cfg):
    model = cfg.model()
    if args.replay:
        with open(args.replay) as fh:
            prior, chan = deserialize_model(fh.read())
        values = model_checks(prior, chan, np.random.default_rng(cfg.seed))
        bad = [k for k, v in values.items() if not v < MODEL_TOLERANCES[k]]
        for k, v in values.items():
            print(f"{k:<40} {v:.3e}  {'FAIL' if k in bad else 'PASS'}")
        return 1 if bad else 0
    results, failures = run_suite(model, trials=args.trials, seed=cfg.seed)
    with _output(args.output) as fh:
        fh.write(format_table(results) + "\n")
    for prior, chan, bad in failures:
        sys.stderr.write(serialize_model(prior, chan, bad) + "\n")
    return 0 if all(r.passed for r in results) else 1


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--output", help="output path (default: stdout)")
    common.add_argument("--lambda", dest="lam", type=float, help="Tikhonov weight (overrides config)")

    parser = argparse.ArgumentParser(prog="qdeconv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernel", parents=[common], help="write the reconstruction-kernel spectrum")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("simulate", parents=[common], help="simulate noisy measured first moments")
    p.add_argument("--truth", default="builtin:bumps", help="data file or builtin:bumps")
    p.add_argument("--seed", type=int, help="RNG seed (overrides config)")
    p.add_argument("--noise", type=float, help="noise standard deviation (overrides config)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", parents=[common], help="reconstruct first moments from measured data")
    p.add_argument("--input", required=True, help="measured data file")
    p.add_argument("--method", choices=METHODS, help="default: adjoint with the configured metric")
    p.add_argument("--rank-tol", type=float, default=1e-10, help="relative cutoff for pseudo-inverse methods")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("validate", parents=[common], help="run the invariant suite")
    p.add_argument("--trials", type=int, default=20, help="number of random models")
    p.add_argument("--replay", help="JSON model printed by a failed run")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = with_overrides(
            cfg,
            lam=args.lam,
            seed=getattr(args, "seed", None),
            noise_std=getattr(args, "noise", None),
        )
        if cfg.seed < 0 or cfg.noise_std < 0 or cfg.lam < 0:
            raise ConfigError("seed, noise and lambda must be non-negative")
        if getattr(args, "trials", 0) < 0:
            raise ConfigError("--trials must be >= 0")
        return args.func(args, cfg)
    except (ConfigError, ParameterError) as exc:
        print(f"qdeconv: error: {exc}", file=sys.stderr)
        return 2
    except QDeconvError as exc:
        print(f"qdeconv: numerical error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
