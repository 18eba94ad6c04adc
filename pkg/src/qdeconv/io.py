"""Run configuration and delimited-table I/O.

Config files are flat ``key = value`` text with ``#`` comments; unknown keys
are errors. Data files are comma-separated tables: ``#``-prefixed header
lines carrying ``key = value`` metadata, one line of column names, then one
row per record. Floats are written with 17 significant digits so files
round-trip exactly.
"""

from dataclasses import dataclass, fields, replace

import numpy as np

from .adjoint import MetricKind
from .exceptions import ConfigError, ParameterError
from .field import FieldModel


def format_float(value):
    return "%.17g" % value


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a CLI run apart from file paths.

    ``metric`` is ``None`` when the config does not pin one; the field model
    then defaults to the square-root metric and any reconstruction method is
    accepted.
    """

    n_sites: int = 128
    lattice_spacing: float = 1.0
    beta: float = 0.01
    mass: float = 1e-6
    sigma: float = 2.0
    y: float = 1.0
    metric: MetricKind = None
    lam: float = 0.0
    epsilon_purity: float = 1e-9
    noise_std: float = 1e-3
    seed: int = 0

    def model(self):
        try:
            return FieldModel(
                n_sites=self.n_sites,
                lattice_spacing=self.lattice_spacing,
                beta=self.beta,
                mass=self.mass,
                sigma=self.sigma,
                y=self.y,
                metric=self.metric or MetricKind.SQUARE_ROOT,
                lam=self.lam,
                epsilon_purity=self.epsilon_purity,
            )
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc


# config-file key -> (dataclass field, parser)
_KEYS = {
    "n_sites": ("n_sites", int),
    "lattice_spacing": ("lattice_spacing", float),
    "beta": ("beta", float),
    "mass": ("mass", float),
    "sigma": ("sigma", float),
    "y": ("y", float),
    "metric": ("metric", MetricKind.parse),
    "lambda": ("lam", float),
    "epsilon_purity": ("epsilon_purity", float),
    "noise_std": ("noise_std", float),
    "seed": ("seed", int),
}


def parse_config(text, source="<config>"):
    """Parse config text; errors carry ``source:line``."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        where = f"{source}:{lineno}"
        if not sep or not key:
            raise ConfigError(f"{where}: expected 'key = value', got {raw.strip()!r}")
        if key not in _KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        name, parse = _KEYS[key]
        if name in values:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        try:
            values[name] = parse(value)
        except ValueError as exc:
            raise ConfigError(f"{where}: bad value for {key}: {exc}") from None
    cfg = RunConfig(**values)
    cfg.model()
    if cfg.noise_std < 0:
        raise ConfigError(f"{source}: noise_std must be >= 0")
    if cfg.seed < 0:
        raise ConfigError(f"{source}: seed must be >= 0")
    return cfg


def load_config(path):
    if path is None:
        return RunConfig()
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, str(path))


def config_items(cfg):
    """``(key, text)`` pairs in canonical order; unset metric is omitted."""
    names = {name: key for key, (name, _) in _KEYS.items()}
    items = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if value is None:
            continue
        if isinstance(value, MetricKind):
            text = value.value
        elif isinstance(value, float):
            text = format_float(value)
        else:
            text = str(value)
        items.append((names[f.name], text))
    return items


def format_config(cfg):
    return "".join(f"{k} = {v}\n" for k, v in config_items(cfg))


def with_overrides(cfg, **kwargs):
    return replace(cfg, **{k: v for k, v in kwargs.items() if v is not None})


def write_table(fh, columns, data, header=()):
    """Write a comma-separated table.

    Args:
        fh: text stream.
        columns (list[str]): column names.
        data (list): one sequence per column (floats or strings).
        header (iterable): ``(key, value)`` pairs or plain strings for ``#`` lines.
    """
    for item in header:
        if isinstance(item, tuple):
            fh.write(f"# {item[0]} = {item[1]}\n")
        else:
            fh.write(f"# {item}\n")
    fh.write(",".join(columns) + "\n")
    for row in zip(*data):
        fh.write(",".join(v if isinstance(v, str) else format_float(v) for v in row) + "\n")


def read_table(path):
    """Read a table written by :func:`write_table`.

    Returns:
        tuple[dict, dict]: header ``key = value`` metadata and a mapping of
        column name to array (float where possible, else str).
    """
    meta, names, rows = {}, None, []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, sep, value = line[1:].partition("=")
                if sep:
                    meta[key.strip()] = value.strip()
                continue
            cells = [c.strip() for c in line.split(",")]
            if names is None:
                names = cells
            elif len(cells) != len(names):
                raise ConfigError(f"{path}:{lineno}: expected {len(names)} columns, got {len(cells)}")
            else:
                rows.append(cells)
    if names is None:
        raise ConfigError(f"{path}: no column header found")
    table = {}
    for i, name in enumerate(names):
        col = [r[i] for r in rows]
        try:
            table[name] = np.array([float(c) for c in col])
        except ValueError:
            table[name] = np.array(col)
    return meta, table


def config_from_header(meta):
    """Rebuild a :class:`RunConfig` from table header metadata."""
    text = "".join(f"{k} = {v}\n" for k, v in meta.items() if k in _KEYS)
    return parse_config(text, "<header>")
