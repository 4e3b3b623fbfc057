"""Flat ``key = value`` run configuration.

Files hold one assignment per line (``#`` and ``;`` start comments, no
sections).  Command-line ``--set key=value`` overrides win over the file and
are listed in the manifest.  Defaults::

    N = 2            n = 256          L = 16
    kind = stream2d  terms = 1:0,0    width = 1   degree = 3
    seed = 0         symmetry = none  amplitude = 1
    b_kind = none    (same keys with a b_ prefix for the magnetic field)
    scan_case = diag1                 r_list = auto
    nu = 0.01        dt = 0.01        T = 2       snapshots = 10
    out_dir = out    plots = false
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, fields

import numpy as np

from .generators import KINDS, SYMMETRIES, GeneratorSpec
from .grid import Grid, make_grid


class ConfigError(ValueError):
    """Invalid configuration; the CLI maps it to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    N: int = 2
    n: int = 256
    L: float = 16.0
    kind: str = "stream2d"
    terms: str = "1:0,0"
    width: float = 1.0
    degree: int = 3
    seed: int = 0
    symmetry: str = "none"
    amplitude: float = 1.0
    b_kind: str = "none"
    b_terms: str = "1:0,0"
    b_width: float = 1.0
    b_degree: int = 3
    b_seed: int = 1
    b_symmetry: str = "none"
    b_amplitude: float = 1.0
    scan_case: str = "diag1"
    r_list: str = "auto"
    nu: float = 0.01
    dt: float = 0.01
    T: float = 2.0
    snapshots: int = 10
    convergence_check: bool = False
    dump_snapshots: bool = False
    out_dir: str = "out"
    plots: bool = False
    tol_equipartition: float = 1e-3
    tol_cross: float = 1e-6
    tol_ledger: float = 1e-8
    tol_orthogonality: float = 1e-10
    tol_pv: float = 1e-3
    tol_directional: float = 1e-4
    tol_energy_law: float = 1e-4
    tol_order: float = 3.8

    @property
    def grid(self) -> Grid:
        return make_grid(self.N, self.n, self.L)

    def generator(self, prefix: str = "") -> GeneratorSpec:
        get = lambda name: getattr(self, prefix + name)  # noqa: E731
        kind = get("kind")
        terms = GeneratorSpec.terms if kind == "random_divfree" else parse_terms(get("terms"), self.N, kind)
        return GeneratorSpec(
            kind=kind,
            width=get("width"),
            terms=terms,
            degree=get("degree"),
            seed=get("seed"),
            symmetry=get("symmetry"),
            amplitude=get("amplitude"),
        )

    def case(self) -> tuple:
        return parse_case(self.scan_case, self.N)

    def radii(self, support: float) -> list[float]:
        """``r_list`` as numbers.

        ``auto`` spans ``[max(1.5 support, 45 h), 0.225 L]``: below about
        45 grid cells the cutoff bridge is too steep for the quadrature to
        integrate by parts to 1e-8.
        """
        if self.r_list.strip() == "auto":
            hi = 0.225 * self.L
            lo = min(max(1.5 * support, 45 * self.L / self.n), hi * 0.9)
            return [float(x) for x in np.linspace(lo, hi, 6)]
        return [float(x) for x in self.r_list.split(",")]

    def tolerances(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name.startswith("tol_")}

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def parse_terms(text: str, dims: int, kind: str) -> tuple:
    """``coef:e1,e2;...`` (2D stream) or ``coef:comp:e1,e2,e3;...`` (3D potential)."""
    out = []
    try:
        for item in filter(None, (s.strip() for s in text.split(";"))):
            parts = item.split(":")
            if dims == 2 or kind == "stream2d":
                coef, exps = parts
                out.append((float(coef), tuple(int(e) for e in exps.split(","))))
            else:
                coef, comp, exps = parts
                out.append((float(coef), int(comp), tuple(int(e) for e in exps.split(","))))
    except ValueError as exc:
        raise ConfigError(f"terms: cannot parse {text!r}") from exc
    return tuple(out)


def parse_case(text: str, dims: int) -> tuple:
    """``diag1`` or ``offdiag12`` (1-based axes) to ``("diag", 0)`` / ``("offdiag", 0, 1)``."""
    text = text.strip()
    try:
        if text.startswith("offdiag"):
            j, k = (int(c) - 1 for c in text[7:])
            if j == k or not (0 <= j < dims and 0 <= k < dims):
                raise ValueError
            return ("offdiag", j, k)
        if text.startswith("diag"):
            j = int(text[4:]) - 1
            if not 0 <= j < dims:
                raise ValueError
            return ("diag", j)
    except ValueError:
        pass
    raise ConfigError(f"scan_case: invalid value {text!r}")


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, raw: str):
    kind = _TYPES[key]
    raw = raw.strip()
    try:
        if kind == "bool":
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError
            return low in ("true", "1", "yes")
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind}") from exc
    return raw


def read_file(path) -> dict:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_string("[run]\n" + fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return dict(parser["run"])


def parse_overrides(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_config(path=None, overrides=None) -> tuple[RunConfig, dict]:
    """Validated config plus the overrides that were applied."""
    raw = read_file(path) if path else {}
    over = parse_overrides(overrides)
    merged = {**raw, **over}
    for key in merged:
        if key not in _TYPES:
            raise ConfigError(f"unknown key {key!r}")
    cfg = RunConfig(**{k: _convert(k, v) for k, v in merged.items()})
    validate(cfg)
    return cfg, {k: _convert(k, v) for k, v in over.items()}


def validate(cfg: RunConfig) -> None:
    try:
        cfg.grid
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for prefix in ("", "b_"):
        kind = getattr(cfg, prefix + "kind")
        if prefix and kind == "none":
            continue
        if kind not in KINDS:
            raise ConfigError(f"{prefix}kind: unknown generator {kind!r}")
        if getattr(cfg, prefix + "symmetry") not in SYMMETRIES:
            raise ConfigError(f"{prefix}symmetry: unknown value {getattr(cfg, prefix + 'symmetry')!r}")
        if kind == "stream2d" and cfg.N != 2 or kind == "potential3d" and cfg.N != 3:
            raise ConfigError(f"{prefix}kind: {kind} does not apply for N = {cfg.N}")
        sym = getattr(cfg, prefix + "symmetry")
        if sym == "c4" and cfg.N != 2 or sym == "cubic" and cfg.N != 3:
            raise ConfigError(f"{prefix}symmetry: {sym} does not apply for N = {cfg.N}")
        if getattr(cfg, prefix + "width") > cfg.L / 6:
            raise ConfigError(f"{prefix}width: must be <= L/6 = {cfg.L / 6}")
        try:
            cfg.generator(prefix)
        except ValueError as exc:
            raise ConfigError(f"{prefix}generator: {exc}") from exc
    cfg.case()
    if cfg.r_list.strip() != "auto":
        try:
            radii = [float(x) for x in cfg.r_list.split(",")]
        except ValueError as exc:
            raise ConfigError(f"r_list: cannot parse {cfg.r_list!r}") from exc
        if any(b <= a for a, b in zip(radii, radii[1:])) or not radii or radii[0] <= 0:
            raise ConfigError("r_list: must be positive and increasing")
        if 2 * radii[-1] > 0.45 * cfg.L:
            raise ConfigError("r_list: 2R must stay within 0.45 L")
    if cfg.nu < 0:
        raise ConfigError("nu: must be >= 0")
    if not cfg.dt > 0 or not cfg.T > 0:
        raise ConfigError("dt, T: must be positive")
    if cfg.snapshots < 1:
        raise ConfigError("snapshots: must be >= 1")
    steps = round(cfg.T / cfg.dt)
    if abs(steps * cfg.dt - cfg.T) > 1e-9 * cfg.T or steps % cfg.snapshots:
        raise ConfigError("T: must be a multiple of dt * snapshots")
    for name, value in cfg.tolerances().items():
        if not value > 0:
            raise ConfigError(f"{name}: must be positive")
