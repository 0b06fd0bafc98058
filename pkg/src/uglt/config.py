"""Run configuration: a TOML file, defaults, and command-line overrides."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

from .errors import ConfigError
from .generators import trig_names
from .grid import MultiIndex, as_multi_index, domain_names, get_domain, n_total
from .pde import COEFFICIENTS, DEFAULT_N, DEFAULT_T


@dataclass(frozen=True)
class Caps:
    eig_dim: int = 3000
    svd_dim: int = 2000
    memory_mb: int = 4096


@dataclass(frozen=True)
class RunConfig:
    """Everything a subcommand needs; immutable once validated."""

    domain: str = "cusp"
    domain_params: dict = field(default_factory=dict)
    symbol: str = "lap2d"
    symbol_params: dict = field(default_factory=dict)
    coefficient: str = "builtin"
    n_list: tuple[MultiIndex, ...] = DEFAULT_N
    t_list: tuple[float, ...] = DEFAULT_T
    seed: int = 0
    output_dir: str = "out"
    caps: Caps = field(default_factory=Caps)

    def validate(self) -> "RunConfig":
        if self.domain not in domain_names():
            raise ConfigError(f"unknown domain {self.domain!r}; known: {', '.join(domain_names())}")
        get_domain(self.domain, **self.domain_params)
        if self.symbol not in trig_names():
            raise ConfigError(f"unknown symbol {self.symbol!r}; known: {', '.join(trig_names())}")
        if self.coefficient not in COEFFICIENTS:
            raise ConfigError(f"unknown coefficient {self.coefficient!r}; "
                              f"known: {', '.join(sorted(COEFFICIENTS))}")
        if not self.n_list:
            raise ConfigError("n_list must not be empty")
        sizes = [n_total(n) for n in self.n_list]
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ConfigError("n_list must be strictly increasing in N(n)")
        if any(not (t > 0) for t in self.t_list):
            raise ConfigError("every t must be positive")
        for name in ("eig_dim", "svd_dim", "memory_mb"):
            if getattr(self.caps, name) <= 0:
                raise ConfigError(f"cap {name} must be positive")
        return self

    @property
    def domain_spec(self):
        return get_domain(self.domain, **self.domain_params)


def _parse_n(v) -> MultiIndex:
    try:
        return as_multi_index(v)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad multi-index {v!r}: {exc}") from None


def _parse_t(v) -> float:
    if isinstance(v, str) and v.lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"bad exhaustion parameter {v!r}") from None


def from_mapping(data: dict, base: RunConfig | None = None) -> RunConfig:
    """Merge a parsed TOML mapping into ``base`` (defaults when omitted)."""
    cfg = base or RunConfig()
    known = {"domain", "symbol", "coefficient", "n_list", "t_list", "seed", "output_dir", "caps"}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown configuration keys: {', '.join(sorted(extra))}")
    kw = {}
    if "domain" in data:
        d = data["domain"]
        if isinstance(d, str):
            kw.update(domain=d, domain_params={})
        else:
            kw.update(domain=d.get("name", cfg.domain), domain_params=dict(d.get("params", {})))
    if "symbol" in data:
        s = data["symbol"]
        if isinstance(s, str):
            kw.update(symbol=s, symbol_params={})
        else:
            kw.update(symbol=s.get("name", cfg.symbol), symbol_params=dict(s.get("params", {})))
    if "coefficient" in data:
        kw["coefficient"] = str(data["coefficient"])
    if "n_list" in data:
        kw["n_list"] = tuple(_parse_n(v) for v in data["n_list"])
    if "t_list" in data:
        kw["t_list"] = tuple(_parse_t(v) for v in data["t_list"])
    if "seed" in data:
        kw["seed"] = int(data["seed"])
    if "output_dir" in data:
        kw["output_dir"] = str(data["output_dir"])
    if "caps" in data:
        try:
            kw["caps"] = replace(cfg.caps, **{k: int(v) for k, v in data["caps"].items()})
        except TypeError as exc:
            raise ConfigError(f"bad caps table: {exc}") from None
    return replace(cfg, **kw)


def load_config(path: str | Path | None = None, **overrides) -> RunConfig:
    """Read a TOML file (optional) and apply non-``None`` overrides."""
    cfg = RunConfig()
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        cfg = from_mapping(data, cfg)
    ov = {k: v for k, v in overrides.items() if v is not None}
    if ov:
        cfg = from_mapping(ov, cfg)
    return cfg.validate()
