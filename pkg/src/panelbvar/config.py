"""Run configuration: one TOML file fully determines a run."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .analysis import DEFAULT_PROBS
from .paneldata import VariableTransform


class ConfigError(ValueError):
    """Unusable run configuration."""


@dataclass
class PriorSettings:
    kappa: float = 0.2
    c: float = 1000.0
    tau: float | None = None  # defaults to 10 * kappa
    s_floor: float = 1e-8

    @property
    def tau_resolved(self) -> float:
        return 10.0 * self.kappa if self.tau is None else self.tau


@dataclass
class IdentificationSettings:
    target: str = ""
    horizon: int = 5
    mode: str = "single"  # or "orthogonal-pair"
    secondary_target: str | None = None


@dataclass
class SamplerSettings:
    n_draws: int = 10_000
    n_burn: int = 8_000
    seed: int = 0
    workers: int = 1

    @property
    def n_retained(self) -> int:
        return self.n_draws - self.n_burn


@dataclass
class AnalysisSettings:
    h_irf: int = 20
    h_fevd: int = 10
    probs: tuple[float, ...] = DEFAULT_PROBS
    keep_draws: bool = False


@dataclass
class DgpSettings:
    n_vars: int = 4
    n_lags: int = 2
    delay: int = 1
    n_countries: int = 20
    n_years: int = 60
    seed: int = 0
    start_year: int = 1960


@dataclass
class DataSettings:
    source: str = "csv"  # or "simulate"
    path: str | None = None
    variables: list[str] = field(default_factory=list)
    transforms: dict[str, VariableTransform] = field(default_factory=dict)
    dgp: DgpSettings | None = None


@dataclass
class RunConfig:
    data: DataSettings
    lags: int = 15
    prior: PriorSettings = field(default_factory=PriorSettings)
    identification: IdentificationSettings = field(default_factory=IdentificationSettings)
    sampler: SamplerSettings = field(default_factory=SamplerSettings)
    analysis: AnalysisSettings = field(default_factory=AnalysisSettings)
    groups: dict[str, list[str]] = field(default_factory=dict)
    output_dir: str = "out"


def _take(table: dict, allowed: set[str], where: str) -> None:
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(sorted(unknown))}")


def _build(cls, table: dict, where: str):
    fields = {f for f in cls.__dataclass_fields__}
    _take(table, fields, where)
    try:
        return cls(**table)
    except TypeError as exc:
        raise ConfigError(f"[{where}]: {exc}") from None


def parse_config(raw: dict) -> RunConfig:
    _take(
        raw,
        {"data", "model", "prior", "identification", "sampler", "analysis", "groups", "output"},
        "top level",
    )
    data_raw = dict(raw.get("data", {}))
    _take(data_raw, {"source", "path", "variables", "transforms", "dgp"}, "data")
    transforms = {}
    for name, table in dict(data_raw.pop("transforms", {})).items():
        _take(table, {"deflate_by", "per_capita_by", "log"}, f"data.transforms.{name}")
        transforms[name] = VariableTransform(**table)
    dgp_raw = data_raw.pop("dgp", None)
    dgp = _build(DgpSettings, dict(dgp_raw), "data.dgp") if dgp_raw is not None else None
    data = DataSettings(transforms=transforms, dgp=dgp, **data_raw)

    model = dict(raw.get("model", {}))
    _take(model, {"lags"}, "model")
    analysis_raw = dict(raw.get("analysis", {}))
    if "probs" in analysis_raw:
        analysis_raw["probs"] = tuple(analysis_raw["probs"])
    cfg = RunConfig(
        data=data,
        lags=model.get("lags", 15),
        prior=_build(PriorSettings, dict(raw.get("prior", {})), "prior"),
        identification=_build(
            IdentificationSettings, dict(raw.get("identification", {})), "identification"
        ),
        sampler=_build(SamplerSettings, dict(raw.get("sampler", {})), "sampler"),
        analysis=_build(AnalysisSettings, analysis_raw, "analysis"),
        groups={k: list(v) for k, v in dict(raw.get("groups", {})).items()},
        output_dir=dict(raw.get("output", {})).get("dir", "out"),
    )
    _take(dict(raw.get("output", {})), {"dir", "save_draws"}, "output")
    cfg.analysis.keep_draws = cfg.analysis.keep_draws or bool(
        dict(raw.get("output", {})).get("save_draws", False)
    )
    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig) -> None:
    if cfg.data.source not in ("csv", "simulate"):
        raise ConfigError(f"data source must be 'csv' or 'simulate', got {cfg.data.source!r}")
    if cfg.data.source == "csv" and not cfg.data.path:
        raise ConfigError("csv source requires data.path")
    if cfg.data.source == "simulate" and cfg.data.dgp is None:
        cfg.data.dgp = DgpSettings()
    if cfg.data.source == "simulate" and not cfg.data.variables:
        cfg.data.variables = [f"v{i + 1}" for i in range(cfg.data.dgp.n_vars)]
    if not cfg.data.variables:
        raise ConfigError("data.variables must list the model variables")
    if len(set(cfg.data.variables)) != len(cfg.data.variables):
        raise ConfigError("data.variables contains duplicates")
    if cfg.lags < 1:
        raise ConfigError("model.lags must be >= 1")
    if cfg.prior.kappa <= 0 or cfg.prior.c <= 0 or cfg.prior.s_floor <= 0:
        raise ConfigError("prior tightness parameters must be positive")
    if cfg.prior.tau is not None and cfg.prior.tau <= 0:
        raise ConfigError("prior.tau must be positive")

    ident = cfg.identification
    if not ident.target:
        raise ConfigError("identification.target is required")
    if ident.target not in cfg.data.variables:
        raise ConfigError(
            f"identification target {ident.target!r} is not among the model variables "
            f"{cfg.data.variables}"
        )
    if ident.horizon < 2:
        raise ConfigError("identification.horizon must be >= 2")
    if ident.mode not in ("single", "orthogonal-pair"):
        raise ConfigError(f"identification.mode must be 'single' or 'orthogonal-pair'")
    if ident.mode == "orthogonal-pair":
        if not ident.secondary_target:
            raise ConfigError("orthogonal-pair mode requires identification.secondary_target")
        if ident.secondary_target not in cfg.data.variables:
            raise ConfigError(
                f"secondary target {ident.secondary_target!r} is not among the model variables"
            )
        if ident.secondary_target == ident.target:
            raise ConfigError("secondary target must differ from the primary target")

    s = cfg.sampler
    if not (s.n_draws > s.n_burn >= 0):
        raise ConfigError("need sampler.n_draws > sampler.n_burn >= 0")
    if s.workers < 1:
        raise ConfigError("sampler.workers must be >= 1")

    a = cfg.analysis
    if a.h_irf < 0 or a.h_fevd < 1:
        raise ConfigError("analysis horizons out of range")
    probs = list(a.probs)
    if not probs or sorted(probs) != probs or probs[0] <= 0 or probs[-1] >= 1:
        raise ConfigError("analysis.probs must be sorted and inside (0, 1)")
    for gname, members in cfg.groups.items():
        if not members:
            raise ConfigError(f"group {gname!r} is empty")


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from None
    return parse_config(raw)


def resolved_dict(cfg: RunConfig) -> dict:
    """Fully-resolved configuration, defaults included, for manifests."""
    out = asdict(cfg)
    out["prior"]["tau"] = cfg.prior.tau_resolved
    out["sampler"]["n_retained"] = cfg.sampler.n_retained
    return out


def config_hash(cfg: RunConfig) -> str:
    blob = json.dumps(resolved_dict(cfg), sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()
