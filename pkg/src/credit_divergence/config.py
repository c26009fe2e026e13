"""Experiment configuration and its flat ``key = value`` text format."""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field

from .corrmat import DEFAULT_BANDS, DEFAULT_NOISE_DIM, NoiseBand, Regime
from .dynamics import LoadingMode
from .errors import CreditDivergenceError

UINT64_MAX = 2**64 - 1
REGIME_ORDER = (Regime.LOW, Regime.HIGH)
PAPER_MARKET_SIZES = (10, 50, 90, 100, 500, 1000)
PAPER_LEVERAGES = tuple(k / 10 for k in range(1, 21))
DESK_MARKET_SIZES = (10, 50, 100)
DESK_LEVERAGES = (0.1, 0.5, 1.0, 1.5, 2.0)


class ConfigError(CreditDivergenceError, ValueError):
    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class DivergenceLevel(str, enum.Enum):
    BERNOULLI = "bernoulli"
    DENSITY = "density"


class FirmAggregation(str, enum.Enum):
    MEAN = "mean"
    FIRST = "first"


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid and model parameters for one experiment.

    ``horizon`` defaults to 25 years: only ``mu * T`` and ``sigma * sqrt(T)``
    enter the default probabilities, and at T = 1 the default drift and
    volatilities put most of the grid on the branch where the divergence is
    not monotone in leverage or market size.
    """

    market_sizes: tuple = PAPER_MARKET_SIZES
    leverages: tuple = PAPER_LEVERAGES
    reps: int = 2000
    regimes: tuple = REGIME_ORDER
    loading_mode: LoadingMode = LoadingMode.DIRECT
    divergence_level: DivergenceLevel = DivergenceLevel.BERNOULLI
    mu: float = 0.05
    sigma_base_high: float = 0.4
    sigma_base_low: float = 0.2
    horizon: float = 25.0
    master_seed: int = 20160101
    firm_aggregation: FirmAggregation = FirmAggregation.MEAN
    noise_dim: int = DEFAULT_NOISE_DIM
    band_high_min: float = DEFAULT_BANDS[Regime.HIGH][0]
    band_high_max: float = DEFAULT_BANDS[Regime.HIGH][1]
    band_low_min: float = DEFAULT_BANDS[Regime.LOW][0]
    band_low_max: float = DEFAULT_BANDS[Regime.LOW][1]
    profile: str = field(default="paper", compare=False)

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("market_sizes", tuple(int(n) for n in self.market_sizes))
        set_("leverages", tuple(float(x) for x in self.leverages))
        regimes = {Regime.parse(r) for r in self.regimes}
        set_("regimes", tuple(r for r in REGIME_ORDER if r in regimes))
        set_("loading_mode", LoadingMode.parse(self.loading_mode))
        set_("divergence_level", _parse_enum(DivergenceLevel, self.divergence_level, "divergence_level"))
        set_("firm_aggregation", _parse_enum(FirmAggregation, self.firm_aggregation, "firm_aggregation"))
        self._validate()

    def _validate(self):
        if not self.market_sizes:
            raise ConfigError("market_sizes must not be empty", "market_sizes")
        if any(n < 2 for n in self.market_sizes):
            raise ConfigError("market sizes must be at least 2", "market_sizes")
        if any(a >= b for a, b in zip(self.market_sizes, self.market_sizes[1:])):
            raise ConfigError("market_sizes must be strictly increasing", "market_sizes")
        if not self.leverages:
            raise ConfigError("leverages must not be empty", "leverages")
        if any(a >= b for a, b in zip(self.leverages, self.leverages[1:])):
            raise ConfigError("leverages must be strictly increasing", "leverages")
        if self.reps < 2:
            raise ConfigError("reps must be at least 2", "reps")
        if not self.regimes:
            raise ConfigError("at least one regime is required", "regimes")
        for key in ("sigma_base_high", "sigma_base_low", "horizon"):
            if not getattr(self, key) > 0:
                raise ConfigError(f"{key} must be positive", key)
        if not 0 <= self.master_seed <= UINT64_MAX:
            raise ConfigError("master_seed must be an unsigned 64-bit integer", "master_seed")
        if self.noise_dim < 1:
            raise ConfigError("noise_dim must be positive", "noise_dim")
        for regime in (Regime.HIGH, Regime.LOW):
            try:
                self.band(regime)
            except ValueError as exc:
                raise ConfigError(str(exc), f"band_{regime.value}_min") from None

    def band(self, regime) -> NoiseBand:
        regime = Regime.parse(regime)
        if regime is Regime.HIGH:
            return NoiseBand(self.band_high_min, self.band_high_max, regime)
        return NoiseBand(self.band_low_min, self.band_low_max, regime)

    def sigma_base(self, regime) -> float:
        return self.sigma_base_high if Regime.parse(regime) is Regime.HIGH else self.sigma_base_low

    def leverage_index(self, leverage: float) -> int:
        try:
            return self.leverages.index(float(leverage))
        except ValueError:
            raise ConfigError(f"leverage {leverage} is not on the configured grid", "leverages") from None

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def desk(cls, **overrides) -> "ExperimentConfig":
        base = dict(market_sizes=DESK_MARKET_SIZES, leverages=DESK_LEVERAGES, reps=200, profile="desk")
        base.update(overrides)
        return cls(**base)

    @classmethod
    def paper(cls, **overrides) -> "ExperimentConfig":
        base = dict(profile="paper")
        base.update(overrides)
        return cls(**base)


PROFILES = {"desk": ExperimentConfig.desk, "paper": ExperimentConfig.paper}

CONFIG_KEYS = tuple(f.name for f in dataclasses.fields(ExperimentConfig))


def _parse_enum(kind, value, key):
    if isinstance(value, kind):
        return value
    try:
        return kind(str(value).strip().lower())
    except ValueError:
        choices = ", ".join(m.value for m in kind)
        raise ConfigError(f"{key}: expected one of {choices}, got {value!r}", key) from None


def _split(value: str):
    return [v.strip() for v in value.split(",") if v.strip()]


def parse_value(key: str, raw: str):
    """Convert one text value into the type of the named config field."""
    if key not in CONFIG_KEYS:
        raise ConfigError(f"unknown config key {key!r}", key)
    raw = raw.strip()
    try:
        if key == "market_sizes":
            return tuple(int(v) for v in _split(raw))
        if key == "leverages":
            return tuple(float(v) for v in _split(raw))
        if key == "regimes":
            if raw.lower() == "both":
                return REGIME_ORDER
            return tuple(Regime.parse(v) for v in _split(raw))
        if key in ("reps", "noise_dim"):
            return int(raw)
        if key == "master_seed":
            return int(raw, 0)
        if key == "loading_mode":
            return LoadingMode.parse(raw)
        if key == "divergence_level":
            return _parse_enum(DivergenceLevel, raw, key)
        if key == "firm_aggregation":
            return _parse_enum(FirmAggregation, raw, key)
        if key == "profile":
            if raw not in PROFILES:
                raise ValueError(raw)
            return raw
        return float(raw)
    except ConfigError:
        raise
    except (ValueError, TypeError):
        raise ConfigError(f"{key}: cannot parse value {raw!r}", key) from None


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    Keys under ``manifest.`` are skipped, so a run manifest is itself a valid
    config file.
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'", None)
        key, raw = (s.strip() for s in line.split("=", 1))
        if key.startswith("manifest."):
            continue
        values[key] = parse_value(key, raw)
    return values


def build_config(values: dict) -> ExperimentConfig:
    """Apply ``values`` on top of their profile's defaults."""
    values = dict(values)
    profile = values.pop("profile", "paper")
    try:
        return PROFILES[profile](**values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> dict:
    with open(path) as fh:
        return parse_config_text(fh.read())


def _format_value(value) -> str:
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, tuple):
        return ",".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(config: ExperimentConfig) -> list[str]:
    return [f"{key} = {_format_value(getattr(config, key))}" for key in CONFIG_KEYS]
