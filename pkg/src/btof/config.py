"""Run configuration stored as flat ``key = value`` text."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .background import TemplateWeights
from .errors import ConfigError
from .features import DistanceParams
from .foreground import ThresholdParams
from .ranking import RankingParams
from .refine import HighlightParams

SMOOTHERS = ("none", "l0-approx")


@dataclass
class RunConfig:
    superpixels: int = 200
    compactness: float = 10.0
    sigma2: float = 0.1
    alpha1: float = 0.6
    alpha2: float = 0.4
    mu: float = 0.01
    threshold_a: float = 0.025
    threshold_b: float = 0.95
    threshold_c: float = 0.025
    lambdas: tuple = (0.2, 0.2, 0.2, 0.2, 0.2)
    gamma1: float = 0.5
    gamma2: float = 0.5
    k_clusters: int = 8
    max_iters: int = 3
    smoother: str = "l0-approx"
    smooth_strength: float = 0.02
    kmeans_seed: int = 0
    output_dir: str = "out"
    export_stages: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """Re-check every parameter against its owning module's constraints."""
        if self.superpixels < 4:
            raise ConfigError("superpixels must be at least 4")
        if self.compactness <= 0 or self.sigma2 <= 0:
            raise ConfigError("compactness and sigma2 must be positive")
        if self.smoother not in SMOOTHERS:
            raise ConfigError(f"smoother must be one of {SMOOTHERS}")
        if self.smooth_strength < 0:
            raise ConfigError("smooth_strength must be non-negative")
        if self.max_iters < 0:
            raise ConfigError("max_iters must be non-negative")
        try:
            self.distance_params()
            self.ranking_params()
            ThresholdParams(self.threshold_a, self.threshold_b, self.threshold_c)
            self.template_weights()
            self.highlight_params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        total = self.threshold_a + self.threshold_b + self.threshold_c
        if abs(total - 1.0) > 1e-12:
            self.threshold_a /= total
            self.threshold_b /= total
            self.threshold_c /= total

    def distance_params(self) -> DistanceParams:
        return DistanceParams(self.alpha1, self.alpha2)

    def ranking_params(self) -> RankingParams:
        return RankingParams(self.mu)

    def threshold_params(self) -> ThresholdParams:
        return ThresholdParams(self.threshold_a, self.threshold_b, self.threshold_c)

    def template_weights(self) -> TemplateWeights:
        return TemplateWeights(tuple(self.lambdas))

    def highlight_params(self) -> HighlightParams:
        return HighlightParams(self.gamma1, self.gamma2, self.k_clusters, self.kmeans_seed)


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _parse(key: str, raw: str):
    default = _FIELDS[key].default
    try:
        if isinstance(default, bool):
            lowered = raw.lower()
            if lowered not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return lowered in ("true", "1", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            return tuple(float(v) for v in raw.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return raw


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return " ".join(repr(float(v)) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


def parse_config(text: str) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _parse(key, raw)
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())


def dump_config(cfg: RunConfig) -> str:
    return "".join(f"{name} = {_format(getattr(cfg, name))}\n" for name in _FIELDS)


def save_config(cfg: RunConfig, path) -> None:
    Path(path).write_text(dump_config(cfg))
