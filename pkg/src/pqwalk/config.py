"""Run configuration: a versioned JSON document validated with pydantic."""

from __future__ import annotations

import json
import math
import re
from pathlib import Path
from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .graph import DEFAULT_PATTERN_CAP, LineGraph
from .realistic import ParameterRanges, RealisticParameters

__all__ = ["SCHEMA_VERSION", "ConfigError", "InitialSpec", "RunConfig", "load_config", "parse_config"]

SCHEMA_VERSION = 1
COIN_LABELS = ("H", "V", "D", "A", "R", "L")


class ConfigError(ValueError):
    """Invalid run configuration; ``line`` points into the source text when known."""

    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        self.message, self.line, self.source = message, line, source
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


class InitialSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    position: int = 0
    coin: Union[str, list[float]] = "H"

    @field_validator("coin")
    @classmethod
    def _check_coin(cls, v):
        if isinstance(v, str):
            if v not in COIN_LABELS:
                raise ValueError(f"coin label must be one of {', '.join(COIN_LABELS)}")
        else:
            if len(v) != 3:
                raise ValueError("Bloch vector needs exactly three components (S1, S2, S3)")
            if math.fsum(x * x for x in v) > 1.0 + 1e-12:
                raise ValueError("Bloch vector has norm greater than 1")
        return v


class RunConfig(BaseModel):
    """
    Everything needed for one run. Omitted fields take the experiment's
    values: three sites, six steps, link probability 1/2, single-link
    configurations, Hadamard coin, ``|H>`` at the central site.
    """

    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1]
    vertices: int = Field(3, ge=1)
    steps: int = Field(6, ge=0)
    link_probability: float = Field(0.5, ge=0.0, le=1.0)
    restricted: bool = True
    hwp_angle: float = 22.5
    initial: InitialSpec = InitialSpec()
    mode: Literal["ideal", "realistic", "errorbars"] = "ideal"
    realistic: Optional[dict[str, float]] = None
    ranges: Optional[dict[str, tuple[float, float]]] = None
    eom_loss: Literal["path", "switched"] = "path"
    errorbar_draws: int = Field(1000, ge=2)
    seed: int = 0
    pattern_cap: int = Field(DEFAULT_PATTERN_CAP, ge=1)
    pattern_samples: Optional[int] = Field(None, ge=1)
    output_dir: str = "results"

    @property
    def graph(self) -> LineGraph:
        return LineGraph(self.vertices)

    def parameter_ranges(self) -> ParameterRanges:
        return ParameterRanges.from_mapping(self.ranges or {}, base=ParameterRanges.paper())

    def realistic_parameters(self) -> RealisticParameters:
        base = RealisticParameters.nominal()
        return base.replace(**(self.realistic or {}))

    def echo(self) -> dict[str, Any]:
        return self.model_dump(mode="json")


def _cross_check(cfg: RunConfig) -> list[tuple[tuple, str]]:
    problems = []
    labels = cfg.graph.labels
    if cfg.initial.position not in labels:
        problems.append((("initial", "position"), f"position {cfg.initial.position} is not a vertex of {list(labels)}"))
    if cfg.restricted:
        if cfg.vertices != 3:
            problems.append((("restricted",), "the restricted configuration set needs exactly 3 vertices"))
        elif cfg.link_probability in (0.0, 1.0):
            problems.append((("link_probability",), "the restricted set has zero probability at p = 0 or 1"))
    for key in ("realistic", "ranges"):
        unknown = set(getattr(cfg, key) or {}) - set(RealisticParameters.field_names())
        for name in sorted(unknown):
            problems.append(((key, name), f"unknown realistic parameter {name!r}"))
    if not problems:
        try:
            cfg.realistic_parameters()
        except ValueError as exc:
            problems.append((("realistic",), str(exc)))
        try:
            cfg.parameter_ranges()
        except ValueError as exc:
            problems.append((("ranges",), str(exc)))
    return problems


def _locate(text: str, loc: tuple) -> int:
    """Best-effort source line of a JSON key path; falls back to the deepest key found."""
    pos, found = 0, None
    for key in loc:
        if not isinstance(key, str):
            continue
        m = re.compile(r'"%s"\s*:' % re.escape(key)).search(text, pos)
        if m is None:
            break
        pos = found = m.start()
    if found is None:
        m = re.search(r"\S", text)
        found = m.start() if m else 0
    return text.count("\n", 0, found) + 1


def parse_config(text: str, source: str = "<config>", overrides: dict[str, Any] | None = None) -> RunConfig:
    """Parse and validate config text; raises :class:`ConfigError` with a line number."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", exc.lineno, source) from None
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object", 1, source)
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        loc = tuple(err["loc"])
        field = ".".join(str(x) for x in loc) or "(root)"
        raise ConfigError(f"{field}: {err['msg']}", _locate(text, loc), source) from None
    problems = _cross_check(cfg)
    if problems:
        loc, msg = problems[0]
        raise ConfigError(f"{'.'.join(loc)}: {msg}", _locate(text, loc), source)
    return cfg


def load_config(path: str | Path, overrides: dict[str, Any] | None = None) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(path)) from None
    return parse_config(text, str(path), overrides)
