"""
Bond-percolation configurations on a finite line graph.

A configuration records which of the ``V - 1`` links of the line are
present during one step. Configurations serialize as binary strings over
the edges, leftmost character = leftmost edge, so ``"10"`` on three
vertices means the left link is present and the right one is absent.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DEFAULT_PATTERN_CAP",
    "PatternCapExceeded",
    "LineGraph",
    "GraphConfiguration",
    "ConfigurationSet",
    "Pattern",
    "full_set",
    "restricted_set",
    "enumerate_patterns",
    "sample_patterns",
    "pattern_to_string",
]

DEFAULT_PATTERN_CAP = 10**6


class PatternCapExceeded(RuntimeError):
    """Raised when full enumeration would exceed the configured cap."""


@dataclass(frozen=True)
class LineGraph:
    """
    Line graph of ``num_vertices`` sites labelled by integers around 0.

    Labels start at ``-(V // 2)``, e.g. ``(-1, 0, 1)`` for ``V = 3``.
    """

    num_vertices: int

    def __post_init__(self) -> None:
        if int(self.num_vertices) != self.num_vertices or self.num_vertices < 1:
            raise ValueError(f"num_vertices must be a positive integer, got {self.num_vertices}")

    @property
    def num_edges(self) -> int:
        return self.num_vertices - 1

    @property
    def labels(self) -> tuple[int, ...]:
        start = -(self.num_vertices // 2)
        return tuple(range(start, start + self.num_vertices))

    @property
    def dim(self) -> int:
        """Dimension of the joint position x coin space."""
        return 2 * self.num_vertices

    def index_of(self, label: int) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"vertex {label} not in {self.labels}") from None


@dataclass(frozen=True)
class GraphConfiguration:
    """Present/absent flag for every edge; ``edges[e]`` links vertex ``e`` and ``e + 1``."""

    edges: tuple[bool, ...]

    @classmethod
    def from_string(cls, bits: str) -> "GraphConfiguration":
        if any(c not in "01" for c in bits):
            raise ValueError(f"configuration string must be binary, got {bits!r}")
        return cls(tuple(c == "1" for c in bits))

    def __str__(self) -> str:
        return "".join("1" if e else "0" for e in self.edges)

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def num_present(self) -> int:
        return sum(self.edges)

    def has_edge(self, e: int) -> bool:
        """Edge ``e`` by vertex index; indices outside the line are absent."""
        return 0 <= e < len(self.edges) and self.edges[e]

    def check(self, graph: LineGraph) -> None:
        if len(self.edges) != graph.num_edges:
            raise ValueError(
                f"configuration {self} has {len(self.edges)} edges, graph has {graph.num_edges}"
            )


Pattern = tuple[GraphConfiguration, ...]


@dataclass(frozen=True)
class ConfigurationSet:
    """Weighted set of configurations for one graph."""

    graph: LineGraph
    configurations: tuple[GraphConfiguration, ...]
    weights: tuple[float, ...]
    link_probability: float

    def __post_init__(self) -> None:
        if len(self.configurations) != len(self.weights):
            raise ValueError("configurations and weights differ in length")
        if not self.configurations:
            raise ValueError("configuration set is empty")
        if len(set(self.configurations)) != len(self.configurations):
            raise ValueError("duplicate configurations")
        for k in self.configurations:
            k.check(self.graph)
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if abs(math.fsum(self.weights) - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {math.fsum(self.weights)}, not 1")

    def __len__(self) -> int:
        return len(self.configurations)

    def items(self) -> Iterable[tuple[GraphConfiguration, float]]:
        return zip(self.configurations, self.weights)

    def weight(self, kappa: GraphConfiguration) -> float:
        return self.weights[self.configurations.index(kappa)]


def _check_probability(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"link probability must lie in [0, 1], got {p}")


def _binomial_weight(kappa: GraphConfiguration, p: float) -> float:
    k = kappa.num_present
    return p**k * (1.0 - p) ** (len(kappa) - k)


def full_set(graph: LineGraph, p: float) -> ConfigurationSet:
    """
    All ``2**(V-1)`` configurations with independent link probability ``p``.

    Ordered from all-present down to all-absent (``"11", "10", "01", "00"``
    for three vertices).
    """
    _check_probability(p)
    configs = tuple(
        GraphConfiguration(tuple(bool(b) for b in bits))
        for bits in itertools.product((1, 0), repeat=graph.num_edges)
    )
    return ConfigurationSet(graph, configs, tuple(_binomial_weight(k, p) for k in configs), p)


def restricted_set(graph: LineGraph, p: float) -> ConfigurationSet:
    """
    Single-link configurations of the three-site line, ``"10"`` and ``"01"``.

    Weights are the full-set weights conditioned on membership, which makes
    them 1/2 each for every ``0 < p < 1``.
    """
    _check_probability(p)
    if graph.num_vertices != 3:
        raise ValueError(
            "the restricted configuration set is only defined for three vertices, "
            f"got {graph.num_vertices}"
        )
    configs = (GraphConfiguration((True, False)), GraphConfiguration((False, True)))
    raw = [_binomial_weight(k, p) for k in configs]
    total = math.fsum(raw)
    if total == 0.0:
        raise ValueError(f"restricted set has zero total probability at p={p}")
    return ConfigurationSet(graph, configs, tuple(w / total for w in raw), p)


def enumerate_patterns(
    configs: ConfigurationSet, n: int, cap: int = DEFAULT_PATTERN_CAP
) -> list[tuple[Pattern, float]]:
    """
    Every length-``n`` pattern with its i.i.d. probability.

    Raises
    ------
    PatternCapExceeded
        When ``len(configs) ** n`` exceeds ``cap``; use
        :func:`sample_patterns` instead.
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    total = len(configs) ** n
    if total > cap:
        raise PatternCapExceeded(
            f"{total} patterns exceed the cap of {cap}; use sample_patterns for Monte Carlo sampling"
        )
    out = []
    for idx in itertools.product(range(len(configs)), repeat=n):
        pattern = tuple(configs.configurations[i] for i in idx)
        prob = math.prod(configs.weights[i] for i in idx)
        out.append((pattern, prob))
    return out


def sample_patterns(
    configs: ConfigurationSet, n: int, count: int, seed: int
) -> list[Pattern]:
    """
    Draw ``count`` i.i.d. patterns of length ``n``.

    Uses ``numpy.random.default_rng(seed)`` (PCG64); indices are drawn in one
    ``(count, n)`` block, so the output is reproducible for a given seed.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(configs), size=(count, n), p=np.asarray(configs.weights))
    return [tuple(configs.configurations[i] for i in row) for row in idx]


def pattern_to_string(pattern: Sequence[GraphConfiguration], sep: str = " ") -> str:
    return sep.join(str(k) for k in pattern)
