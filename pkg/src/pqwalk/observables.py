"""
Observables of the walk: position distributions, coin Stokes parameters,
distances, classical similarity and simulated coin tomography.

Stokes parameters follow the single-qubit tomography convention in which
``(S1, S2, S3)`` pair with the Pauli matrices ``(X, Y, Z)``::

    S1 = P(D) - P(A),   S2 = P(R) - P(L),   S3 = P(H) - P(V)

with ``D/A = (H +- V)/sqrt2`` and ``R/L = (H +- iV)/sqrt2``. The
conventional optics ordering ``S1 = P(H) - P(V), S2 = P(D) - P(A),
S3 = P(R) - P(L)`` is available as ``convention="optics"``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal, Mapping, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .graph import LineGraph
from .qmath import as_matrix

__all__ = [
    "COIN_STATES",
    "BlochProjectionWarning",
    "StokesVector",
    "PositionDistribution",
    "TomographyCounts",
    "position_distribution",
    "stokes",
    "stokes_to_density",
    "project_to_bloch_ball",
    "simulate_tomography",
    "reconstruct_density",
    "similarity",
    "revival_detector",
    "residual_population",
    "turning_points",
]

Convention = Literal["pauli", "optics"]

_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


class BlochProjectionWarning(UserWarning):
    """The Stokes vector lay outside the Bloch ball and was rescaled onto it."""


@dataclass(frozen=True)
class StokesVector:
    s0: float
    s1: float
    s2: float
    s3: float

    def __iter__(self):
        return iter((self.s0, self.s1, self.s2, self.s3))

    def as_array(self) -> NDArray[np.float64]:
        return np.array(tuple(self))

    @property
    def bloch_norm(self) -> float:
        return math.sqrt(self.s1**2 + self.s2**2 + self.s3**2)


@dataclass(frozen=True)
class PositionDistribution:
    """Probability per vertex label."""

    labels: tuple[int, ...]
    probabilities: NDArray[np.float64]

    def __getitem__(self, label: int) -> float:
        return float(self.probabilities[self.labels.index(label)])

    def as_dict(self) -> dict[int, float]:
        return {lab: float(p) for lab, p in zip(self.labels, self.probabilities)}

    @classmethod
    def from_mapping(cls, labels: Sequence[int], probs: Mapping[int, float]) -> "PositionDistribution":
        return cls(tuple(labels), np.array([probs.get(lab, 0.0) for lab in labels], dtype=float))


@dataclass(frozen=True)
class TomographyCounts:
    """Counts for the six coin projectors; each basis pair sums to the shots per basis."""

    H: int
    V: int
    D: int
    A: int
    R: int
    L: int


def position_distribution(rho: ArrayLike, graph: LineGraph) -> PositionDistribution:
    """``P(v) = <v,H|rho|v,H> + <v,V|rho|v,V>``; not renormalized."""
    rho = as_matrix(rho)
    if rho.shape != (graph.dim, graph.dim):
        raise ValueError(f"state of shape {rho.shape} does not match a {graph.num_vertices}-vertex graph")
    diag = np.real(np.diag(rho)).reshape(graph.num_vertices, 2)
    return PositionDistribution(graph.labels, diag.sum(axis=1))


def residual_population(rho: ArrayLike, graph: LineGraph, support: Sequence[int]) -> float:
    """Total population on vertices outside ``support``."""
    dist = position_distribution(rho, graph)
    return float(sum(p for lab, p in zip(dist.labels, dist.probabilities) if lab not in support))


def stokes(sigma: ArrayLike, convention: Convention = "pauli") -> StokesVector:
    """Stokes parameters of a 2x2 coin density matrix."""
    s = as_matrix(sigma)
    if s.shape != (2, 2):
        raise ValueError(f"coin state must be 2x2, got {s.shape}")
    s0 = float(np.real(s[0, 0] + s[1, 1]))
    hv = float(np.real(s[0, 0] - s[1, 1]))
    da = float(2.0 * np.real(s[0, 1]))
    rl = float(-2.0 * np.imag(s[0, 1]))
    if convention == "pauli":
        return StokesVector(s0, da, rl, hv)
    if convention == "optics":
        return StokesVector(s0, hv, da, rl)
    raise ValueError(f"unknown Stokes convention {convention!r}")


def _pauli_components(s: StokesVector, convention: Convention) -> tuple[float, float, float]:
    if convention == "pauli":
        return s.s1, s.s2, s.s3
    if convention == "optics":
        return s.s2, s.s3, s.s1
    raise ValueError(f"unknown Stokes convention {convention!r}")


def project_to_bloch_ball(s: StokesVector) -> tuple[StokesVector, bool]:
    """Rescale the Bloch part radially onto the ball ``|s| <= s0``; report whether it moved."""
    r = s.bloch_norm
    if r <= s.s0:
        return s, False
    f = s.s0 / r
    return StokesVector(s.s0, s.s1 * f, s.s2 * f, s.s3 * f), True


def stokes_to_density(
    s: StokesVector | Sequence[float], convention: Convention = "pauli"
) -> NDArray[np.complex128]:
    """
    Density matrix ``(s0 I + x X + y Y + z Z) / 2``.

    A Stokes vector outside the Bloch ball is projected radially onto it and
    a :class:`BlochProjectionWarning` is issued.
    """
    if not isinstance(s, StokesVector):
        s = StokesVector(*map(float, s))
    s, moved = project_to_bloch_ball(s)
    if moved:
        warnings.warn("Stokes vector outside the Bloch ball; projected onto it", BlochProjectionWarning, stacklevel=2)
    x, y, z = _pauli_components(s, convention)
    return 0.5 * (s.s0 * np.eye(2) + x * _X + y * _Y + z * _Z)


COIN_STATES = {
    "H": np.array([1, 0], dtype=np.complex128),
    "V": np.array([0, 1], dtype=np.complex128),
    "D": np.array([1, 1], dtype=np.complex128) / math.sqrt(2),
    "A": np.array([1, -1], dtype=np.complex128) / math.sqrt(2),
    "R": np.array([1, 1j], dtype=np.complex128) / math.sqrt(2),
    "L": np.array([1, -1j], dtype=np.complex128) / math.sqrt(2),
}


def _projector_probability(sigma: NDArray[np.complex128], label: str) -> float:
    v = COIN_STATES[label]
    p = float(np.real(v.conj() @ sigma @ v) / np.real(np.trace(sigma)))
    return min(max(p, 0.0), 1.0)


def simulate_tomography(sigma: ArrayLike, shots_per_basis: int, seed: int) -> TomographyCounts:
    """
    Binomial measurement counts in the H/V, D/A and R/L bases.

    One ``numpy.random.default_rng(seed)`` stream draws the three bases in
    that order.
    """
    if shots_per_basis < 1:
        raise ValueError(f"shots_per_basis must be >= 1, got {shots_per_basis}")
    sigma = as_matrix(sigma)
    rng = np.random.default_rng(seed)
    counts = {}
    for first, second in (("H", "V"), ("D", "A"), ("R", "L")):
        k = int(rng.binomial(shots_per_basis, _projector_probability(sigma, first)))
        counts[first], counts[second] = k, shots_per_basis - k
    return TomographyCounts(**counts)


def reconstruct_density(counts: TomographyCounts) -> tuple[NDArray[np.complex128], bool]:
    """
    Linear-inversion estimate of the coin state from six-projector counts.

    Returns the density matrix and whether Bloch-ball projection was needed.
    """
    def diff(a: int, b: int) -> float:
        n = a + b
        if n == 0:
            raise ValueError("a measurement basis has no counts")
        return (a - b) / n

    raw = StokesVector(
        1.0,
        diff(counts.D, counts.A),
        diff(counts.R, counts.L),
        diff(counts.H, counts.V),
    )
    s, moved = project_to_bloch_ball(raw)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BlochProjectionWarning)
        return stokes_to_density(s), moved


def similarity(p: PositionDistribution, q: PositionDistribution) -> float:
    """Classical fidelity ``(sum_v sqrt(p_v q_v))**2`` of two distributions on the same vertices."""
    if p.labels != q.labels:
        raise ValueError(f"distributions live on different vertex sets: {p.labels} vs {q.labels}")
    pp = np.clip(p.probabilities, 0.0, None)
    qq = np.clip(q.probabilities, 0.0, None)
    return float(min(np.sum(np.sqrt(pp * qq)) ** 2, 1.0))


def revival_detector(distances: Sequence[float], tol: float = 1e-9) -> list[int]:
    """Indices ``n`` with ``d[n] > d[n-1] + tol``, i.e. steps where the distance grows."""
    d = list(distances)
    if len(d) < 2:
        raise ValueError("need at least two distances")
    return [n for n in range(1, len(d)) if d[n] > d[n - 1] + tol]


def turning_points(curve: Sequence[float], tol: float = 0.0) -> list[tuple[int, str]]:
    """
    Interior extrema of a sampled curve as ``(index, "max" | "min")``.

    Changes with ``|d[n] - d[n-1]| <= tol`` count as flat. A flat stretch
    between a rise and a fall (or a fall and a rise) is reported at its
    first index.
    """
    d = np.asarray(curve, dtype=float)
    out: list[tuple[int, str]] = []
    prev_sign, start = 0, 0
    for n in range(1, len(d)):
        delta = d[n] - d[n - 1]
        sign = 0 if abs(delta) <= tol else (1 if delta > 0 else -1)
        if sign == 0:
            continue
        if prev_sign and sign != prev_sign:
            out.append((start, "max" if prev_sign > 0 else "min"))
        prev_sign, start = sign, n
    return out
