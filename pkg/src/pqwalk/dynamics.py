"""
Coin, shift and graph operators, and the evolution of walker states.

One step on configuration ``kappa`` is ``U_kappa = S_kappa C``. The shift
``S_kappa`` is realized as two partial shifts around a switched element
that transmits on present links and reflects on absent links and at both
ends of the line. With H moving right and V moving left, the net action on
vertex ``v`` is::

    |v,H> -> |v+1,H>    if link (v, v+1) present, else  i|v,V>
    |v,V> -> |v-1,V>    if link (v-1, v) present, else  i|v,H>

Averaging the step unitaries over a weighted configuration set gives the
random unitary map used for the open-system dynamics.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .graph import ConfigurationSet, GraphConfiguration, LineGraph
from .qmath import as_matrix

__all__ = [
    "H",
    "V",
    "TRANSMISSION",
    "REFLECTION",
    "EomSettings",
    "CoinOperator",
    "eom_operator",
    "coin_operator",
    "shift_kappa",
    "shift_kappa_decomposed",
    "decomposed_shift_extended",
    "step_unitary",
    "localized_state",
    "evolve_pattern",
    "evolve_pattern_density",
    "rum_step",
    "rum_evolution",
]

H, V = 0, 1

TRANSMISSION = np.eye(2, dtype=np.complex128)
REFLECTION = np.array([[0, 1j], [1j, 0]], dtype=np.complex128)


@dataclass(frozen=True)
class EomSettings:
    """Voltage-controlled retardation ``phi_u`` and natural birefringence phase ``phi`` (radians)."""

    phi_u: float
    phi: float = 0.0


def eom_operator(settings: EomSettings) -> NDArray[np.complex128]:
    """
    Polarization action of the electro-optic modulator.

    ``exp(i phi) [[cos phi_u, i sin phi_u], [i sin phi_u, cos phi_u]]``;
    ``phi_u = 0`` transmits, ``phi_u = pi/2`` reflects.
    """
    c, s = math.cos(settings.phi_u), math.sin(settings.phi_u)
    return np.exp(1j * settings.phi) * np.array([[c, 1j * s], [1j * s, c]], dtype=np.complex128)


@dataclass(frozen=True)
class CoinOperator:
    """Half-wave-plate coin at ``hwp_angle`` degrees."""

    hwp_angle: float
    matrix: NDArray[np.complex128] = field(repr=False, compare=False)


def coin_operator(hwp_angle: float) -> CoinOperator:
    """
    Half-wave plate ``[[cos 2t, sin 2t], [sin 2t, -cos 2t]]`` at angle ``t``.

    22.5 degrees gives the Hadamard coin.
    """
    t = math.radians(2.0 * hwp_angle)
    m = np.array([[math.cos(t), math.sin(t)], [math.sin(t), -math.cos(t)]], dtype=np.complex128)
    m.flags.writeable = False
    return CoinOperator(float(hwp_angle), m)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@functools.lru_cache(maxsize=1024)
def _shift_cached(num_vertices: int, edges: tuple[bool, ...]) -> np.ndarray:
    kappa = GraphConfiguration(edges)
    s = np.zeros((2 * num_vertices, 2 * num_vertices), dtype=np.complex128)
    for v in range(num_vertices):
        if kappa.has_edge(v):
            s[2 * (v + 1) + H, 2 * v + H] = 1.0
        else:
            s[2 * v + V, 2 * v + H] = 1j
        if kappa.has_edge(v - 1):
            s[2 * (v - 1) + V, 2 * v + V] = 1.0
        else:
            s[2 * v + H, 2 * v + V] = 1j
    return _frozen(s)


def shift_kappa(graph: LineGraph, kappa: GraphConfiguration) -> NDArray[np.complex128]:
    """Closed-form shift with reflecting gaps and reflecting ends (read-only array)."""
    kappa.check(graph)
    return _shift_cached(graph.num_vertices, kappa.edges)


def decomposed_shift_extended(
    graph: LineGraph,
    kappa: GraphConfiguration,
    transmission: ArrayLike | None = None,
    reflection: ArrayLike | None = None,
) -> NDArray[np.complex128]:
    """
    Compose partial shift, per-link switching and partial shift explicitly.

    The first partial shift moves the walker onto ``V + 1`` link slots (slot
    ``j`` sits between vertices ``j - 1`` and ``j``; slots 0 and ``V`` are the
    two ends). Present links get ``transmission``, absent links and both end
    slots get ``reflection``. The second partial shift lands on an extended
    line of ``V + 2`` vertices, one spare site on each side, so that any
    amplitude escaping the graph stays visible.

    Returns
    -------
    ndarray, shape (2(V+2), 2V)
        Rows ordered like the walker basis on vertices ``-1 .. V``
        (vertex indices, not labels); rows 2..2V+1 are the graph itself.
    """
    kappa.check(graph)
    t = TRANSMISSION if transmission is None else as_matrix(transmission)
    r = REFLECTION if reflection is None else as_matrix(reflection)
    nv = graph.num_vertices
    ns = nv + 1

    first = np.zeros((2 * ns, 2 * nv), dtype=np.complex128)
    for v in range(nv):
        first[2 * (v + 1) + H, 2 * v + H] = 1.0
        first[2 * v + V, 2 * v + V] = 1.0

    switch = np.zeros((2 * ns, 2 * ns), dtype=np.complex128)
    for j in range(ns):
        op = t if 0 < j < nv and kappa.has_edge(j - 1) else r
        switch[2 * j : 2 * j + 2, 2 * j : 2 * j + 2] = op

    # extended vertex index = vertex index + 1
    second = np.zeros((2 * (nv + 2), 2 * ns), dtype=np.complex128)
    for j in range(ns):
        second[2 * (j + 1) + H, 2 * j + H] = 1.0
        second[2 * j + V, 2 * j + V] = 1.0

    return second @ switch @ first


def shift_kappa_decomposed(
    graph: LineGraph,
    kappa: GraphConfiguration,
    transmission: ArrayLike | None = None,
    reflection: ArrayLike | None = None,
) -> NDArray[np.complex128]:
    """The explicit composition restricted to the vertex subspace, shape (2V, 2V)."""
    full = decomposed_shift_extended(graph, kappa, transmission, reflection)
    return full[2 : 2 + graph.dim]


@functools.lru_cache(maxsize=4096)
def _step_cached(num_vertices: int, edges: tuple[bool, ...], hwp_angle: float) -> np.ndarray:
    coin = coin_operator(hwp_angle).matrix
    return _frozen(_shift_cached(num_vertices, edges) @ np.kron(np.eye(num_vertices), coin))


def step_unitary(
    graph: LineGraph, kappa: GraphConfiguration, coin: CoinOperator
) -> NDArray[np.complex128]:
    """``S_kappa (1 (x) C)`` for one step (read-only array)."""
    kappa.check(graph)
    return _step_cached(graph.num_vertices, kappa.edges, coin.hwp_angle)


def localized_state(graph: LineGraph, position: int = 0, coin: ArrayLike = (1.0, 0.0)) -> NDArray[np.complex128]:
    """Pure walker state ``|position> (x) coin`` (position given as a label)."""
    c = np.asarray(coin, dtype=np.complex128).reshape(2)
    psi = np.zeros(graph.dim, dtype=np.complex128)
    i = graph.index_of(position)
    psi[2 * i : 2 * i + 2] = c
    return psi


def evolve_pattern(
    graph: LineGraph,
    initial: ArrayLike,
    pattern: Sequence[GraphConfiguration],
    coin: CoinOperator,
) -> list[NDArray[np.complex128]]:
    """
    Evolve a pure state through one fixed pattern.

    Returns ``[psi(0), psi(1), ..., psi(n)]``; ``psi(0)`` is a copy of the
    input.
    """
    psi = np.array(initial, dtype=np.complex128).reshape(graph.dim)
    out = [psi]
    for kappa in pattern:
        psi = step_unitary(graph, kappa, coin) @ psi
        out.append(psi)
    return out


def evolve_pattern_density(
    graph: LineGraph,
    initial: ArrayLike,
    pattern: Sequence[GraphConfiguration],
    coin: CoinOperator,
) -> list[NDArray[np.complex128]]:
    """Density-matrix counterpart of :func:`evolve_pattern`."""
    rho = np.array(initial, dtype=np.complex128)
    out = [rho]
    for kappa in pattern:
        u = step_unitary(graph, kappa, coin)
        rho = u @ rho @ u.conj().T
        out.append(rho)
    return out


def rum_step(
    rho: ArrayLike, configs: ConfigurationSet, coin: CoinOperator
) -> NDArray[np.complex128]:
    """One application of the random unitary map ``sum_k p_k U_k rho U_k^+``."""
    rho = as_matrix(rho)
    out = np.zeros_like(rho)
    for kappa, w in configs.items():
        if w == 0.0:
            continue
        u = step_unitary(configs.graph, kappa, coin)
        out += w * (u @ rho @ u.conj().T)
    return out


def rum_evolution(
    initial: ArrayLike, configs: ConfigurationSet, coin: CoinOperator, n: int
) -> list[NDArray[np.complex128]]:
    """``[rho(0), ..., rho(n)]`` by repeated :func:`rum_step`."""
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    rho = as_matrix(initial).copy()
    out = [rho]
    for _ in range(n):
        rho = rum_step(rho, configs, coin)
        out.append(rho)
    return out
