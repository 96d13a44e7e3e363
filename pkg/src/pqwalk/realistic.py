"""
Realistic model of the experiment: the ideal walk with systematic errors.

Four error sources are modelled. Losses in the two loop paths and in the
electro-optic modulator attenuate amplitudes coherently. The coin
wave-plate angle carries an offset. Detectors in the H and V arms have
unequal efficiencies, with a separate correction factor for the first step.
The evolution is trace-decreasing. Reported observables are renormalized
step by step, the way detected counts are.

Two placements of the modulator loss are available:

``"path"`` (default)
    Every pulse passes the modulator once per double step, so its
    transmission multiplies all amplitudes alike.
``"switched"``
    Only reflected (switched) components are attenuated. This breaks the
    mirror symmetry of the first step at second order in the offsets.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass
from typing import Literal, Mapping, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .dynamics import REFLECTION, CoinOperator, coin_operator, shift_kappa, shift_kappa_decomposed
from .graph import ConfigurationSet, GraphConfiguration, LineGraph
from .observables import PositionDistribution, StokesVector, stokes
from .qmath import as_matrix, hs_distance_sq, maximally_mixed, partial_trace_position

__all__ = [
    "SignalExtinctionError",
    "RealisticParameters",
    "ParameterRanges",
    "RealisticResult",
    "OBSERVABLES",
    "realistic_evolution",
    "apply_detection_efficiency",
    "invert_detection_efficiency",
    "detection_efficiencies",
    "monte_carlo_errorbars",
    "fit_parameters",
]

EomLoss = Literal["path", "switched"]

TRACE_FLOOR = 1e-15


class SignalExtinctionError(ArithmeticError):
    """The simulated signal fell below the representable floor."""


@dataclass(frozen=True)
class RealisticParameters:
    """
    Systematic-error parameters.

    Transmissions and efficiencies are intensity fractions in ``(0, 1]``;
    ``hwp_angle_offset`` is in degrees.
    """

    path_loss_A: float = 1.0
    path_loss_B: float = 1.0
    detector_eff_H: float = 1.0
    detector_eff_V: float = 1.0
    eom_transmission: float = 1.0
    hwp_angle_offset: float = 0.0
    first_step_efficiency_correction: float = 1.0

    EOM_RANGE = (0.98, 1.0)
    HWP_OFFSET_RANGE = (-0.2, 0.2)

    def __post_init__(self) -> None:
        for name in ("path_loss_A", "path_loss_B", "detector_eff_H", "detector_eff_V", "eom_transmission"):
            x = getattr(self, name)
            if not 0.0 < x <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {x}")
        lo, hi = self.EOM_RANGE
        if not lo <= self.eom_transmission <= hi:
            raise ValueError(f"eom_transmission must lie in [{lo}, {hi}], got {self.eom_transmission}")
        lo, hi = self.HWP_OFFSET_RANGE
        if not lo <= self.hwp_angle_offset <= hi:
            raise ValueError(f"hwp_angle_offset must lie in [{lo}, {hi}] degrees, got {self.hwp_angle_offset}")
        if not self.first_step_efficiency_correction > 0.0:
            raise ValueError("first_step_efficiency_correction must be positive")

    @classmethod
    def ideal(cls) -> "RealisticParameters":
        return cls()

    @classmethod
    def nominal(cls) -> "RealisticParameters":
        """Centre of :meth:`ParameterRanges.paper`."""
        return ParameterRanges.paper().center()

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in dataclasses.fields(cls))

    def replace(self, **changes: float) -> "RealisticParameters":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class ParameterRanges:
    """``(low, high)`` bounds per :class:`RealisticParameters` field; degenerate by default."""

    path_loss_A: tuple[float, float] = (1.0, 1.0)
    path_loss_B: tuple[float, float] = (1.0, 1.0)
    detector_eff_H: tuple[float, float] = (1.0, 1.0)
    detector_eff_V: tuple[float, float] = (1.0, 1.0)
    eom_transmission: tuple[float, float] = (1.0, 1.0)
    hwp_angle_offset: tuple[float, float] = (0.0, 0.0)
    first_step_efficiency_correction: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self) -> None:
        for name in RealisticParameters.field_names():
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name}: low {lo} exceeds high {hi}")
            object.__setattr__(self, name, (float(lo), float(hi)))
        # both corners must be valid parameter values
        self.corner(0.0), self.corner(1.0)

    @classmethod
    def paper(cls) -> "ParameterRanges":
        """
        Ranges of the laboratory characterization.

        Path transmissions are 0.5 +- 0.02 per round trip, the modulator
        transmits 98-100 %, and the wave plate is set to within 0.2 degrees.
        The detector efficiencies (0.65) come from a separate measurement
        and are held fixed.
        """
        return cls(
            path_loss_A=(0.48, 0.52),
            path_loss_B=(0.48, 0.52),
            detector_eff_H=(0.65, 0.65),
            detector_eff_V=(0.65, 0.65),
            eom_transmission=RealisticParameters.EOM_RANGE,
            hwp_angle_offset=RealisticParameters.HWP_OFFSET_RANGE,
            first_step_efficiency_correction=(1.0, 1.0),
        )

    @classmethod
    def from_mapping(cls, ranges: Mapping[str, Sequence[float]], base: "ParameterRanges | None" = None) -> "ParameterRanges":
        base = cls() if base is None else base
        unknown = set(ranges) - set(RealisticParameters.field_names())
        if unknown:
            raise ValueError(f"unknown parameter(s): {sorted(unknown)}")
        return dataclasses.replace(base, **{k: tuple(v) for k, v in ranges.items()})

    @classmethod
    def point(cls, params: RealisticParameters) -> "ParameterRanges":
        return cls(**{k: (v, v) for k, v in dataclasses.asdict(params).items()})

    def bounds(self) -> NDArray[np.float64]:
        return np.array([getattr(self, n) for n in RealisticParameters.field_names()])

    def corner(self, u: float | ArrayLike) -> RealisticParameters:
        """Parameters at ``low + u (high - low)``, with ``u`` scalar or per-field."""
        b = self.bounds()
        vals = b[:, 0] + np.broadcast_to(np.asarray(u, dtype=float), b.shape[:1]) * (b[:, 1] - b[:, 0])
        return RealisticParameters(*map(float, vals))

    def center(self) -> RealisticParameters:
        return self.corner(0.5)

    def scaled(self, factor: float) -> "ParameterRanges":
        """Shrink (``factor < 1``) every range about its centre."""
        b = self.bounds()
        mid, half = b.mean(axis=1), (b[:, 1] - b[:, 0]) / 2 * factor
        return ParameterRanges(*[(m - h, m + h) for m, h in zip(mid, half)])

    def varied_fields(self) -> tuple[str, ...]:
        return tuple(n for n in RealisticParameters.field_names() if getattr(self, n)[0] != getattr(self, n)[1])


def detection_efficiencies(params: RealisticParameters, step: int | None = None) -> tuple[float, float]:
    """Detector efficiencies ``(eff_H, eff_V)`` seen at ``step``."""
    eff_v = params.detector_eff_V
    if step == 1:
        eff_v *= params.first_step_efficiency_correction
    return params.detector_eff_H, eff_v


def _scale_coin(obs: ArrayLike, eff_h: float, eff_v: float, kind: str) -> NDArray:
    if kind == "density":
        a = as_matrix(obs)
        if a.shape[0] != a.shape[1] or a.shape[0] % 2:
            raise ValueError(f"density matrix must be square of even size, got {a.shape}")
        d = np.tile(np.sqrt([eff_h, eff_v]), a.shape[0] // 2)
        out = d[:, None] * a * d[None, :]
        total = float(np.real(np.trace(out)))
    elif kind == "populations":
        a = np.asarray(obs, dtype=float)
        if a.ndim != 2 or a.shape[1] != 2:
            raise ValueError(f"populations must have shape (V, 2), got {a.shape}")
        out = a * np.array([eff_h, eff_v])
        total = float(out.sum())
    else:
        raise ValueError(f"kind must be 'density' or 'populations', got {kind!r}")
    if not total > 0.0 or not math.isfinite(total):
        raise SignalExtinctionError("no detected signal after applying detection efficiencies")
    return out / total


def apply_detection_efficiency(
    obs: ArrayLike, params: RealisticParameters, step: int | None = None, kind: str = "density"
) -> NDArray:
    """
    Weight the coin arms by detector efficiencies, then renormalize.

    With ``kind="density"``, ``obs`` is a density matrix on the coin or the
    walker, filtered as ``D rho D`` with ``D = diag(sqrt(eff_H), sqrt(eff_V))``
    on every site. With ``kind="populations"`` it is a ``(V, 2)`` array of
    coin-resolved populations.
    """
    return _scale_coin(obs, *detection_efficiencies(params, step), kind)


def invert_detection_efficiency(
    obs: ArrayLike, params: RealisticParameters, step: int | None = None, kind: str = "density"
) -> NDArray:
    """Undo :func:`apply_detection_efficiency`, up to normalization."""
    eff_h, eff_v = detection_efficiencies(params, step)
    return _scale_coin(obs, 1.0 / eff_h, 1.0 / eff_v, kind)


def _kraus(
    graph: LineGraph,
    kappa: GraphConfiguration,
    coin: NDArray[np.complex128],
    params: RealisticParameters,
    eom_loss: EomLoss,
) -> NDArray[np.complex128]:
    amp = math.sqrt(params.path_loss_A * params.path_loss_B)
    if eom_loss == "path":
        shift = math.sqrt(params.eom_transmission) * shift_kappa(graph, kappa)
    elif eom_loss == "switched":
        shift = shift_kappa_decomposed(graph, kappa, reflection=math.sqrt(params.eom_transmission) * REFLECTION)
    else:
        raise ValueError(f"unknown eom_loss {eom_loss!r}")
    return amp * shift @ np.kron(np.eye(graph.num_vertices), coin)


@dataclass(frozen=True)
class RealisticResult:
    """
    Attributes
    ----------
    states : list of ndarray
        Subnormalized walker states ``rho(0) .. rho(n)``.
    coin_states : list of ndarray
        Reported coin states: detection-weighted and renormalized.
    populations : list of ndarray
        Reported coin-resolved populations, shape ``(V, 2)`` per step.
    """

    graph: LineGraph
    states: list[NDArray[np.complex128]]
    coin_states: list[NDArray[np.complex128]]
    populations: list[NDArray[np.float64]]

    def distributions(self) -> list[PositionDistribution]:
        return [PositionDistribution(self.graph.labels, p.sum(axis=1)) for p in self.populations]

    def stokes(self, convention: str = "pauli") -> list[StokesVector]:
        return [stokes(s, convention) for s in self.coin_states]

    def hs_distances(self) -> NDArray[np.float64]:
        mixed = maximally_mixed(2)
        return np.array([hs_distance_sq(s, mixed) for s in self.coin_states])


def realistic_evolution(
    initial: ArrayLike,
    configs: ConfigurationSet,
    coin: CoinOperator | float,
    params: RealisticParameters,
    n: int,
    eom_loss: EomLoss = "path",
) -> RealisticResult:
    """
    Lossy random-unitary evolution and the observables a detector would report.

    Parameters
    ----------
    coin : CoinOperator or float
        Nominal coin; the wave-plate offset in ``params`` is added to its angle.

    Raises
    ------
    SignalExtinctionError
        When the trace of the subnormalized state drops below 1e-15.
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    angle = coin.hwp_angle if isinstance(coin, CoinOperator) else float(coin)
    c = coin_operator(angle + params.hwp_angle_offset).matrix
    graph = configs.graph
    kraus = [(w, _kraus(graph, k, c, params, eom_loss)) for k, w in configs.items() if w > 0.0]

    rho = as_matrix(initial).copy()
    states = [rho]
    for _ in range(n):
        nxt = np.zeros_like(rho)
        for w, k in kraus:
            nxt += w * (k @ rho @ k.conj().T)
        rho = nxt
        if float(np.real(np.trace(rho))) < TRACE_FLOOR:
            raise SignalExtinctionError(f"signal extinct after {len(states)} steps")
        states.append(rho)

    coin_states, populations = [], []
    for step, r in enumerate(states):
        coin_states.append(apply_detection_efficiency(partial_trace_position(r), params, step))
        pops = np.real(np.diag(r)).reshape(graph.num_vertices, 2)
        populations.append(apply_detection_efficiency(pops, params, step, kind="populations"))
    return RealisticResult(graph, states, coin_states, populations)


def _stokes_rows(result: RealisticResult) -> NDArray[np.float64]:
    return np.array([s.as_array()[1:] for s in result.stokes()])


OBSERVABLES = {
    "s1": lambda r: _stokes_rows(r)[:, 0],
    "s2": lambda r: _stokes_rows(r)[:, 1],
    "s3": lambda r: _stokes_rows(r)[:, 2],
    "stokes": _stokes_rows,
    "hs_distance": lambda r: r.hs_distances(),
    "populations": lambda r: np.array([p.sum(axis=1) for p in r.populations]),
}


def monte_carlo_errorbars(
    ranges: ParameterRanges,
    draws: int,
    seed: int,
    observable: str,
    *,
    initial: ArrayLike,
    configs: ConfigurationSet,
    coin: CoinOperator | float,
    steps: int,
    eom_loss: EomLoss = "path",
) -> NDArray[np.float64]:
    """
    Error bars from a uniform Monte Carlo scan of the parameter ranges.

    Every field is drawn uniformly in its range (one ``(draws, 7)`` block of
    ``default_rng(seed).random``), the realistic model is run per draw, and
    the per-step mean absolute deviation of ``observable`` from its mean
    over draws is returned. ``observable`` is a key of :data:`OBSERVABLES`;
    vector observables give one column per component.
    """
    if draws < 2:
        raise ValueError(f"draws must be >= 2, got {draws}")
    try:
        extract = OBSERVABLES[observable]
    except KeyError:
        raise ValueError(f"unknown observable {observable!r}; choose from {sorted(OBSERVABLES)}") from None
    rng = np.random.default_rng(seed)
    u = rng.random((draws, len(RealisticParameters.field_names())))
    samples = np.array(
        [extract(realistic_evolution(initial, configs, coin, ranges.corner(row), steps, eom_loss)) for row in u]
    )
    # centring on the first draw keeps identical draws exactly zero
    samples = samples - samples[0]
    return np.mean(np.abs(samples - samples.mean(axis=0)), axis=0)


def fit_parameters(
    targets: Sequence[ArrayLike],
    ranges: ParameterRanges,
    *,
    initial: ArrayLike,
    configs: ConfigurationSet,
    coin: CoinOperator | float,
    grid_points: int = 3,
    eom_loss: EomLoss = "path",
) -> tuple[RealisticParameters, float]:
    """
    Grid search for the parameters that best reproduce measured coin states.

    ``targets`` are coin density matrices for steps ``0 .. n``. The score is
    the summed squared Hilbert-Schmidt distance between model and target;
    every varied field is sampled at ``grid_points`` evenly spaced values.
    """
    targets = [as_matrix(t) for t in targets]
    steps = len(targets) - 1
    names = RealisticParameters.field_names()
    varied = ranges.varied_fields()
    grid = np.linspace(0.0, 1.0, grid_points) if grid_points > 1 else np.array([0.5])
    best, best_score = None, math.inf
    for combo in itertools.product(grid, repeat=len(varied)):
        u = np.full(len(names), 0.5)
        for name, x in zip(varied, combo):
            u[names.index(name)] = x
        params = ranges.corner(u)
        try:
            res = realistic_evolution(initial, configs, coin, params, steps, eom_loss)
        except SignalExtinctionError:
            continue
        score = sum(hs_distance_sq(m, t) for m, t in zip(res.coin_states, targets))
        if score < best_score:
            best, best_score = params, score
    if best is None:
        raise SignalExtinctionError("every grid point extinguished the signal")
    return best, float(best_score)
