"""
Experiment runner behind the command line.

A run writes, into the output directory:

``distributions.csv``
    Ideal position distribution of every pattern at every step.
``average_distribution.csv``
    Pattern-averaged distribution per step and model.
``stokes.csv``
    Coin Stokes parameters per step, with Monte Carlo error bars in
    ``errorbars`` mode.
``distance.csv``
    Squared Hilbert-Schmidt distance of the coin state from ``I/2``.
``coin_states.csv``
    Coin density matrices as interleaved real/imaginary columns.
``run.json``
    Config echo, package version, seed and pattern bookkeeping.
"""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from . import __version__
from .config import RunConfig
from .dynamics import coin_operator, evolve_pattern_density, localized_state, rum_evolution
from .graph import (
    ConfigurationSet,
    Pattern,
    enumerate_patterns,
    full_set,
    pattern_to_string,
    restricted_set,
    sample_patterns,
)
from .observables import COIN_STATES, position_distribution, stokes, stokes_to_density
from .qmath import hs_distance_sq, maximally_mixed, outer, partial_trace_position
from .realistic import monte_carlo_errorbars, realistic_evolution

log = logging.getLogger(__name__)

__all__ = ["configuration_set", "initial_state", "patterns_for", "run", "list_patterns", "fmt"]


def fmt(x: float) -> str:
    """12 significant digits, no negative zero."""
    x = float(x) + 0.0
    return f"{x:.12g}"


def configuration_set(cfg: RunConfig) -> ConfigurationSet:
    make = restricted_set if cfg.restricted else full_set
    return make(cfg.graph, cfg.link_probability)


def initial_state(cfg: RunConfig) -> np.ndarray:
    """Walker density matrix ``|position><position| (x) coin``."""
    graph = cfg.graph
    coin = cfg.initial.coin
    if isinstance(coin, str):
        return outer(localized_state(graph, cfg.initial.position, COIN_STATES[coin]))
    sigma = stokes_to_density([1.0, *coin])
    i = graph.index_of(cfg.initial.position)
    site = np.zeros((graph.num_vertices, graph.num_vertices))
    site[i, i] = 1.0
    return np.kron(site, sigma)


def patterns_for(cfg: RunConfig, configs: ConfigurationSet) -> tuple[list[tuple[Pattern, float]], bool]:
    """Enumerated patterns, or equally weighted samples when ``pattern_samples`` is set."""
    if cfg.pattern_samples:
        drawn = sample_patterns(configs, cfg.steps, cfg.pattern_samples, cfg.seed)
        return [(p, 1.0 / len(drawn)) for p in drawn], True
    return enumerate_patterns(configs, cfg.steps, cfg.pattern_cap), False


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) if isinstance(v, float) else v for v in row])


def _matrix_columns(prefix: str = "rho") -> list[str]:
    return [f"{prefix}_{i}{j}_{part}" for i in range(2) for j in range(2) for part in ("re", "im")]


def _matrix_values(m: np.ndarray) -> list[float]:
    return [float(getattr(m[i, j], part)) for i in range(2) for j in range(2) for part in ("real", "imag")]


def run(cfg: RunConfig) -> dict:
    """Execute a run and write all result files; returns the metadata written to ``run.json``."""
    graph = cfg.graph
    configs = configuration_set(cfg)
    patterns, sampled = patterns_for(cfg, configs)
    coin = coin_operator(cfg.hwp_angle)
    rho0 = initial_state(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    labels = graph.labels
    pcols = [f"p_{lab}" for lab in labels]
    mixed = maximally_mixed(2)

    def pattern_rows():
        for idx, (pattern, prob) in enumerate(patterns):
            for step, rho in enumerate(evolve_pattern_density(graph, rho0, pattern, coin)):
                dist = position_distribution(rho, graph).probabilities
                yield [idx, pattern_to_string(pattern), float(prob), step, *map(float, dist)]

    _write_csv(out / "distributions.csv", ["pattern_index", "pattern", "probability", "step", *pcols], pattern_rows())

    models: dict[str, dict] = {}
    ideal = rum_evolution(rho0, configs, coin, cfg.steps)
    models["ideal"] = {
        "coin": [partial_trace_position(r) for r in ideal],
        "dist": [position_distribution(r, graph).probabilities for r in ideal],
    }
    if cfg.mode in ("realistic", "errorbars"):
        params = cfg.realistic_parameters()
        res = realistic_evolution(rho0, configs, coin, params, cfg.steps, cfg.eom_loss)
        models["realistic"] = {"coin": res.coin_states, "dist": [d.probabilities for d in res.distributions()]}

    steps = range(cfg.steps + 1)
    _write_csv(
        out / "average_distribution.csv",
        ["step", "model", *pcols],
        ([n, name, *map(float, m["dist"][n])] for name, m in models.items() for n in steps),
    )
    _write_csv(
        out / "coin_states.csv",
        ["step", "model", *_matrix_columns()],
        ([n, name, *_matrix_values(m["coin"][n])] for name, m in models.items() for n in steps),
    )

    stokes_by_model = {name: [stokes(s).as_array() for s in m["coin"]] for name, m in models.items()}
    dist_by_model = {name: [hs_distance_sq(s, mixed) for s in m["coin"]] for name, m in models.items()}
    stokes_err = dist_err = None
    if cfg.mode == "errorbars":
        kw = dict(initial=rho0, configs=configs, coin=coin, steps=cfg.steps, eom_loss=cfg.eom_loss)
        ranges = cfg.parameter_ranges()
        stokes_err = monte_carlo_errorbars(ranges, cfg.errorbar_draws, cfg.seed, "stokes", **kw)
        dist_err = monte_carlo_errorbars(ranges, cfg.errorbar_draws, cfg.seed, "hs_distance", **kw)

    s_header = ["step"] + [f"s{i}_{name}" for name in models for i in range(4)]
    d_header = ["step"] + list(models)
    if stokes_err is not None:
        s_header += [f"s{i}_err" for i in (1, 2, 3)]
        d_header += ["realistic_err"]
    s_rows, d_rows = [], []
    for n in steps:
        srow = [n] + [float(x) for name in models for x in stokes_by_model[name][n]]
        drow = [n] + [float(dist_by_model[name][n]) for name in models]
        if stokes_err is not None:
            srow += [float(x) for x in stokes_err[n]]
            drow += [float(dist_err[n])]
        s_rows.append(srow)
        d_rows.append(drow)
    _write_csv(out / "stokes.csv", s_header, s_rows)
    _write_csv(out / "distance.csv", d_header, d_rows)

    meta = {
        "package": "pqwalk",
        "version": __version__,
        "seed": cfg.seed,
        "config": cfg.echo(),
        "patterns": {"count": len(patterns), "sampled": sampled},
        "files": sorted(
            ["distributions.csv", "average_distribution.csv", "stokes.csv", "distance.csv", "coin_states.csv"]
        ),
    }
    (out / "run.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    log.info("wrote %d pattern rows to %s", len(patterns) * (cfg.steps + 1), out)
    return meta


def list_patterns(cfg: RunConfig, stream: TextIO) -> int:
    """Print ``index<TAB>pattern<TAB>probability`` per pattern; returns the number of lines."""
    configs = configuration_set(cfg)
    patterns = enumerate_patterns(configs, cfg.steps, cfg.pattern_cap)
    for idx, (pattern, prob) in enumerate(patterns):
        stream.write(f"{idx}\t{pattern_to_string(pattern)}\t{fmt(prob)}\n")
    return len(patterns)
