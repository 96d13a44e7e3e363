"""
Exit criteria for the simulator, one test per criterion.

Each test records a PASS/FAIL line, shown in the "acceptance criteria"
section of the pytest summary (and on stdout with ``-s``).
"""

import time
from fractions import Fraction

import numpy as np
import pytest

from oracles import dict_to_vector, dict_walk, exact_average_coin_states, exact_hs_to_mixed
from pqwalk.dynamics import (
    coin_operator,
    decomposed_shift_extended,
    evolve_pattern,
    localized_state,
    rum_evolution,
    shift_kappa,
    shift_kappa_decomposed,
    step_unitary,
)
from pqwalk.graph import LineGraph, enumerate_patterns, full_set, restricted_set
from pqwalk.observables import (
    position_distribution,
    reconstruct_density,
    revival_detector,
    simulate_tomography,
    stokes,
    turning_points,
)
from pqwalk.qmath import hs_distance_sq, maximally_mixed, outer, partial_trace_position
from pqwalk.realistic import ParameterRanges, RealisticParameters, monte_carlo_errorbars, realistic_evolution

G3 = LineGraph(3)
KP = restricted_set(G3, 0.5)
HAD = coin_operator(22.5)
PSI0 = localized_state(G3, 0, [1, 0])
RHO0 = outer(PSI0)
MIXED = maximally_mixed(2)

# squared HS distance of the averaged coin state from I/2, steps 0..6, from
# exact integer propagation of all 64 patterns (tests/oracles.py)
FROZEN_DISTANCES = [
    Fraction(1, 2),
    Fraction(0),
    Fraction(0),
    Fraction(1, 64),
    Fraction(25, 1024),
    Fraction(61, 16384),
    Fraction(881, 262144),
]


def ideal_coin_states(n=6):
    return [partial_trace_position(r) for r in rum_evolution(RHO0, KP, HAD, n)]


def test_c01_sample_space(criterion):
    t = time.perf_counter()
    pats = enumerate_patterns(KP, 6)
    dt = time.perf_counter() - t
    ok = len(pats) == 64 and len({p for p, _ in pats}) == 64 and all(p == 1 / 64 for _, p in pats) and dt < 1
    criterion(1, "64 equiprobable patterns for V=3, restricted set, n=6", ok, f"{len(pats)} patterns, {dt:.3f}s")


def test_c02_confinement(criterion):
    t = time.perf_counter()
    worst_leak, worst_outside = 0.0, 0.0
    for pattern, _ in enumerate_patterns(KP, 6):
        states = evolve_pattern(G3, PSI0, pattern, HAD)
        for psi, kappa in zip(states, pattern):
            dist = position_distribution(outer(psi), G3)
            assert dist.labels == (-1, 0, 1) and psi.shape == (6,)
            worst_outside = max(worst_outside, abs(1 - dist.probabilities.sum()))
            coined = np.kron(np.eye(3), HAD.matrix) @ psi
            ext = decomposed_shift_extended(G3, kappa) @ coined
            worst_leak = max(worst_leak, float(np.sum(np.abs(ext[:2]) ** 2 + np.abs(ext[-2:]) ** 2)))
    dt = time.perf_counter() - t
    ok = worst_leak < 1e-12 and worst_outside < 1e-12 and dt < 1
    criterion(2, "walker confined to {-1,0,1}; decomposed shift leaks nothing", ok, f"leak {worst_leak:.1e}, {dt:.3f}s")


def test_c03_step_one_mixing(criterion):
    t = time.perf_counter()
    sig = ideal_coin_states(1)
    d0, d1 = hs_distance_sq(sig[0], MIXED), hs_distance_sq(sig[1], MIXED)
    dt = time.perf_counter() - t
    ok = abs(d0 - 0.5) < 1e-12 and d1 < 1e-12 and dt < 1
    criterion(3, "coin completely mixed after one step", ok, f"d(0)={d0}, d(1)={d1:.1e}")


def test_c04_revival(criterion):
    t = time.perf_counter()
    d = [hs_distance_sq(s, MIXED) for s in ideal_coin_states()]
    dt = time.perf_counter() - t
    oracle = [exact_hs_to_mixed(s) for s in exact_average_coin_states(["10", "01"], 6)]
    revivals = revival_detector(d)
    ok = (
        oracle == FROZEN_DISTANCES
        and all(abs(a - float(b)) < 1e-14 for a, b in zip(d, FROZEN_DISTANCES))
        and revivals
        and max(d[2:]) > 1e-3
        and dt < 1
    )
    criterion(4, "non-Markovian revival of the coin distance", bool(ok), f"revivals at {revivals}, max {max(d[2:]):.6f}")


def test_c05_s2_nullity(criterion):
    s2 = [stokes(s).s2 for s in ideal_coin_states()]
    worst = max(abs(x) for x in s2)
    criterion(5, "S2(n) = 0 for n <= 6", worst < 1e-10, f"max |S2| = {worst:.1e}")


@pytest.mark.parametrize("label, configs", [("restricted", KP), ("full p=1/2", full_set(G3, 0.5)), ("full p=0.3", full_set(G3, 0.3))])
def test_c06_rum_equals_pattern_average(criterion, label, configs):
    t = time.perf_counter()
    rum = rum_evolution(RHO0, configs, HAD, 6)
    worst = 0.0
    for n in range(7):
        avg = np.zeros((6, 6), complex)
        for pattern, prob in enumerate_patterns(configs, n):
            psi = dict_to_vector(dict_walk([str(k) for k in pattern], 3, {(1, "H"): 1.0}, 22.5), 3)
            avg += prob * outer(psi)
        worst = max(worst, float(np.max(np.abs(avg - rum[n]))))
    dt = time.perf_counter() - t
    criterion(6, f"iterated map equals pattern average ({label})", worst < 1e-10 and dt < 10, f"max-norm {worst:.1e}, {dt:.2f}s")


def test_c07_asymptotics(criterion):
    t = time.perf_counter()
    final = rum_evolution(RHO0, KP, HAD, 1000)[-1]
    d = hs_distance_sq(partial_trace_position(final), MIXED)
    walker = float(np.max(np.abs(final - np.eye(6) / 6)))
    dt = time.perf_counter() - t
    criterion(7, "coin reaches I/2 by n=1000", d < 1e-6 and dt < 10, f"d={d:.1e}, |rho-I/6|max={walker:.1e}, {dt:.2f}s")


def test_c08_decomposition(criterion):
    worst = 0.0
    for nv in (3, 4, 5):
        g = LineGraph(nv)
        for k in full_set(g, 0.5).configurations:
            worst = max(worst, float(np.max(np.abs(shift_kappa(g, k) - shift_kappa_decomposed(g, k)))))
    criterion(8, "closed-form shift equals partial-shift composition (V=3,4,5)", worst < 1e-12, f"max diff {worst:.1e}")


def test_c09_unitarity(criterion):
    t = time.perf_counter()
    rng = np.random.default_rng(909)
    angles = rng.uniform(-90, 90, 50)
    worst = 0.0
    for nv in (3, 4, 5):
        g = LineGraph(nv)
        for k in full_set(g, 0.5).configurations:
            for a in angles:
                u = step_unitary(g, k, coin_operator(float(a)))
                worst = max(worst, float(np.max(np.abs(u.conj().T @ u - np.eye(g.dim)))))
    dt = time.perf_counter() - t
    criterion(9, "step unitaries unitary for all configurations and 50 angles", worst < 1e-10 and dt < 5, f"{worst:.1e}, {dt:.2f}s")


def test_c10_realistic_limits(criterion):
    t = time.perf_counter()
    ideal = realistic_evolution(RHO0, KP, HAD, RealisticParameters.ideal(), 6)
    d = ideal.hs_distances()
    s2 = max(abs(s.s2) for s in ideal.stokes())
    limit_ok = abs(d[0] - 0.5) < 1e-12 and d[1] < 1e-12 and bool(revival_detector(d)) and max(d[2:]) > 1e-3 and s2 < 1e-10

    ref = turning_points(d, 1e-3)
    ranges = ParameterRanges.paper()
    rng = np.random.default_rng(1010)
    samples = [ranges.corner(u) for u in rng.random((200, 7))]
    samples += [ranges.corner(c) for c in (0.0, 1.0)]
    shape_ok = all(
        turning_points(realistic_evolution(RHO0, KP, HAD, p, 6, eom_loss).hs_distances(), 1e-3) == ref
        for p in samples
        for eom_loss in ("path", "switched")
    )
    dt = time.perf_counter() - t
    criterion(10, "ideal-parameter limit and preserved extrema under paper ranges", limit_ok and shape_ok and dt < 30, f"turning points {ref}, {dt:.2f}s")


def test_c11_errorbar_symmetry(criterion):
    t = time.perf_counter()
    err = monte_carlo_errorbars(ParameterRanges.paper(), 1000, 1111, "stokes", initial=RHO0, configs=KP, coin=HAD, steps=6)
    dt = time.perf_counter() - t
    step1 = float(np.max(err[1]))
    criterion(11, "Monte Carlo Stokes error bars vanish at step 1", step1 < 1e-10 and dt < 60, f"step-1 {step1:.1e}, later max {err[2:].max():.1e}, {dt:.2f}s")


def test_c12_tomography(criterion):
    t = time.perf_counter()
    worst = 0.0
    for sigma in ideal_coin_states():
        dists = [hs_distance_sq(reconstruct_density(simulate_tomography(sigma, 10**6, seed))[0], sigma) for seed in range(10)]
        worst = max(worst, float(np.mean(dists)))
    dt = time.perf_counter() - t
    criterion(12, "linear-inversion tomography at 1e6 shots", worst < 1e-3 and dt < 30, f"worst seed-mean {worst:.1e}, {dt:.2f}s")
