import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import exact_average_coin_states
from pqwalk.dynamics import coin_operator, localized_state, rum_evolution
from pqwalk.graph import LineGraph, restricted_set
from pqwalk.observables import (
    BlochProjectionWarning,
    PositionDistribution,
    StokesVector,
    TomographyCounts,
    position_distribution,
    reconstruct_density,
    residual_population,
    revival_detector,
    similarity,
    simulate_tomography,
    stokes,
    stokes_to_density,
    turning_points,
)
from pqwalk.qmath import allclose, hs_distance_sq, is_density_matrix, outer, partial_trace_position

G3 = LineGraph(3)
H = np.array([1, 0])
V = np.array([0, 1])
D = np.array([1, 1]) / math.sqrt(2)
R = np.array([1, 1j]) / math.sqrt(2)


def test_position_distribution_examples():
    assert position_distribution(outer(localized_state(G3, 0)), G3).as_dict() == {-1: 0, 0: 1, 1: 0}
    d = position_distribution(np.eye(6) / 6, G3)
    assert allclose(d.probabilities, [1 / 3] * 3, atol=1e-15)
    psi = (localized_state(G3, -1, V) + 1j * localized_state(G3, 0, V)) / math.sqrt(2)
    assert allclose(position_distribution(outer(psi), G3).probabilities, [0.5, 0.5, 0])
    with pytest.raises(ValueError):
        position_distribution(np.eye(4) / 4, G3)


def test_residual_population():
    rho = np.eye(6) / 6
    assert residual_population(rho, G3, (-1, 0, 1)) == 0.0
    assert residual_population(rho, G3, (0,)) == pytest.approx(2 / 3)


@pytest.mark.parametrize(
    "state, pauli, optics",
    [
        (outer(H), (1, 0, 0, 1), (1, 1, 0, 0)),
        (np.eye(2) / 2, (1, 0, 0, 0), (1, 0, 0, 0)),
        (outer(R), (1, 0, 1, 0), (1, 0, 0, 1)),
        (outer(D), (1, 1, 0, 0), (1, 0, 1, 0)),
        (outer(V), (1, 0, 0, -1), (1, -1, 0, 0)),
    ],
)
def test_stokes_examples(state, pauli, optics):
    assert allclose(stokes(state).as_array(), pauli, atol=1e-12)
    assert allclose(stokes(state, "optics").as_array(), optics, atol=1e-12)
    assert allclose(stokes_to_density(pauli), state, atol=1e-12)
    assert allclose(stokes_to_density(optics, "optics"), state, atol=1e-12)


def test_stokes_against_projector_probabilities():
    rng = np.random.default_rng(5)
    for _ in range(20):
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        rho = g @ g.conj().T
        rho /= np.trace(rho)

        def p(v):
            v = np.asarray(v) / np.linalg.norm(v)
            return float(np.real(v.conj() @ rho @ v))

        s = stokes(rho)
        assert s.s1 == pytest.approx(p([1, 1]) - p([1, -1]), abs=1e-12)
        assert s.s2 == pytest.approx(p([1, 1j]) - p([1, -1j]), abs=1e-12)
        assert s.s3 == pytest.approx(p([1, 0]) - p([0, 1]), abs=1e-12)


def point_in_ball():
    return st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)).filter(
        lambda v: v[0] ** 2 + v[1] ** 2 + v[2] ** 2 <= 1
    )


@settings(max_examples=100)
@given(v=point_in_ball())
def test_stokes_round_trip(v):
    s = StokesVector(1.0, *v)
    rho = stokes_to_density(s)
    assert is_density_matrix(rho)
    assert allclose(stokes(rho).as_array(), s.as_array(), atol=1e-12)


def test_round_trip_hundred_random_vectors():
    rng = np.random.default_rng(100)
    vecs = rng.normal(size=(100, 3))
    vecs *= (rng.random(100) ** (1 / 3) / np.linalg.norm(vecs, axis=1))[:, None]
    for v in vecs:
        s = StokesVector(1.0, *v)
        assert np.max(np.abs(stokes(stokes_to_density(s)).as_array() - s.as_array())) < 1e-12


def test_projection_outside_ball():
    with pytest.warns(BlochProjectionWarning):
        rho = stokes_to_density((1, 1.2, 0, 0.9))
    s = stokes(rho)
    assert s.bloch_norm == pytest.approx(1.0)
    assert s.s1 / s.s3 == pytest.approx(1.2 / 0.9)
    assert np.linalg.eigvalsh(rho).min() > -1e-12


def test_tomography_pure_h():
    for seed in range(5):
        c = simulate_tomography(outer(H), 1000, seed)
        assert c.V == 0 and c.H == 1000
        assert c.D + c.A == c.R + c.L == 1000


def test_tomography_deterministic():
    sigma = stokes_to_density((1, 0.3, -0.2, 0.5))
    assert simulate_tomography(sigma, 500, 9) == simulate_tomography(sigma, 500, 9)
    with pytest.raises(ValueError):
        simulate_tomography(sigma, 0, 1)


def test_tomography_mixed_binomial_bound():
    shots = 10**6
    c = simulate_tomography(np.eye(2) / 2, shots, seed=77)
    bound = 3 * math.sqrt(shots * 0.25)
    for a in (c.H, c.D, c.R):
        assert abs(a - shots / 2) < bound


def test_reconstruction_converges():
    sigma = stokes_to_density((1, 0.4, -0.3, 0.6))
    dists = [hs_distance_sq(reconstruct_density(simulate_tomography(sigma, 10**6, s))[0], sigma) for s in range(10)]
    assert np.mean(dists) < 1e-3


def test_reconstruction_projects_noisy_pure_state():
    rho, moved = reconstruct_density(TomographyCounts(H=100, V=0, D=60, A=40, R=50, L=50))
    assert moved
    assert np.linalg.eigvalsh(rho).min() >= -1e-12
    with pytest.raises(ValueError):
        reconstruct_density(TomographyCounts(0, 0, 1, 1, 1, 1))


def dist(labels, probs):
    return PositionDistribution(tuple(labels), np.asarray(probs, float))


def test_similarity():
    p = dist((-1, 0, 1), [0.2, 0.5, 0.3])
    assert similarity(p, p) == pytest.approx(1.0)
    assert similarity(dist((0, 1), [1, 0]), dist((0, 1), [0, 1])) == 0.0
    assert similarity(dist((0, 1), [1, 0]), dist((0, 1), [0.5, 0.5])) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        similarity(dist((0, 1), [1, 0]), dist((-1, 0), [1, 0]))


@settings(max_examples=50)
@given(a=st.lists(st.floats(0, 1), min_size=3, max_size=3), b=st.lists(st.floats(0, 1), min_size=3, max_size=3))
def test_similarity_symmetric_bounded(a, b):
    if sum(a) == 0 or sum(b) == 0:
        return
    p = dist((0, 1, 2), np.array(a) / sum(a))
    q = dist((0, 1, 2), np.array(b) / sum(b))
    s = similarity(p, q)
    assert s == pytest.approx(similarity(q, p), abs=1e-14)
    assert 0.0 <= s <= 1.0
    if s > 1 - 1e-12:
        assert allclose(p.probabilities, q.probabilities, atol=1e-5)


def test_revival_detector():
    assert revival_detector([0.5, 0.4, 0.1, 0.0]) == []
    assert revival_detector([0.5, 0, 0.05, 0.1]) == [2, 3]
    with pytest.raises(ValueError):
        revival_detector([0.1])


def test_revival_in_ideal_walk():
    rho0 = outer(localized_state(G3, 0))
    states = rum_evolution(rho0, restricted_set(G3, 0.5), coin_operator(22.5), 6)
    d = [hs_distance_sq(partial_trace_position(r), np.eye(2) / 2) for r in states]
    assert revival_detector(d) == [3, 4]


def test_exact_oracle_zero_circular_component():
    # exact averaging: the imaginary part of the coherence never appears
    for sigma in exact_average_coin_states(["10", "01"], 6):
        assert sigma[0][1][1] == 0


def test_turning_points():
    assert turning_points([0, 1, 0]) == [(1, "max")]
    assert turning_points([1, 0, 0, 1, 2, 1]) == [(1, "min"), (4, "max")]
    assert turning_points([0, 1, 1.0005, 0], tol=1e-3) == [(1, "max")]
    assert turning_points([3, 2, 1]) == []
