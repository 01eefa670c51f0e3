import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from whichway.quantum import (
    DetectorEnsemble,
    bloch_to_state,
    density_from_bloch,
    ensemble_from_bloch,
    overlap,
    state_to_bloch,
    symmetric_pair,
    trine_ensemble,
)

unit_bloch = st.builds(
    lambda v, u, phi: np.array([
        math.sqrt(1 - u * u) * math.cos(phi),
        math.sqrt(1 - u * u) * math.sin(phi),
        u,
    ]),
    st.just(0), st.floats(-1, 1), st.floats(0, 2 * math.pi),
)


@given(unit_bloch)
def test_bloch_state_round_trip(vector):
    assert np.allclose(state_to_bloch(bloch_to_state(vector)), vector, atol=1e-12)


@given(unit_bloch, unit_bloch)
def test_overlap_matches_bloch_angle(a, b):
    # |<a|b>|^2 = (1 + a.b)/2 for pure qubit states
    ov = abs(overlap(bloch_to_state(a), bloch_to_state(b))) ** 2
    assert ov == pytest.approx((1 + float(a @ b)) / 2, abs=1e-12)


@given(unit_bloch)
def test_density_from_bloch_is_projector(vector):
    rho = density_from_bloch(vector)
    assert np.allclose(rho @ rho, rho, atol=1e-12)
    assert np.trace(rho).real == pytest.approx(1.0)


def test_bloch_to_state_poles():
    np.testing.assert_allclose(bloch_to_state([0, 0, 1]), [1, 0])
    np.testing.assert_allclose(bloch_to_state([0, 0, -1]), [0, 1])
    # equator: x axis -> (|0>+|1>)/sqrt(2)
    np.testing.assert_allclose(bloch_to_state([1, 0, 0]),
                               [1 / math.sqrt(2), 1 / math.sqrt(2)], atol=1e-15)


def test_bloch_vector_must_be_unit():
    with pytest.raises(ValueError, match="direction|unit|norm"):
        bloch_to_state([0.0, 0.0, 0.5])


class TestDetectorEnsemble:
    def test_symmetric_pair_geometry(self):
        e = symmetric_pair(0.4)
        bloch = e.bloch_vectors()
        expected = [[math.sin(0.4), 0, math.cos(0.4)],
                    [-math.sin(0.4), 0, math.cos(0.4)]]
        np.testing.assert_allclose(bloch, expected, atol=1e-12)
        np.testing.assert_allclose(e.populations, [0.5, 0.5])

    def test_symmetric_pair_rejects_out_of_range_angle(self):
        with pytest.raises(ValueError, match="theta"):
            symmetric_pair(-0.1)
        with pytest.raises(ValueError, match="theta"):
            symmetric_pair(math.pi)

    def test_trine_sums_to_zero(self):
        bloch = trine_ensemble().bloch_vectors()
        np.testing.assert_allclose(bloch.sum(axis=0), np.zeros(3), atol=1e-12)
        # mutual 120 degrees
        for i in range(3):
            for j in range(i + 1, 3):
                assert float(bloch[i] @ bloch[j]) == pytest.approx(-0.5, abs=1e-12)

    def test_populations_validated(self):
        with pytest.raises(ValueError, match="populations"):
            ensemble_from_bloch([[0, 0, 1], [1, 0, 0]], [0.7, 0.7])
        with pytest.raises(ValueError, match="populations"):
            ensemble_from_bloch([[0, 0, 1], [1, 0, 0]], [1.2, -0.2])

    def test_states_must_be_normalized(self):
        with pytest.raises(ValueError):
            DetectorEnsemble(states=np.array([[1.0, 1.0], [1.0, 0.0]]),
                             populations=None)

    def test_needs_at_least_two_beams(self):
        with pytest.raises(ValueError):
            ensemble_from_bloch([[0, 0, 1]])

    def test_arrays_are_read_only(self):
        e = trine_ensemble()
        with pytest.raises(ValueError):
            e.populations[0] = 0.9

    def test_non_qubit_states_allowed_but_not_bloch(self):
        states = np.eye(3, dtype=complex)[:2]
        e = DetectorEnsemble(states=states, populations=None)
        assert e.dim == 3
        with pytest.raises(ValueError):
            e.bloch_vectors()


@settings(max_examples=30)
@given(st.floats(0.01, math.pi / 2 - 0.01))
def test_symmetric_pair_overlap_is_cos_theta(theta):
    e = symmetric_pair(theta)
    assert abs(overlap(e.states[0], e.states[1])) == pytest.approx(
        math.cos(theta), abs=1e-12)
