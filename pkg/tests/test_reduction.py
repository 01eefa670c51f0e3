"""Reduction pipeline: fold to plane, mirror about the axis, merge pairs.

The per-pair information function is the workhorse here; its concavity is
what makes every merge non-decreasing, and the pair-sum identity lets us
check it against the generic scoring path on random inputs.
"""

import math

import numpy as np
import pytest

from whichway.criteria import RMS_SPREAD, SHANNON, average_information
from whichway.measurement import (
    Measurement,
    posteriors,
    random_rank_one,
    validate,
)
from whichway.optimize import closed_form, equivalent_measurements
from whichway.quantum import ensemble_from_bloch, symmetric_pair, trine_ensemble
from whichway.reduction import (
    MirrorPair,
    SymmetricPovm,
    durr_doubling,
    pair_information,
    reduce_pair,
    reduce_to_pvm,
    symmetrize_about_axis,
    symmetrize_to_plane,
)

THETAS = np.linspace(0.05, math.pi / 2 - 0.05, 8)


def shannon_avg(ensemble, measurement):
    return average_information(SHANNON, posteriors(ensemble, measurement)).average


# ---------------------------------------------------------------------------
# pair_information


def test_pair_information_at_equator():
    # height 0: binary-entropy value at p = (1 + sin theta)/2
    for theta in THETAS:
        p = (1 + math.sin(theta)) / 2
        expected = p * math.log(p) + (1 - p) * math.log(1 - p)
        assert pair_information(0.0, theta) == pytest.approx(expected, abs=1e-14)


def test_pair_information_at_poles():
    for theta in THETAS:
        assert pair_information(1.0, theta) == pytest.approx(
            -(1 + math.cos(theta)) * math.log(2), abs=1e-14)
        assert pair_information(-1.0, theta) == pytest.approx(
            -(1 - math.cos(theta)) * math.log(2), abs=1e-14)


def test_pair_information_concave():
    grid = np.linspace(-1.0, 1.0, 1000)
    for theta in THETAS:
        values = np.array([pair_information(z, theta) for z in grid])
        second = values[2:] - 2 * values[1:-1] + values[:-2]
        assert second.max() <= 1e-9


def test_pair_information_domain():
    with pytest.raises(ValueError, match="height"):
        pair_information(1.2, 0.5)
    with pytest.raises(ValueError, match="theta"):
        pair_information(0.0, -0.1)


def test_pair_sum_identity():
    # average information of a symmetric measurement = 2 sum w_p g(z_p),
    # checked against the generic posterior-scoring path
    rng = np.random.default_rng(21)
    for _ in range(20):
        theta = float(rng.uniform(0.1, 1.5))
        e = symmetric_pair(theta)
        m = random_rank_one(rng, int(rng.integers(2, 7)))
        sym = symmetrize_about_axis(symmetrize_to_plane(m, e))
        direct = shannon_avg(e, sym.to_measurement())
        via_pairs = 2 * sum(p.weight * pair_information(p.height, theta)
                            for p in sym.pairs)
        assert direct == pytest.approx(via_pairs, abs=1e-12)


# ---------------------------------------------------------------------------
# symmetrization steps


def test_symmetrize_to_plane_output_in_plane_and_valid():
    rng = np.random.default_rng(3)
    e = symmetric_pair(0.8)
    for _ in range(15):
        m = random_rank_one(rng, int(rng.integers(2, 7)))
        folded = symmetrize_to_plane(m, e)
        assert validate(folded).passed
        for el in folded.rank_one:
            assert abs(el.direction[1]) < 1e-10


def test_symmetrize_to_plane_never_loses_information():
    rng = np.random.default_rng(17)
    for _ in range(15):
        theta = float(rng.uniform(0.1, 1.5))
        e = symmetric_pair(theta)
        m = random_rank_one(rng, int(rng.integers(2, 7)))
        assert shannon_avg(e, symmetrize_to_plane(m, e)) >= shannon_avg(e, m) - 1e-12


def test_symmetrize_to_plane_keeps_in_plane_measurement():
    e = symmetric_pair(0.6)
    pvm = closed_form("symmetric_pvm")
    folded = symmetrize_to_plane(pvm, e)
    assert equivalent_measurements(folded, pvm, atol=1e-12)


def test_plane_fold_rejects_non_coplanar_ensembles():
    e = ensemble_from_bloch([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    with pytest.raises(ValueError, match="coplanar"):
        symmetrize_to_plane(closed_form("symmetric_pvm"), e)


def test_symmetrize_about_axis_exact_for_symmetric_ensemble():
    # mirror column = beam swap, and scoring sorts, so each column's score
    # is preserved bit-for-bit; the average only reorders the float sum
    rng = np.random.default_rng(9)
    for _ in range(10):
        theta = float(rng.uniform(0.1, 1.5))
        e = symmetric_pair(theta)
        m = symmetrize_to_plane(random_rank_one(rng, 4), e)
        sym = symmetrize_about_axis(m)
        assert shannon_avg(e, sym.to_measurement()) == pytest.approx(
            shannon_avg(e, m), abs=1e-14)


def test_symmetrize_about_axis_rejects_out_of_plane():
    with pytest.raises(ValueError, match="in-plane"):
        d = np.array([0.0, 1.0, 0.0])
        symmetrize_about_axis(Measurement.from_rank_one([(0.5, d), (0.5, -d)]))


# ---------------------------------------------------------------------------
# doubling


def test_durr_doubling_shape_and_validity():
    m = closed_form("trine_bayes")
    doubled = durr_doubling(m)
    assert doubled.n_outcomes == 6
    assert validate(doubled).passed


def test_durr_doubling_preserves_rms_for_equal_populations():
    rng = np.random.default_rng(33)
    for n in (3, 4, 5):
        bloch = rng.normal(size=(n, 3))
        bloch /= np.linalg.norm(bloch, axis=1, keepdims=True)
        e = ensemble_from_bloch(bloch)
        m = random_rank_one(rng, 4)
        before = average_information(RMS_SPREAD, posteriors(e, m)).average
        after = average_information(RMS_SPREAD, posteriors(e, durr_doubling(m))).average
        assert after == pytest.approx(before, abs=1e-12)


# ---------------------------------------------------------------------------
# pair containers and merging


def test_mirror_pair_elements_unit_norm():
    pair = MirrorPair(weight=0.25, height=0.3)
    for el in pair.elements():
        assert np.linalg.norm(el.direction) == pytest.approx(1.0, abs=1e-12)
        assert el.direction[1] == 0.0


def test_symmetric_povm_merges_equal_heights():
    povm = SymmetricPovm(pairs=(MirrorPair(0.2, 0.5), MirrorPair(0.05, 0.5),
                                MirrorPair(0.25, -0.5)))
    assert povm.n_pairs == 2
    assert povm.pairs[0].weight == pytest.approx(0.25)


def test_symmetric_povm_rejects_incomplete():
    with pytest.raises(ValueError):
        SymmetricPovm(pairs=(MirrorPair(0.2, 0.0),))


def test_reduce_pair_increment_matches_concavity_gap():
    # merging pairs i, j changes the average by
    # 2 (w_i + w_j) [g(merged) - lambda g(z_i) - (1 - lambda) g(z_j)]
    theta = 0.85
    e = symmetric_pair(theta)
    povm = SymmetricPovm(pairs=(MirrorPair(0.15, 0.8), MirrorPair(0.2, -0.3),
                                MirrorPair(0.15, -0.4)))
    before = shannon_avg(e, povm.to_measurement())
    merged = reduce_pair(povm, 0, 1)
    after = shannon_avg(e, merged.to_measurement())
    wi, zi = 0.15, 0.8
    wj, zj = 0.2, -0.3
    lam = wi / (wi + wj)
    u = lam * zi + (1 - lam) * zj
    gap = pair_information(u, theta) - lam * pair_information(zi, theta) \
        - (1 - lam) * pair_information(zj, theta)
    assert after - before == pytest.approx(2 * (wi + wj) * gap, abs=1e-12)
    assert gap >= 0.0  # concavity


def test_reduce_pair_index_errors():
    povm = SymmetricPovm(pairs=(MirrorPair(0.25, 0.6), MirrorPair(0.25, -0.6)))
    with pytest.raises(IndexError):
        reduce_pair(povm, 0, 5)
    with pytest.raises(ValueError):
        reduce_pair(povm, 1, 1)


# ---------------------------------------------------------------------------
# full pipeline


def test_reduce_to_pvm_monotone_and_terminal():
    rng = np.random.default_rng(2)
    target = closed_form("symmetric_pvm")
    for _ in range(15):
        theta = float(rng.uniform(0.1, 1.47))
        trace = reduce_to_pvm(random_rank_one(rng, int(rng.integers(2, 7))), theta)
        values = trace.values
        assert np.all(np.diff(values) >= -1e-12)
        assert equivalent_measurements(trace.terminal, target, atol=1e-6)


def test_reduce_to_pvm_from_pvm_is_length_one():
    trace = reduce_to_pvm(closed_form("symmetric_pvm"), 0.7)
    assert len(trace.steps) == 1
    assert equivalent_measurements(trace.terminal, closed_form("symmetric_pvm"),
                                   atol=1e-12)


def test_reduce_to_pvm_trine_example():
    # the trine optimum folds to pairs (1/6, -1) and (1/3, 1/2), then one
    # merge lands exactly on the transverse projective measurement
    trace = reduce_to_pvm(closed_form("trine_shannon"), 0.7)
    assert equivalent_measurements(trace.terminal, closed_form("symmetric_pvm"),
                                   atol=1e-9)
    e = symmetric_pair(0.7)
    assert trace.values[-1] == pytest.approx(
        shannon_avg(e, closed_form("symmetric_pvm")), abs=1e-12)
    assert trace.values == sorted(trace.values)
