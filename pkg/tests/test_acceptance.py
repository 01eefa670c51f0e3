"""Acceptance gate: one test per release criterion, one printed line each.

Run with -s (or look above the summary) to see the PASS/FAIL lines; every
test also asserts, so the gate fails loudly under plain pytest.
"""

import math

import numpy as np
import pytest

from whichway.criteria import (BAYES, RMS_SPREAD, SHANNON, Criterion,
                               average_information, convexity_probe,
                               criterion_bounds, score_outcome)
from whichway.dilation import (dilation_probabilities, neumark_dilate,
                               verify_dilation)
from whichway.interference import complementarity_check
from whichway.measurement import (posteriors, random_rank_one,
                                  table_from_probabilities)
from whichway.optimize import (SearchConfig, closed_form,
                               equivalent_measurements, optimize_povm,
                               optimize_pvm)
from whichway.quantum import ensemble_from_bloch, symmetric_pair, trine_ensemble
from whichway.reduction import durr_doubling, pair_information, reduce_to_pvm

FULL = SearchConfig()  # headline optima get the full search budget
BULK = SearchConfig(n_range=(2, 4), restarts=6, grid_resolution=32)
PAIR = SearchConfig(n_range=(2, 3), restarts=4, grid_resolution=24)


def announce(capsys, index, name, passed, detail):
    with capsys.disabled():
        verdict = "PASS" if passed else "FAIL"
        print(f"ACCEPTANCE {index:02d} {name}: {verdict} ({detail})")


def random_unit_rows(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def test_01_symmetric_pair_shannon_needs_no_povm(capsys):
    target = closed_form("symmetric_pvm")
    max_gap, all_projective = -math.inf, True
    for theta in (0.2, 0.5236, 0.7854, 1.2, 1.5):
        ensemble = symmetric_pair(theta)
        povm = optimize_povm(ensemble, SHANNON, FULL)
        pvm = optimize_pvm(ensemble, SHANNON, FULL)
        max_gap = max(max_gap, povm.score.average - pvm.score.average)
        all_projective &= equivalent_measurements(povm.best, target, atol=1e-6)
    ok = max_gap < 1e-6 and all_projective
    announce(capsys, 1, "symmetric-pair-shannon-pvm-optimality", ok,
             f"max povm-pvm gap {max_gap:.3e}, transverse pvm {all_projective}")
    assert ok


def test_02_trine_shannon_optimum(capsys):
    result = optimize_povm(trine_ensemble(), SHANNON, FULL)
    value_err = abs(result.score.average + math.log(2.0))
    matches = equivalent_measurements(result.best, closed_form("trine_shannon"),
                                      atol=1e-6)
    # each outcome rules out exactly one beam
    table = posteriors(trine_ensemble(), result.best)
    worst_column_min = float(np.max(np.min(table.posteriors, axis=0)))
    ok = value_err < 1e-6 and matches and worst_column_min < 1e-8
    announce(capsys, 2, "trine-shannon-optimum", ok,
             f"|value+ln2| {value_err:.3e}, anti-aligned match {matches}, "
             f"largest column minimum {worst_column_min:.3e}")
    assert ok


def test_03_trine_bayes_optimum(capsys):
    result = optimize_povm(trine_ensemble(), BAYES, FULL)
    cost = -result.score.average
    cost_err = abs(cost - 1.0 / 3.0)
    matches = equivalent_measurements(result.best, closed_form("trine_bayes"),
                                      atol=1e-6)
    criteria_disagree = not equivalent_measurements(closed_form("trine_shannon"),
                                                    closed_form("trine_bayes"))
    ok = cost_err < 1e-6 and matches and criteria_disagree
    announce(capsys, 3, "trine-bayes-optimum", ok,
             f"|cost-1/3| {cost_err:.3e}, aligned match {matches}, "
             f"optima differ {criteria_disagree}")
    assert ok


def test_04_equal_population_rms_pvm_sufficiency(capsys):
    rng = np.random.default_rng(404)
    max_gap, max_doubling_drift = -math.inf, 0.0
    for case in range(100):
        n = (3, 4, 5)[case % 3]
        ensemble = ensemble_from_bloch(random_unit_rows(rng, n), None)
        povm = optimize_povm(ensemble, RMS_SPREAD, BULK)
        pvm = optimize_pvm(ensemble, RMS_SPREAD, BULK)
        max_gap = max(max_gap, povm.score.average - pvm.score.average)
        doubled = average_information(
            RMS_SPREAD, posteriors(ensemble, durr_doubling(pvm.best))).average
        max_doubling_drift = max(max_doubling_drift,
                                 abs(doubled - pvm.score.average))
    ok = max_gap < 1e-6 and max_doubling_drift < 1e-12
    announce(capsys, 4, "equal-population-rms-pvm-sufficiency", ok,
             f"max povm-pvm gap {max_gap:.3e}, doubling drift "
             f"{max_doubling_drift:.3e} over 100 ensembles")
    assert ok


def test_05_two_beam_rms_bayes_identity(capsys):
    rng = np.random.default_rng(505)
    worst = 0.0
    for _ in range(10_000):
        column = rng.dirichlet(rng.uniform(0.3, 3.0, size=2))
        rms = score_outcome(RMS_SPREAD, column)
        bayes = score_outcome(BAYES, column)
        worst = max(worst, abs(rms - (1.0 + 2.0 * bayes)))
    ok = worst < 1e-12
    announce(capsys, 5, "two-beam-rms-bayes-identity", ok,
             f"max identity defect {worst:.3e} over 10^4 columns")
    assert ok


def test_06_complementarity_sweep(capsys):
    worst_d, worst_v, worst_sum = 0.0, 0.0, 0.0
    for theta in np.linspace(0.0, math.pi / 2.0, 33):
        report = complementarity_check(symmetric_pair(float(theta)), PAIR)
        worst_d = max(worst_d, abs(report.distinguishability - math.sin(theta)))
        worst_v = max(worst_v, abs(report.visibility - math.cos(theta)))
        worst_sum = max(worst_sum, report.defect_from_unity)
    ok = worst_d < 1e-6 and worst_v < 1e-6 and worst_sum < 1e-6
    announce(capsys, 6, "complementarity-sweep", ok,
             f"max |D-sin| {worst_d:.3e}, max |V-cos| {worst_v:.3e}, "
             f"max quadrature defect {worst_sum:.3e}")
    assert ok


def test_07_concavity_and_reduction(capsys):
    grid = np.linspace(-1.0, 1.0, 1000)
    max_second = -math.inf
    for theta in np.linspace(0.0, math.pi / 2.0, 8):
        values = np.array([pair_information(z, float(theta)) for z in grid])
        second = values[2:] - 2.0 * values[1:-1] + values[:-2]
        max_second = max(max_second, float(second.max()))
    rng = np.random.default_rng(707)
    target = closed_form("symmetric_pvm")
    min_increment, all_terminal = math.inf, True
    for _ in range(50):
        theta = float(rng.uniform(0.05, math.pi / 2.0 - 0.05))
        trace = reduce_to_pvm(random_rank_one(rng, int(rng.integers(3, 7))), theta)
        if len(trace.values) > 1:
            min_increment = min(min_increment, float(np.min(np.diff(trace.values))))
        all_terminal &= equivalent_measurements(trace.terminal, target, atol=1e-8)
    ok = max_second <= 1e-9 and min_increment >= -1e-12 and all_terminal
    announce(capsys, 7, "concavity-and-reduction", ok,
             f"max second difference {max_second:.3e}, min trace increment "
             f"{min_increment:.3e}, all terminate projective {all_terminal}")
    assert ok


def test_08_projective_lift_statistics(capsys):
    rng = np.random.default_rng(808)
    worst_stats, worst_info = 0.0, 0.0
    for _ in range(100):
        measurement = random_rank_one(rng, int(rng.integers(2, 7)))
        n = int(rng.integers(2, 5))
        pops = rng.uniform(0.2, 1.0, size=n)
        ensemble = ensemble_from_bloch(random_unit_rows(rng, n),
                                       pops / pops.sum())
        dilation = neumark_dilate(measurement)
        worst_stats = max(worst_stats,
                          verify_dilation(dilation, measurement, ensemble))
        model = dilation_probabilities(dilation, ensemble)
        lifted = table_from_probabilities(model[:, dilation.outcome_mask],
                                          ensemble.populations)
        direct = posteriors(ensemble, measurement)
        for criterion in (SHANNON, BAYES, RMS_SPREAD):
            a = average_information(criterion, lifted).average
            b = average_information(criterion, direct).average
            worst_info = max(worst_info, abs(a - b))
    ok = worst_stats < 1e-10 and worst_info < 1e-12
    announce(capsys, 8, "projective-lift-statistics", ok,
             f"max statistics defect {worst_stats:.3e}, max information gap "
             f"{worst_info:.3e} over 100 lifts")
    assert ok


def test_09_criterion_axioms(capsys):
    rng = np.random.default_rng(909)
    exact_permutation = True
    min_bound_slack, min_convexity_slack = math.inf, math.inf
    for criterion in (SHANNON, BAYES, RMS_SPREAD):
        for _ in range(10_000):
            n = int(rng.integers(2, 7))
            column = rng.dirichlet(rng.uniform(0.3, 3.0, size=n))
            value = score_outcome(criterion, column)
            shuffled = score_outcome(criterion, rng.permutation(column))
            exact_permutation &= (value == shuffled)
            lo, hi = criterion_bounds(criterion, n)
            min_bound_slack = min(min_bound_slack, value - lo, hi - value)
            other = rng.dirichlet(np.ones(n))
            min_convexity_slack = min(
                min_convexity_slack,
                convexity_probe(criterion, column, other, float(rng.random())))
    ok = exact_permutation and min_bound_slack >= -1e-12 \
        and min_convexity_slack >= -1e-12
    announce(capsys, 9, "criterion-axioms", ok,
             f"permutation exact {exact_permutation}, bound slack "
             f"{min_bound_slack:.3e}, convexity slack {min_convexity_slack:.3e}")
    assert ok


def test_10_unequal_population_pvm_sufficiency(capsys):
    rng = np.random.default_rng(1010)
    findings = []
    max_gap = -math.inf
    for case in range(200):
        zeta = float(rng.uniform(0.05, 0.95))
        ensemble = ensemble_from_bloch(random_unit_rows(rng, 2),
                                       [zeta, 1.0 - zeta])
        for criterion in (SHANNON, BAYES):
            gap = (optimize_povm(ensemble, criterion, PAIR).score.average
                   - optimize_pvm(ensemble, criterion, PAIR).score.average)
            max_gap = max(max_gap, gap)
            if gap >= 1e-6:
                findings.append((case, criterion.kind, gap))
    ok = not findings
    announce(capsys, 10, "unequal-population-pvm-sufficiency", ok,
             f"max povm-pvm gap {max_gap:.3e} over 200 ensembles x 2 criteria"
             + (f"; findings: {findings}" if findings else ""))
    assert ok, f"povm beat pvm in {len(findings)} cases: {findings}"
