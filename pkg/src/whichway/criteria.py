"""Per-outcome information scores and their population-weighted averages.

Each criterion maps a posterior column to a per-outcome score that is
permutation-symmetric in the beams, maximal at certainty, minimal at the
uniform column, and convex. Entries are sorted before summation so the
permutation symmetry holds bit-exactly, not just to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measurement import PosteriorTable
from .validation import check_in_range, check_probability_vector

__all__ = [
    "BAYES",
    "CRITERION_KINDS",
    "Criterion",
    "RMS_SPREAD",
    "SHANNON",
    "Score",
    "average_information",
    "bayes_rms_identity_check",
    "convexity_probe",
    "criterion_bounds",
    "score_outcome",
]

CRITERION_KINDS = ("shannon", "bayes", "rms_spread")

COLUMN_ATOL = 1e-10


@dataclass(frozen=True)
class Criterion:
    """One of the three information criteria; log_base applies to shannon."""

    kind: str
    log_base: float = math.e

    def __post_init__(self) -> None:
        if self.kind not in CRITERION_KINDS:
            raise ValueError(f"kind must be one of {CRITERION_KINDS}, got {self.kind!r}.")
        base = float(self.log_base)
        if not base > 1.0:
            raise ValueError(f"log_base must exceed 1, got {base!r}.")
        object.__setattr__(self, "log_base", base)


SHANNON = Criterion("shannon")
BAYES = Criterion("bayes")
RMS_SPREAD = Criterion("rms_spread")


@dataclass(frozen=True)
class Score:
    """Per-outcome scores F_μ and the prior-weighted average."""

    per_outcome: np.ndarray
    average: float

    def __post_init__(self) -> None:
        arr = np.array(self.per_outcome, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "per_outcome", arr)
        object.__setattr__(self, "average", float(self.average))


def score_outcome(criterion: Criterion, column, atol: float = COLUMN_ATOL) -> float:
    """Score one posterior column.

    shannon: Σ Q ln Q (0 ln 0 = 0), rescaled by the log base;
    bayes:   max Q − 1 (negative error probability of the best guess);
    rms_spread: sqrt(n/(n−1) Σ (Q − 1/n)²).
    """
    col = check_probability_vector(column, "posterior column", atol=atol)
    n = col.shape[0]
    if n < 2:
        raise ValueError("posterior column needs at least 2 beams.")
    values = sorted(float(x) for x in col)
    if criterion.kind == "shannon":
        total = 0.0
        for x in values:
            if x > 0.0:
                total += x * math.log(x)
        return total / math.log(criterion.log_base)
    if criterion.kind == "bayes":
        return values[-1] - 1.0
    uniform = 1.0 / n
    spread = 0.0
    for x in values:
        d = x - uniform
        spread += d * d
    return math.sqrt(spread * n / (n - 1))


def criterion_bounds(criterion: Criterion, n_beams: int) -> tuple[float, float]:
    """(ignorance minimum, certainty maximum) of a criterion for n beams."""
    if n_beams < 2:
        raise ValueError("bounds need at least 2 beams.")
    if criterion.kind == "shannon":
        return (-math.log(n_beams) / math.log(criterion.log_base), 0.0)
    if criterion.kind == "bayes":
        return (1.0 / n_beams - 1.0, 0.0)
    return (0.0, 1.0)


def average_information(criterion: Criterion, table: PosteriorTable) -> Score:
    """Per-outcome scores weighted by the outcome priors.

    Masked outcomes (zero prior) contribute exactly zero and keep a
    per-outcome score of 0.0 as a placeholder.
    """
    per_outcome = np.zeros(table.n_outcomes)
    average = 0.0
    for mu in range(table.n_outcomes):
        if not table.support[mu]:
            continue
        value = score_outcome(criterion, table.posteriors[:, mu])
        per_outcome[mu] = value
        average += float(table.priors[mu]) * value
    return Score(per_outcome=per_outcome, average=average)


def bayes_rms_identity_check(table: PosteriorTable) -> float:
    """Largest gap between the rms spread and one minus twice the Bayes cost.

    The two scores coincide column-by-column for two beams; the returned
    defect is the max over supported outcome columns.
    """
    if table.n_beams != 2:
        raise ValueError(f"the identity holds for 2 beams, got {table.n_beams}.")
    defect = 0.0
    for mu in range(table.n_outcomes):
        if not table.support[mu]:
            continue
        column = table.posteriors[:, mu]
        spread = score_outcome(RMS_SPREAD, column)
        cost = -score_outcome(BAYES, column)
        defect = max(defect, abs(spread - (1.0 - 2.0 * cost)))
    return defect


def convexity_probe(criterion: Criterion, column_a, column_b, weight: float) -> float:
    """Convexity slack: the score-average of two columns minus the score of their mix."""
    lam = check_in_range(weight, "weight", 0.0, 1.0)
    qa = check_probability_vector(column_a, "column_a")
    qb = check_probability_vector(column_b, "column_b")
    if qa.shape != qb.shape:
        raise ValueError("columns must share a length.")
    mixed = lam * qa + (1.0 - lam) * qb
    return (lam * score_outcome(criterion, qa)
            + (1.0 - lam) * score_outcome(criterion, qb)
            - score_outcome(criterion, mixed))
