"""POVM/PVM representation, outcome statistics, and Bayes posteriors.

A qubit rank-one element is written A = w (1 + m.sigma) with weight
w in (0, 1] and a unit direction m; a measurement is complete when the
weights sum to one and the weighted directions sum to zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .quantum import (
    PAULI,
    DetectorEnsemble,
    bloch_to_state,
    fix_global_phase,
    hermitian_defect,
    state_to_bloch,
)
from .validation import check_bloch_vector, check_matrix, check_populations

__all__ = [
    "InfeasibleCompletionError",
    "Measurement",
    "PosteriorTable",
    "RankOneElement",
    "ValidityReport",
    "complete_from_partial",
    "is_pvm",
    "outcome_probabilities",
    "posteriors",
    "random_rank_one",
    "rank_one_refine",
    "table_from_probabilities",
    "validate",
]

VALIDITY_ATOL = 1e-10
EIGENVALUE_FLOOR = 1e-12
#: prior mass below which an outcome is masked (contributes exactly zero downstream)
SUPPORT_FLOOR = 1e-15


class InfeasibleCompletionError(ValueError):
    """Raised when the remainder of a partial measurement is not PSD."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class RankOneElement:
    """One rank-one qubit POVM element w (1 + m.sigma)."""

    weight: float
    direction: np.ndarray

    def __post_init__(self) -> None:
        w = float(self.weight)
        if not np.isfinite(w) or w <= 0.0 or w > 1.0 + 1e-12:
            raise ValueError(f"weight must lie in (0, 1], got {w!r}.")
        direction = check_bloch_vector(self.direction, "direction")
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "direction", _frozen(direction))

    def matrix(self) -> np.ndarray:
        return self.weight * (
            np.eye(2, dtype=complex) + np.einsum("k,kij->ij", self.direction, PAULI)
        )


@dataclass(frozen=True)
class Measurement:
    """Finite-outcome measurement: N operators, optionally in rank-one form.

    ``matrices`` always holds the operator stack (N, d, d). When the
    measurement was built from rank-one qubit elements, ``rank_one`` keeps
    the (weight, direction) form and ``representation`` is ``"rank_one"``;
    otherwise it is ``"matrix"`` and ``rank_one`` is None.
    """

    matrices: np.ndarray
    rank_one: tuple[RankOneElement, ...] | None = None
    representation: str = field(init=False, default="matrix")

    def __post_init__(self) -> None:
        mats = np.asarray(self.matrices, dtype=complex)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ValueError(f"matrices must have shape (N, d, d), got {mats.shape}.")
        if mats.shape[0] < 1:
            raise ValueError("a measurement needs at least one outcome.")
        if not np.all(np.isfinite(mats)):
            raise ValueError("matrices contain non-finite entries.")
        object.__setattr__(self, "matrices", _frozen(mats))
        if self.rank_one is not None:
            elements = tuple(self.rank_one)
            if len(elements) != mats.shape[0]:
                raise ValueError("rank_one length must match the number of outcomes.")
            object.__setattr__(self, "rank_one", elements)
            object.__setattr__(self, "representation", "rank_one")

    @classmethod
    def from_matrices(cls, matrices: Sequence[np.ndarray]) -> "Measurement":
        mats = [check_matrix(m, f"element {i}") for i, m in enumerate(matrices)]
        return cls(matrices=np.array(mats))

    @classmethod
    def from_rank_one(cls, elements: Iterable) -> "Measurement":
        parsed = []
        for item in elements:
            if isinstance(item, RankOneElement):
                parsed.append(item)
            else:
                weight, direction = item
                parsed.append(RankOneElement(weight=weight, direction=direction))
        if not parsed:
            raise ValueError("a measurement needs at least one outcome.")
        total = sum(el.weight for el in parsed)
        moment = np.zeros(3)
        for el in parsed:
            moment = moment + el.weight * el.direction
        if abs(total - 1.0) > VALIDITY_ATOL or np.max(np.abs(moment)) > VALIDITY_ATOL:
            raise ValueError(
                f"rank-one elements must have weights summing to 1 (got {total!r}) "
                f"and weighted directions cancelling (residual {moment!r}).")
        mats = np.array([el.matrix() for el in parsed])
        return cls(matrices=mats, rank_one=tuple(parsed))

    @property
    def n_outcomes(self) -> int:
        return self.matrices.shape[0]

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]


@dataclass(frozen=True)
class ValidityReport:
    """Measured defects of the POVM conditions; passes iff all within atol."""

    hermiticity_defect: float
    psd_defect: float
    completeness_defect: float
    weight_sum_defect: float
    moment_defect: float
    atol: float = VALIDITY_ATOL

    @property
    def passed(self) -> bool:
        return max(
            self.hermiticity_defect,
            self.psd_defect,
            self.completeness_defect,
            self.weight_sum_defect,
            self.moment_defect,
        ) <= self.atol


def validate(measurement: Measurement, atol: float = VALIDITY_ATOL) -> ValidityReport:
    """Report PSD, completeness, and rank-one constraint defects."""
    mats = measurement.matrices
    herm = max(hermitian_defect(m) for m in mats)
    hermitized = 0.5 * (mats + np.conjugate(np.swapaxes(mats, 1, 2)))
    eigs = np.linalg.eigvalsh(hermitized)
    psd = max(0.0, float(-eigs.min()))
    total = mats.sum(axis=0)
    completeness = float(np.max(np.abs(total - np.eye(measurement.dim))))
    weight_sum = moment = 0.0
    if measurement.rank_one is not None:
        weights = np.array([el.weight for el in measurement.rank_one])
        dirs = np.array([el.direction for el in measurement.rank_one])
        weight_sum = abs(float(weights.sum()) - 1.0)
        moment = float(np.max(np.abs(weights @ dirs)))
    return ValidityReport(
        hermiticity_defect=herm,
        psd_defect=psd,
        completeness_defect=completeness,
        weight_sum_defect=weight_sum,
        moment_defect=moment,
        atol=atol,
    )


def is_pvm(measurement: Measurement, atol: float = VALIDITY_ATOL) -> bool:
    """True iff all elements are idempotent and mutually orthogonal."""
    report = validate(measurement, atol)
    if not report.passed:
        raise ValueError("is_pvm requires a valid measurement "
                         f"(worst defect {max(report.psd_defect, report.completeness_defect)!r}).")
    mats = measurement.matrices
    for i, a in enumerate(mats):
        if np.max(np.abs(a @ a - a)) > atol:
            return False
        for b in mats[i + 1:]:
            if np.max(np.abs(a @ b)) > atol:
                return False
    return True


def _probabilities_general(ensemble: DetectorEnsemble, measurement: Measurement) -> np.ndarray:
    rhos = ensemble.density_matrices()
    # P_{i mu} = Tr[A_mu rho_i]
    probs = np.einsum("mab,iba->im", measurement.matrices, rhos).real
    return probs


def _probabilities_rank_one(ensemble: DetectorEnsemble, measurement: Measurement) -> np.ndarray:
    bloch = ensemble.bloch_vectors()
    weights = np.array([el.weight for el in measurement.rank_one])
    dirs = np.array([el.direction for el in measurement.rank_one])
    return weights[None, :] * (1.0 + bloch @ dirs.T)


def outcome_probabilities(ensemble: DetectorEnsemble,
                          measurement: Measurement) -> np.ndarray:
    """Outcome probabilities P_{iμ} for each beam i and outcome μ.

    Uses the Bloch form w(1 + m.n) when the measurement carries rank-one
    elements and the ensemble is a qubit one; otherwise the trace rule.
    """
    if ensemble.dim != measurement.dim:
        raise ValueError(
            f"ensemble dimension {ensemble.dim} does not match "
            f"measurement dimension {measurement.dim}.")
    if measurement.rank_one is not None and ensemble.dim == 2:
        probs = _probabilities_rank_one(ensemble, measurement)
    else:
        probs = _probabilities_general(ensemble, measurement)
    return np.clip(probs, 0.0, None)


@dataclass(frozen=True)
class PosteriorTable:
    """Joint statistics of one (ensemble, measurement) pair.

    probabilities[i, mu] is the outcome probability per beam, priors[mu]
    the total outcome probability, posteriors[i, mu] the Bayes update.
    Outcomes whose prior is at most SUPPORT_FLOOR are masked out of
    ``support`` and their posterior column is zero.
    """

    probabilities: np.ndarray
    priors: np.ndarray
    posteriors: np.ndarray
    support: np.ndarray
    populations: np.ndarray

    def __post_init__(self) -> None:
        for name in ("probabilities", "priors", "posteriors", "support",
                     "populations"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def n_beams(self) -> int:
        return self.probabilities.shape[0]

    @property
    def n_outcomes(self) -> int:
        return self.probabilities.shape[1]


def table_from_probabilities(probabilities, populations) -> PosteriorTable:
    """Bayes posteriors from a raw probability table and beam populations."""
    probs = np.asarray(probabilities, dtype=float)
    if probs.ndim != 2:
        raise ValueError(f"probabilities must have shape (n, N), got {probs.shape}.")
    pops = check_populations(populations, n=probs.shape[0])
    weighted = pops[:, None] * probs
    priors = weighted.sum(axis=0)
    support = priors > SUPPORT_FLOOR
    posteriors_ = np.zeros_like(weighted)
    posteriors_[:, support] = weighted[:, support] / priors[support]
    return PosteriorTable(probabilities=probs, priors=priors, posteriors=posteriors_,
                          support=support, populations=pops)


def posteriors(ensemble: DetectorEnsemble, measurement: Measurement) -> PosteriorTable:
    """Population-weighted outcome priors and the Bayes posteriors they induce."""
    probs = outcome_probabilities(ensemble, measurement)
    return table_from_probabilities(probs, ensemble.populations)


def _eigvec_key(vec: np.ndarray) -> tuple:
    rounded = np.round(vec, 12)
    return tuple((z.real, z.imag) for z in rounded)


def rank_one_refine(measurement: Measurement, atol: float = VALIDITY_ATOL) -> Measurement:
    """Spectrally split every element into rank-one pieces.

    Pieces with eigenvalue below EIGENVALUE_FLOOR are dropped. Within one
    element, pieces are ordered by descending eigenvalue with degenerate
    ties broken by lexicographic order of the phase-fixed eigenvector, so
    the refinement is reproducible.
    """
    report = validate(measurement, atol)
    if not report.passed:
        raise ValueError("rank_one_refine requires a valid measurement.")
    qubit = measurement.dim == 2
    pieces_rank_one: list[RankOneElement] = []
    pieces_matrices: list[np.ndarray] = []
    for mat in measurement.matrices:
        herm = 0.5 * (mat + mat.conj().T)
        eigvals, eigvecs = np.linalg.eigh(herm)
        bundle = []
        for idx in range(eigvals.shape[0]):
            lam = float(eigvals[idx])
            if lam < EIGENVALUE_FLOOR:
                continue
            vec = fix_global_phase(eigvecs[:, idx])
            bundle.append((lam, vec))
        bundle.sort(key=lambda item: (-item[0], _eigvec_key(item[1])))
        for lam, vec in bundle:
            piece = lam * np.outer(vec, vec.conjugate())
            pieces_matrices.append(piece)
            if qubit:
                pieces_rank_one.append(
                    RankOneElement(weight=lam / 2.0, direction=state_to_bloch(vec)))
    if not pieces_matrices:
        raise ValueError("refinement dropped every piece; measurement is null.")
    if qubit:
        return Measurement.from_rank_one(pieces_rank_one)
    return Measurement(matrices=np.array(pieces_matrices))


def complete_from_partial(parts: Iterable, atol: float = VALIDITY_ATOL) -> Measurement:
    """Extend rank-one elements to a full measurement.

    The remainder R = 1 - Σ w (1 + m.sigma) = c - v.sigma is PSD iff
    c ≥ |v|; its spectral pieces ((c+|v|)/2, -v̂) and ((c-|v|)/2, +v̂) are
    appended (eigenvalues below the floor dropped). A scalar remainder
    (v ≈ 0) splits along ±z for definiteness.
    """
    elements: list[RankOneElement] = []
    for item in parts:
        if isinstance(item, RankOneElement):
            elements.append(item)
        else:
            weight, direction = item
            elements.append(RankOneElement(weight=weight, direction=direction))
    if not elements:
        raise ValueError("parts must contain at least one element.")
    total_weight = sum(el.weight for el in elements)
    vector = np.zeros(3)
    for el in elements:
        vector = vector + el.weight * el.direction
    c = 1.0 - total_weight
    v = float(np.linalg.norm(vector))
    if c < -atol or v > c + atol:
        raise InfeasibleCompletionError(
            f"remainder is not PSD: trace margin {c!r}, direction norm {v!r}.")
    appended: list[RankOneElement] = []
    if c >= EIGENVALUE_FLOOR:
        if v <= EIGENVALUE_FLOOR / 2.0:
            appended.append(RankOneElement(weight=c / 2.0, direction=[0.0, 0.0, 1.0]))
            appended.append(RankOneElement(weight=c / 2.0, direction=[0.0, 0.0, -1.0]))
        else:
            unit = vector / v
            hi, lo = (c + v) / 2.0, (c - v) / 2.0
            if 2.0 * hi >= EIGENVALUE_FLOOR:
                appended.append(RankOneElement(weight=hi, direction=-unit))
            if 2.0 * lo >= EIGENVALUE_FLOOR:
                appended.append(RankOneElement(weight=lo, direction=unit))
    return Measurement.from_rank_one(elements + appended)


def random_rank_one(rng: np.random.Generator, n_elements: int = 4) -> Measurement:
    """Random valid rank-one qubit measurement with about n_elements outcomes.

    Draws n_elements - 1 weighted directions and completes the set; draws are
    rejected until the remainder is safely PSD, so every return validates.
    The completion may add one or two outcomes beyond the drawn ones.
    """
    n = int(n_elements)
    if n < 2:
        raise ValueError(f"n_elements must be at least 2, got {n}.")
    while True:
        directions = rng.normal(size=(n - 1, 3))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        raw = rng.random(n - 1) + 0.05
        total = float(rng.uniform(0.25, 0.75))
        weights = raw / raw.sum() * total
        moment = weights @ directions
        if 1.0 - total >= float(np.linalg.norm(moment)) + 1e-9:
            return complete_from_partial(list(zip(weights, directions)))
