"""Constructive reduction of rank-one read-outs to the two-outcome projective one.

For a coplanar detector ensemble the pipeline is: fold every element into
the ensemble plane (weakly increases the average information, by convexity),
mirror-symmetrize about the bisector axis (preserves it exactly for the
symmetric two-beam ensemble), then merge mirror pairs two at a time. Each
merge changes the Shannon average by 2(w_i + w_j) times the Jensen gap of a
concave one-variable function of the pair height, so the trace is monotone
and terminates at the transverse projective measurement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .criteria import SHANNON, average_information
from .measurement import Measurement, RankOneElement, posteriors, validate
from .quantum import DetectorEnsemble, symmetric_pair
from .validation import check_in_range

__all__ = [
    "MirrorPair",
    "ReductionTrace",
    "SymmetricPovm",
    "durr_doubling",
    "pair_information",
    "reduce_pair",
    "reduce_to_pvm",
    "symmetrize_about_axis",
    "symmetrize_to_plane",
]

PLANE_ATOL = 1e-10
WEIGHT_DROP = 1e-12
_PAIR_MERGE_ATOL = 1e-12


@dataclass(frozen=True)
class MirrorPair:
    """Two equal-weight elements at (±t, 0, z), t = sqrt(1 − z²).

    ``weight`` is the weight of each of the two elements, not their sum.
    """

    weight: float
    height: float

    def __post_init__(self) -> None:
        w = float(self.weight)
        if not np.isfinite(w) or w <= 0.0 or w > 0.5 + 1e-12:
            raise ValueError(f"pair element weight must lie in (0, 1/2], got {w!r}.")
        z = check_in_range(self.height, "height", -1.0 - 1e-12, 1.0 + 1e-12)
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "height", float(np.clip(z, -1.0, 1.0)))

    def elements(self) -> list[RankOneElement]:
        t = math.sqrt(max(0.0, 1.0 - self.height ** 2))
        return [
            RankOneElement(weight=self.weight, direction=[t, 0.0, self.height]),
            RankOneElement(weight=self.weight, direction=[-t, 0.0, self.height]),
        ]


@dataclass(frozen=True)
class SymmetricPovm:
    """Axis-symmetric in-plane measurement stored as mirror pairs.

    Pairs at coinciding heights are merged on construction (an information-
    neutral operation); the flattened element list must pass validation.
    """

    pairs: tuple[MirrorPair, ...]

    def __post_init__(self) -> None:
        merged: list[MirrorPair] = []
        for pair in self.pairs:
            if not isinstance(pair, MirrorPair):
                pair = MirrorPair(*pair)
            for idx, kept in enumerate(merged):
                if abs(kept.height - pair.height) <= _PAIR_MERGE_ATOL:
                    w = kept.weight + pair.weight
                    z = (kept.weight * kept.height + pair.weight * pair.height) / w
                    merged[idx] = MirrorPair(weight=w, height=z)
                    break
            else:
                merged.append(pair)
        if not merged:
            raise ValueError("a symmetric measurement needs at least one pair.")
        object.__setattr__(self, "pairs", tuple(merged))
        report = validate(self.to_measurement())
        if not report.passed:
            raise ValueError(
                f"mirror pairs do not form a valid measurement "
                f"(completeness defect {report.completeness_defect!r}).")

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)

    def to_measurement(self) -> Measurement:
        elements: list[RankOneElement] = []
        for pair in self.pairs:
            elements.extend(pair.elements())
        return Measurement.from_rank_one(elements)


@dataclass(frozen=True)
class ReductionTrace:
    """Snapshots (measurement, average information) along the reduction."""

    steps: tuple[tuple[Measurement, float], ...]

    @property
    def terminal(self) -> Measurement:
        return self.steps[-1][0]

    @property
    def values(self) -> list[float]:
        return [value for _, value in self.steps]


def _require_rank_one(measurement: Measurement, op: str) -> tuple[RankOneElement, ...]:
    if measurement.rank_one is None:
        raise ValueError(f"{op} requires the rank-one (weight, direction) form; "
                         "apply rank_one_refine first.")
    return measurement.rank_one


def _plane_normal(ensemble: DetectorEnsemble, atol: float = PLANE_ATOL) -> np.ndarray:
    """Unit normal of the plane spanned by the ensemble's Bloch vectors.

    Falls back to the canonical y-normal (then x, then z) when the span is
    degenerate; raises when three or more beams are genuinely non-coplanar.
    """
    bloch = ensemble.bloch_vectors()
    _, svals, vt = np.linalg.svd(bloch)
    if len(svals) >= 3 and svals[2] > atol:
        raise ValueError("ensemble Bloch vectors are not coplanar.")
    rank = int(np.sum(svals > 1e-9))
    if rank >= 2:
        normal = vt[-1]
        pivot = int(np.argmax(np.abs(normal)))
        if normal[pivot] < 0:
            normal = -normal
        return normal
    for candidate in (np.array([0.0, 1.0, 0.0]),
                      np.array([1.0, 0.0, 0.0]),
                      np.array([0.0, 0.0, 1.0])):
        if np.max(np.abs(bloch @ candidate)) <= atol:
            return candidate
    raise ValueError("ensemble Bloch vectors are not coplanar.")


def symmetrize_to_plane(measurement: Measurement, ensemble: DetectorEnsemble,
                        atol: float = PLANE_ATOL) -> Measurement:
    """Fold every element into the ensemble plane.

    An out-of-plane element (w, m) is first mirror-split into the half-pair
    (w/2, m), (w/2, m''), which leaves all statistics unchanged because only
    the in-plane projection of m couples to coplanar beams; the half-pair is
    then replaced by the unique in-plane unit pair u, v with u + v equal to
    twice the projection, which can only raise a convex information average.
    """
    elements = _require_rank_one(measurement, "symmetrize_to_plane")
    normal = _plane_normal(ensemble, atol)
    folded: list[RankOneElement] = []
    for el in elements:
        out = float(el.direction @ normal)
        if abs(out) <= 1e-12:
            folded.append(el)
            continue
        chord = el.direction - out * normal
        rho = float(np.linalg.norm(chord))
        if rho > 1e-9:
            ortho = np.cross(normal, chord / rho)
        else:
            chord = np.zeros(3)
            ortho = _fallback_in_plane(normal)
        t = math.sqrt(max(0.0, 1.0 - rho * rho))
        for sign in (1.0, -1.0):
            folded.append(RankOneElement(weight=el.weight / 2.0,
                                         direction=chord + sign * t * ortho))
    return Measurement.from_rank_one(folded)


def _fallback_in_plane(normal: np.ndarray) -> np.ndarray:
    for candidate in (np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0])):
        proj = candidate - (candidate @ normal) * normal
        norm = float(np.linalg.norm(proj))
        if norm > 1e-9:
            return proj / norm
    return np.array([0.0, 1.0, 0.0])


def symmetrize_about_axis(measurement: Measurement) -> SymmetricPovm:
    """Mirror every in-plane element about the z-axis into an equal-weight pair.

    (w, (mx, 0, mz)) maps to the pair (w/2, (±mx, 0, mz)); for the symmetric
    two-beam ensemble the mirror column is the beam swap of the original, so
    every permutation-symmetric information average is preserved exactly.
    """
    elements = _require_rank_one(measurement, "symmetrize_about_axis")
    pairs: list[MirrorPair] = []
    for el in elements:
        if abs(float(el.direction[1])) > PLANE_ATOL:
            raise ValueError("symmetrize_about_axis requires an in-plane measurement.")
        if el.weight < WEIGHT_DROP:
            continue
        pairs.append(MirrorPair(weight=el.weight / 2.0,
                                height=float(el.direction[2])))
    return SymmetricPovm(pairs=tuple(pairs))


def durr_doubling(measurement: Measurement) -> Measurement:
    """Replace each element (w, m) by the pair (w/2, m), (w/2, −m).

    Each doubled pair is w times a projective measurement, so for equally
    populated beams the rms-spread average is unchanged.
    """
    elements = _require_rank_one(measurement, "durr_doubling")
    doubled: list[RankOneElement] = []
    for el in elements:
        doubled.append(RankOneElement(weight=el.weight / 2.0, direction=el.direction))
        doubled.append(RankOneElement(weight=el.weight / 2.0, direction=-el.direction))
    return Measurement.from_rank_one(doubled)


def pair_information(height: float, theta: float) -> float:
    """Shannon information per unit element weight of a mirror pair.

    For the equally populated two-beam ensemble at half-angle theta, a
    symmetric measurement with pairs (w_p, z_p) has average information
    2 Σ_p w_p · pair_information(z_p, theta). The function is concave in
    the height, which makes every pair merge information-non-decreasing.
    Closed forms: at z = 0 it is p ln p + (1−p) ln(1−p) with
    p = (1 + sin θ)/2; at z = ±1 it is −(1 ± cos θ) ln 2.
    """
    z = check_in_range(height, "height", -1.0, 1.0)
    th = check_in_range(theta, "theta", 0.0, math.pi / 2.0)
    a = 1.0 + z * math.cos(th)
    t = math.sqrt(max(0.0, 1.0 - z * z))
    upper = 0.5 * (a + t * math.sin(th))
    lower = 0.5 * (a - t * math.sin(th))

    def xlnx(x: float) -> float:
        return x * math.log(x) if x > 0.0 else 0.0

    return xlnx(upper) + xlnx(lower) - xlnx(a)


def reduce_pair(povm: SymmetricPovm, i: int, j: int) -> SymmetricPovm:
    """Merge pairs i and j into one at the weight-averaged height."""
    n = povm.n_pairs
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"pair indices ({i}, {j}) out of range for {n} pairs.")
    if i == j:
        raise ValueError("pair indices must differ.")
    first, second = povm.pairs[i], povm.pairs[j]
    w = first.weight + second.weight
    z = (first.weight * first.height + second.weight * second.height) / w
    kept = [pair for k, pair in enumerate(povm.pairs) if k not in (i, j)]
    kept.insert(min(i, j), MirrorPair(weight=w, height=z))
    return SymmetricPovm(pairs=tuple(kept))


def _canonical_element_set(measurement: Measurement) -> list[tuple]:
    items = [(round(el.weight, 10), tuple(np.round(el.direction, 10)))
             for el in measurement.rank_one]
    return sorted(items)


def reduce_to_pvm(measurement: Measurement, theta: float) -> ReductionTrace:
    """Run the full pipeline against the symmetric pair ensemble at theta.

    Plane fold, axis symmetrization, then merges in descending weight order
    until one pair remains; the Shannon average is recorded at every stage
    that changes the measurement and the terminal is the transverse
    projective measurement.
    """
    from .measurement import rank_one_refine

    ensemble = symmetric_pair(theta)
    if measurement.rank_one is None:
        measurement = rank_one_refine(measurement)

    def info(m: Measurement) -> float:
        return average_information(SHANNON, posteriors(ensemble, m)).average

    steps: list[tuple[Measurement, float]] = [(measurement, info(measurement))]
    planar = symmetrize_to_plane(measurement, ensemble)
    if _canonical_element_set(planar) != _canonical_element_set(steps[-1][0]):
        steps.append((planar, info(planar)))
    symmetric = symmetrize_about_axis(planar)
    mirrored = symmetric.to_measurement()
    if _canonical_element_set(mirrored) != _canonical_element_set(steps[-1][0]):
        steps.append((mirrored, info(mirrored)))
    while symmetric.n_pairs > 1:
        order = sorted(range(symmetric.n_pairs),
                       key=lambda k: (-symmetric.pairs[k].weight,
                                      symmetric.pairs[k].height))
        symmetric = reduce_pair(symmetric, order[0], order[1])
        snapshot = symmetric.to_measurement()
        steps.append((snapshot, info(snapshot)))
    return ReductionTrace(steps=tuple(steps))
