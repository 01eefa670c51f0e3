"""Projective realization of rank-one qubit read-outs on detector ⊗ ancilla.

An N-outcome rank-one measurement lifts to an ordinary projective measurement
on a 2k-dimensional space (k = ⌈N/2⌉, the smallest ancilla that fits): stack
the sub-normalized vectors behind the elements into an isometry, complete it
to a unitary, and pull the computational-basis projectors back through it.
Reading the detector together with the ancilla prepared in its ground state
then reproduces the original outcome statistics exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measurement import Measurement, outcome_probabilities
from .quantum import DetectorEnsemble, bloch_to_state, unitary_defect
from .validation import check_state_vector

__all__ = [
    "DILATION_ATOL",
    "Dilation",
    "dilation_probabilities",
    "neumark_dilate",
    "verify_dilation",
]

DILATION_ATOL = 1e-10


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Dilation:
    """Projective model of a rank-one measurement on the enlarged space.

    ``projectors[mu]`` acts on detector ⊗ ancilla (dimension 2·ancilla_dim,
    basis index d·k + a); rows where ``outcome_mask`` is False are padding
    introduced when the enlarged dimension exceeds the outcome count and
    carry zero probability.
    """

    ancilla_dim: int
    ancilla_state: np.ndarray
    unitary: np.ndarray
    projectors: np.ndarray
    outcome_mask: np.ndarray

    def __post_init__(self) -> None:
        k = int(self.ancilla_dim)
        if k < 1:
            raise ValueError(f"ancilla_dim must be a positive integer, got {k}.")
        state = check_state_vector(self.ancilla_state, "ancilla_state", dim=k)
        dim = 2 * k
        projectors = np.asarray(self.projectors, dtype=complex)
        if projectors.ndim != 3 or projectors.shape[1:] != (dim, dim):
            raise ValueError(
                f"projectors must have shape (M, {dim}, {dim}), got {projectors.shape}.")
        mask = np.asarray(self.outcome_mask, dtype=bool)
        if mask.shape != (projectors.shape[0],):
            raise ValueError("outcome_mask length must match the projector count.")
        herm = np.max(np.abs(projectors - projectors.conj().transpose(0, 2, 1)))
        idem = np.max(np.abs(np.einsum("mab,mbc->mac", projectors, projectors)
                             - projectors))
        total = projectors.sum(axis=0)
        comp = np.max(np.abs(total - np.eye(dim)))
        cross = 0.0
        for i in range(projectors.shape[0]):
            for j in range(i + 1, projectors.shape[0]):
                cross = max(cross, float(np.max(np.abs(projectors[i] @ projectors[j]))))
        worst = max(float(herm), float(idem), float(comp), cross)
        if worst > DILATION_ATOL:
            raise ValueError(
                f"projectors do not form an orthogonal decomposition of the "
                f"identity (defect {worst:.3e}).")
        object.__setattr__(self, "ancilla_dim", k)
        object.__setattr__(self, "ancilla_state", _frozen(state))
        object.__setattr__(self, "unitary", _frozen(np.asarray(self.unitary, dtype=complex)))
        object.__setattr__(self, "projectors", _frozen(projectors))
        object.__setattr__(self, "outcome_mask", _frozen(mask))

    @property
    def dim(self) -> int:
        return 2 * self.ancilla_dim

    @property
    def n_outcomes(self) -> int:
        return int(np.sum(self.outcome_mask))


def _complete_to_unitary(embedded: np.ndarray, slots: tuple[int, int]) -> np.ndarray:
    """Fill the remaining columns by orthonormal extension over the standard basis."""
    dim = embedded.shape[0]
    unitary = np.zeros((dim, dim), dtype=complex)
    unitary[:, slots[0]] = embedded[:, 0]
    unitary[:, slots[1]] = embedded[:, 1]
    chosen = [embedded[:, 0], embedded[:, 1]]
    free = [j for j in range(dim) if j not in slots]
    for j in range(dim):
        if not free:
            break
        candidate = np.zeros(dim, dtype=complex)
        candidate[j] = 1.0
        for _ in range(2):  # re-orthogonalize once for numerical hygiene
            for column in chosen:
                candidate = candidate - np.vdot(column, candidate) * column
        norm = float(np.linalg.norm(candidate))
        if norm > 1e-6:
            candidate = candidate / norm
            unitary[:, free.pop(0)] = candidate
            chosen.append(candidate)
    if free or unitary_defect(unitary) > 1e-12:
        raise ValueError("failed to complete the dilation isometry to a unitary.")
    return unitary


def neumark_dilate(measurement: Measurement) -> Dilation:
    """Lift a rank-one qubit measurement to a projective one on 2⌈N/2⌉ dimensions.

    Outcome mu owns basis vector mu of the enlarged space; the detector state
    embeds as |psi⟩ ⊗ |0⟩. When the enlarged dimension exceeds N, the leftover
    basis vectors are lumped into one padding projector with outcome_mask
    False, which never fires on embedded states.
    """
    if measurement.dim != 2:
        raise ValueError("neumark_dilate supports two-dimensional detectors only.")
    elements = measurement.rank_one
    if elements is None:
        raise ValueError("neumark_dilate requires the rank-one (weight, direction) "
                         "form; apply rank_one_refine first.")
    n_out = len(elements)
    k = (n_out + 1) // 2
    dim = 2 * k
    # Row mu holds the conjugate of sqrt(2 w_mu)|m_mu>, so the two columns are
    # orthonormal exactly when the elements resolve the identity.
    embedded = np.zeros((dim, 2), dtype=complex)
    for mu, element in enumerate(elements):
        amplitude = math.sqrt(2.0 * element.weight) * bloch_to_state(element.direction)
        embedded[mu, :] = amplitude.conj()
    unitary = _complete_to_unitary(embedded, (0, k))
    rows = unitary.conj()
    projectors = [np.outer(rows[mu], rows[mu].conj()) for mu in range(n_out)]
    mask = [True] * n_out
    if dim > n_out:
        padding = np.zeros((dim, dim), dtype=complex)
        for mu in range(n_out, dim):
            padding += np.outer(rows[mu], rows[mu].conj())
        projectors.append(padding)
        mask.append(False)
    return Dilation(ancilla_dim=k,
                    ancilla_state=np.eye(k, dtype=complex)[0],
                    unitary=unitary,
                    projectors=np.stack(projectors),
                    outcome_mask=np.array(mask))


def dilation_probabilities(dilation: Dilation, ensemble: DetectorEnsemble) -> np.ndarray:
    """Outcome probabilities of the projective model, one row per beam.

    Columns follow the dilation's projector list, padding included (a padding
    column is zero up to round-off).
    """
    if ensemble.dim != 2:
        raise ValueError("dimension mismatch: the dilation embeds a two-dimensional "
                         f"detector, the ensemble lives in dimension {ensemble.dim}.")
    k = dilation.ancilla_dim
    total = np.einsum("id,a->ida", ensemble.states, dilation.ancilla_state)
    total = total.reshape(ensemble.n_beams, 2 * k)
    probs = np.einsum("ia,mab,ib->im", total.conj(), dilation.projectors, total).real
    return np.clip(probs, 0.0, None)


def verify_dilation(dilation: Dilation, measurement: Measurement,
                    ensemble: DetectorEnsemble) -> float:
    """Largest statistics gap between the projective model and the measurement.

    Returns max over beams and outcomes of the absolute probability
    difference; padding outcomes are compared against zero.
    """
    if measurement.dim != ensemble.dim:
        raise ValueError("dimension mismatch: measurement dimension "
                         f"{measurement.dim} vs ensemble dimension {ensemble.dim}.")
    if dilation.n_outcomes != measurement.n_outcomes:
        raise ValueError("dimension mismatch: dilation carries "
                         f"{dilation.n_outcomes} real outcomes, measurement has "
                         f"{measurement.n_outcomes}.")
    model = dilation_probabilities(dilation, ensemble)
    direct = outcome_probabilities(ensemble, measurement)
    mask = dilation.outcome_mask
    defect = float(np.max(np.abs(model[:, mask] - direct)))
    if not np.all(mask):
        defect = max(defect, float(np.max(model[:, ~mask])))
    return defect
