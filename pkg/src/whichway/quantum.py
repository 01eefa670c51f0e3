"""Qubit states, Bloch-vector geometry, and detector ensembles.

A pure qubit state corresponds one-to-one to a unit three-vector n via the
projector (1 + n.sigma)/2; the representative amplitudes fix the global phase
so that the first nonzero amplitude is real and positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import (
    check_bloch_vector,
    check_in_range,
    check_matrix,
    check_populations,
    check_state_vector,
)

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "PAULI",
    "DetectorEnsemble",
    "bloch_to_state",
    "density_from_bloch",
    "ensemble_from_bloch",
    "fix_global_phase",
    "hermitian_defect",
    "is_hermitian",
    "is_psd",
    "is_unitary",
    "overlap",
    "projector",
    "psd_defect",
    "state_to_bloch",
    "symmetric_pair",
    "trine_ensemble",
    "unitary_defect",
]

MATRIX_ATOL = 1e-12

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, copy=True)
    out.setflags(write=False)
    return out


def hermitian_defect(matrix) -> float:
    """Max absolute deviation of a square matrix from its adjoint."""
    mat = check_matrix(matrix)
    return float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0


def is_hermitian(matrix, atol: float = MATRIX_ATOL) -> bool:
    return hermitian_defect(matrix) <= atol


def psd_defect(matrix) -> float:
    """Magnitude of the most negative eigenvalue of the Hermitian part."""
    mat = check_matrix(matrix)
    herm = 0.5 * (mat + mat.conj().T)
    lo = float(np.linalg.eigvalsh(herm)[0])
    return max(0.0, -lo)


def is_psd(matrix, atol: float = MATRIX_ATOL) -> bool:
    mat = check_matrix(matrix)
    return hermitian_defect(mat) <= atol and psd_defect(mat) <= atol


def unitary_defect(matrix) -> float:
    """Max absolute deviation of M.M† from the identity."""
    mat = check_matrix(matrix)
    eye = np.eye(mat.shape[0])
    return float(np.max(np.abs(mat @ mat.conj().T - eye)))


def is_unitary(matrix, atol: float = MATRIX_ATOL) -> bool:
    return unitary_defect(matrix) <= atol


def fix_global_phase(state, atol: float = 1e-12) -> np.ndarray:
    """Rotate the global phase so the first nonzero amplitude is real-positive."""
    arr = np.asarray(state, dtype=complex)
    for amp in arr:
        if abs(amp) > atol:
            return arr * (amp.conjugate() / abs(amp))
    raise ValueError("state must be nonzero.")


def bloch_to_state(vector) -> np.ndarray:
    """Amplitudes of the qubit state whose Bloch vector is ``vector``.

    The returned state is the +1 eigenvector of n.sigma, phase-fixed.
    """
    vec = check_bloch_vector(vector)
    x, y, z = (float(vec[0]), float(vec[1]), float(vec[2]))
    a = np.sqrt(max(0.0, (1.0 + z) / 2.0))
    b = np.sqrt(max(0.0, (1.0 - z) / 2.0))
    phi = np.arctan2(y, x)
    state = np.array([a, b * np.exp(1j * phi)], dtype=complex)
    return fix_global_phase(state)


def state_to_bloch(state) -> np.ndarray:
    """Bloch vector (⟨sigma_x⟩, ⟨sigma_y⟩, ⟨sigma_z⟩) of a pure qubit state."""
    arr = check_state_vector(state, dim=2)
    a, b = arr[0], arr[1]
    cross = a.conjugate() * b
    return np.array([2.0 * cross.real, 2.0 * cross.imag,
                     float(abs(a) ** 2 - abs(b) ** 2)])


def overlap(state_a, state_b) -> complex:
    """Inner product ⟨a|b⟩ of two unit states."""
    arr_a = check_state_vector(state_a, "state_a")
    arr_b = check_state_vector(state_b, "state_b")
    if arr_a.shape != arr_b.shape:
        raise ValueError("states must share a dimension.")
    return complex(np.vdot(arr_a, arr_b))


def projector(state) -> np.ndarray:
    """Rank-one density matrix |s⟩⟨s| of a unit state."""
    arr = check_state_vector(state)
    return np.outer(arr, arr.conjugate())


def density_from_bloch(vector) -> np.ndarray:
    """Pure-state density matrix (1 + n.sigma)/2."""
    vec = check_bloch_vector(vector)
    return 0.5 * (np.eye(2, dtype=complex) + np.einsum("k,kij->ij", vec, PAULI))


@dataclass(frozen=True)
class DetectorEnsemble:
    """n pure detector states with prior beam populations.

    states has shape (n, d) with unit rows; populations has shape (n,),
    is nonnegative, and sums to one. Instances are immutable.
    """

    states: np.ndarray
    populations: np.ndarray

    def __post_init__(self) -> None:
        states = np.asarray(self.states, dtype=complex)
        if states.ndim != 2:
            raise ValueError(f"states must have shape (n, d), got {states.shape}.")
        n, d = states.shape
        if n < 2:
            raise ValueError(f"ensemble needs at least 2 states, got {n}.")
        if d < 2:
            raise ValueError(f"state dimension must be >= 2, got {d}.")
        for i in range(n):
            check_state_vector(states[i], f"states[{i}]", dim=d)
        populations = self.populations
        if populations is None:
            populations = np.full(n, 1.0 / n)
        populations = check_populations(populations, n=n)
        object.__setattr__(self, "states", _frozen(states))
        object.__setattr__(self, "populations", _frozen(populations))

    @property
    def n_beams(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def bloch_vectors(self) -> np.ndarray:
        """Bloch vectors of the detector states (qubit ensembles only)."""
        if self.dim != 2:
            raise ValueError("Bloch vectors are defined for qubit ensembles only.")
        return np.array([state_to_bloch(s) for s in self.states])

    def density_matrices(self) -> np.ndarray:
        return np.array([projector(s) for s in self.states])


def ensemble_from_bloch(vectors, populations=None) -> DetectorEnsemble:
    """Build a qubit ensemble from Bloch vectors; equal populations if omitted."""
    arr = np.asarray(vectors, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"bloch vectors must have shape (n, 3), got {arr.shape}.")
    states = np.array([bloch_to_state(v) for v in arr])
    if populations is None:
        populations = np.full(arr.shape[0], 1.0 / arr.shape[0])
    return DetectorEnsemble(states=states, populations=populations)


def symmetric_pair(theta: float, populations=None) -> DetectorEnsemble:
    """Two detector states with Bloch vectors (±sin θ, 0, cos θ).

    θ is half the Bloch angle between the states, so their overlap is cos θ.
    Equal populations unless given.
    """
    th = check_in_range(theta, "theta", 0.0, np.pi / 2.0)
    s, c = np.sin(th), np.cos(th)
    return ensemble_from_bloch([[s, 0.0, c], [-s, 0.0, c]], populations)


def trine_ensemble() -> DetectorEnsemble:
    """Three equally populated coplanar states at mutual 120° in the xz-plane.

    Canonical orientation: n1 = +z, n2 and n3 rotated by ∓120° about y;
    the three Bloch vectors sum to zero.
    """
    r = np.sqrt(3.0) / 2.0
    return ensemble_from_bloch(
        [[0.0, 0.0, 1.0], [r, 0.0, -0.5], [-r, 0.0, -0.5]])
