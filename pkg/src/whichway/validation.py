"""Input-validation helpers shared across the package.

All checkers follow the scikit-learn convention: coerce to a canonical
ndarray, validate, and raise ``ValueError`` naming the offending field.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "as_float_vector",
    "check_bloch_vector",
    "check_in_range",
    "check_matrix",
    "check_populations",
    "check_probability_vector",
    "check_state_vector",
    "check_unit_vector",
]


def as_float_vector(values, name: str) -> np.ndarray:
    """Coerce to a finite 1-d float array."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-d real vector, got shape {arr.shape}.")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty.")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries.")
    return arr


def check_unit_vector(values, name: str = "vector", *, dim: int | None = None,
                      atol: float = 1e-12) -> np.ndarray:
    """Validate a real unit vector."""
    arr = as_float_vector(values, name)
    if dim is not None and arr.shape != (dim,):
        raise ValueError(f"{name} must have shape ({dim},), got {arr.shape}.")
    norm = float(np.linalg.norm(arr))
    if abs(norm - 1.0) > atol:
        raise ValueError(f"{name} must have unit norm (got {norm!r}).")
    return arr


def check_bloch_vector(values, name: str = "bloch vector", *, atol: float = 1e-12) -> np.ndarray:
    """Validate a unit three-vector."""
    return check_unit_vector(values, name, dim=3, atol=atol)


def check_state_vector(values, name: str = "state", *, dim: int | None = None,
                       atol: float = 1e-12) -> np.ndarray:
    """Validate a complex unit vector."""
    arr = np.asarray(values, dtype=complex)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-d complex vector, got shape {arr.shape}.")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries.")
    if dim is not None and arr.shape != (dim,):
        raise ValueError(f"{name} must have shape ({dim},), got {arr.shape}.")
    norm = float(np.linalg.norm(arr))
    if norm <= atol:
        raise ValueError(f"{name} must be nonzero.")
    if abs(norm - 1.0) > atol:
        raise ValueError(f"{name} must have unit norm (got {norm!r}).")
    return arr


def check_populations(values, name: str = "populations", *, n: int | None = None,
                      atol: float = 1e-12) -> np.ndarray:
    """Validate prior beam populations: nonnegative, summing to one."""
    arr = as_float_vector(values, name)
    if n is not None and arr.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},), got {arr.shape}.")
    if np.any(arr < -atol):
        raise ValueError(f"{name} must be nonnegative (min entry {arr.min()!r}).")
    total = float(arr.sum())
    if abs(total - 1.0) > atol:
        raise ValueError(f"{name} must sum to 1 (got {total!r}).")
    return np.clip(arr, 0.0, None)


def check_probability_vector(values, name: str = "probability vector", *,
                             atol: float = 1e-10) -> np.ndarray:
    """Validate a probability vector to the looser statistical tolerance."""
    arr = as_float_vector(values, name)
    if np.any(arr < -atol):
        raise ValueError(f"{name} must be nonnegative (min entry {arr.min()!r}).")
    total = float(arr.sum())
    if abs(total - 1.0) > atol:
        raise ValueError(f"{name} must sum to 1 (got {total!r}).")
    return np.clip(arr, 0.0, None)


def check_matrix(values, name: str = "matrix", *, dim: int | None = None) -> np.ndarray:
    """Validate a finite square complex matrix."""
    arr = np.asarray(values, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {arr.shape}.")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries.")
    if dim is not None and arr.shape != (dim, dim):
        raise ValueError(f"{name} must have shape ({dim}, {dim}), got {arr.shape}.")
    return arr


def check_in_range(value, name: str, lo: float, hi: float) -> float:
    """Validate a scalar in the closed interval [lo, hi]."""
    val = float(value)
    if not np.isfinite(val):
        raise ValueError(f"{name} must be finite.")
    if val < lo or val > hi:
        raise ValueError(f"{name} must lie in [{lo}, {hi}] (got {val!r}).")
    return val
