"""Input validation helpers shared across the package."""

from __future__ import annotations

import numpy as np


def binary_matrix(a) -> np.ndarray:
    """Coerce to a square uint8 matrix with entries in {0, 1}."""
    arr = np.asarray(a)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError("matrix must be non-empty")
    out = arr.astype(np.uint8, copy=True)
    if not np.array_equal(out, arr):
        raise ValueError("matrix entries must be exactly 0 or 1")
    if out.max(initial=0) > 1:
        raise ValueError("matrix entries must be exactly 0 or 1")
    return out


def probability_matrix(p) -> np.ndarray:
    """Coerce to a square float64 matrix with entries strictly in (0, 1)."""
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError("matrix must be non-empty")
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise ValueError("probabilities must lie strictly in (0, 1)")
    return arr


def symmetric_adjacency(a) -> np.ndarray:
    """Coerce to a binary, symmetric, zero-diagonal adjacency matrix."""
    arr = binary_matrix(a)
    if not np.array_equal(arr, arr.T):
        raise ValueError("adjacency matrix must be symmetric")
    if arr.diagonal().any():
        raise ValueError("adjacency matrix must have a zero diagonal")
    return arr


def binary_string(s: str) -> str:
    """Check that ``s`` is a non-empty string over {0, 1}."""
    if not isinstance(s, str) or not s:
        raise ValueError("expected a non-empty binary string")
    if any(ch not in "01" for ch in s):
        raise ValueError(f"not a binary string: {s!r}")
    return s
