"""Input validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np

from .exceptions import InputError


def check_sample(X, *, min_rows: int = 2, min_cols: int = 1, name: str = "X") -> np.ndarray:
    """Return ``X`` as a finite 2-D float array, raising :class:`InputError` otherwise.

    A 1-D input is read as a single column.
    """
    try:
        arr = np.asarray(X, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name} is not numeric: {exc}") from exc
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise InputError(f"{name} must be 2-D, got shape {arr.shape}")
    n, d = arr.shape
    if n < min_rows:
        raise InputError(f"{name} needs at least {min_rows} rows, got {n}")
    if d < min_cols:
        raise InputError(f"{name} needs at least {min_cols} columns, got {d}")
    bad = ~np.isfinite(arr)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise InputError(f"{name} has a non-finite entry at row {row}, column {col}")
    return arr


def check_unit_interior(U, *, name: str = "u") -> np.ndarray:
    """Return ``U`` as a 2-D array whose entries lie strictly inside (0, 1)."""
    arr = np.asarray(U, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if not np.all((arr > 0.0) & (arr < 1.0)):
        from .exceptions import DomainError

        raise DomainError(f"{name} must lie strictly inside the unit hypercube")
    return arr
