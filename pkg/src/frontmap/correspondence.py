"""Correspondence analysis of a fronts x terms contingency table."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError


@dataclass
class CAModel:
    row_masses: np.ndarray
    col_masses: np.ndarray
    singular_values: np.ndarray      # descending, only those above tol
    row_principal: np.ndarray        # rows x dims
    col_principal: np.ndarray        # cols x dims
    row_standard: np.ndarray
    col_standard: np.ndarray
    total_inertia: float

    @property
    def dims(self) -> int:
        return len(self.singular_values)

    @property
    def explained(self) -> np.ndarray:
        if self.total_inertia <= 0:
            return np.zeros(self.dims)
        return self.singular_values ** 2 / self.total_inertia

    def row_inertia_share(self) -> np.ndarray:
        """Share of total inertia carried by each row (mass x squared distance)."""
        return _share(self.row_masses, self.row_principal, self.total_inertia)

    def col_inertia_share(self) -> np.ndarray:
        return _share(self.col_masses, self.col_principal, self.total_inertia)


def _share(masses, coords, total):
    if total <= 0:
        return np.zeros(len(masses))
    return masses * (coords ** 2).sum(axis=1) / total


def _fix_signs(u, v):
    # Largest-magnitude entry of each left vector made positive; the first
    # index wins among entries tied in magnitude.
    for k in range(u.shape[1]):
        mags = np.abs(u[:, k])
        top = mags.max()
        idx = int(np.flatnonzero(mags >= top - 1e-12 * max(top, 1.0))[0])
        if u[idx, k] < 0:
            u[:, k] = -u[:, k]
            v[:, k] = -v[:, k]
    return u, v


def correspondence_analysis(counts, tol: float = 1e-12) -> CAModel:
    """Correspondence analysis by SVD of the standardized residual matrix.

    With P = counts / n, row masses r and column masses c,
    S = D_r^-1/2 (P - r c^T) D_c^-1/2 = U diag(s) V^T. Principal coordinates
    are D_r^-1/2 U diag(s) for rows and D_c^-1/2 V diag(s) for columns.

    Raises:
        NumericalError: negative counts, an all-zero row or column, or n = 0.
    """
    x = np.asarray(counts, dtype=float)
    if x.ndim != 2 or x.size == 0:
        raise NumericalError("counts must be a non-empty 2-D table")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise NumericalError("counts must be finite and nonnegative")
    n = x.sum()
    if n <= 0:
        raise NumericalError("contingency table sums to zero")
    zero_rows = np.flatnonzero(x.sum(axis=1) == 0)
    if zero_rows.size:
        raise NumericalError(f"row {int(zero_rows[0])} is all zero")
    zero_cols = np.flatnonzero(x.sum(axis=0) == 0)
    if zero_cols.size:
        raise NumericalError(f"column {int(zero_cols[0])} is all zero")

    p = x / n
    r = p.sum(axis=1)
    c = p.sum(axis=0)
    r_isqrt = 1.0 / np.sqrt(r)
    c_isqrt = 1.0 / np.sqrt(c)
    s = r_isqrt[:, None] * (p - np.outer(r, c)) * c_isqrt[None, :]
    u, sv, vt = np.linalg.svd(s, full_matrices=False)
    keep = min(int(np.sum(sv > tol)), min(x.shape) - 1)
    u = u[:, :keep].copy()
    v = vt[:keep].T.copy()
    sv = sv[:keep]
    u, v = _fix_signs(u, v)

    row_std = r_isqrt[:, None] * u
    col_std = c_isqrt[:, None] * v
    return CAModel(
        row_masses=r,
        col_masses=c,
        singular_values=sv,
        row_principal=row_std * sv,
        col_principal=col_std * sv,
        row_standard=row_std,
        col_standard=col_std,
        total_inertia=float(np.sum(sv ** 2)),
    )


@dataclass
class Projection:
    rows: np.ndarray          # rows x 2
    cols: np.ndarray          # cols x 2
    explained: tuple          # fraction of inertia on axis 1 and axis 2


def project_2d(model: CAModel, standard: bool = False) -> Projection:
    """First two axes; axis 2 is all zero for a one-dimensional model."""
    if model.dims == 0:
        raise NumericalError("model has no dimensions to project")
    rows = model.row_standard if standard else model.row_principal
    cols = model.col_standard if standard else model.col_principal

    def two(a):
        out = np.zeros((a.shape[0], 2))
        out[:, : min(2, a.shape[1])] = a[:, :2]
        return out

    expl = model.explained
    return Projection(two(rows), two(cols),
                      (float(expl[0]), float(expl[1]) if model.dims > 1 else 0.0))
