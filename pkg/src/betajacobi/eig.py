"""Eigenvalues of symmetric tridiagonal matrices.

The primary solver is the implicit QL/QR iteration with Wilkinson shifts
(LAPACK sterf, values-only, O(n^2) with small constants).  A hand-written
Sturm-sequence bisection is kept as an independent oracle and as the
fallback when the QL iteration fails to converge.  Pure functions; callers
parallelize across matrices, never within one factorization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, eigvalsh_tridiagonal

from .errors import EigenSolverError, ParameterError
from .model import SymTridiagonal

__all__ = ["Spectrum", "eigenvalues", "sturm_eigenvalues", "sturm_count"]


@dataclass(frozen=True)
class Spectrum:
    """Sorted eigenvalues plus the residual of the trace identity."""

    values: np.ndarray
    residual_trace_error: float

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _validate(A: SymTridiagonal) -> None:
    if not (np.all(np.isfinite(A.diag)) and np.all(np.isfinite(A.off))):
        raise ParameterError("matrix entries must be finite")


def eigenvalues(A: SymTridiagonal, tol: float = 1e-12) -> Spectrum:
    """All eigenvalues, ascending; deterministic given the input.

    Falls back to Sturm bisection if the QL sweep cap is exceeded, and
    raises EigenSolverError if that fails too.  The trace residual is
    checked against n * scale * tol * tolerance_factor.
    """
    _validate(A)
    n = A.n
    if n == 1:
        vals = A.diag.astype(float).copy()
    else:
        try:
            vals = eigvalsh_tridiagonal(A.diag, A.off, lapack_driver="sterf")
        except LinAlgError as exc:
            try:
                vals = sturm_eigenvalues(A.diag, A.off, tol=tol)
            except Exception:
                raise EigenSolverError(f"QL iteration and bisection both failed: {exc}")
    vals = np.sort(vals)
    residual = abs(float(vals.sum() - A.diag.sum()))
    scale = max(float(np.max(np.abs(A.diag), initial=0.0)), float(np.max(np.abs(A.off), initial=0.0)), 1e-300)
    budget = n * scale * max(tol, np.finfo(float).eps) * 100.0
    if residual > budget:
        raise EigenSolverError(
            f"trace residual {residual:.3e} exceeds budget {budget:.3e}"
        )
    return Spectrum(values=vals, residual_trace_error=residual)


def sturm_count(diag: np.ndarray, off_sq: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Number of eigenvalues strictly below each shift in x.

    Standard Sturm sequence on the shifted LDL^T recurrence, vectorized
    across shifts; zero pivots are nudged by a tiny epsilon.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = diag.shape[0]
    count = np.zeros(x.shape, dtype=np.int64)
    q = np.full(x.shape, 1.0)
    tiny = np.finfo(float).tiny * 4.0
    for i in range(n):
        denom = np.where(np.abs(q) < tiny, np.where(q >= 0, tiny, -tiny), q)
        esq = off_sq[i - 1] if i > 0 else 0.0
        q = (diag[i] - x) - esq / denom
        count += q < 0
    return count


def sturm_eigenvalues(diag: np.ndarray, off: np.ndarray, tol: float = 1e-14) -> np.ndarray:
    """All eigenvalues by bisection with Sturm counts (independent oracle)."""
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    n = diag.shape[0]
    if n == 1:
        return diag.copy()
    off_sq = off * off
    pad = np.concatenate([np.abs(off), [0.0]])
    radius = np.abs(pad) + np.concatenate([[0.0], np.abs(off)])
    lo = float(np.min(diag - radius))
    hi = float(np.max(diag + radius))
    scale = max(abs(lo), abs(hi), 1e-300)
    lo -= 1e-3 * scale
    hi += 1e-3 * scale
    lows = np.full(n, lo)
    highs = np.full(n, hi)
    targets = np.arange(1, n + 1)
    # bisection until the interval width is below tol * scale
    max_iter = int(np.ceil(np.log2((hi - lo) / max(tol * scale, 1e-300)))) + 4
    for _ in range(max(max_iter, 1)):
        mids = 0.5 * (lows + highs)
        counts = sturm_count(diag, off_sq, mids)
        take_low = counts >= targets
        highs = np.where(take_low, mids, highs)
        lows = np.where(take_low, lows, mids)
        if np.max(highs - lows) <= tol * scale:
            break
    return 0.5 * (lows + highs)
