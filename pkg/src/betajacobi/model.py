"""Sampling of the bidiagonal factor B and assembly of the Gram matrix BB^T.

The factor is lower bidiagonal.  Writing rows m = 1..n, the diagonal entry is
d_m = c_{n-m+1} * s'_{n-m} (with s'_0 = 1) and the subdiagonal entry in row
m >= 2 is -s_{n-m+1} * c'_{n-m+1}, where

    c_i^2  ~ Beta(beta/2 (n1 - n + i),  beta/2 (n2 - n + i)),   i = 1..n
    c'_j^2 ~ Beta(beta/2 j,  beta/2 (n1 + n2 - 2n + 1 + j)),    j = 1..n-1

all 2n-1 draws independent, s = sqrt(1 - c^2) and s' = sqrt(1 - c'^2).
The eigenvalues of A = BB^T then follow the beta-Jacobi law.

Sampling is pure given an explicit generator stream; factors are immutable.
Replicate-level parallelism uses disjoint counter-based streams, so results
are bit-reproducible independent of thread count.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .params import EnsembleParams

__all__ = [
    "BetaSpec",
    "TridiagonalFactor",
    "SymTridiagonal",
    "replicate_stream",
    "beta_sample",
    "sample_factor",
    "deterministic_factor",
    "assemble_gram",
    "factor_to_dense",
    "gram_to_dense",
    "power_traces",
    "frobenius_gap_sq",
    "dump_factor_csv",
]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class BetaSpec:
    """Shape pair of a Beta distribution."""

    shape1: float
    shape2: float

    def __post_init__(self):
        if not (self.shape1 > 0 and self.shape2 > 0):
            raise ParameterError(
                f"Beta shapes must be positive, got ({self.shape1}, {self.shape2})"
            )


@dataclass(frozen=True)
class TridiagonalFactor:
    """Bidiagonal factor: diagonal d, subdiagonal e, and the raw Beta draws.

    raw_c[i-1] = c_i^2 and raw_cp[j-1] = c'_j^2; d and e are derived.
    Arrays are marked read-only after construction.
    """

    diag: np.ndarray
    sub: np.ndarray
    raw_c: np.ndarray
    raw_cp: np.ndarray

    def __post_init__(self):
        for arr in (self.diag, self.sub, self.raw_c, self.raw_cp):
            arr.setflags(write=False)
        n = self.diag.shape[0]
        if self.sub.shape[0] != n - 1 or self.raw_c.shape[0] != n or self.raw_cp.shape[0] != n - 1:
            raise ParameterError("inconsistent factor array lengths")

    @property
    def n(self) -> int:
        return self.diag.shape[0]


@dataclass(frozen=True)
class SymTridiagonal:
    """Symmetric tridiagonal matrix in compact (diag, off) form."""

    diag: np.ndarray
    off: np.ndarray

    def __post_init__(self):
        self.diag.setflags(write=False)
        self.off.setflags(write=False)
        if self.off.shape[0] != self.diag.shape[0] - 1:
            raise ParameterError("off-diagonal must have length n - 1")

    @property
    def n(self) -> int:
        return self.diag.shape[0]


def replicate_stream(seed: int, replicate: int) -> np.random.Generator:
    """Counter-based stream keyed by (seed, replicate index).

    Streams for distinct replicates are independent by construction, so a
    run is bit-reproducible no matter how replicates are scheduled.
    """
    if not (0 <= seed <= _MASK64):
        raise ParameterError(f"seed must fit in 64 bits, got {seed!r}")
    if replicate < 0:
        raise ParameterError(f"replicate index must be nonnegative, got {replicate}")
    key = np.array([seed, replicate & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _beta_draws(shape1: np.ndarray, shape2: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Vectorized Beta draws via the gamma ratio G1/(G1+G2).

    The gamma generator handles shapes < 1 correctly, which matters because
    the first c' shape is beta/2 < 1 whenever beta < 2.
    """
    g1 = rng.standard_gamma(shape1)
    g2 = rng.standard_gamma(shape2)
    total = g1 + g2
    bad = total == 0.0
    while np.any(bad):  # underflow of both gammas; essentially never at these shapes
        g1 = np.where(bad, rng.standard_gamma(shape1), g1)
        g2 = np.where(bad, rng.standard_gamma(shape2), g2)
        total = g1 + g2
        bad = total == 0.0
    return g1 / total


def beta_sample(spec: BetaSpec, rng: np.random.Generator) -> float:
    """One draw from Beta(shape1, shape2)."""
    return float(
        _beta_draws(np.array([spec.shape1]), np.array([spec.shape2]), rng)[0]
    )


def _shape_arrays(params: EnsembleParams):
    n, h = params.n, 0.5 * params.beta
    i = np.arange(1, n + 1, dtype=np.float64)
    j = np.arange(1, n, dtype=np.float64)
    c_shapes = (h * (params.n1 - n + i), h * (params.n2 - n + i))
    cp_shapes = (h * j, h * (params.n1 + params.n2 - 2 * n + 1 + j))
    for arr in (*c_shapes, *cp_shapes):
        if arr.size and arr.min() <= 0:
            raise ParameterError(
                "nonpositive Beta shape; parameters violate n1, n2 > n - 1"
            )
    return c_shapes, cp_shapes


def _build_factor(raw_c: np.ndarray, raw_cp: np.ndarray) -> TridiagonalFactor:
    c = np.sqrt(raw_c)
    s = np.sqrt(1.0 - raw_c)
    cp = np.sqrt(raw_cp)
    sp = np.sqrt(1.0 - raw_cp)
    # row m: d_m = c_{n-m+1} s'_{n-m}, sub in row m+1: -s_{n-m} c'_{n-m}
    diag = c[::-1] * np.concatenate([sp[::-1], [1.0]])
    sub = -s[::-1][1:] * cp[::-1]
    return TridiagonalFactor(diag=diag, sub=sub, raw_c=raw_c, raw_cp=raw_cp)


def sample_factor(params: EnsembleParams, rng: np.random.Generator) -> TridiagonalFactor:
    """Draw the 2n-1 independent Beta variables and lay out the factor."""
    (c1, c2), (p1, p2) = _shape_arrays(params)
    raw_c = _beta_draws(c1, c2, rng)
    raw_cp = _beta_draws(p1, p2, rng)
    return _build_factor(raw_c, raw_cp)


def deterministic_factor(params: EnsembleParams) -> TridiagonalFactor:
    """Factor with every Beta(x, y) draw replaced by its mean x/(x+y)."""
    (c1, c2), (p1, p2) = _shape_arrays(params)
    return _build_factor(c1 / (c1 + c2), p1 / (p1 + p2))


def assemble_gram(factor: TridiagonalFactor) -> SymTridiagonal:
    """Symmetric tridiagonal A = BB^T: A_kk = d_k^2 + e_{k-1}^2, A_{k,k+1} = d_k e_k."""
    d, e = factor.diag, factor.sub
    diag = d * d
    diag = diag + np.concatenate([[0.0], e * e])
    off = d[:-1] * e
    return SymTridiagonal(diag=diag, off=off)


def factor_to_dense(factor: TridiagonalFactor) -> np.ndarray:
    """Dense n x n lower-bidiagonal matrix (test oracle helper)."""
    n = factor.n
    out = np.zeros((n, n))
    out[np.arange(n), np.arange(n)] = factor.diag
    if n > 1:
        out[np.arange(1, n), np.arange(n - 1)] = factor.sub
    return out


def gram_to_dense(gram: SymTridiagonal) -> np.ndarray:
    n = gram.n
    out = np.diag(gram.diag)
    if n > 1:
        idx = np.arange(n - 1)
        out[idx, idx + 1] = gram.off
        out[idx + 1, idx] = gram.off
    return out


def _shifted(arr: np.ndarray, s: int, n: int) -> np.ndarray:
    """out[i] = arr[i + s] where defined, else 0; out has length n."""
    out = np.zeros(n)
    lo = max(0, -s)
    hi = min(n, arr.shape[0] - s)
    if hi > lo:
        out[lo:hi] = arr[lo + s : hi + s]
    return out


def power_traces(gram: SymTridiagonal, kmax: int) -> np.ndarray:
    """Exact traces [tr A, tr A^2, ..., tr A^kmax] by banded multiplication.

    A^j has bandwidth j, so each power costs O(n j) and the whole table
    O(n kmax^2) - far cheaper than an eigendecomposition when only
    polynomial linear statistics are needed.
    """
    if kmax < 1:
        raise ParameterError("kmax must be >= 1")
    n = gram.n
    diag, off = gram.diag, gram.off
    # bands[o][i] = M[i, i + o], zero-padded to full length n
    bands: dict[int, np.ndarray] = {0: diag.copy()}
    if n > 1:
        bands[1] = np.concatenate([off, [0.0]])
        bands[-1] = np.concatenate([[0.0], off])
    traces = np.empty(kmax)
    traces[0] = diag.sum()
    zero = np.zeros(n)
    for j in range(2, kmax + 1):
        new: dict[int, np.ndarray] = {}
        for o in range(-min(j, n - 1), min(j, n - 1) + 1):
            # (MA)[i,i+o] = M[i,i+o-1] off[i+o-1] + M[i,i+o] diag[i+o] + M[i,i+o+1] off[i+o]
            acc = bands.get(o, zero) * _shifted(diag, o, n)
            if n > 1:
                acc = acc + bands.get(o - 1, zero) * _shifted(off, o - 1, n)
                acc = acc + bands.get(o + 1, zero) * _shifted(off, o, n)
            new[o] = acc
        bands = new
        traces[j - 1] = bands[0].sum()
    return traces


def frobenius_gap_sq(f1: TridiagonalFactor, f2: TridiagonalFactor) -> float:
    """Squared Frobenius distance between the two Gram matrices."""
    g1, g2 = assemble_gram(f1), assemble_gram(f2)
    dd = g1.diag - g2.diag
    de = g1.off - g2.off
    return float(dd @ dd + 2.0 * (de @ de))


def dump_factor_csv(factor: TridiagonalFactor, path) -> None:
    """Debug dump: one row per index with raw draws and derived entries."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "raw_c", "raw_cp", "d", "e"])
        n = factor.n
        for i in range(n):
            writer.writerow(
                [
                    i + 1,
                    repr(float(factor.raw_c[i])),
                    repr(float(factor.raw_cp[i])) if i < n - 1 else "",
                    repr(float(factor.diag[i])),
                    repr(float(factor.sub[i])) if i < n - 1 else "",
                ]
            )
