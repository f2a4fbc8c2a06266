"""Pentadiagonal solver kernels with a compiled core and a NumPy fallback.

The compiled Cython extension ``_pentalu`` is preferred when it imported
successfully at build time; otherwise the pure-NumPy implementation in
:mod:`degenlab.kernels.pylu` is used.  Both implement the same banded LU
with partial pivoting and are interchangeable (see tests and the benchmark
under ``benchmarks/``).

Band layout for the unfactored operator follows ``scipy.linalg.solve_banded``
with ``(kl, ku) = (2, 2)``: ``ab5[2 + i - j, j] = A[i, j]``, stacked along a
leading per-system axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import pylu

try:  # pragma: no cover - exercised implicitly by the chosen backend
    from . import _pentalu as _compiled
except ImportError:  # pragma: no cover
    _compiled = None

_impl = _compiled if _compiled is not None else pylu

KL = pylu.KL
KU = pylu.KU


def backend_name() -> str:
    return "compiled" if _impl is _compiled else "numpy"


class SingularBandError(RuntimeError):
    """A banded factorisation hit an exactly-zero pivot."""

    def __init__(self, system: int, column: int):
        self.system = system
        self.column = column
        super().__init__(
            f"singular pentadiagonal system {system}: zero pivot at column {column}"
        )


@dataclass(frozen=True, eq=False)
class BandedFactorization:
    """Stacked banded LU factors plus pivot indices."""

    ab7: np.ndarray
    ipiv: np.ndarray

    @property
    def n(self) -> int:
        return self.ab7.shape[2]

    @property
    def systems(self) -> int:
        return self.ab7.shape[0]


def _expand_storage(ab5: np.ndarray) -> np.ndarray:
    M, rows, n = ab5.shape
    if rows != KL + KU + 1:
        raise ValueError("operator bands must have 5 rows")
    ab7 = np.zeros((M, 2 * KL + KU + 1, n), dtype=np.float64)
    ab7[:, KL:, :] = ab5
    return ab7


def factor(ab5: np.ndarray, impl=None) -> BandedFactorization:
    """Factor a stack of pentadiagonal systems given in 5-row band storage."""
    impl = impl or _impl
    ab5 = np.ascontiguousarray(ab5, dtype=np.float64)
    if ab5.ndim == 2:
        ab5 = ab5[None]
    ab7 = _expand_storage(ab5)
    ipiv = np.zeros(ab7.shape[::2], dtype=np.int64)
    bad_sys, bad_col = impl.factor_inplace(ab7, ipiv)
    if bad_sys >= 0:
        raise SingularBandError(int(bad_sys), int(bad_col))
    return BandedFactorization(ab7, ipiv)


def solve(fact: BandedFactorization, rhs: np.ndarray, impl=None) -> np.ndarray:
    """Solve the factored systems; ``rhs`` has shape (M, n) or (M, n, nrhs)."""
    impl = impl or _impl
    squeeze = rhs.ndim == 2
    b = np.array(rhs, dtype=np.float64, copy=True, order="C")
    if squeeze:
        b = b[:, :, None]
    if b.shape[:2] != (fact.systems, fact.n):
        raise ValueError(f"rhs shape {rhs.shape} does not match factorization")
    impl.solve_inplace(fact.ab7, fact.ipiv, b)
    return b[:, :, 0] if squeeze else b


def band_matvec(ab5: np.ndarray, x: np.ndarray) -> np.ndarray:
    """y[m] = A[m] @ x[m] for stacked 5-row band storage."""
    M, _, n = ab5.shape
    y = np.zeros((M, n), dtype=np.result_type(ab5, x))
    for d in range(-KL, KU + 1):
        i0, i1 = max(0, -d), n - max(0, d)
        if i1 > i0:
            y[:, i0:i1] += ab5[:, KU - d, i0 + d : i1 + d] * x[:, i0 + d : i1 + d]
    return y
