"""NumPy implementation of banded LU with partial pivoting, kl = ku = 2.

Factorisation and substitution are vectorised across the leading "system"
axis (one pentadiagonal system per tangential mode), so the per-time-step
cost is a single O(n) sweep of small array operations rather than a Python
loop over modes.

Storage convention (LAPACK-style general band):

* unfactored operator: ``ab5[2 + i - j, j] = A[i, j]``, shape (M, 5, n);
* factor workspace:    ``ab7[4 + i - j, j]``, shape (M, 7, n) - rows 0..1
  hold fill-in created by pivoting, rows 5..6 hold the multipliers of L.

Pivot rows are swapped over the uniform column window ``k..k+4``; entries
beyond a system's true fill are zero on both rows, so the extra swaps are
no-ops and the algorithm stays equivalent to the classical banded LU.
"""

from __future__ import annotations

import numpy as np

KL = 2
KU = 2


def factor_inplace(ab7: np.ndarray, ipiv: np.ndarray) -> tuple[int, int]:
    """LU-factor every system in ``ab7`` in place.

    Returns (-1, -1) on success, else (system, column) of the first zero
    pivot encountered.
    """
    M, rows, n = ab7.shape
    if rows != KL + KU + KL + 1:
        raise ValueError("factor storage must have 7 rows")
    sysidx = np.arange(M)
    for k in range(n):
        km = min(KL, n - 1 - k)
        cand = np.abs(ab7[:, KL + KU : KL + KU + km + 1, k])
        jp = np.argmax(cand, axis=1)
        piv = ab7[sysidx, KL + KU + jp, k]
        if np.any(piv == 0.0):
            bad = int(np.nonzero(piv == 0.0)[0][0])
            return bad, k
        for j in range(k, min(k + KL + KU, n - 1) + 1):
            r1 = KL + KU + k - j
            r2 = KL + KU + k - j + jp
            a = ab7[sysidx, r1, j].copy()
            ab7[sysidx, r1, j] = ab7[sysidx, r2, j]
            ab7[sysidx, r2, j] = a
        ipiv[:, k] = k + jp
        pivot = ab7[:, KL + KU, k]
        for t in range(1, km + 1):
            ab7[:, KL + KU + t, k] /= pivot
        for j in range(k + 1, min(k + KL + KU, n - 1) + 1):
            f = ab7[:, KL + KU + k - j, j]
            for t in range(1, km + 1):
                ab7[:, KL + KU + k + t - j, j] -= ab7[:, KL + KU + t, k] * f
    return -1, -1


def solve_inplace(ab7: np.ndarray, ipiv: np.ndarray, b: np.ndarray) -> None:
    """Solve every factored system against ``b`` (M, n, nrhs) in place."""
    M, _, n = ab7.shape
    sysidx = np.arange(M)
    for k in range(n - 1):
        pk = ipiv[:, k]
        bk = b[sysidx, k, :]
        bp = b[sysidx, pk, :]
        b[sysidx, k, :] = bp
        b[sysidx, pk, :] = bk
        km = min(KL, n - 1 - k)
        for t in range(1, km + 1):
            b[:, k + t, :] -= ab7[:, KL + KU + t, k, None] * b[:, k, :]
    for k in range(n - 1, -1, -1):
        for d in range(1, min(KL + KU, n - 1 - k) + 1):
            b[:, k, :] -= ab7[:, KL + KU - d, k + d, None] * b[:, k + d, :]
        b[:, k, :] /= ab7[:, KL + KU, k, None]
