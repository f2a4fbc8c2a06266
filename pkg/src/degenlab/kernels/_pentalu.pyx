# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled banded LU with partial pivoting for stacks of pentadiagonal
systems (kl = ku = 2), one system per tangential mode.

Same storage convention and algorithm as the NumPy fallback in ``pylu``:
``ab7[4 + i - j, j]`` holds A[i, j], rows 0..1 are pivoting fill-in, rows
5..6 store the multipliers of L.  Row swaps use the uniform column window
``k..k+4``; out-of-fill entries are zero on both rows so the result matches
the classical banded factorisation exactly.
"""

from libc.stdint cimport int64_t


DEF KL = 2
DEF KU = 2


def factor_inplace(double[:, :, ::1] ab7, int64_t[:, ::1] ipiv):
    """LU-factor each system in place; returns (-1, -1) on success or the
    (system, column) of the first exactly-zero pivot."""
    cdef Py_ssize_t M = ab7.shape[0]
    cdef Py_ssize_t n = ab7.shape[2]
    cdef Py_ssize_t m, k, j, t, km, jp, jmax
    cdef double piv, best, mag, f, tmp

    if ab7.shape[1] != KL + KU + KL + 1:
        raise ValueError("factor storage must have 7 rows")

    for m in range(M):
        for k in range(n):
            km = KL if (n - 1 - k) > KL else (n - 1 - k)
            jp = 0
            best = ab7[m, KL + KU, k]
            if best < 0:
                best = -best
            for t in range(1, km + 1):
                mag = ab7[m, KL + KU + t, k]
                if mag < 0:
                    mag = -mag
                if mag > best:
                    best = mag
                    jp = t
            piv = ab7[m, KL + KU + jp, k]
            if piv == 0.0:
                return m, k
            ipiv[m, k] = k + jp
            if jp != 0:
                jmax = k + KL + KU
                if jmax > n - 1:
                    jmax = n - 1
                for j in range(k, jmax + 1):
                    tmp = ab7[m, KL + KU + k - j, j]
                    ab7[m, KL + KU + k - j, j] = ab7[m, KL + KU + k - j + jp, j]
                    ab7[m, KL + KU + k - j + jp, j] = tmp
            piv = ab7[m, KL + KU, k]
            for t in range(1, km + 1):
                ab7[m, KL + KU + t, k] /= piv
            jmax = k + KL + KU
            if jmax > n - 1:
                jmax = n - 1
            for j in range(k + 1, jmax + 1):
                f = ab7[m, KL + KU + k - j, j]
                if f != 0.0:
                    for t in range(1, km + 1):
                        ab7[m, KL + KU + k + t - j, j] -= ab7[m, KL + KU + t, k] * f
    return -1, -1


def solve_inplace(double[:, :, ::1] ab7, int64_t[:, ::1] ipiv, double[:, :, ::1] b):
    """Forward/back substitution for each factored system, in place on
    ``b`` of shape (systems, n, nrhs)."""
    cdef Py_ssize_t M = ab7.shape[0]
    cdef Py_ssize_t n = ab7.shape[2]
    cdef Py_ssize_t nrhs = b.shape[2]
    cdef Py_ssize_t m, k, t, d, r, km, dmax, pk
    cdef double tmp, mult, piv

    for m in range(M):
        for k in range(n - 1):
            pk = ipiv[m, k]
            if pk != k:
                for r in range(nrhs):
                    tmp = b[m, k, r]
                    b[m, k, r] = b[m, pk, r]
                    b[m, pk, r] = tmp
            km = KL if (n - 1 - k) > KL else (n - 1 - k)
            for t in range(1, km + 1):
                mult = ab7[m, KL + KU + t, k]
                if mult != 0.0:
                    for r in range(nrhs):
                        b[m, k + t, r] -= mult * b[m, k, r]
        for k in range(n - 1, -1, -1):
            dmax = KL + KU if (n - 1 - k) > KL + KU else (n - 1 - k)
            for d in range(1, dmax + 1):
                mult = ab7[m, KL + KU - d, k + d]
                if mult != 0.0:
                    for r in range(nrhs):
                        b[m, k, r] -= mult * b[m, k + d, r]
            piv = ab7[m, KL + KU, k]
            for r in range(nrhs):
                b[m, k, r] /= piv
