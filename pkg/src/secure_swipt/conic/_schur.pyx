# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Schur-complement assembly for PSD cone blocks.

For every PSD block with scaling P = (R R^T)^{-1} and sparse symmetric
column matrices G_a, accumulates H[a, b] += tr(G_a P G_b P) over the
block's active columns.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def schur_psd_accumulate(double[:, ::1] H,
                         const double[::1] P,
                         const Py_ssize_t[::1] p_off,
                         const Py_ssize_t[::1] nsize,
                         const Py_ssize_t[::1] cptr,
                         const Py_ssize_t[::1] colidx,
                         const Py_ssize_t[::1] tptr,
                         const Py_ssize_t[::1] trow,
                         const Py_ssize_t[::1] tcol,
                         const double[::1] tval):
    cdef Py_ssize_t nblocks = nsize.shape[0]
    cdef Py_ssize_t maxn = 0
    cdef Py_ssize_t b
    for b in range(nblocks):
        if nsize[b] > maxn:
            maxn = nsize[b]
    cdef double[::1] Y = np.zeros(maxn * maxn)
    cdef Py_ssize_t n, po, a1, a2, e, i, j, p, q, g1, g2
    cdef double v, pi, acc
    with nogil:
        for b in range(nblocks):
            n = nsize[b]
            po = p_off[b]
            for a2 in range(cptr[b], cptr[b + 1]):
                for i in range(n * n):
                    Y[i] = 0.0
                # Y = P G_a2 P
                for e in range(tptr[a2], tptr[a2 + 1]):
                    v = tval[e]
                    p = trow[e]
                    q = tcol[e]
                    for i in range(n):
                        pi = v * P[po + i * n + p]
                        if pi != 0.0:
                            for j in range(n):
                                Y[i * n + j] += pi * P[po + q * n + j]
                g2 = colidx[a2]
                for a1 in range(cptr[b], a2 + 1):
                    acc = 0.0
                    for e in range(tptr[a1], tptr[a1 + 1]):
                        acc += tval[e] * Y[tcol[e] * n + trow[e]]
                    g1 = colidx[a1]
                    H[g1, g2] += acc
                    if g1 != g2:
                        H[g2, g1] += acc
