# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled multinomial kernels.

Both functions return amplitudes of the evolved pair state
``(a_out^dag)^l (c_out^dag)^l |0> / l!`` where ``a_out^dag = sum_k row_a[k] o_k^dag``
and ``c_out^dag = sum_k row_c[k] o_k^dag``. The squeeze prefactor is applied by
the caller.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport lgamma, exp, log, fabs, sqrt
from libc.stdlib cimport malloc, free

cnp.import_array()

ctypedef double complex cplx


cdef void _tables(cplx u, int n, double* lpow, cplx* phase) noexcept nogil:
    cdef double mag = sqrt(u.real * u.real + u.imag * u.imag)
    cdef double lm
    cdef cplx unit
    cdef int k
    if mag == 0.0:
        lpow[0] = 0.0
        phase[0] = 1.0
        for k in range(1, n + 1):
            lpow[k] = -1e300
            phase[k] = 0.0
        return
    lm = log(mag)
    unit = u / mag
    phase[0] = 1.0
    lpow[0] = 0.0
    for k in range(1, n + 1):
        lpow[k] = k * lm
        phase[k] = phase[k - 1] * unit


cdef void _row_coefficients(int l, cplx* row, double* lgam, cplx* out) noexcept nogil:
    """Multinomial coefficients of (row . o^dag)^l, ordered by (p1, p2)."""
    cdef double* lp0 = <double*> malloc((l + 1) * sizeof(double))
    cdef double* lp1 = <double*> malloc((l + 1) * sizeof(double))
    cdef double* lp2 = <double*> malloc((l + 1) * sizeof(double))
    cdef cplx* ph0 = <cplx*> malloc((l + 1) * sizeof(cplx))
    cdef cplx* ph1 = <cplx*> malloc((l + 1) * sizeof(cplx))
    cdef cplx* ph2 = <cplx*> malloc((l + 1) * sizeof(cplx))
    cdef int p1, p2, p3, i = 0
    cdef double lg
    _tables(row[0], l, lp0, ph0)
    _tables(row[1], l, lp1, ph1)
    _tables(row[2], l, lp2, ph2)
    for p1 in range(l + 1):
        for p2 in range(l - p1 + 1):
            p3 = l - p1 - p2
            lg = lgam[l] - lgam[p1] - lgam[p2] - lgam[p3] + lp0[p1] + lp1[p2] + lp2[p3]
            if lg < -700.0:
                out[i] = 0.0
            else:
                out[i] = exp(lg) * ph0[p1] * ph1[p2] * ph2[p3]
            i += 1
    free(lp0); free(lp1); free(lp2)
    free(ph0); free(ph1); free(ph2)


def multinomial_block(int l, row_a, row_c):
    """Amplitudes on the total-``2l`` block, flattened in triangle order."""
    cdef int T = 2 * l
    cdef Py_ssize_t size = (T + 1) * (T + 2) // 2
    cdef Py_ssize_t nterms = (l + 1) * (l + 2) // 2
    cdef cplx ra[3]
    cdef cplx rc[3]
    cdef int k
    for k in range(3):
        ra[k] = row_a[k]
        rc[k] = row_c[k]

    cdef double[::1] lgam = np.empty(T + 1)
    for k in range(T + 1):
        lgam[k] = lgamma(k + 1.0)

    cdef cplx[::1] A = np.empty(nterms, dtype=np.complex128)
    cdef cplx[::1] B = np.empty(nterms, dtype=np.complex128)
    _row_coefficients(l, ra, &lgam[0], &A[0])
    _row_coefficients(l, rc, &lgam[0], &B[0])

    # Neumaier-compensated accumulators, real and imaginary parts separately
    cdef double[::1] sre = np.zeros(size)
    cdef double[::1] cre = np.zeros(size)
    cdef double[::1] sim = np.zeros(size)
    cdef double[::1] cim = np.zeros(size)

    cdef int p1, p2, q1, q2, v1, v2, i, j
    cdef Py_ssize_t idx
    cdef cplx a, term
    cdef double x, s, t
    with nogil:
        i = 0
        for p1 in range(l + 1):
            for p2 in range(l - p1 + 1):
                a = A[i]
                i += 1
                if a == 0.0:
                    continue
                j = 0
                for q1 in range(l + 1):
                    v1 = p1 + q1
                    for q2 in range(l - q1 + 1):
                        term = a * B[j]
                        j += 1
                        v2 = p2 + q2
                        idx = v1 * (T + 1) - (v1 * (v1 - 1)) // 2 + v2
                        x = term.real
                        s = sre[idx]
                        t = s + x
                        if fabs(s) >= fabs(x):
                            cre[idx] += (s - t) + x
                        else:
                            cre[idx] += (x - t) + s
                        sre[idx] = t
                        x = term.imag
                        s = sim[idx]
                        t = s + x
                        if fabs(s) >= fabs(x):
                            cim[idx] += (s - t) + x
                        else:
                            cim[idx] += (x - t) + s
                        sim[idx] = t

    out = np.empty(size, dtype=np.complex128)
    cdef cplx[::1] o = out
    cdef double scale
    with nogil:
        for v1 in range(T + 1):
            for v2 in range(T - v1 + 1):
                idx = v1 * (T + 1) - (v1 * (v1 - 1)) // 2 + v2
                scale = exp(0.5 * (lgam[v1] + lgam[v2] + lgam[T - v1 - v2]) - lgam[l])
                o[idx] = ((sre[idx] + cre[idx]) + 1j * (sim[idx] + cim[idx])) * scale
    return out


def multinomial_slice(int l, int nb, row_a, row_c):
    """Amplitudes with exactly ``nb`` photons in mode b, indexed by n_a.

    Length ``2l - nb + 1``; n_c is fixed by conservation. Empty when ``nb > 2l``.
    """
    cdef int T = 2 * l
    if nb < 0 or nb > T:
        return np.zeros(0, dtype=np.complex128)
    cdef int width = T - nb + 1
    cdef cplx ra[3]
    cdef cplx rc[3]
    cdef int k
    for k in range(3):
        ra[k] = row_a[k]
        rc[k] = row_c[k]
    cdef double[::1] lgam = np.empty(T + 1)
    for k in range(T + 1):
        lgam[k] = lgamma(k + 1.0)
    cdef Py_ssize_t nterms = (l + 1) * (l + 2) // 2
    cdef cplx[::1] A = np.empty(nterms, dtype=np.complex128)
    cdef cplx[::1] B = np.empty(nterms, dtype=np.complex128)
    _row_coefficients(l, ra, &lgam[0], &A[0])
    _row_coefficients(l, rc, &lgam[0], &B[0])

    # offsets into the (p1, p2) ordering
    cdef Py_ssize_t[::1] off = np.empty(l + 2, dtype=np.intp)
    off[0] = 0
    for k in range(l + 1):
        off[k + 1] = off[k] + (l - k + 1)

    cdef double[::1] sre = np.zeros(width)
    cdef double[::1] cre = np.zeros(width)
    cdef double[::1] sim = np.zeros(width)
    cdef double[::1] cim = np.zeros(width)
    cdef int p1, p2, q1, q2, v1
    cdef cplx a, term
    cdef double x, s, t
    with nogil:
        for p2 in range(nb + 1):
            q2 = nb - p2
            if p2 > l or q2 > l:
                continue
            for p1 in range(l - p2 + 1):
                a = A[off[p1] + p2]
                if a == 0.0:
                    continue
                for q1 in range(l - q2 + 1):
                    term = a * B[off[q1] + q2]
                    v1 = p1 + q1
                    x = term.real
                    s = sre[v1]
                    t = s + x
                    if fabs(s) >= fabs(x):
                        cre[v1] += (s - t) + x
                    else:
                        cre[v1] += (x - t) + s
                    sre[v1] = t
                    x = term.imag
                    s = sim[v1]
                    t = s + x
                    if fabs(s) >= fabs(x):
                        cim[v1] += (s - t) + x
                    else:
                        cim[v1] += (x - t) + s
                    sim[v1] = t

    out = np.empty(width, dtype=np.complex128)
    cdef cplx[::1] o = out
    cdef double scale
    for v1 in range(width):
        scale = exp(0.5 * (lgam[v1] + lgam[nb] + lgam[T - nb - v1]) - lgam[l])
        o[v1] = ((sre[v1] + cre[v1]) + 1j * (sim[v1] + cim[v1])) * scale
    return out
