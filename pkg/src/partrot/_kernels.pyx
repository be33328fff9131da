# cython: language_level=3
"""Compiled ansatz kernels; same API and layout as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin
from libc.string cimport memcpy

cnp.import_array()

ctypedef double complex cplx

cdef inline cplx _expi(double x) noexcept nogil:
    return cos(x) + 1j * sin(x)


cdef inline void _u3_fill(double th, double ph, double la, cplx* u, cplx* d) noexcept nogil:
    # u: 4 entries row-major; d: 3 x 4 entries (d/dtheta, d/dphi, d/dlam)
    cdef double c = cos(th / 2), s = sin(th / 2)
    cdef cplx el = _expi(la), ep = _expi(ph), epl = _expi(ph + la)
    u[0] = c
    u[1] = -el * s
    u[2] = ep * s
    u[3] = epl * c
    d[0] = -s / 2
    d[1] = -el * c / 2
    d[2] = ep * c / 2
    d[3] = -epl * s / 2
    d[4] = 0
    d[5] = 0
    d[6] = 1j * ep * s
    d[7] = 1j * epl * c
    d[8] = 0
    d[9] = -1j * el * s
    d[10] = 0
    d[11] = 1j * epl * c


cdef inline void _left(cplx* m, const cplx* g, int bit, int dim) noexcept nogil:
    # m <- (g on the qubit owning ``bit``) @ m, row-major dim x dim
    cdef int i, j, i1
    cdef int stride = 1 << bit
    cdef cplx a, b
    cdef cplx* r0
    cdef cplx* r1
    for i in range(dim):
        if i & stride:
            continue
        i1 = i | stride
        r0 = m + i * dim
        r1 = m + i1 * dim
        for j in range(dim):
            a = r0[j]
            b = r1[j]
            r0[j] = g[0] * a + g[1] * b
            r1[j] = g[2] * a + g[3] * b


cdef inline void _right(cplx* m, const cplx* g, int bit, int dim) noexcept nogil:
    # m <- m @ (g on the qubit owning ``bit``)
    cdef int r, j, j1
    cdef int stride = 1 << bit
    cdef cplx a, b
    cdef cplx* row
    for r in range(dim):
        row = m + r * dim
        for j in range(dim):
            if j & stride:
                continue
            j1 = j | stride
            a = row[j]
            b = row[j1]
            row[j] = a * g[0] + b * g[2]
            row[j1] = a * g[1] + b * g[3]


cdef inline void _cx_rows(cplx* m, int cb, int tb, int dim) noexcept nogil:
    cdef int i, j
    cdef cplx tmp
    cdef cplx* r0
    cdef cplx* r1
    for i in range(dim):
        if (i & cb) and not (i & tb):
            r0 = m + i * dim
            r1 = m + (i | tb) * dim
            for j in range(dim):
                tmp = r0[j]
                r0[j] = r1[j]
                r1[j] = tmp


cdef inline void _cx_cols(cplx* m, int cb, int tb, int dim) noexcept nogil:
    cdef int r, j
    cdef cplx tmp
    cdef cplx* row
    for r in range(dim):
        row = m + r * dim
        for j in range(dim):
            if (j & cb) and not (j & tb):
                tmp = row[j]
                row[j] = row[j | tb]
                row[j | tb] = tmp


cdef inline void _eye(cplx* m, int dim) noexcept nogil:
    cdef int i
    for i in range(dim * dim):
        m[i] = 0
    for i in range(dim):
        m[i * dim + i] = 1


cdef inline void _matmul(const cplx* a, const cplx* b, cplx* out, int dim) noexcept nogil:
    cdef int i, j, l
    cdef cplx acc
    cdef const cplx* arow
    for i in range(dim):
        arow = a + i * dim
        for j in range(dim):
            out[i * dim + j] = 0
        for l in range(dim):
            acc = arow[l]
            if acc == 0:
                continue
            for j in range(dim):
                out[i * dim + j] += acc * b[l * dim + j]


def _prepare(int k, cnots, params):
    cdef cnp.ndarray[cnp.int32_t, ndim=2] cx = np.ascontiguousarray(np.asarray(cnots, dtype=np.int32).reshape(-1, 2))
    cdef cnp.ndarray[double, ndim=1] p = np.ascontiguousarray(np.asarray(params, dtype=np.float64).ravel())
    cdef int nu = k + 2 * cx.shape[0]
    if p.shape[0] != 3 * nu:
        raise ValueError(f"expected {3 * nu} parameters, got {p.shape[0]}")
    return cx, p, nu


def ansatz_unitary(int k, cnots, params):
    cx, p, nu = _prepare(k, cnots, params)
    cdef int[:, ::1] cxv = cx
    cdef double[::1] pv = p
    cdef int dim = 1 << k
    cdef int L = cxv.shape[0]
    cdef cnp.ndarray[cplx, ndim=2] out = np.empty((dim, dim), dtype=np.complex128)
    cdef cplx* m = <cplx*> out.data
    cdef cplx u[4]
    cdef cplx d[12]
    cdef int q, l, c, t
    with nogil:
        _eye(m, dim)
        for q in range(k):
            _u3_fill(pv[3 * q], pv[3 * q + 1], pv[3 * q + 2], u, d)
            _left(m, u, k - 1 - q, dim)
        for l in range(L):
            c = cxv[l, 0]
            t = cxv[l, 1]
            _cx_rows(m, 1 << (k - 1 - c), 1 << (k - 1 - t), dim)
            q = k + 2 * l
            _u3_fill(pv[3 * q], pv[3 * q + 1], pv[3 * q + 2], u, d)
            _left(m, u, k - 1 - c, dim)
            q += 1
            _u3_fill(pv[3 * q], pv[3 * q + 1], pv[3 * q + 2], u, d)
            _left(m, u, k - 1 - t, dim)
    return out


def ansatz_jacobian(int k, cnots, params):
    cx, p, nu_obj = _prepare(k, cnots, params)
    cdef int nu = nu_obj
    cdef int[:, ::1] cxv = cx
    cdef double[::1] pv = p
    cdef int dim = 1 << k
    cdef int dd = dim * dim
    cdef int L = cxv.shape[0]
    cdef int i, j, l, step, nsteps = k + 3 * L
    cdef cnp.ndarray[cplx, ndim=2] full = np.empty((dim, dim), dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=3] dc = np.empty((3 * nu, dim, dim), dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=3] before = np.empty((nu, dim, dim), dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=3] after = np.empty((nu, dim, dim), dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=2] us = np.empty((nu, 4), dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=2] ds = np.empty((nu, 12), dtype=np.complex128)
    cdef cnp.ndarray[int, ndim=1] qubit = np.empty(nu, dtype=np.int32)
    cdef cnp.ndarray[cplx, ndim=2] work = np.empty((dim, dim), dtype=np.complex128)
    cdef cplx* m = <cplx*> full.data
    cdef cplx* bf = <cplx*> before.data
    cdef cplx* af = <cplx*> after.data
    cdef cplx* up = <cplx*> us.data
    cdef cplx* dp = <cplx*> ds.data
    cdef cplx* dcp = <cplx*> dc.data
    cdef cplx* w = <cplx*> work.data
    cdef int* qp = <int*> qubit.data
    cdef int kind, idx, c, t
    with nogil:
        for i in range(k):
            qp[i] = i
        for l in range(L):
            qp[k + 2 * l] = cxv[l, 0]
            qp[k + 2 * l + 1] = cxv[l, 1]
        for i in range(nu):
            _u3_fill(pv[3 * i], pv[3 * i + 1], pv[3 * i + 2], up + 4 * i, dp + 12 * i)

        # forward: prefix products before each U3
        _eye(m, dim)
        for step in range(nsteps):
            if step < k:
                idx = step
                kind = 0
            else:
                l = (step - k) // 3
                j = (step - k) % 3
                if j == 0:
                    kind = 1
                else:
                    kind = 0
                    idx = k + 2 * l + (j - 1)
            if kind == 0:
                memcpy(bf + idx * dd, m, dd * sizeof(cplx))
                _left(m, up + 4 * idx, k - 1 - qp[idx], dim)
            else:
                _cx_rows(m, 1 << (k - 1 - cxv[l, 0]), 1 << (k - 1 - cxv[l, 1]), dim)

        # backward: suffix products after each U3
        _eye(w, dim)
        for step in range(nsteps - 1, -1, -1):
            if step < k:
                idx = step
                kind = 0
            else:
                l = (step - k) // 3
                j = (step - k) % 3
                if j == 0:
                    kind = 1
                else:
                    kind = 0
                    idx = k + 2 * l + (j - 1)
            if kind == 0:
                memcpy(af + idx * dd, w, dd * sizeof(cplx))
                _right(w, up + 4 * idx, k - 1 - qp[idx], dim)
            else:
                _cx_cols(w, 1 << (k - 1 - cxv[l, 0]), 1 << (k - 1 - cxv[l, 1]), dim)

        # dC/dp = after[i] @ (dU on q_i) @ before[i]
        for i in range(nu):
            for j in range(3):
                memcpy(w, bf + i * dd, dd * sizeof(cplx))
                _left(w, dp + 12 * i + 4 * j, k - 1 - qp[i], dim)
                _matmul(af + i * dd, w, dcp + (3 * i + j) * dd, dim)
    return full, dc
