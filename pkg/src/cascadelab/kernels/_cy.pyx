# Compiled twin of cascadelab.kernels.pyref. Same signatures, fused loops.
# Inputs are taken as const memoryviews: field coefficient arrays are
# published read-only and must stay untouched.

import numpy as np

BACKEND = "cy"

ctypedef double complex cplx


def vorticity_to_velocity(const cplx[:, ::1] omega_hat,
                          const cplx[:, ::1] fx,
                          const cplx[:, ::1] fy):
    cdef Py_ssize_t n0 = omega_hat.shape[0], n1 = omega_hat.shape[1]
    ux_arr = np.empty((n0, n1), dtype=np.complex128)
    uy_arr = np.empty((n0, n1), dtype=np.complex128)
    cdef cplx[:, ::1] ux = ux_arr
    cdef cplx[:, ::1] uy = uy_arr
    cdef Py_ssize_t i, j
    cdef cplx w
    for i in range(n0):
        for j in range(n1):
            w = omega_hat[i, j]
            ux[i, j] = fx[i, j] * w
            uy[i, j] = fy[i, j] * w
    return ux_arr, uy_arr


def advect_scalar_2d(const double[:, ::1] ux, const double[:, ::1] uy,
                     const double[:, ::1] sx, const double[:, ::1] sy):
    cdef Py_ssize_t n0 = ux.shape[0], n1 = ux.shape[1]
    w_arr = np.empty((n0, n1), dtype=np.float64)
    cdef double[:, ::1] w = w_arr
    cdef Py_ssize_t i, j
    for i in range(n0):
        for j in range(n1):
            w[i, j] = ux[i, j] * sx[i, j] + uy[i, j] * sy[i, j]
    return w_arr


def advect_scalar_3d(const double[:, :, ::1] ux, const double[:, :, ::1] uy,
                     const double[:, :, ::1] uz, const double[:, :, ::1] sx,
                     const double[:, :, ::1] sy, const double[:, :, ::1] sz):
    cdef Py_ssize_t n0 = ux.shape[0], n1 = ux.shape[1], n2 = ux.shape[2]
    w_arr = np.empty((n0, n1, n2), dtype=np.float64)
    cdef double[:, :, ::1] w = w_arr
    cdef Py_ssize_t i, j, k
    for i in range(n0):
        for j in range(n1):
            for k in range(n2):
                w[i, j, k] = (ux[i, j, k] * sx[i, j, k]
                              + uy[i, j, k] * sy[i, j, k]
                              + uz[i, j, k] * sz[i, j, k])
    return w_arr


def max_speed_2d(const double[:, ::1] ux, const double[:, ::1] uy):
    cdef Py_ssize_t n0 = ux.shape[0], n1 = ux.shape[1]
    cdef double best = 0.0, s
    cdef Py_ssize_t i, j
    for i in range(n0):
        for j in range(n1):
            s = ux[i, j] * ux[i, j] + uy[i, j] * uy[i, j]
            if s > best:
                best = s
    return float(best ** 0.5)


def max_speed_3d(const double[:, :, ::1] ux, const double[:, :, ::1] uy,
                 const double[:, :, ::1] uz):
    cdef Py_ssize_t n0 = ux.shape[0], n1 = ux.shape[1], n2 = ux.shape[2]
    cdef double best = 0.0, s
    cdef Py_ssize_t i, j, k
    for i in range(n0):
        for j in range(n1):
            for k in range(n2):
                s = (ux[i, j, k] * ux[i, j, k] + uy[i, j, k] * uy[i, j, k]
                     + uz[i, j, k] * uz[i, j, k])
                if s > best:
                    best = s
    return float(best ** 0.5)


def _as_flat_cplx(arr):
    return np.ascontiguousarray(arr, dtype=np.complex128).reshape(-1)


def heun_predict(base, decay, rhs, double dt):
    shape = np.asarray(base).shape
    cdef const cplx[::1] b = _as_flat_cplx(base)
    cdef const double[::1] e = np.ascontiguousarray(decay, dtype=np.float64).reshape(-1)
    cdef const cplx[::1] r = _as_flat_cplx(rhs)
    cdef Py_ssize_t n = b.shape[0], i
    out_arr = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] out = out_arr
    for i in range(n):
        out[i] = e[i] * (b[i] + dt * r[i])
    return out_arr.reshape(shape)


def heun_correct(base, decay, rhs0, rhs1, double dt):
    shape = np.asarray(base).shape
    cdef const cplx[::1] b = _as_flat_cplx(base)
    cdef const double[::1] e = np.ascontiguousarray(decay, dtype=np.float64).reshape(-1)
    cdef const cplx[::1] r0 = _as_flat_cplx(rhs0)
    cdef const cplx[::1] r1 = _as_flat_cplx(rhs1)
    cdef Py_ssize_t n = b.shape[0], i
    cdef double half = 0.5 * dt
    out_arr = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] out = out_arr
    for i in range(n):
        out[i] = e[i] * b[i] + half * (e[i] * r0[i] + r1[i])
    return out_arr.reshape(shape)


def shell_sums(weights, shell_index, Py_ssize_t n_shells):
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64).reshape(-1)
    cdef const long long[::1] idx = np.ascontiguousarray(shell_index, dtype=np.int64).reshape(-1)
    out_arr = np.zeros(n_shells, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t n = w.shape[0], i
    cdef long long m
    for i in range(n):
        m = idx[i]
        if 0 <= m < n_shells:
            out[m] += w[i]
    return out_arr
