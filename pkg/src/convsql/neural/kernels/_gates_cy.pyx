# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled recurrence-gate kernels; mirrors _gates_np exactly."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, tanh

cnp.import_array()


cdef inline double _sigmoid(double x) nogil:
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    cdef double ex = exp(x)
    return ex / (1.0 + ex)


def lstm_gates_forward(cnp.ndarray[cnp.float64_t, ndim=1] preact,
                       cnp.ndarray[cnp.float64_t, ndim=1] c_prev):
    cdef Py_ssize_t hidden = c_prev.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] i = np.empty(hidden)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] f = np.empty(hidden)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g = np.empty(hidden)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] o = np.empty(hidden)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tanh_c = np.empty(hidden)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] hc = np.empty((2, hidden))
    cdef double c
    cdef Py_ssize_t j
    for j in range(hidden):
        i[j] = _sigmoid(preact[j])
        f[j] = _sigmoid(preact[hidden + j])
        g[j] = tanh(preact[2 * hidden + j])
        o[j] = _sigmoid(preact[3 * hidden + j])
        c = i[j] * g[j] + f[j] * c_prev[j]
        tanh_c[j] = tanh(c)
        hc[0, j] = o[j] * tanh_c[j]
        hc[1, j] = c
    return hc, (i, f, g, o, tanh_c, c_prev)


def lstm_gates_backward(cache, cnp.ndarray[cnp.float64_t, ndim=2] grad_hc):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] i = cache[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] f = cache[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g = cache[2]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] o = cache[3]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tanh_c = cache[4]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] c_prev = cache[5]
    cdef Py_ssize_t hidden = c_prev.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dpreact = np.empty(4 * hidden)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dc_prev = np.empty(hidden)
    cdef double dh, dc
    cdef Py_ssize_t j
    for j in range(hidden):
        dh = grad_hc[0, j]
        dc = grad_hc[1, j] + dh * o[j] * (1.0 - tanh_c[j] * tanh_c[j])
        dpreact[j] = dc * g[j] * i[j] * (1.0 - i[j])
        dpreact[hidden + j] = dc * c_prev[j] * f[j] * (1.0 - f[j])
        dpreact[2 * hidden + j] = dc * i[j] * (1.0 - g[j] * g[j])
        dpreact[3 * hidden + j] = dh * tanh_c[j] * o[j] * (1.0 - o[j])
        dc_prev[j] = dc * f[j]
    return dpreact, dc_prev
