# cython: language_level=3
"""Compiled allocation loop.

Bit-compatible with ``uniband._kernel_py``: same libm calls, same
operation order, same tie-breaking (first maximal arm wins).
"""
import numpy as np

from libc.math cimport exp, log, sqrt, INFINITY
from libc.stdlib cimport malloc, free
from libc.stdint cimport int64_t

DEF UCB_UNIFORM = 0
DEF BK = 1
DEF CHK_NORMAL = 2
DEF KR = 3


cdef inline double _index(int kind, double logn, int64_t t, double v, double w,
                          double mean, double m2) noexcept nogil:
    if kind == UCB_UNIFORM:
        return v + 0.5 * (w - v) * exp(logn / (t - 2))
    elif kind == BK:
        return v + 0.5 * (w - v) * exp(logn / t)
    elif kind == CHK_NORMAL:
        return mean + sqrt(m2 / t) * sqrt(exp(2.0 * logn / (t - 2)) - 1.0)
    else:
        return mean + sqrt(m2 / t) * sqrt(2.0 * logn / t)


cdef void _run_one(int kind, int64_t init_rounds, const double[:, ::1] samples,
                   const int64_t[::1] checkpoints, int64_t[:, ::1] out,
                   int64_t* t, double* vmin, double* wmax, double* mean,
                   double* m2) noexcept nogil:
    cdef Py_ssize_t n_arms = samples.shape[0]
    cdef Py_ssize_t horizon = samples.shape[1]
    cdef Py_ssize_t n_cp = checkpoints.shape[0]
    cdef Py_ssize_t init_steps = init_rounds * n_arms
    cdef Py_ssize_t step, i, arm, c = 0
    cdef double logn, best, u, x, d
    cdef int64_t tt

    for i in range(n_arms):
        t[i] = 0
        vmin[i] = INFINITY
        wmax[i] = -INFINITY
        mean[i] = 0.0
        m2[i] = 0.0

    for step in range(horizon):
        if step < init_steps:
            arm = step % n_arms
        else:
            logn = log(<double>step)
            arm = 0
            best = _index(kind, logn, t[0], vmin[0], wmax[0], mean[0], m2[0])
            for i in range(1, n_arms):
                u = _index(kind, logn, t[i], vmin[i], wmax[i], mean[i], m2[i])
                if u > best:
                    best = u
                    arm = i
        x = samples[arm, t[arm]]
        tt = t[arm] + 1
        t[arm] = tt
        if x < vmin[arm]:
            vmin[arm] = x
        if x > wmax[arm]:
            wmax[arm] = x
        d = x - mean[arm]
        mean[arm] = mean[arm] + d / tt
        m2[arm] = m2[arm] + d * (x - mean[arm])
        if c < n_cp and step + 1 == checkpoints[c]:
            for i in range(n_arms):
                out[c, i] = t[i]
            c += 1


def simulate_batch(int kind, int64_t init_rounds, const double[:, :, ::1] samples,
                   const int64_t[::1] checkpoints):
    """Run ``R`` independent replications; returns pull counts ``(R, C, N)``."""
    cdef Py_ssize_t n_reps = samples.shape[0]
    cdef Py_ssize_t n_arms = samples.shape[1]
    cdef Py_ssize_t r
    result = np.zeros((n_reps, checkpoints.shape[0], n_arms), dtype=np.int64)
    cdef int64_t[:, :, ::1] out = result
    cdef int64_t* t = <int64_t*>malloc(n_arms * sizeof(int64_t))
    cdef double* buf = <double*>malloc(4 * n_arms * sizeof(double))
    if t == NULL or buf == NULL:
        free(t)
        free(buf)
        raise MemoryError()
    try:
        with nogil:
            for r in range(n_reps):
                _run_one(kind, init_rounds, samples[r], checkpoints, out[r], t,
                         buf, buf + n_arms, buf + 2 * n_arms, buf + 3 * n_arms)
    finally:
        free(t)
        free(buf)
    return result
