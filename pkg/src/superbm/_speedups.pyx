# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Event-driven branching Brownian motion kernels.

Each particle carries an exponential branching clock (rate ``rate``); at a
branching event it leaves two offspring with probability ``p2``, else none.
Free coordinates diffuse exactly between events.  Orthant coordinates are
additionally capped at the ``dt`` grid and killed by exact Brownian-bridge
crossing acceptance against the boundary at 0, so the sampled endpoint law
matches the method-of-images kernel segment by segment.

The offspring coin is tossed before the displacement is sampled: a particle
that dies childless needs no endpoint, which skips about half of the normal
draws without changing the law of anything observable.

Depth-first traversal with a single per-replicate bit generator makes the
event order, and therefore the stream consumption, fully deterministic.
"""
import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport exp, floor, sqrt
from libc.stdlib cimport free, malloc, realloc
from libc.string cimport memcpy
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (random_standard_exponential,
                                           random_standard_normal,
                                           random_standard_uniform)

from superbm.errors import ParticleCapError

cnp.import_array()

BACKEND_NAME = "compiled"

cdef extern from *:
    """
    #define SBM_OK 0
    #define SBM_CAP 1
    #define SBM_OOM 2
    """
    int SBM_OK
    int SBM_CAP
    int SBM_OOM


cdef inline bitgen_t *_get_bitgen(object bit_generator) except NULL:
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("invalid BitGenerator capsule")
    return <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")


cdef inline int _grow(double **buf, Py_ssize_t *capacity, Py_ssize_t need,
                      int stride) noexcept nogil:
    cdef Py_ssize_t new_cap = capacity[0]
    cdef double *tmp
    while new_cap < need:
        new_cap = new_cap * 2 if new_cap else 1024
    tmp = <double *> realloc(buf[0], new_cap * stride * sizeof(double))
    if tmp == NULL:
        return SBM_OOM
    buf[0] = tmp
    capacity[0] = new_cap
    return SBM_OK


def advance_full(cnp.ndarray[cnp.float64_t, ndim=2] pos, double t0, double t1,
                 double rate, double p2, object bit_generator, long cap):
    """Advance a full-space cloud from t0 to t1; returns (positions, n_events)."""
    if t1 < t0:
        raise ValueError("cannot advance backwards in time")
    cdef Py_ssize_t n = pos.shape[0]
    cdef int d = <int> pos.shape[1]
    if t1 == t0 or n == 0:
        return np.array(pos, copy=True), 0

    cdef bitgen_t *rng = _get_bitgen(bit_generator)
    cdef Py_ssize_t out_cap = n + (n >> 2) + 1024, out_n = 0
    cdef Py_ssize_t st_cap = 4096, st_n = 0
    cdef double *out = <double *> malloc(out_cap * d * sizeof(double))
    cdef double *st = <double *> malloc(st_cap * (d + 1) * sizeof(double))
    cdef double cur[16]
    cdef double t, tau, sq
    cdef int j, status = SBM_OK
    cdef Py_ssize_t k
    cdef unsigned long long n_events = 0
    if out == NULL or st == NULL:
        free(out); free(st)
        raise MemoryError
    if d > 16:
        free(out); free(st)
        raise ValueError("dimension limited to 16")

    with bit_generator.lock, nogil:
        for k in range(n):
            t = t0
            for j in range(d):
                cur[j] = pos[k, j]
            while True:
                tau = t + random_standard_exponential(rng) / rate
                if tau >= t1:
                    # survives the slab: sample endpoint, emit
                    if out_n >= out_cap:
                        status = _grow(&out, &out_cap, out_n + 1, d)
                        if status != SBM_OK:
                            break
                    sq = sqrt(t1 - t)
                    for j in range(d):
                        out[out_n * d + j] = cur[j] + random_standard_normal(rng) * sq
                    out_n += 1
                else:
                    n_events += 1
                    if random_standard_uniform(rng) < p2:
                        # branch: move to the branch point, fork the lineage
                        sq = sqrt(tau - t)
                        for j in range(d):
                            cur[j] += random_standard_normal(rng) * sq
                        if st_n >= st_cap:
                            status = _grow(&st, &st_cap, st_n + 1, d + 1)
                            if status != SBM_OK:
                                break
                        st[st_n * (d + 1)] = tau
                        for j in range(d):
                            st[st_n * (d + 1) + 1 + j] = cur[j]
                        st_n += 1
                        if out_n + st_n + (n - k) > cap:
                            status = SBM_CAP
                            break
                        t = tau
                        continue
                    # else: childless death, nothing observable to sample
                if st_n > 0:
                    st_n -= 1
                    t = st[st_n * (d + 1)]
                    for j in range(d):
                        cur[j] = st[st_n * (d + 1) + 1 + j]
                    continue
                break
            if status != SBM_OK:
                break

    result = None
    cdef double[:, ::1] rv
    if status == SBM_OK:
        result = np.empty((out_n, d), dtype=np.float64)
        if out_n:
            rv = result
            memcpy(&rv[0, 0], out, out_n * d * sizeof(double))
    free(out)
    free(st)
    if status == SBM_CAP:
        raise ParticleCapError(cap)
    if status == SBM_OOM:
        raise MemoryError
    return result, n_events


def advance_orthant(cnp.ndarray[cnp.float64_t, ndim=2] pos, double t0, double t1,
                    double rate, double p2, int n_abs, double dt,
                    object bit_generator, long cap):
    """Advance an orthant cloud from t0 to t1 with absorbing-boundary kill.

    The last ``n_abs`` coordinates are killed at 0; Brownian segments are
    capped at absolute multiples of ``dt`` and each segment applies the exact
    bridge-crossing acceptance 1 - exp(-2 x y / h) per absorbed coordinate.
    Returns (positions, n_events).
    """
    if t1 < t0:
        raise ValueError("cannot advance backwards in time")
    if dt <= 0:
        raise ValueError("dt must be > 0")
    cdef Py_ssize_t n = pos.shape[0]
    cdef int d = <int> pos.shape[1]
    if n_abs < 1 or n_abs > d:
        raise ValueError("need 1 <= absorbed coordinates <= d")
    if t1 == t0 or n == 0:
        return np.array(pos, copy=True), 0

    cdef bitgen_t *rng = _get_bitgen(bit_generator)
    cdef Py_ssize_t out_cap = n + (n >> 2) + 1024, out_n = 0
    cdef Py_ssize_t st_cap = 4096, st_n = 0
    cdef double *out = <double *> malloc(out_cap * d * sizeof(double))
    cdef double *st = <double *> malloc(st_cap * (d + 1) * sizeof(double))
    cdef double cur[16]
    cdef double t, tau, te, tb, h, sq, y
    cdef int j, kind, alive, status = SBM_OK
    cdef int n_free = d - n_abs
    cdef Py_ssize_t k
    cdef unsigned long long n_events = 0
    if out == NULL or st == NULL:
        free(out); free(st)
        raise MemoryError
    if d > 16:
        free(out); free(st)
        raise ValueError("dimension limited to 16")

    with bit_generator.lock, nogil:
        for k in range(n):
            t = t0
            for j in range(d):
                cur[j] = pos[k, j]
            tau = t + random_standard_exponential(rng) / rate
            while True:
                alive = 1
                while True:
                    # segment end: branch time, dt grid point or slab end
                    tb = (floor(t / dt + 1e-9) + 1.0) * dt
                    if tb <= t:
                        tb = t + dt
                    te = t1
                    kind = 0
                    if tb < te:
                        te = tb
                        kind = 1
                    if tau <= te:
                        te = tau
                        kind = 2

                    if kind == 2:
                        n_events += 1
                        if random_standard_uniform(rng) >= p2:
                            alive = 0  # childless death: endpoint never observed
                            break

                    # diffuse over [t, te] with bridge kill on absorbed axes
                    h = te - t
                    if h > 0:
                        sq = sqrt(h)
                        for j in range(n_free):
                            cur[j] += random_standard_normal(rng) * sq
                        for j in range(n_free, d):
                            y = cur[j] + random_standard_normal(rng) * sq
                            if y <= 0.0:
                                alive = 0
                                break
                            if random_standard_uniform(rng) < exp(-2.0 * cur[j] * y / h):
                                alive = 0  # bridge crossed the boundary
                                break
                            cur[j] = y
                        if not alive:
                            break
                    t = te

                    if kind == 2:
                        # branch: fork at the branch point
                        if st_n >= st_cap:
                            status = _grow(&st, &st_cap, st_n + 1, d + 1)
                            if status != SBM_OK:
                                break
                        st[st_n * (d + 1)] = t
                        for j in range(d):
                            st[st_n * (d + 1) + 1 + j] = cur[j]
                        st_n += 1
                        if out_n + st_n + (n - k) > cap:
                            status = SBM_CAP
                            break
                        tau = t + random_standard_exponential(rng) / rate
                    elif kind == 0:
                        if out_n >= out_cap:
                            status = _grow(&out, &out_cap, out_n + 1, d)
                            if status != SBM_OK:
                                break
                        for j in range(d):
                            out[out_n * d + j] = cur[j]
                        out_n += 1
                        break
                if status != SBM_OK:
                    break
                if st_n > 0:
                    st_n -= 1
                    t = st[st_n * (d + 1)]
                    for j in range(d):
                        cur[j] = st[st_n * (d + 1) + 1 + j]
                    tau = t + random_standard_exponential(rng) / rate
                    continue
                break
            if status != SBM_OK:
                break

    result = None
    cdef double[:, ::1] rv
    if status == SBM_OK:
        result = np.empty((out_n, d), dtype=np.float64)
        if out_n:
            rv = result
            memcpy(&rv[0, 0], out, out_n * d * sizeof(double))
    free(out)
    free(st)
    if status == SBM_CAP:
        raise ParticleCapError(cap)
    if status == SBM_OOM:
        raise MemoryError
    return result, n_events
