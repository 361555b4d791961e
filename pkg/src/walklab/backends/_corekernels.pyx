# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled walk kernels.

Semantics mirror backends/pycore.py step for step: same binary-search
site selection (searchsorted side="right", clamped), same update order
(position, tally, observable, stop checks), same sequential float
accumulation.  Positions and integer-valued observables are therefore
bit-identical across backends; cos-based observables may differ in the
last ulp (libm vs numpy SIMD).
"""

import numpy as np

cimport numpy as cnp

from libc.math cimport cos, floor

ctypedef cnp.int64_t i64
ctypedef cnp.float64_t f64
ctypedef unsigned long long u64

cdef double TWO_PI = 6.283185307179586476925287

NAME = "compiled"


cdef inline Py_ssize_t _site_index(const f64* cdf, Py_ssize_t n, double x) nogil:
    # first index with cdf[i] > x, clamped to the table
    cdef Py_ssize_t lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if cdf[mid] <= x:
            lo = mid + 1
        else:
            hi = mid
    if lo >= n:
        lo = n - 1
    return lo


cdef inline Py_ssize_t _bisect_right_i64(const i64* a, Py_ssize_t n, i64 x) nogil:
    cdef Py_ssize_t lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] <= x:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline u64 _mix64(u64 z) nogil:
    z = (z ^ (z >> 30)) * <u64>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <u64>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef double _eval_one(int kind, const i64* ia, Py_ssize_t nia, const f64* fa,
                      const i64* pos, int d, int* fault) nogil:
    cdef Py_ssize_t j, c, i, h, flat, stride, idx
    cdef i64 a, rest, v
    cdef double t, s, val
    cdef int dt, nh
    cdef u64 hsh

    if kind == 1:  # heaviside
        return 1.0 if pos[0] > 0 else 0.0

    if kind == 2:  # periodic table
        flat = 0
        stride = 1
        for j in range(d - 1, -1, -1):
            flat += (((pos[j] % ia[j]) + ia[j]) % ia[j]) * stride
            stride *= ia[j]
        return fa[flat]

    if kind == 3:  # quasiperiodic trig polynomial
        dt = <int>ia[0]
        nh = <int>ia[1]
        val = 0.0
        for h in range(nh):
            s = 0.0
            for c in range(dt):
                t = 0.0
                for i in range(d):
                    t = t + pos[i] * fa[dt + i * dt + c]
                t -= floor(t)
                s = s + ia[2 + h * dt + c] * (fa[c] + t)
            val += fa[dt + d * dt + h] * cos(TWO_PI * s + fa[dt + d * dt + nh + h])
        return val

    if kind == 4:  # scenery hash
        hsh = <u64>ia[0]
        for j in range(d):
            hsh = _mix64(hsh ^ (<u64>pos[j] * <u64>0xD1342543DE82EF95
                                + <u64>0x9E3779B97F4A7C15 * <u64>(j + 1)))
        return fa[1] if (hsh >> 63) else fa[0]

    if kind == 5 or kind == 6:  # ocean blocks (and its d >= 2 extension)
        a = pos[0] if pos[0] >= 0 else -pos[0]
        if kind == 6:
            rest = 0
            for j in range(1, d):
                v = pos[j] if pos[j] >= 0 else -pos[j]
                if v > rest:
                    rest = v
            if rest > a:
                return 0.5
        if a == 0:
            return 0.0
        if a >= ia[nia - 1]:
            fault[0] = 1
            return 0.0
        idx = _bisect_right_i64(ia, nia, a)
        return 1.0 if (idx & 1) == 0 else 0.0

    if kind == 7:  # explicit table with default outside
        flat = 0
        stride = 1
        for j in range(d - 1, -1, -1):
            v = pos[j] - ia[j]
            if v < 0 or v >= ia[d + j]:
                return fa[0]
            flat += v * stride
            stride *= ia[d + j]
        return fa[1 + flat]

    fault[0] = 2
    return 0.0


cdef inline const i64* _iptr(i64[::1] a) nogil:
    return &a[0] if a.shape[0] > 0 else NULL


cdef inline const f64* _fptr(f64[::1] a) nogil:
    return &a[0] if a.shape[0] > 0 else NULL


cdef _checked(int fault):
    if fault == 1:
        raise RuntimeError("ocean program does not cover the requested sites; rebuild via program_for")
    if fault:
        raise RuntimeError("unknown observable program kind")


def birkhoff_chunk(i64[:, ::1] sites, f64[::1] cdf, prog, i64[::1] pos, double tval,
                   i64[::1] mins, i64[::1] maxs, f64[::1] u):
    cdef int kind = prog.kind
    cdef int d = prog.d
    cdef i64[::1] ia = prog.iargs
    cdef f64[::1] fa = prog.fargs
    cdef const i64* iap = _iptr(ia)
    cdef const f64* fap = _fptr(fa)
    cdef Py_ssize_t nia = ia.shape[0]
    cdef Py_ssize_t n = u.shape[0], ns = cdf.shape[0], k, si
    cdef int j, fault = 0
    with nogil:
        for k in range(n):
            si = _site_index(&cdf[0], ns, u[k])
            for j in range(d):
                pos[j] += sites[si, j]
                if pos[j] < mins[j]:
                    mins[j] = pos[j]
                if pos[j] > maxs[j]:
                    maxs[j] = pos[j]
            tval += _eval_one(kind, iap, nia, fap, &pos[0], d, &fault)
            if fault:
                break
    _checked(fault)
    return np.asarray(pos), tval, np.asarray(mins), np.asarray(maxs)


def occupation_chunk(i64[::1] sites1, f64[::1] cdf, prog, i64 x, double tval,
                     i64[::1] tally, i64 tally_lo, i64 stop_above, f64[::1] u):
    cdef int kind = prog.kind
    cdef int d = prog.d
    cdef i64[::1] ia = prog.iargs
    cdef f64[::1] fa = prog.fargs
    cdef const i64* iap = _iptr(ia)
    cdef const f64* fap = _fptr(fa)
    cdef Py_ssize_t nia = ia.shape[0]
    cdef Py_ssize_t n = u.shape[0], ns = cdf.shape[0], k = 0, used = 0, si
    cdef i64 nt = tally.shape[0], rel
    cdef i64 below = 0, above = 0
    cdef int escaped = 0, fault = 0
    with nogil:
        for k in range(n):
            si = _site_index(&cdf[0], ns, u[k])
            x += sites1[si]
            rel = x - tally_lo
            if rel < 0:
                below += 1
            elif rel >= nt:
                above += 1
            else:
                tally[rel] += 1
            tval += _eval_one(kind, iap, nia, fap, &x, d, &fault)
            used += 1
            if fault:
                break
            if x > stop_above:
                escaped = 1
                break
    _checked(fault)
    return x, tval, int(below), int(above), int(used), bool(escaped)


def min_tail_chunk(i64[::1] sites1, f64[::1] cdf, i64 x, i64 neg_m, i64 stop_above, f64[::1] u):
    cdef Py_ssize_t n = u.shape[0], ns = cdf.shape[0], k, si
    cdef Py_ssize_t used = 0
    cdef int status = 0
    with nogil:
        for k in range(n):
            si = _site_index(&cdf[0], ns, u[k])
            x += sites1[si]
            used += 1
            if x <= neg_m:
                status = 1
                break
            if x > stop_above:
                status = 2
                break
    return x, int(used), status


def pair_visits_chunk(i64[::1] sites1, f64[::1] cdf, i64 x, i64 n1, i64 n2,
                      i64 stop_above, i64[::1] counts, f64[::1] u):
    cdef Py_ssize_t n = u.shape[0], ns = cdf.shape[0], k, si
    cdef Py_ssize_t used = 0
    cdef int escaped = 0
    cdef i64 cur
    with nogil:
        for k in range(n):
            si = _site_index(&cdf[0], ns, u[k])
            x += sites1[si]
            used += 1
            cur = 0
            if x == n1:
                cur = 1
            elif x == n2:
                cur = 2
            if cur:
                counts[cur - 1] += 1
                if counts[6] == 1:
                    counts[1 + cur] += 1      # c11 at 2, c12 at 3
                elif counts[6] == 2:
                    counts[3 + cur] += 1      # c21 at 4, c22 at 5
                if counts[7] == 0:
                    counts[7] = cur
                counts[6] = cur
            if x > stop_above:
                escaped = 1
                break
    return x, int(used), bool(escaped)
