#cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled protocol loop, bit-identical to the numpy backend.

Consumes uniforms from per-unit Philox streams through the numpy
BitGenerator C interface in the canonical per-run order (source draws,
box draws level-major, channel flips, path errors root to leaf).
"""

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.stdlib cimport free, malloc
from numpy.random cimport bitgen_t

from .. import streams


def simulate_into(
    unsigned char[::1] x_out,
    unsigned char[::1] y_out,
    int n,
    double c,
    double c_prime,
    double theta,
    Py_ssize_t runs_per_unit,
    long long address,
    object master_seed,
    Py_ssize_t unit_lo,
    Py_ssize_t unit_hi,
):
    cdef Py_ssize_t m = (<Py_ssize_t> 1) << n
    cdef double p_minus = (1.0 + theta) / 2.0
    cdef double p_flip = (1.0 - c_prime) / 2.0
    cdef double p_err = (1.0 - c) / 2.0

    cdef unsigned char *vals = <unsigned char *> malloc(m)
    cdef unsigned char *a_path = <unsigned char *> malloc(n)
    cdef unsigned char *big_a_path = <unsigned char *> malloc(n)
    cdef Py_ssize_t *cols = <Py_ssize_t *> malloc((n + 1) * sizeof(Py_ssize_t))
    if vals == NULL or a_path == NULL or big_a_path == NULL or cols == NULL:
        free(vals); free(a_path); free(big_a_path); free(cols)
        raise MemoryError()

    cdef bitgen_t *rng
    cdef Py_ssize_t u, r, i, k, j, w, ck, out_base
    cdef long long grun, addr
    cdef unsigned char a, box_a, xbit, y, b, e

    try:
        for u in range(unit_lo, unit_hi):
            bg = streams.unit_bit_generator(master_seed, u)
            capsule = bg.capsule
            if not PyCapsule_IsValid(capsule, "BitGenerator"):
                raise ValueError("invalid BitGenerator capsule")
            rng = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")
            out_base = (u - unit_lo) * runs_per_unit
            with bg.lock, nogil:
                for r in range(runs_per_unit):
                    grun = (<long long> u) * runs_per_unit + r
                    addr = address if address >= 0 else grun % m
                    cols[n] = 0
                    for k in range(n, 1, -1):
                        cols[k - 1] = 2 * cols[k] + ((addr >> (k - 1)) & 1)
                    for i in range(m):
                        vals[i] = rng.next_double(rng.state) < p_minus
                    xbit = vals[addr]
                    for k in range(1, n + 1):
                        w = m >> k
                        ck = cols[k]
                        for j in range(w):
                            a = vals[2 * j] ^ vals[2 * j + 1]
                            box_a = rng.next_double(rng.state) < 0.5
                            if j == ck:
                                a_path[k - 1] = a
                                big_a_path[k - 1] = box_a
                            vals[j] = vals[2 * j] ^ box_a
                    y = vals[0]
                    for k in range(n):
                        y ^= rng.next_double(rng.state) < p_flip
                    for k in range(n, 0, -1):
                        b = (addr >> (k - 1)) & 1
                        e = rng.next_double(rng.state) < p_err
                        y ^= big_a_path[k - 1] ^ (a_path[k - 1] & b) ^ e
                    x_out[out_base + r] = xbit
                    y_out[out_base + r] = y
    finally:
        free(vals)
        free(a_path)
        free(big_a_path)
        free(cols)
