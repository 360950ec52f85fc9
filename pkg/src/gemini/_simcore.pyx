"""Bit-parallel evaluation of a flat gate program (compiled kernel).

Each signal holds W 64-bit words, one lane per bit.  Opcodes:
0 const 0, 1 const 1, 2 input bit, 3 AND, 4 OR, 5 XOR, 6 NOT, 7 register read.
For opcodes 2 and 7 the single argument indexes ``inputs`` or ``state``.
"""

import numpy as np
from libc.stdint cimport int32_t, uint64_t

KERNEL = "cython"


def run(const int32_t[::1] ops, const int32_t[::1] off, const int32_t[::1] args,
        const uint64_t[:, ::1] inputs, const uint64_t[:, ::1] state, Py_ssize_t W):
    cdef Py_ssize_t n = ops.shape[0]
    result = np.empty((n, W), dtype=np.uint64)
    cdef uint64_t[:, ::1] out = result
    cdef Py_ssize_t i, j, k, a, lo, hi
    cdef int op
    cdef uint64_t acc
    for i in range(n):
        op = ops[i]
        lo = off[i]
        hi = off[i + 1]
        if op == 0:
            for j in range(W):
                out[i, j] = 0
        elif op == 1:
            for j in range(W):
                out[i, j] = <uint64_t>0xFFFFFFFFFFFFFFFF
        elif op == 2:
            a = args[lo]
            for j in range(W):
                out[i, j] = inputs[a, j]
        elif op == 7:
            a = args[lo]
            for j in range(W):
                out[i, j] = state[a, j]
        elif op == 6:
            a = args[lo]
            for j in range(W):
                out[i, j] = ~out[a, j]
        elif op == 3:
            for j in range(W):
                acc = out[args[lo], j]
                for k in range(lo + 1, hi):
                    acc = acc & out[args[k], j]
                out[i, j] = acc
        elif op == 4:
            for j in range(W):
                acc = out[args[lo], j]
                for k in range(lo + 1, hi):
                    acc = acc | out[args[k], j]
                out[i, j] = acc
        elif op == 5:
            for j in range(W):
                acc = out[args[lo], j]
                for k in range(lo + 1, hi):
                    acc = acc ^ out[args[k], j]
                out[i, j] = acc
        else:
            raise ValueError(f"bad opcode {op}")
    return result
