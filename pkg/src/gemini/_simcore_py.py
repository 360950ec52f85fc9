"""Bit-parallel evaluation of a flat gate program (numpy fallback).

Same interface and opcodes as the compiled kernel.
"""

import numpy as np

KERNEL = "python"
_ALL = np.uint64(0xFFFFFFFFFFFFFFFF)


def run(ops, off, args, inputs, state, W):
    n = len(ops)
    out = np.empty((n, W), dtype=np.uint64)
    for i in range(n):
        op = ops[i]
        lo, hi = off[i], off[i + 1]
        if op == 0:
            out[i] = 0
        elif op == 1:
            out[i] = _ALL
        elif op == 2:
            out[i] = inputs[args[lo]]
        elif op == 7:
            out[i] = state[args[lo]]
        elif op == 6:
            np.invert(out[args[lo]], out=out[i])
        elif op == 3:
            np.bitwise_and.reduce(out[args[lo:hi]], axis=0, out=out[i])
        elif op == 4:
            np.bitwise_or.reduce(out[args[lo:hi]], axis=0, out=out[i])
        elif op == 5:
            np.bitwise_xor.reduce(out[args[lo:hi]], axis=0, out=out[i])
        else:
            raise ValueError(f"bad opcode {op}")
    return out
