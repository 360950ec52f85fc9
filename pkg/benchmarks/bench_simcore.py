"""Compare the compiled simulation kernel with the numpy fallback.

Runs a compiled gate program over every input assignment of a ripple-carry
adder and of a random gate network, timing each kernel on identical inputs.

    python3 benchmarks/bench_simcore.py [--bits 8] [--gates 20000] [--repeat 5]
"""

import argparse
import sys
import timeit
from pathlib import Path

import numpy as np

from gemini import _simcore_py
from gemini.compiler import compile_source
from gemini.netlist import Gate, Netlist, Not, Pin, Slice
from gemini.netsim import _lane_pattern, _lane_words, compile_program
from gemini.types import BIT, Array

try:
    from gemini import _simcore
except ImportError:
    _simcore = None

ADDER = Path(__file__).resolve().parent.parent / "tests" / "programs" / "adder.gem"


def adder_netlist(bits: int) -> Netlist:
    src = ADDER.read_text().replace("val numbits = 2", f"val numbits = {bits}")
    return compile_source(src, module_name="adder").lowered


def random_netlist(inputs: int, gates: int, seed: int = 0) -> Netlist:
    rng = np.random.default_rng(seed)
    pin = Pin("x", Array(BIT, inputs))
    pool = [Slice(pin, i) for i in range(inputs)]
    for _ in range(gates):
        if rng.random() < 0.15:
            pool.append(Not(pool[rng.integers(len(pool))]))
        else:
            op = ("AND", "OR", "XOR")[rng.integers(3)]
            k = int(rng.integers(2, 5))
            pool.append(Gate(op, tuple(pool[j] for j in rng.integers(len(pool), size=k))))
    return Netlist("rand", [("x", pin.type)], Gate("XOR", tuple(pool[-8:])), {"x": pin})


def exhaustive_inputs(n_inputs: int):
    lanes = 1 << n_inputs
    masks = [_lane_pattern(j, lanes) for j in range(n_inputs)]
    return _lane_words(masks, lanes), max(1, lanes // 64)


def bench(label: str, n: Netlist, repeat: int) -> None:
    prog = compile_program(n)
    inputs, words = exhaustive_inputs(prog.n_inputs)
    state = np.zeros((len(prog.delay_args), words), dtype=np.uint64)
    kernels = [("numpy", _simcore_py)]
    if _simcore is not None:
        kernels.insert(0, ("cython", _simcore))
    results = {}
    for name, k in kernels:
        t = min(timeit.repeat(lambda: prog.run(inputs, state, words, kernel=k),
                              number=1, repeat=repeat))
        results[name] = (t, prog.run(inputs, state, words, kernel=k))
    ref = next(iter(results.values()))[1]
    assert all(np.array_equal(r, ref) for _, r in results.values()), "kernels disagree"
    print(f"{label}: {len(prog.ops)} signals, {prog.n_inputs} inputs, {words} words/signal")
    for name, (t, _) in results.items():
        print(f"  {name:7s} {t * 1e3:9.2f} ms")
    if "cython" in results:
        print(f"  speedup {results['numpy'][0] / results['cython'][0]:8.1f}x")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bits", type=int, default=8, help="adder width (inputs = 2 * bits)")
    ap.add_argument("--gates", type=int, default=20000)
    ap.add_argument("--inputs", type=int, default=14)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _simcore is None:
        print("compiled kernel not built; timing the numpy fallback only", file=sys.stderr)
    bench(f"{args.bits}-bit ripple-carry adder", adder_netlist(args.bits), args.repeat)
    bench(f"random network ({args.gates} gates)",
          random_netlist(args.inputs, args.gates), args.repeat)
    return 0


if __name__ == "__main__":
    sys.exit(main())
