"""Compare the compiled and numpy circuit kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]

For each qubit count, times ``embedding_batch`` (the inference path) and
``circuit_jacobians`` (forward plus every shift-rule variant, the training
path) on a batch of 32 samples, checks both backends agree, and prints a
CSV table with the speedup.
"""

from __future__ import annotations

import argparse
import sys
import timeit

import numpy as np

from quchater import kernels


def _time(fn, repeat: int) -> float:
    fn()  # warm-up
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=7)
    ap.add_argument("--batch", type=int, default=32)
    ap.add_argument("--layers", type=int, default=2)
    ap.add_argument("--qubits", type=int, nargs="+", default=[2, 4, 6, 8])
    args = ap.parse_args(argv)

    if "cython" not in kernels.available_backends():
        print("compiled extension not built; run `pip install -e . --no-build-isolation`",
              file=sys.stderr)
        return 1

    rng = np.random.default_rng(0)
    print("kernel,qubits,batch,python_ms,cython_ms,speedup,max_abs_diff")
    for q in args.qubits:
        x = rng.uniform(-np.pi, np.pi, (args.batch, q))
        theta = rng.uniform(-np.pi, np.pi, (args.layers, q))
        for name, fn in (("embedding_batch", kernels.embedding_batch),
                         ("circuit_jacobians", kernels.circuit_jacobians)):
            outs = {b: fn(x, theta, backend=b) for b in ("python", "cython")}
            py, cy = outs["python"], outs["cython"]
            if isinstance(py, tuple):
                diff = max(float(np.abs(a - b).max()) for a, b in zip(py, cy))
            else:
                diff = float(np.abs(py - cy).max())
            t_py = _time(lambda: fn(x, theta, backend="python"), args.repeat)
            t_cy = _time(lambda: fn(x, theta, backend="cython"), args.repeat)
            print(f"{name},{q},{args.batch},{t_py * 1e3:.3f},{t_cy * 1e3:.3f},"
                  f"{t_py / t_cy:.2f},{diff:.1e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
