"""Time the hot kernels under numba and under the numpy fallback.

Each backend runs in its own interpreter, because the backend is chosen at
import time from QUADVAR_DISABLE_NUMBA. Every workload runs once untimed
(numba compiles or loads its cache then) and is then timed as the best of
--repeat runs. The script also checks that both backends return the same
numbers.

    python benchmarks/bench_kernels.py [--repeat 3] [--quick]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time


def _workloads(quick: bool):
    import numpy as np

    from quadvar import eigenforms, kernels, kloosterman

    c_grid = 150 if quick else 400
    c_twist = 60 if quick else 120
    c_trace = 2000 if quick else 10000
    xs = np.linspace(0.1, 200.0, 2000 if quick else 20000)

    def grid():
        g = kloosterman.kloosterman_grid(30, 30, c_grid)
        return float(np.abs(g.values).sum())

    def twisted():
        return float(sum(np.abs(kloosterman.twisted_sum_all_uv(3, 1, 2, c)).sum() for c in range(2, c_twist)))

    def bessel():
        return float(np.abs(kernels.bessel_table(40, xs)).sum())

    def trace():
        vals = np.arange(1, 11)
        out = eigenforms.trace_sums(vals, np.array([11, 15, 17]), np.arange(1, c_trace + 1))
        return float(np.abs(out).sum())

    return {"kloosterman_grid": grid, "twisted_all_uv": twisted, "bessel_table": bessel, "trace_sums": trace}


def worker(repeat: int, quick: bool) -> None:
    from quadvar import kernels

    report = {"backend": kernels.BACKEND, "results": {}}
    for name, fn in _workloads(quick).items():
        start = time.perf_counter()
        value = fn()
        first = time.perf_counter() - start
        best = min(_timed(fn) for _ in range(repeat))
        report["results"][name] = {"first": first, "best": best, "checksum": value}
    print(json.dumps(report))


def _timed(fn) -> float:
    start = time.perf_counter()
    fn()
    return time.perf_counter() - start


def _run(disable: bool, repeat: int, quick: bool) -> dict:
    env = dict(os.environ, QUADVAR_DISABLE_NUMBA="1" if disable else "0")
    cmd = [sys.executable, __file__, "--worker", "--repeat", str(repeat)] + (["--quick"] if quick else [])
    done = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return json.loads(done.stdout.strip().splitlines()[-1])


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller workloads")
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.worker:
        worker(args.repeat, args.quick)
        return 0

    fast = _run(False, args.repeat, args.quick)
    slow = _run(True, args.repeat, args.quick)
    print(f"{'workload':<18}{'numba first':>13}{'numba best':>12}{'numpy best':>12}{'speedup':>9}  checksums agree")
    agree_all = True
    for name, a in fast["results"].items():
        b = slow["results"][name]
        agree = abs(a["checksum"] - b["checksum"]) <= 1e-9 * max(1.0, abs(b["checksum"]))
        agree_all &= agree
        print(
            f"{name:<18}{a['first']:>12.3f}s{a['best']:>11.3f}s{b['best']:>11.3f}s"
            f"{b['best'] / a['best']:>8.1f}x  {'yes' if agree else 'NO'}"
        )
    if fast["backend"] != "numba":
        print("note: numba is not importable here, so both columns ran the numpy fallback")
    return 0 if agree_all else 1


if __name__ == "__main__":
    sys.exit(main())
