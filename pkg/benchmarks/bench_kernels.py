"""Compare the compiled kernels with the pure-Python fallback.

Times heat-bath sweeps, coupled sweeps and cluster labeling on one window
and checks that both backends give identical output.

    python benchmarks/bench_kernels.py --L 32 --sweeps 20
"""
import argparse
import json
import time

import numpy as np

from isingperc import _kernels
from isingperc.lattice import build_lattice
from isingperc.model import preset_ferro
from isingperc.sampler import PLUS, Sampler


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def bench(L, sweeps, repeat, beta):
    g = build_lattice("square", L)
    m = preset_ferro(beta)
    rows = {}
    for name in ("cython", "python"):
        try:
            s = Sampler(m, g, PLUS, backend=name)
        except ImportError:
            continue
        u = s.slots(1, 0, 1, sweeps)

        def run_single():
            spins = s.extreme(1)
            s._run(spins, u)
            return spins

        def run_coupled():
            lo, hi = s.extreme(-1), s.extreme(1)
            s._run_coupled(lo, hi, u)
            return lo, hi

        member = np.ascontiguousarray(run_single() > 0, dtype=np.uint8)
        ptr, idx = g.adjacency("star")
        t1, a = _time(run_single, repeat)
        t2, b = _time(run_coupled, repeat)
        t3, c = _time(lambda: s.kern.label(member, ptr, idx), repeat)
        rows[name] = {"sweep_ms": 1e3 * t1 / sweeps, "coupled_sweep_ms": 1e3 * t2 / sweeps,
                      "label_ms": 1e3 * t3, "out": (a, b, c)}
    if len(rows) == 2:
        ca, pa = rows["cython"]["out"], rows["python"]["out"]
        same = (np.array_equal(ca[0], pa[0]) and all(np.array_equal(x, y) for x, y in zip(ca[1], pa[1]))
                and np.array_equal(ca[2], pa[2]))
        if not same:
            raise SystemExit("backends disagree")
    for r in rows.values():
        r.pop("out")
    if len(rows) == 2:
        rows["speedup"] = {k: rows["python"][k] / rows["cython"][k] for k in rows["cython"]}
    return {"L": L, "sites": int(g.n_sites), "sweeps": sweeps, "active": _kernels.BACKEND,
            "results": rows}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--L", type=int, default=32)
    ap.add_argument("--sweeps", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--beta", type=float, default=0.6)
    args = ap.parse_args(argv)
    print(json.dumps(bench(args.L, args.sweeps, args.repeat, args.beta), indent=2))


if __name__ == "__main__":
    main()
