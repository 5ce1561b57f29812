import runpy
from pathlib import Path

BENCH = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"


def test_benchmark_runs_and_backends_agree():
    mod = runpy.run_path(str(BENCH))
    out = mod["bench"](4, 3, 1, 0.6)
    assert "python" in out["results"]
    if "cython" in out["results"]:
        assert out["results"]["speedup"]["sweep_ms"] > 1
