"""Benchmark the compiled kernels against the pure-Python reference.

Times the three hot paths — grid refinement, bridge-exact interval images,
and walk generation — on identical inputs, checks that both backends agree
bit for bit while timing, and prints a speedup table.

Run:  python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time

from continuumlab.kernels import backend_modules


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(3):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn()
        best = min(best, (time.perf_counter() - t0) / repeat)
    return best


def main():
    mods = backend_modules()
    if "c" not in mods:
        print("compiled backend not available; nothing to compare")
        return

    cases = [
        ("grid_values level 8, [0,1]",
         lambda m: m.grid_values(42, 1.0, 8, 0, 256), 200),
        ("grid_values level 12, [0,1]",
         lambda m: m.grid_values(42, 1.0, 12, 0, 4096), 20),
        ("bridge image [0,1] @ 2^-8",
         lambda m: m.interval_extrema(42, 1.0, 0.0, 1.0, 8, True, 0), 200),
        ("bridge image [-2,2] @ 2^-10",
         lambda m: m.interval_extrema(42, 1.0, -2.0, 2.0, 10, True, 0), 20),
        ("walk into [200]",
         lambda m: m.walk_values(42, 200, 500_000), 20),
        ("point values, 4096 off-grid t",
         lambda m: [m.point_value(42, 1.0, 0.1 + i * 1e-4, 8) for i in range(4096)], 5),
    ]

    print(f"{'case':34s} {'pure (ms)':>10s} {'compiled (ms)':>14s} {'speedup':>8s}")
    for name, call, repeat in cases:
        ref = call(mods["py"])
        got = call(mods["c"])
        same = repr(ref) == repr(got) if not hasattr(ref, "tolist") else (
            ref.tolist() == got.tolist())
        t_py = _time(lambda: call(mods["py"]), max(1, repeat // 10))
        t_c = _time(lambda: call(mods["c"]), repeat)
        flag = "" if same else "  (MISMATCH!)"
        print(f"{name:34s} {t_py * 1e3:10.3f} {t_c * 1e3:14.3f} "
              f"{t_py / t_c:7.1f}x{flag}")


if __name__ == "__main__":
    main()
