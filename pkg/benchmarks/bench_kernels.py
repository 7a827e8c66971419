"""Compiled vs numpy kernels: spreading, interpolation and a full J_A transform.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--json out.json]
"""
import argparse
import json
import time

import numpy as np

from nilsampler import corpus, frames, kernels, nufft
from nilsampler.orbit import orbit_data
from nilsampler.sampling import SpectralBox


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json")
    args = ap.parse_args()
    backends = kernels.available()
    rng = np.random.default_rng(0)
    rows = []

    for p, N, L, K in [(2, 32768, 8, 48), (2, 131072, 8, 96), (3, 4096, 2, 8)]:
        x = rng.random((N, p))
        c = rng.standard_normal((L, N)) + 1j * rng.standard_normal((L, N))
        plan = nufft.Plan.make(p, K)
        coef = rng.standard_normal((L,) + (2 * K + 1,) * p) + 0j
        ref = None
        for b in backends:
            t1 = best_of(lambda: nufft.type1(x, c, K, backend=b, plan=plan), args.repeat)
            t2 = best_of(lambda: nufft.type2(x, coef, backend=b, plan=plan), args.repeat)
            out = nufft.type1(x, c, K, backend=b, plan=plan)
            diff = 0.0 if ref is None else float(np.abs(out - ref).max() / np.abs(ref).max())
            ref = out if ref is None else ref
            rows.append({"case": f"nufft p={p} N={N} L={L} K={K}", "backend": b, "type1_s": t1, "type2_s": t2,
                         "rel_diff_vs_first": diff})

    od = orbit_data(corpus.get("heisenberg"))
    box = SpectralBox.parse("-0.25,0.25")
    for scale in (1, 2):
        F = frames.reference_function(od, box, 0, n_lambda=256 * scale, r=128 * scale)
        for b in backends:
            t = best_of(lambda: frames.j_transform(F, k_max=48 * scale, backend=b), args.repeat)
            rows.append({"case": f"J_A heisenberg x{scale}", "backend": b, "type1_s": t, "type2_s": None,
                         "rel_diff_vs_first": None})
        if scale == 1:
            t = best_of(lambda: frames.j_transform(F, k_max=48, method="direct"), 1)
            rows.append({"case": "J_A heisenberg x1", "backend": "direct (BLAS)", "type1_s": t, "type2_s": None,
                         "rel_diff_vs_first": None})

    print(f"{'case':36s} {'backend':14s} {'type1 [s]':>10s} {'type2 [s]':>10s} {'rel diff':>10s}")
    for r in rows:
        t2 = f"{r['type2_s']:.4f}" if r["type2_s"] is not None else "-"
        d = f"{r['rel_diff_vs_first']:.1e}" if r["rel_diff_vs_first"] is not None else "-"
        print(f"{r['case']:36s} {r['backend']:14s} {r['type1_s']:10.4f} {t2:>10s} {d:>10s}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
