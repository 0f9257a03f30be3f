"""Compare the numba and pure-numpy kernel backends.

Times each hot kernel in-process on both backends, then one end-to-end
learner run per backend in a subprocess (the backend is fixed at import time
through HALFSPACE_OMD_BACKEND).

    python benchmarks/bench_kernels.py [--d 200] [--repeat 200]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from halfspace_omd.kernels import ENV_FLAG, get_backend
from halfspace_omd.vecmath import PNormParams

END_TO_END = """
import time
from halfspace_omd import NoiseModel, Oracle, run_main
from halfspace_omd.kernels import BACKEND
run_main(0.1, 0.05, 5, Oracle.build("gaussian", {d}, 5, NoiseModel("realizable"), 0), metric_n=1000)
o = Oracle.build("gaussian", {d}, 5, NoiseModel("realizable"), 1)
t = time.perf_counter()
u, r = run_main(0.1, 0.05, 5, o, metric_n=1000)
print(BACKEND, time.perf_counter() - t, r.final.labels, r.final.angle)
"""


def best_of(fn, repeat):
    fn()  # warm-up (and JIT compile)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def kernel_cases(mod, d, rng):
    p = PNormParams.for_dim(d).p
    z = rng.standard_normal(d)
    theta = mod.grad_phi(z, p)
    X = rng.standard_normal((4096, d))
    w = rng.standard_normal(d)
    w /= np.linalg.norm(w)
    c = np.zeros(d)
    a = w.copy()
    v = 0.1 * w
    return {
        "grad_phi": lambda: mod.grad_phi(z, p),
        "grad_phi_star": lambda: mod.grad_phi_star(theta, p),
        "band_first": lambda: mod.band_first(X, 0, w, 0.01),
        "hash_uniform": lambda: mod.hash_uniform(X[:256], 12345),
        "solve_shifted": lambda: mod.solve_shifted(theta, 0.7, p),
        "dykstra": lambda: mod.dykstra(3.0 * z, 1.0, c, 1.0, a, 0.1, False, True, 1e-10, 10_000),
        "mirror_polish": lambda: mod.mirror_polish(theta - 5.0 * w, v, 1.0, c, 1.0, a, 0.1,
                                                   False, True, p, 1e-10, 10_000),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--skip-e2e", action="store_true")
    args = ap.parse_args()

    results = {}
    for name in ("numpy", "numba"):
        mod = get_backend(name)
        cases = kernel_cases(mod, args.d, np.random.default_rng(0))
        results[name] = {k: best_of(fn, args.repeat) for k, fn in cases.items()}

    print(f"kernel timings, d={args.d}, best of {args.repeat} (microseconds)")
    print(f"{'kernel':<16}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    for k in results["numpy"]:
        a, b = results["numpy"][k] * 1e6, results["numba"][k] * 1e6
        print(f"{k:<16}{a:>12.1f}{b:>12.1f}{a / b:>9.1f}x")

    if args.skip_e2e:
        return
    print("\nend-to-end run_main after one warm-up run (eps=0.1, s=5), seconds")
    for name in ("numpy", "numba"):
        env = dict(os.environ, **{ENV_FLAG: name})
        out = subprocess.run([sys.executable, "-c", END_TO_END.format(d=args.d)], env=env,
                             capture_output=True, text=True, check=True)
        backend, secs, labels, ang = out.stdout.split()
        print(f"{backend:<8}{float(secs):>10.2f}s  labels={labels}  final angle={float(ang):.2e}")


if __name__ == "__main__":
    main()
