"""Smoke test for the nfuq extension module.

Build and stage the module, then run this script:

    cargo build --release -p nfuq-python --features extension-module
    cp target/release/libnfuq_py.so python/nfuq.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import nfuq  # noqa: E402


def check(cond, what):
    if not cond:
        raise SystemExit(f"FAIL: {what}")
    print(f"ok   {what}")


def main():
    nodes, weights = nfuq.gauss_legendre(5, -2.0, 0.5)
    check(abs(sum(weights) - 1.0) < 1e-14, "Gauss-Legendre weights sum to one")
    mean_y2 = sum(w * y * y for y, w in zip(nodes, weights))
    check(abs(mean_y2 - 8.125 / 7.5) < 1e-13, "Gauss-Legendre integrates y^2")

    nodes, weights = nfuq.gauss_hermite(6, 1.0, 2.0)
    var = sum(w * (y - 1.0) ** 2 for y, w in zip(nodes, weights))
    check(abs(var - 4.0) < 1e-12, "Gauss-Hermite variance")

    xs, ws = nfuq.spatial_grid("chebyshev", 16)
    check(len(xs) == 17 and abs(sum(ws) - 2.0) < 1e-14, "Clenshaw-Curtis grid")

    p1 = nfuq.Problem.problem1()
    check(p1.dims == 1 and p1.is_linear, "problem1 metadata")
    run = p1.collocate([12], n=40)
    err = run.error_vs_exact(lambda x: nfuq.problem1_exact_mean(x))
    check(err < 1e-10, f"problem1 mean error {err:.2e}")
    check(all(v >= 0.0 for v in run.variance), "variance is nonnegative")

    xs, u = p1.solve([0.0])
    check(max(abs(a - math.sin(4 * math.pi * x)) for x, a in zip(xs, u)) < 1e-9,
          "y = 0 solution is stationary")

    _, mc_mean, stderr = p1.monte_carlo(200, seed=3, n=40)
    z = [abs(m - c) / s for m, c, s in zip(mc_mean, run.mean, stderr) if s > 0]
    check(max(z) < 5.0, "Monte Carlo agrees with collocation")

    samples, global_max = p1.spectrum([0])
    lam = sum(w * x * x for x, w in zip(*nfuq.spatial_grid("chebyshev", 40)))
    check(abs(global_max - (-1.0 + lam)) < 1e-10, "rank-one spectrum identity")

    p2 = nfuq.Problem.problem2("uniform")
    coarse = p2.collocate([2, 2], n=24)
    fine = p2.collocate([6, 6], n=24)
    check(coarse.error_vs(fine) < 1e-3, "problem2 self-convergence")

    try:
        nfuq.Problem.problem2("cauchy")
    except ValueError:
        check(True, "bad distribution raises ValueError")
    else:
        check(False, "bad distribution raises ValueError")
    try:
        p1.collocate([4], n=40, rtol=-1.0)
    except nfuq.NfuqError:
        check(True, "bad tolerance raises NfuqError")
    else:
        check(False, "bad tolerance raises NfuqError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
