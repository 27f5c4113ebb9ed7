"""An indefinite quadratic over l_inf rows and a nuclear-norm ball.

Without convexity the primal gap is unknown, so progress is tracked by the
smallest Frank-Wolfe gap seen so far, sampled every K iterations. The run
is compared with the guaranteed decay for short steps.
"""

import math

from bcfw import ExperimentConfig, nonconvex_rate_bound, run_experiment

N = 10
T = 2000


def main():
    cfg = ExperimentConfig(
        experiment="dcquad", n=N, iterations=T, instances=1, base_seed=0,
        strategies=["full", "cyclic", "pqlazy:3,5", "pqlazy:10,2"],
    )
    res = run_experiment(cfg)
    for spec, sr in res.items():
        inst = sr.instances[0]
        K, D = inst.K, math.sqrt(inst.D2)
        print(f"\n{spec}  (K={K}, L={inst.L:.3f}, H0 bound={inst.H0:.2f})")
        print(f"{'t':>6} {'min gap':>10} {'bound':>10} {'nuclear calls':>14}")
        for t in (0, 10 * K, 50 * K, 100 * K, (T // K) * K):
            if t > T:
                continue
            row = inst.rows[t]
            bound = nonconvex_rate_bound(t // K + 1, K, inst.L, D, inst.H0)
            print(f"{t:>6} {row['dmin']:>10.3e} {bound:>10.3e} {row[f'lmo_{N + 1}']:>14}")


if __name__ == "__main__":
    main()
