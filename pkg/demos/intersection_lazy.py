"""Find a point in box ∩ spectraplex, postponing the expensive eigenvector oracle.

The box oracle is a sign pattern; the spectraplex oracle needs an extreme
eigenvector. Lazy schedules call the second one only every q iterations,
so at a fixed budget of eigenvector computations they can get further.
"""

import numpy as np

from bcfw import intersect_problem, parse_schedule, run_short_step

N = 20
T = 2000
BUDGET = 200  # spectraplex oracle calls


def gap_at_budget(run, budget):
    f = run.f_values
    # records[t].lmo_calls holds the counts after t + 1 iterations
    last = max(t + 1 for t, r in enumerate(run.records) if r.lmo_calls[1] <= budget)
    return last, f[last]


def main():
    print(f"n={N}, T={T}; primal gap f(x) - 0 after {BUDGET} spectraplex calls\n")
    print(f"{'schedule':>10} {'iters':>6} {'gap at budget':>14} {'final gap':>11} {'box/spx calls':>14}")
    for spec in ["full", "cyclic", "pcyclic", "qlazy:5", "qlazy:10", "qlazy:20"]:
        gaps = []
        for seed in range(3):
            prob = intersect_problem(N, seed)
            sched = parse_schedule(spec, 2, expensive=prob.expensive, seed=seed)
            run = run_short_step(prob.obj, prob.domain, sched, prob.x0, T)
            it, g = gap_at_budget(run, BUDGET)
            gaps.append((it, g, run.f_final, run.records[-1].lmo_calls))
        it = gaps[0][0]
        g = np.mean([x[1] for x in gaps])
        fin = np.mean([x[2] for x in gaps])
        calls = gaps[0][3]
        print(f"{spec:>10} {it:>6} {g:>14.3e} {fin:>11.3e} {calls[0]:>7}/{calls[1]:<6}")

    # the two blocks end up close: the box block is almost a trace-one PSD matrix
    prob = intersect_problem(N, 0)
    run = run_short_step(prob.obj, prob.domain, parse_schedule("qlazy:10", 2, seed=0), prob.x0, T)
    dist = np.linalg.norm(run.x[0] - run.x[1])
    w = np.linalg.eigvalsh(0.5 * (run.x[0] + run.x[0].T))
    print(f"\nqlazy:10: ||box block - spectraplex block||_F = {dist:.3f}, box block min eigenvalue {w[0]:.2e}")

if __name__ == "__main__":
    main()
