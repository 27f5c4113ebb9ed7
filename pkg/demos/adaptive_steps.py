"""Backtracked smoothness estimates instead of a known constant.

The adaptive engine starts from a guess M0 and adjusts it every iteration.
With M0 equal to the true constant and no shrinking it reproduces the short
step exactly; from a bad guess it settles within a factor tau of the truth
while spending only a few extra function and gradient evaluations.
"""

import numpy as np

from bcfw import Full, adaptive_eval_bound, intersect_problem, m_burn_in, run_adaptive, run_short_step

T = 300


def main():
    prob = intersect_problem(10, 0)
    L = prob.L

    short = run_short_step(prob.obj, prob.domain, Full(2), prob.x0, T)
    same = run_adaptive(prob.obj, prob.domain, Full(2), prob.x0, T, M0=L, eta=1.0, tau=2.0)
    dev = np.max(np.abs(short.x.flatten() - same.x.flatten()))
    print(f"M0=L, eta=1: max deviation from short step after {T} iterations = {dev:.1e}\n")

    print(f"{'M0':>8} {'eta':>5} {'final f':>10} {'evals':>6} {'bound':>6} {'burn-in':>8} {'M_T':>8}")
    for M0 in (0.01, 1.0, 100.0):
        for eta in (0.9, 1.0):
            run = run_adaptive(prob.obj, prob.domain, Full(2), prob.x0, T, M0=M0, eta=eta, tau=2.0)
            t0 = m_burn_in(M0, eta, 2.0, L)
            print(
                f"{M0:>8g} {eta:>5} {run.f_final:>10.3e} {run.records[-1].f_evals:>6} "
                f"{adaptive_eval_bound(T, L, M0, eta, 2.0):>6} {str(t0):>8} {run.records[-1].M:>8.3f}"
            )
    print(f"\nshort step with L={L}: final f {short.f_final:.3e}")


if __name__ == "__main__":
    main()
