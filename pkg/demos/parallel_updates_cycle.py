"""Why parallel block updates need a global smoothness constant.

f(x1, x2) = (x1 + x2)^2 on [-1, 1]^2, starting at (1, 1). Each block on its
own is 2-smooth, and an exact line search along each block is optimal in
isolation. Applying those steps to both blocks at once overshoots to
(-1, -1) and back forever. Using the global constant 4 solves the problem
in one step.
"""

from bcfw import BlockVector, Box, Full, ProductDomain, SmoothObjective, run_componentwise_linesearch, run_short_step


class SumSquare(SmoothObjective):
    lipschitz = 4.0

    def value(self, x):
        return float(x[0][0] + x[1][0]) ** 2

    def gradient(self, x):
        s = 2.0 * float(x[0][0] + x[1][0])
        return BlockVector([[s], [s]], copy=False)


def main():
    dom = ProductDomain([Box((1,), -1.0, 1.0), Box((1,), -1.0, 1.0)])
    x0 = BlockVector([[1.0], [1.0]])
    f = SumSquare()

    runs = {
        "line search per block": run_componentwise_linesearch(f, dom, Full(2), x0, 6, store_every=1),
        "short step, beta_i = 2": run_short_step(f, dom, Full(2), x0, 6, L=4.0, block_constants=[2.0, 2.0], store_every=1),
        "short step, L = 4": run_short_step(f, dom, Full(2), x0, 6, store_every=1),
    }
    for name, run in runs.items():
        path = " -> ".join(f"({x[0][0]:+.0f},{x[1][0]:+.0f})" for x in run.stored_iterates.values())
        print(f"{name:>24}: {path}   f = {run.f_values[-1]:g}")


if __name__ == "__main__":
    main()
