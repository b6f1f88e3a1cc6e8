"""The dense simplex solver on its own.

maximize c.x subject to A x <= b with free x; the answer carries a dual
certificate, and warm starts reuse a previous basis.
"""

import numpy as np

from quasiharmonic.lp_core import maximize


def main():
    sol = maximize([1.0, 1.0], [[1, 0], [0, 1], [1, 1]], [1, 1, 1.5])
    print(f"max x + y on the clipped square: {sol.objective_value} at {sol.x}, dual {sol.dual}")

    print("unbounded:", maximize([1.0], [[-1.0]], [0.0]).status)
    print("infeasible:", maximize([1.0], [[1.0], [-1.0]], [0.0, -1.0]).status)

    rng = np.random.default_rng(1)
    A = rng.standard_normal((200, 8))
    b = A @ rng.standard_normal(8) + 1.0
    cold = maximize(A[0] + A[1], A, b)
    warm = maximize(A[0] + A[2], A, b, basis=cold.basis)
    print(f"200 x 8: cold start {cold.iterations} pivots; new objective warm-started in {warm.iterations}")
    print(f"  duality gap {warm.duality_gap:.1e}, max violation {warm.max_violation:.1e}")


if __name__ == "__main__":
    main()
