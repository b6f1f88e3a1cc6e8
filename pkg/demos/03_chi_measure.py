"""The chi_0 extremal function of a circle inside a larger disk.

chi_0 vanishes on E (the circle of radius 1/2), stays small near it and
approaches 1 towards the boundary of D (the disk of radius 2).  A point set
that some harmonic polynomial annihilates is negligible: chi_0 is 1 off E.
"""

import numpy as np

from quasiharmonic.chi_measure import ChiParams, ChiSolver, chi0_at, is_null_chi
from quasiharmonic.geometry import ShapeDescriptor, sample_shape


def main():
    E = sample_shape(ShapeDescriptor.circle((0, 0), 0.5), 0.05, "E")
    D = sample_shape(ShapeDescriptor.disk((0, 0), 2.0), 0.1, "D")
    params = ChiParams(surrogate_degree=10)
    solver = ChiSolver(E, D, params)
    print("chi_0 along the positive x axis (E is the circle r = 0.5, D the disk r = 2):")
    for r in (0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 1.9):
        res = chi0_at((r, 0.0), E, D, params, solver)
        print(f"  r = {r:4.2f}: chi_0 = {res.value:.3f}  (chi_eps by eps: {np.round(res.by_eps, 3)})")

    few = sample_shape(ShapeDescriptor.finite_points([(0.1, 0.0), (-0.2, 0.3), (0.0, -0.4)]), 0.1, "E")
    ev = is_null_chi(few, D, ChiParams(surrogate_degree=8), grid=6)
    print(f"three points: null = {ev.is_null}, annihilating polynomial found = {ev.annihilating}")


if __name__ == "__main__":
    main()
