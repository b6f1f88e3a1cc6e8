"""Harmonic polynomial bases in 2D and 3D.

In the plane the basis is 1, Re z^k, Im z^k; in space it is the real solid
harmonics r^l Y_lm.  We evaluate a few elements, check harmonicity with a
finite-difference Laplacian and watch sup norms grow like R^m.
"""

import numpy as np

from quasiharmonic.geometry import ShapeDescriptor, sample_shape
from quasiharmonic.harmonic_basis import BasisSpec, HarmonicPoly, eval_basis, sup_norm


def laplacian(spec, X, h=1e-3):
    lap = 0.0
    for j in range(spec.dim):
        e = np.zeros(spec.dim)
        e[j] = h
        lap = lap + (eval_basis(spec, X + e) - 2 * eval_basis(spec, X) + eval_basis(spec, X - e)) / h**2
    return lap


def main():
    spec = BasisSpec(2, 3)
    print("2D degree-3 basis at z = 1 + i:", np.round(eval_basis(spec, (1.0, 1.0)), 6))
    print("  (order: 1, Re z, Im z, Re z^2, Im z^2, Re z^3, Im z^3)")

    rng = np.random.default_rng(0)
    for dim in (2, 3):
        spec = BasisSpec(dim, 8)
        X = rng.uniform(-0.5, 0.5, (20, dim))
        print(f"{dim}D, degree <= 8, {spec.size} elements: max |FD Laplacian| = {np.abs(laplacian(spec, X)).max():.1e}")

    p = HarmonicPoly(BasisSpec(2, 6), np.r_[np.zeros(11), 1.0, 0.0])  # Re z^6
    for R in (0.5, 1.0, 2.0):
        C = sample_shape(ShapeDescriptor.circle((0, 0), R), 0.01)
        print(f"sup of Re z^6 on |z| = {R}: {sup_norm(p, C):.4f} (R^6 = {R**6:.4f})")


if __name__ == "__main__":
    main()
