"""Bernstein ratios as evidence of H-regularity.

For the closed disk the ratio ||P||_B / ||P||_{E cap B} grows slower than
any geometric rate, so its m-th root tends to 1.  A segment is annihilated
by Im z, and the probe returns that polynomial as a witness.
"""

from quasiharmonic.geometry import ShapeDescriptor, sample_shape
from quasiharmonic.regularity import regularity_profile


def main():
    disk = sample_shape(ShapeDescriptor.disk((0, 0), 1.0), 0.05, "E")
    prof = regularity_profile(disk, (0.0, 0.0), 0.5, 15, window=5)
    print("disk: rho_m^(1/m) =", ", ".join(f"{v:.3f}" for v in prof.root_ratios))
    print(f"  growth estimate {prof.growth_estimate:.4f} -> {prof.verdict}")

    seg = sample_shape(ShapeDescriptor.segment((-1, 0), (1, 0)), 0.05, "E")
    prof = regularity_profile(seg, (0.0, 0.0), 0.5, 6, window=3)
    w = prof.witness
    print(f"segment: {prof.verdict}; witness coefficients {[round(float(c), 3) for c in w.coeffs]}")
    print(f"  witness at (0.3, 0) = {float(w((0.3, 0.0))):.1e}, at (0, 0.5) = {float(w((0.0, 0.5))):.3f}")


if __name__ == "__main__":
    main()
