"""The two-constants inequality, probed from below.

||u||_K <= C ||u||_E^(1 - a - e) ||u||_D^(a + e) for harmonic u, with K
inside the sublevel {chi_0 < a}.  A random ensemble fits C; an LP adversary
searches for the worst polynomial at each growth cap T.
"""

from quasiharmonic.geometry import ShapeDescriptor, sample_shape
from quasiharmonic.two_constants import adversarial_profile, verify_random


def main():
    E = sample_shape(ShapeDescriptor.circle((0, 0), 0.5), 0.05, "E")
    K = sample_shape(ShapeDescriptor.circle((0, 0), 0.6), 0.05, "K")
    D = sample_shape(ShapeDescriptor.disk((0, 0), 2.0), 0.1, "D")
    rep = verify_random(E, K, D, alpha=0.2, eps=0.2, degree=10, n_samples=500, seed=7)
    print(f"max chi_0 on K = {rep.region_max_chi0:.3f} (must be < alpha = 0.2)")
    print(f"500 random degree-10 polynomials: worst ratio {rep.worst_ratio:.3f}, fitted C {rep.fitted_C:.3f}")
    for T, r in adversarial_profile(E, K, D, 0.2, 0.2, 10, [1, 10, 100, 1000]):
        print(f"  adversary, T = {T:6g}: max |u| on K / T^0.4 = {r:.3f}")
    print(rep.notes)


if __name__ == "__main__":
    main()
