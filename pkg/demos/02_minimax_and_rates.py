"""Best harmonic approximation on the unit disk and its decay rate.

Three targets show the three behaviours the rate classifier separates:
a harmonic polynomial (exact from its degree on), Re 1/(2 - z) (geometric
decay at rate 1/2 since the pole sits at distance 2) and |x1| (no decay:
the deviation tends to 1/pi).
"""

from quasiharmonic import rates
from quasiharmonic.geometry import ShapeDescriptor, sample_shape
from quasiharmonic.harmonic_basis import BasisSpec, HarmonicPoly
from quasiharmonic.minimax import abs_coordinate, deviation_sequence, harmonic_target, pole_target


def main():
    K = sample_shape(ShapeDescriptor.disk((0, 0), 1.0), 0.05, "K")
    cubic = HarmonicPoly(BasisSpec(2, 3), [-1.0, 0.5, 0, 0, 0.5, 1.0, -0.25])
    cases = [
        ("harmonic cubic", harmonic_target(cubic), 10, 4),
        ("Re 1/(2 - z)", pole_target(2.0), 20, 6),
        ("|x1|", abs_coordinate(0), 25, 3),
    ]
    for label, f, m_max, window in cases:
        devs = [r.deviation for r in deviation_sequence(f, K, m_max)]
        rep = rates.classify(devs, window, exact_tol=1e-9)
        shown = ", ".join(f"{d:.2e}" for d in devs[::5])
        print(f"{label}: l_m for m = 0, 5, ... -> {shown}")
        print(f"  window {rep.tail_window}: limsup {rep.limsup_estimate:.4f}, "
              f"liminf {rep.liminf_estimate:.4f}, class {rep.classification}")


if __name__ == "__main__":
    main()
