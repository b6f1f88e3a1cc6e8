"""Numerics for uniqueness of quasiharmonic functions.

Submodules: ``geometry`` (sampled sets), ``harmonic_basis``, ``lp_core``
(dense simplex), ``minimax`` (least deviations), ``rates``,
``chi_measure`` (extremal function), ``regularity`` (Bernstein ratios),
``two_constants``, ``uniqueness`` (the full chain) and ``cli``.
"""

from .geometry import SampledSet, Scene, ShapeDescriptor, sample_shape
from .harmonic_basis import BasisSpec, HarmonicPoly, eval_basis
from .minimax import TargetFunction, best_approx, deviation_sequence

__all__ = [
    "BasisSpec",
    "HarmonicPoly",
    "SampledSet",
    "Scene",
    "ShapeDescriptor",
    "TargetFunction",
    "best_approx",
    "deviation_sequence",
    "eval_basis",
    "sample_shape",
]
__version__ = "0.1.0"
