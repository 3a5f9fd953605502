"""Construction and finite-level verification of spectral infinite convolutions."""

from .constructions import (
    TargetDims,
    compact_family,
    counterexample_inequalities,
    counterexample_prefix,
    g_gamma,
    make_family,
    noncompact_family,
    quarter_family,
)
from .exact_linalg import Mat, cube_in_image, invert
from .hadamard import canonical_dual, check_unitary, lattice_report, theorem11_check
from .measure_lab import AtomicMeasure, convolve, dirac_uniform, finite_convolution, fourier
from .sequence import DigitSet, Level, SequenceSpec

__all__ = [
    "AtomicMeasure",
    "DigitSet",
    "Level",
    "Mat",
    "SequenceSpec",
    "TargetDims",
    "canonical_dual",
    "check_unitary",
    "compact_family",
    "convolve",
    "counterexample_inequalities",
    "counterexample_prefix",
    "cube_in_image",
    "dirac_uniform",
    "finite_convolution",
    "fourier",
    "g_gamma",
    "invert",
    "lattice_report",
    "make_family",
    "noncompact_family",
    "quarter_family",
    "theorem11_check",
]

__version__ = "0.1.0"
