"""Knot energies of closed space curves: pairwise-integral energies, the Mm-energy,
extremality residuals and energy minimization over polyline knots."""

from .catalog import build, list_presets
from .energy import EnergyReport, total_energy
from .geometry import (
    ArcCurve,
    KnotError,
    NumericalError,
    PolyKnot,
    normalize_length,
    resample_arclength,
)
from .io import read_knot, write_knot
from .kernels import EnergyKernel, get_kernel, kernel_arc3_chord2, kernel_charged_constrained, kernel_mobius
from .mm import check_obtuse, distance_profile, e_mm, f_mm
from .optimize import AnnealConfig, OptimResult, anneal, descend
from .variation import ResidualField, closed_form_field, residual_field

__version__ = "0.1.0"
