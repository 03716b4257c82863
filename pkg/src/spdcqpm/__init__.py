"""Quasi-phase-matched SPDC in periodically poled KTP-family waveguides.

Dispersion, temperature tuning, QPM-order inference from a dual-process
spectral intersection, and photon-pair coincidence statistics.
"""

from .dispersion import Axis, DispersionModel, load_model, refractive_index, sellmeier_index, temperature_correction
from .errors import DomainError, FitError, ModelError
from .phasematch import (
    GratingSpec,
    ProcessKind,
    ProcessSpec,
    TuningCurve,
    TuningPoint,
    degeneracy_temperature,
    find_intersection,
    idler_from_energy,
    phase_mismatch,
    poling_period,
    solve_pair,
    tuning_curve,
)
from .qpm_inference import IntersectionObservation, equation_constants, infer_orders, order_gap, relative_brightness

__version__ = "0.1.0"
