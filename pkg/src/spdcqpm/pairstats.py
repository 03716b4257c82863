"""
Photon-pair rate analysis: accidental subtraction, CAR, slope fits and the
efficiency chain from detected coincidences back to generated pairs.

Rates are in Hz (or Hz/mW for slopes) everywhere. Use ``MHZ`` to convert.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import DomainError, FitError

__all__ = [
    "MHZ",
    "SPEED_OF_LIGHT",
    "CoincidencePoint",
    "LossBudget",
    "FitResult",
    "TrueCoincidences",
    "SpectralDensity",
    "true_coincidences",
    "accidentals_estimate",
    "car",
    "fit_through_origin",
    "splitter_correction",
    "loss_corrected_rate",
    "spectral_density",
    "analyze_points",
]

MHZ = 1e6
SPEED_OF_LIGHT = 299_792_458.0  # m/s


@dataclass(frozen=True)
class CoincidencePoint:
    pump_power: float  # mW
    measured_coincidences: float  # Hz
    accidentals: float  # Hz
    window: float = 2e-9  # s

    def __post_init__(self):
        if min(self.pump_power, self.measured_coincidences, self.accidentals) < 0:
            raise DomainError("coincidence data must be non-negative")
        if self.window <= 0:
            raise DomainError("coincidence window must be positive")


@dataclass(frozen=True)
class LossBudget:
    pump_coupling: float = 1.0
    fiber_coupling: float = 1.0
    detector_efficiency: float = 1.0  # per arm
    filter_transmission: float = 1.0  # per filter
    n_filters: int = 0

    def __post_init__(self):
        for name in ("pump_coupling", "fiber_coupling", "detector_efficiency", "filter_transmission"):
            v = getattr(self, name)
            if not (0 < v <= 1):
                raise DomainError(f"{name} must lie in (0, 1], got {v}")
        if self.n_filters < 0 or int(self.n_filters) != self.n_filters:
            raise DomainError("n_filters must be a non-negative integer")

    @property
    def total_efficiency(self) -> float:
        # both arms must fire, hence the squared detector term
        return (
            self.pump_coupling
            * self.fiber_coupling
            * self.detector_efficiency**2
            * self.filter_transmission**self.n_filters
        )

    @classmethod
    def from_dict(cls, data: dict) -> "LossBudget":
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        unknown = set(data) - set(known)
        if unknown:
            raise DomainError(f"unknown loss-budget fields: {sorted(unknown)}")
        return cls(**known)


# pump coupling, SMF coupling, per-arm detector, 2 long-pass filters
REFERENCE_BUDGET = LossBudget(0.35, 0.30, 0.65, 0.98, 2)


@dataclass(frozen=True)
class FitResult:
    slope: float
    slope_stderr: float
    r_squared: float
    n_points: int


class TrueCoincidences(NamedTuple):
    rate: float
    underflow: bool


class SpectralDensity(NamedTuple):
    per_nm: float
    bandwidth_thz: float
    per_thz: float


def true_coincidences(measured: float, accidentals: float) -> TrueCoincidences:
    """Accidental-subtracted rate, clamped at zero. ``underflow`` marks a clamp."""
    if measured < 0 or accidentals < 0:
        raise DomainError("rates must be non-negative")
    diff = measured - accidentals
    return TrueCoincidences(max(diff, 0.0), diff < 0)


def accidentals_estimate(singles_a: float, singles_b: float, window: float) -> float:
    """Uncorrelated coincidence rate R_a * R_b * tau."""
    if singles_a < 0 or singles_b < 0:
        raise DomainError("singles rates must be non-negative")
    if window <= 0:
        raise DomainError("window must be positive")
    return singles_a * singles_b * window


def car(true_rate: float, accidentals: float) -> float:
    """True-to-accidental ratio. Zero accidentals give inf (nan if there is no signal either)."""
    if accidentals == 0:
        return math.inf if true_rate > 0 else math.nan
    return true_rate / accidentals


def fit_through_origin(points: Iterable[tuple[float, float]]) -> FitResult:
    """Least-squares y = k*x with no intercept.

    R^2 is computed against the spread of y about its mean.
    """
    arr = np.asarray(list(points), dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 2 or arr.shape[1] != 2:
        raise FitError("need at least two (x, y) points")
    x, y = arr[:, 0], arr[:, 1]
    sxx = float(np.dot(x, x))
    if sxx == 0:
        raise FitError("all x values are zero")
    slope = float(np.dot(x, y)) / sxx
    resid = y - slope * x
    ss_res = float(np.dot(resid, resid))
    n = len(x)
    stderr = math.sqrt(ss_res / (n - 1) / sxx)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0:
        r2 = 1.0 if ss_res == 0 else -math.inf
    else:
        r2 = 1.0 - ss_res / ss_tot
    return FitResult(slope, stderr, r2, n)


def splitter_correction(coincidence_rate: float) -> float:
    """A 50:50 splitter separates only half the pairs."""
    if coincidence_rate < 0:
        raise DomainError("rate must be non-negative")
    return 2.0 * coincidence_rate


def loss_corrected_rate(effective_rate: float, budget: LossBudget) -> float:
    return effective_rate / budget.total_efficiency


def spectral_density(rate: float, bandwidth: float, center_wavelength: float) -> SpectralDensity:
    """Rate per nm and per THz for a filter of ``bandwidth`` nm centred at ``center_wavelength`` nm."""
    if min(rate, bandwidth, center_wavelength) <= 0:
        raise DomainError("rate, bandwidth and wavelength must be positive")
    dnu_thz = SPEED_OF_LIGHT * (bandwidth * 1e-9) / (center_wavelength * 1e-9) ** 2 / 1e12
    return SpectralDensity(rate / bandwidth, dnu_thz, rate / dnu_thz)


def analyze_points(
    points: Sequence[CoincidencePoint], budget: LossBudget = LossBudget()
) -> dict:
    """Full pipeline over a power sweep: subtract, fit, correct. Rates in Hz."""
    trues = [true_coincidences(p.measured_coincidences, p.accidentals) for p in points]
    fit = fit_through_origin((p.pump_power, t.rate) for p, t in zip(points, trues))
    effective = splitter_correction(fit.slope)
    return {
        "slope": fit.slope,
        "stderr": fit.slope_stderr,
        "r_squared": fit.r_squared,
        "effective_rate": effective,
        "effective_stderr": 2.0 * fit.slope_stderr,
        "intrinsic_rate": loss_corrected_rate(effective, budget),
        "total_efficiency": budget.total_efficiency,
        "car_series": [
            {
                "power_mw": p.pump_power,
                "true_hz": t.rate,
                "accidentals_hz": p.accidentals,
                "car": car(t.rate, p.accidentals),
                "underflow": t.underflow,
            }
            for p, t in zip(points, trues)
        ],
    }
