"""
Infer grating orders and the waveguide mismatch from a dual-process intersection.

At a temperature where type-0 and type-II phase match the same signal/idler
pair, each process gives one linear relation

    L - R = m * G + k_wg

with L the pump wavevector, R the signal+idler wavevector sum and G = 2*pi/Lambda.
Subtracting them eliminates k_wg and leaves the order gap m_x - m_y, which
must be an even difference of two positive odd integers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

from .dispersion import DispersionModel
from .errors import DomainError
from .phasematch import (
    PROCESS_AXES,
    GratingSpec,
    ProcessKind,
    grating_constant,
    idler_from_energy,
    wavevector,
)

__all__ = [
    "IntersectionObservation",
    "EquationConstants",
    "QpmSolution",
    "NoQpmSolution",
    "equation_constants",
    "order_gap",
    "infer_orders",
    "relative_brightness",
]

SCORE_THRESHOLD = 0.5


@dataclass(frozen=True)
class IntersectionObservation:
    temperature: float  # degC
    pump: float  # nm
    signal: float  # nm
    idler: float  # nm
    tolerance_nm: float = 0.1

    def __post_init__(self):
        expected = idler_from_energy(self.pump, self.signal)
        if abs(expected - self.idler) > self.tolerance_nm:
            raise DomainError(
                f"idler {self.idler} nm violates energy conservation "
                f"(expected {expected:.3f} nm from pump and signal)"
            )


class EquationConstants(NamedTuple):
    """Wavevector terms at the intersection, rad/um."""

    type0_pump: float  # L0
    type0_pair: float  # R0
    type2_pump: float  # L2
    type2_pair: float  # R2
    grating: float  # G

    def as_dict(self) -> dict:
        return {"L0": self.type0_pump, "R0": self.type0_pair, "L2": self.type2_pump,
                "R2": self.type2_pair, "G": self.grating}


@dataclass(frozen=True)
class QpmSolution:
    m_x: int
    m_y: int
    k_wg: float
    residual_split: float
    score: float
    alternatives: tuple[tuple[int, int], ...] = ()


class NoQpmSolution(Exception):
    def __init__(self, best: QpmSolution, gap: float):
        super().__init__(
            f"no odd order pair matches gap {gap:.3f}; best ({best.m_x}, {best.m_y}) "
            f"scores {best.score:.3f} >= {SCORE_THRESHOLD}"
        )
        self.best = best
        self.gap = gap


def equation_constants(
    disp: DispersionModel, grating: GratingSpec, obs: IntersectionObservation
) -> EquationConstants:
    """Evaluate both phase-matching relations at the observed (measured) wavelengths.

    The observed idler is used as given rather than recomputed from the pump
    and signal.
    """
    t = obs.temperature

    def terms(kind: ProcessKind) -> tuple[float, float]:
        pa, sa, ia = PROCESS_AXES[kind]
        pump_k = wavevector(disp, pa, obs.pump, t)
        pair_k = wavevector(disp, sa, obs.signal, t) + wavevector(disp, ia, obs.idler, t)
        return pump_k, pair_k

    l0, r0 = terms(ProcessKind.TYPE0)
    l2, r2 = terms(ProcessKind.TYPE2)
    return EquationConstants(l0, r0, l2, r2, grating_constant(grating, t))


def order_gap(constants: EquationConstants) -> float:
    """m_x - m_y implied by the two relations."""
    l0, r0, l2, r2, g = constants
    if g == 0:
        raise DomainError("degenerate grating: G = 0")
    return ((l0 - r0) - (l2 - r2)) / g


def _candidate(constants: EquationConstants, m_x: int, m_y: int, gap: float) -> QpmSolution:
    l0, r0, l2, r2, g = constants
    kx = l0 - r0 - m_x * g
    ky = l2 - r2 - m_y * g
    return QpmSolution(m_x, m_y, 0.5 * (kx + ky), abs(kx - ky), abs(gap - (m_x - m_y)))


def infer_orders(constants: EquationConstants, max_order: int = 9) -> QpmSolution:
    """Exhaustive search over odd (m_x, m_y) in [1, max_order].

    Pairs with the same difference score identically; the one with the
    smallest m_x + m_y wins and the others are listed in ``alternatives``.
    Raises NoQpmSolution if even the best pair is off by ``SCORE_THRESHOLD``.
    """
    if max_order < 1 or max_order % 2 == 0:
        raise DomainError(f"max_order must be a positive odd integer, got {max_order}")
    gap = order_gap(constants)
    odd = range(1, max_order + 1, 2)
    cands = [_candidate(constants, mx, my, gap) for mx, my in itertools.product(odd, odd)]
    best_score = min(c.score for c in cands)
    tied = sorted(
        (c for c in cands if math.isclose(c.score, best_score, rel_tol=1e-12, abs_tol=1e-12)),
        key=lambda c: (c.m_x + c.m_y, c.m_x),
    )
    best = tied[0]
    alts = tuple((c.m_x, c.m_y) for c in tied[1:])
    best = QpmSolution(best.m_x, best.m_y, best.k_wg, best.residual_split, best.score, alts)
    if best.score >= SCORE_THRESHOLD:
        raise NoQpmSolution(best, gap)
    return best


def relative_brightness(d_a: float, m_a: int, d_b: float, m_b: int) -> float:
    """Pair-rate ratio of two QPM processes from (d_eff / m)^2 scaling."""
    if min(d_a, d_b, m_a, m_b) <= 0:
        raise DomainError("nonlinear coefficients and orders must be positive")
    return (d_a / m_a) ** 2 / (d_b / m_b) ** 2
