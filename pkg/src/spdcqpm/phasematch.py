"""
Quasi-phase matching in a periodically poled waveguide.

Mismatch for a pump -> signal + idler process of grating order m:

    dk = k_p - k_s - k_i - m * 2*pi/Lambda(T) - k_wg,    k = 2*pi*n(axis, lambda, T)/lambda

All wavevectors are in rad/um. Public functions take wavelengths in nm and
temperatures in degC; conversion to um happens here.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

from .dispersion import Axis, DispersionModel, refractive_index
from .errors import DomainError

__all__ = [
    "GratingSpec",
    "ProcessKind",
    "ProcessSpec",
    "TuningPoint",
    "TuningCurve",
    "Intersection",
    "poling_period",
    "grating_constant",
    "idler_from_energy",
    "wavevector",
    "phase_mismatch",
    "solve_pair",
    "tuning_curve",
    "degeneracy_temperature",
    "find_intersection",
    "bracketed_root",
]

TWO_PI = 2.0 * math.pi
DEFAULT_SIGNAL_BRACKET = (700.0, 810.0)


@dataclass(frozen=True)
class GratingSpec:
    poling_period_0: float = 9.96  # um, at t_ref
    alpha: float = 6.7e-6  # 1/degC
    beta: float = 11e-9  # 1/degC^2
    length: float = 12.0  # mm, metadata only
    t_ref: float = 25.0
    t_range: tuple[float, float] = (0.0, 100.0)

    def __post_init__(self):
        if self.poling_period_0 <= 0:
            raise DomainError("poling period must be positive")


class ProcessKind(enum.Enum):
    TYPE0 = "type0"
    TYPE2 = "type2"

    @classmethod
    def parse(cls, value: "str | ProcessKind") -> "ProcessKind":
        if isinstance(value, ProcessKind):
            return value
        key = value.lower().replace("-", "").replace("_", "")
        aliases = {"type0": cls.TYPE0, "0": cls.TYPE0, "type2": cls.TYPE2, "typeii": cls.TYPE2, "2": cls.TYPE2}
        if key not in aliases:
            raise DomainError(f"unknown process kind {value!r}")
        return aliases[key]


# (pump, signal, idler) polarization axes
PROCESS_AXES = {
    ProcessKind.TYPE0: (Axis.Z, Axis.Z, Axis.Z),
    ProcessKind.TYPE2: (Axis.Y, Axis.Z, Axis.Y),
}


@dataclass(frozen=True)
class ProcessSpec:
    kind: ProcessKind
    qpm_order: int = 1
    k_wg: float = 0.0  # rad/um
    d_eff: Optional[float] = None  # pm/V, used only for brightness ratios

    def __post_init__(self):
        object.__setattr__(self, "kind", ProcessKind.parse(self.kind))
        m = self.qpm_order
        if int(m) != m or m < 1 or m % 2 == 0:
            raise DomainError(f"QPM order must be a positive odd integer, got {m}")

    @property
    def axes(self) -> tuple[Axis, Axis, Axis]:
        return PROCESS_AXES[self.kind]

    @property
    def pump_axis(self) -> Axis:
        return self.axes[0]

    @property
    def signal_axis(self) -> Axis:
        return self.axes[1]

    @property
    def idler_axis(self) -> Axis:
        return self.axes[2]

    @property
    def symmetric(self) -> bool:
        """Signal and idler share a polarization, so dk is symmetric under their exchange."""
        return self.signal_axis is self.idler_axis


@dataclass(frozen=True)
class TuningPoint:
    temperature: float  # degC
    signal_wavelength: float  # nm
    idler_wavelength: float  # nm
    residual: float  # rad/um


@dataclass
class TuningCurve:
    """Sweep result. ``points[i]`` is None where no phase-matched pair exists at ``temperatures[i]``."""

    temperatures: list[float]
    points: list[Optional[TuningPoint]]

    @property
    def solved(self) -> list[TuningPoint]:
        return [p for p in self.points if p is not None]

    @property
    def gaps(self) -> list[float]:
        return [t for t, p in zip(self.temperatures, self.points) if p is None]

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class Intersection:
    temperature: float
    point_a: Optional[TuningPoint]
    point_b: Optional[TuningPoint]
    identical: bool = False

    @property
    def point(self) -> Optional[TuningPoint]:
        return self.point_a


def poling_period(grating: GratingSpec, temperature: float) -> float:
    """Thermally expanded poling period in um."""
    lo, hi = grating.t_range
    if not (lo <= temperature <= hi):
        raise DomainError(f"temperature {temperature} degC outside [{lo}, {hi}] degC")
    dt = temperature - grating.t_ref
    return grating.poling_period_0 * (1.0 + grating.alpha * dt + grating.beta * dt * dt)


def grating_constant(grating: GratingSpec, temperature: float) -> float:
    """2*pi/Lambda(T) in rad/um."""
    return TWO_PI / poling_period(grating, temperature)


def idler_from_energy(pump: float, signal: float) -> float:
    if not (0 < pump < signal):
        raise DomainError(f"need 0 < pump < signal, got pump={pump}, signal={signal}")
    return 1.0 / (1.0 / pump - 1.0 / signal)


def wavevector(disp: DispersionModel, axis: Axis, wavelength_nm: float, temperature: float) -> float:
    lam = wavelength_nm * 1e-3
    return TWO_PI * refractive_index(disp, axis, lam, temperature) / lam


def phase_mismatch(
    disp: DispersionModel,
    grating: GratingSpec,
    proc: ProcessSpec,
    pump: float,
    signal: float,
    temperature: float,
) -> float:
    idler = idler_from_energy(pump, signal)
    pa, sa, ia = proc.axes
    return (
        wavevector(disp, pa, pump, temperature)
        - wavevector(disp, sa, signal, temperature)
        - wavevector(disp, ia, idler, temperature)
        - proc.qpm_order * grating_constant(grating, temperature)
        - proc.k_wg
    )


def bracketed_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    xtol: float,
    ftol: float,
    f_lo: Optional[float] = None,
    f_hi: Optional[float] = None,
) -> Optional[tuple[float, float]]:
    """Root of ``f`` on [lo, hi]: bisection down to ``xtol``, then secant polish.

    Returns ``(x, f(x))`` or None when the endpoints do not change sign.
    The secant step is only accepted while it stays inside the current bracket;
    otherwise bisection resumes, so convergence is guaranteed.
    """
    f_lo = f(lo) if f_lo is None else f_lo
    f_hi = f(hi) if f_hi is None else f_hi
    if f_lo == 0:
        return lo, f_lo
    if f_hi == 0:
        return hi, f_hi
    if (f_lo > 0) == (f_hi > 0):
        return None

    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid == 0:
            return mid, f_mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid

    best = (lo, f_lo) if abs(f_lo) < abs(f_hi) else (hi, f_hi)
    x0, f0, x1, f1 = lo, f_lo, hi, f_hi
    for _ in range(60):
        if abs(best[1]) < ftol * 1e-3 or f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        if not (lo <= x2 <= hi):
            x2 = 0.5 * (lo + hi)
        f2 = f(x2)
        if abs(f2) < abs(best[1]):
            best = (x2, f2)
        if f2 == 0:
            break
        if (f2 > 0) == (f_lo > 0):
            lo, f_lo = x2, f2
        else:
            hi, f_hi = x2, f2
        x0, f0, x1, f1 = x1, f1, x2, f2
        if hi - lo < 1e-15 * max(1.0, abs(hi)):
            break
    return best


def _check_signal_bracket(disp: DispersionModel, pump: float, bracket) -> tuple[float, float]:
    lo, hi = map(float, bracket)
    if not (pump < lo < hi):
        raise DomainError(f"signal bracket {bracket} must satisfy pump < low < high")
    for s in (lo, hi):
        disp.check_wavelength(s * 1e-3)
        disp.check_wavelength(idler_from_energy(pump, s) * 1e-3)
    return lo, hi


def solve_pair(
    disp: DispersionModel,
    grating: GratingSpec,
    proc: ProcessSpec,
    pump: float,
    temperature: float,
    bracket: tuple[float, float] = DEFAULT_SIGNAL_BRACKET,
    xtol: float = 1e-3,
    ftol: float = 1e-6,
) -> Optional[TuningPoint]:
    """Phase-matched signal/idler pair at a fixed temperature, or None.

    The signal wavelength is searched inside ``bracket`` (nm). For co-polarized
    signal and idler the bracket is clipped at degeneracy so the mirror root
    above 2*pump cannot cancel the sign change.
    """
    lo, hi = _check_signal_bracket(disp, pump, bracket)
    degenerate = 2.0 * pump
    if proc.symmetric and lo < degenerate < hi:
        hi = degenerate
    disp.check_wavelength(pump * 1e-3)
    poling_period(grating, temperature)

    root = bracketed_root(
        lambda s: phase_mismatch(disp, grating, proc, pump, s, temperature),
        lo,
        hi,
        xtol=xtol,
        ftol=ftol,
    )
    if root is None:
        return None
    signal, residual = root
    idler = idler_from_energy(pump, signal) if signal != degenerate else degenerate
    if signal > idler:
        signal, idler = idler, signal
    return TuningPoint(temperature, signal, idler, residual)


def _temperature_grid(t_lo: float, t_hi: float, step: float) -> list[float]:
    if step <= 0:
        raise DomainError("temperature step must be positive")
    if t_hi < t_lo:
        raise DomainError(f"empty temperature range [{t_lo}, {t_hi}]")
    n = int(math.floor((t_hi - t_lo) / step + 1e-9)) + 1
    return [t_lo + i * step for i in range(n)]


def tuning_curve(
    disp: DispersionModel,
    grating: GratingSpec,
    proc: ProcessSpec,
    pump: float,
    t_range: tuple[float, float],
    step: float,
    bracket: tuple[float, float] = DEFAULT_SIGNAL_BRACKET,
) -> TuningCurve:
    temps = _temperature_grid(t_range[0], t_range[1], step)
    return TuningCurve(temps, [solve_pair(disp, grating, proc, pump, t, bracket) for t in temps])


def _first_sign_change(g: Callable[[float], Optional[float]], grid: list[float]):
    prev_t, prev_v = None, None
    for t in grid:
        v = g(t)
        if v is None or math.isnan(v):
            prev_t, prev_v = None, None
            continue
        if v == 0:
            return t, t, v, v
        if prev_v is not None and (prev_v > 0) != (v > 0):
            return prev_t, t, prev_v, v
        prev_t, prev_v = t, v
    return None


def degeneracy_temperature(
    disp: DispersionModel,
    grating: GratingSpec,
    proc: ProcessSpec,
    pump: float,
    t_bracket: tuple[float, float] = (20.0, 80.0),
    scan_step: float = 0.5,
    ftol: float = 1e-6,
) -> Optional[float]:
    """Lowest temperature in ``t_bracket`` where the degenerate pair (2*pump) is phase matched."""
    degenerate = 2.0 * pump

    def dk(t: float) -> float:
        return phase_mismatch(disp, grating, proc, pump, degenerate, t)

    grid = _temperature_grid(t_bracket[0], t_bracket[1], scan_step)
    if grid[-1] < t_bracket[1]:
        grid.append(float(t_bracket[1]))
    found = _first_sign_change(dk, grid)
    if found is None:
        return None
    lo, hi, f_lo, f_hi = found
    if lo == hi:
        return lo
    root = bracketed_root(dk, lo, hi, xtol=1e-4, ftol=ftol, f_lo=f_lo, f_hi=f_hi)
    return None if root is None else root[0]


def find_intersection(
    disp: DispersionModel,
    grating: GratingSpec,
    proc_a: ProcessSpec,
    proc_b: ProcessSpec,
    pump: float,
    t_bracket: tuple[float, float] = (20.0, 80.0),
    bracket: tuple[float, float] = DEFAULT_SIGNAL_BRACKET,
    scan_step: float = 0.5,
) -> Optional[Intersection]:
    """Temperature where both processes phase match the same signal wavelength.

    Scans ``t_bracket`` for a sign change of the signal-wavelength difference
    between the two tuning curves, then refines it. Returns None if the curves
    never cross where both are solvable.
    """
    t_lo, t_hi = t_bracket
    if proc_a == proc_b:
        pt = solve_pair(disp, grating, proc_a, pump, t_lo, bracket)
        return Intersection(t_lo, pt, pt, identical=True)

    def gap(t: float) -> Optional[float]:
        a = solve_pair(disp, grating, proc_a, pump, t, bracket, xtol=1e-6)
        b = solve_pair(disp, grating, proc_b, pump, t, bracket, xtol=1e-6)
        if a is None or b is None:
            return None
        return a.signal_wavelength - b.signal_wavelength

    grid = _temperature_grid(t_lo, t_hi, scan_step)
    if grid[-1] < t_hi:
        grid.append(float(t_hi))
    found = _first_sign_change(gap, grid)
    if found is None:
        return None
    lo, hi, g_lo, g_hi = found
    t_star = lo
    if lo != hi:
        # both curves are solvable at the scan endpoints; guard interior gaps
        def g(t: float) -> float:
            v = gap(t)
            if v is None:
                raise DomainError(f"tuning curve gap inside intersection bracket at {t} degC")
            return v

        root = bracketed_root(g, lo, hi, xtol=1e-7, ftol=1e-6, f_lo=g_lo, f_hi=g_hi)
        if root is None:
            return None
        t_star = root[0]
    a = solve_pair(disp, grating, proc_a, pump, t_star, bracket, xtol=1e-6)
    b = solve_pair(disp, grating, proc_b, pump, t_star, bracket, xtol=1e-6)
    if a is None or b is None or abs(a.signal_wavelength - b.signal_wavelength) >= 0.01:
        return None
    return Intersection(t_star, a, b)
