"""
Refractive index of KTP-family crystals along the y and z axes.

n(lambda, T) = n_sellmeier(lambda) + n1(lambda) * dT + n2(lambda) * dT**2

with dT = T - T_ref and n1, n2 = sum_m a_m / lambda**m. The second thermal
term is quadratic in dT (two-term thermo-optic fit), not a second linear term.

Wavelengths are in micrometres throughout this module; the Sellmeier
coefficients presuppose it. Conversion from nm happens at the callers.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import DomainError, ModelError

__all__ = [
    "Axis",
    "AxisCoefficients",
    "DispersionModel",
    "load_model",
    "sellmeier_index",
    "temperature_correction",
    "refractive_index",
]

BUILTIN_PROFILES = ("ktp-default",)


class Axis(enum.Enum):
    Y = "y"
    Z = "z"

    @classmethod
    def parse(cls, value: "str | Axis") -> "Axis":
        if isinstance(value, Axis):
            return value
        try:
            return cls(value.lower())
        except ValueError:
            raise DomainError(f"unknown axis {value!r}; expected 'y' or 'z'") from None


@dataclass(frozen=True)
class AxisCoefficients:
    A: float
    B: float
    C: float
    D: float
    n1: tuple[float, float, float, float]
    n2: tuple[float, float, float, float]


@dataclass(frozen=True)
class DispersionModel:
    y: AxisCoefficients
    z: AxisCoefficients
    t_ref: float = 25.0
    validity_um: tuple[float, float] = (0.40, 1.10)
    name: str = "custom"

    def coefficients(self, axis: Axis) -> AxisCoefficients:
        return self.y if Axis.parse(axis) is Axis.Y else self.z

    def check_wavelength(self, wavelength_um: float) -> None:
        lo, hi = self.validity_um
        if not (lo <= wavelength_um <= hi):
            raise DomainError(
                f"wavelength {wavelength_um:.6g} um outside validity window [{lo}, {hi}] um"
            )

    @classmethod
    def from_dict(cls, data: dict) -> "DispersionModel":
        axes = {}
        try:
            for key in ("y", "z"):
                ax = data["axes"][key]
                s = ax["sellmeier"]
                to = ax["thermo_optic"]
                n1, n2 = tuple(map(float, to["n1"])), tuple(map(float, to["n2"]))
                if len(n1) != 4 or len(n2) != 4:
                    raise ValueError("thermo_optic n1/n2 need exactly four coefficients")
                axes[key] = AxisCoefficients(
                    float(s["A"]), float(s["B"]), float(s["C"]), float(s["D"]), n1, n2
                )
            lo, hi = map(float, data.get("validity_um", (0.40, 1.10)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelError(f"malformed crystal profile: {exc}") from exc
        model = cls(
            y=axes["y"],
            z=axes["z"],
            t_ref=float(data.get("t_ref_c", 25.0)),
            validity_um=(lo, hi),
            name=str(data.get("name", "custom")),
        )
        model.validate()
        return model

    def to_dict(self) -> dict:
        def ax(c: AxisCoefficients) -> dict:
            return {
                "sellmeier": {"A": c.A, "B": c.B, "C": c.C, "D": c.D},
                "thermo_optic": {"n1": list(c.n1), "n2": list(c.n2)},
            }

        return {
            "name": self.name,
            "axes": {"y": ax(self.y), "z": ax(self.z)},
            "t_ref_c": self.t_ref,
            "validity_um": list(self.validity_um),
        }

    def validate(self, samples: int = 200) -> None:
        """Check that the Sellmeier part is well behaved over the validity window."""
        lo, hi = self.validity_um
        if not (0 < lo < hi):
            raise ModelError(f"bad validity window {self.validity_um}")
        for axis in Axis:
            c = self.coefficients(axis)
            for i in range(samples + 1):
                lam = lo + (hi - lo) * i / samples
                if 1.0 - c.C / lam**2 <= 0:
                    raise ModelError(f"Sellmeier pole inside validity window on axis {axis.value}")
                n = sellmeier_index(self, axis, lam)
                if not (1.5 < n < 2.2):
                    raise ModelError(
                        f"index {n:.4f} on axis {axis.value} at {lam:.3f} um outside (1.5, 2.2)"
                    )


def load_model(source: "str | Path" = "ktp-default") -> DispersionModel:
    """Load a crystal profile by built-in name or from a JSON file path."""
    if str(source) in BUILTIN_PROFILES:
        text = resources.files("spdcqpm").joinpath(f"data/{source}.json").read_text()
    else:
        path = Path(source)
        if not path.is_file():
            raise DomainError(f"crystal profile {source!r} is neither built in nor a file")
        text = path.read_text()
    return DispersionModel.from_dict(json.loads(text))


def sellmeier_index(model: DispersionModel, axis: Axis, wavelength: float) -> float:
    """Room-temperature index sqrt(A + B/(1 - C/lambda^2) + D*lambda^2), lambda in um."""
    model.check_wavelength(wavelength)
    c = model.coefficients(axis)
    radicand = c.A + c.B / (1.0 - c.C / wavelength**2) + c.D * wavelength**2
    if radicand <= 0:
        raise ModelError(f"non-positive Sellmeier radicand at {wavelength} um")
    return math.sqrt(radicand)


def _poly_inverse(coeffs, wavelength: float) -> float:
    return sum(a / wavelength**m for m, a in enumerate(coeffs))


def temperature_correction(
    model: DispersionModel, axis: Axis, wavelength: float, temperature: float
) -> float:
    model.check_wavelength(wavelength)
    c = model.coefficients(axis)
    dt = temperature - model.t_ref
    if dt == 0:
        return 0.0
    return _poly_inverse(c.n1, wavelength) * dt + _poly_inverse(c.n2, wavelength) * dt**2


def refractive_index(
    model: DispersionModel, axis: Axis, wavelength: float, temperature: float
) -> float:
    return sellmeier_index(model, axis, wavelength) + temperature_correction(
        model, axis, wavelength, temperature
    )
