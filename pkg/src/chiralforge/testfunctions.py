"""Fourier data of test functions used for smearing fields.

A test function on the circle minus the point ``-1`` is stored through its
Fourier coefficients ``f_s`` for real ``s``.  Analytic profiles can be
evaluated on any grid (different charge sectors use shifted grids); the
``window`` cuts the series off at ``|s| <= window``, and the remainder is
what the tail estimates account for.

The ``center`` angle records where the function is concentrated.  Two-
dimensional configurations compare centres to decide spacelike or timelike
ordering.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .exactlin import fraction_str, to_fraction

PROFILES = ("gaussian", "bump", "custom")


@dataclass(frozen=True)
class TestFunction:
    """Fourier coefficients of a smearing function.

    Parameters
    ----------
    profile
        ``"gaussian"``: ``f_s = a exp(-w^2 s^2 / 2 - i s c)``;
        ``"bump"``: ``f_s = a exp(-w sqrt(1 + s^2) - i s c)`` (the
        stretched-exponential decay of a compactly supported smooth bump);
        ``"custom"``: explicit ``coeffs``, zero elsewhere.
    window
        Only ``|s| <= window`` enters truncated smearings.
    """

    __test__ = False  # keep pytest from collecting the class

    profile: str = "gaussian"
    window: float = 8.0
    center: float = 0.0
    width: float = 0.5
    amplitude: complex = 1.0
    coeffs: Mapping[Fraction, complex] = field(default_factory=dict)
    grid_offset: Fraction | None = None

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ValueError(f"profile must be one of {PROFILES}")
        object.__setattr__(self, "coeffs", {to_fraction(k): complex(v) for k, v in self.coeffs.items()})

    # ---- constructors

    @classmethod
    def gaussian(cls, center: float = 0.0, width: float = 0.5, window: float = 8.0, amplitude: complex = 1.0):
        return cls("gaussian", window, center, width, amplitude)

    @classmethod
    def bump(cls, center: float = 0.0, width: float = 1.0, window: float = 8.0, amplitude: complex = 1.0):
        return cls("bump", window, center, width, amplitude)

    @classmethod
    def single_mode(cls, s, value: complex = 1.0):
        s = to_fraction(s)
        return cls("custom", float(abs(s)), coeffs={s: value}, grid_offset=s - math.floor(s))

    @classmethod
    def zero(cls, window: float = 8.0):
        return cls("custom", window)

    # ---- evaluation

    def profile_coeff(self, s) -> complex:
        """Coefficient ignoring the window (what the function really has)."""
        x = float(s)
        if self.profile == "gaussian":
            return self.amplitude * cmath.exp(-0.5 * (self.width * x) ** 2 - 1j * x * self.center)
        if self.profile == "bump":
            return self.amplitude * cmath.exp(-self.width * math.sqrt(1 + x * x) - 1j * x * self.center)
        return self.coeffs.get(to_fraction(s), 0j)

    def coeff(self, s) -> complex:
        if abs(float(s)) > self.window + 1e-12:
            return 0j
        return self.profile_coeff(s)

    def grid_points(self, offset) -> list[Fraction]:
        """Points ``offset + n`` inside the window."""
        offset = to_fraction(offset)
        lo = math.ceil(-self.window - float(offset) - 1e-12)
        hi = math.floor(self.window - float(offset) + 1e-12)
        return [offset + n for n in range(lo, hi + 1)]

    def tail_sum(self, offset, weight) -> float:
        """``sum_{|s| > window} |f_s| weight(s)`` over ``s in offset + Z``.

        Custom functions have no coefficients outside their window, so the
        sum is zero.  For analytic profiles the terms are summed until they
        drop below 1e-17 of the running total and are decreasing.
        """
        if self.profile == "custom":
            return 0.0
        offset = to_fraction(offset)
        first_pos = offset + math.floor(self.window - float(offset) + 1e-12) + 1
        first_neg = offset + math.ceil(-self.window - float(offset) - 1e-12) - 1
        total = 0.0
        for start, step in ((first_pos, 1), (first_neg, -1)):
            prev = math.inf
            for k in range(10 ** 6):
                s = start + step * k
                term = abs(self.profile_coeff(s)) * weight(s)
                total += term
                if term == 0.0 or (term <= prev and term < 1e-17 * total):
                    break
                prev = term
        return total

    def is_zero(self) -> bool:
        return (self.profile == "custom" and not any(self.coeffs.values())) or self.amplitude == 0

    # ---- JSON

    def to_json(self, offset=None) -> dict:
        offset = to_fraction(offset if offset is not None else (self.grid_offset or 0))
        pts = sorted(self.coeffs) if self.profile == "custom" else self.grid_points(offset)
        out = {
            "grid_offset": fraction_str(offset),
            "coeffs": [
                {"s": fraction_str(s), "re": self.coeff(s).real, "im": self.coeff(s).imag} for s in pts
            ],
            "profile": self.profile,
        }
        if self.profile != "custom":
            out["params"] = {
                "window": self.window, "center": self.center, "width": self.width,
                "amplitude": [complex(self.amplitude).real, complex(self.amplitude).imag],
            }
        return out

    @classmethod
    def from_json(cls, data: dict) -> "TestFunction":
        profile = data.get("profile", "custom")
        offset = to_fraction(data.get("grid_offset", "0/1"))
        coeffs = {to_fraction(c["s"]): complex(c["re"], c.get("im", 0.0)) for c in data.get("coeffs", [])}
        params = data.get("params")
        if profile != "custom" and params:
            amp = params.get("amplitude", [1.0, 0.0])
            return cls(profile, float(params["window"]), float(params.get("center", 0.0)),
                       float(params.get("width", 0.5)), complex(amp[0], amp[1]), grid_offset=offset)
        # without parameters only the listed coefficients are known
        window = max((abs(float(s)) for s in coeffs), default=0.0)
        return cls("custom", window, coeffs=coeffs, grid_offset=offset)


def spacelike(left_a: float, left_b: float, right_a: float, right_b: float) -> bool:
    """Left arguments ordered one way and right arguments the other way."""
    return (left_a - left_b) * (right_a - right_b) < 0


def coefficients(f: TestFunction, points: Iterable) -> list[complex]:
    return [f.coeff(s) for s in points]
