"""Closed-form resonance model of the loop-loaded slot antenna.

Lengths are millimetres everywhere at the boundary; they are converted to
metres only inside :func:`resonant_frequency`. Frequencies are in GHz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

SPEED_OF_LIGHT = 2.99792458e8  # m/s
#: Rounded value used in the original design notes; only for cross-checks.
SPEED_OF_LIGHT_ROUNDED = 3.0e8

REFERENCE_FREQUENCY_GHZ = 2.27

# Loop-diameter constraints (mm).
MIN_INNER_DIAMETER = 1.2
MAX_OUTER_DIAMETER = 12.0
MIN_LOOP_WIDTH = 0.8


class DomainError(ValueError):
    """Raised when a physical quantity is outside the model's domain."""


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise DomainError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class SubstrateProperties:
    """Dielectric substrate below the slot.

    ``reference_width`` is the width entering the effective-permittivity
    approximation. It defaults to the slot width (1.2 mm); the feed-line
    width (2.3 mm) is the other plausible reading.
    """

    relative_permittivity: float = 10.2
    height: float = 2.54
    reference_width: float = 1.2
    loss_tangent: float = 0.0023

    def __post_init__(self) -> None:
        _require_finite(
            relative_permittivity=self.relative_permittivity,
            height=self.height,
            reference_width=self.reference_width,
            loss_tangent=self.loss_tangent,
        )
        if self.relative_permittivity < 1.0:
            raise DomainError("relative_permittivity must be >= 1")
        if self.height <= 0 or self.reference_width <= 0:
            raise DomainError("height and reference_width must be positive")

    @property
    def effective_permittivity(self) -> float:
        return effective_permittivity(self)


@dataclass(frozen=True)
class AntennaGeometry:
    """Slot dimensions plus the two free loop diameters (all mm).

    Feasibility of the loop diameters is *not* enforced here; use
    :func:`is_feasible`.
    """

    d_inner: float
    d_outer: float
    slot_length: float = 30.0
    slot_width: float = 1.2
    substrate: SubstrateProperties = field(default_factory=SubstrateProperties)

    def __post_init__(self) -> None:
        if self.slot_length <= 0 or self.slot_width <= 0:
            raise DomainError("slot dimensions must be positive")

    def with_loops(self, d_inner: float, d_outer: float) -> "AntennaGeometry":
        return replace(self, d_inner=d_inner, d_outer=d_outer)

    @property
    def feasible(self) -> bool:
        return is_feasible(self.d_inner, self.d_outer)


@dataclass(frozen=True)
class FrequencyResult:
    f_r: float
    miniaturization_percent: float
    reference_frequency: float = REFERENCE_FREQUENCY_GHZ


def effective_permittivity(sub: SubstrateProperties) -> float:
    """Quasi-static effective permittivity of the substrate.

    eps_eff = (eps_r + 1)/2 + (eps_r - 1)/2 * (1 + 12 h / W) ** -0.5
    """
    er = sub.relative_permittivity
    h, w = sub.height, sub.reference_width
    _require_finite(relative_permittivity=er, height=h, reference_width=w)
    return (er + 1.0) / 2.0 + (er - 1.0) / 2.0 * (1.0 + 12.0 * h / w) ** -0.5


def resonant_frequency(geo: AntennaGeometry, c: float = SPEED_OF_LIGHT) -> float:
    """Half-wavelength resonance of the slot lengthened by one outer diameter.

    Returns GHz. Depends on ``d_outer`` only; ``d_inner`` does not enter.
    """
    _require_finite(slot_length=geo.slot_length, d_outer=geo.d_outer)
    if geo.slot_length <= 0 or geo.d_outer <= 0:
        raise DomainError("slot_length and d_outer must be positive")
    length_m = (geo.slot_length + geo.d_outer) * 1e-3
    eps_eff = effective_permittivity(geo.substrate)
    return c / (2.0 * length_m * math.sqrt(eps_eff)) / 1e9


def miniaturization_percent(f_r: float, f_ref: float = REFERENCE_FREQUENCY_GHZ) -> float:
    """Frequency reduction relative to the reference slot, in percent."""
    _require_finite(f_r=f_r, f_ref=f_ref)
    if f_ref <= 0:
        raise DomainError("f_ref must be positive")
    return 100.0 * (f_ref - f_r) / f_ref


def is_feasible(d_inner: float, d_outer: float) -> bool:
    """Loop-diameter constraints.

    1.2 < d_inner < d_outer <= 12.0 and d_outer - d_inner > 0.8.
    NaN inputs are infeasible.
    """
    # Comparisons with NaN are False, so NaN falls through to False.
    return bool(
        MIN_INNER_DIAMETER < d_inner < d_outer <= MAX_OUTER_DIAMETER
        and d_outer - d_inner > MIN_LOOP_WIDTH
    )


def evaluate(
    geo: AntennaGeometry,
    f_ref: float = REFERENCE_FREQUENCY_GHZ,
    c: float = SPEED_OF_LIGHT,
) -> FrequencyResult:
    f_r = resonant_frequency(geo, c=c)
    return FrequencyResult(f_r, miniaturization_percent(f_r, f_ref), f_ref)
