"""Cavity-model synthesis of the rectangular radiating patch.

Closed forms size the fundamental patch element for a design frequency
and a thin dielectric substrate: the radiating width from the average
permittivity, the fringing-corrected effective permittivity, and the
resonant length as half a guided wavelength minus the standard open-end
correction. A bracketed numeric inversion recovers the resonant
frequency of a given length, which is what the fabrication-tolerance
analysis leans on.

All lengths are meters and all frequencies hertz; micrometer values
only appear at I/O boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .constants import SPEED_OF_LIGHT

# Substrate electrical-thickness window for an efficient patch, as a
# fraction of the free-space wavelength.
THICKNESS_MIN_LAMBDA0 = 0.003
THICKNESS_MAX_LAMBDA0 = 0.05

# Search bracket for the resonant-frequency inversion.
FREQUENCY_BRACKET_HZ = (0.01e12, 20.0e12)


class ConvergenceError(RuntimeError):
    """A numeric inversion could not bracket a root."""


@dataclass(frozen=True)
class SubstrateSpec:
    """Dielectric layer the patches sit on.

    attenuation_per_m is an optional opaque medium-loss coefficient
    carried through to link calculations; the geometry formulas ignore
    it.
    """

    relative_permittivity: float
    thickness: float  # m
    attenuation_per_m: float = 0.0

    def __post_init__(self) -> None:
        if self.relative_permittivity < 1.0:
            raise ValueError("relative_permittivity must be >= 1")
        if self.thickness <= 0.0:
            raise ValueError("thickness must be positive")
        if self.attenuation_per_m < 0.0:
            raise ValueError("attenuation_per_m must be >= 0")


@dataclass(frozen=True)
class PatchGeometry:
    """Synthesized element dimensions plus the frequencies they imply."""

    width: float  # m
    length: float  # m
    effective_permittivity: float
    design_frequency: float  # Hz
    resonant_frequency: float  # Hz

    def __post_init__(self) -> None:
        if self.width <= 0.0 or self.length <= 0.0:
            raise ValueError("patch dimensions must be positive")


@dataclass(frozen=True)
class SubstrateReport:
    """Advisory thickness check; out-of-range is a warning, not an error."""

    thickness: float
    lower_bound: float
    upper_bound: float
    warnings: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.warnings


def effective_permittivity(substrate: SubstrateSpec, width: float) -> float:
    """Fringing-corrected permittivity seen by a patch of the given width."""
    if width <= 0.0:
        raise ValueError("width must be positive")
    er = substrate.relative_permittivity
    bracket = (1.0 + 12.0 * substrate.thickness / width) ** -0.5
    return (er + 1.0) / 2.0 + (er - 1.0) / 2.0 * bracket


def patch_width(f0: float, substrate: SubstrateSpec) -> float:
    """Radiating width for efficient excitation at the design frequency."""
    if f0 <= 0.0:
        raise ValueError("design frequency must be positive")
    er = substrate.relative_permittivity
    return SPEED_OF_LIGHT / (2.0 * f0 * math.sqrt((er + 1.0) / 2.0))


def patch_length(f0: float, substrate: SubstrateSpec) -> float:
    """Resonant length: half a guided wavelength minus the open-end correction."""
    if f0 <= 0.0:
        raise ValueError("design frequency must be positive")
    w = patch_width(f0, substrate)
    eps = effective_permittivity(substrate, w)
    if eps <= 0.258:
        # Cannot happen for relative_permittivity >= 1; guard the pole anyway.
        raise ArithmeticError("effective permittivity outside the model domain")
    h = substrate.thickness
    ratio = w / h
    correction = 0.824 * h * ((eps + 0.3) * (ratio + 0.264)) / ((eps - 0.258) * (ratio + 0.8))
    return SPEED_OF_LIGHT / (2.0 * f0 * math.sqrt(eps)) - correction


def validate_substrate(substrate: SubstrateSpec, f0: float) -> SubstrateReport:
    """Check the substrate thickness against the efficient-patch window."""
    if f0 <= 0.0:
        raise ValueError("design frequency must be positive")
    lambda0 = SPEED_OF_LIGHT / f0
    lower = THICKNESS_MIN_LAMBDA0 * lambda0
    upper = THICKNESS_MAX_LAMBDA0 * lambda0
    h = substrate.thickness
    warnings: list[str] = []
    if h < lower:
        warnings.append(
            f"substrate thickness {h:.3e} m is below the recommended "
            f"minimum {lower:.3e} m at {f0:.4g} Hz"
        )
    elif h > upper:
        warnings.append(
            f"substrate thickness {h:.3e} m is above the recommended "
            f"maximum {upper:.3e} m at {f0:.4g} Hz"
        )
    return SubstrateReport(h, lower, upper, tuple(warnings))


def resonant_frequency(length: float, substrate: SubstrateSpec) -> float:
    """Invert the length formula: frequency at which a patch of this length resonates.

    patch_length is smooth and strictly decreasing in frequency, so a
    bracketed root find on the fixed search window is reliable.
    """
    if length <= 0.0:
        raise ValueError("length must be positive")
    lo, hi = FREQUENCY_BRACKET_HZ

    def mismatch(f: float) -> float:
        return patch_length(f, substrate) - length

    m_lo, m_hi = mismatch(lo), mismatch(hi)
    if m_lo < 0.0 or m_hi > 0.0:
        raise ConvergenceError(
            f"no resonance between {lo:.2e} and {hi:.2e} Hz for length {length:.3e} m"
        )
    return brentq(mismatch, lo, hi, rtol=1e-12)


def synthesize(f0: float, substrate: SubstrateSpec) -> PatchGeometry:
    """Full patch synthesis for a design frequency on a given substrate."""
    w = patch_width(f0, substrate)
    ell = patch_length(f0, substrate)
    eps = effective_permittivity(substrate, w)
    f_res = resonant_frequency(ell, substrate)
    return PatchGeometry(
        width=w,
        length=ell,
        effective_permittivity=eps,
        design_frequency=f0,
        resonant_frequency=f_res,
    )
