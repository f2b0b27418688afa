"""Far-field prediction for a stub-programmed reflecting panel.

A pure array-factor model: each element re-radiates with a Lorentzian
resonant amplitude and a phase set by its physical stub length, whose
electrical length grows linearly with frequency. Patterns are
normalized to a uniform-phase perfect reflector of the same aperture,
so 0 dB means "as strong as a metal plate of equal size". Mutual
coupling between elements is neglected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import SPEED_OF_LIGHT
from .layout import ArrayLayout, stub_wavenumber_from_layout

TWO_PI = 2.0 * math.pi

# Keep per-chunk scratch arrays small when sweeping dense angle grids.
_ANGLE_CHUNK = 256

# dB floor/ceiling guarding log of an exact pattern null.
_POWER_FLOOR = 1e-30


@dataclass(frozen=True)
class ElementResponse:
    """Single-pole resonant response of one patch element."""

    resonant_frequency: float  # Hz
    quality_factor: float = 6.0
    peak_coupling: float = 0.9  # fraction of incident energy re-radiated at resonance

    def __post_init__(self) -> None:
        if self.resonant_frequency <= 0.0:
            raise ValueError("resonant_frequency must be positive")
        if self.quality_factor <= 0.0:
            raise ValueError("quality_factor must be positive")
        if not 0.0 <= self.peak_coupling <= 1.0:
            raise ValueError("peak_coupling must lie in [0, 1]")

    def lineshape(self, frequency) -> np.ndarray | float:
        """Lorentzian amplitude in [0, 1], peaking at the resonant frequency."""
        detuning = np.asarray(frequency) / self.resonant_frequency - 1.0
        return 1.0 / (1.0 + 4.0 * self.quality_factor**2 * detuning**2)


@dataclass(frozen=True, eq=False)
class RadiationPattern:
    """Complex reflected field over (frequency, angle) grids."""

    frequencies: np.ndarray  # Hz, shape (F,)
    angles: np.ndarray  # rad, shape (A,)
    amplitude: np.ndarray  # complex, shape (F, A)
    normalization: str = "uniform-phase equal-aperture reflector"

    def power_db(self) -> np.ndarray:
        return 10.0 * np.log10(np.maximum(np.abs(self.amplitude) ** 2, _POWER_FLOOR))


def element_response_for(
    layout: ArrayLayout, quality_factor: float = 6.0, peak_coupling: float = 0.9
) -> ElementResponse:
    """Response of the layout's patch, resonant where its length says it is."""
    return ElementResponse(
        resonant_frequency=layout.patch.resonant_frequency,
        quality_factor=quality_factor,
        peak_coupling=peak_coupling,
    )


def polarization_coupling(angle: float) -> float:
    """cos^2 projection of a linear polarization onto the patch axis."""
    return math.cos(angle) ** 2


def _element_arrays(layout: ArrayLayout) -> tuple[np.ndarray, np.ndarray]:
    x = np.array([el.x for el in layout.elements])
    stubs = np.array([el.stub_length for el in layout.elements])
    return x, stubs


def _complex_sum(
    layout: ArrayLayout,
    frequency: float,
    angles: np.ndarray,
    incidence: float,
    x: np.ndarray,
    stubs: np.ndarray,
) -> np.ndarray:
    """Normalized coherent sum over elements for one frequency."""
    k0 = TWO_PI * frequency / SPEED_OF_LIGHT
    stub_phase = stub_wavenumber_from_layout(layout, frequency) * stubs
    u = np.sin(angles) - math.sin(incidence)
    out = np.empty(len(angles), dtype=complex)
    for start in range(0, len(angles), _ANGLE_CHUNK):
        block = slice(start, start + _ANGLE_CHUNK)
        psi = k0 * x[:, None] * u[None, block] - stub_phase[:, None]
        out[block] = np.exp(1j * psi).sum(axis=0)
    return out / layout.size


def array_factor(
    layout: ArrayLayout,
    frequency: float,
    angles: np.ndarray,
    incidence: float = 0.0,
    response: ElementResponse | None = None,
) -> RadiationPattern:
    """Reflected-field pattern versus angle at one frequency.

    Angles are measured from the panel normal in the steering plane.
    With `response` given, the whole pattern is scaled by the element's
    Lorentzian amplitude at this frequency; otherwise elements re-radiate
    with unit amplitude.
    """
    if layout.size == 0:
        raise ValueError("layout has no elements")
    if frequency <= 0.0:
        raise ValueError("frequency must be positive")
    if abs(incidence) > math.pi / 2.0:
        raise ValueError("incidence must lie within +/-90 degrees")
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    x, stubs = _element_arrays(layout)
    amplitude = _complex_sum(layout, frequency, angles, incidence, x, stubs)
    if response is not None:
        amplitude = amplitude * (response.peak_coupling * response.lineshape(frequency))
    return RadiationPattern(
        frequencies=np.array([frequency]),
        angles=angles,
        amplitude=amplitude[None, :],
    )


def main_lobe(pattern: RadiationPattern) -> tuple[float, float]:
    """Angle and normalized gain of the strongest lobe of a single-frequency pattern.

    The argmax is refined by a three-point parabolic fit on |amplitude|^2;
    exact ties break toward the smallest |angle|.
    """
    if pattern.amplitude.size == 0:
        raise ValueError("pattern is empty")
    if pattern.amplitude.shape[0] != 1:
        raise ValueError("main_lobe expects a single-frequency pattern")
    power = np.abs(pattern.amplitude[0]) ** 2
    peak = power.max()
    candidates = np.flatnonzero(power >= peak * (1.0 - 1e-12))
    idx = candidates[np.argmin(np.abs(pattern.angles[candidates]))]

    angle = float(pattern.angles[idx])
    refined_power = float(power[idx])
    if 0 < idx < len(power) - 1 and len(candidates) == 1:
        left, mid, right = power[idx - 1], power[idx], power[idx + 1]
        denom = left - 2.0 * mid + right
        if denom < 0.0:
            shift = 0.5 * (left - right) / denom
            step = float(pattern.angles[idx + 1] - pattern.angles[idx])
            angle += shift * step
            refined_power = mid - 0.25 * (left - right) * shift
    gain_db = 10.0 * math.log10(max(refined_power, _POWER_FLOOR))
    return angle, gain_db


def specular_suppression(layout: ArrayLayout, f0: float) -> float:
    """How much stronger the steered lobe is than the specular leak, in dB.

    Evaluated at normal incidence; both powers are floored so an exact
    null cannot overflow the ratio (result is clipped to +/-300 dB).
    """
    pattern = array_factor(
        layout, f0, np.array([layout.steering_angle, 0.0]), incidence=0.0
    )
    p_steer, p_spec = np.abs(pattern.amplitude[0]) ** 2
    ratio = max(p_steer, _POWER_FLOOR) / max(p_spec, _POWER_FLOOR)
    return float(np.clip(10.0 * math.log10(ratio), -300.0, 300.0))


def reflectance_spectrum(
    layout: ArrayLayout,
    response: ElementResponse,
    frequencies: np.ndarray,
    detector_angle: float = 0.0,
    polarization_angle: float = 0.0,
) -> np.ndarray:
    """Specular-detector reflectance versus frequency, normalized to a mirror.

    Per frequency, a fraction eta*L(f) of the incident energy couples
    into the resonant elements and is re-radiated with the layout's
    array factor; the remainder reflects specularly off the ground
    plane. The detector (at the specular angle for a time-domain
    spectroscopy emulation, normal incidence assumed) therefore sees

        |(1 - eta*L(f)) + eta*L(f) * AF_norm(detector, f)|^2

    which is identically 1 when the polarization projection zeroes eta.
    """
    frequencies = np.asarray(frequencies, dtype=float)
    if np.any(frequencies <= 0.0):
        raise ValueError("frequencies must be positive")
    eta = response.peak_coupling * polarization_coupling(polarization_angle)
    x, stubs = _element_arrays(layout)
    angle = np.array([detector_angle])
    reflectance = np.empty(len(frequencies))
    for i, f in enumerate(frequencies):
        coupled = eta * float(response.lineshape(f))
        af = _complex_sum(layout, f, angle, 0.0, x, stubs)[0]
        reflectance[i] = abs((1.0 - coupled) + coupled * af) ** 2
    return reflectance


def spectrum_minimum(frequencies: np.ndarray, reflectance: np.ndarray) -> tuple[float, float]:
    """(frequency, value) of the reflectance minimum on the sampled grid."""
    idx = int(np.argmin(reflectance))
    return float(frequencies[idx]), float(reflectance[idx])
