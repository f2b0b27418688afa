"""Reflectarray grid synthesis: pitch, progressive phases, delay stubs, mask export.

The fabricable design is a rectangular grid of identical patches at
half-wavelength pitch. Steering along one axis comes from a per-column
arithmetic phase progression stored as positive delays in [0, 2pi); a
pi/2 step wraps exactly every four columns. Each delay is realized by a
fixed open stub whose round-trip electrical length in the substrate
equals the wanted phase.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, asdict

import numpy as np

from .constants import SPEED_OF_LIGHT
from .patch import PatchGeometry, SubstrateSpec, effective_permittivity, patch_width
from .patch import resonant_frequency, synthesize

TWO_PI = 2.0 * math.pi

MASK_FORMATS = ("svg", "json", "csv")

# Cosmetic stub width in the mask drawing, as a fraction of patch width.
_STUB_WIDTH_FRACTION = 0.125


@dataclass(frozen=True)
class ElementSpec:
    """One grid element: position from the array corner, delay, stub."""

    row: int
    col: int
    x: float  # m
    y: float  # m
    phase: float  # rad, in [0, 2pi)
    stub_length: float  # m

    def __post_init__(self) -> None:
        if not 0.0 <= self.phase < TWO_PI:
            raise ValueError("phase must lie in [0, 2pi)")
        if self.stub_length < 0.0:
            raise ValueError("stub_length must be >= 0")


@dataclass(frozen=True)
class ArrayLayout:
    """A complete fabricable panel; elements are row-major."""

    rows: int
    cols: int
    pitch: float  # m
    design_frequency: float  # Hz
    steering_angle: float  # rad
    stub_permittivity: float  # permittivity used for the stub wave vector
    substrate: SubstrateSpec
    patch: PatchGeometry
    elements: tuple[ElementSpec, ...]

    @property
    def size(self) -> int:
        return len(self.elements)

    @property
    def panel_extent(self) -> tuple[float, float]:
        """(x, y) span of the patterned area in meters."""
        return (self.cols * self.pitch, self.rows * self.pitch)


def wrap_phase(phase: float) -> float:
    """Reduce a phase to [0, 2pi)."""
    wrapped = math.fmod(phase, TWO_PI)
    if wrapped < 0.0:
        wrapped += TWO_PI
    # A tiny negative input can round up to exactly 2pi.
    return 0.0 if wrapped >= TWO_PI else wrapped


def progressive_phase(k0: float, d: float, theta: float, incidence_phase: float = 0.0) -> float:
    """Per-element phase increment that tilts the reflected beam to theta.

    With broadside illumination the incidence term vanishes and the
    increment is -k0*d*sin(theta), reduced to [0, 2pi).
    """
    if d <= 0.0:
        raise ValueError("element spacing must be positive")
    if abs(theta) > math.pi / 2.0:
        raise ValueError("steering angle must lie within +/-90 degrees")
    return wrap_phase(incidence_phase - k0 * d * math.sin(theta))


def steering_angle(phase_step: float, k0: float, d: float) -> float:
    """Beam direction produced by a per-element delay increment."""
    if d <= 0.0:
        raise ValueError("element spacing must be positive")
    ratio = phase_step / (k0 * d)
    if abs(ratio) > 1.0 + 1e-12:
        raise ValueError(
            f"phase step {phase_step:.4g} rad exceeds k0*d={k0 * d:.4g}; no real steering angle"
        )
    return math.asin(min(1.0, max(-1.0, ratio)))


def stub_wavenumber(f: float, substrate: SubstrateSpec, use_effective: bool = False) -> float:
    """Round-trip wave vector along an open stub in the substrate.

    The reflected wave traverses the stub twice, so the phase per unit
    physical length is 2*k0*sqrt(eps). The intrinsic permittivity is the
    default; the fringing-corrected value is available for comparison.
    """
    if f <= 0.0:
        raise ValueError("frequency must be positive")
    if use_effective:
        eps = effective_permittivity(substrate, patch_width(f, substrate))
    else:
        eps = substrate.relative_permittivity
    return 2.0 * (TWO_PI * f / SPEED_OF_LIGHT) * math.sqrt(eps)


def stub_length(
    phase: float, f0: float, substrate: SubstrateSpec, use_effective: bool = False
) -> float:
    """Physical stub length that delays the reflected wave by `phase` radians."""
    if phase < 0.0:
        raise ValueError("phase must be >= 0")
    return phase / stub_wavenumber(f0, substrate, use_effective)


def generate_layout(
    rows: int,
    cols: int,
    f0: float,
    substrate: SubstrateSpec,
    phase_step: float,
    pitch: float | None = None,
    use_effective: bool = False,
) -> ArrayLayout:
    """Build the full panel for a per-column delay increment.

    Element (r, c) carries phase (c * phase_step) mod 2pi; phases are
    identical down columns so steering is along the x axis only. Pitch
    defaults to half the free-space wavelength.
    """
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    if pitch is None:
        pitch = 0.5 * SPEED_OF_LIGHT / f0
    if pitch <= 0.0:
        raise ValueError("pitch must be positive")
    if phase_step != 0.0:
        cycle = TWO_PI / abs(phase_step)
        if abs(cycle - round(cycle)) > 1e-9:
            warnings.warn(
                f"phase step {phase_step:.4g} rad does not divide 2pi evenly; "
                "the wrap pattern will not repeat exactly",
                stacklevel=2,
            )

    patch = synthesize(f0, substrate)
    k0 = TWO_PI * f0 / SPEED_OF_LIGHT
    theta = steering_angle(phase_step, k0, pitch)
    column_phases = [wrap_phase(c * phase_step) for c in range(cols)]
    column_stubs = [stub_length(p, f0, substrate, use_effective) for p in column_phases]

    elements = tuple(
        ElementSpec(
            row=r,
            col=c,
            x=c * pitch,
            y=r * pitch,
            phase=column_phases[c],
            stub_length=column_stubs[c],
        )
        for r in range(rows)
        for c in range(cols)
    )
    eps_stub = (
        effective_permittivity(substrate, patch.width)
        if use_effective
        else substrate.relative_permittivity
    )
    return ArrayLayout(
        rows=rows,
        cols=cols,
        pitch=pitch,
        design_frequency=f0,
        steering_angle=theta,
        stub_permittivity=eps_stub,
        substrate=substrate,
        patch=patch,
        elements=elements,
    )


def perturb_layout(
    layout: ArrayLayout,
    relative_tolerance: float,
    mode: str = "uniform-scale",
    seed: int = 0,
) -> ArrayLayout:
    """Apply a fabrication-tolerance perturbation to the lateral dimensions.

    uniform-scale multiplies every stub length and both patch dimensions
    by (1 + relative_tolerance). random draws an independent factor in
    [1 - t, 1 + t] per stub (plus one shared factor for the patch, which
    is a single record for the whole panel). The substrate thickness is
    a deposited layer and is left untouched. Element phases are
    recomputed so they stay consistent with the perturbed stubs at the
    design frequency. Deterministic for a fixed seed.
    """
    if not 0.0 <= relative_tolerance < 1.0:
        raise ValueError("relative_tolerance must lie in [0, 1)")
    if mode not in ("uniform-scale", "random"):
        raise ValueError(f"unknown perturbation mode {mode!r}")
    if relative_tolerance == 0.0:
        return layout

    f0 = layout.design_frequency
    k_stub = stub_wavenumber_from_layout(layout, f0)
    if mode == "uniform-scale":
        patch_factor = 1.0 + relative_tolerance
        stub_factors = np.full(layout.size, patch_factor)
    else:
        rng = np.random.default_rng(seed)
        patch_factor = float(rng.uniform(1.0 - relative_tolerance, 1.0 + relative_tolerance))
        stub_factors = rng.uniform(
            1.0 - relative_tolerance, 1.0 + relative_tolerance, size=layout.size
        )

    new_length = layout.patch.length * patch_factor
    new_patch = PatchGeometry(
        width=layout.patch.width * patch_factor,
        length=new_length,
        effective_permittivity=layout.patch.effective_permittivity,
        design_frequency=layout.patch.design_frequency,
        resonant_frequency=resonant_frequency(new_length, layout.substrate),
    )
    elements = tuple(
        ElementSpec(
            row=el.row,
            col=el.col,
            x=el.x,
            y=el.y,
            phase=wrap_phase(k_stub * el.stub_length * float(factor)),
            stub_length=float(el.stub_length * factor),
        )
        for el, factor in zip(layout.elements, stub_factors)
    )
    return ArrayLayout(
        rows=layout.rows,
        cols=layout.cols,
        pitch=layout.pitch,
        design_frequency=layout.design_frequency,
        steering_angle=layout.steering_angle,
        stub_permittivity=layout.stub_permittivity,
        substrate=layout.substrate,
        patch=new_patch,
        elements=elements,
    )


def stub_wavenumber_from_layout(layout: ArrayLayout, f: float) -> float:
    """Round-trip stub wave vector at `f` using the layout's recorded permittivity."""
    if f <= 0.0:
        raise ValueError("frequency must be positive")
    return 2.0 * (TWO_PI * f / SPEED_OF_LIGHT) * math.sqrt(layout.stub_permittivity)


# ---------------------------------------------------------------------------
# Mask export / import


def export_mask(layout: ArrayLayout, format: str, provenance: dict | None = None) -> bytes:
    """Serialize the layout as a photomask document.

    svg draws one rectangle per patch and one per nonzero stub in
    micrometer units (1 user unit = 1 um); json and csv carry one record
    per element in row-major order. json round-trips losslessly through
    layout_from_json.
    """
    if layout.size == 0:
        raise ValueError("layout has no elements")
    if format == "svg":
        return _mask_svg(layout, provenance)
    if format == "json":
        return _mask_json(layout, provenance)
    if format == "csv":
        return _mask_csv(layout, provenance)
    raise ValueError(f"unknown mask format {format!r}; expected one of {MASK_FORMATS}")


def _mask_svg(layout: ArrayLayout, provenance: dict | None) -> bytes:
    um = 1e6
    width_units = layout.cols * layout.pitch * um
    height_units = layout.rows * layout.pitch * um
    patch_w = layout.patch.width * um
    patch_l = layout.patch.length * um
    stub_w = patch_w * _STUB_WIDTH_FRACTION
    half_pitch = 0.5 * layout.pitch * um

    out = io.StringIO()
    out.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    if provenance:
        note = " ".join(f"{k}={v}" for k, v in sorted(provenance.items()))
        out.write(f"<!-- {note} -->\n")
    out.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width_units:g}" '
        f'height="{height_units:g}" viewBox="0 0 {width_units:g} {height_units:g}">\n'
    )
    for el in layout.elements:
        cx = el.x * um + half_pitch
        cy = el.y * um + half_pitch
        out.write(
            f'  <rect x="{cx - patch_w / 2:.4f}" y="{cy - patch_l / 2:.4f}" '
            f'width="{patch_w:.4f}" height="{patch_l:.4f}" fill="black"/>\n'
        )
        if el.stub_length > 0.0:
            # Stub placement is cosmetic for the model; draw it extending
            # from the patch edge along the resonant length.
            stub_l = el.stub_length * um
            out.write(
                f'  <rect x="{cx - stub_w / 2:.4f}" y="{cy + patch_l / 2:.4f}" '
                f'width="{stub_w:.4f}" height="{stub_l:.4f}" fill="black"/>\n'
            )
    out.write("</svg>\n")
    return out.getvalue().encode("utf-8")


def _mask_json(layout: ArrayLayout, provenance: dict | None) -> bytes:
    doc = {
        "format": "thzreflect-layout",
        "version": 1,
        "rows": layout.rows,
        "cols": layout.cols,
        "pitch_m": layout.pitch,
        "design_frequency_hz": layout.design_frequency,
        "steering_angle_rad": layout.steering_angle,
        "stub_permittivity": layout.stub_permittivity,
        "substrate": asdict(layout.substrate),
        "patch": asdict(layout.patch),
        "elements": [
            {
                "row": el.row,
                "col": el.col,
                "x_m": el.x,
                "y_m": el.y,
                "phase_rad": el.phase,
                "stub_m": el.stub_length,
            }
            for el in layout.elements
        ],
    }
    if provenance:
        doc["provenance"] = provenance
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")


def _mask_csv(layout: ArrayLayout, provenance: dict | None) -> bytes:
    out = io.StringIO()
    if provenance:
        for k, v in sorted(provenance.items()):
            out.write(f"# {k}={v}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["row", "col", "x_um", "y_um", "phase_rad", "stub_um"])
    for el in layout.elements:
        writer.writerow(
            [
                el.row,
                el.col,
                repr(float(el.x * 1e6)),
                repr(float(el.y * 1e6)),
                repr(float(el.phase)),
                repr(float(el.stub_length * 1e6)),
            ]
        )
    return out.getvalue().encode("utf-8")


def layout_from_json(data: bytes | str) -> ArrayLayout:
    """Rebuild an ArrayLayout from its json mask export."""
    doc = json.loads(data)
    if doc.get("format") != "thzreflect-layout":
        raise ValueError("not a thzreflect layout document")
    substrate = SubstrateSpec(**doc["substrate"])
    patch = PatchGeometry(**doc["patch"])
    elements = tuple(
        ElementSpec(
            row=rec["row"],
            col=rec["col"],
            x=rec["x_m"],
            y=rec["y_m"],
            phase=rec["phase_rad"],
            stub_length=rec["stub_m"],
        )
        for rec in doc["elements"]
    )
    return ArrayLayout(
        rows=doc["rows"],
        cols=doc["cols"],
        pitch=doc["pitch_m"],
        design_frequency=doc["design_frequency_hz"],
        steering_angle=doc["steering_angle_rad"],
        stub_permittivity=doc["stub_permittivity"],
        substrate=substrate,
        patch=patch,
        elements=elements,
    )
