"""Project configuration: one strict JSON document drives every command.

Unknown keys are rejected and invalid values are reported with their
full dotted path. All defaults are defined here and reproduce the
bundled reference scenario: a 1 THz design on a 2.3 um, eps_r 2.75
dielectric, a pi/2 column phase step steering to 30 degrees, a -12 dBm
/ 26 dBi converter testbed, and a 500 Mbps QPSK frame of 200 pilot and
2000 data bits.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field

from .comms import FrameSpec
from .layout import ArrayLayout, generate_layout
from .link import LinkGeometry, RadioChainSpec
from .patch import SubstrateSpec
from .wavefront import ElementResponse, element_response_for


class ConfigError(ValueError):
    """Configuration document failed strict parsing."""


@dataclass(frozen=True)
class SubstrateSection:
    relative_permittivity: float = 2.75
    thickness_m: float = 2.3e-6
    attenuation_per_m: float = 0.0

    def __post_init__(self) -> None:
        self.build()  # surface invalid values at parse time

    def build(self) -> SubstrateSpec:
        return SubstrateSpec(
            relative_permittivity=self.relative_permittivity,
            thickness=self.thickness_m,
            attenuation_per_m=self.attenuation_per_m,
        )


@dataclass(frozen=True)
class ArraySection:
    rows: int = 85
    cols: int = 85
    phase_step_rad: float = math.pi / 2.0
    pitch_m: float = 0.0  # 0 means half the free-space wavelength
    stub_uses_effective_permittivity: bool = False

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError("rows and cols must be >= 1")
        if self.pitch_m < 0.0:
            raise ValueError("pitch_m must be >= 0")


@dataclass(frozen=True)
class ResponseSection:
    quality_factor: float = 6.0
    peak_coupling: float = 0.9

    def __post_init__(self) -> None:
        if self.quality_factor <= 0.0:
            raise ValueError("quality_factor must be positive")
        if not 0.0 <= self.peak_coupling <= 1.0:
            raise ValueError("peak_coupling must lie in [0, 1]")


@dataclass(frozen=True)
class GeometrySection:
    d_tx_ris_m: float = 0.5
    d_ris_rx_m: float = 0.5
    rx_angle_deg: float = 30.0
    incidence_angle_deg: float = 0.0
    medium_loss_per_m: float = 0.0

    def __post_init__(self) -> None:
        self.build()

    def build(self) -> LinkGeometry:
        return LinkGeometry(
            d_tx_ris=self.d_tx_ris_m,
            d_ris_rx=self.d_ris_rx_m,
            rx_angle=math.radians(self.rx_angle_deg),
            incidence_angle=math.radians(self.incidence_angle_deg),
            medium_loss_coefficient=self.medium_loss_per_m,
        )


@dataclass(frozen=True)
class FrameSection:
    header_bits: int = 104
    pilot_bits: int = 200
    data_bits: int = 2000
    padding_bits: int = 0
    bitrate_bps: float = 500e6
    passband_bandwidth_hz: float = 500e6
    rolloff: float = 0.25

    def __post_init__(self) -> None:
        self.build()

    def build(self) -> FrameSpec:
        return FrameSpec(
            header_bits=self.header_bits,
            pilot_bits=self.pilot_bits,
            data_bits=self.data_bits,
            padding_bits=self.padding_bits,
            bitrate=self.bitrate_bps,
            passband_bandwidth=self.passband_bandwidth_hz,
            rolloff=self.rolloff,
        )


@dataclass(frozen=True)
class SimulationSection:
    samples_per_symbol: int = 4
    # Back-derived operating point: the Eb/N0 at which ideal QPSK matches
    # the reference bit error rate of 0.0335. Not a measured quantity.
    ebn0_db: float = 2.25
    frames: int = 50
    overhead_accounting_bits: int = 20
    angle_step_deg: float = 0.1
    spectrum_points: int = 500
    spectrum_start_hz: float = 0.5e12
    spectrum_stop_hz: float = 1.5e12
    tone_frequencies_hz: tuple[float, ...] = (1e9, 2e9, 3e9, 4e9, 5e9)
    tone_sample_rate_hz: float = 16e9
    tone_duration_s: float = 1.024e-6
    tone_detection_threshold_db: float = 10.0
    target_steered_snr_db: float = 32.9194

    def __post_init__(self) -> None:
        if self.samples_per_symbol < 2:
            raise ValueError("samples_per_symbol must be >= 2")
        if self.frames < 1:
            raise ValueError("frames must be >= 1")
        if self.overhead_accounting_bits < 0:
            raise ValueError("overhead_accounting_bits must be >= 0")
        if not 0.0 < self.angle_step_deg <= 10.0:
            raise ValueError("angle_step_deg must lie in (0, 10]")
        if self.spectrum_points < 2:
            raise ValueError("spectrum_points must be >= 2")
        if not 0.0 < self.spectrum_start_hz < self.spectrum_stop_hz:
            raise ValueError("spectrum window must be positive and increasing")
        if self.tone_sample_rate_hz <= 0.0 or self.tone_duration_s <= 0.0:
            raise ValueError("tone sample rate and duration must be positive")


@dataclass(frozen=True)
class SeedsSection:
    comms: int = 20260811
    noise: int = 1049
    perturb: int = 7


@dataclass(frozen=True)
class ProjectConfig:
    design_frequency_hz: float = 1.0e12
    substrate: SubstrateSection = field(default_factory=SubstrateSection)
    array: ArraySection = field(default_factory=ArraySection)
    element_response: ResponseSection = field(default_factory=ResponseSection)
    chain: RadioChainSpec = field(default_factory=RadioChainSpec)
    geometry: GeometrySection = field(default_factory=GeometrySection)
    frame: FrameSection = field(default_factory=FrameSection)
    simulation: SimulationSection = field(default_factory=SimulationSection)
    seeds: SeedsSection = field(default_factory=SeedsSection)

    def build_layout(self) -> ArrayLayout:
        return generate_layout(
            rows=self.array.rows,
            cols=self.array.cols,
            f0=self.design_frequency_hz,
            substrate=self.substrate.build(),
            phase_step=self.array.phase_step_rad,
            pitch=self.array.pitch_m if self.array.pitch_m > 0.0 else None,
            use_effective=self.array.stub_uses_effective_permittivity,
        )

    def build_response(self, layout: ArrayLayout) -> ElementResponse:
        return element_response_for(
            layout,
            quality_factor=self.element_response.quality_factor,
            peak_coupling=self.element_response.peak_coupling,
        )

    def to_dict(self) -> dict:
        return _as_plain_dict(dataclasses.asdict(self))

    def sha256(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


_SECTION_TYPES = {
    "substrate": SubstrateSection,
    "array": ArraySection,
    "element_response": ResponseSection,
    "chain": RadioChainSpec,
    "geometry": GeometrySection,
    "frame": FrameSection,
    "simulation": SimulationSection,
    "seeds": SeedsSection,
}


def _as_plain_dict(value):
    if isinstance(value, dict):
        return {k: _as_plain_dict(v) for k, v in value.items()}
    if isinstance(value, tuple):
        return [_as_plain_dict(v) for v in value]
    return value


def _coerce(name: str, value, target_type):
    if target_type is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{name}: expected a boolean, got {value!r}")
        return value
    if target_type is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name}: expected an integer, got {value!r}")
        return value
    if target_type is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name}: expected a number, got {value!r}")
        return float(value)
    if target_type is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{name}: expected a list of numbers, got {value!r}")
        return tuple(_coerce(f"{name}[{i}]", v, float) for i, v in enumerate(value))
    raise ConfigError(f"{name}: unsupported field type")


def _parse_section(cls, data, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected an object")
    spec_fields = {f.name: f for f in dataclasses.fields(cls)}
    for key in data:
        if key not in spec_fields:
            raise ConfigError(f"unknown key '{path}.{key}'")
    kwargs = {}
    for key, value in data.items():
        f = spec_fields[key]
        base_type = tuple if "tuple" in str(f.type) else type(f.default)
        kwargs[key] = _coerce(f"{path}.{key}", value, base_type)
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def parse_config(data: dict) -> ProjectConfig:
    """Build a ProjectConfig from a plain dict, strictly."""
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be an object")
    known = set(_SECTION_TYPES) | {"design_frequency_hz"}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown key '{key}'")
    kwargs = {}
    if "design_frequency_hz" in data:
        value = _coerce("design_frequency_hz", data["design_frequency_hz"], float)
        if value <= 0.0:
            raise ConfigError("design_frequency_hz: must be positive")
        kwargs["design_frequency_hz"] = value
    for name, cls in _SECTION_TYPES.items():
        if name in data:
            kwargs[name] = _parse_section(cls, data[name], name)
    return ProjectConfig(**kwargs)


def apply_overrides(data: dict, assignments: list[str]) -> dict:
    """Fold `a.b.c=value` command-line overrides into a raw config dict."""
    for assignment in assignments:
        if "=" not in assignment:
            raise ConfigError(f"override {assignment!r} is not of the form key=value")
        dotted, raw = assignment.split("=", 1)
        keys = dotted.strip().split(".")
        if not all(keys):
            raise ConfigError(f"override {assignment!r} has an empty key component")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw  # bare strings are allowed unquoted
        node = data
        for key in keys[:-1]:
            node = node.setdefault(key, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {assignment!r} traverses a non-object")
        node[keys[-1]] = value
    return data


def load_config(path: str | None = None, overrides: list[str] | None = None) -> ProjectConfig:
    """Read a config file (or start from defaults) and apply overrides."""
    if path is None:
        data: dict = {}
    else:
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if overrides:
        data = apply_overrides(data, overrides)
    return parse_config(data)
