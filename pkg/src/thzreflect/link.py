"""Link budget through the up/down-converter testbed chain.

Received power follows a single combined-hop Friis model over the total
transmitter-to-panel-to-receiver distance, plus the panel's relative
pattern gain toward the receiver. Mixer conversion loss and IF
amplifier gains act identically on signal and noise at IF and therefore
cancel in the SNR; they are carried in the chain record for reporting
but do not enter the budget, whose noise side is set by the thermal
floor, bandwidth, and noise figure.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .constants import SPEED_OF_LIGHT
from .wavefront import RadiationPattern

THERMAL_NOISE_DBM_PER_HZ = -174.0

# Band the converter frontends are built for; outside it the chain
# numbers stop being meaningful, so flag (not fail) other carriers.
CARRIER_BAND_HZ = (1.00e12, 1.05e12)


@dataclass(frozen=True)
class RadioChainSpec:
    """Testbed radio chain, transmit side referenced at RF before the antenna."""

    tx_power_dbm: float = -12.0
    tx_antenna_gain_dbi: float = 26.0
    rx_antenna_gain_dbi: float = 26.0
    mixer_conversion_loss_db: float = 14.0
    if_lna_gain_tx_db: float = 1.0
    if_lna_gain_rx_db: float = 12.0
    noise_figure_db: float = 10.0
    bandwidth_hz: float = 500e6
    carrier_frequency_hz: float = 1.0e12

    def __post_init__(self) -> None:
        if self.bandwidth_hz <= 0.0:
            raise ValueError("bandwidth_hz must be positive")
        if self.carrier_frequency_hz <= 0.0:
            raise ValueError("carrier_frequency_hz must be positive")
        lo, hi = CARRIER_BAND_HZ
        if not lo <= self.carrier_frequency_hz <= hi:
            warnings.warn(
                f"carrier {self.carrier_frequency_hz:.4g} Hz is outside the "
                f"converter band [{lo:.3g}, {hi:.3g}] Hz",
                stacklevel=2,
            )


@dataclass(frozen=True)
class LinkGeometry:
    """Bistatic geometry around the reflecting panel."""

    d_tx_ris: float  # m
    d_ris_rx: float  # m
    rx_angle: float  # rad from the panel normal
    incidence_angle: float = 0.0  # rad
    medium_loss_coefficient: float = 0.0  # 1/m

    def __post_init__(self) -> None:
        if self.d_tx_ris <= 0.0 or self.d_ris_rx <= 0.0:
            raise ValueError("distances must be positive")
        if self.medium_loss_coefficient < 0.0:
            raise ValueError("medium_loss_coefficient must be >= 0")

    @property
    def total_distance(self) -> float:
        return self.d_tx_ris + self.d_ris_rx


@dataclass(frozen=True)
class LinkReport:
    received_power_dbm: float
    noise_power_dbm: float
    snr_db: float
    surface_gain_db: float

    def to_dict(self) -> dict:
        return {
            "received_power_dbm": self.received_power_dbm,
            "noise_power_dbm": self.noise_power_dbm,
            "snr_db": self.snr_db,
            "surface_gain_db": self.surface_gain_db,
        }


def free_space_path_loss(d: float, f: float) -> float:
    """Friis spreading loss in dB over distance d at frequency f."""
    if d <= 0.0 or f <= 0.0:
        raise ValueError("distance and frequency must be positive")
    return 20.0 * math.log10(4.0 * math.pi * d * f / SPEED_OF_LIGHT)


def medium_loss(d: float, coefficient: float) -> float:
    """Exponential medium attenuation expressed in dB."""
    if d < 0.0 or coefficient < 0.0:
        raise ValueError("distance and coefficient must be >= 0")
    return 10.0 * math.log10(math.e) * coefficient * d


def surface_gain_db(pattern: RadiationPattern, angle: float) -> float:
    """Panel pattern gain toward an angle, interpolated in power."""
    angles = pattern.angles
    if angle < angles.min() or angle > angles.max():
        raise ValueError(
            f"angle {angle:.4g} rad lies outside the pattern grid "
            f"[{angles.min():.4g}, {angles.max():.4g}]"
        )
    power = np.abs(pattern.amplitude[0]) ** 2
    value = float(np.interp(angle, angles, power))
    return 10.0 * math.log10(max(value, 1e-30))


def noise_power_dbm(chain: RadioChainSpec) -> float:
    return THERMAL_NOISE_DBM_PER_HZ + 10.0 * math.log10(chain.bandwidth_hz) + chain.noise_figure_db


def link_report(
    chain: RadioChainSpec, geometry: LinkGeometry, pattern: RadiationPattern
) -> LinkReport:
    """Received power, noise, and SNR for a pattern evaluated at the carrier."""
    gain = surface_gain_db(pattern, geometry.rx_angle)
    d = geometry.total_distance
    received = (
        chain.tx_power_dbm
        + chain.tx_antenna_gain_dbi
        + chain.rx_antenna_gain_dbi
        - free_space_path_loss(d, chain.carrier_frequency_hz)
        - medium_loss(d, geometry.medium_loss_coefficient)
        + gain
    )
    noise = noise_power_dbm(chain)
    return LinkReport(
        received_power_dbm=received,
        noise_power_dbm=noise,
        snr_db=received - noise,
        surface_gain_db=gain,
    )


def calibrate_total_distance(
    chain: RadioChainSpec,
    geometry: LinkGeometry,
    pattern: RadiationPattern,
    target_snr_db: float,
) -> float:
    """Total path length at which the link reads the target SNR.

    SNR is strictly decreasing in distance, so a bracketed solve over a
    wide window pins it down; useful when the physical distances of a
    measurement are unknown but one SNR reading is.
    """

    def snr_at(total: float) -> float:
        geo = LinkGeometry(
            d_tx_ris=total / 2.0,
            d_ris_rx=total / 2.0,
            rx_angle=geometry.rx_angle,
            incidence_angle=geometry.incidence_angle,
            medium_loss_coefficient=geometry.medium_loss_coefficient,
        )
        return link_report(chain, geo, pattern).snr_db - target_snr_db

    lo, hi = 1e-3, 1e6
    if snr_at(lo) < 0.0 or snr_at(hi) > 0.0:
        raise ValueError(
            f"target SNR {target_snr_db:.4g} dB is not reachable within "
            f"[{lo:g}, {hi:g}] m"
        )
    return brentq(snr_at, lo, hi, rtol=1e-12)
