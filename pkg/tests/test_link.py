"""Path loss, the dB budget chain, and distance calibration."""

import math

import numpy as np
import pytest

from thzreflect import (
    LinkGeometry,
    RadioChainSpec,
    array_factor,
    calibrate_total_distance,
    free_space_path_loss,
    generate_layout,
    link_report,
    medium_loss,
    specular_suppression,
    surface_gain_db,
)
from thzreflect.constants import SPEED_OF_LIGHT

ANGLES = np.radians(np.linspace(-90.0, 90.0, 1801))


@pytest.fixture(scope="module")
def chain():
    return RadioChainSpec()


@pytest.fixture(scope="module")
def steered_pattern(row85):
    return array_factor(row85, 1e12, ANGLES)


@pytest.fixture(scope="module")
def metal_pattern(su8):
    sheet = generate_layout(1, 85, 1e12, su8, 0.0)
    return array_factor(sheet, 1e12, ANGLES)


class TestFreeSpacePathLoss:
    def test_unit_argument_distance(self):
        d = SPEED_OF_LIGHT / (4 * math.pi * 1e12)
        assert free_space_path_loss(d, 1e12) == pytest.approx(0.0, abs=1e-12)

    def test_doubling_distance_costs_six_db(self):
        delta = free_space_path_loss(2.0, 1e12) - free_space_path_loss(1.0, 1e12)
        assert delta == pytest.approx(6.020599913279625, rel=1e-12)

    def test_one_meter_at_band_center(self):
        assert free_space_path_loss(1.0, 1.025e12) == pytest.approx(92.65624949388413, rel=1e-12)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            free_space_path_loss(0.0, 1e12)


class TestMediumLoss:
    def test_zero_coefficient(self):
        assert medium_loss(5.0, 0.0) == 0.0

    def test_linear_in_distance(self):
        assert medium_loss(4.0, 0.05) == pytest.approx(2 * medium_loss(2.0, 0.05), rel=1e-12)

    def test_reference_value(self):
        assert medium_loss(2.0, 0.1) == pytest.approx(0.8685889638065037, rel=1e-12)


class TestLinkReport:
    def test_noise_floor_terms(self, chain, steered_pattern):
        geometry = LinkGeometry(0.5, 0.5, rx_angle=math.radians(30))
        report = link_report(chain, geometry, steered_pattern)
        expected_noise = -174.0 + 10 * math.log10(chain.bandwidth_hz) + chain.noise_figure_db
        assert report.noise_power_dbm == pytest.approx(expected_noise)
        assert report.snr_db == pytest.approx(report.received_power_dbm - report.noise_power_dbm)

    def test_surface_gain_difference_equals_suppression(self, row85, steered_pattern):
        steered = surface_gain_db(steered_pattern, row85.steering_angle)
        specular = surface_gain_db(steered_pattern, 0.0)
        assert steered - specular == pytest.approx(specular_suppression(row85, 1e12), abs=1e-3)

    def test_metal_sheet_toward_steered_angle_is_weak(self, metal_pattern):
        assert surface_gain_db(metal_pattern, math.radians(30)) <= -20.0

    def test_swap_of_hop_distances_is_invariant(self, chain, steered_pattern):
        a = link_report(chain, LinkGeometry(0.2, 0.8, math.radians(30)), steered_pattern)
        b = link_report(chain, LinkGeometry(0.8, 0.2, math.radians(30)), steered_pattern)
        assert a == b

    def test_tx_power_moves_snr_one_to_one(self, chain, steered_pattern):
        geometry = LinkGeometry(0.5, 0.5, math.radians(30))
        base = link_report(chain, geometry, steered_pattern)
        import dataclasses

        boosted_chain = dataclasses.replace(chain, tx_power_dbm=chain.tx_power_dbm + 7.0)
        boosted = link_report(boosted_chain, geometry, steered_pattern)
        assert boosted.snr_db == pytest.approx(base.snr_db + 7.0, rel=1e-12)

    def test_snr_decreases_with_distance_and_medium_loss(self, chain, steered_pattern):
        totals = [0.5, 1.0, 2.0, 4.0]
        snrs = [
            link_report(chain, LinkGeometry(t / 2, t / 2, math.radians(30)), steered_pattern).snr_db
            for t in totals
        ]
        assert all(a > b for a, b in zip(snrs, snrs[1:]))
        lossy = [
            link_report(
                chain,
                LinkGeometry(0.5, 0.5, math.radians(30), medium_loss_coefficient=k),
                steered_pattern,
            ).snr_db
            for k in (0.0, 0.1, 0.5)
        ]
        assert all(a > b for a, b in zip(lossy, lossy[1:]))

    def test_rx_angle_outside_pattern_grid_rejected(self, chain, row85):
        narrow = array_factor(row85, 1e12, np.radians(np.linspace(-45, 45, 901)))
        with pytest.raises(ValueError):
            link_report(chain, LinkGeometry(0.5, 0.5, math.radians(60)), narrow)


class TestCalibration:
    def test_calibrated_steered_case_hits_target(self, chain, steered_pattern):
        geometry = LinkGeometry(0.5, 0.5, math.radians(30))
        total = calibrate_total_distance(chain, geometry, steered_pattern, 32.9194)
        calibrated = LinkGeometry(total / 2, total / 2, math.radians(30))
        assert link_report(chain, calibrated, steered_pattern).snr_db == pytest.approx(
            32.9194, abs=1e-6
        )

    def test_specular_prediction_sits_far_below(self, chain, row85, steered_pattern):
        geometry = LinkGeometry(0.5, 0.5, math.radians(30))
        total = calibrate_total_distance(chain, geometry, steered_pattern, 32.9194)
        calibrated = LinkGeometry(total / 2, total / 2, math.radians(30))
        steered = link_report(chain, calibrated, steered_pattern)
        specular_geo = LinkGeometry(total / 2, total / 2, rx_angle=0.0)
        specular = link_report(chain, specular_geo, steered_pattern)
        gap = steered.snr_db - specular.snr_db
        assert gap >= 25.0
        assert gap == pytest.approx(specular_suppression(row85, 1e12), abs=1e-3)

    def test_unreachable_target_rejected(self, chain, steered_pattern):
        geometry = LinkGeometry(0.5, 0.5, math.radians(30))
        with pytest.raises(ValueError):
            calibrate_total_distance(chain, geometry, steered_pattern, 500.0)


def test_chain_invariants():
    with pytest.raises(ValueError):
        RadioChainSpec(bandwidth_hz=0.0)
    with pytest.warns(UserWarning, match="outside the converter band"):
        RadioChainSpec(carrier_frequency_hz=0.3e12)


def test_geometry_invariants():
    with pytest.raises(ValueError):
        LinkGeometry(0.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        LinkGeometry(1.0, 1.0, 0.5, medium_loss_coefficient=-1.0)
