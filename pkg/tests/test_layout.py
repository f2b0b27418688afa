"""Grid generation, phase wrapping, stubs, perturbation, and mask export."""

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thzreflect import (
    SubstrateSpec,
    export_mask,
    generate_layout,
    layout_from_json,
    perturb_layout,
    progressive_phase,
    steering_angle,
    stub_length,
)

TWO_PI = 2 * math.pi
K0_1THZ = TWO_PI * 1e12 / 3e8
HALF_WAVE_1THZ = 150e-6

# Hand evaluation of phase / (2 k0 sqrt(eps)) at 1 THz.
STUB_QUARTER_TURN = 22.613350843332274e-6
STUB_QUARTER_TURN_EFF = 23.005644379758685e-6


class TestProgressivePhase:
    def test_broadside_needs_no_delay(self):
        assert progressive_phase(K0_1THZ, HALF_WAVE_1THZ, 0.0) == 0.0

    def test_thirty_degrees_at_half_wave_pitch(self):
        phase = progressive_phase(K0_1THZ, HALF_WAVE_1THZ, math.radians(30))
        assert phase == pytest.approx(3 * math.pi / 2, rel=1e-12)

    def test_endfire_at_half_wave_pitch(self):
        phase = progressive_phase(K0_1THZ, HALF_WAVE_1THZ, math.pi / 2)
        assert phase == pytest.approx(math.pi, rel=1e-12)

    def test_incidence_contribution_adds_directly(self):
        base = progressive_phase(K0_1THZ, HALF_WAVE_1THZ, math.radians(30))
        shifted = progressive_phase(
            K0_1THZ, HALF_WAVE_1THZ, math.radians(30), incidence_phase=0.7
        )
        assert shifted == pytest.approx((base + 0.7) % TWO_PI)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            progressive_phase(K0_1THZ, 0.0, 0.1)
        with pytest.raises(ValueError):
            progressive_phase(K0_1THZ, HALF_WAVE_1THZ, 2.0)


class TestSteeringAngle:
    def test_quarter_turn_step_steers_thirty_degrees(self):
        angle = steering_angle(math.pi / 2, K0_1THZ, HALF_WAVE_1THZ)
        assert math.degrees(angle) == pytest.approx(30.0, abs=1e-9)

    def test_uniform_phase_is_specular(self):
        assert steering_angle(0.0, K0_1THZ, HALF_WAVE_1THZ) == 0.0

    def test_half_turn_step_is_endfire(self):
        angle = steering_angle(math.pi, K0_1THZ, HALF_WAVE_1THZ)
        assert angle == pytest.approx(math.pi / 2)

    def test_unreachable_step_raises(self):
        with pytest.raises(ValueError):
            steering_angle(1.1 * math.pi, K0_1THZ, HALF_WAVE_1THZ)


@given(theta=st.floats(-89.9, 89.9))
def test_phase_to_angle_round_trip(theta):
    """The layout's delay step is the sign-flipped wrapped increment."""
    theta = math.radians(theta)
    wrapped = progressive_phase(K0_1THZ, HALF_WAVE_1THZ, theta)
    signed = wrapped if wrapped <= math.pi else wrapped - TWO_PI
    assert steering_angle(-signed, K0_1THZ, HALF_WAVE_1THZ) == pytest.approx(theta, abs=1e-9)


class TestStubLength:
    def test_known_minimum_stub(self, su8):
        stub = stub_length(math.pi / 2, 1e12, su8)
        assert stub == pytest.approx(STUB_QUARTER_TURN, rel=1e-12)
        # Published fabricated minimum stub was 22.5 um.
        assert abs(stub / 22.5e-6 - 1.0) < 0.01

    def test_effective_permittivity_variant(self, su8):
        stub = stub_length(math.pi / 2, 1e12, su8, use_effective=True)
        assert stub == pytest.approx(STUB_QUARTER_TURN_EFF, rel=1e-9)

    def test_zero_phase_zero_stub(self, su8):
        assert stub_length(0.0, 1e12, su8) == 0.0

    def test_linear_in_phase(self, su8):
        base = stub_length(math.pi / 2, 1e12, su8)
        assert stub_length(TWO_PI, 1e12, su8) == pytest.approx(4.0 * base, rel=1e-12)

    def test_period_group_total_is_six_quarter_stubs(self, su8):
        base = stub_length(math.pi / 2, 1e12, su8)
        total = sum(
            stub_length(p, 1e12, su8) for p in (0.0, math.pi / 2, math.pi, 3 * math.pi / 2)
        )
        assert total == pytest.approx(6.0 * base, rel=1e-12)

    def test_rejects_negative_phase(self, su8):
        with pytest.raises(ValueError):
            stub_length(-0.1, 1e12, su8)


class TestGenerateLayout:
    def test_quarter_turn_wraps_every_four(self, su8):
        layout = generate_layout(1, 4, 1e12, su8, math.pi / 2)
        phases = [el.phase for el in layout.elements]
        assert phases == pytest.approx([0.0, math.pi / 2, math.pi, 3 * math.pi / 2])

    def test_single_element(self, su8):
        layout = generate_layout(1, 1, 1e12, su8, math.pi / 2)
        assert layout.size == 1
        assert layout.elements[0].phase == 0.0
        assert layout.elements[0].stub_length == 0.0

    def test_panel_extent(self, panel85):
        assert panel85.pitch == pytest.approx(150e-6, rel=1e-15)
        assert panel85.panel_extent == (12.75e-3, 12.75e-3)

    def test_phases_identical_down_columns(self, su8):
        layout = generate_layout(3, 8, 1e12, su8, math.pi / 2)
        grid = np.array([el.phase for el in layout.elements]).reshape(3, 8)
        assert np.all(grid == grid[0])

    def test_phase_progression_is_arithmetic_mod_2pi(self, su8):
        step = math.pi / 2
        layout = generate_layout(1, 16, 1e12, su8, step)
        phases = np.array([el.phase for el in layout.elements])
        diffs = np.mod(np.diff(phases), TWO_PI)
        assert diffs == pytest.approx(np.full(15, step))
        # A quarter-turn step repeats with exact period four.
        assert phases[4:8] == pytest.approx(phases[0:4])

    def test_uneven_step_warns(self, su8):
        with pytest.warns(UserWarning, match="does not divide"):
            generate_layout(1, 4, 1e12, su8, 1.1)

    def test_rejects_empty_grid(self, su8):
        with pytest.raises(ValueError):
            generate_layout(0, 4, 1e12, su8, math.pi / 2)


class TestPerturbLayout:
    def test_zero_tolerance_is_identity(self, panel85):
        assert perturb_layout(panel85, 0.0) is panel85

    def test_uniform_scale_shifts_resonance_down(self, panel85):
        perturbed = perturb_layout(panel85, 0.10, mode="uniform-scale")
        assert perturbed.patch.width == pytest.approx(1.10 * panel85.patch.width)
        assert perturbed.patch.length == pytest.approx(1.10 * panel85.patch.length)
        for orig, new in zip(panel85.elements[:8], perturbed.elements[:8]):
            assert new.stub_length == pytest.approx(1.10 * orig.stub_length)
        # Independent bisection oracle on the length inversion.
        assert perturbed.patch.resonant_frequency == pytest.approx(909931944178.48, rel=1e-9)

    def test_random_mode_is_seed_deterministic(self, su8):
        layout = generate_layout(2, 8, 1e12, su8, math.pi / 2)
        a = perturb_layout(layout, 0.10, mode="random", seed=5)
        b = perturb_layout(layout, 0.10, mode="random", seed=5)
        c = perturb_layout(layout, 0.10, mode="random", seed=6)
        assert a == b
        assert a != c

    def test_random_factors_stay_in_band(self, su8):
        layout = generate_layout(2, 8, 1e12, su8, math.pi / 2)
        perturbed = perturb_layout(layout, 0.10, mode="random", seed=5)
        ratios = [
            new.stub_length / orig.stub_length
            for orig, new in zip(layout.elements, perturbed.elements)
            if orig.stub_length > 0
        ]
        assert all(0.9 <= r <= 1.1 for r in ratios)

    def test_phase_stub_consistency_preserved(self, su8):
        from thzreflect.layout import stub_wavenumber_from_layout, wrap_phase

        layout = generate_layout(1, 8, 1e12, su8, math.pi / 2)
        perturbed = perturb_layout(layout, 0.10, mode="random", seed=9)
        k = stub_wavenumber_from_layout(perturbed, perturbed.design_frequency)
        for el in perturbed.elements:
            assert el.phase == pytest.approx(wrap_phase(k * el.stub_length), abs=1e-12)

    def test_rejects_bad_arguments(self, panel85):
        with pytest.raises(ValueError):
            perturb_layout(panel85, -0.1)
        with pytest.raises(ValueError):
            perturb_layout(panel85, 0.1, mode="sideways")


class TestMaskExport:
    def test_json_records_and_phases(self, su8):
        layout = generate_layout(1, 4, 1e12, su8, math.pi / 2)
        doc = json.loads(export_mask(layout, "json"))
        assert len(doc["elements"]) == 4
        phases = [rec["phase_rad"] for rec in doc["elements"]]
        assert phases == pytest.approx([0.0, math.pi / 2, math.pi, 3 * math.pi / 2])

    def test_svg_canvas_in_micrometers(self, panel85):
        svg = export_mask(panel85, "svg").decode()
        assert 'width="12750"' in svg
        assert 'height="12750"' in svg

    def test_json_round_trip(self, su8):
        layout = generate_layout(3, 5, 1e12, su8, math.pi / 2)
        assert layout_from_json(export_mask(layout, "json")) == layout

    def test_json_round_trip_after_perturbation(self, su8):
        layout = perturb_layout(
            generate_layout(2, 6, 1e12, su8, math.pi / 2), 0.08, mode="random", seed=3
        )
        assert layout_from_json(export_mask(layout, "json")) == layout

    def test_csv_header(self, su8):
        layout = generate_layout(1, 4, 1e12, su8, math.pi / 2)
        text = export_mask(layout, "csv").decode()
        assert text.splitlines()[0] == "row,col,x_um,y_um,phase_rad,stub_um"
        assert len(text.splitlines()) == 5

    def test_unknown_format_rejected(self, su8):
        layout = generate_layout(1, 4, 1e12, su8, math.pi / 2)
        with pytest.raises(ValueError):
            export_mask(layout, "gds")
