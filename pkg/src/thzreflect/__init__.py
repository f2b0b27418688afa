"""Design and link-level simulation toolkit for fixed terahertz reflectarrays."""

__version__ = "0.1.0"

from .constants import SPEED_OF_LIGHT
from .patch import (
    ConvergenceError,
    PatchGeometry,
    SubstrateSpec,
    effective_permittivity,
    patch_length,
    patch_width,
    resonant_frequency,
    synthesize,
    validate_substrate,
)
from .layout import (
    ArrayLayout,
    ElementSpec,
    export_mask,
    generate_layout,
    layout_from_json,
    perturb_layout,
    progressive_phase,
    steering_angle,
    stub_length,
)
from .wavefront import (
    ElementResponse,
    RadiationPattern,
    array_factor,
    element_response_for,
    main_lobe,
    polarization_coupling,
    reflectance_spectrum,
    specular_suppression,
)
from .link import (
    LinkGeometry,
    LinkReport,
    RadioChainSpec,
    calibrate_total_distance,
    free_space_path_loss,
    link_report,
    medium_loss,
    surface_gain_db,
)
from .comms import (
    BerReport,
    FrameSpec,
    IQWaveform,
    build_frame,
    channel_apply,
    demodulate,
    multitone,
    qpsk_modulate,
    run_ber_trial,
    theoretical_qpsk_ber,
    tone_snr,
)
from .config import ConfigError, ProjectConfig, load_config
