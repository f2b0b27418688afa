"""Command-line front end: design -> layout -> mask -> pattern -> link -> simulate.

Every command reads one JSON config (defaults are built in), accepts
dotted --set overrides, and writes deterministic files stamped with the
config hash. Exit codes: 0 success, 1 runtime error, 2 usage or config
error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .comms import multitone, channel_apply, run_ber_trial, theoretical_qpsk_ber, tone_snr
from .config import ConfigError, ProjectConfig, load_config
from .layout import ArrayLayout, export_mask, generate_layout, perturb_layout
from .link import LinkGeometry, calibrate_total_distance, link_report, surface_gain_db
from .patch import synthesize, validate_substrate
from .wavefront import array_factor, main_lobe, reflectance_spectrum, spectrum_minimum

_PERTURB_MODES = {"uniform": "uniform-scale", "random": "random"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thzreflect",
        description="Design and simulate a fixed terahertz reflectarray link.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> argparse.ArgumentParser:
        p.add_argument("--config", help="JSON configuration file (defaults used otherwise)")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config entry, e.g. --set geometry.rx_angle_deg=25",
        )
        p.add_argument("--out-dir", default=".", help="directory for output files")
        p.add_argument("--seed", type=int, help="override the configured seed bases")
        return p

    common(sub.add_parser("design", help="synthesize the patch and validate the substrate"))

    p = common(sub.add_parser("layout", help="generate the element grid and tables"))
    p.add_argument("--perturb", metavar="MODE:TOL", help="uniform:0.10 or random:0.10")

    p = common(sub.add_parser("export", help="write the photomask document"))
    p.add_argument("--format", choices=["svg", "json", "csv"], default="svg")
    p.add_argument("--perturb", metavar="MODE:TOL")

    p = common(sub.add_parser("pattern", help="far-field pattern at the design frequency"))
    p.add_argument("--perturb", metavar="MODE:TOL")

    p = common(sub.add_parser("spectrum", help="specular reflectance spectrum"))
    p.add_argument("--perturb", metavar="MODE:TOL")
    p.add_argument(
        "--cross-pol",
        action="store_true",
        help="rotate the polarization 90 degrees to the patch axis",
    )

    p = common(sub.add_parser("link", help="link budget toward the receiver"))
    p.add_argument(
        "--calibrate",
        action="store_true",
        help="solve the total distance that reads the target steered SNR, then "
        "predict the specular case at that distance",
    )

    p = common(sub.add_parser("simulate", help="frame-level QPSK or multitone experiment"))
    p.add_argument("--surface", choices=["reflectarray", "metal-sheet"], default="reflectarray")
    p.add_argument("--multitone", action="store_true", help="send the multitone probe instead of QPSK")
    p.add_argument("--frames", type=int, help="override the configured frame count")

    p = common(sub.add_parser("sweep", help="bit error rate versus Eb/N0"))
    p.add_argument("--ebn0", default="0,2,4,6,8", help="comma-separated Eb/N0 points in dB")

    return parser


# ---------------------------------------------------------------------------
# Output helpers


def _provenance(config: ProjectConfig) -> dict:
    return {"tool": f"thzreflect {__version__}", "config_sha256": config.sha256()}


def _write_bytes(out_dir: str, name: str, blob: bytes) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "wb") as f:
        f.write(blob)
    return path


def _write_json(out_dir: str, name: str, payload: dict, config: ProjectConfig) -> str:
    doc = dict(payload)
    doc["provenance"] = _provenance(config)
    return _write_bytes(out_dir, name, (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode())


def _write_csv(
    out_dir: str,
    name: str,
    header: str,
    rows,
    config: ProjectConfig,
    summary: dict | None = None,
) -> str:
    prov = _provenance(config)
    lines = [f"# {k}={v}" for k, v in sorted(prov.items())]
    if summary:
        lines += [f"# {k}={v}" for k, v in summary.items()]
    lines.append(header)
    lines.extend(rows)
    return _write_bytes(out_dir, name, ("\n".join(lines) + "\n").encode())


def _parse_perturb(arg: str | None) -> tuple[str, float] | None:
    if arg is None:
        return None
    try:
        mode, tol = arg.split(":", 1)
        return _PERTURB_MODES[mode], float(tol)
    except (ValueError, KeyError):
        raise ConfigError(f"--perturb expects uniform:TOL or random:TOL, got {arg!r}") from None


def _build_layout(config: ProjectConfig, perturb_arg: str | None) -> ArrayLayout:
    layout = config.build_layout()
    perturb = _parse_perturb(perturb_arg)
    if perturb is not None:
        mode, tol = perturb
        layout = perturb_layout(layout, tol, mode=mode, seed=config.seeds.perturb)
    return layout


def _angle_grid_rad(config: ProjectConfig) -> np.ndarray:
    step = config.simulation.angle_step_deg
    n = int(round(180.0 / step)) + 1
    return np.radians(np.linspace(-90.0, 90.0, n))


def _metal_sheet_layout(config: ProjectConfig) -> ArrayLayout:
    return generate_layout(
        rows=config.array.rows,
        cols=config.array.cols,
        f0=config.design_frequency_hz,
        substrate=config.substrate.build(),
        phase_step=0.0,
        pitch=config.array.pitch_m if config.array.pitch_m > 0.0 else None,
    )


# ---------------------------------------------------------------------------
# Commands


def cmd_design(args, config: ProjectConfig) -> int:
    substrate = config.substrate.build()
    f0 = config.design_frequency_hz
    patch = synthesize(f0, substrate)
    report = validate_substrate(substrate, f0)
    payload = {
        "design_frequency_hz": f0,
        "width_um": patch.width * 1e6,
        "length_um": patch.length * 1e6,
        "effective_permittivity": patch.effective_permittivity,
        "resonant_frequency_hz": patch.resonant_frequency,
        "substrate": {
            "relative_permittivity": substrate.relative_permittivity,
            "thickness_um": substrate.thickness * 1e6,
        },
        "validation": {
            "thickness_lower_um": report.lower_bound * 1e6,
            "thickness_upper_um": report.upper_bound * 1e6,
            "warnings": list(report.warnings),
        },
    }
    path = _write_json(args.out_dir, "design.json", payload, config)
    print(f"patch width           : {patch.width * 1e6:.3f} um")
    print(f"patch length          : {patch.length * 1e6:.3f} um")
    print(f"effective permittivity: {patch.effective_permittivity:.4f}")
    print(f"resonant frequency    : {patch.resonant_frequency / 1e12:.6f} THz")
    status = "ok" if report.ok else "; ".join(report.warnings)
    print(
        f"substrate thickness   : {substrate.thickness * 1e6:.2f} um "
        f"(window {report.lower_bound * 1e6:.2f} - {report.upper_bound * 1e6:.2f} um): {status}"
    )
    print(f"wrote {path}")
    return 0


def cmd_layout(args, config: ProjectConfig) -> int:
    layout = _build_layout(config, args.perturb)
    json_path = _write_bytes(
        args.out_dir, "layout.json", export_mask(layout, "json", _provenance(config))
    )
    csv_path = _write_bytes(
        args.out_dir, "elements.csv", export_mask(layout, "csv", _provenance(config))
    )
    ex, ey = layout.panel_extent
    print(
        f"{layout.rows} x {layout.cols} elements, pitch {layout.pitch * 1e6:.2f} um, "
        f"panel {ex * 1e3:.3f} x {ey * 1e3:.3f} mm, "
        f"steering {math.degrees(layout.steering_angle):.2f} deg"
    )
    print(f"wrote {json_path}")
    print(f"wrote {csv_path}")
    return 0


def cmd_export(args, config: ProjectConfig) -> int:
    layout = _build_layout(config, args.perturb)
    path = _write_bytes(
        args.out_dir, f"mask.{args.format}", export_mask(layout, args.format, _provenance(config))
    )
    print(f"wrote {path}")
    return 0


def cmd_pattern(args, config: ProjectConfig) -> int:
    layout = _build_layout(config, args.perturb)
    f0 = config.design_frequency_hz
    angles = _angle_grid_rad(config)
    pattern = array_factor(layout, f0, angles)
    lobe_angle, lobe_gain = main_lobe(pattern)
    rows = [
        f"{f0!r},{float(math.degrees(a))!r},{float(p)!r}"
        for a, p in zip(angles, pattern.power_db()[0])
    ]
    path = _write_csv(
        args.out_dir,
        "pattern.csv",
        "freq_hz,angle_deg,power_db",
        rows,
        config,
        summary={
            "main_lobe_angle_deg": f"{math.degrees(lobe_angle):.4f}",
            "main_lobe_gain_db": f"{lobe_gain:.4f}",
        },
    )
    print(f"main lobe: {math.degrees(lobe_angle):.3f} deg at {lobe_gain:.2f} dB")
    print(f"wrote {path}")
    return 0


def cmd_spectrum(args, config: ProjectConfig) -> int:
    layout = _build_layout(config, args.perturb)
    response = config.build_response(layout)
    sim = config.simulation
    freqs = np.linspace(sim.spectrum_start_hz, sim.spectrum_stop_hz, sim.spectrum_points)
    pol = math.pi / 2.0 if args.cross_pol else 0.0
    reflectance = reflectance_spectrum(layout, response, freqs, polarization_angle=pol)
    dip_f, dip_value = spectrum_minimum(freqs, reflectance)
    rows = [f"{float(f)!r},{float(r)!r}" for f, r in zip(freqs, reflectance)]
    path = _write_csv(
        args.out_dir,
        "spectrum.csv",
        "freq_hz,reflectance",
        rows,
        config,
        summary={"dip_frequency_hz": repr(dip_f), "dip_reflectance": repr(dip_value)},
    )
    print(f"reflectance minimum {dip_value:.4f} at {dip_f / 1e12:.4f} THz")
    print(f"wrote {path}")
    return 0


def cmd_link(args, config: ProjectConfig) -> int:
    layout = config.build_layout()
    chain = config.chain
    geometry = config.geometry.build()
    pattern = array_factor(
        layout, chain.carrier_frequency_hz, _angle_grid_rad(config), incidence=geometry.incidence_angle
    )
    report = link_report(chain, geometry, pattern)
    payload: dict = {"configured": report.to_dict() | {"total_distance_m": geometry.total_distance}}
    print("configured geometry:")
    print(f"  received power: {report.received_power_dbm:8.2f} dBm")
    print(f"  noise power   : {report.noise_power_dbm:8.2f} dBm")
    print(f"  SNR           : {report.snr_db:8.2f} dB")
    print(f"  surface gain  : {report.surface_gain_db:8.2f} dB")

    if args.calibrate:
        target = config.simulation.target_steered_snr_db
        total = calibrate_total_distance(chain, geometry, pattern, target)
        steered_geo = LinkGeometry(
            d_tx_ris=total / 2.0,
            d_ris_rx=total / 2.0,
            rx_angle=geometry.rx_angle,
            incidence_angle=geometry.incidence_angle,
            medium_loss_coefficient=geometry.medium_loss_coefficient,
        )
        specular_geo = LinkGeometry(
            d_tx_ris=total / 2.0,
            d_ris_rx=total / 2.0,
            rx_angle=geometry.incidence_angle,
            incidence_angle=geometry.incidence_angle,
            medium_loss_coefficient=geometry.medium_loss_coefficient,
        )
        steered = link_report(chain, steered_geo, pattern)
        specular = link_report(chain, specular_geo, pattern)
        payload["calibrated"] = {
            "target_snr_db": target,
            "total_distance_m": total,
            "steered": steered.to_dict(),
            "specular": specular.to_dict(),
            "snr_gap_db": steered.snr_db - specular.snr_db,
        }
        print(f"calibrated total distance: {total:.4f} m")
        print(f"  steered SNR : {steered.snr_db:8.2f} dB")
        print(f"  specular SNR: {specular.snr_db:8.2f} dB")
        print(f"  gap         : {steered.snr_db - specular.snr_db:8.2f} dB")

    path = _write_json(args.out_dir, "link.json", payload, config)
    print(f"wrote {path}")
    return 0


def _surface_gains(config: ProjectConfig) -> tuple[float, float]:
    """Pattern gain toward the receiver for the panel and for a plain sheet."""
    chain = config.chain
    geometry = config.geometry.build()
    angles = _angle_grid_rad(config)
    gain_ra = surface_gain_db(
        array_factor(
            config.build_layout(), chain.carrier_frequency_hz, angles, geometry.incidence_angle
        ),
        geometry.rx_angle,
    )
    gain_ms = surface_gain_db(
        array_factor(
            _metal_sheet_layout(config), chain.carrier_frequency_hz, angles, geometry.incidence_angle
        ),
        geometry.rx_angle,
    )
    return gain_ra, gain_ms


def cmd_simulate(args, config: ProjectConfig) -> int:
    sim = config.simulation

    if args.multitone:
        geometry = config.geometry.build()
        layout = config.build_layout() if args.surface == "reflectarray" else _metal_sheet_layout(config)
        pattern = array_factor(
            layout, config.chain.carrier_frequency_hz, _angle_grid_rad(config), geometry.incidence_angle
        )
        snr_link = link_report(config.chain, geometry, pattern).snr_db
        probe = multitone(sim.tone_frequencies_hz, sim.tone_sample_rate_hz, sim.tone_duration_s)
        received = channel_apply(probe, 0.0, -snr_link, config.seeds.noise)
        snrs = tone_snr(received, sim.tone_frequencies_hz)
        detected = [bool(s >= sim.tone_detection_threshold_db) for s in snrs]
        payload = {
            "surface": args.surface,
            "link_snr_db": snr_link,
            "tone_frequencies_hz": list(sim.tone_frequencies_hz),
            "tone_snr_db": [float(s) for s in snrs],
            "detected": detected,
            "detection_threshold_db": sim.tone_detection_threshold_db,
        }
        path = _write_json(args.out_dir, "tones.json", payload, config)
        n = len(received.samples)
        power = np.abs(np.fft.fft(received.samples)) ** 2 / n**2
        fft_freqs = np.fft.fftfreq(n, 1.0 / received.sample_rate)
        order = np.argsort(fft_freqs)
        rows = [
            f"{float(fft_freqs[i])!r},{float(10 * np.log10(max(power[i], 1e-300)))!r}"
            for i in order
        ]
        spectrum_path = _write_csv(args.out_dir, "if_spectrum.csv", "freq_hz,power_db", rows, config)
        print(f"{args.surface}: {sum(detected)}/{len(detected)} tones detected "
              f"(link SNR {snr_link:.2f} dB)")
        print(f"wrote {path}")
        print(f"wrote {spectrum_path}")
        return 0

    ebn0 = sim.ebn0_db
    if args.surface == "metal-sheet":
        gain_ra, gain_ms = _surface_gains(config)
        ebn0 += gain_ms - gain_ra
    frames = args.frames if args.frames is not None else sim.frames
    spec = config.frame.build()
    report, failures = run_ber_trial(
        spec,
        ebn0,
        frames,
        samples_per_symbol=sim.samples_per_symbol,
        seed=config.seeds.comms,
        overhead_bits=sim.overhead_accounting_bits,
    )
    payload = {
        "surface": args.surface,
        "ebn0_db": ebn0,
        "frames": frames,
        "sync_failures": failures,
        "theoretical_ber": theoretical_qpsk_ber(ebn0),
        "ber_report": report.to_dict(),
    }
    path = _write_json(args.out_dir, "simulate.json", payload, config)
    print(
        f"{args.surface}: BER {report.ber:.4f} over {report.total_data_bits} bits "
        f"({failures}/{frames} sync failures), effective rate "
        f"{report.effective_rate / 1e6:.2f} Mbps"
    )
    print(f"wrote {path}")
    return 0


def cmd_sweep(args, config: ProjectConfig) -> int:
    sim = config.simulation
    spec = config.frame.build()
    try:
        points = [float(v) for v in args.ebn0.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--ebn0 expects comma-separated numbers, got {args.ebn0!r}") from None
    if not points:
        raise ConfigError("--ebn0 needs at least one point")
    rows = []
    for i, ebn0 in enumerate(points):
        report, failures = run_ber_trial(
            spec,
            ebn0,
            sim.frames,
            samples_per_symbol=sim.samples_per_symbol,
            seed=config.seeds.comms + i,
            overhead_bits=sim.overhead_accounting_bits,
        )
        rows.append(
            f"{ebn0!r},{report.ber!r},{theoretical_qpsk_ber(ebn0)!r},"
            f"{report.bit_errors},{report.total_data_bits},{failures}"
        )
        print(f"Eb/N0 {ebn0:5.2f} dB: BER {report.ber:.5f} (theory {theoretical_qpsk_ber(ebn0):.5f})")
    path = _write_csv(
        args.out_dir,
        "ber_sweep.csv",
        "ebn0_db,ber_sim,ber_theory,bit_errors,total_bits,sync_failures",
        rows,
        config,
    )
    print(f"wrote {path}")
    return 0


_COMMANDS = {
    "design": cmd_design,
    "layout": cmd_layout,
    "export": cmd_export,
    "pattern": cmd_pattern,
    "spectrum": cmd_spectrum,
    "link": cmd_link,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        overrides = list(args.overrides)
        if args.seed is not None:
            overrides += [
                f"seeds.comms={args.seed}",
                f"seeds.noise={args.seed + 1}",
                f"seeds.perturb={args.seed + 2}",
            ]
        config = load_config(args.config, overrides)
        return _COMMANDS[args.command](args, config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
