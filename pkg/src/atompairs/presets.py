"""Scenario presets: canned parameter sets for each headline computation.

Every preset returns a dict with the scenario name and a parameter block the
CLI validates and executes; users can dump one to YAML, edit it and run the
edited file instead.
"""

from __future__ import annotations

PRESETS: dict[str, dict] = {
    # Faraday filter transmission spectrum and figures of merit
    "fig2-fadof": {
        "scenario": "fadof",
        "params": {
            "field_mt": 4.5,
            "temp_k": 365.0,
            "length_cm": 10.0,
            "extinction": 1.8e-6,
            "window_ghz": 3.0,
            "half_span_ghz": 8.0,
            "spacing_mhz": 0.5,
        },
    },
    # filter vs mirrored filter vs pair comb
    "fig3-matching": {
        "scenario": "matching",
        "params": {
            "field_mt": 4.5,
            "temp_k": 365.0,
            "length_cm": 10.0,
            "extinction": 1.8e-6,
            "fsr_mhz": 501.0,
            "linewidth_mhz": 8.4,
            "envelope_ghz": 150.0,
            "leak_fraction": 1.8e-6,
            "hot_cell_temp_k": 390.0,
            "hot_cell_buffer_mhz": 178.0,
        },
    },
    # multimode arrival-time histogram with the sampling beat
    "fig4-g2-comb": {
        "scenario": "g2",
        "params": {
            "mode": "multi",
            "fsr_mhz": 501.0,
            "linewidth_mhz": 8.4,
            "tbin_ns": 1.0,
            "t0_ns": 37.4,
            "rate1_hz": 0.0,
            "rate2_hz": 0.0,
            "bins": 240,
        },
    },
    # two-photon interference against the coherent reference
    "fig5-interference": {
        "scenario": "interference",
        "params": {
            "bandwidth_mhz": 8.1,
            "pair_phase_rad": 0.0,
            "alpha": 1.4142135623730951,
            "phases_deg": [0.0, 45.0, 90.0, 135.0],
            "half_span_ns": 120.0,
            "step_ns": 1.0,
            "exposure": 50.0,
            "noise": False,
        },
    },
    # synthetic records plus full amplitude/phase reconstruction
    "fig6-reconstruction": {
        "scenario": "reconstruct",
        "params": {
            "bandwidth_mhz": 8.1,
            "pair_phase_rad": 0.35,
            "alpha": 1.4142135623730951,
            "n_phases": 12,
            "half_span_ns": 120.0,
            "step_ns": 1.0,
            "exposure": 7.0,
            "noise": True,
        },
    },
    # analyzer rotation scans: single-photon vs pair super-resolution
    "fig7-superresolution": {
        "scenario": "superresolution",
        "params": {
            "fidelity": 0.99,
            "two_phi": 0.20,
            "angle_step_deg": 2.0,
        },
    },
    # transmission spectroscopy grid of the sensing cell
    "fig10-spectroscopy": {
        "scenario": "spectroscopy",
        "params": {
            "temps_c": [22.0, 53.0, 83.0],
            "fields_mt": [0.0, 12.0, 24.0, 37.0, 49.0, 58.0],
            "length_mm": 75.0,
            "rb85_fraction": 0.995,
            "droop_fraction": 0.15,
            "half_span_ghz": 6.0,
            "spacing_mhz": 1.0,
            "slices": 2,
        },
    },
    # NooN-state Faraday sensing scan with Fisher-information report
    "fig11-sensing": {
        "scenario": "noon-scan",
        "params": {
            "b_max_mt": 50.0,
            "b_step_mt": 0.5,
            "cell_temp_c": 70.0,
            "length_mm": 75.0,
            "rb85_fraction": 0.995,
            "droop_fraction": 0.15,
            "imbalance": 0.15,
            "fisher_at_mt": 44.0,
        },
    },
}
