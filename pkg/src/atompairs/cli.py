"""Command-line front end.

Subcommands: spectrum, fadof, purity, g2, reconstruct, noon-scan and
``scenario run <preset|path>``.  All outputs are plain CSV/JSON tables; a
manifest with SHA-256 hashes accompanies every scenario run so that seeded
runs can be verified byte for byte.

Exit codes: 0 ok, 2 configuration error, 3 numeric error, 4 coverage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np
import yaml

from atompairs import biphoton, cavity, coincidences, filters, noon, presets, vapor
from atompairs.atoms import AtomLibrary, build_hamiltonian, diagonalize, load_atom_data
from atompairs.errors import ConfigError, CoverageError, FitFailure, NumericError

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_COVERAGE = 4


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def write_csv(path: Path, header: list[str], columns: list[np.ndarray]):
    rows = zip(*columns)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_json(path: Path, payload):
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


class OutputSink:
    """Collects produced files and writes the manifest at the end."""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.files: list[Path] = []

    def path(self, name: str) -> Path:
        p = self.out_dir / name
        self.files.append(p)
        return p

    def manifest(self, meta: dict):
        payload = {
            "meta": meta,
            "files": {p.name: _sha256(p) for p in self.files},
        }
        write_json(self.out_dir / "manifest.json", payload)


def rho_to_json(rho: np.ndarray) -> dict:
    return {
        "basis": list(noon.BASIS),
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in rho],
    }


def rho_from_json(payload: dict) -> np.ndarray:
    try:
        rows = payload["matrix"]
        rho = np.array([[complex(re, im) for re, im in row] for row in rows])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad density-matrix payload: {exc}") from exc
    if rho.shape != (4, 4):
        raise ConfigError("density matrix must be 4x4")
    return rho


def noon_frequency_hz(atoms: AtomLibrary) -> float:
    """Probe line used throughout: the most red-detuned D1 ground-state line
    of the minority isotope (F=2 -> F'=1 of Rb87 at zero field)."""
    iso = atoms["Rb87"]
    g = diagonalize(build_hamiltonian(iso, "5S1/2", 0.0))
    e = diagonalize(build_hamiltonian(iso, "5P1/2", 0.0))
    e_g = g.energies_hz[np.isclose(g.f_labels, 2.0)].mean()
    e_e = e.energies_hz[np.isclose(e.f_labels, 1.0)].mean()
    return float(e_e - e_g)


# ---------------------------------------------------------------- scenarios


def run_spectrum(params, atoms, sink, fmt="csv", seed=0):
    cell = vapor.VaporCellConfig(
        length_m=params.get("length_cm", 10.0) / 100.0,
        temperature_k=params.get("temp_k", 300.0),
        isotope_fractions=params.get("fractions") or atoms.natural_fractions(),
        buffer_fwhm_hz=params.get("buffer_mhz", 0.0) * 1e6,
    )
    center = atoms.d1_center_hz(cell.isotope_fractions)
    grid = vapor.make_frequency_grid(
        center,
        params.get("half_span_ghz", 8.0) * 1e9,
        params.get("spacing_mhz", 0.5) * 1e6,
    )
    path = vapor.VaporPath(atoms, cell, params.get("field_mt", 0.0) * 1e-3, slices=1)
    vapor._check_resolution(grid, path.min_feature_width_hz())
    n_plus, n_minus = path.index_at(grid, path.b_center_t)
    if fmt == "json":
        write_json(
            sink.path("index.json"),
            {
                "frequency_hz": [float(x) for x in grid],
                "n_plus": [[float(z.real), float(z.imag)] for z in n_plus],
                "n_minus": [[float(z.real), float(z.imag)] for z in n_minus],
            },
        )
    else:
        write_csv(
            sink.path("index.csv"),
            ["frequency_Hz", "re_n_plus", "im_n_plus", "re_n_minus", "im_n_minus"],
            [grid, n_plus.real, n_plus.imag, n_minus.real, n_minus.imag],
        )
    return {"center_hz": center, "points": int(grid.size)}


def run_fadof(params, atoms, sink, fmt="csv", seed=0):
    cell = vapor.VaporCellConfig(
        length_m=params.get("length_cm", 10.0) / 100.0,
        temperature_k=params.get("temp_k", 365.0),
        isotope_fractions=params.get("fractions") or atoms.natural_fractions(),
    )
    center = atoms.d1_center_hz(cell.isotope_fractions)
    grid = vapor.make_frequency_grid(
        center,
        params.get("half_span_ghz", 8.0) * 1e9,
        params.get("spacing_mhz", 0.5) * 1e6,
    )
    pol = filters.PolarizerPair(extinction=params.get("extinction", 1.8e-6))
    spec = filters.fadof_spectrum(cell, params.get("field_mt", 4.5) * 1e-3, pol, grid, atoms)
    window = params.get("window_ghz", 3.0) * 1e9
    peak = float(spec.grid_hz[int(np.argmax(spec.transmission))])
    metrics = filters.filter_metrics(spec, (peak - window, peak + window))
    write_csv(
        sink.path("fadof.csv"),
        ["frequency_Hz", "detuning_GHz", "transmission"],
        [spec.grid_hz, (spec.grid_hz - center) / 1e9, spec.transmission],
    )
    report = {
        "t_max": metrics.t_max,
        "fwhm_hz": metrics.fwhm_hz,
        "enbw_hz": metrics.enbw_hz,
        "rejection_db": metrics.rejection_db,
        "peak_offset_hz": metrics.peak_hz - center,
    }
    write_json(sink.path("fadof_metrics.json"), report)
    return report


def _matching_pieces(params, atoms):
    cell = vapor.VaporCellConfig(
        length_m=params.get("length_cm", 10.0) / 100.0,
        temperature_k=params.get("temp_k", 365.0),
        isotope_fractions=params.get("fractions") or atoms.natural_fractions(),
    )
    center = atoms.d1_center_hz(cell.isotope_fractions)
    grid = vapor.make_frequency_grid(center, 8e9, 0.5e6)
    pol = filters.PolarizerPair(extinction=params.get("extinction", 1.8e-6))
    spec = filters.fadof_spectrum(cell, params.get("field_mt", 4.5) * 1e-3, pol, grid, atoms)
    nu0 = float(spec.grid_hz[int(np.argmax(spec.transmission))])
    cfg = cavity.CavityConfig(
        fsr_hz=params.get("fsr_mhz", 501.0) * 1e6,
        linewidth_hz=params.get("linewidth_mhz", 8.4) * 1e6,
        degenerate_hz=nu0,
        envelope_fwhm_hz=params.get("envelope_ghz", 150.0) * 1e9,
    )
    comb = cavity.mode_comb(cfg)
    passed = cavity.filtered_pair_rate(comb, spec)
    hot = vapor.VaporCellConfig(
        length_m=0.10,
        temperature_k=params.get("hot_cell_temp_k", 390.0),
        isotope_fractions=atoms.natural_fractions(),
        buffer_fwhm_hz=params.get("hot_cell_buffer_mhz", 178.0) * 1e6,
    )
    hot_t = vapor.blocking_cell_transmission(
        hot, vapor.make_frequency_grid(center, 8e9, 2e6), atoms
    )
    return spec, nu0, comb, passed, hot_t


def run_matching(params, atoms, sink, fmt="csv", seed=0):
    spec, nu0, comb, passed, hot_t = _matching_pieces(params, atoms)
    mirror = spec(2 * nu0 - spec.grid_hz)
    write_csv(
        sink.path("matching.csv"),
        ["frequency_Hz", "transmission", "mirror_transmission", "pair_product"],
        [spec.grid_hz, spec.transmission, mirror, spec.transmission * mirror],
    )
    write_csv(
        sink.path("comb.csv"),
        ["mode_index", "frequency_Hz", "weight", "mode_transmission", "pair_weight"],
        [comb.k, comb.frequency_hz, comb.weight, passed.mode_transmission, passed.pair_weight],
    )
    report = {"degenerate_hz": nu0, "degenerate_pair_fraction": passed.degenerate_pair_fraction()}
    write_json(sink.path("matching.json"), report)
    return report


def run_purity(params, atoms, sink, fmt="csv", seed=0):
    spec, nu0, comb, passed, hot_t = _matching_pieces(params, atoms)
    rep = cavity.spectral_purity(
        passed, params.get("leak_fraction", 1.8e-6), hot_t
    )
    write_csv(
        sink.path("comb.csv"),
        ["mode_index", "frequency_Hz", "weight", "mode_transmission", "pair_weight"],
        [comb.k, comb.frequency_hz, comb.weight, passed.mode_transmission, passed.pair_weight],
    )
    report = {
        "spectral_purity": rep.spectral_purity,
        "degenerate_fraction": rep.degenerate_fraction,
        "degenerate_share_in_band": rep.degenerate_share_in_band,
        "in_band_modes": rep.in_band_modes,
        "degenerate_hz": nu0,
    }
    per_mode = {
        str(int(k)): [float(w), float(t), float(p)]
        for k, w, t, p in zip(
            comb.k, comb.weight, passed.mode_transmission, passed.pair_weight
        )
        if abs(k) <= 20
    }
    write_json(sink.path("purity.json"), {**report, "per_mode_table": per_mode})
    return report


def run_g2(params, atoms, sink, fmt="csv", seed=0):
    env = coincidences.G2Envelope.from_linewidth(params.get("linewidth_mhz", 8.4) * 1e6)
    det = coincidences.DetectionModel(
        t_bin_s=params.get("tbin_ns", 1.0) * 1e-9,
        t0_s=params.get("t0_ns", 0.0) * 1e-9,
        rate1_hz=params.get("rate1_hz", 0.0),
        rate2_hz=params.get("rate2_hz", 0.0),
        round_trip_s=1.0 / (params.get("fsr_mhz", 501.0) * 1e6),
    )
    n_bins = int(params.get("bins", 240))
    bins = np.arange(-n_bins // 2, n_bins // 2 + 1)
    hist = coincidences.binned_histogram(env, det, params.get("mode", "multi"), bins)
    write_csv(
        sink.path("g2.csv"),
        ["bin_index", "delay_ns", "rate"],
        [hist.bin_index, hist.delays_s * 1e9, hist.values],
    )
    report = {"mode": hist.mode, "envelope_fwhm_ns": env.fwhm_s * 1e9}
    try:
        fit = coincidences.fit_envelope(hist)
        report.update(
            {
                "fit_gamma_sum": fit.gamma_sum,
                "fit_fwhm_ns": fit.fwhm_s * 1e9,
                "fit_t0_ns": fit.t0_s * 1e9,
                "fit_floor": fit.floor,
            }
        )
    except FitFailure as exc:
        report["fit_error"] = str(exc)
    write_json(sink.path("g2_fit.json"), report)
    return report


def run_interference(params, atoms, sink, fmt="csv", seed=0):
    tau = biphoton.symmetric_tau_grid(
        params.get("half_span_ns", 120.0) * 1e-9, params.get("step_ns", 1.0) * 1e-9
    )
    psi = biphoton.ideal_opo_psi(
        params.get("bandwidth_mhz", 8.1) * 1e6, params.get("pair_phase_rad", 0.0), tau
    )
    phases = np.radians(params.get("phases_deg", [0.0, 45.0, 90.0, 135.0]))
    records = biphoton.simulate_records(
        psi,
        params.get("alpha", 1.0),
        phases,
        params.get("exposure", 50.0),
        noise=params.get("noise", False),
        seed=seed,
    )
    cols = [tau * 1e9] + [r.counts for r in records]
    write_csv(
        sink.path("interference.csv"),
        ["tau_ns"] + [f"phase_{np.degrees(r.phase_rad):g}deg" for r in records],
        cols,
    )
    floor = params.get("alpha", 1.0) ** 4 / 4.0 * params.get("exposure", 50.0)
    return {"coherent_floor_counts": floor, "n_phases": len(records)}


def run_reconstruct(params, atoms, sink, fmt="csv", seed=0, records_file=None):
    alpha = params.get("alpha", 1.0)
    if records_file is not None:
        payload = json.loads(Path(records_file).read_text())
        try:
            alpha = float(payload["alpha"])
            tau = np.asarray(payload["tau_ns"], dtype=float) * 1e-9
            records = [
                biphoton.InterferenceRecord(
                    phase_rad=float(ph),
                    tau_s=tau,
                    counts=np.asarray(counts, dtype=float),
                    exposure=float(payload["exposure"]),
                )
                for ph, counts in zip(payload["phases_rad"], payload["counts"])
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad records bundle: {exc}") from exc
    else:
        tau = biphoton.symmetric_tau_grid(
            params.get("half_span_ns", 120.0) * 1e-9, params.get("step_ns", 1.0) * 1e-9
        )
        psi = biphoton.ideal_opo_psi(
            params.get("bandwidth_mhz", 8.1) * 1e6, params.get("pair_phase_rad", 0.35), tau
        )
        phases = np.linspace(0.0, np.pi, int(params.get("n_phases", 12)), endpoint=False)
        records = biphoton.simulate_records(
            psi,
            alpha,
            phases,
            params.get("exposure", 7.0),
            noise=params.get("noise", True),
            seed=seed,
        )
    rec = biphoton.reconstruct_wavefunction(records, alpha)
    wf = rec.wavefunction
    write_csv(
        sink.path("reconstruction.csv"),
        ["tau_ns", "amplitude_sq", "phase_rad", "phase_sigma_rad"],
        [wf.tau_s * 1e9, wf.amplitude**2, wf.phase, rec.phase_sigma_rad],
    )
    i0 = int(np.argmin(np.abs(wf.tau_s)))
    return {
        "phase_sigma_deg_at_zero": float(np.degrees(rec.phase_sigma_rad[i0])),
        "clipped_points": rec.clipped_points,
    }


def run_superresolution(params, atoms, sink, fmt="csv", seed=0):
    step = np.radians(params.get("angle_step_deg", 2.0))
    angles = np.arange(0.0, np.pi + step / 2, step)
    surrogate = noon.surrogate_noon_state(
        params.get("fidelity", 0.99), params.get("two_phi", 0.20)
    )
    # undo the basis-mapping quarter-wave plate to recover the source state
    qwp_back = noon.OpticalElement(kind="QWP", jones=noon.qwp_jones(np.pi / 4).conj().T)
    source_state = noon.apply_element(surrogate, qwp_back)
    single = noon.pure_state([1.0, 0, 0, 0])
    singles, hh, vv, hv = [], [], [], []
    for a in angles:
        probs = noon.measurement_rates(source_state, analyzer_hwp_rad=a)
        hh.append(probs.hh)
        vv.append(probs.vv)
        hv.append(probs.hv)
        singles.append(noon.measurement_rates(single, analyzer_hwp_rad=a).singles_h)
    write_csv(
        sink.path("superresolution.csv"),
        ["hwp_deg", "singles_h", "coinc_hh", "coinc_hv", "coinc_vv"],
        [np.degrees(angles), np.array(singles), np.array(hh), np.array(hv), np.array(vv)],
    )
    f_max, phi = noon.noon_fidelity(surrogate)
    write_json(sink.path("state.json"), rho_to_json(surrogate.rho))
    report = {
        "fidelity_max": f_max,
        "fidelity_two_phi": 2 * phi,
        "coincidence_visibility": noon.visibility(hh),
        "coincidence_oscillations": noon.count_oscillations(hh),
        "singles_oscillations": noon.count_oscillations(singles),
    }
    write_json(sink.path("superresolution.json"), report)
    return report


def _sensing_cell(params):
    frac = params.get("rb85_fraction", 0.995)
    return vapor.VaporCellConfig(
        length_m=params.get("length_mm", 75.0) / 1e3,
        temperature_k=params.get("cell_temp_c", 70.0) + 273.15,
        isotope_fractions={"Rb85": frac, "Rb87": 1.0 - frac},
        field_profile="quadratic" if params.get("droop_fraction", 0.15) else "uniform",
        droop_fraction=params.get("droop_fraction", 0.15),
    )


def run_spectroscopy(params, atoms, sink, fmt="csv", seed=0):
    center = atoms.d1_center_hz()
    grid = vapor.make_frequency_grid(
        center,
        params.get("half_span_ghz", 6.0) * 1e9,
        params.get("spacing_mhz", 0.5) * 1e6,
    )
    slices = int(params.get("slices", 8))
    header = ["frequency_Hz", "detuning_GHz"]
    cols = [grid, (grid - center) / 1e9]
    widths = {}
    for temp_c in params.get("temps_c", [22.0, 53.0, 83.0]):
        for b_mt in params.get("fields_mt", [0.0, 12.0, 24.0, 37.0, 49.0, 58.0]):
            cell = _sensing_cell({**params, "cell_temp_c": temp_c})
            path = vapor.VaporPath(atoms, cell, b_mt * 1e-3, slices=slices)
            t_plus, t_minus = path.transfer_at(grid)
            trans = 0.5 * (np.abs(t_plus) ** 2 + np.abs(t_minus) ** 2)
            header.append(f"T_{temp_c:g}C_{b_mt:g}mT")
            cols.append(trans)
            absorb = 1.0 - trans
            if absorb.sum() > 0:
                mu = float((grid * absorb).sum() / absorb.sum())
                widths[f"{temp_c:g}C_{b_mt:g}mT"] = float(
                    np.sqrt(((grid - mu) ** 2 * absorb).sum() / absorb.sum())
                )
    write_csv(sink.path("spectroscopy.csv"), header, cols)
    write_json(sink.path("spectroscopy_widths.json"), widths)
    return {"curves": len(header) - 2}


def run_noon_scan(params, atoms, sink, fmt="csv", seed=0, state_file=None):
    cell = _sensing_cell(params)
    if params.get("detuning_ghz") is not None:
        nu = atoms.d1_center_hz() + params["detuning_ghz"] * 1e9
    else:
        nu = noon_frequency_hz(atoms)
    if state_file is not None:
        state = noon.TwoPhotonPolState(rho_from_json(json.loads(Path(state_file).read_text())))
    else:
        state = noon.make_noon_from_pair(imbalance=params.get("imbalance", 0.15))
    b_list = np.arange(
        0.0, params.get("b_max_mt", 50.0) * 1e-3 + 1e-9, params.get("b_step_mt", 0.5) * 1e-3
    )
    scan = noon.sensing_scan(state, cell, atoms, nu, b_list)
    cols = {
        "b_mT": np.array([p.b_t * 1e3 for p in scan]),
        "rotation_rad": np.array([p.rotation_rad for p in scan]),
        "eta": np.array([p.eta for p in scan]),
        "singles_H": np.array([p.probabilities.singles_h for p in scan]),
        "singles_V": np.array([p.probabilities.singles_v for p in scan]),
        "coinc_HH": np.array([p.probabilities.hh for p in scan]),
        "coinc_HV": np.array([p.probabilities.hv for p in scan]),
        "coinc_VV": np.array([p.probabilities.vv for p in scan]),
        "p_one_H": np.array([p.probabilities.one_h for p in scan]),
        "p_one_V": np.array([p.probabilities.one_v for p in scan]),
        "p_none": np.array([p.probabilities.none for p in scan]),
    }
    write_csv(sink.path("scan.csv"), list(cols), list(cols.values()))

    report = {
        "hh_visibility": noon.visibility(cols["coinc_HH"]),
        "vv_visibility": noon.visibility(cols["coinc_VV"]),
        "hh_oscillations": noon.count_oscillations(cols["coinc_HH"]),
        "singles_v_oscillations": noon.count_oscillations(cols["singles_V"]),
        "probe_frequency_hz": nu,
    }
    fisher_at = params.get("fisher_at_mt")
    if fisher_at is not None:
        b_star = fisher_at * 1e-3
        fi = noon.fisher_information(scan, b_star)

        def channel(b):
            path = vapor.VaporPath(atoms, cell, float(b), slices=16)
            t_plus, t_minus = path.transfer_at(np.array([nu]))
            return noon.circular_jones(t_plus[0], t_minus[0])

        sql = noon.sql_fisher_information(channel, b_star)
        full, frozen = noon.fisher_information_frozen_loss(
            state, cell, atoms, nu, b_star
        )
        report["fisher"] = {
            "b_mT": fisher_at,
            "fi_per_photon": fi.fi_per_photon,
            "fi_per_scattered": fi.fi_per_scattered,
            "sql_per_photon": sql,
            "sql_ratio": fi.fi_per_photon / sql,
            "fi_pair_live_loss": full,
            "fi_pair_frozen_loss": frozen,
        }
    write_json(sink.path("fisher.json"), report)
    return report


RUNNERS = {
    "spectrum": run_spectrum,
    "fadof": run_fadof,
    "matching": run_matching,
    "purity": run_purity,
    "g2": run_g2,
    "interference": run_interference,
    "reconstruct": run_reconstruct,
    "superresolution": run_superresolution,
    "spectroscopy": run_spectroscopy,
    "noon-scan": run_noon_scan,
}


def load_scenario_config(source: str) -> dict:
    """Preset name, or a YAML/JSON file with {scenario, params, ...}."""
    if source in presets.PRESETS:
        return json.loads(json.dumps(presets.PRESETS[source]))  # deep copy
    path = Path(source)
    if not path.exists():
        raise ConfigError(
            f"{source!r} is neither a preset ({', '.join(sorted(presets.PRESETS))}) "
            "nor an existing file"
        )
    try:
        payload = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse scenario file: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError("scenario file must hold a mapping")
    return payload


def validate_scenario(cfg: dict) -> tuple[str, dict]:
    if "scenario" not in cfg:
        raise ConfigError("scenario: field is required")
    name = cfg["scenario"]
    if name not in RUNNERS:
        raise ConfigError(f"scenario.{name}: unknown scenario; have {sorted(RUNNERS)}")
    params = cfg.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params: must be a mapping")
    for key, value in params.items():
        if isinstance(value, str) and key.endswith(("_file", "_path")):
            if not Path(value).exists():
                raise ConfigError(f"params.{key}: file {value!r} does not exist")
    return name, params


def run_scenario(cfg: dict, atoms, out_dir, seed: int, fmt: str = "csv") -> dict:
    name, params = validate_scenario(cfg)
    sink = OutputSink(Path(out_dir))
    report = RUNNERS[name](params, atoms, sink, fmt=fmt, seed=seed)
    sink.manifest({"scenario": name, "seed": seed, "report": report})
    return report


# -------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="atompairs", description=__doc__)
    p.add_argument("--out-dir", default="out", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--atom-data", default=None, help="override the atom constants file")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="complex refractive index n+/n-")
    sp.add_argument("--field-mT", type=float, default=0.0)
    sp.add_argument("--temp-K", type=float, default=300.0)
    sp.add_argument("--length-cm", type=float, default=10.0)
    sp.add_argument("--buffer-MHz", type=float, default=0.0)
    sp.add_argument("--half-span-GHz", type=float, default=8.0)
    sp.add_argument("--spacing-MHz", type=float, default=0.5)

    fp = sub.add_parser("fadof", help="Faraday filter spectrum and metrics")
    fp.add_argument("--field-mT", type=float, default=4.5)
    fp.add_argument("--temp-K", type=float, default=365.0)
    fp.add_argument("--length-cm", type=float, default=10.0)
    fp.add_argument("--extinction", type=float, default=1.8e-6)
    fp.add_argument("--window-GHz", type=float, default=3.0)

    pp = sub.add_parser("purity", help="filtered-comb spectral purity report")
    pp.add_argument("--field-mT", type=float, default=4.5)
    pp.add_argument("--temp-K", type=float, default=365.0)
    pp.add_argument("--fsr-MHz", type=float, default=501.0)
    pp.add_argument("--linewidth-MHz", type=float, default=8.4)
    pp.add_argument("--leak-fraction", type=float, default=1.8e-6)

    gp = sub.add_parser("g2", help="pair correlation histogram and fit")
    gp.add_argument("--mode", choices=["single", "multi"], default="multi")
    gp.add_argument("--fsr-MHz", type=float, default=501.0)
    gp.add_argument("--linewidth-MHz", type=float, default=8.4)
    gp.add_argument("--tbin-ns", type=float, default=1.0)
    gp.add_argument("--t0-ns", type=float, default=0.0)
    gp.add_argument("--r1", type=float, default=0.0, help="singles rate 1 (Hz)")
    gp.add_argument("--r2", type=float, default=0.0, help="singles rate 2 (Hz)")
    gp.add_argument("--bins", type=int, default=240)

    rp = sub.add_parser("reconstruct", help="biphoton amplitude/phase reconstruction")
    rp.add_argument("--records", default=None, help="JSON bundle of measured records")
    rp.add_argument("--bandwidth-MHz", type=float, default=8.1)
    rp.add_argument("--pair-phase-rad", type=float, default=0.35)
    rp.add_argument("--alpha", type=float, default=1.4142135623730951)
    rp.add_argument("--n-phases", type=int, default=12)
    rp.add_argument("--exposure", type=float, default=7.0)
    rp.add_argument("--noise", action="store_true")
    rp.add_argument("--no-noise", dest="noise", action="store_false")
    rp.set_defaults(noise=True)

    np_ = sub.add_parser("noon-scan", help="pair-probe Faraday sensing scan")
    np_.add_argument("--b-max-mT", type=float, default=50.0)
    np_.add_argument("--b-step-mT", type=float, default=0.5)
    np_.add_argument("--cell-temp-C", type=float, default=70.0)
    np_.add_argument("--length-mm", type=float, default=75.0)
    np_.add_argument("--detuning-GHz", type=float, default=None)
    np_.add_argument("--imbalance", type=float, default=0.15)
    np_.add_argument("--fisher-at-mT", type=float, default=None)
    np_.add_argument("--state", default=None, help="density matrix JSON")

    sc = sub.add_parser("scenario", help="run a named preset or scenario file")
    sc_sub = sc.add_subparsers(dest="scenario_command", required=True)
    sc_run = sc_sub.add_parser("run")
    sc_run.add_argument("source", help="preset name or YAML/JSON scenario file")

    return p


def _args_to_params(args) -> dict:
    if args.command == "spectrum":
        return {
            "field_mt": args.field_mT,
            "temp_k": args.temp_K,
            "length_cm": args.length_cm,
            "buffer_mhz": args.buffer_MHz,
            "half_span_ghz": args.half_span_GHz,
            "spacing_mhz": args.spacing_MHz,
        }
    if args.command == "fadof":
        return {
            "field_mt": args.field_mT,
            "temp_k": args.temp_K,
            "length_cm": args.length_cm,
            "extinction": args.extinction,
            "window_ghz": args.window_GHz,
        }
    if args.command == "purity":
        return {
            "field_mt": args.field_mT,
            "temp_k": args.temp_K,
            "fsr_mhz": args.fsr_MHz,
            "linewidth_mhz": args.linewidth_MHz,
            "leak_fraction": args.leak_fraction,
        }
    if args.command == "g2":
        return {
            "mode": args.mode,
            "fsr_mhz": args.fsr_MHz,
            "linewidth_mhz": args.linewidth_MHz,
            "tbin_ns": args.tbin_ns,
            "t0_ns": args.t0_ns,
            "rate1_hz": args.r1,
            "rate2_hz": args.r2,
            "bins": args.bins,
        }
    if args.command == "reconstruct":
        return {
            "bandwidth_mhz": args.bandwidth_MHz,
            "pair_phase_rad": args.pair_phase_rad,
            "alpha": args.alpha,
            "n_phases": args.n_phases,
            "exposure": args.exposure,
            "noise": args.noise,
        }
    if args.command == "noon-scan":
        return {
            "b_max_mt": args.b_max_mT,
            "b_step_mt": args.b_step_mT,
            "cell_temp_c": args.cell_temp_C,
            "length_mm": args.length_mm,
            "detuning_ghz": args.detuning_GHz,
            "imbalance": args.imbalance,
            "fisher_at_mt": args.fisher_at_mT,
        }
    raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        atoms = load_atom_data(args.atom_data)
        if args.command == "scenario":
            cfg = load_scenario_config(args.source)
            report = run_scenario(cfg, atoms, args.out_dir, args.seed, args.format)
        else:
            params = _args_to_params(args)
            sink = OutputSink(Path(args.out_dir))
            kwargs = {}
            if args.command == "reconstruct" and args.records:
                kwargs["records_file"] = args.records
            if args.command == "noon-scan" and args.state:
                kwargs["state_file"] = args.state
            runner = RUNNERS[args.command]
            report = runner(params, atoms, sink, fmt=args.format, seed=args.seed, **kwargs)
            sink.manifest({"scenario": args.command, "seed": args.seed, "report": report})
        print(json.dumps(report, indent=2, sort_keys=True))
        return 0
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, FitFailure) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CoverageError as exc:
        print(f"coverage error: {exc}", file=sys.stderr)
        return EXIT_COVERAGE


if __name__ == "__main__":
    sys.exit(main())
