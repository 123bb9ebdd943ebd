"""Sub-threshold OPO output as a comb of Lorentzian pair modes.

Energy conservation pairs the mode at +k FSR with the one at -k FSR around
the degenerate frequency; a filter therefore rejects a pair if it blocks
either member.  Absolute pair rates are an arbitrary normalization, so all
outputs are ratios or weights relative to the envelope peak.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from atompairs.errors import ConfigError, CoverageError

_LN2 = np.log(2.0)


@dataclass(frozen=True)
class CavityConfig:
    """Cavity and phase-matching parameters of one CESPDC source."""

    fsr_hz: float
    linewidth_hz: float  # per-mode FWHM kappa
    degenerate_hz: float
    envelope_fwhm_hz: float = 150e9
    envelope: str = "gaussian"  # or "sinc2"
    mode_count: int | None = None  # modes each side; None -> auto from tail cut
    output_coupling_fraction: float = 0.8  # gamma1 / (gamma1 + gamma2)

    def __post_init__(self):
        if self.fsr_hz <= 0 or self.linewidth_hz <= 0 or self.envelope_fwhm_hz <= 0:
            raise ConfigError("FSR, linewidth and envelope width must be > 0")
        if self.linewidth_hz >= self.fsr_hz / 10:
            raise ConfigError("cavity linewidth must be well below the FSR")
        if self.envelope not in ("gaussian", "sinc2"):
            raise ConfigError("envelope must be 'gaussian' or 'sinc2'")
        if not 0.0 < self.output_coupling_fraction < 1.0:
            raise ConfigError("output coupling fraction must lie in (0, 1)")
        if self.mode_count is not None and self.mode_count < 0:
            raise ConfigError("mode_count must be >= 0")

    @property
    def round_trip_s(self) -> float:
        return 1.0 / self.fsr_hz

    @property
    def gamma_sum(self) -> float:
        """gamma1 + gamma2 in s^-1, fixed by the linewidth."""
        return 2.0 * np.pi * self.linewidth_hz

    @property
    def gamma1(self) -> float:
        return self.output_coupling_fraction * self.gamma_sum

    @property
    def gamma2(self) -> float:
        return (1.0 - self.output_coupling_fraction) * self.gamma_sum


def _envelope_weight(cfg: CavityConfig, offset_hz):
    x = np.asarray(offset_hz, dtype=float) / cfg.envelope_fwhm_hz
    if cfg.envelope == "gaussian":
        return np.exp(-4.0 * _LN2 * x**2)
    # sinc^2 with matching FWHM: sinc(pi a x)^2 = 1/2 at a*x = 0.4429...
    a = 2.0 * 0.442946470689452340308369
    arg = np.pi * a * x
    out = np.ones_like(x)
    nz = arg != 0
    out[nz] = (np.sin(arg[nz]) / arg[nz]) ** 2
    return out


@dataclass(frozen=True)
class PairSpectralDensity:
    """Comb of pair modes: index k, centre frequency, weight, linewidth."""

    k: np.ndarray
    frequency_hz: np.ndarray
    weight: np.ndarray
    linewidth_hz: float
    config: CavityConfig

    @property
    def degenerate_index(self) -> int:
        return int(np.where(self.k == 0)[0][0])


def mode_comb(cfg: CavityConfig, tail_cut: float = 1e-4) -> PairSpectralDensity:
    """Modes at nu0 + k FSR weighted by the phase-matching envelope.

    If ``cfg.mode_count`` is given but leaves more than ``tail_cut`` of the
    envelope outside the comb, a coverage warning is emitted.
    """
    if cfg.mode_count is None:
        n = 0
        while _envelope_weight(cfg, (n + 1) * cfg.fsr_hz) >= tail_cut:
            n += 1
        n += 1  # first mode below the cut closes the comb
    else:
        n = cfg.mode_count
        if _envelope_weight(cfg, (n + 1) * cfg.fsr_hz) >= tail_cut:
            warnings.warn(
                f"comb truncated at +-{n} modes but the envelope tail is still "
                f">= {tail_cut:g} of the peak there",
                stacklevel=2,
            )
    k = np.arange(-n, n + 1)
    freq = cfg.degenerate_hz + k * cfg.fsr_hz
    weight = _envelope_weight(cfg, k * cfg.fsr_hz)
    return PairSpectralDensity(
        k=k, frequency_hz=freq, weight=weight, linewidth_hz=cfg.linewidth_hz, config=cfg
    )


@dataclass(frozen=True)
class FilteredPairs:
    """Per-mode pass probabilities of a comb behind a filter."""

    comb: PairSpectralDensity
    mode_transmission: np.ndarray  # Lorentzian-averaged filter transmission
    pair_weight: np.ndarray  # w_k * Tbar(nu_k) * Tbar(nu_-k)
    singles_weight: np.ndarray  # w_k * Tbar(nu_k)

    @property
    def total_pairs(self) -> float:
        return float(self.pair_weight.sum())

    @property
    def total_singles(self) -> float:
        return float(self.singles_weight.sum())

    def degenerate_pair_fraction(self) -> float:
        return float(self.pair_weight[self.comb.degenerate_index] / self.total_pairs)


def _lorentzian_average(transmission, centers_hz, fwhm_hz, points=11, half_range=3.0):
    """Filter transmission averaged over each mode's Lorentzian profile.

    Gauss-Legendre quadrature on +-``half_range`` FWHM, weighted by the
    truncated Lorentzian density (renormalized on the window).
    """
    nodes, weights = np.polynomial.legendre.leggauss(points)
    half = half_range * fwhm_hz
    offsets = nodes * half  # (points,)
    lor = 1.0 / (1.0 + (2.0 * offsets / fwhm_hz) ** 2)
    dens = weights * lor
    dens = dens / dens.sum()
    nus = np.asarray(centers_hz, dtype=float)[:, None] + offsets[None, :]
    t = transmission(nus.ravel()).reshape(nus.shape)
    return t @ dens


def filtered_pair_rate(
    comb: PairSpectralDensity,
    filter_spectrum,
    quad_points: int = 11,
) -> FilteredPairs:
    """Pair and singles pass weights for every comb mode behind a filter.

    ``filter_spectrum`` is any callable nu -> T; a FilterSpectrum without an
    exact evaluator raises CoverageError when modes fall outside its grid.
    """
    tbar = _lorentzian_average(
        filter_spectrum, comb.frequency_hz, comb.linewidth_hz, points=quad_points
    )
    tbar = np.clip(tbar, 0.0, 1.0)
    # mode -k sits at index n - (k + n) mirrored around the centre
    t_mirror = tbar[::-1]
    pair = comb.weight * tbar * t_mirror
    singles = comb.weight * tbar
    return FilteredPairs(
        comb=comb, mode_transmission=tbar, pair_weight=pair, singles_weight=singles
    )


@dataclass(frozen=True)
class PurityReport:
    spectral_purity: float
    degenerate_fraction: float
    degenerate_share_in_band: float
    filtered_pairs: float  # c_F
    blocked_pairs: float  # c_HC
    in_band_modes: int


def spectral_purity(
    passed: FilteredPairs,
    leak_fraction: float,
    blocking_transmission,
) -> PurityReport:
    """Purity P_S = 1 - c_HC / c_F of a filtered comb.

    ``leak_fraction`` is the broadband polarization-optics bypass: that
    fraction of every mode's pair flux reaches the detectors unfiltered.
    ``blocking_transmission`` is the hot-cell intensity transmission nu -> T;
    the hot cell sits in one of the two detection paths, so a surviving
    coincidence needs only the photon in that path to clear it (the partner
    path is open).
    """
    if not 0.0 <= leak_fraction < 1.0:
        raise ConfigError("leak fraction must lie in [0, 1)")
    comb = passed.comb
    pair_pass = passed.pair_weight + leak_fraction * comb.weight
    c_f = float(pair_pass.sum())
    if c_f <= 0.0:
        raise ConfigError("no pairs pass the filter; purity undefined")

    h = np.clip(np.asarray(blocking_transmission(comb.frequency_hz), dtype=float), 0.0, 1.0)
    h_mirror = h[::-1]
    c_hc = float((pair_pass * 0.5 * (h + h_mirror)).sum())
    p_s = 1.0 - c_hc / c_f

    in_band = h < 0.5
    in_band_pairs = pair_pass[in_band]
    if in_band_pairs.sum() <= 0:
        raise ConfigError("hot cell blocks no modes; cannot define the resonant band")
    share = float(pair_pass[comb.degenerate_index] / in_band_pairs.sum())
    return PurityReport(
        spectral_purity=p_s,
        degenerate_fraction=p_s * share,
        degenerate_share_in_band=share,
        filtered_pairs=c_f,
        blocked_pairs=c_hc,
        in_band_modes=int(in_band.sum()),
    )
