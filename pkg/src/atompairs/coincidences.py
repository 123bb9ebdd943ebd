"""Arrival-time statistics of pair photons: envelopes, comb teeth, binning.

The pair correlation of a single filtered mode decays as a double exponential
exp(-|T| (gamma1+gamma2)); the unfiltered multimode output multiplies that by
a comb at the cavity round-trip time.  A counting card with bin width t_bin
and unknown channel delay T0 smears each tooth over two bins with triangular
weights, which is what produces the sampling beat seen in raw histograms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from atompairs.errors import ConfigError, FitFailure

_LN2 = np.log(2.0)


@dataclass(frozen=True)
class G2Envelope:
    """Double-exponential envelope parameters, decay rates in s^-1."""

    gamma1: float
    gamma2: float

    def __post_init__(self):
        if self.gamma1 + self.gamma2 <= 0:
            raise ConfigError("gamma1 + gamma2 must be > 0")

    @property
    def gamma_sum(self) -> float:
        return self.gamma1 + self.gamma2

    @property
    def fwhm_s(self) -> float:
        return 2.0 * _LN2 / self.gamma_sum

    @classmethod
    def from_linewidth(cls, linewidth_hz: float, output_fraction: float = 0.8):
        gs = 2.0 * np.pi * linewidth_hz
        return cls(gamma1=output_fraction * gs, gamma2=(1.0 - output_fraction) * gs)


@dataclass(frozen=True)
class DetectionModel:
    """Counting electronics and background description."""

    t_bin_s: float
    t0_s: float = 0.0  # signal/idler channel delay
    rate1_hz: float = 0.0  # singles rate, detector 1
    rate2_hz: float = 0.0
    round_trip_s: float = 1.996e-9
    n_modes: int = 200

    def __post_init__(self):
        if self.t_bin_s <= 0:
            raise ConfigError("bin width must be > 0")
        if self.rate1_hz < 0 or self.rate2_hz < 0:
            raise ConfigError("singles rates must be >= 0")

    @property
    def accidental_rate(self) -> float:
        """Flat coincidence floor t_bin * R1 * R2 (per bin, per second)."""
        return self.t_bin_s * self.rate1_hz * self.rate2_hz


def g2_single(delay_s, envelope: G2Envelope):
    """Normalized single-mode pair correlation exp(-|T| (g1+g2))."""
    return np.exp(-np.abs(np.asarray(delay_s, dtype=float)) * envelope.gamma_sum)


def comb_kernel(delay_s, round_trip_s: float, n_modes: int):
    """Exact sin^2 ratio kernel of an N-mode comb, normalized to peak 1."""
    m = 2 * n_modes + 1
    x = np.pi * np.asarray(delay_s, dtype=float) / round_trip_s
    num = np.sin(m * x) ** 2
    den = m * np.sin(x) ** 2
    out = np.where(np.abs(np.sin(x)) < 1e-12, m, num / np.where(den == 0, 1.0, den))
    return out / m


def g2_multi_weights(envelope: G2Envelope, det: DetectionModel, weight_cut: float = 1e-6):
    """Delta-comb teeth (delay, weight): weight = envelope at n * round-trip.

    Valid when the mode count is large (>= 50); for smaller combs evaluate
    ``comb_kernel`` directly.
    """
    tau = det.round_trip_s
    n_max = int(np.ceil(-np.log(weight_cut) / (envelope.gamma_sum * tau)))
    n = np.arange(-n_max, n_max + 1)
    delays = n * tau
    weights = g2_single(delays, envelope)
    keep = weights >= weight_cut
    return delays[keep], weights[keep]


@dataclass(frozen=True)
class CoincidenceHistogram:
    """Coincidence rate (or counts) versus bin separation index."""

    bin_index: np.ndarray
    values: np.ndarray
    t_bin_s: float
    mode: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(self.values < 0):
            raise ValueError("histogram entries must be nonnegative")

    @property
    def delays_s(self) -> np.ndarray:
        return self.bin_index * self.t_bin_s


def _tooth_bin_weights(position_bins, bins):
    """Triangular overlap of a comb tooth with each bin.

    ``position_bins`` is the tooth centre in units of t_bin relative to bin 0;
    the uniform average over the signal arrival time inside its own bin turns
    the tooth into a tent of full width 2 t_bin.  Weights over all bins sum
    to exactly 1 for every tooth.
    """
    pos = np.asarray(position_bins, dtype=float)[:, None]
    idx = np.asarray(bins, dtype=float)[None, :]
    return np.clip(1.0 - np.abs(pos - idx), 0.0, 1.0)


def _smooth_bin_average(envelope, offset_bins, bins, t_bin):
    """Tent-weighted bin values of the smooth envelope (exact closed form).

    For bin i the detector averages exp(-gamma |u|) against a unit-area tent
    of full width two bins centred at u = i - offset (all in bin units).
    The integral is done piecewise on intervals where both |u| and |u - c|
    keep a fixed sign.
    """
    g = envelope.gamma_sum * t_bin  # decay per bin unit

    def integral(a, b, q, alpha, beta):
        # int_a^b exp(-q u) (alpha + beta u) du, exact
        if q == 0.0:
            return alpha * (b - a) + beta * (b * b - a * a) / 2.0
        ea, eb = np.exp(-q * a), np.exp(-q * b)
        i0 = (ea - eb) / q
        i1 = (a * ea - b * eb) / q + i0 / q
        return alpha * i0 + beta * i1

    out = np.empty(len(bins))
    for j, i in enumerate(np.asarray(bins, dtype=float)):
        c = i - float(offset_bins)  # tent apex
        cuts = sorted({c - 1.0, c, c + 1.0, min(max(0.0, c - 1.0), c + 1.0)})
        total = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            if b <= a:
                continue
            mid = 0.5 * (a + b)
            s_tent = 1.0 if mid > c else -1.0  # sign of (u - c)
            s_u = 1.0 if mid >= 0 else -1.0  # sign of u
            # weight = 1 - s_tent (u - c); envelope = exp(-g s_u u)
            total += integral(a, b, g * s_u, 1.0 + s_tent * c, -s_tent)
        out[j] = total
    return out


def binned_histogram(
    envelope: G2Envelope,
    det: DetectionModel,
    mode: str,
    bins,
    pair_scale: float = 1.0,
) -> CoincidenceHistogram:
    """Expected coincidence rate per bin separation.

    ``mode`` selects the delta-comb multimode model or the smooth single-mode
    envelope; both include the accidental floor t_bin R1 R2.  ``pair_scale``
    sets the (arbitrary) pair-rate normalization.
    """
    if mode not in ("single", "multi"):
        raise ConfigError("mode must be 'single' or 'multi'")
    bins = np.asarray(bins, dtype=int)

    # T0 = k t_bin + delta: the integer part shifts bin indices exactly,
    # the remainder sets where the sampling beat has maximum visibility.
    k0 = int(np.floor(det.t0_s / det.t_bin_s + 0.5))
    delta = det.t0_s - k0 * det.t_bin_s

    if mode == "multi":
        delays, weights = g2_multi_weights(envelope, det)
        pos = (delta + delays) / det.t_bin_s  # tooth centres in bin units, rel. bin k0
        tents = _tooth_bin_weights(pos, bins - k0)
        signal = weights @ tents
    else:
        signal = _smooth_bin_average(envelope, delta / det.t_bin_s, bins - k0, det.t_bin_s)

    values = pair_scale * signal + det.accidental_rate
    return CoincidenceHistogram(
        bin_index=bins,
        values=values,
        t_bin_s=det.t_bin_s,
        mode=mode,
        meta={
            "gamma_sum": envelope.gamma_sum,
            "t0_s": det.t0_s,
            "round_trip_s": det.round_trip_s,
            "pair_scale": pair_scale,
        },
    )


def simulate_histogram(
    envelope: G2Envelope,
    det: DetectionModel,
    mode: str,
    bins,
    n_pairs: int,
    duration_s: float = 1.0,
    seed: int = 0,
) -> CoincidenceHistogram:
    """Monte-Carlo histogram: pair delays drawn from the comb/envelope model,
    accidentals as a Poisson floor.  Deterministic for a fixed seed."""
    if mode not in ("single", "multi"):
        raise ConfigError("mode must be 'single' or 'multi'")
    rng = np.random.default_rng(seed)
    bins = np.asarray(bins, dtype=int)

    # delays relative to T0; Laplace is the double exponential
    scale = 1.0 / envelope.gamma_sum
    if mode == "single":
        delays = rng.laplace(0.0, scale, size=n_pairs)
    else:
        tau = det.round_trip_s
        d, w = g2_multi_weights(envelope, det)
        teeth = rng.choice(d.size, size=n_pairs, p=w / w.sum())
        delays = d[teeth]
    # uniform signal arrival phase inside its own bin
    jitter = rng.uniform(0.0, det.t_bin_s, size=n_pairs)
    idx = np.floor((delays + det.t0_s + jitter) / det.t_bin_s).astype(int)

    lo, hi = bins.min(), bins.max()
    counts = np.bincount(
        np.clip(idx, lo, hi) - lo, weights=(idx >= lo) & (idx <= hi), minlength=hi - lo + 1
    )
    acc = rng.poisson(det.accidental_rate * duration_s, size=bins.size)
    return CoincidenceHistogram(
        bin_index=bins,
        values=counts + acc,
        t_bin_s=det.t_bin_s,
        mode=mode,
        meta={"n_pairs": n_pairs, "seed": seed, "duration_s": duration_s},
    )


def export_events(path, histogram_or_events, seed: int = 0):
    """Write a raw event stream: little-endian (u64 timestamp, u8 channel).

    Timestamps are in t_bin units.  For a histogram input, synthetic signal
    (channel 0) and idler (channel 1) events consistent with the histogram
    are generated deterministically."""
    import struct

    events = []
    if isinstance(histogram_or_events, CoincidenceHistogram):
        h = histogram_or_events
        rng = np.random.default_rng(seed)
        t_clock = 0
        for i, n in zip(h.bin_index, np.round(h.values).astype(int)):
            for _ in range(int(n)):
                t_clock += int(rng.integers(10, 1000))
                events.append((t_clock, 0))
                events.append((t_clock + int(i), 1))
    else:
        events = list(histogram_or_events)
    events.sort()
    with open(path, "wb") as fh:
        for t, ch in events:
            fh.write(struct.pack("<QB", t, ch))
    return len(events)


@dataclass(frozen=True)
class EnvelopeFit:
    gamma_sum: float
    t0_s: float
    floor: float
    amplitude: float
    fwhm_s: float


def fit_envelope(hist: CoincidenceHistogram) -> EnvelopeFit:
    """Least-squares fit of floor + A exp(-|t - T0| gamma) to a histogram.

    Initialization is deterministic: the peak bin seeds T0, the half-max
    crossing seeds gamma.  Parameters are bounded and the solver iteration
    count capped, so fits behave identically run to run.
    """
    t = hist.delays_s.astype(float)
    y = hist.values.astype(float)
    floor0 = float(np.median(y))
    peak = float(y.max())
    # noise scale from the sub-median bins: for Poisson counts this is the
    # usual sqrt(rate), for noiseless rate tables it collapses to ~0
    floor_bins = y[y <= floor0]
    sigma = float(np.std(floor_bins)) if floor_bins.size > 1 else 0.0
    if peak <= floor0 + 3.0 * sigma:
        raise FitFailure("no peak at least 3 sigma above the floor")

    i_peak = int(np.argmax(y))
    t0_seed = t[i_peak]
    half = floor0 + (peak - floor0) / 2.0
    above = np.where(y > half)[0]
    half_width = max((t[above[-1]] - t[above[0]]) / 2.0, hist.t_bin_s)
    gamma_seed = 2.0 * _LN2 / (2.0 * half_width)

    span = t[-1] - t[0]
    if span < 3.0 * (2.0 * _LN2 / gamma_seed):
        raise FitFailure("histogram span below three fitted widths")

    def model(p):
        gamma, t0, floor, amp = p
        return floor + amp * np.exp(-np.abs(t - t0) * gamma)

    p0 = np.array([gamma_seed, t0_seed, floor0, peak - floor0])
    lower = [gamma_seed / 100.0, t[0], 0.0, 0.0]
    upper = [gamma_seed * 100.0, t[-1], peak, 2.0 * peak]
    res = least_squares(
        lambda p: model(p) - y, p0, bounds=(lower, upper), max_nfev=200
    )
    gamma, t0, floor, amp = res.x
    return EnvelopeFit(
        gamma_sum=float(gamma),
        t0_s=float(t0),
        floor=float(floor),
        amplitude=float(amp),
        fwhm_s=2.0 * _LN2 / float(gamma),
    )
