"""Warm-vapor optics: number density, complex refractive index, cell transfer.

The chain is: transition lines (atoms.py) -> per-polarization susceptibility
chi_q(nu) as a sum of complex Voigt profiles -> n_q = sqrt(1 + chi_q) ->
diagonal circular-basis Jones factors exp[i 2 pi nu (n_q - 1) dz / c]
composed along the beam path with a position-dependent axial field.

Pointwise evaluation at arbitrary frequencies is exact (no sampling), while
the uniform-grid operations enforce a resolution precondition so exported
spectra cannot silently under-resolve a line.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.constants import epsilon_0, hbar, k as K_B

from atompairs.atoms import AtomLibrary, TransitionLine, all_lines_for_cell
from atompairs.errors import ConfigError, CoverageError, ResolutionError
from atompairs.faddeeva import voigt_profile_complex

_LN2 = np.log(2.0)


@dataclass(frozen=True)
class VaporCellConfig:
    """Geometry, temperature and composition of one vapor cell."""

    length_m: float
    temperature_k: float
    isotope_fractions: Mapping[str, float]
    buffer_fwhm_hz: float = 0.0
    field_profile: str = "uniform"  # or "quadratic"
    droop_fraction: float = 0.0  # center-to-face fractional drop of B(z)

    def __post_init__(self):
        if self.length_m <= 0:
            raise ConfigError("cell length must be > 0")
        if self.temperature_k <= 0:
            raise ConfigError("cell temperature must be > 0")
        total = sum(self.isotope_fractions.values())
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"isotope fractions sum to {total!r}, expected 1")
        if any(f < 0 for f in self.isotope_fractions.values()):
            raise ConfigError("isotope fractions must be >= 0")
        if self.buffer_fwhm_hz < 0:
            raise ConfigError("buffer broadening must be >= 0")
        if self.field_profile not in ("uniform", "quadratic"):
            raise ConfigError("field_profile must be 'uniform' or 'quadratic'")
        if not 0.0 <= self.droop_fraction < 0.5:
            raise ConfigError("droop_fraction must lie in [0, 0.5)")

    def field_at(self, z_m, b_center_t: float):
        """Axial field at position z in [0, L]."""
        if self.field_profile == "uniform" or self.droop_fraction == 0.0:
            return b_center_t * np.ones_like(np.asarray(z_m, dtype=float))
        x = 2.0 * np.asarray(z_m, dtype=float) / self.length_m - 1.0
        return b_center_t * (1.0 - self.droop_fraction * x**2)


def number_density(temperature_k: float, atoms: AtomLibrary) -> float:
    """Total Rb number density in m^-3 from the configured vapor pressure."""
    if not 250.0 < temperature_k < 450.0:
        raise ConfigError(
            f"temperature {temperature_k} K outside the validated range (250, 450) K"
        )
    p = atoms.vapor_pressure.pressure_pa(temperature_k)
    return p / (K_B * temperature_k)


@dataclass(frozen=True)
class ComplexIndexSpectrum:
    """n+ and n- on a uniform frequency grid."""

    grid_hz: np.ndarray
    n_plus: np.ndarray
    n_minus: np.ndarray

    def __post_init__(self):
        for n in (self.n_plus, self.n_minus):
            if np.any(n.imag < -1e-12):
                raise ValueError("passive medium requires Im n >= 0")


def _doppler_sigma_hz(nu0_hz, mass_kg, temperature_k):
    """1/e half width nu0 * u / c with u = sqrt(2 kB T / m)."""
    u = np.sqrt(2.0 * K_B * temperature_k / mass_kg)
    return nu0_hz * u / C_LIGHT


@dataclass
class _LineArrays:
    nu0: np.ndarray
    amp: np.ndarray  # N * pop * d^2 / (eps0 hbar), angular-frequency units
    sigma_hz: np.ndarray
    lorentz_fwhm_hz: np.ndarray

    @classmethod
    def from_lines(cls, lines, cell: VaporCellConfig, density_m3: float):
        nu0 = np.array([ln.frequency_hz for ln in lines])
        frac = np.array([cell.isotope_fractions.get(ln.isotope, 0.0) for ln in lines])
        pop = np.array([ln.population for ln in lines])
        d_sq = np.array([ln.dipole_sq for ln in lines])
        mass = np.array([ln.mass_kg for ln in lines])
        nat = np.array([ln.natural_fwhm_hz for ln in lines])
        amp = density_m3 * frac * pop * d_sq / (epsilon_0 * hbar)
        sigma = _doppler_sigma_hz(nu0, mass, cell.temperature_k)
        return cls(
            nu0=nu0,
            amp=amp,
            sigma_hz=sigma,
            lorentz_fwhm_hz=nat + cell.buffer_fwhm_hz,
        )

    def susceptibility(self, nu_hz: np.ndarray) -> np.ndarray:
        """chi(nu), vectorized over lines x frequencies."""
        nu = np.asarray(nu_hz, dtype=float)
        delta = nu[None, :] - self.nu0[:, None]
        prof = voigt_profile_complex(
            delta, self.lorentz_fwhm_hz[:, None], self.sigma_hz[:, None]
        )
        return 1j * np.sum(self.amp[:, None] * prof, axis=0)

    def min_feature_width_hz(self) -> float:
        doppler_fwhm = 2.0 * np.sqrt(_LN2) * self.sigma_hz
        return float(min(self.lorentz_fwhm_hz.min(), doppler_fwhm.min()))


class VaporPath:
    """Pointwise-exact optical response of a cell at center field ``b_center_t``.

    The path is split into ``slices`` segments with the local axial field;
    diagonal circular Jones factors multiply in order.  Lines are rebuilt per
    distinct slice field (a quadratic droop has mirror-symmetric slices, so
    only about half the diagonalizations are distinct).
    """

    def __init__(
        self,
        atoms: AtomLibrary,
        cell: VaporCellConfig,
        b_center_t: float,
        slices: int = 16,
    ):
        if slices < 1:
            raise ConfigError("slices must be >= 1")
        if b_center_t < 0:
            raise ConfigError("field strength must be >= 0")
        self.atoms = atoms
        self.cell = cell
        self.b_center_t = b_center_t
        self.slices = (
            1 if (cell.field_profile == "uniform" or cell.droop_fraction == 0.0) else slices
        )
        self.density_m3 = number_density(cell.temperature_k, atoms)
        self._slice_cache: dict[float, dict[str, _LineArrays]] = {}

        # two-point Gauss nodes per slice: the phase integral along z then
        # converges fast enough that 16 vs 32 slices agree to < 1e-6
        dz = cell.length_m / self.slices
        starts = np.arange(self.slices) * dz
        offset = 0.5 * dz / np.sqrt(3.0)
        nodes = np.concatenate([starts + 0.5 * dz - offset, starts + 0.5 * dz + offset])
        self._slice_fields = cell.field_at(np.sort(nodes), b_center_t)
        self._dz = cell.length_m / self._slice_fields.size

    def _arrays_for_field(self, b_t: float) -> dict[str, _LineArrays]:
        key = round(float(b_t), 15)
        if key not in self._slice_cache:
            lines = all_lines_for_cell(
                self.atoms, self.cell.isotope_fractions, float(b_t)
            )
            self._slice_cache[key] = {
                pol: _LineArrays.from_lines(lns, self.cell, self.density_m3)
                for pol, lns in lines.items()
            }
        return self._slice_cache[key]

    def index_at(self, nu_hz, b_t: float):
        """(n+, n-) at arbitrary frequencies for a uniform field ``b_t``."""
        arrays = self._arrays_for_field(b_t)
        nu = np.atleast_1d(np.asarray(nu_hz, dtype=float))
        n_plus = np.sqrt(1.0 + arrays["sigma+"].susceptibility(nu))
        n_minus = np.sqrt(1.0 + arrays["sigma-"].susceptibility(nu))
        return n_plus, n_minus

    def transfer_at(self, nu_hz):
        """Circular-basis diagonal transfer (t+, t-) with the field profile.

        The common vacuum phase exp(i 2 pi nu L / c) is dropped; only the
        differential phase and the attenuation are physical here.
        """
        nu = np.atleast_1d(np.asarray(nu_hz, dtype=float))
        log_t_plus = np.zeros(nu.shape, dtype=complex)
        log_t_minus = np.zeros(nu.shape, dtype=complex)
        k_vac = 2j * np.pi * nu / C_LIGHT
        for b_slice in self._slice_fields:
            n_plus, n_minus = self.index_at(nu, b_slice)
            log_t_plus += k_vac * (n_plus - 1.0) * self._dz
            log_t_minus += k_vac * (n_minus - 1.0) * self._dz
        return np.exp(log_t_plus), np.exp(log_t_minus)

    def rotation_angle_at(self, nu_hz):
        """Faraday rotation angle theta(nu) accumulated along the path."""
        t_plus, t_minus = self.transfer_at(nu_hz)
        # Differential phase is accumulated slice by slice, so read it off the
        # product; unwrap relative to the log sum to keep multi-pi rotations.
        nu = np.atleast_1d(np.asarray(nu_hz, dtype=float))
        theta = np.zeros(nu.shape)
        for b_slice in self._slice_fields:
            n_plus, n_minus = self.index_at(nu, b_slice)
            theta += (
                np.pi * nu * self._dz * (n_plus.real - n_minus.real) / C_LIGHT
            )
        return theta

    def min_feature_width_hz(self) -> float:
        widths = [
            arr.min_feature_width_hz()
            for arrays in (self._arrays_for_field(b) for b in self._slice_fields)
            for arr in arrays.values()
        ]
        return min(widths)


def _check_resolution(grid_hz: np.ndarray, min_width_hz: float):
    grid = np.asarray(grid_hz, dtype=float)
    if grid.size < 2:
        return
    spacing = np.diff(grid)
    if np.any(spacing <= 0):
        raise ConfigError("frequency grid must be strictly increasing")
    required = min_width_hz / 10.0
    worst = spacing.max()
    if worst > required * (1 + 1e-9):
        raise ResolutionError(worst, required)


def complex_index(
    lines: list[TransitionLine],
    cell: VaporCellConfig,
    grid_hz: np.ndarray,
    atoms: AtomLibrary,
) -> ComplexIndexSpectrum:
    """Uniform-grid (n+, n-) from explicit line lists (both polarizations mixed).

    ``lines`` must contain sigma+ and sigma- entries; grid spacing must be at
    most one tenth of the narrowest of (Lorentzian width, Doppler width).
    """
    if not lines:
        raise ConfigError("no transition lines supplied")
    density = number_density(cell.temperature_k, atoms)
    by_pol = {
        pol: [ln for ln in lines if ln.polarization == pol]
        for pol in ("sigma+", "sigma-")
    }
    if not by_pol["sigma+"] or not by_pol["sigma-"]:
        raise ConfigError("need lines for both sigma+ and sigma- polarizations")
    arrays = {
        pol: _LineArrays.from_lines(lns, cell, density) for pol, lns in by_pol.items()
    }
    min_width = min(arr.min_feature_width_hz() for arr in arrays.values())
    _check_resolution(grid_hz, min_width)
    grid = np.asarray(grid_hz, dtype=float)
    return ComplexIndexSpectrum(
        grid_hz=grid,
        n_plus=np.sqrt(1.0 + arrays["sigma+"].susceptibility(grid)),
        n_minus=np.sqrt(1.0 + arrays["sigma-"].susceptibility(grid)),
    )


@dataclass(frozen=True)
class CellTransfer:
    """Diagonal circular-basis Jones transfer on a frequency grid."""

    grid_hz: np.ndarray
    t_plus: np.ndarray
    t_minus: np.ndarray

    def __post_init__(self):
        # singular values of diag(t+, t-) are |t+|, |t-|
        worst = max(np.abs(self.t_plus).max(), np.abs(self.t_minus).max())
        if worst > 1.0 + 1e-12:
            raise ValueError(f"cell transfer has gain ({worst - 1.0:.3g} above unity)")

    def rotation_angle(self) -> np.ndarray:
        """Relative phase / 2 between the circular components (mod pi)."""
        return 0.5 * np.angle(self.t_plus / self.t_minus)

    def jones_hv(self, index: int) -> np.ndarray:
        """2x2 Jones matrix in the H/V basis at one grid point."""
        v = np.array([[1.0, 1.0], [1j, -1j]]) / np.sqrt(2.0)  # columns sigma+/-
        d = np.diag([self.t_plus[index], self.t_minus[index]])
        return v @ d @ v.conj().T


def cell_transfer(
    index_source: Callable[[float], ComplexIndexSpectrum],
    cell: VaporCellConfig,
    b_center_t: float,
    slices: int = 16,
) -> CellTransfer:
    """Compose per-slice transfers from an index source ``b -> spectrum``.

    With ``slices=1`` and a uniform profile this reduces to the closed-form
    single-segment exponential.
    """
    if slices < 1:
        raise ConfigError("slices must be >= 1")
    if cell.field_profile == "uniform" or cell.droop_fraction == 0.0:
        slices = 1
    dz_slice = cell.length_m / slices
    starts = np.arange(slices) * dz_slice
    offset = 0.5 * dz_slice / np.sqrt(3.0)
    nodes = np.sort(np.concatenate([starts + 0.5 * dz_slice - offset, starts + 0.5 * dz_slice + offset]))
    fields = cell.field_at(nodes, b_center_t)
    dz = cell.length_m / fields.size

    grid = None
    log_tp = log_tm = None
    for b_slice in fields:
        spec = index_source(float(b_slice))
        if grid is None:
            grid = spec.grid_hz
            log_tp = np.zeros(grid.shape, dtype=complex)
            log_tm = np.zeros(grid.shape, dtype=complex)
        elif spec.grid_hz.shape != grid.shape or not np.array_equal(spec.grid_hz, grid):
            raise CoverageError("index source returned mismatched grids across slices")
        k_vac = 2j * np.pi * grid / C_LIGHT
        log_tp += k_vac * (spec.n_plus - 1.0) * dz
        log_tm += k_vac * (spec.n_minus - 1.0) * dz
    return CellTransfer(grid_hz=grid, t_plus=np.exp(log_tp), t_minus=np.exp(log_tm))


@dataclass(frozen=True)
class ScalarTransmission:
    """Polarization-independent intensity transmission with exact evaluation."""

    grid_hz: np.ndarray
    values: np.ndarray
    fn: Callable[[np.ndarray], np.ndarray] | None = None

    def __call__(self, nu_hz):
        nu = np.atleast_1d(np.asarray(nu_hz, dtype=float))
        if self.fn is not None:
            return self.fn(nu)
        if nu.min() < self.grid_hz[0] or nu.max() > self.grid_hz[-1]:
            raise CoverageError("requested frequency outside the computed grid")
        return np.interp(nu, self.grid_hz, self.values)


def blocking_cell_transmission(
    cell: VaporCellConfig,
    grid_hz: np.ndarray,
    atoms: AtomLibrary,
) -> ScalarTransmission:
    """Zero-field scalar attenuation of a (typically hot, buffered) cell."""
    path = VaporPath(atoms, cell, b_center_t=0.0, slices=1)
    _check_resolution(grid_hz, path.min_feature_width_hz())

    def fn(nu):
        t_plus, _ = path.transfer_at(nu)
        return np.abs(t_plus) ** 2

    grid = np.asarray(grid_hz, dtype=float)
    return ScalarTransmission(grid_hz=grid, values=fn(grid), fn=fn)


def make_frequency_grid(
    center_hz: float, half_span_hz: float = 8e9, spacing_hz: float = 0.5e6
) -> np.ndarray:
    """Uniform grid center +- half_span; default resolves the natural width."""
    n = int(round(half_span_hz / spacing_hz))
    return center_hz + spacing_hz * np.arange(-n, n + 1)
