"""Hyperfine + Zeeman structure of the rubidium D1 manifolds.

Builds product-basis Hamiltonians H = offset + A J.I (+ quadrupole) +
mu_B B (g_J Jz + g_I Iz), diagonalizes them per m_F block and enumerates
optical transition lines with Wigner-Eckart strengths.  Everything is in Hz
and Tesla; constants come from the shipped data file (see data/rb_d1.yaml
for sources) and can be overridden with a user file of the same schema.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping

import numpy as np
import yaml
from scipy.constants import physical_constants

from atompairs.errors import ConfigError, NumericError
from atompairs.wigner import spin_matrices, wigner_3j

MU_B_HZ_PER_T = physical_constants["Bohr magneton in Hz/T"][0]

_POLARIZATIONS = {"sigma+": 1, "pi": 0, "sigma-": -1}


@dataclass(frozen=True)
class ManifoldConstants:
    label: str
    J: float
    g_J: float
    A_hfs_hz: float
    B_hfs_hz: float = 0.0
    offset_hz: float = 0.0


@dataclass(frozen=True)
class IsotopeData:
    """Constants of one isotope; see the data file for the unit conventions."""

    name: str
    nuclear_spin: float
    abundance: float
    mass_kg: float
    g_I: float
    natural_fwhm_hz: float
    d1_frequency_hz: float
    reduced_dipole_cm: float
    manifolds: Mapping[str, ManifoldConstants]

    def __post_init__(self):
        if self.nuclear_spin <= 0 or abs(2 * self.nuclear_spin % 1) > 1e-9:
            raise ConfigError(f"{self.name}: nuclear_spin must be a positive half-integer")
        if not 0.0 <= self.abundance <= 1.0:
            raise ConfigError(f"{self.name}: abundance outside [0, 1]")
        for name in ("mass_kg", "natural_fwhm_hz", "d1_frequency_hz", "reduced_dipole_cm"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{self.name}: {name} must be strictly positive")

    def manifold(self, label: str) -> ManifoldConstants:
        try:
            return self.manifolds[label]
        except KeyError:
            raise ConfigError(
                f"{self.name}: unknown manifold {label!r}; have {sorted(self.manifolds)}"
            ) from None


@dataclass(frozen=True)
class VaporPressureModel:
    """log10(P[Torr]) = a - b/T with separate solid/liquid branches."""

    solid_a: float
    solid_b: float
    liquid_a: float
    liquid_b: float
    melting_point_k: float

    def pressure_pa(self, temperature_k: float) -> float:
        if temperature_k < self.melting_point_k:
            a, b = self.solid_a, self.solid_b
        else:
            a, b = self.liquid_a, self.liquid_b
        torr = 10.0 ** (a - b / temperature_k)
        return torr * 133.322368


@dataclass(frozen=True)
class AtomLibrary:
    isotopes: Mapping[str, IsotopeData]
    vapor_pressure: VaporPressureModel

    def __getitem__(self, name: str) -> IsotopeData:
        try:
            return self.isotopes[name]
        except KeyError:
            raise ConfigError(f"unknown isotope {name!r}; have {sorted(self.isotopes)}") from None

    def natural_fractions(self) -> dict[str, float]:
        return {name: iso.abundance for name, iso in self.isotopes.items()}

    def d1_center_hz(self, fractions: Mapping[str, float] | None = None) -> float:
        """Abundance-weighted centroid used as the frequency origin of spectra."""
        fractions = fractions or self.natural_fractions()
        total = sum(fractions.values())
        return (
            sum(self[n].d1_frequency_hz * f for n, f in fractions.items()) / total
        )


def load_atom_data(path=None) -> AtomLibrary:
    """Load isotope constants from ``path`` or from the shipped data file."""
    if path is None:
        text = resources.files("atompairs.data").joinpath("rb_d1.yaml").read_text()
    else:
        with open(path, "r") as fh:
            text = fh.read()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse atom data: {exc}") from exc

    try:
        vp = raw["vapor_pressure"]
        pressure = VaporPressureModel(
            solid_a=float(vp["solid"]["a"]),
            solid_b=float(vp["solid"]["b"]),
            liquid_a=float(vp["liquid"]["a"]),
            liquid_b=float(vp["liquid"]["b"]),
            melting_point_k=float(vp["melting_point_k"]),
        )
        isotopes = {}
        for name, iso in raw["isotopes"].items():
            manifolds = {
                label: ManifoldConstants(
                    label=label,
                    J=float(m["J"]),
                    g_J=float(m["g_J"]),
                    A_hfs_hz=float(m["A_hfs_hz"]),
                    B_hfs_hz=float(m.get("B_hfs_hz", 0.0)),
                    offset_hz=float(m.get("offset_hz", 0.0)),
                )
                for label, m in iso["manifolds"].items()
            }
            isotopes[name] = IsotopeData(
                name=name,
                nuclear_spin=float(iso["nuclear_spin"]),
                abundance=float(iso["abundance"]),
                mass_kg=float(iso["mass_kg"]),
                g_I=float(iso["g_I"]),
                natural_fwhm_hz=float(iso["natural_fwhm_hz"]),
                d1_frequency_hz=float(iso["d1_frequency_hz"]),
                reduced_dipole_cm=float(iso["reduced_dipole_cm"]),
                manifolds=manifolds,
            )
    except KeyError as exc:
        raise ConfigError(f"atom data is missing field {exc}") from exc

    total = sum(i.abundance for i in isotopes.values())
    if abs(total - 1.0) > 1e-12:
        raise ConfigError(f"isotope abundances sum to {total!r}, expected 1")
    return AtomLibrary(isotopes=isotopes, vapor_pressure=pressure)


def product_basis(J: float, I: float) -> list[tuple[float, float]]:
    """Ordered |m_J, m_I> basis: m_J ascending (outer), m_I ascending (inner)."""
    dim_j = round(2 * J + 1)
    dim_i = round(2 * I + 1)
    basis = []
    for kj in range(dim_j):
        for ki in range(dim_i):
            basis.append((-J + kj, -I + ki))
    return basis


@dataclass(frozen=True)
class ManifoldHamiltonian:
    isotope: str
    manifold: str
    J: float
    I: float
    basis: tuple[tuple[float, float], ...]
    matrix_hz: np.ndarray
    field_t: float
    constants: ManifoldConstants | None = None

    @property
    def dim(self) -> int:
        return self.matrix_hz.shape[0]

    def m_f(self) -> np.ndarray:
        return np.array([mj + mi for mj, mi in self.basis])


def build_hamiltonian(iso: IsotopeData, manifold: str, b_field_t: float) -> ManifoldHamiltonian:
    """Hyperfine + Zeeman Hamiltonian of one manifold in the |m_J, m_I> basis."""
    if b_field_t < 0:
        raise ConfigError("field strength must be >= 0")
    con = iso.manifold(manifold)
    J, I = con.J, iso.nuclear_spin
    jx, jy, jz = spin_matrices(J)
    ix, iy, iz = spin_matrices(I)
    eye_j = np.eye(round(2 * J + 1))
    eye_i = np.eye(round(2 * I + 1))

    j_dot_i = (
        np.kron(jx, ix) + np.kron(jy, iy).real + np.kron(jz, iz)
    )
    # J.I is real in this basis (jy x iy product of two imaginary matrices)
    h = con.offset_hz * np.kron(eye_j, eye_i) + con.A_hfs_hz * j_dot_i

    if con.B_hfs_hz != 0.0:
        if J <= 0.5 or I <= 0.5:
            raise ConfigError(
                f"{iso.name} {manifold}: quadrupole constant given but J or I is 1/2"
            )
        denom = 2 * I * (2 * I - 1) * J * (2 * J - 1)
        h = h + con.B_hfs_hz * (
            3 * j_dot_i @ j_dot_i + 1.5 * j_dot_i - I * (I + 1) * J * (J + 1) * np.kron(eye_j, eye_i)
        ) / denom

    h = h + MU_B_HZ_PER_T * b_field_t * (
        con.g_J * np.kron(jz, eye_i) + iso.g_I * np.kron(eye_j, iz)
    )

    herm_defect = np.abs(h - h.conj().T).max()
    if herm_defect > 1e-12 * max(1.0, np.abs(h).max()):
        raise NumericError(f"constructed Hamiltonian not Hermitian (defect {herm_defect:g})")

    return ManifoldHamiltonian(
        isotope=iso.name,
        manifold=manifold,
        J=J,
        I=I,
        basis=tuple(product_basis(J, I)),
        matrix_hz=h,
        field_t=b_field_t,
        constants=con,
    )


@dataclass(frozen=True)
class ZeemanSpectrum:
    """Eigen-decomposition of a ManifoldHamiltonian, ordered by energy."""

    hamiltonian: ManifoldHamiltonian
    energies_hz: np.ndarray
    eigenvectors: np.ndarray  # columns, |m_J m_I> components
    m_f: np.ndarray  # exact total m_F per eigenstate
    f_labels: np.ndarray  # adiabatic F quantum number at b -> 0

    @property
    def dim(self) -> int:
        return self.energies_hz.size

    @property
    def field_t(self) -> float:
        return self.hamiltonian.field_t


def _zero_field_f_energies(J: float, I: float, A: float, B: float) -> dict[float, float]:
    """Exact zero-field hyperfine energies per F (Lande interval formula)."""
    out = {}
    f = abs(J - I)
    while f <= J + I + 1e-9:
        k = f * (f + 1) - I * (I + 1) - J * (J + 1)
        e = 0.5 * A * k
        if B != 0.0:
            denom = 2 * I * (2 * I - 1) * 2 * J * (2 * J - 1)
            e += B * (1.5 * k * (k + 1) - 2 * I * (I + 1) * J * (J + 1)) / denom
        out[f] = e
        f += 1
    return out


def diagonalize(ham: ManifoldHamiltonian) -> ZeemanSpectrum:
    """Per-m_F block eigensolve; energies ascending, F labels adiabatic."""
    h = ham.matrix_hz
    defect = np.abs(h - h.conj().T).max()
    if defect > 1e-9 * max(1.0, np.abs(h).max()):
        raise NumericError(f"Hamiltonian not Hermitian within tolerance (defect {defect:g})")

    mf = ham.m_f()
    # Zero-field energies per F fix the adiabatic labelling; the sign of A
    # matters (it sets which F lies lower), the offset does not.
    a_hfs = ham.constants.A_hfs_hz if ham.constants is not None else 1.0
    b_hfs = ham.constants.B_hfs_hz if ham.constants is not None else 0.0
    con_f = _zero_field_f_energies(ham.J, ham.I, a_hfs, b_hfs)

    energies = np.empty(ham.dim)
    vectors = np.zeros((ham.dim, ham.dim), dtype=complex)
    f_labels = np.empty(ham.dim)
    m_f_out = np.empty(ham.dim)

    col = 0
    order_blocks = []
    for mf_val in sorted(set(np.round(mf * 2).astype(int) / 2)):
        idx = np.where(np.abs(mf - mf_val) < 1e-9)[0]
        block = h[np.ix_(idx, idx)]
        vals, vecs = np.linalg.eigh(block)
        # Adiabatic F labels: within a block levels do not cross, so the
        # k-th level connects to the k-th zero-field F energy of that block.
        fs = [f for f in con_f if abs(mf_val) <= f + 1e-9]
        fs_sorted = sorted(fs, key=lambda f: con_f[f])
        for k in range(idx.size):
            energies[col + k] = vals[k]
            vectors[idx, col + k] = vecs[:, k]
            f_labels[col + k] = fs_sorted[k]
            m_f_out[col + k] = mf_val
        col += idx.size

    order = np.lexsort((m_f_out, energies))
    return ZeemanSpectrum(
        hamiltonian=ham,
        energies_hz=energies[order],
        eigenvectors=vectors[:, order],
        m_f=m_f_out[order],
        f_labels=f_labels[order],
    )


@dataclass(frozen=True)
class TransitionLine:
    """One optical line between field-dressed eigenstates."""

    lower: int
    upper: int
    frequency_hz: float
    polarization: str
    strength: float  # |<e|d_q|g>|^2 in units of |<J'||d||J>|^2
    population: float  # thermal weight of the lower state
    isotope: str
    mass_kg: float
    dipole_sq: float  # |<e|d_q|g>|^2 in SI (C^2 m^2)
    natural_fwhm_hz: float


def _dipole_block(Jg: float, Je: float, I: float, q: int) -> np.ndarray:
    """<e_basis| d_q |g_basis> in units of <J'||d||J>, product bases."""
    bg = product_basis(Jg, I)
    be = product_basis(Je, I)
    out = np.zeros((len(be), len(bg)))
    for col, (mj, mi) in enumerate(bg):
        for row, (mj_e, mi_e) in enumerate(be):
            if abs(mi_e - mi) > 1e-9 or abs(mj_e - (mj + q)) > 1e-9:
                continue
            out[row, col] = (-1) ** round(Je - mj_e) * wigner_3j(
                Je, -mj_e, 1, q, Jg, mj
            )
    return out


def transition_lines(
    ground: ZeemanSpectrum,
    excited: ZeemanSpectrum,
    polarization: str,
    iso: IsotopeData,
    temperature_k: float = 300.0,
    strength_cut: float = 1e-12,
) -> list[TransitionLine]:
    """Enumerate allowed lines for one polarization at the spectra's field.

    Lower-state populations are uniform over the ground manifold (hyperfine
    splittings are far below k_B T in the 300-380 K range this targets, so
    the thermal weights differ from uniform by <0.1%); ``temperature_k`` is
    accepted for interface stability.
    """
    if polarization not in _POLARIZATIONS:
        raise ConfigError(f"polarization must be one of {sorted(_POLARIZATIONS)}")
    if abs(ground.field_t - excited.field_t) > 1e-15:
        raise ConfigError(
            "ground and excited spectra evaluated at different fields "
            f"({ground.field_t} vs {excited.field_t} T)"
        )
    if ground.hamiltonian.isotope != iso.name:
        raise ConfigError("isotope mismatch between spectra and constants")

    q = _POLARIZATIONS[polarization]
    d_block = _dipole_block(
        ground.hamiltonian.J, excited.hamiltonian.J, iso.nuclear_spin, q
    )
    # amplitudes between dressed states, units of the reduced element
    amps = excited.eigenvectors.conj().T @ d_block @ ground.eigenvectors
    strengths = np.abs(amps) ** 2

    # |<J'||d||J>|^2 consistent with Gamma = w^3 |d|^2 / (3 pi eps0 hbar c^3 (2J'+1))
    dim_g = round(2 * ground.hamiltonian.J + 1)
    reduced_sq = dim_g * iso.reduced_dipole_cm**2

    pop = 1.0 / ground.dim
    lines = []
    for g_idx in range(ground.dim):
        for e_idx in range(excited.dim):
            s = strengths[e_idx, g_idx]
            if s < strength_cut:
                continue
            lines.append(
                TransitionLine(
                    lower=g_idx,
                    upper=e_idx,
                    frequency_hz=excited.energies_hz[e_idx] - ground.energies_hz[g_idx],
                    polarization=polarization,
                    strength=float(s),
                    population=pop,
                    isotope=iso.name,
                    mass_kg=iso.mass_kg,
                    dipole_sq=float(s * reduced_sq),
                    natural_fwhm_hz=iso.natural_fwhm_hz,
                )
            )
    return lines


def all_lines_for_cell(
    atoms: AtomLibrary,
    fractions: Mapping[str, float],
    b_field_t: float,
    polarizations=("sigma+", "sigma-"),
    ground_label: str = "5S1/2",
    excited_label: str = "5P1/2",
) -> dict[str, list[TransitionLine]]:
    """Lines per polarization for every isotope with nonzero fraction."""
    out = {pol: [] for pol in polarizations}
    for name, frac in fractions.items():
        if frac <= 0:
            continue
        iso = atoms[name]
        g = diagonalize(build_hamiltonian(iso, ground_label, b_field_t))
        e = diagonalize(build_hamiltonian(iso, excited_label, b_field_t))
        for pol in polarizations:
            out[pol].extend(transition_lines(g, e, pol, iso))
    return out
