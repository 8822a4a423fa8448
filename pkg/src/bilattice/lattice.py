"""Bilayer square-lattice photonic bath.

Two stacked square lattices of bosonic modes with nearest-neighbour
hoppings J (top layer) and eta*J (bottom layer) and a vertical
interlayer coupling G. For eta < 0 the interlayer hybridization opens a
symmetric middle gap around the Van Hove energy without breaking the
chiral (sublattice) symmetry of the bath. All energies are in units of
J; the lattice constant is 1.

The module provides the momentum-space theory (dispersion, hybridized
bands, polariton mixing angles, density of states) and real-space
Hamiltonians for finite lattices, optionally with bond and on-site
disorder.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .errors import ConfigError, DegenerateHybridizationError

BOUNDARIES = ("open", "periodic")


@dataclass(frozen=True)
class BilayerLattice:
    """Geometry and couplings of the bilayer bath.

    Attributes
    ----------
    Lx, Ly : int
        Sites per layer along x and y (>= 3 each).
    J : float
        Intralayer hopping of the top layer (energy unit, J = 1).
    eta : float
        Bottom-layer hopping is eta*J. The middle gap requires eta < 0.
    G : float
        Interlayer coupling, >= 0.
    boundary : str
        "open" or "periodic".
    """

    Lx: int = 21
    Ly: int = 21
    J: float = 1.0
    eta: float = -1.0
    G: float = 0.25
    boundary: str = "open"

    def __post_init__(self):
        if self.Lx < 3 or self.Ly < 3:
            raise ConfigError("lattice needs Lx, Ly >= 3")
        if self.G < 0:
            raise ConfigError("interlayer coupling G must be >= 0")
        if self.boundary not in BOUNDARIES:
            raise ConfigError(f"boundary must be one of {BOUNDARIES}")

    @property
    def n_sites(self) -> int:
        """Total single-particle dimension 2*Lx*Ly."""
        return 2 * self.Lx * self.Ly

    def site_index(self, layer: int, nx, ny):
        """Row-major index (layer slowest, then n_y, then n_x)."""
        return (layer - 1) * self.Lx * self.Ly + np.asarray(ny) * self.Lx + np.asarray(nx)


def dispersion_f(kx, ky, J: float = 1.0):
    """Monolayer square-lattice dispersion f(k) = 2J(cos kx + cos ky)."""
    return 2.0 * J * (np.cos(kx) + np.cos(ky))


def bloch_kernel(kx: float, ky: float, lat: BilayerLattice) -> np.ndarray:
    """2x2 Bloch kernel [[f, G], [G, eta*f]] at one momentum."""
    f = dispersion_f(kx, ky, lat.J)
    return np.array([[f, lat.G], [lat.G, lat.eta * f]])


def band_energies(kx, ky, lat: BilayerLattice):
    """Hybridized band energies (omega_u, omega_l), omega_u >= omega_l.

    omega_{u,l} = (1+eta) f/2 +- sqrt((1-eta)^2 f^2/4 + G^2); for
    eta = -1 this reduces to +-sqrt(f^2 + G^2).
    """
    f = dispersion_f(kx, ky, lat.J)
    avg = 0.5 * (1.0 + lat.eta) * f
    rad = np.sqrt(0.25 * (1.0 - lat.eta) ** 2 * f * f + lat.G * lat.G)
    return avg + rad, avg - rad


def polariton_angles(kx, ky, lat: BilayerLattice):
    """Mixing amplitudes (sin_theta, cos_theta) of the polariton rotation.

    sin(theta_k) = G / sqrt(G^2 + (omega_l - eta f)^2),
    cos(theta_k) = G / sqrt(G^2 + (omega_u - eta f)^2).

    Undefined at G = 0 where the layers decouple and the rotation is
    singular on the f(k) = 0 contour.
    """
    if lat.G == 0:
        raise DegenerateHybridizationError(
            "mixing angles are undefined at G = 0 (degenerate hybridization)")
    f = dispersion_f(kx, ky, lat.J)
    wu, wl = band_energies(kx, ky, lat)
    s = lat.G / np.sqrt(lat.G ** 2 + (wl - lat.eta * f) ** 2)
    c = lat.G / np.sqrt(lat.G ** 2 + (wu - lat.eta * f) ** 2)
    return s, c


def inner_gap_half_width(lat: BilayerLattice) -> float:
    """Half-width of the middle gap, i.e. min_k omega_u(k).

    Equals G for eta = -1 and 2G sqrt(-eta)/(1-eta) for general eta < 0
    (when the band minimum lies inside the range of f). The band
    pairing omega_u(k) = -omega_l(k + Pi) makes the gap symmetric about
    zero.
    """
    if lat.eta >= 0:
        raise ConfigError("the protected middle gap requires eta < 0")
    a = 0.5 * (1.0 + lat.eta)
    b = 0.5 * (1.0 - lat.eta)
    fmax = 4.0 * abs(lat.J)

    def wu(fv):
        return a * fv + np.sqrt(b * b * fv * fv + lat.G * lat.G)

    candidates = [wu(fmax), wu(-fmax)]
    if lat.G > 0:
        f_star = -a * lat.G / (b * np.sqrt(-lat.eta))
        if abs(f_star) <= fmax:
            candidates.append(wu(f_star))
    else:
        candidates.append(0.0)
    return float(min(candidates))


@dataclass(frozen=True)
class BandStructure:
    """Bands and mixing amplitudes sampled on a uniform BZ grid."""

    kx: np.ndarray
    ky: np.ndarray
    omega_u: np.ndarray
    omega_l: np.ndarray
    sin_theta: np.ndarray
    cos_theta: np.ndarray


def sorted_k_grid(n_k: int) -> np.ndarray:
    """Uniform momenta in [-pi, pi), ascending."""
    return -np.pi + 2.0 * np.pi * np.arange(n_k) / n_k


def fft_k_grid(n_k: int):
    """(KY, KX) meshgrid in FFT ordering; arrays are indexed [iy, ix]."""
    k = 2.0 * np.pi * np.fft.fftfreq(n_k)
    return np.meshgrid(k, k, indexing="ij")


def band_structure(lat: BilayerLattice, n_k: int = 256) -> BandStructure:
    k = sorted_k_grid(n_k)
    KY, KX = np.meshgrid(k, k, indexing="ij")
    wu, wl = band_energies(KX, KY, lat)
    s, c = polariton_angles(KX, KY, lat)
    return BandStructure(kx=k, ky=k, omega_u=wu, omega_l=wl, sin_theta=s, cos_theta=c)


def density_of_states(lat: BilayerLattice, n_k: int = 512, n_bins: int = 200):
    """Histogram of both hybridized bands over an n_k x n_k BZ grid.

    Returns (bin_centers, density) with the density normalized to unit
    area. n_k >= 32 and n_bins >= 16 keep the Van Hove peaks resolved.
    """
    if n_k < 32 or n_bins < 16:
        raise ConfigError("density_of_states needs n_k >= 32 and n_bins >= 16")
    k = sorted_k_grid(n_k)
    KY, KX = np.meshgrid(k, k, indexing="ij")
    wu, wl = band_energies(KX, KY, lat)
    energies = np.concatenate([wu.ravel(), wl.ravel()])
    m = float(np.max(np.abs(energies)))
    density, edges = np.histogram(energies, bins=n_bins, range=(-m, m), density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return centers, density


def thermal_occupation(omega, e_fermi, kt):
    """Fermi-Dirac occupation 1/(1 + exp((omega - E_F)/kT)) in [0, 1].

    kT = 0 returns the step limit (1 below E_F, 0.5 at E_F, 0 above).
    """
    if kt < 0:
        raise ConfigError("kT must be >= 0")
    omega = np.asarray(omega, dtype=float)
    if kt == 0:
        out = np.where(omega < e_fermi, 1.0, np.where(omega == e_fermi, 0.5, 0.0))
        return out if out.ndim else float(out)
    out = expit(-(omega - e_fermi) / kt)
    return out if np.ndim(omega) else float(out)


def chiral_sign_diagonal(lat: BilayerLattice) -> np.ndarray:
    """Diagonal of the chiral operator Lambda over all 2*Lx*Ly sites.

    Lambda = +(-1)^(nx+ny) on layer 1 and -(-1)^(nx+ny) on layer 2; it
    anticommutes with the bath Hamiltonian for any eta as long as all
    couplings are off-diagonal (no on-site terms).
    """
    iy, ix = np.indices((lat.Ly, lat.Lx))
    sign = np.where((ix + iy) % 2 == 0, 1.0, -1.0).ravel()
    return np.concatenate([sign, -sign])


def lambda_class(layer: int, nx: int, ny: int) -> int:
    """Sublattice class of a site: 0 on the Lambda=+1 set, 1 on Lambda=-1.

    Layer-1 class is the parity of nx+ny; layer 2 carries the opposite
    convention, so "class" is a single label across both layers.
    """
    return (nx + ny + layer + 1) % 2


@dataclass(frozen=True, eq=False)
class DisorderRealization:
    """One reproducible draw of bond (and optionally on-site) disorder.

    eps1_*/eps2_* perturb the intralayer hoppings of layers 1/2, eps3
    the interlayer rungs. Entries are uniform in [-W, W]. The optional
    on-site channel eps0 (uniform in [-w_diag, w_diag]) breaks chiral
    symmetry and exists for robustness counter-tests.

    Arrays are indexed [ny, nx] by the bond's base site; x-bond arrays
    hold the bond (nx, ny) -> (nx+1, ny), wrapping entries are used
    only under periodic boundaries. Draws come from a counter-based
    Philox stream keyed by the seed in a fixed block order, so a
    realization is reproducible and independent of evaluation order.
    """

    seed: int
    lx: int
    ly: int
    w_intra: float
    w_inter: float
    w_diag: float
    eps1_x: np.ndarray = field(repr=False)
    eps1_y: np.ndarray = field(repr=False)
    eps2_x: np.ndarray = field(repr=False)
    eps2_y: np.ndarray = field(repr=False)
    eps3: np.ndarray = field(repr=False)
    eps0: np.ndarray | None = field(repr=False, default=None)

    @classmethod
    def generate(cls, lat: BilayerLattice, seed: int, w_intra: float,
                 w_inter: float, w_diag: float = 0.0) -> "DisorderRealization":
        if min(w_intra, w_inter, w_diag) < 0:
            raise ConfigError("disorder half-widths must be >= 0")
        rng = np.random.Generator(np.random.Philox(key=seed))
        shape = (lat.Ly, lat.Lx)

        def draw(w, shp):
            # zero-width blocks do not consume the stream
            return rng.uniform(-w, w, size=shp) if w > 0 else np.zeros(shp)

        e1x = draw(w_intra, shape)
        e1y = draw(w_intra, shape)
        e2x = draw(w_intra, shape)
        e2y = draw(w_intra, shape)
        e3 = draw(w_inter, shape)
        e0 = draw(w_diag, (2,) + shape) if w_diag > 0 else None
        return cls(seed=seed, lx=lat.Lx, ly=lat.Ly, w_intra=w_intra,
                   w_inter=w_inter, w_diag=w_diag, eps1_x=e1x, eps1_y=e1y,
                   eps2_x=e2x, eps2_y=e2y, eps3=e3, eps0=e0)

    def check_shape(self, lat: BilayerLattice):
        if (self.lx, self.ly) != (lat.Lx, lat.Ly):
            raise ConfigError(
                f"disorder maps are {self.lx}x{self.ly} but the lattice is "
                f"{lat.Lx}x{lat.Ly}")


def build_realspace_hamiltonian(lat: BilayerLattice,
                                dis: DisorderRealization | None = None) -> sp.csr_matrix:
    """Sparse Hermitian bath Hamiltonian of dimension 2*Lx*Ly.

    Nearest-neighbour bonds carry J + eps1 (layer 1) and eta*J + eps2
    (layer 2), vertical rungs carry G + eps3. There are no on-site
    terms unless the disorder realization has a diagonal channel.
    """
    if dis is not None:
        dis.check_shape(lat)
    lx, ly = lat.Lx, lat.Ly
    nsite = lx * ly
    periodic = lat.boundary == "periodic"
    iy, ix = np.indices((ly, lx))
    rows, cols, vals = [], [], []

    def add_bonds(a_idx, b_idx, values):
        rows.append(a_idx.ravel())
        cols.append(b_idx.ravel())
        vals.append(values.ravel())

    zero = np.zeros((ly, lx))
    intra = {1: (lat.J, dis.eps1_x if dis else zero, dis.eps1_y if dis else zero),
             2: (lat.eta * lat.J, dis.eps2_x if dis else zero, dis.eps2_y if dis else zero)}
    for layer, (t0, ex, ey) in intra.items():
        base = (layer - 1) * nsite
        # x bonds
        sel = slice(None) if periodic else (slice(None), slice(0, lx - 1))
        a = base + iy[sel] * lx + ix[sel]
        b = base + iy[sel] * lx + (ix[sel] + 1) % lx
        add_bonds(a, b, t0 + ex[sel])
        # y bonds
        sel = slice(None) if periodic else (slice(0, ly - 1), slice(None))
        a = base + iy[sel] * lx + ix[sel]
        b = base + ((iy[sel] + 1) % ly) * lx + ix[sel]
        add_bonds(a, b, t0 + ey[sel])
    # interlayer rungs
    a = iy * lx + ix
    add_bonds(a, a + nsite, lat.G + (dis.eps3 if dis else zero))

    r = np.concatenate(rows)
    c = np.concatenate(cols)
    v = np.concatenate(vals)
    # hermitian completion
    r, c, v = np.concatenate([r, c]), np.concatenate([c, r]), np.concatenate([v, v])
    if dis is not None and dis.eps0 is not None:
        d = np.arange(2 * nsite)
        r = np.concatenate([r, d])
        c = np.concatenate([c, d])
        v = np.concatenate([v, dis.eps0.ravel()])
    h = sp.coo_matrix((v, (r, c)), shape=(2 * nsite, 2 * nsite))
    return h.tocsr()


def commensurate_band_values(lat: BilayerLattice) -> np.ndarray:
    """Sorted band energies over the k-grid commensurate with Lx x Ly.

    Under periodic boundaries these coincide with the eigenvalues of
    the finite real-space Hamiltonian without disorder.
    """
    kx = 2.0 * np.pi * np.arange(lat.Lx) / lat.Lx
    ky = 2.0 * np.pi * np.arange(lat.Ly) / lat.Ly
    KY, KX = np.meshgrid(ky, kx, indexing="ij")
    wu, wl = band_energies(KX, KY, lat)
    return np.sort(np.concatenate([wu.ravel(), wl.ravel()]))
