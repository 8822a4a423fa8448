"""Single-excitation emitter-photon bound states in the middle gap.

A two-level emitter detuned by Delta couples to one or more lattice
sites. Inside the gap the dressed state is found either from the pole
equation E = Delta + Sigma(E) followed by a Brillouin-zone quadrature
of the photonic amplitudes (infinite lattice), or by exact
diagonalization of the finite single-excitation Hamiltonian (the
independent oracle, which also handles disorder).

For an emitter resonant with the gap center (Delta = 0) the chiral
symmetry of the bath pins E = 0 and forces the photon cloud onto one
chiral sublattice: the "odd-neighbour" pattern, robust against any
off-diagonal (bond) disorder.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (ConfigError, HybridizationFailureError, InsideBandError,
                     NoBoundStateError, ResolutionWarning)
from .lattice import (BilayerLattice, DisorderRealization,
                      build_realspace_hamiltonian, dispersion_f, fft_k_grid,
                      inner_gap_half_width, lambda_class)

ZERO_MODE_TOL = 1e-10


@dataclass(frozen=True)
class CouplingPoint:
    """One emitter-bath contact: layer in {1, 2}, site (nx, ny), signed g."""

    layer: int
    site: tuple[int, int]
    g: float

    def __post_init__(self):
        if self.layer not in (1, 2):
            raise ConfigError("coupling point layer must be 1 or 2")

    @property
    def sublattice(self) -> int:
        return lambda_class(self.layer, *self.site)


@dataclass(frozen=True)
class EmitterConfig:
    """Emitter detuning plus its list of coupling points.

    A small atom has exactly one point; a giant atom several. Points
    sharing one chiral sublattice keep the odd-neighbour property of
    the composed bound state (validated where it matters, not here).
    """

    delta: float
    points: tuple[CouplingPoint, ...]

    def __post_init__(self):
        if not self.points:
            raise ConfigError("emitter needs at least one coupling point")

    @classmethod
    def small_atom(cls, delta: float, layer: int, site: tuple[int, int],
                   g: float) -> "EmitterConfig":
        return cls(delta=delta, points=(CouplingPoint(layer, tuple(site), g),))

    @property
    def is_small(self) -> bool:
        return len(self.points) == 1

    def points_in_layer(self, layer: int) -> tuple[CouplingPoint, ...]:
        return tuple(p for p in self.points if p.layer == layer)

    def same_sublattice(self) -> bool:
        classes = {p.sublattice for p in self.points}
        return len(classes) == 1


@dataclass(eq=False)
class BoundStateSolution:
    """Normalized dressed state: emitter amplitude plus photon fields.

    field_a1/field_a2 are real arrays indexed [ny, nx]; origin is the
    array index of lattice site (0, 0), so field[origin + n] is the
    amplitude at site n. Normalization is c_e^2 + sum |C|^2 = 1.
    """

    energy: float
    c_e: float
    field_a1: np.ndarray
    field_a2: np.ndarray
    method: str
    origin: tuple[int, int]
    emitter: EmitterConfig | None = None
    lattice: BilayerLattice | None = None

    def photon_norm2(self) -> float:
        return float(np.sum(self.field_a1 ** 2) + np.sum(self.field_a2 ** 2))

    def site_coordinates(self):
        """(NX, NY) site-coordinate grids matching the field arrays."""
        iy, ix = np.indices(self.field_a1.shape)
        return ix - self.origin[1], iy - self.origin[0]

    def window(self, half: int):
        """Both fields on the (2*half+1)^2 block centred at site (0, 0)."""
        oy, ox = self.origin
        sl = (slice(oy - half, oy + half + 1), slice(ox - half, ox + half + 1))
        return self.field_a1[sl], self.field_a2[sl]


def bs_momentum_amplitudes(kx, ky, e_bs: float, lat: BilayerLattice):
    """Photonic amplitudes (C_k_a1, C_k_a2) of a layer-1 small atom.

    C_k_a1 = (E - eta f) / D and C_k_a2 = G / D with
    D = (E - f)(E - eta f) - G^2 = (E - omega_u)(E - omega_l).

    The first form equals sin^2(theta)/(E - omega_u) +
    cos^2(theta)/(E - omega_l); at eta = -1, E = 0 the pair reduces to
    -f/(f^2 + G^2) and -G/(f^2 + G^2).
    """
    gap = inner_gap_half_width(lat)
    if abs(e_bs) >= gap:
        raise InsideBandError(f"E = {e_bs} is not inside the gap (+-{gap})")
    f = dispersion_f(kx, ky, lat.J)
    den = (e_bs - f) * (e_bs - lat.eta * f) - lat.G ** 2
    return (e_bs - lat.eta * f) / den, lat.G / den


def _small_atom_k_fields(e_bs: float, lat: BilayerLattice, layer: int,
                         kx, ky):
    """(layer-1 amplitude, layer-2 amplitude) in k space for one contact.

    A layer-2 emitter follows from the layer swap f -> eta f of the
    kernel; the cross amplitude G/D is shared.
    """
    f = dispersion_f(kx, ky, lat.J)
    den = (e_bs - f) * (e_bs - lat.eta * f) - lat.G ** 2
    if layer == 1:
        return (e_bs - lat.eta * f) / den, lat.G / den
    return lat.G / den, (e_bs - f) / den


def self_energy(z: float, lat: BilayerLattice, layer: int = 1, g: float = 1.0,
                n_k: int = 256) -> float:
    """Emitter self-energy Sigma(z) inside the gap for a single contact.

    Sigma(z) = (g^2/N) sum_k [sin^2/(z - omega_u) + cos^2/(z - omega_l)]
    for layer 1 (weights swapped for layer 2), evaluated as the closed
    rational form on an n_k x n_k grid. Real inside the gap; the k and
    k+Pi terms cancel at z = 0, which pins the resonant bound state.
    """
    if n_k < 128:
        raise ConfigError("self_energy needs n_k >= 128")
    gap = inner_gap_half_width(lat)
    if abs(z) >= gap:
        raise InsideBandError(
            f"z = {z} lies inside a band (gap half-width {gap}); "
            "principal-value evaluation is out of scope")
    KY, KX = fft_k_grid(n_k)
    f = dispersion_f(KX, KY, lat.J)
    den = (z - f) * (z - lat.eta * f) - lat.G ** 2
    num = (z - lat.eta * f) if layer == 1 else (z - f)
    return float(g * g * np.mean(num / den))


def solve_pole(emitter: EmitterConfig, lat: BilayerLattice,
               n_k: int = 256) -> float:
    """Bound-state energy from z - Delta - Sigma(z) = 0 by bisection.

    Sigma is monotone decreasing inside the gap and diverges at the
    band edges, so the root is unique. Delta = 0 returns exactly 0:
    Sigma(0) vanishes identically by chiral symmetry.
    """
    if not emitter.is_small:
        raise ConfigError("solve_pole handles small atoms (one coupling point)")
    point = emitter.points[0]
    gap = inner_gap_half_width(lat)
    if abs(emitter.delta) >= gap:
        raise ConfigError(f"detuning {emitter.delta} is outside the gap (+-{gap})")
    if emitter.delta == 0.0:
        return 0.0

    def func(z):
        return z - emitter.delta - self_energy(z, lat, point.layer, point.g, n_k)

    eps = 1e-9 * gap
    lo, hi = -gap + eps, gap - eps
    flo, fhi = func(lo), func(hi)
    if not (flo < 0.0 < fhi):
        raise NoBoundStateError(
            f"no sign change on ({lo:.6g}, {hi:.6g}): f = ({flo:.3g}, {fhi:.3g})")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if func(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _coupling_phases(points, KX, KY):
    """sum_p g_p exp(-i k . n_p): conjugated interference factor, which
    shifts each contribution to its coupling site under the inverse
    transform."""
    out = np.zeros(KX.shape, dtype=complex)
    for p in points:
        out += p.g * np.exp(-1j * (KX * p.site[0] + KY * p.site[1]))
    return out


def _ifft_real(arr_k: np.ndarray) -> np.ndarray:
    out = np.fft.ifft2(arr_k)
    scale = np.max(np.abs(out))
    if scale > 0 and np.max(np.abs(out.imag)) > 1e-9 * scale:
        raise ConfigError("field transform produced a non-real profile")
    return np.fft.fftshift(out.real)


def _warn_if_unresolved(field_a1, field_a2, n_k):
    peak = max(np.max(np.abs(field_a1)), np.max(np.abs(field_a2)))
    border = max(np.max(np.abs(field_a1[0])), np.max(np.abs(field_a1[:, 0])),
                 np.max(np.abs(field_a2[0])), np.max(np.abs(field_a2[:, 0])))
    if peak > 0 and border > 1e-8 * peak:
        warnings.warn(
            f"field at the grid boundary is {border / peak:.2e} of the peak; "
            f"n_k = {n_k} may not resolve the localization length",
            ResolutionWarning, stacklevel=3)


def bs_realspace_profile(emitter: EmitterConfig, lat: BilayerLattice,
                         n_k: int = 512) -> BoundStateSolution:
    """Bound-state fields of a small atom by inverse transform over the BZ.

    Solves the pole equation for E, evaluates the momentum amplitudes
    on an n_k x n_k grid (n_k a power of two >= 64) and transforms with
    an FFT. The shape is computed with C_e = 1 and the full state is
    normalized afterwards, which is exact for the field shape at fixed
    E. Output arrays are indexed by absolute site, origin at the grid
    centre.
    """
    if not emitter.is_small:
        raise ConfigError("bs_realspace_profile handles small atoms; "
                          "see giant_atom.giant_bs_profile")
    if n_k < 64 or (n_k & (n_k - 1)) != 0:
        raise ConfigError("n_k must be a power of two >= 64")
    point = emitter.points[0]
    e_bs = solve_pole(emitter, lat, n_k=max(128, min(n_k, 512)))
    KY, KX = fft_k_grid(n_k)
    a1, a2 = _small_atom_k_fields(e_bs, lat, point.layer, KX, KY)
    phase = np.exp(-1j * (KX * point.site[0] + KY * point.site[1]))
    f1 = _ifft_real(point.g * phase * a1)
    f2 = _ifft_real(point.g * phase * a2)
    nrm = np.sqrt(1.0 + np.sum(f1 ** 2) + np.sum(f2 ** 2))
    f1 /= nrm
    f2 /= nrm
    _warn_if_unresolved(f1, f2, n_k)
    return BoundStateSolution(energy=e_bs, c_e=1.0 / nrm, field_a1=f1,
                              field_a2=f2, method="quadrature",
                              origin=(n_k // 2, n_k // 2), emitter=emitter,
                              lattice=lat)


def single_excitation_hamiltonian(emitter: EmitterConfig, lat: BilayerLattice,
                                  dis: DisorderRealization | None = None) -> sp.csr_matrix:
    """Bath plus emitter Hamiltonian, dimension 2*Lx*Ly + 1.

    Coupling sites are given in lattice coordinates around (0, 0) and
    embedded centred in the finite lattice; the emitter is the last
    basis state with Delta on the diagonal.
    """
    h_bath = build_realspace_hamiltonian(lat, dis)
    dim = lat.n_sites + 1
    cx, cy = lat.Lx // 2, lat.Ly // 2
    rows, cols, vals = [], [], []
    for p in emitter.points:
        ax, ay = cx + p.site[0], cy + p.site[1]
        if not (0 <= ax < lat.Lx and 0 <= ay < lat.Ly):
            raise ConfigError(f"coupling point {p.site} falls outside the "
                              f"{lat.Lx}x{lat.Ly} lattice when centred")
        idx = lat.site_index(p.layer, ax, ay)
        rows += [dim - 1, idx]
        cols += [idx, dim - 1]
        vals += [p.g, p.g]
    if emitter.delta != 0.0:
        rows.append(dim - 1)
        cols.append(dim - 1)
        vals.append(emitter.delta)
    h = sp.lil_matrix((dim, dim))
    h[:dim - 1, :dim - 1] = h_bath
    coupling = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim))
    return (h.tocsr() + coupling.tocsr()).tocsr()


def _in_gap_eigensystem(h: sp.csr_matrix, gap: float, sparse: bool,
                        sigma_hint: float, k_states: int):
    if not sparse:
        evals, evecs = scipy.linalg.eigh(h.toarray())
        keep = np.abs(evals) < gap
        return evals[keep], evecs[:, keep]
    dim = h.shape[0]
    v0 = np.full(dim, 1.0 / np.sqrt(dim))
    sigma = sigma_hint
    k = min(k_states, dim - 2)
    for attempt in range(4):
        try:
            evals, evecs = spla.eigsh(h, k=k, sigma=sigma, v0=v0)
        except RuntimeError:
            sigma += 0.013 * gap  # nudge off an exact eigenvalue
            continue
        keep = np.abs(evals) < gap
        if np.count_nonzero(keep) == k and k < dim - 2:
            k = min(2 * k, dim - 2)  # window may be truncated; widen
            continue
        return evals[keep], evecs[:, keep]
    raise HybridizationFailureError("shift-invert eigensolver failed to "
                                    "isolate the in-gap spectrum")


def bs_exact_diagonalization(emitter: EmitterConfig, lat: BilayerLattice,
                             dis: DisorderRealization | None = None,
                             solver: str = "auto",
                             k_states: int = 8) -> BoundStateSolution:
    """Exact-diagonalization oracle for the in-gap dressed state.

    Diagonalizes the (2*Lx*Ly + 1)-dimensional single-excitation
    Hamiltonian and returns the in-gap eigenvector with the largest
    emitter weight. Small lattices go through a dense solver; larger
    ones use shift-invert with a fixed start vector so results stay
    deterministic. Among numerically degenerate zero modes the
    combination with maximal emitter weight is selected (the zero-mode
    theorem guarantees existence, not uniqueness).
    """
    if solver not in ("auto", "dense", "sparse"):
        raise ConfigError("solver must be auto, dense or sparse")
    h = single_excitation_hamiltonian(emitter, lat, dis)
    gap = inner_gap_half_width(lat)
    use_sparse = (h.shape[0] > 3600) if solver == "auto" else solver == "sparse"
    sigma_hint = emitter.delta if abs(emitter.delta) > 0.05 * gap else 0.146 * gap
    evals, evecs = _in_gap_eigensystem(h, gap, use_sparse, sigma_hint, k_states)
    if evals.size == 0:
        raise HybridizationFailureError("no eigenvalue inside the gap")

    weights = evecs[-1, :] ** 2
    cluster = np.abs(evals) < ZERO_MODE_TOL
    if np.count_nonzero(cluster) > 1 and weights[cluster].sum() > weights.max():
        # degenerate zero subspace: project the emitter onto it
        sub = evecs[:, cluster]
        coeff = sub[-1, :]
        vec = sub @ coeff
        wsub = float(coeff @ coeff)
        vec /= np.sqrt(wsub)
        energy = float(evals[cluster] @ coeff ** 2 / wsub)
        best_weight = wsub
    else:
        order = np.argsort(weights)[::-1]
        best = order[0]
        best_weight = float(weights[best])
        if best_weight <= 0.5:
            cand = [(float(evals[i]), float(weights[i])) for i in order[:2]]
            raise HybridizationFailureError(
                f"best in-gap emitter weight is {best_weight:.3g} <= 0.5; "
                f"candidates (E, weight): {cand}", candidates=cand)
        vec = evecs[:, best]
        energy = float(evals[best])
    if best_weight <= 0.5:
        raise HybridizationFailureError(
            f"best in-gap emitter weight is {best_weight:.3g} <= 0.5")
    if vec[-1] < 0:
        vec = -vec
    nsite = lat.Lx * lat.Ly
    f1 = vec[:nsite].reshape(lat.Ly, lat.Lx)
    f2 = vec[nsite:2 * nsite].reshape(lat.Ly, lat.Lx)
    return BoundStateSolution(energy=energy, c_e=float(vec[-1]), field_a1=f1,
                              field_a2=f2, method="exact_diag",
                              origin=(lat.Ly // 2, lat.Lx // 2),
                              emitter=emitter, lattice=lat)


def parity_norms(sol: BoundStateSolution):
    """Photonic population on the odd and even chiral sublattices.

    Layer-1 parity is the parity of nx+ny; layer 2 carries the
    opposite convention (the chiral operator Lambda). Returns
    (odd_norm2, even_norm2), i.e. summed |C|^2 per class.
    """
    nx, ny = sol.site_coordinates()
    odd_l1 = (nx + ny) % 2 == 1
    odd_l2 = (nx + ny) % 2 == 0  # layer-2 class is flipped
    odd = float(np.sum(sol.field_a1[odd_l1] ** 2) + np.sum(sol.field_a2[odd_l2] ** 2))
    even = float(np.sum(sol.field_a1[~odd_l1] ** 2) + np.sum(sol.field_a2[~odd_l2] ** 2))
    return odd, even


def sublattice_population(sol: BoundStateSolution, sublattice: int) -> float:
    """Photon population on one Lambda class (0 = even, 1 = odd)."""
    odd, even = parity_norms(sol)
    return odd if sublattice == 1 else even


def min_abs_energy(emitter: EmitterConfig, lat: BilayerLattice,
                   dis: DisorderRealization | None = None):
    """(min |E|, eigenvector) over the full single-excitation spectrum.

    Dense diagnostic used by the disorder-robustness statistics; the
    eigenvector belongs to the eigenvalue closest to zero.
    """
    h = single_excitation_hamiltonian(emitter, lat, dis).toarray()
    evals, evecs = scipy.linalg.eigh(h)
    i = int(np.argmin(np.abs(evals)))
    return float(abs(evals[i])), evecs[:, i]


def zero_mode_statistics(emitter: EmitterConfig, lat: BilayerLattice, seeds,
                         w_intra: float, w_inter: float,
                         diagonal: bool = False):
    """Per-seed (min |E|, population on the emitter's sublattice).

    With bond disorder the zero mode survives and its photon cloud
    avoids the sublattice hosting the coupling points; on-site disorder
    of the same strength destroys both properties.
    """
    from ._parallel import ensemble_map

    sub = emitter.points[0].sublattice
    nsite = lat.Lx * lat.Ly

    def one(seed):
        if diagonal:
            dis = DisorderRealization.generate(lat, seed, 0.0, 0.0, w_diag=w_intra)
        else:
            dis = DisorderRealization.generate(lat, seed, w_intra, w_inter)
        min_e, vec = min_abs_energy(emitter, lat, dis)
        sol = BoundStateSolution(
            energy=min_e, c_e=float(vec[-1]),
            field_a1=vec[:nsite].reshape(lat.Ly, lat.Lx),
            field_a2=vec[nsite:2 * nsite].reshape(lat.Ly, lat.Lx),
            method="exact_diag", origin=(lat.Ly // 2, lat.Lx // 2))
        return min_e, sublattice_population(sol, sub)

    return ensemble_map(one, seeds)
