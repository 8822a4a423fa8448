"""Effective spin models mediated by in-gap bound states.

In the Markovian regime (g much smaller than the gap) the photons can
be traced out: emitters at zero detuning inherit the bath's chiral
symmetry and couple through the bound-state field,

    g_ij = +g C(n_ij, a1)/C_e   both in layer 1,
           -g C(n_ij, a1)/C_e   both in layer 2,
           +g C(n_ij, a2)/C_e   across layers,

which vanishes for even total separation within one layer and for odd
separation across layers. Dimerized emitter arrays realize a
generalized two-dimensional SSH model with edge modes, corner modes
pinned at zero energy (bound states in the continuum), and a Wilson
polarization quantized to (0, 0) or (1/2, 1/2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (ConfigError, GaplessError, GaplessFitWarning,
                     GeometryMismatchError, MarkovianWarning,
                     SymmetryBreakingWarning)
from .lattice import BilayerLattice, dispersion_f, fft_k_grid

DEFAULT_COUPLING_RANGE = 10
CORNER_WEIGHT_MIN = 0.6
EDGE_WEIGHT_MIN = 0.6
ZERO_CLUSTER_REL_TOL = 1e-4


@dataclass(frozen=True)
class SpinSite:
    """One emitter pinned at a lattice site of one layer (Delta = 0)."""

    layer: int
    site: tuple[int, int]


@dataclass(frozen=True, eq=False)
class SpinArray:
    """Emitter arrangement plus optional superlattice bookkeeping.

    grid_index holds the (column, row) index of each spin when the
    array is a rectangular superlattice (used for edge/corner
    classification); spacings = (a, b) are the alternating lattice
    spacings of a dimerized arrangement.
    """

    spins: tuple[SpinSite, ...]
    geometry: str = "custom"
    grid_shape: tuple[int, int] | None = None
    grid_index: tuple[tuple[int, int], ...] | None = None
    spacings: tuple[int, int] | None = None

    def __post_init__(self):
        seen = set()
        for s in self.spins:
            key = (s.layer, s.site)
            if key in seen:
                raise ConfigError(f"duplicate spin at {key}")
            seen.add(key)

    def __len__(self):
        return len(self.spins)


def build_ssh_array(n_spins: int = 12, a: int = 4, b: int = 2) -> SpinArray:
    """Dimerized bipartite spin array realizing the 2D SSH model.

    Spins sit on a superlattice whose spacing alternates a, b, a, b,...
    along both axes; the layer alternates in a checkerboard over the
    spin index so that only nearest cross-layer bonds survive the
    parity selection rule. Both spacings must be even to keep every
    coupled pair on one chiral sublattice. Shorter inter-dimer bonds
    (b < a) give the topological dimerization; a < b the trivial one.
    """
    if n_spins < 2 or n_spins % 2:
        raise ConfigError("n_spins must be a positive even number")
    if a % 2 or b % 2 or a <= 0 or b <= 0:
        raise ConfigError("spacings a, b must be positive even integers")
    pos = [0]
    for i in range(n_spins - 1):
        pos.append(pos[-1] + (a if i % 2 == 0 else b))
    shift = pos[-1] // 2  # centre the array on the lattice origin
    spins, index = [], []
    for jj in range(n_spins):
        for ii in range(n_spins):
            layer = 1 if (ii + jj) % 2 == 0 else 2
            spins.append(SpinSite(layer, (pos[ii] - shift, pos[jj] - shift)))
            index.append((ii, jj))
    return SpinArray(spins=tuple(spins), geometry="ssh-dimerized",
                     grid_shape=(n_spins, n_spins), grid_index=tuple(index),
                     spacings=(a, b))


def spin_array_from_records(records, geometry: str = "custom") -> SpinArray:
    """Array from [{"layer": 1|2, "nx": int, "ny": int}, ...] records."""
    spins = []
    for r in records:
        spins.append(SpinSite(int(r["layer"]), (int(r["nx"]), int(r["ny"]))))
    arr = SpinArray(spins=tuple(spins), geometry=geometry)
    return _with_inferred_grid(arr)


def _with_inferred_grid(arr: SpinArray) -> SpinArray:
    """Attach grid indices when the positions form a full rectangle."""
    xs = sorted({s.site[0] for s in arr.spins})
    ys = sorted({s.site[1] for s in arr.spins})
    if len(xs) * len(ys) != len(arr.spins):
        return arr
    xi = {x: i for i, x in enumerate(xs)}
    yi = {y: j for j, y in enumerate(ys)}
    index = tuple((xi[s.site[0]], yi[s.site[1]]) for s in arr.spins)
    return SpinArray(spins=arr.spins, geometry=arr.geometry,
                     grid_shape=(len(xs), len(ys)), grid_index=index,
                     spacings=arr.spacings)


@dataclass(frozen=True, eq=False)
class SpinCouplingMatrix:
    """Hermitian (real symmetric) coupling matrix in SpinArray order."""

    matrix: np.ndarray
    array: SpinArray


def reference_profile_tables(lat: BilayerLattice, g: float, n_k: int = 256):
    """(same_layer, cross_layer) coupling lookup tables.

    Entry [c + dy, c + dx] (c = n_k//2) is the coupling of two emitters
    separated by (dx, dy): g^2 times the zero-energy bound-state field
    of the reference single contact. Both tables are even in the
    separation.
    """
    KY, KX = fft_k_grid(n_k)
    f = dispersion_f(KX, KY, lat.J)
    den = (0.0 - f) * (0.0 - lat.eta * f) - lat.G ** 2
    a1 = (0.0 - lat.eta * f) / den
    a2 = lat.G / den
    same = g * g * np.fft.fftshift(np.fft.ifft2(a1)).real
    cross = g * g * np.fft.fftshift(np.fft.ifft2(a2)).real
    return same, cross


def effective_couplings(array: SpinArray, lat: BilayerLattice, g: float,
                        n_k: int = 256,
                        max_range: int = DEFAULT_COUPLING_RANGE) -> SpinCouplingMatrix:
    """Spin-spin couplings from one reference bound-state profile.

    Couplings are exact up to Chebyshev separation `max_range` and zero
    beyond (the profile decays fast for G of order J and above). The
    Markovian construction needs g well below the gap; a warning fires
    at g > 0.2 G.
    """
    if g > 0.2 * lat.G:
        warnings.warn(f"g = {g} exceeds 0.2*G = {0.2 * lat.G}; the Markovian "
                      "spin model is marginal", MarkovianWarning, stacklevel=2)
    if max_range > n_k // 4:
        raise ConfigError(
            f"max_range {max_range} exceeds n_k/4 = {n_k // 4}; raise n_k")
    same, cross = reference_profile_tables(lat, g, n_k)
    c = n_k // 2
    m = len(array)
    mat = np.zeros((m, m))
    for i, si in enumerate(array.spins):
        for j in range(i + 1, m):
            sj = array.spins[j]
            dx = sj.site[0] - si.site[0]
            dy = sj.site[1] - si.site[1]
            if max(abs(dx), abs(dy)) > max_range:
                continue
            if si.layer == sj.layer:
                v = same[c + dy, c + dx] * (1.0 if si.layer == 1 else -1.0)
            else:
                v = cross[c + dy, c + dx]
            mat[i, j] = v
            mat[j, i] = v
    return SpinCouplingMatrix(matrix=mat, array=array)


def cross_layer_coupling_table(lat: BilayerLattice, g: float, n_k: int = 256,
                               max_range: int = DEFAULT_COUPLING_RANGE) -> dict:
    """{(dx, dy): J12} for the translation-invariant bipartite model."""
    _, cross = reference_profile_tables(lat, g, n_k)
    c = n_k // 2
    table = {}
    for dy in range(-max_range, max_range + 1):
        for dx in range(-max_range, max_range + 1):
            if (dx + dy) % 2 == 0:
                table[(dx, dy)] = float(cross[c + dy, c + dx])
    return table


def bloch_f_S(table: dict, kx, ky):
    """Off-diagonal Bloch element f_S(k) = sum_n J12^n exp(-i k . n)."""
    kx = np.asarray(kx, dtype=float)
    ky = np.asarray(ky, dtype=float)
    out = np.zeros(np.broadcast(kx, ky).shape, dtype=complex)
    for (dx, dy), v in table.items():
        out += v * np.exp(-1j * (kx * dx + ky * dy))
    return out if out.ndim else complex(out)


def bipartite_bloch(table: dict, kx: float, ky: float) -> np.ndarray:
    """2x2 chiral Bloch matrix [[0, f_S], [f_S*, 0]]."""
    fs = bloch_f_S(table, kx, ky)
    return np.array([[0.0, fs], [np.conj(fs), 0.0]])


@dataclass(frozen=True)
class SSHParams:
    """Hoppings of f0(k) = t1 + t2 e^{ik} + t3 e^{-ik} + t4 e^{2ik}."""

    t1: float
    t2: float
    t3: float
    t4: float

    def as_tuple(self):
        return (self.t1, self.t2, self.t3, self.t4)

    def topological_ordering(self) -> bool:
        """|t2| > |t1| > |t4| > |t3|, the dimerization of the
        topological phase."""
        return abs(self.t2) > abs(self.t1) > abs(self.t4) > abs(self.t3)


def f0(kbar, params: SSHParams):
    t1, t2, t3, t4 = params.as_tuple()
    return (t1 + t2 * np.exp(1j * kbar) + t3 * np.exp(-1j * kbar)
            + t4 * np.exp(2j * kbar))


def ssh_bloch(params: SSHParams, kbar_x: float, kbar_y: float) -> np.ndarray:
    """Block-off-diagonal 4x4 Bloch matrix of the generalized 2D SSH model.

    H = [[0, F], [F^dag, 0]] with F = [[f0(kx), f0(ky)],
    [conj(f0(ky)), conj(f0(kx))]]; the spectrum is
    {+-(|f0x|+|f0y|), +-||f0x|-|f0y||}, symmetric about zero, and the
    middle pair touches zero wherever |f0(kx)| = |f0(ky)| (bound states
    in the continuum live there).
    """
    fx = f0(kbar_x, params)
    fy = f0(kbar_y, params)
    block = np.array([[fx, fy], [np.conj(fy), np.conj(fx)]])
    h = np.zeros((4, 4), dtype=complex)
    h[:2, 2:] = block
    h[2:, :2] = block.conj().T
    return h


def fit_ssh_params(couplings: SpinCouplingMatrix, array: SpinArray | None = None) -> SSHParams:
    """Extract t1..t4 from the couplings of a dimerized array.

    Bond classes are the four shortest cross-sublattice separations
    along one axis: distances a (t1, intra-dimer), b (t2, inter-dimer),
    2a+b (t3) and a+2b (t4), averaged over bulk rows. A relative spread
    above 10% within a class means the array is not the expected
    superlattice.
    """
    if array is None:
        array = couplings.array
    if array.spacings is None or array.grid_shape is None:
        raise GeometryMismatchError("array carries no dimerization metadata")
    a, b = array.spacings
    ncol, nrow = array.grid_shape
    index = {array.grid_index[i]: i for i in range(len(array))}
    classes = (("t1", a), ("t2", b), ("t3", 2 * a + b), ("t4", a + 2 * b))
    samples = {name: [] for name, _ in classes}
    for j in range(2, nrow - 2):
        for i in range(ncol):
            for i2 in range(i + 1, ncol):
                s1 = array.spins[index[(i, j)]]
                s2 = array.spins[index[(i2, j)]]
                if s1.layer == s2.layer:
                    continue
                d = abs(s2.site[0] - s1.site[0])
                for name, dist in classes:
                    if d == dist:
                        samples[name].append(
                            couplings.matrix[index[(i, j)], index[(i2, j)]])
    values = {}
    for name, vals in samples.items():
        if not vals:
            raise GeometryMismatchError(f"no bonds found for class {name}")
        vals = np.asarray(vals)
        mean = float(np.mean(vals))
        spread = float(np.max(np.abs(vals - mean)))
        if spread > 0.1 * max(abs(mean), 1e-300):
            raise GeometryMismatchError(
                f"bond class {name} has relative spread above 10%")
        values[name] = mean
    params = SSHParams(**values)
    if a == b or abs(abs(params.t1) - abs(params.t2)) <= 1e-3 * max(
            abs(params.t1), abs(params.t2)):
        warnings.warn("t1 and t2 coincide: undimerized array, gap closes",
                      GaplessFitWarning, stacklevel=2)
    return params


@dataclass(frozen=True, eq=False)
class FiniteSpectrum:
    """Eigensystem of a finite spin array with mode classification.

    Within the numerically degenerate zero-energy cluster the basis is
    rotated to diagonalize the corner-weight operator, which separates
    corner modes from the zero-energy bulk continuum they are embedded
    in. Labels are "corner", "edge" or "bulk", exhaustive and
    exclusive.
    """

    energies: np.ndarray
    states: np.ndarray
    labels: tuple[str, ...]
    ipr: np.ndarray
    boundary_fraction: np.ndarray
    corner_fraction: np.ndarray


def _region_masks(array: SpinArray):
    if array.grid_shape is None or array.grid_index is None:
        raise GeometryMismatchError(
            "mode classification needs a rectangular-grid spin array")
    ncol, nrow = array.grid_shape
    corner = np.zeros(len(array), dtype=bool)
    boundary = np.zeros(len(array), dtype=bool)
    for k, (i, j) in enumerate(array.grid_index):
        on_edge = i in (0, ncol - 1) or j in (0, nrow - 1)
        in_corner = (i < 2 or i >= ncol - 2) and (j < 2 or j >= nrow - 2)
        corner[k] = in_corner
        boundary[k] = on_edge and not in_corner
    return corner, boundary


def finite_spectrum(array: SpinArray, couplings: SpinCouplingMatrix) -> FiniteSpectrum:
    """Dense spectrum of the coupling matrix with edge/corner labels.

    corner: state in the near-zero cluster whose corner-plaquette
    weight (the 2x2 blocks at the four array corners) reaches 60%
    after the degenerate-cluster rotation. edge: 60% weight on the
    remaining boundary ring. bulk: everything else.
    """
    if array.grid_shape is not None and min(array.grid_shape) < 8:
        raise ConfigError("edge/corner separation needs at least an 8x8 array")
    corner_mask, boundary_mask = _region_masks(array)
    evals, evecs = scipy.linalg.eigh(couplings.matrix)
    scale = float(np.max(np.abs(evals))) or 1.0

    cluster = np.abs(evals) < ZERO_CLUSTER_REL_TOL * scale
    if np.count_nonzero(cluster) > 1:
        sub = evecs[:, cluster]
        pc = (sub.T * corner_mask.astype(float)) @ sub
        _, rot = scipy.linalg.eigh(pc)
        evecs[:, cluster] = sub @ rot
        evals[cluster] = np.einsum("is,ij,js->s", evecs[:, cluster],
                                   couplings.matrix, evecs[:, cluster])

    w2 = evecs ** 2
    corner_fraction = w2.T @ corner_mask.astype(float)
    boundary_fraction = w2.T @ boundary_mask.astype(float)
    ipr = np.sum(w2 ** 2, axis=0)
    labels = []
    in_cluster = np.abs(evals) < ZERO_CLUSTER_REL_TOL * scale
    for s in range(len(evals)):
        if in_cluster[s] and corner_fraction[s] >= CORNER_WEIGHT_MIN:
            labels.append("corner")
        elif boundary_fraction[s] >= EDGE_WEIGHT_MIN:
            labels.append("edge")
        else:
            labels.append("bulk")
    return FiniteSpectrum(energies=evals, states=evecs, labels=tuple(labels),
                          ipr=ipr, boundary_fraction=boundary_fraction,
                          corner_fraction=corner_fraction)


def periodic_superlattice_spectrum(array: SpinArray, lat: BilayerLattice,
                                   g: float, n_k: int = 256,
                                   max_range: int = DEFAULT_COUPLING_RANGE):
    """Eigenvalues of the dimerized array with periodic superlattice
    boundaries.

    Couplings use the minimal-image separation on the superlattice
    torus, so the spectrum equals the Bloch bands sampled on the
    commensurate grid.
    """
    if array.spacings is None or array.grid_shape is None:
        raise GeometryMismatchError("needs a dimerized superlattice array")
    a, b = array.spacings
    period = (a + b) * (array.grid_shape[0] // 2)
    same, cross = reference_profile_tables(lat, g, n_k)
    c = n_k // 2
    m = len(array)
    mat = np.zeros((m, m))
    for i, si in enumerate(array.spins):
        for j in range(i + 1, m):
            sj = array.spins[j]
            dx = (sj.site[0] - si.site[0] + period // 2) % period - period // 2
            dy = (sj.site[1] - si.site[1] + period // 2) % period - period // 2
            if max(abs(dx), abs(dy)) > max_range:
                continue
            if si.layer == sj.layer:
                v = same[c + dy, c + dx] * (1.0 if si.layer == 1 else -1.0)
            else:
                v = cross[c + dy, c + dx]
            mat[i, j] = v
            mat[j, i] = v
    return np.linalg.eigvalsh(mat)


def wilson_polarization(params_or_sampler, n_k: int = 64,
                        snap_tol: float = 1e-3):
    """Polarization (P_x, P_y) of the lowest band from Wilson loops.

    Discretized loops of occupied-band overlap matrices along each
    momentum line; the loop phase is circularly averaged over the
    transverse momentum, reduced mod 1 and snapped to {0, 1/2} within
    snap_tol. The occupied set is the lowest band, which is separated
    from the rest by 2 min_k |f0(k)| for any dimerized parameter set;
    the two middle bands touch zero on the |f0(kx)| = |f0(ky)| lines,
    so a zero-energy-gap prescription would be ill-defined here. The
    k_x grid is offset by half a step to keep those touchings off the
    sampling points, and the gap test runs on the coupling-normalized
    spectrum (polarization is scale invariant).
    """
    if isinstance(params_or_sampler, SSHParams):
        params = params_or_sampler
        sampler = lambda kx, ky: ssh_bloch(params, kx, ky)  # noqa: E731
    else:
        sampler = params_or_sampler
    probe = np.asarray(sampler(0.1, 0.2))
    dim = probe.shape[0]
    n_occ = 1 if dim == 4 else dim // 2

    kxs = -np.pi + 2.0 * np.pi * (np.arange(n_k) + 0.5) / n_k
    kys = -np.pi + 2.0 * np.pi * np.arange(n_k) / n_k
    vecs = np.zeros((n_k, n_k, dim, n_occ), dtype=complex)
    occ_gap = np.inf
    scale = 0.0
    for i, kx in enumerate(kxs):
        for j, ky in enumerate(kys):
            w, v = np.linalg.eigh(sampler(kx, ky))
            vecs[i, j] = v[:, :n_occ]
            occ_gap = min(occ_gap, float(w[n_occ] - w[n_occ - 1]))
            scale = max(scale, float(np.max(np.abs(w))))
    if scale == 0.0 or occ_gap / scale <= 1e-6:
        raise GaplessError(
            f"occupied-band gap {occ_gap:.3g} (scale {scale:.3g}) is below "
            "threshold; polarization undefined")

    def loop_phase(axis):
        phases = np.empty(n_k)
        for m in range(n_k):
            w = np.eye(n_occ, dtype=complex)
            for l in range(n_k):
                if axis == 0:
                    u0, u1 = vecs[l, m], vecs[(l + 1) % n_k, m]
                else:
                    u0, u1 = vecs[m, l], vecs[m, (l + 1) % n_k]
                w = (u1.conj().T @ u0) @ w
            phases[m] = np.angle(np.linalg.det(w))
        return (-np.angle(np.mean(np.exp(1j * phases))) / (2.0 * np.pi)) % 1.0

    raw = (loop_phase(0), loop_phase(1))
    out = []
    for p in raw:
        for target in (0.0, 0.5):
            if min(abs(p - target), abs(p - target - 1.0), abs(p - target + 1.0)) <= snap_tol:
                out.append(target)
                break
        else:
            warnings.warn(f"polarization component {p:.6f} is not quantized; "
                          "returning the raw value", SymmetryBreakingWarning,
                          stacklevel=2)
            out.append(p)
    return tuple(out)
