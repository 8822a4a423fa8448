"""Multi-point (giant-atom) bound states and interference diagnostics.

A giant atom couples to several lattice sites. In momentum space the
contacts of one layer combine into the interference factor
I(k) = sum_p g_p exp(i k . n_p); its zeros on the square band-edge
contour remove the corresponding real-space branches, so coupling
geometry sculpts the bound-state pattern (branch cancellation, photon
trapping, chiral line profiles).

Composed fields are superpositions of shifted single-contact profiles;
keeping all contacts on one chiral sublattice preserves the
odd-neighbour property and pins the energy at zero for Delta = 0.
"""

from __future__ import annotations

import numpy as np

from .bound_state import (BoundStateSolution, EmitterConfig,
                          _coupling_phases, _ifft_real, _small_atom_k_fields,
                          _warn_if_unresolved)
from .errors import ConfigError, DecompositionError, ParityViolationError
from .lattice import BilayerLattice, fft_k_grid


def interference_factor(points, kx, ky):
    """I(k) = sum over points of g_p * exp(i k . n_p).

    `points` are the coupling points of a single layer; kx, ky may be
    arrays.
    """
    kx = np.asarray(kx, dtype=float)
    ky = np.asarray(ky, dtype=float)
    out = np.zeros(np.broadcast(kx, ky).shape, dtype=complex)
    for p in points:
        out += p.g * np.exp(1j * (kx * p.site[0] + ky * p.site[1]))
    return out if out.ndim else complex(out)


def giant_bs_profile(emitter: EmitterConfig, lat: BilayerLattice,
                     n_k: int = 512,
                     allow_parity_violation: bool = False) -> BoundStateSolution:
    """Bound-state fields of a multi-point emitter at Delta = 0.

    With all contacts on one chiral sublattice the self-energy vanishes
    at zero energy, so E = 0 exactly and the composed field is the
    phase-weighted superposition of single-contact profiles:

        C_a1 = conj(I) * C^s_a1 + conj(I') * C^s_a2
        C_a2 = conj(I) * C^s_a2 + conj(I') * C^s_(a2, layer-2 contact)

    where I and I' collect the layer-1 and layer-2 contacts. A point
    set mixing the two sublattices would lose the zero-mode guarantee
    and is refused unless explicitly overridden (the override solves
    the multi-point pole equation instead).
    """
    if emitter.delta != 0.0:
        raise ConfigError("giant_bs_profile is defined for Delta = 0")
    if n_k < 64 or (n_k & (n_k - 1)) != 0:
        raise ConfigError("n_k must be a power of two >= 64")
    if not emitter.same_sublattice():
        if not allow_parity_violation:
            raise ParityViolationError(
                "coupling points mix the two chiral sublattices; the "
                "odd-neighbour guarantee would be lost (override to force)")
        e_bs = _solve_giant_pole(emitter, lat, n_k=min(n_k, 512))
    else:
        e_bs = 0.0

    KY, KX = fft_k_grid(n_k)
    i1 = _coupling_phases(emitter.points_in_layer(1), KX, KY)
    i2 = _coupling_phases(emitter.points_in_layer(2), KX, KY)
    a1_l1, a2_l1 = _small_atom_k_fields(e_bs, lat, 1, KX, KY)
    a1_l2, a2_l2 = _small_atom_k_fields(e_bs, lat, 2, KX, KY)
    f1 = _ifft_real(i1 * a1_l1 + i2 * a1_l2)
    f2 = _ifft_real(i1 * a2_l1 + i2 * a2_l2)
    nrm = np.sqrt(1.0 + np.sum(f1 ** 2) + np.sum(f2 ** 2))
    f1 /= nrm
    f2 /= nrm
    _warn_if_unresolved(f1, f2, n_k)
    return BoundStateSolution(energy=e_bs, c_e=1.0 / nrm, field_a1=f1,
                              field_a2=f2, method="quadrature",
                              origin=(n_k // 2, n_k // 2), emitter=emitter,
                              lattice=lat)


def _solve_giant_pole(emitter: EmitterConfig, lat: BilayerLattice,
                      n_k: int = 256) -> float:
    """Root of z - Delta - Sigma_giant(z) inside the gap (override path)."""
    from .bound_state import NoBoundStateError  # local to avoid cycle noise
    from .lattice import dispersion_f, inner_gap_half_width

    gap = inner_gap_half_width(lat)
    KY, KX = fft_k_grid(n_k)
    f = dispersion_f(KX, KY, lat.J)
    i1 = interference_factor(emitter.points_in_layer(1), KX, KY)
    i2 = interference_factor(emitter.points_in_layer(2), KX, KY)

    def sigma(z):
        den = (z - f) * (z - lat.eta * f) - lat.G ** 2
        val = (np.abs(i1) ** 2 * (z - lat.eta * f)
               + np.abs(i2) ** 2 * (z - f)
               + 2.0 * np.real(np.conj(i1) * i2) * lat.G)
        return float(np.mean(val / den))

    def func(z):
        return z - emitter.delta - sigma(z)

    eps = 1e-9 * gap
    lo, hi = -gap + eps, gap - eps
    if not (func(lo) < 0.0 < func(hi)):
        raise NoBoundStateError("no in-gap root of the multi-point pole equation")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if func(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def branch_population(sol: BoundStateSolution, direction, r_min: float = 5.0,
                      r_max: float = 15.0, perp_tol: float = 1.0) -> float:
    """Photon population on a diagonal branch.

    The branch is the set of sites within perpendicular distance
    `perp_tol` of the line through the origin along `direction`,
    restricted to radius shells r_min..r_max; both layers contribute.
    """
    dx, dy = direction
    nx, ny = sol.site_coordinates()
    r = np.hypot(nx, ny)
    perp = np.abs(nx * dy - ny * dx) / np.hypot(dx, dy)
    mask = (perp <= perp_tol) & (r >= r_min) & (r <= r_max)
    return float(np.sum(sol.field_a1[mask] ** 2) + np.sum(sol.field_a2[mask] ** 2))


def branch_suppression_ratio(sol: BoundStateSolution, suppressed=(1, 1),
                             enhanced=(1, -1), **kwargs) -> float:
    """Population ratio suppressed-branch / enhanced-branch."""
    return branch_population(sol, suppressed, **kwargs) / \
        branch_population(sol, enhanced, **kwargs)


def window_population_fraction(sol: BoundStateSolution, half: int) -> float:
    """Fraction of the photon population inside the centred
    (2*half+1) x (2*half+1) window, both layers."""
    w1, w2 = sol.window(half)
    return float((np.sum(w1 ** 2) + np.sum(w2 ** 2)) / sol.photon_norm2())


def axis_tail_population(sol: BoundStateSolution, r_min: float = 10.0,
                         r_max: float = 30.0, width: float = 1.0) -> float:
    """Population on the four axis rays (slow Van Hove tails)."""
    nx, ny = sol.site_coordinates()
    r = np.hypot(nx, ny)
    on_axis = (np.abs(nx) <= width) | (np.abs(ny) <= width)
    mask = on_axis & (r >= r_min) & (r <= r_max)
    return float(np.sum(sol.field_a1[mask] ** 2) + np.sum(sol.field_a2[mask] ** 2))


def phase_profile(sol: BoundStateSolution, line_offset: int = 1,
                  n_sites: int = 21):
    """Two-contribution phase analysis along the line nx = ny + offset.

    Requires a solution from a two-point giant atom with one contact
    per layer. Each top-layer amplitude on the line splits into the two
    shifted single-contact profiles A*exp(i theta_1) + B*exp(i theta_2)
    with theta in {0, pi}; returns a list of records
    (site, amplitude, delta_theta) with delta_theta = theta_1 - theta_2
    snapped to {0, pi}. A single jump of delta_theta marks the
    interference flip responsible for the chiral pattern.
    """
    emitter = sol.emitter
    if emitter is None or sol.lattice is None:
        raise DecompositionError("solution carries no emitter/lattice metadata")
    if len(emitter.points_in_layer(1)) != 1 or len(emitter.points_in_layer(2)) != 1:
        raise DecompositionError(
            "phase decomposition needs exactly two coupling points, one per layer")
    n_k = sol.field_a1.shape[0]
    lat = sol.lattice
    KY, KX = fft_k_grid(n_k)
    p1 = emitter.points_in_layer(1)[0]
    p2 = emitter.points_in_layer(2)[0]
    a1_l1, _ = _small_atom_k_fields(sol.energy, lat, 1, KX, KY)
    a1_l2, _ = _small_atom_k_fields(sol.energy, lat, 2, KX, KY)
    c1 = _ifft_real(_coupling_phases((p1,), KX, KY) * a1_l1) * sol.c_e
    c2 = _ifft_real(_coupling_phases((p2,), KX, KY) * a1_l2) * sol.c_e
    floor = 1e-13 * max(np.max(np.abs(c1)), np.max(np.abs(c2)))
    oy, ox = sol.origin
    records = []
    for j in range(-(n_sites // 2), n_sites // 2 + 1):
        site = (j + line_offset, j)
        t1 = c1[oy + site[1], ox + site[0]]
        t2 = c2[oy + site[1], ox + site[0]]
        if abs(t1) <= floor or abs(t2) <= floor:
            raise DecompositionError(
                f"vanishing contribution at site {site}; phase undefined")
        th1 = 0.0 if t1 > 0 else np.pi
        th2 = 0.0 if t2 > 0 else np.pi
        delta = abs(th1 - th2)  # 0 or pi
        records.append((site, float(sol.field_a1[oy + site[1], ox + site[0]]),
                        float(delta)))
    return records


def phase_jump_count(records) -> int:
    """Number of delta_theta flips along a phase profile."""
    values = [r[2] for r in records]
    return sum(1 for a, b in zip(values, values[1:]) if a != b)


def chirality_ratio(records) -> float:
    """Summed |amplitude| left of the jump over right of the jump.

    Defined for profiles with exactly one jump.
    """
    values = [r[2] for r in records]
    jumps = [i for i, (a, b) in enumerate(zip(values, values[1:])) if a != b]
    if len(jumps) != 1:
        raise DecompositionError(f"expected exactly one phase jump, found {len(jumps)}")
    cut = jumps[0] + 1
    left = sum(abs(r[1]) for r in records[:cut])
    right = sum(abs(r[1]) for r in records[cut:])
    return left / right
