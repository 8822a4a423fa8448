import numpy as np
import pytest

from bilattice.errors import (ConfigError, GaplessError, GaplessFitWarning,
                              GeometryMismatchError, MarkovianWarning)
from bilattice.lattice import BilayerLattice
from bilattice.spin_model import (SSHParams, SpinArray, SpinSite, bloch_f_S,
                                  bipartite_bloch, build_ssh_array,
                                  cross_layer_coupling_table,
                                  effective_couplings, finite_spectrum,
                                  fit_ssh_params, f0,
                                  periodic_superlattice_spectrum,
                                  reference_profile_tables, ssh_bloch,
                                  spin_array_from_records,
                                  wilson_polarization)

G_SSH = 4.0
G_EMIT = 0.1


@pytest.fixture(scope="module")
def lat():
    return BilayerLattice(Lx=35, Ly=35, G=G_SSH)


@pytest.fixture(scope="module")
def topo(lat):
    array = build_ssh_array(12, 4, 2)
    return array, effective_couplings(array, lat, G_EMIT)


@pytest.fixture(scope="module")
def triv(lat):
    array = build_ssh_array(12, 2, 4)
    return array, effective_couplings(array, lat, G_EMIT)


# --- coupling construction ---------------------------------------------------

def test_parity_selection_examples(lat):
    same, cross = reference_profile_tables(lat, G_EMIT)
    c = same.shape[0] // 2
    assert abs(same[c + 1, c + 1]) < 1e-18        # same layer, (1, 1)
    assert abs(cross[c + 0, c + 1]) < 1e-18       # cross layer, (1, 0)
    assert cross[c, c] < 0.0                      # on-site cross coupling


def test_parity_selection_random_pairs():
    lat = BilayerLattice(Lx=21, Ly=21, G=0.25)
    rng = np.random.default_rng(7)
    sites = []
    while len(sites) < 24:
        cand = (int(rng.integers(1, 3)),
                (int(rng.integers(-5, 6)), int(rng.integers(-5, 6))))
        if cand not in sites:
            sites.append(cand)
    array = SpinArray(spins=tuple(SpinSite(l, s) for l, s in sites))
    couplings = effective_couplings(array, lat, 0.02)
    m = couplings.matrix
    scale = np.max(np.abs(m))
    for i, si in enumerate(array.spins):
        for j, sj in enumerate(array.spins):
            if i == j:
                continue
            total = sum(sj.site) - sum(si.site)
            forbidden = (total % 2 == 0) if si.layer == sj.layer else (total % 2 == 1)
            if forbidden:
                assert abs(m[i, j]) < 1e-10 * scale


def test_couplings_hermitian_zero_diagonal(topo):
    _, couplings = topo
    assert np.array_equal(couplings.matrix, couplings.matrix.T)
    assert np.all(np.diag(couplings.matrix) == 0.0)


def test_couplings_markovian_warning():
    lat = BilayerLattice(G=0.25)
    array = build_ssh_array(8, 4, 2)
    with pytest.warns(MarkovianWarning):
        effective_couplings(array, lat, 0.1)  # g = 0.4 G


def test_couplings_range_guard(lat):
    array = build_ssh_array(12, 4, 2)
    with pytest.raises(ConfigError):
        effective_couplings(array, lat, G_EMIT, n_k=128, max_range=40)


# --- bipartite Bloch form ----------------------------------------------------

def test_bloch_f_s_single_entry():
    assert bloch_f_S({(0, 0): 0.3}, 0.7, -0.2) == pytest.approx(0.3)


def test_bloch_f_s_diagonal_pair():
    table = {(1, 1): 0.5, (-1, -1): 0.5}
    rng = np.random.default_rng(3)
    for _ in range(5):
        kx, ky = rng.uniform(-np.pi, np.pi, 2)
        assert bloch_f_S(table, kx, ky) == pytest.approx(np.cos(kx + ky))


def test_bipartite_bloch_spectrum(lat):
    table = cross_layer_coupling_table(lat, G_EMIT, max_range=5)
    rng = np.random.default_rng(4)
    for _ in range(5):
        kx, ky = rng.uniform(-np.pi, np.pi, 2)
        h = bipartite_bloch(table, kx, ky)
        assert np.max(np.abs(h - h.conj().T)) < 1e-15
        evals = np.linalg.eigvalsh(h)
        fs = abs(bloch_f_S(table, kx, ky))
        assert evals == pytest.approx([-fs, fs])


# --- SSH Bloch matrix --------------------------------------------------------

def test_ssh_bloch_strong_bond_limit():
    h = ssh_bloch(SSHParams(0.0, 1.0, 0.0, 0.0), 0.0, 0.0)
    evals = np.linalg.eigvalsh(h)
    assert evals == pytest.approx([-2.0, 0.0, 0.0, 2.0], abs=1e-12)


def test_ssh_bloch_chiral_and_c4():
    params = SSHParams(0.21, 0.87, -0.05, 0.02)
    rng = np.random.default_rng(5)
    for _ in range(6):
        kx, ky = rng.uniform(-np.pi, np.pi, 2)
        e = np.linalg.eigvalsh(ssh_bloch(params, kx, ky))
        assert np.max(np.abs(np.sort(e) + np.sort(-e)[::-1])) < 1e-12
        e_swap = np.linalg.eigvalsh(ssh_bloch(params, ky, kx))
        assert np.max(np.abs(np.sort(e) - np.sort(e_swap))) < 1e-12


def test_ssh_bloch_middle_bands_touch_zero():
    # |f0(kx)| = |f0(ky)| pins two eigenvalues at zero on the BZ diagonal
    params = SSHParams(0.2, 1.0, 0.01, 0.005)
    e = np.linalg.eigvalsh(ssh_bloch(params, 0.43, 0.43))
    assert abs(e[1]) < 1e-12 and abs(e[2]) < 1e-12


# --- parameter fit -----------------------------------------------------------

def test_fit_topological_ordering(topo):
    array, couplings = topo
    params = fit_ssh_params(couplings, array)
    assert params.topological_ordering()
    assert abs(params.t2) > abs(params.t1) > abs(params.t4) > abs(params.t3)


def test_fit_trivial_ordering(triv):
    array, couplings = triv
    params = fit_ssh_params(couplings, array)
    assert abs(params.t1) > abs(params.t2)
    assert not params.topological_ordering()


def test_fit_uniform_warns_gapless(lat):
    array = build_ssh_array(12, 2, 2)
    couplings = effective_couplings(array, lat, G_EMIT)
    with pytest.warns(GaplessFitWarning):
        params = fit_ssh_params(couplings, array)
    assert params.t1 == pytest.approx(params.t2, rel=1e-12)


def test_fit_requires_metadata(lat, topo):
    _, couplings = topo
    bare = SpinArray(spins=couplings.array.spins)
    with pytest.raises(GeometryMismatchError):
        fit_ssh_params(couplings, bare)


# --- finite spectrum ---------------------------------------------------------

def test_finite_spectrum_topological_corners(topo):
    array, couplings = topo
    spec = finite_spectrum(array, couplings)
    assert spec.labels.count("corner") == 4
    corner_idx = [i for i, l in enumerate(spec.labels) if l == "corner"]
    scale = np.max(np.abs(spec.energies))
    assert np.max(np.abs(spec.energies[corner_idx])) < 1e-8 * scale
    assert all(spec.corner_fraction[i] >= 0.6 for i in corner_idx)
    assert spec.labels.count("edge") > 0


def test_finite_spectrum_trivial_has_no_corners(triv):
    array, couplings = triv
    spec = finite_spectrum(array, couplings)
    assert spec.labels.count("corner") == 0


def test_finite_spectrum_symmetric(topo):
    _, couplings = topo
    evals = np.linalg.eigvalsh(couplings.matrix)
    assert np.max(np.abs(np.sort(evals) + np.sort(-evals)[::-1])) < 1e-10


def test_finite_spectrum_labels_exhaustive(topo):
    array, couplings = topo
    spec = finite_spectrum(array, couplings)
    assert set(spec.labels) <= {"corner", "edge", "bulk"}
    assert len(spec.labels) == len(array)


def test_finite_spectrum_needs_grid(lat):
    spins = tuple(SpinSite(1, (2 * i, 0)) for i in range(10))
    array = SpinArray(spins=spins)
    couplings = effective_couplings(array, lat, G_EMIT)
    with pytest.raises(GeometryMismatchError):
        finite_spectrum(array, couplings)


def test_periodic_array_matches_bloch_bands(lat):
    # independent oracle: assemble the 4-band Bloch matrix from the same
    # coupling tables and sample it on the commensurate grid
    array = build_ssh_array(16, 4, 2)
    evals = np.sort(periodic_superlattice_spectrum(array, lat, G_EMIT))

    same, cross = reference_profile_tables(lat, G_EMIT, 256)
    c = same.shape[0] // 2
    a, b = 4, 2
    cell = a + b
    n_cells = 8
    period = cell * n_cells
    # cell basis: (0,0) L1, (a,0) L2, (0,a) L2, (a,a) L1
    basis = [((0, 0), 1), ((a, 0), 2), ((0, a), 2), ((a, a), 1)]

    def bloch(kbar):
        h = np.zeros((4, 4), dtype=complex)
        for s1, (p1, l1) in enumerate(basis):
            for s2, (p2, l2) in enumerate(basis):
                for mx in range(-3, 4):
                    for my in range(-3, 4):
                        dx = p2[0] - p1[0] + mx * cell
                        dy = p2[1] - p1[1] + my * cell
                        if max(abs(dx), abs(dy)) > 10 or (s1 == s2 and mx == 0 and my == 0):
                            continue
                        if l1 == l2:
                            v = same[c + dy, c + dx] * (1 if l1 == 1 else -1)
                        else:
                            v = cross[c + dy, c + dx]
                        h[s1, s2] += v * np.exp(1j * (kbar[0] * mx + kbar[1] * my))
        return h

    ks = 2.0 * np.pi * np.arange(n_cells) / n_cells
    oracle = []
    for kx in ks:
        for ky in ks:
            oracle.extend(np.linalg.eigvalsh(bloch((kx, ky))))
    oracle = np.sort(np.asarray(oracle))
    scale = np.max(np.abs(oracle))
    assert np.max(np.abs(evals - oracle)) < 1e-12 * max(scale, 1.0) + 1e-18


# --- Wilson polarization -----------------------------------------------------

def test_polarization_phases(topo, triv):
    t_params = fit_ssh_params(topo[1], topo[0])
    v_params = fit_ssh_params(triv[1], triv[0])
    assert wilson_polarization(t_params, n_k=64) == (0.5, 0.5)
    assert wilson_polarization(v_params, n_k=64) == (0.0, 0.0)


def test_polarization_limits():
    assert wilson_polarization(SSHParams(0.0, 1.0, 0.0, 0.0), n_k=32) == (0.5, 0.5)
    assert wilson_polarization(SSHParams(1.0, 0.0, 0.0, 0.0), n_k=32) == (0.0, 0.0)


def test_polarization_convergence(topo):
    params = fit_ssh_params(topo[1], topo[0])
    p64 = wilson_polarization(params, n_k=64)
    p128 = wilson_polarization(params, n_k=128)
    assert abs(p64[0] - p128[0]) < 1e-4
    assert abs(p64[1] - p128[1]) < 1e-4


def test_polarization_gapless_rejected():
    # an undimerized chain closes the occupied-band gap
    with pytest.raises(GaplessError):
        wilson_polarization(SSHParams(0.5, 0.5, 0.0, 0.0), n_k=32)


# --- geometry builders -------------------------------------------------------

def test_build_ssh_array_fits_reference_lattice():
    array = build_ssh_array(12, 4, 2)
    span = max(abs(s.site[0]) for s in array.spins)
    assert 2 * span + 1 <= 35
    layers = {(s.site): s.layer for s in array.spins}
    assert len(array) == 144
    # checkerboard: x-neighbours along a row alternate layers
    rows = sorted({s.site[1] for s in array.spins})
    xs = sorted({s.site[0] for s in array.spins})
    for y in rows[:2]:
        seq = [layers[(x, y)] for x in xs]
        assert all(a != b for a, b in zip(seq, seq[1:]))


def test_build_ssh_array_validation():
    with pytest.raises(ConfigError):
        build_ssh_array(11, 4, 2)
    with pytest.raises(ConfigError):
        build_ssh_array(12, 3, 2)


def test_spin_array_duplicate_rejected():
    with pytest.raises(ConfigError):
        SpinArray(spins=(SpinSite(1, (0, 0)), SpinSite(1, (0, 0))))


def test_spin_array_from_records_infers_grid():
    records = [{"layer": 1 if (i + j) % 2 == 0 else 2, "nx": 2 * i, "ny": 2 * j}
               for i in range(8) for j in range(8)]
    array = spin_array_from_records(records)
    assert array.grid_shape == (8, 8)
