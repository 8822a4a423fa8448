"""Command-line entry point.

One executable dispatches every computation and writes deterministic
CSV/JSON artifacts plus a manifest (config hash, package version, wall
time). Exit codes: 0 success, 2 configuration error, 3 numerical
failure. Errors print one machine-parsable line ("ERROR <kind>: ...")
before any detail.

Figure targets (reproduce-figure): fig1b, fig2, fig3, fig4d, fig5,
fig6, fig7b regenerate the data behind the reference plots; plotting
itself stays out of scope (see docs/plotting.md).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .bound_state import (CouplingPoint, EmitterConfig,
                          bs_exact_diagonalization, bs_realspace_profile)
from .config import canonical_json, validate_config, validate_config_dict
from .dynamics import EntangleSetup, lindblad_evolve, protocol_summary
from .errors import BilatticeError, ConfigError, NumericalError
from .giant_atom import giant_bs_profile, phase_profile
from .lattice import (BilayerLattice, DisorderRealization, band_structure,
                      density_of_states, sorted_k_grid)
from .output import write_csv, write_json, write_manifest, write_solution
from .spin_model import (SpinArray, build_ssh_array, effective_couplings,
                         finite_spectrum, fit_ssh_params,
                         spin_array_from_records, wilson_polarization,
                         SSHParams)

FIGURE_TARGETS = ("fig1b", "fig2", "fig3", "fig4d", "fig5", "fig6", "fig7b")


def _add_lattice_flags(p):
    p.add_argument("--Lx", type=int)
    p.add_argument("--Ly", type=int)
    p.add_argument("--J", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--G", type=float)
    p.add_argument("--boundary", choices=["open", "periodic"])
    p.add_argument("--seed", type=int)
    p.add_argument("--W_intra", type=float)
    p.add_argument("--W_inter", type=float)
    p.add_argument("--W_diag", type=float)


def _add_common_flags(p):
    p.add_argument("--config", type=str, help="JSON config file; flags override")
    p.add_argument("--out", type=str, help="output directory")
    p.add_argument("--nk", type=int, help="momentum grid size n_k")
    p.add_argument("--nbins", type=int, help="histogram bins n_bins")
    _add_lattice_flags(p)


def _merge_config(args, subcommand) -> dict:
    cfg = validate_config(args.config) if args.config else validate_config_dict({})
    cfg["subcommand"] = subcommand
    lat = cfg["lattice"]
    for key in ("Lx", "Ly", "J", "eta", "G", "boundary"):
        val = getattr(args, key, None)
        if val is not None:
            lat[key] = val
    dis_keys = {k: getattr(args, k, None) for k in ("seed", "W_intra", "W_inter", "W_diag")}
    if any(v is not None for v in dis_keys.values()):
        dis = lat.get("disorder") or {"seed": 0}
        for k, v in dis_keys.items():
            if v is not None:
                dis[k] = v
        lat["disorder"] = dis
    num = cfg["numerics"]
    if getattr(args, "nk", None) is not None:
        num["n_k"] = args.nk
    if getattr(args, "nbins", None) is not None:
        num["n_bins"] = args.nbins
    if getattr(args, "g", None) is not None:
        num["g"] = args.g
    if getattr(args, "out", None):
        cfg["output_dir"] = args.out
    cfg.setdefault("output_dir", f"runs/{subcommand}")
    return validate_config_dict(cfg)


def _lattice_from_config(cfg: dict) -> tuple[BilayerLattice, DisorderRealization | None]:
    lb = cfg["lattice"]
    lat = BilayerLattice(Lx=lb["Lx"], Ly=lb["Ly"], J=lb["J"], eta=lb["eta"],
                         G=lb["G"], boundary=lb["boundary"])
    dis = None
    if lb.get("disorder"):
        d = lb["disorder"]
        dis = DisorderRealization.generate(
            lat, d["seed"], d.get("W_intra", 0.0), d.get("W_inter", 0.0),
            d.get("W_diag", 0.0))
    return lat, dis


def _band_rows(lat, n_k):
    bs = band_structure(lat, n_k)
    for iy in range(n_k):
        for ix in range(n_k):
            yield (bs.kx[ix], bs.ky[iy], bs.omega_u[iy, ix], bs.omega_l[iy, ix])


def cmd_bands(args) -> int:
    cfg = _merge_config(args, "bands")
    lat, _ = _lattice_from_config(cfg)
    n_k = cfg["numerics"]["n_k"]
    t0 = time.time()
    out = Path(cfg["output_dir"])
    path = write_csv(out / "bands.csv", ("k_x", "k_y", "omega_u", "omega_l"),
                     _band_rows(lat, n_k))
    write_manifest(out, cfg, [path], time.time() - t0)
    return 0


def cmd_dos(args) -> int:
    cfg = _merge_config(args, "dos")
    lat, _ = _lattice_from_config(cfg)
    t0 = time.time()
    centers, dens = density_of_states(lat, cfg["numerics"]["n_k"],
                                      cfg["numerics"]["n_bins"])
    out = Path(cfg["output_dir"])
    path = write_csv(out / "dos.csv", ("energy_bin_center", "dos"),
                     zip(centers, dens))
    write_manifest(out, cfg, [path], time.time() - t0)
    return 0


def _emitter_from_config(cfg, args) -> EmitterConfig:
    block = cfg.get("emitter") or {}
    delta = block.get("delta", 0.0)
    if getattr(args, "delta", None) is not None:
        delta = args.delta
    points = block.get("points")
    if getattr(args, "site", None) is not None:
        layer = getattr(args, "layer", None) or 1
        g = cfg["numerics"].get("g", 0.1)
        points = [[layer, args.site[0], args.site[1], g]]
    if not points:
        points = [[1, 0, 0, cfg["numerics"].get("g", 0.1)]]
    pts = tuple(CouplingPoint(int(p[0]), (int(p[1]), int(p[2])), float(p[3]))
                for p in points)
    return EmitterConfig(delta=delta, points=pts)


def cmd_boundstate(args) -> int:
    cfg = _merge_config(args, "boundstate")
    lat, dis = _lattice_from_config(cfg)
    emitter = _emitter_from_config(cfg, args)
    cfg["emitter"] = {"delta": emitter.delta,
                      "points": [[p.layer, p.site[0], p.site[1], p.g]
                                 for p in emitter.points]}
    t0 = time.time()
    out = Path(cfg["output_dir"])
    if args.method == "quadrature":
        if dis is not None:
            raise ConfigError("disorder requires --method exact")
        sol = bs_realspace_profile(emitter, lat, n_k=cfg["numerics"]["n_k"])
    else:
        sol = bs_exact_diagonalization(emitter, lat, dis)
    paths = write_solution(out, "boundstate", sol, cfg,
                           max_radius=args.max_radius)
    write_manifest(out, cfg, paths, time.time() - t0)
    return 0


def _parse_points(raw: str):
    if Path(raw).exists():
        raw = Path(raw).read_text(encoding="utf-8")
    try:
        data = json.loads(raw)
        return [[int(p[0]), int(p[1]), int(p[2]), float(p[3])] for p in data]
    except (json.JSONDecodeError, TypeError, IndexError, ValueError) as exc:
        raise ConfigError(f"--points must be JSON [[layer,nx,ny,g],...]: {exc}")


def cmd_giant(args) -> int:
    cfg = _merge_config(args, "giant")
    lat, dis = _lattice_from_config(cfg)
    if dis is not None:
        raise ConfigError("giant profiles are quadrature-based; no disorder")
    points = _parse_points(args.points)
    emitter = EmitterConfig(
        delta=0.0, points=tuple(CouplingPoint(p[0], (p[1], p[2]), p[3])
                                for p in points))
    cfg["emitter"] = {"delta": 0.0, "points": points}
    t0 = time.time()
    out = Path(cfg["output_dir"])
    sol = giant_bs_profile(emitter, lat, n_k=cfg["numerics"]["n_k"],
                           allow_parity_violation=args.force)
    paths = list(write_solution(out, "giant", sol, cfg,
                                max_radius=args.max_radius))
    paths.append(write_json(out / "points.json", {"points": points}))
    write_manifest(out, cfg, paths, time.time() - t0)
    return 0


def _spin_array(args, cfg) -> SpinArray:
    if getattr(args, "geometry", None):
        records = json.loads(Path(args.geometry).read_text(encoding="utf-8"))
        jsonschema_records = [{"layer": r["layer"], "nx": r["nx"], "ny": r["ny"]}
                              for r in records]
        cfg["spins"] = jsonschema_records
        return spin_array_from_records(records)
    phase = getattr(args, "phase", None) or "topological"
    n_spins = getattr(args, "n_spins", None) or 12
    a, b = {"topological": (4, 2), "trivial": (2, 4), "uniform": (2, 2)}[phase]
    return build_ssh_array(n_spins, a, b)


def cmd_spinmodel(args) -> int:
    cfg = _merge_config(args, "spinmodel")
    lat, _ = _lattice_from_config(cfg)
    array = _spin_array(args, cfg)
    g = cfg["numerics"].get("g", 0.1)
    t0 = time.time()
    out = Path(cfg["output_dir"])
    couplings = effective_couplings(array, lat, g, n_k=cfg["numerics"]["n_k"])
    rows = []
    m = couplings.matrix
    for i in range(len(array)):
        for j in range(i + 1, len(array)):
            if m[i, j] != 0.0:
                rows.append((i, j, m[i, j]))
    paths = [write_csv(out / "couplings.csv", ("i", "j", "g_ij"), rows)]
    geometry = [{"layer": s.layer, "nx": s.site[0], "ny": s.site[1]}
                for s in array.spins]
    paths.append(write_json(out / "geometry.json", geometry))
    if args.write_geometry:
        paths.append(write_json(args.write_geometry, geometry))
    write_manifest(out, cfg, paths, time.time() - t0)
    return 0


def _spectrum_rows(spec):
    for i in range(len(spec.energies)):
        yield (i, spec.energies[i], spec.labels[i], spec.ipr[i],
               spec.boundary_fraction[i], spec.corner_fraction[i])


def _mode_rows(array, spec, label):
    idx = [i for i, lbl in enumerate(spec.labels) if lbl == label]
    if not idx:
        return None
    # the example state with the largest region weight
    frac = spec.corner_fraction if label == "corner" else spec.boundary_fraction
    state = spec.states[:, idx[int(np.argmax(frac[idx]))]]
    for s, amp in zip(array.spins, state):
        yield (s.layer, s.site[0], s.site[1], amp, amp ** 2)


def cmd_ssh_spectrum(args) -> int:
    cfg = _merge_config(args, "ssh-spectrum")
    lat, _ = _lattice_from_config(cfg)
    array = _spin_array(args, cfg)
    g = cfg["numerics"].get("g", 0.1)
    t0 = time.time()
    out = Path(cfg["output_dir"])
    couplings = effective_couplings(array, lat, g, n_k=cfg["numerics"]["n_k"])
    spec = finite_spectrum(array, couplings)
    paths = [write_csv(out / "spectrum.csv",
                       ("index", "energy", "label", "ipr",
                        "boundary_fraction", "corner_fraction"),
                       _spectrum_rows(spec))]
    params = fit_ssh_params(couplings, array)
    paths.append(write_json(out / "ssh_params.json", {
        "t1": params.t1, "t2": params.t2, "t3": params.t3, "t4": params.t4,
        "topological_ordering": params.topological_ordering()}))
    if args.dump_modes:
        for label in ("edge", "corner"):
            rows = _mode_rows(array, spec, label)
            if rows is not None:
                paths.append(write_csv(out / f"{label}_mode.csv",
                                       ("layer", "n_x", "n_y", "amplitude",
                                        "weight"), rows))
    write_manifest(out, cfg, paths, time.time() - t0)
    return 0


def cmd_polarization(args) -> int:
    cfg = _merge_config(args, "polarization")
    t0 = time.time()
    out = Path(cfg["output_dir"])
    if args.t is not None:
        params = SSHParams(*args.t)
    else:
        lat, _ = _lattice_from_config(cfg)
        array = _spin_array(args, cfg)
        g = cfg["numerics"].get("g", 0.1)
        couplings = effective_couplings(array, lat, g,
                                        n_k=cfg["numerics"]["n_k"])
        params = fit_ssh_params(couplings, array)
    n_k = getattr(args, "nk", None) or 64
    px, py = wilson_polarization(params, n_k=n_k)
    payload = {"P_x": px, "P_y": py,
               "params": {"t1": params.t1, "t2": params.t2,
                          "t3": params.t3, "t4": params.t4},
               "n_k": n_k}
    paths = [write_json(out / "polarization.json", payload)]
    write_manifest(out, cfg, paths, time.time() - t0)
    print(canonical_json(payload), end="")
    return 0


def _entangle_setup(args, cfg) -> EntangleSetup:
    if args.j_eff is not None:
        j_eff = args.j_eff
    else:
        from .spin_model import reference_profile_tables

        lat, _ = _lattice_from_config(cfg)
        g = cfg["numerics"].get("g", 0.1)
        n = args.ring
        same, _ = reference_profile_tables(lat, g, cfg["numerics"]["n_k"])
        c = same.shape[0] // 2
        j_eff = float(same[c + n + 1, c + n])  # spoke site (n, n+1), layer 1
    gamma = args.gamma if args.gamma is not None else 0.0
    if args.gamma_rel is not None:
        gamma = args.gamma_rel * abs(j_eff)
    t_grid = None
    if args.t_max is not None:
        t_grid = np.linspace(0.0, args.t_max, args.n_times)
    return EntangleSetup(j_eff=j_eff, n_spokes=args.spokes, gamma=gamma,
                         t_grid=t_grid)


def cmd_entangle(args) -> int:
    cfg = _merge_config(args, "entangle")
    setup = _entangle_setup(args, cfg)
    t0 = time.time()
    out = Path(cfg["output_dir"])
    result = lindblad_evolve(setup)
    paths = [write_csv(out / "entangle.csv",
                       ("t", "fidelity", "excitation", "trace_dev"),
                       zip(result.times, result.fidelity, result.excitation,
                           result.trace_dev))]
    summary = protocol_summary(setup)
    paths.append(write_json(out / "summary.json", summary))
    write_manifest(out, cfg, paths, time.time() - t0)
    return 0


def cmd_validate_config(args) -> int:
    cfg = validate_config(args.path)
    print(canonical_json(cfg), end="")
    return 0


# ---------------------------------------------------------------------------
# figure reproduction


def _panel_rows(sol, layer, max_radius=20):
    nx, ny = sol.site_coordinates()
    fld = sol.field_a1 if layer == 1 else sol.field_a2
    mask = (np.abs(nx) <= max_radius) & (np.abs(ny) <= max_radius)
    for x, y, v in zip(nx[mask].ravel(), ny[mask].ravel(), fld[mask].ravel()):
        yield (int(x), int(y), v, 0.0)


def _fig1b(out, cfg):
    lat = BilayerLattice(eta=-1.0, G=0.25)
    return [write_csv(out / "fig1b_bands.csv",
                      ("k_x", "k_y", "omega_u", "omega_l"),
                      _band_rows(lat, 256))]


def _fig2(out, cfg):
    lat = BilayerLattice(Lx=41, Ly=41, eta=-1.0, G=0.25)
    emitter = EmitterConfig.small_atom(0.0, 1, (0, 0), 0.1)
    clean = bs_realspace_profile(emitter, lat, n_k=512)
    dis = DisorderRealization.generate(lat, seed=7, w_intra=0.25,
                                       w_inter=0.25 / 4)
    rough = bs_exact_diagonalization(emitter, lat, dis)
    header = ("n_x", "n_y", "re", "im")
    return [
        write_csv(out / "fig2a_field_a1_clean.csv", header, _panel_rows(clean, 1)),
        write_csv(out / "fig2b_field_a2_clean.csv", header, _panel_rows(clean, 2)),
        write_csv(out / "fig2c_field_a1_disordered.csv", header, _panel_rows(rough, 1)),
        write_csv(out / "fig2d_field_a2_disordered.csv", header, _panel_rows(rough, 2)),
    ]


def _fig3(out, cfg):
    lat = BilayerLattice(eta=-1.0, G=0.25)
    two = EmitterConfig(0.0, (CouplingPoint(1, (0, 0), 0.1),
                              CouplingPoint(1, (1, 1), 0.1)))
    diag4 = EmitterConfig(0.0, (CouplingPoint(1, (1, 1), 0.1),
                                CouplingPoint(1, (1, -1), -0.1),
                                CouplingPoint(1, (-1, 1), -0.1),
                                CouplingPoint(1, (-1, -1), 0.1)))
    s2 = giant_bs_profile(two, lat, n_k=512)
    s4 = giant_bs_profile(diag4, lat, n_k=512)
    header = ("n_x", "n_y", "re", "im")
    return [
        write_csv(out / "fig3a_two_point_a1.csv", header, _panel_rows(s2, 1)),
        write_csv(out / "fig3b_two_point_a2.csv", header, _panel_rows(s2, 2)),
        write_csv(out / "fig3c_four_point_a1.csv", header, _panel_rows(s4, 1)),
        write_csv(out / "fig3d_four_point_a2.csv", header, _panel_rows(s4, 2)),
    ]


def _fig4d(out, cfg):
    lat = BilayerLattice(Lx=35, Ly=35, eta=-1.0, G=4.0)
    paths = []
    for phase, (a, b) in (("topological", (4, 2)), ("trivial", (2, 4))):
        array = build_ssh_array(12, a, b)
        couplings = effective_couplings(array, lat, 0.1)
        spec = finite_spectrum(array, couplings)
        paths.append(write_csv(out / f"fig4d_spectrum_{phase}.csv",
                               ("index", "energy", "label", "ipr",
                                "boundary_fraction", "corner_fraction"),
                               _spectrum_rows(spec)))
        if phase == "topological":
            for label, stem in (("edge", "fig4e_edge_mode"),
                                ("corner", "fig4f_corner_mode")):
                rows = _mode_rows(array, spec, label)
                if rows is not None:
                    paths.append(write_csv(out / f"{stem}.csv",
                                           ("layer", "n_x", "n_y",
                                            "amplitude", "weight"), rows))
    return paths


def _fig5(out, cfg):
    lat = BilayerLattice(Lx=41, Ly=41, eta=-4.0, G=1.0)
    paths = [write_csv(out / "fig5a_bands.csv",
                       ("k_x", "k_y", "omega_u", "omega_l"),
                       _band_rows(lat, 256))]
    centers, dens = density_of_states(lat, 512, 200)
    paths.append(write_csv(out / "fig5b_dos.csv", ("energy_bin_center", "dos"),
                           zip(centers, dens)))
    dis = DisorderRealization.generate(lat, seed=11, w_intra=0.05,
                                       w_inter=0.05)
    header = ("n_x", "n_y", "re", "im")
    for delta, panels in ((0.0, ("c", "d")), (0.5, ("e", "f"))):
        emitter = EmitterConfig.small_atom(delta, 1, (0, 0), 0.1)
        sol = bs_exact_diagonalization(emitter, lat, dis)
        paths.append(write_csv(out / f"fig5{panels[0]}_field_a1.csv", header,
                               _panel_rows(sol, 1)))
        paths.append(write_csv(out / f"fig5{panels[1]}_field_a2.csv", header,
                               _panel_rows(sol, 2)))
    return paths


def _fig6(out, cfg):
    lat = BilayerLattice(eta=-1.0, G=0.25)
    cross = EmitterConfig(0.0, tuple(CouplingPoint(1, s, 0.1) for s in
                                     ((1, 0), (-1, 0), (0, 1), (0, -1))))
    duo = EmitterConfig(0.0, (CouplingPoint(1, (0, 0), 0.1),
                              CouplingPoint(2, (1, 0), 0.1)))
    sc = giant_bs_profile(cross, lat, n_k=512)
    sd = giant_bs_profile(duo, lat, n_k=512)
    header = ("n_x", "n_y", "re", "im")
    paths = [
        write_csv(out / "fig6a_cross_a1.csv", header, _panel_rows(sc, 1)),
        write_csv(out / "fig6b_cross_a2.csv", header, _panel_rows(sc, 2)),
        write_csv(out / "fig6c_two_layer_a1.csv", header, _panel_rows(sd, 1)),
        write_csv(out / "fig6d_two_layer_a2.csv", header, _panel_rows(sd, 2)),
    ]
    records = phase_profile(sd, line_offset=1, n_sites=21)
    paths.append(write_csv(out / "fig6ef_line_profile.csv",
                           ("n_x", "n_y", "amplitude", "delta_theta"),
                           ((s[0], s[1], amp, dth) for (s, amp, dth) in records)))
    return paths


def _fig7b(out, cfg):
    from .spin_model import reference_profile_tables

    lat = BilayerLattice(eta=-1.0, G=0.25)
    same, _ = reference_profile_tables(lat, 0.1, 512)
    c = same.shape[0] // 2
    j_eff = float(same[c + 3, c + 2])  # spoke (2, 3) for ring parameter n = 2
    paths = []
    for tag, gamma in (("ideal", 0.0), ("dissipative", 0.01 * abs(j_eff))):
        setup = EntangleSetup(j_eff=j_eff, n_spokes=8, gamma=gamma)
        result = lindblad_evolve(setup)
        paths.append(write_csv(out / f"fig7b_{tag}.csv",
                               ("t", "fidelity", "excitation", "trace_dev"),
                               zip(result.times, result.fidelity,
                                   result.excitation, result.trace_dev)))
    setup = EntangleSetup(j_eff=j_eff, n_spokes=8, gamma=0.0)
    paths.append(write_json(out / "fig7b_summary.json", protocol_summary(setup)))
    return paths


def cmd_reproduce_figure(args) -> int:
    cfg = _merge_config(args, "reproduce-figure")
    target = args.target.lower()
    aliases = {"fig4e": "fig4d", "fig4f": "fig4d"}
    target = aliases.get(target, target)
    if target not in FIGURE_TARGETS:
        raise ConfigError(f"unknown figure target {args.target!r}; "
                          f"choose from {FIGURE_TARGETS}")
    cfg["subcommand"] = f"reproduce-figure:{target}"
    out = Path(args.out) if args.out else Path(f"runs/{target}")
    t0 = time.time()
    runner = {"fig1b": _fig1b, "fig2": _fig2, "fig3": _fig3, "fig4d": _fig4d,
              "fig5": _fig5, "fig6": _fig6, "fig7b": _fig7b}[target]
    paths = runner(out, cfg)
    write_manifest(out, cfg, paths, time.time() - t0)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bilattice",
        description="Bilayer square-lattice bath simulations: bands, bound "
                    "states, spin models, entanglement dynamics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bands", help="hybridized band structure CSV")
    _add_common_flags(p)
    p.set_defaults(func=cmd_bands)

    p = sub.add_parser("dos", help="density of states CSV")
    _add_common_flags(p)
    p.set_defaults(func=cmd_dos)

    p = sub.add_parser("boundstate", help="small-atom bound state fields")
    _add_common_flags(p)
    p.add_argument("--delta", type=float)
    p.add_argument("--g", type=float, help="emitter-bath coupling")
    p.add_argument("--layer", type=int, choices=[1, 2])
    p.add_argument("--site", type=int, nargs=2, metavar=("NX", "NY"))
    p.add_argument("--method", choices=["quadrature", "exact"],
                   default="quadrature")
    p.add_argument("--max-radius", type=int, default=20,
                   help="field dump radius (sites)")
    p.set_defaults(func=cmd_boundstate)

    p = sub.add_parser("giant", help="multi-point bound state fields")
    _add_common_flags(p)
    p.add_argument("--points", required=True,
                   help="JSON [[layer,nx,ny,g],...] inline or a file path")
    p.add_argument("--force", action="store_true",
                   help="allow sublattice-mixing point sets")
    p.add_argument("--max-radius", type=int, default=20)
    p.set_defaults(func=cmd_giant)

    p = sub.add_parser("spinmodel", help="effective spin-spin couplings")
    _add_common_flags(p)
    p.add_argument("--g", type=float)
    p.add_argument("--geometry", type=str, help="JSON spin records file")
    p.add_argument("--phase", choices=["topological", "trivial", "uniform"])
    p.add_argument("--n-spins", type=int, dest="n_spins")
    p.add_argument("--write-geometry", type=str,
                   help="also write the built geometry JSON here")
    p.set_defaults(func=cmd_spinmodel)

    p = sub.add_parser("ssh-spectrum", help="finite SSH array spectrum")
    _add_common_flags(p)
    p.add_argument("--g", type=float)
    p.add_argument("--geometry", type=str)
    p.add_argument("--phase", choices=["topological", "trivial", "uniform"])
    p.add_argument("--n-spins", type=int, dest="n_spins")
    p.add_argument("--dump-modes", action="store_true",
                   help="write example edge/corner eigenvectors")
    p.set_defaults(func=cmd_ssh_spectrum)

    p = sub.add_parser("polarization", help="Wilson-loop polarization")
    _add_common_flags(p)
    p.add_argument("--g", type=float)
    p.add_argument("--geometry", type=str)
    p.add_argument("--phase", choices=["topological", "trivial", "uniform"])
    p.add_argument("--n-spins", type=int, dest="n_spins")
    p.add_argument("--t", type=float, nargs=4, metavar=("T1", "T2", "T3", "T4"),
                   help="explicit hoppings instead of a fitted geometry")
    p.set_defaults(func=cmd_polarization)

    p = sub.add_parser("entangle", help="star-coupling entanglement protocol")
    _add_common_flags(p)
    p.add_argument("--g", type=float)
    p.add_argument("--j-eff", type=float, dest="j_eff",
                   help="effective coupling; skips the lattice computation")
    p.add_argument("--ring", type=int, default=2,
                   help="diagonal ring parameter n of the spoke layout")
    p.add_argument("--spokes", type=int, default=8)
    p.add_argument("--gamma", type=float, help="decay rate (absolute)")
    p.add_argument("--gamma-rel", type=float, dest="gamma_rel",
                   help="decay rate in units of J_eff")
    p.add_argument("--t-max", type=float, dest="t_max")
    p.add_argument("--n-times", type=int, dest="n_times", default=801)
    p.set_defaults(func=cmd_entangle)

    p = sub.add_parser("reproduce-figure",
                       help="regenerate the data behind a reference figure")
    p.add_argument("target", help="|".join(FIGURE_TARGETS))
    p.add_argument("--out", type=str)
    p.add_argument("--config", type=str)
    p.set_defaults(func=cmd_reproduce_figure)

    p = sub.add_parser("validate-config", help="validate and echo a config")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate_config)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"ERROR config: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"ERROR numerical: {exc}", file=sys.stderr)
        return 3
    except BilatticeError as exc:
        print(f"ERROR internal: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
