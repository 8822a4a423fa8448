import json
from pathlib import Path

import pytest

from bilattice.cli import main
from bilattice.config import (canonical_json, validate_config,
                              validate_config_dict)
from bilattice.errors import ConfigError


def write_cfg(tmp_path, payload, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(payload), encoding="utf-8")
    return p


# --- config validation --------------------------------------------------------

def test_minimal_config_echoes_canonical(tmp_path):
    p = write_cfg(tmp_path, {"lattice": {"G": 0.5}})
    cfg = validate_config(p)
    assert cfg["lattice"]["G"] == 0.5
    assert cfg["lattice"]["Lx"] == 21  # default filled
    echo = canonical_json(cfg)
    assert echo == canonical_json(json.loads(echo))  # stable round trip


def test_config_rejects_nonnegative_eta(tmp_path):
    p = write_cfg(tmp_path, {"lattice": {"eta": 0.0}})
    with pytest.raises(ConfigError, match="eta"):
        validate_config(p)


def test_config_rejects_negative_nk():
    with pytest.raises(ConfigError):
        validate_config_dict({"numerics": {"n_k": -4}})


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        validate_config_dict({"latice": {}})
    with pytest.raises(ConfigError):
        validate_config_dict({"lattice": {"Lz": 4}})


def test_config_missing_file():
    with pytest.raises(ConfigError):
        validate_config("/nonexistent/path.json")


# --- CLI ------------------------------------------------------------------------

def test_cli_bands_row_count(tmp_path):
    out = tmp_path / "bands"
    code = main(["bands", "--eta", "-1", "--G", "0.25", "--nk", "64",
                 "--out", str(out)])
    assert code == 0
    lines = (out / "bands.csv").read_text().splitlines()
    assert lines[0] == "k_x,k_y,omega_u,omega_l"
    assert len(lines) == 64 * 64 + 1
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["outputs"] == ["bands.csv"]
    assert "inputs_hash" in manifest


def test_cli_determinism(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert main(["dos", "--G", "0.25", "--nk", "64", "--nbins", "32",
                     "--out", str(out)]) == 0
    assert (out1 / "dos.csv").read_bytes() == (out2 / "dos.csv").read_bytes()
    m1 = json.loads((out1 / "manifest.json").read_text())
    m2 = json.loads((out2 / "manifest.json").read_text())
    m1.pop("timestamp"), m2.pop("timestamp")
    m1.pop("wall_time_s"), m2.pop("wall_time_s")
    assert m1 == m2


def test_cli_config_error_exit_code(tmp_path, capsys):
    p = write_cfg(tmp_path, {"lattice": {"eta": 1.0}})
    code = main(["bands", "--config", str(p), "--out", str(tmp_path / "x")])
    assert code == 2
    assert "ERROR config:" in capsys.readouterr().err


def test_cli_numerical_error_exit_code(tmp_path, capsys):
    # sublattice-mixing giant atom without the override
    code = main(["giant", "--points", "[[1,0,0,0.1],[1,1,0,0.1]]",
                 "--nk", "128", "--out", str(tmp_path / "g")])
    assert code == 3
    assert "ERROR numerical:" in capsys.readouterr().err


def test_cli_validate_config_echo(tmp_path, capsys):
    p = write_cfg(tmp_path, {"lattice": {"G": 0.25, "disorder":
                                         {"seed": 3, "W_intra": 0.25}}})
    assert main(["validate-config", str(p)]) == 0
    echoed = json.loads(capsys.readouterr().out)
    assert echoed["lattice"]["disorder"]["seed"] == 3
    assert echoed["lattice"]["boundary"] == "open"


def test_cli_unknown_figure_target(tmp_path, capsys):
    code = main(["reproduce-figure", "fig9", "--out", str(tmp_path / "f")])
    assert code == 2


def test_cli_boundstate_disorder_requires_exact(tmp_path, capsys):
    code = main(["boundstate", "--seed", "1", "--W_intra", "0.25",
                 "--method", "quadrature", "--out", str(tmp_path / "bs")])
    assert code == 2


def test_cli_boundstate_exact_with_disorder(tmp_path):
    out = tmp_path / "bs"
    code = main(["boundstate", "--Lx", "15", "--Ly", "15", "--G", "0.25",
                 "--delta", "0", "--g", "0.1", "--site", "1", "0",
                 "--seed", "4", "--W_intra", "0.25", "--W_inter", "0.0625",
                 "--method", "exact", "--max-radius", "7",
                 "--out", str(out)])
    assert code == 0
    sidecar = json.loads((out / "boundstate.json").read_text())
    assert abs(sidecar["E_BS"]) < 1e-10
    assert sidecar["method"] == "exact_diag"
    rows = (out / "boundstate.csv").read_text().splitlines()
    assert rows[0] == "layer,n_x,n_y,re,im"
    assert len(rows) == 2 * 15 * 15 + 1


def test_cli_entangle_outputs(tmp_path):
    out = tmp_path / "ent"
    code = main(["entangle", "--j-eff", "0.01", "--gamma-rel", "0.01",
                 "--t-max", "120", "--n-times", "121", "--out", str(out)])
    assert code == 0
    rows = (out / "entangle.csv").read_text().splitlines()
    assert rows[0] == "t,fidelity,excitation,trace_dev"
    assert len(rows) == 122
    summary = json.loads((out / "summary.json").read_text())
    assert {"t_star", "f_max", "t_two_level", "t_quarter_exchange"} <= set(summary)
    assert 0.9 < summary["f_max"] < 1.0


def test_cli_spinmodel_geometry_roundtrip(tmp_path):
    geo = tmp_path / "geometry.json"
    out1 = tmp_path / "m1"
    assert main(["spinmodel", "--phase", "trivial", "--n-spins", "8",
                 "--G", "4", "--g", "0.1", "--Lx", "35", "--Ly", "35",
                 "--write-geometry", str(geo), "--out", str(out1)]) == 0
    out2 = tmp_path / "m2"
    assert main(["spinmodel", "--geometry", str(geo), "--G", "4", "--g", "0.1",
                 "--Lx", "35", "--Ly", "35", "--out", str(out2)]) == 0
    c1 = (out1 / "couplings.csv").read_bytes()
    c2 = (out2 / "couplings.csv").read_bytes()
    assert c1 == c2


def test_cli_polarization_from_phase(tmp_path, capsys):
    out = tmp_path / "pol"
    code = main(["polarization", "--phase", "topological", "--G", "4",
                 "--g", "0.1", "--Lx", "35", "--Ly", "35", "--nk", "32",
                 "--out", str(out)])
    assert code == 0
    payload = json.loads((out / "polarization.json").read_text())
    assert (payload["P_x"], payload["P_y"]) == (0.5, 0.5)
