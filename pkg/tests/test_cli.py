import hashlib
import json

import numpy as np
import pytest

from loveres.cli import main
from loveres.profile import PotentialProfile, load_potential, save_potential
from loveres.resonances import ResonanceSet


def write_free_potential(path, h=1.0):
    grid = np.linspace(0.0, 1.0, 41)
    save_potential(PotentialProfile(grid=grid, values=np.zeros(41),
                                    x_i=1.0, h=h), path)


def write_config(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh)


def test_forward_free_robin(tmp_path):
    write_free_potential(tmp_path / "v.json")
    write_config(tmp_path / "cfg.json", {
        "command": "forward", "potential": str(tmp_path / "v.json"),
        "out": str(tmp_path / "out"), "k_max": 60.0})
    assert main(["--config", str(tmp_path / "cfg.json")]) == 0
    rows = (tmp_path / "out" / "resonances.csv").read_text().strip().splitlines()
    assert len(rows) == 2          # header + exactly one eigenvalue
    assert rows[1].startswith("0.0,1.0,")
    assert "eigenvalue" in rows[1]
    scat = json.loads((tmp_path / "out" / "scattering.json").read_text())
    assert scat["N"] == 1
    assert scat["m"][0] == pytest.approx(0.5, abs=1e-9)
    assert scat["class_report"]["condition3_pass"]


def test_manifest_lists_all_outputs_with_hashes(tmp_path):
    write_free_potential(tmp_path / "v.json")
    write_config(tmp_path / "cfg.json", {
        "command": "forward", "potential": str(tmp_path / "v.json"),
        "out": str(tmp_path / "out"), "k_max": 60.0})
    assert main(["--config", str(tmp_path / "cfg.json")]) == 0
    manifest = json.loads((tmp_path / "out" / "run_manifest.json").read_text())
    assert manifest["command"] == "forward"
    assert manifest["config_hash"].startswith("sha256:")
    outputs = manifest["outputs"]
    assert set(outputs) == {"resonances.csv", "scattering.json",
                            "s_real_axis.csv"}
    for name, digest in outputs.items():
        data = (tmp_path / "out" / name).read_bytes()
        assert digest == "sha256:" + hashlib.sha256(data).hexdigest()


def test_invert_deterministic(tmp_path):
    rs = ResonanceSet.from_zeros([1j], [0.0])
    rs.to_csv(tmp_path / "zeros.csv")
    write_config(tmp_path / "cfg.json", {
        "command": "invert", "zeros": str(tmp_path / "zeros.csv"),
        "x_I": 1.0, "out": str(tmp_path / "out"), "k_max": 60.0,
        "n_grid": 301})
    assert main(["--config", str(tmp_path / "cfg.json")]) == 0
    first = {name: (tmp_path / "out" / name).read_bytes()
             for name in ("potential.json", "diagnostics.json",
                          "potential.csv", "run_manifest.json")}
    assert main(["--config", str(tmp_path / "cfg.json")]) == 0
    for name, blob in first.items():
        assert (tmp_path / "out" / name).read_bytes() == blob
    pot = load_potential(tmp_path / "out" / "potential.json")
    assert np.max(np.abs(pot.values)) < 1e-3    # free data: V = 0


def test_flag_overrides_config(tmp_path):
    rs = ResonanceSet.from_zeros([1j], [0.0])
    rs.to_csv(tmp_path / "zeros.csv")
    write_config(tmp_path / "cfg.json", {
        "command": "forward",              # overridden below
        "zeros": str(tmp_path / "zeros.csv"), "x_I": 1.0,
        "out": str(tmp_path / "out"), "k_max": 60.0, "n_grid": 301})
    assert main(["--config", str(tmp_path / "cfg.json"),
                 "--command", "invert"]) == 0
    assert (tmp_path / "out" / "potential.json").exists()


def test_recover_mu_equal_frequencies_exits_2(tmp_path, capsys):
    write_free_potential(tmp_path / "v.json")
    write_config(tmp_path / "cfg.json", {
        "command": "recover-mu", "potential1": str(tmp_path / "v.json"),
        "potential2": str(tmp_path / "v.json"), "omega1": 1.0, "omega2": 1.0,
        "mu_tail": 1.0, "out": str(tmp_path / "out")})
    assert main(["--config", str(tmp_path / "cfg.json")]) == 2
    assert "distinct frequencies" in capsys.readouterr().err


def test_invalid_region_exits_2(tmp_path):
    write_free_potential(tmp_path / "v.json")
    write_config(tmp_path / "cfg.json", {
        "command": "resonances", "potential": str(tmp_path / "v.json"),
        "region": [2.0, -2.0, -1.0, 1.0], "out": str(tmp_path / "out")})
    assert main(["--config", str(tmp_path / "cfg.json")]) == 2


def test_class_violation_exits_4(tmp_path):
    rs = ResonanceSet.from_zeros([1.0 - 1.0j], [0.0])   # no mirror partner
    rs.to_csv(tmp_path / "zeros.csv")
    write_config(tmp_path / "cfg.json", {
        "command": "invert", "zeros": str(tmp_path / "zeros.csv"),
        "x_I": 1.0, "out": str(tmp_path / "out")})
    assert main(["--config", str(tmp_path / "cfg.json")]) == 4


def test_check_free_robin(tmp_path):
    write_free_potential(tmp_path / "v.json")
    write_config(tmp_path / "cfg.json", {
        "command": "check", "potential": str(tmp_path / "v.json"),
        "out": str(tmp_path / "out"), "seed": 7, "k_max": 60.0,
        "n_samples": 25})
    assert main(["--config", str(tmp_path / "cfg.json")]) == 0
    report = json.loads((tmp_path / "out" / "check.json").read_text())
    assert report["wronskian_max_residual"] < 1e-10
    assert report["seed"] == 7


def test_missing_command_exits_2(tmp_path):
    write_config(tmp_path / "cfg.json", {"out": str(tmp_path / "out")})
    assert main(["--config", str(tmp_path / "cfg.json")]) == 2
