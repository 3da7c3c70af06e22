import json
import os
import subprocess
import sys

import numpy as np
import pytest

from sqvdp.artifacts import read_artifact_csv
from sqvdp.cli import main


def run_cli(args, tmp_path):
    return main(args + ["--out", str(tmp_path)])


def read_json(path):
    with open(path) as handle:
        return json.load(handle)


def test_semiclassical_free_limit_constant(tmp_path):
    code = run_cli(
        ["semiclassical", "--eta-ratio", "0", "--nex", "50", "--modes", "4"],
        tmp_path,
    )
    assert code == 0
    meta, cols = read_artifact_csv(tmp_path / "cn_table.csv")
    assert meta["tool"] == "sqvdp" and "version" in meta
    assert abs(cols["c_n"][0] - 0.375) < 1e-8
    assert list(cols["n"]) == [1.0, 2.0, 3.0, 4.0]


def test_semiclassical_bistable_writes_kramers(tmp_path):
    code = run_cli(["semiclassical", "--eta-ratio", "2", "--nex", "10"], tmp_path)
    assert code == 0
    doc = read_json(tmp_path / "kramers.json")
    assert doc["gamma_gap"] == pytest.approx(0.0177541, rel=1e-4)
    assert doc["meta"]["params"]["n_ex"] == 10.0


def test_ep_semiclassical_subcommand(tmp_path):
    code = run_cli(
        ["ep", "--method", "semiclassical", "--delta-ratio", "0.1", "--nex", "20"],
        tmp_path,
    )
    assert code == 0
    doc = read_json(tmp_path / "ep.json")
    assert doc["eta_ep_over_eta_c"] > 1.0


def test_meanfield_subcommand(tmp_path):
    code = run_cli(
        ["meanfield", "--nex", "10", "--eta-ratio", "2", "--t-end", "20"], tmp_path
    )
    assert code == 0
    doc = read_json(tmp_path / "bifurcation.json")
    assert doc["regime"] == "bistable"
    meta, cols = read_artifact_csv(tmp_path / "meanfield_trajectory.csv")
    assert set(cols) == {"t", "re_alpha", "im_alpha", "N", "phi"}


def test_spectrum_subcommand(tmp_path):
    code = run_cli(
        ["spectrum", "--nex", "2", "--eta-ratio", "0.4", "--cutoff", "14",
         "--n-eigs", "40"],
        tmp_path,
    )
    assert code == 0
    doc = read_json(tmp_path / "spectrum.json")
    assert doc["cutoff"] == 14
    eigs = doc["eigenvalues"]
    assert len(eigs) == 40
    assert abs(eigs[0][0]) < 1e-9 and eigs[0][2] == 1


def test_occupation_subcommand(tmp_path):
    code = run_cli(
        ["occupation", "--nex-list", "2,4", "--grid", "0:1.5:3", "--cutoff", "28"],
        tmp_path,
    )
    assert code == 0
    meta, cols = read_artifact_csv(tmp_path / "occupation.csv")
    assert len(cols["n_ex"]) == 6


def test_langevin_determinism_byte_identical(tmp_path):
    args = ["langevin", "--process", "intensity", "--nex", "5", "--eta-ratio", "0.5",
            "--n-steps", "2000", "--n-traj", "20", "--seed", "7"]
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert main(args + ["--out", str(out_a)]) == 0
    assert main(args + ["--out", str(out_b)]) == 0
    assert (out_a / "langevin_intensity.csv").read_bytes() == (
        out_b / "langevin_intensity.csv"
    ).read_bytes()


def test_langevin_raw_dump(tmp_path):
    code = run_cli(
        ["langevin", "--process", "phase", "--nex", "5", "--eta-ratio", "0.5",
         "--n-steps", "1000", "--n-traj", "50", "--store-every", "100",
         "--dump-raw"],
        tmp_path,
    )
    assert code == 0
    meta, cols = read_artifact_csv(tmp_path / "langevin_phase_raw.csv")
    assert len(cols["t"]) == 50 * 11


def test_dynamics_rotating_subcommand(tmp_path):
    code = run_cli(
        ["dynamics", "--nex", "2", "--eta-ratio", "0.4", "--t-end", "10",
         "--n-times", "21"],
        tmp_path,
    )
    assert code == 0
    meta, cols = read_artifact_csv(tmp_path / "dynamics_rotating.csv")
    assert meta["frame"] == "rotating"
    assert len(cols["t"]) == 21


def test_usage_error_exit_codes(tmp_path):
    # both --nex and --gamma2
    assert run_cli(["spectrum", "--nex", "5", "--gamma2", "0.1",
                    "--eta-ratio", "0.5"], tmp_path) == 2
    # eta and eta-ratio together
    assert run_cli(["spectrum", "--nex", "5", "--eta", "0.1",
                    "--eta-ratio", "0.5"], tmp_path) == 2
    # neither eta nor eta-ratio
    assert run_cli(["spectrum", "--nex", "5"], tmp_path) == 2


def test_wrong_regime_exit_code(tmp_path):
    assert run_cli(["bands", "--nex", "5", "--eta-ratio", "2"], tmp_path) == 4


def test_insufficient_statistics_exit_code(tmp_path):
    code = run_cli(
        ["langevin", "--process", "phase", "--nex", "30", "--eta-ratio", "3",
         "--n-steps", "1000", "--n-traj", "2", "--store-every", "10"],
        tmp_path,
    )
    assert code == 5


def test_unknown_flag_exits_2():
    result = subprocess.run(
        [sys.executable, "-m", "sqvdp.cli", "spectrum", "--does-not-exist"],
        capture_output=True,
    )
    assert result.returncode == 2


def test_config_file_with_flag_override(tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text("nex = 50\neta-ratio = 0\nmodes = 4\n# comment\n")
    out = tmp_path / "out"
    code = main(["semiclassical", "--config", str(config), "--modes", "2",
                 "--out", str(out)])
    assert code == 0
    meta, cols = read_artifact_csv(out / "cn_table.csv")
    assert len(cols["n"]) == 2  # flag wins over config
    assert abs(cols["c_n"][0] - 0.375) < 1e-8


def test_config_file_unknown_key(tmp_path):
    config = tmp_path / "bad.cfg"
    config.write_text("not-a-flag = 3\n")
    assert main(["semiclassical", "--config", str(config), "--nex", "5",
                 "--eta-ratio", "0", "--out", str(tmp_path / "o")]) == 2


def test_fig6_pipeline_manifest(tmp_path):
    code = run_cli(["fig", "6"], tmp_path)
    assert code == 0
    manifest = read_json(tmp_path / "fig6" / "manifest.json")
    assert manifest["figure"] == 6
    for rel in manifest["artifacts"].values():
        assert (tmp_path / "fig6" / rel).exists()
    meta, cols = read_artifact_csv(tmp_path / "fig6" / "fp_rate_vs_nex.csv")
    assert "fp_rate" in cols
