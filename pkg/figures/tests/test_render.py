"""Acceptance of the plotting layer.

Pipeline data is produced by the `sqvdp` CLI (subprocess: the renderer
must work from files alone), then every figure is rendered.  The heavy
pipelines run once per session.
"""

import json
import os
import shutil
import subprocess
import sys

import pytest

from sqvdp_figures.cli import main

FIGURES = list(range(1, 8))


@pytest.fixture(scope="session")
def pipeline_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("pipelines")
    for number in FIGURES:
        result = subprocess.run(
            [sys.executable, "-m", "sqvdp.cli", "fig", str(number),
             "--out", str(out)],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0, (
            f"fig {number} pipeline failed:\n{result.stderr}"
        )
    return out


@pytest.mark.parametrize("number", FIGURES)
def test_render_every_figure(pipeline_dir, tmp_path, number):
    image = tmp_path / f"fig{number}.png"
    code = main([
        "render", "--fig", str(number),
        "--data", str(pipeline_dir / f"fig{number}"),
        "--out", str(image),
    ])
    assert code == 0
    assert image.exists() and image.stat().st_size > 4096


def test_refuses_missing_provenance_header(pipeline_dir, tmp_path):
    source = pipeline_dir / "fig6"
    corrupted = tmp_path / "fig6"
    shutil.copytree(source, corrupted)
    target = corrupted / "fp_rate_vs_nex.csv"
    lines = target.read_text().splitlines()
    assert lines[0].startswith("#")
    target.write_text("\n".join(lines[1:]) + "\n")
    image = tmp_path / "out.png"
    code = main(["render", "--fig", "6", "--data", str(corrupted),
                 "--out", str(image)])
    assert code == 3
    assert not image.exists()


def test_refuses_missing_input_file(pipeline_dir, tmp_path):
    source = pipeline_dir / "fig6"
    broken = tmp_path / "fig6"
    shutil.copytree(source, broken)
    os.unlink(broken / "fp_rate_vs_nex.csv")
    image = tmp_path / "out.png"
    code = main(["render", "--fig", "6", "--data", str(broken),
                 "--out", str(image)])
    assert code == 2
    assert not image.exists()


def test_refuses_wrong_manifest_figure(pipeline_dir, tmp_path):
    image = tmp_path / "out.png"
    code = main(["render", "--fig", "3", "--data",
                 str(pipeline_dir / "fig6"), "--out", str(image)])
    assert code == 3
    assert not image.exists()


def test_refuses_missing_column(pipeline_dir, tmp_path):
    source = pipeline_dir / "fig6"
    corrupted = tmp_path / "fig6"
    shutil.copytree(source, corrupted)
    target = corrupted / "fp_rate_vs_nex.csv"
    lines = target.read_text().splitlines()
    header = lines[1].split(",")
    drop = header.index("fp_rate")
    new_lines = [lines[0]] + [
        ",".join(col for i, col in enumerate(line.split(",")) if i != drop)
        for line in lines[1:]
    ]
    target.write_text("\n".join(new_lines) + "\n")
    image = tmp_path / "out.png"
    code = main(["render", "--fig", "6", "--data", str(corrupted),
                 "--out", str(image)])
    assert code == 3
    assert not image.exists()
