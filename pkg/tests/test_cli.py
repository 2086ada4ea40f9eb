"""Command line contract: artifacts, determinism, exit codes."""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from subplex.cli import main


@pytest.fixture(scope="module")
def attr_csv(tmp_path_factory):
    rng = np.random.default_rng(1)
    vals = np.vstack([rng.normal(c, 0.3, size=(25, 4)) for c in (0.0, 2.0, 4.0)])
    lines = ["w,x,y,z"] + [",".join("%.6f" % v for v in row) for row in vals]
    path = tmp_path_factory.mktemp("data") / "attr.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


def invoke(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


def test_run_writes_artifacts(attr_csv, tmp_path):
    out = tmp_path / "out"
    res = invoke("run", "--input", attr_csv, "--out-dir", out, "--k", 3)
    assert res.exit_code == 0, res.output
    for name in ("layout.json", "partition.json", "ranking.json", "layout.png"):
        assert (out / name).exists()

    partition = json.loads((out / "partition.json").read_text())
    assert len(partition["groups"]) == 3
    assert len(partition["labels"]) == 75

    layout = json.loads((out / "layout.json").read_text())
    assert len(layout["points"]) == 75

    ranking = json.loads((out / "ranking.json").read_text())
    assert sorted(ranking["mean"]) == ["0", "1", "2"]
    assert ranking["deviation"] is not None


def test_run_twice_byte_identical(attr_csv, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert invoke("run", "--input", attr_csv, "--out-dir", a, "--k", 3).exit_code == 0
    assert invoke("run", "--input", attr_csv, "--out-dir", b, "--k", 3).exit_code == 0
    for name in ("layout.json", "partition.json", "ranking.json", "layout.png"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_run_k_larger_than_rows_exits_2(attr_csv, tmp_path):
    res = invoke("run", "--input", attr_csv, "--out-dir", tmp_path / "x", "--k", 100)
    assert res.exit_code == 2
    assert "75" in res.output  # names the row count in the message


def test_run_unparseable_input_exits_2(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("f1,f2\n1,banana\n")
    res = invoke("run", "--input", bad, "--out-dir", tmp_path / "y")
    assert res.exit_code == 2


def test_run_missing_input_exits_2(tmp_path):
    res = invoke("run", "--input", tmp_path / "absent.csv", "--out-dir", tmp_path / "z")
    assert res.exit_code == 2


def test_run_with_id_column(tmp_path):
    src = tmp_path / "ids.csv"
    rng = np.random.default_rng(2)
    lines = ["id,f1,f2"] + [
        f"row{i}," + ",".join("%.4f" % v for v in rng.normal(size=2)) for i in range(10)
    ]
    src.write_text("\n".join(lines) + "\n")
    out = tmp_path / "out"
    res = invoke("run", "--input", src, "--out-dir", out, "--k", 2, "--id-column", "id")
    assert res.exit_code == 0, res.output
    layout = json.loads((out / "layout.json").read_text())
    assert layout["points"][0]["id"] == "row0"


def test_serve_rejects_bad_port():
    res = invoke("serve", "--port", 99999)
    assert res.exit_code == 2


def test_serve_env_port_validation(monkeypatch):
    monkeypatch.setenv("SUBPLEX_PORT", "0")
    res = CliRunner().invoke(main, ["serve"])
    assert res.exit_code == 2


def test_bench_noise_writes_reports(tmp_path, monkeypatch):
    # trim the sweep so the unit test stays quick: patch the desk-scale levels
    import subplex.cli as cli_mod

    monkeypatch.setattr(cli_mod, "DESK_NOISE_COUNTS", (10, 20))
    out = tmp_path / "bench"
    res = invoke("bench-noise", "--out-dir", out, "--repeats", 1)
    assert res.exit_code == 0, res.output
    for suffix in (".csv", ".json", ".png"):
        assert (out / f"noise{suffix}").exists()
    assert "rand_index" in res.output  # summary table printed


def test_bench_projection_writes_reports(tmp_path, monkeypatch):
    import subplex.cli as cli_mod

    monkeypatch.setattr(cli_mod, "DESK_PROJECTION_SIZES", (60, 120))
    out = tmp_path / "bench"
    res = invoke("bench-projection", "--out-dir", out)
    assert res.exit_code == 0, res.output
    for suffix in (".csv", ".json", ".png"):
        assert (out / f"projection{suffix}").exists()
    assert "silhouette" in res.output
