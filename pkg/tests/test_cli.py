import json

import pytest

from zwitter.cli import main


@pytest.mark.parametrize("argv", [
    ["evolve", "--grid", "63x64"],
    ["evolve", "--grid", "banana"],
    ["evolve", "--potential", "cubic:a=1"],
    ["evolve", "--gamma", "3.0"],
    ["validate", "nonsense"],
    ["frobnicate"],
])
def test_usage_errors_exit_2(argv, tmp_path):
    assert main([*argv, "--out", str(tmp_path)] if argv[0] != "frobnicate" else argv) == 2


def test_evolve_writes_tables_plot_and_snapshots(tmp_path):
    rc = main(["evolve", "--grid", "96x96", "--extent-z", "16", "--z0", "0.5", "--potential", "quartic:omega=1,lambda=0.1",
               "--gamma", "0.5", "--dt", "0.01", "--horizon", "0.2", "--snapshots", "10", "--out", str(tmp_path)])
    assert rc == 0
    trace = (tmp_path / "trace.csv").read_text().splitlines()
    provenance = json.loads(trace[0][2:])
    assert provenance["kind"] == "evolve" and provenance["n_z"] == 96
    assert trace[1].startswith("time,norm,boundary_mass")
    assert (tmp_path / "trace.svg").read_text().lstrip().startswith("<?xml")
    assert len(list((tmp_path / "snapshots").glob("*.zwit"))) == 2


def test_groundstate_json_output(tmp_path):
    rc = main(["groundstate", "--grid", "64x64", "--extent-z", "14", "--potential", "harmonic:omega=1",
               "--gamma", "0.2", "--horizon", "1", "--relaxation", "0.5", "--format", "json", "--out", str(tmp_path)])
    assert rc == 0
    tables = list(tmp_path.glob("*.json"))
    assert tables
    doc = json.loads(tables[0].read_text())
    assert set(doc) == {"provenance", "columns", "rows"}
    assert doc["rows"][0]["E0"] == pytest.approx(0.5, abs=1e-6)
    assert list(tmp_path.glob("*.zwit"))


def test_doubleslit_reports_svg(tmp_path):
    rc = main(["doubleslit", "--grid", "192x192", "--extent-z", "32", "--potential", "free", "--separation", "6",
               "--gamma", "0", "--dt", "0.01", "--horizon", "1", "--out", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "marginals.svg").exists()
    assert (tmp_path / "fringes.csv").exists()


def test_runtime_failure_exits_1(tmp_path):
    # a fast packet on a small box hits the boundary monitor
    rc = main(["evolve", "--grid", "32x32", "--extent-z", "12", "--potential", "free", "--p0", "2.5",
               "--dt", "0.01", "--horizon", "2", "--out", str(tmp_path), "--no-plots"])
    assert rc == 1


def test_validate_transforms_suite(tmp_path, capsys):
    rc = main(["validate", "transforms", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert rc == 0
    verdict = json.loads((tmp_path / "validate-transforms.json").read_text())
    assert verdict["passed"] is True
    assert "criterion" in out
