import json

import pytest
from click.testing import CliRunner

from treehomology.cli import REFERENCE_TABLE, SKIPPED, compute_table, JobConfig, main
from treehomology.exactlinalg import AbelianGroup


@pytest.fixture
def runner():
    return CliRunner()


def test_reference_table_is_symmetric():
    for (j, k), g in REFERENCE_TABLE.items():
        if (k, j) in REFERENCE_TABLE:
            assert REFERENCE_TABLE[(k, j)] == g
    assert REFERENCE_TABLE[(6, 6)] == AbelianGroup(9, ())
    assert REFERENCE_TABLE[(4, 5)] == AbelianGroup(1, (2,))


def test_table_text(runner):
    res = runner.invoke(main, ["table", "--jmax", "4", "--kmax", "4"])
    assert res.exit_code == 0, res.output
    assert res.output.splitlines()[1].split() == ["2", "Z", "Z2", "Z"]


def test_table_json_is_deterministic(runner):
    args = ["--format", "json", "table", "--jmax", "3", "--kmax", "4"]
    a = runner.invoke(main, args)
    b = runner.invoke(main, args)
    assert a.exit_code == 0 and a.output == b.output
    data = json.loads(a.output)
    assert data["mismatches"] == [] and not data["skipped"]
    assert {(c["j"], c["k"]): c["group"] for c in data["cells"]}[(3, 4)] == "Z2"


def test_table_csv(runner):
    res = runner.invoke(main, ["--format", "csv", "table", "--jmax", "2", "--kmax", "3"])
    assert res.exit_code == 0
    assert res.output.splitlines() == ["j,k,group,reference", "2,2,Z,Z", "2,3,Z2,Z2"]


def test_table_budget_marks_skipped_cells(runner):
    res = runner.invoke(main, ["--budget-secs", "0", "table", "--jmax", "3", "--kmax", "3"])
    assert res.exit_code == 2
    assert SKIPPED in res.output


def test_compute_table_with_workers():
    cells = compute_table(JobConfig("table", jobs=2), 2, 3, 2, 3)
    assert cells == {(2, 2): "Z", (2, 3): "Z2", (3, 2): "Z2", (3, 3): "Z"}


def test_cache_cold_and_warm_reports_agree(runner, tmp_path):
    args = ["--format", "json", "--cache-dir", str(tmp_path), "table", "--jmax", "4", "--kmax", "4"]
    cold = runner.invoke(main, args)
    assert any(tmp_path.iterdir())
    warm = runner.invoke(main, args)
    assert cold.exit_code == warm.exit_code == 0
    assert cold.output == warm.output


def test_cache_dir_from_environment(runner, tmp_path):
    res = runner.invoke(main, ["homology", "--family", "T", "--sig", "2,2"], env={"TREEHOMOLOGY_CACHE": str(tmp_path)})
    assert res.exit_code == 0
    assert any(tmp_path.iterdir())


@pytest.mark.parametrize(
    "args",
    [
        ["verify", "h1-vanish", "--n", "4", "--m", "2"],
        ["verify", "morse-fields", "--sig", "2,2"],
        ["verify", "levine-iso", "--n", "3", "--m", "2"],
        ["verify", "section5", "--n", "4", "--m", "2"],
        ["verify", "h1-vanish", "--sig", "2,2,1", "--ring", "Z2"],
    ],
)
def test_verify_passes(runner, args):
    res = runner.invoke(main, args)
    assert res.exit_code == 0, res.output
    assert "FAIL" not in res.output


def test_verify_json_report(runner):
    res = runner.invoke(main, ["--format", "json", "verify", "levine-iso", "--n", "2", "--m", "2"])
    data = json.loads(res.output)
    assert data["etaIso"] is True
    assert data["tGroup"] == data["dPrimeGroup"] == "Z"
    assert data["kernelOrder"] == 1


def test_verify_morse_fields_reports_zero_degree_one_criticals(runner):
    res = runner.invoke(main, ["--format", "json", "verify", "morse-fields", "--sig", "2,2"])
    data = json.loads(res.output)
    assert {r["variant"] for r in data["results"]} == {"dyadic", "mod2"}
    assert all(r["criticalByDegree"].get("1", 0) == 0 for r in data["results"])


def test_verify_needs_a_target(runner):
    res = runner.invoke(main, ["verify", "h1-vanish"])
    assert res.exit_code == 2
    assert "--sig" in res.output


def test_verify_budget(runner):
    res = runner.invoke(main, ["--budget-secs", "0", "verify", "section5", "--n", "4", "--m", "2"])
    assert res.exit_code == 2
    assert SKIPPED in res.output


def test_hall_command(runner):
    res = runner.invoke(main, ["hall", "--sig", "2,2", "--variant", "prime"])
    assert res.exit_code == 0
    assert "count 2 (expected 2): PASS" in res.output
    res = runner.invoke(main, ["--format", "json", "hall", "--sig", "3,1"])
    assert json.loads(res.output)["count"] == 1


def test_hall_counts_for_weight_four(runner):
    total = 0
    for sig in ["4,0", "3,1", "2,2", "1,3", "0,4"]:
        res = runner.invoke(main, ["--format", "json", "hall", "--sig", sig, "--no-list"])
        total += json.loads(res.output)["count"]
    assert total == 3


def test_homology_command(runner):
    res = runner.invoke(main, ["homology", "--family", "T", "--sig", "2,3", "--deg", "0"])
    assert res.exit_code == 0
    assert res.output.strip() == "H_0(T; Z) = Z2"
    res = runner.invoke(main, ["--format", "json", "homology", "--family", "L", "--sig", "1,1,1"])
    data = json.loads(res.output)
    assert data["homology"] == {"0": "Z^2", "1": "0"}


def test_bad_input(runner):
    assert runner.invoke(main, ["homology", "--family", "T", "--sig", "1,1"]).exit_code == 2
    assert runner.invoke(main, ["homology", "--family", "T", "--sig", "a,b"]).exit_code == 2
    assert runner.invoke(main, ["homology", "--family", "T", "--sig", "2,2", "--deg", "9"]).exit_code == 2
