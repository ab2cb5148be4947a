import json
import subprocess

import jsonschema
import pytest


def run(cli, *args, cwd=None):
    return subprocess.run([cli, *args], capture_output=True, text=True, cwd=cwd)


@pytest.mark.parametrize(
    "args",
    [
        ["estimate", "--family", "binomial", "--n", "10", "--r", "0", "--method", "d2"],
        ["estimate", "--family", "normal", "--n", "25", "--ybar", "0.024", "--msd", "1.077", "--method", "d3"],
        ["region", "--family", "exponential", "--n", "10", "--t", "6.08", "--method", "d3"],
        ["region", "--family", "normal", "--n", "25", "--ybar", "0.024", "--msd", "1.077", "--level", "0.5"],
        ["losscurve", "--family", "exponential", "--n", "10", "--t", "6.08", "--grid", "0.5:3:11"],
        ["coverage", "--family", "binomial", "--n", "10", "--method", "d3"],
        ["coverage", "--family", "exponential", "--n", "10", "--theta", "1.5", "--reps", "200"],
        ["estimate", "--family", "uniform", "--n", "10", "--t", "1.897", "--method", "d1"],
    ],
)
def test_documents_match_schema(cli, schema, tmp_path, args):
    out = tmp_path / "doc.json"
    proc = run(cli, *args, "--out", str(out))
    doc = json.loads(out.read_text()) if out.exists() else json.loads(proc.stdout)
    jsonschema.validate(doc, schema)
    if proc.returncode == 0:
        assert run(cli, "validate", str(out)).returncode == 0


def test_estimate_examples(cli):
    d = json.loads(run(cli, "estimate", "--family", "binomial", "--n", "10", "--r", "0", "--method", "d2").stdout)
    assert abs(d["point"]["theta"] - 0.014) < 5e-4
    d = json.loads(run(cli, "estimate", "--family", "exponential", "--n", "10", "--t", "6.08").stdout)
    assert abs(d["point"]["theta"] - 1.48) < 5e-3


def test_exit_codes(cli):
    p = run(cli, "estimate", "--family", "uniform", "--n", "10", "--t", "1.897", "--method", "d1")
    assert p.returncode == 2
    assert json.loads(p.stdout)["error"]["code"] == "DIVERGENT_LOSS"
    p = run(cli, "estimate", "--family", "binomial", "--n", "10", "--r", "11")
    assert p.returncode == 2
    assert json.loads(p.stdout)["error"]["field"]
    p = run(cli, "estimate", "--nonsense")
    assert p.returncode == 2
    p = run(cli, "region", "--family", "normal", "--n", "25", "--ybar", "0", "--msd", "1", "--grid-size", "4")
    assert p.returncode == 3
    assert json.loads(p.stdout)["error"]["code"] == "GRID_TOO_COARSE"


def test_data_inputs(cli, root, tmp_path):
    csv = tmp_path / "y.csv"
    csv.write_text("y\n0.5\n1.0\n0.3\n0.2\n")
    a = json.loads(run(cli, "estimate", "--family", "exponential", "--data", str(csv), "--method", "d2").stdout)
    b = json.loads(run(cli, "estimate", "--family", "exponential", "--data", "[0.5,1.0,0.3,0.2]", "--method", "d2").stdout)
    assert a["point"] == b["point"] == {"theta": 2.0}
    d = json.loads(
        run(cli, "estimate", "--family", "two-level", "--data", str(root / "data" / "eight_schools.json")).stdout
    )
    assert abs(d["point"]["mu"] - 8.0) < 0.3


def test_csv_output(cli):
    p = run(cli, "--format", "csv", "region", "--family", "exponential", "--n", "10", "--t", "6.08", "--method", "d3")
    lines = p.stdout.splitlines()
    assert lines[0] == "method,level,lo,hi"
    _, _, lo, hi = lines[1].split(",")
    assert abs(float(lo) - 0.83) < 0.01 and abs(float(hi) - 2.95) < 0.01


def test_nested_regions(cli):
    def interval(q):
        d = json.loads(
            run(cli, "region", "--family", "exponential", "--n", "10", "--t", "6.08", "--level", str(q)).stdout
        )
        return d["intervals"][0]

    a, b = interval(0.5), interval(0.95)
    assert b[0] <= a[0] and a[1] <= b[1]


def test_reproduce_is_deterministic(cli, schema, tmp_path):
    for d in ("a", "b"):
        assert run(cli, "reproduce", "table3", "table2", "--out", str(tmp_path / d)).returncode == 0
    for name in ("table3.csv", "table3.json", "table2.csv", "table2.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    side = json.loads((tmp_path / "a" / "table3.json").read_text())
    jsonschema.validate(side, schema)
    rows = [line.split(",") for line in (tmp_path / "a" / "table3.csv").read_text().splitlines()]
    assert rows[0] == ["method", "estimate", "ci_lo", "ci_hi"]
    for method, est, lo, hi in rows[1:]:
        want = side["published"][method]
        assert abs(float(est) - want[0]) < 0.01
        assert abs(float(lo) - want[1]) <= 0.01
        assert abs(float(hi) - want[2]) <= 0.01


def test_reproduce_table1_sidecar(cli, tmp_path):
    assert run(cli, "reproduce", "table1", "--out", str(tmp_path)).returncode == 0
    side = json.loads((tmp_path / "table1.json").read_text())
    assert side["primary_config"] == "variance-measure"
    rows = [line.split(",") for line in (tmp_path / "table1.csv").read_text().splitlines()[1:]]
    reconciled = {r[1]: float(r[3]) for r in rows if r[0] == "msd-squared"}
    assert abs(reconciled["pc"] - 1.171) < 5e-4
    assert abs(reconciled["d2"] - 1.099) < 5e-4


def test_reproduce_rejects_unknown_target(cli, tmp_path):
    p = run(cli, "reproduce", "table9", "--out", str(tmp_path))
    assert p.returncode == 2
    assert list(tmp_path.iterdir()) == []
