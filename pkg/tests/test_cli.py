import json
import math
import subprocess
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from frozen_edge.cli import main

GOLDEN = Path(__file__).parent / "golden"
CASES = json.loads((GOLDEN / "cases.json").read_text())


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def schema(command):
    text = resources.files("frozen_edge").joinpath("schemas", f"{command}.schema.json").read_text()
    return json.loads(text)


def _close(a, b, path="result"):
    if isinstance(a, dict):
        assert set(a) == set(b), path
        for k in a:
            _close(a[k], b[k], f"{path}.{k}")
    elif isinstance(a, list):
        assert len(a) == len(b), path
        for i, (x, y) in enumerate(zip(a, b)):
            _close(x, y, f"{path}[{i}]")
    elif isinstance(a, float) or isinstance(b, float):
        assert math.isclose(a, b, rel_tol=1e-10, abs_tol=1e-14), f"{path}: {a} != {b}"
    else:
        assert a == b, path


def _csv_body(text):
    meta = {}
    rows = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, val = line[2:].partition(": ")
            meta[key] = json.loads(val)
        else:
            rows.append(line.split(","))
    return meta, rows


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden_outputs(name, capsys):
    argv = CASES[name]
    code, out, _ = run(argv, capsys)
    assert code == 0
    expected = (GOLDEN / name).read_text()
    if name.endswith(".json"):
        got, ref = json.loads(out), json.loads(expected)
        jsonschema.validate(got, schema(argv[0]))
        _close(got["result"], ref["result"])
        assert got["metadata"]["defaults"] == ref["metadata"]["defaults"]
        assert got["metadata"]["arguments"] == ref["metadata"]["arguments"]
    else:
        (gm, grows), (rm, rrows) = _csv_body(out), _csv_body(expected)
        assert gm["defaults"] == rm["defaults"] and gm["command"] == rm["command"]
        assert grows[0] == rrows[0]
        for g, r in zip(grows[1:], rrows[1:]):
            assert np.allclose([float(v) for v in g], [float(v) for v in r], rtol=1e-10, atol=1e-14)


@pytest.mark.parametrize(
    "argv",
    [
        ["zeros", "--family", "jacobi-trig", "--alpha", "0.5", "--beta", "1.5", "--n", "7"],
        ["cov", "--family", "laguerre", "--nu", "2.5", "--n", "6"],
        ["limit", "--kind", "jacobi-algebraic", "--alpha", "0.5", "--r", "2", "--s", "1"],
        ["limit", "--kind", "gram", "--alpha", "-0.5", "--r-max", "2"],
        ["converge", "--family", "laguerre", "--nu", "2", "--r", "2", "--s", "3", "--grid", "10,20,40"],
        ["sample", "--family", "laguerre", "--nu", "1", "--n", "2", "--coupling", "1e4", "--samples", "20000",
         "--burn-in", "2000", "--chains", "4"],
    ],
)
def test_json_output_matches_schema(argv, capsys):
    code, out, _ = run(argv + ["--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema(argv[0]))
    assert doc["metadata"]["tool"] == "frozen-edge" and doc["metadata"]["command"] == argv[0]


def test_zero_examples(capsys):
    _, out, _ = run(["zeros", "--family", "jacobi", "--alpha", "0", "--beta", "0", "--n", "2"], capsys)
    _, rows = _csv_body(out)
    assert [round(float(r[1]), 10) for r in rows[1:]] == [-0.5773502692, 0.5773502692]
    _, out, _ = run(["zeros", "--family", "laguerre", "--nu", "1", "--n", "2"], capsys)
    _, rows = _csv_body(out)
    assert [round(float(r[1]), 10) for r in rows[1:]] == [0.5857864376, 3.4142135624]


def test_csv_numbers_round_trip(capsys):
    _, out, _ = run(["cov", "--family", "jacobi", "--alpha", "0.5", "--beta", "1.5", "--n", "5", "--matrix", "s"], capsys)
    from frozen_edge import EnsembleParams, assemble

    _, rows = _csv_body(out)
    got = np.array([[float(v) for v in r] for r in rows])
    assert np.array_equal(got, assemble(EnsembleParams.jacobi(0.5, 1.5, 5)).s_matrix)


def test_cov_route_discrepancy_field(capsys):
    code, out, _ = run(["cov", "--family", "jacobi", "--alpha", "0", "--beta", "0", "--n", "20", "--format", "json"], capsys)
    assert code == 0 and json.loads(out)["result"]["route_discrepancy"] <= 1e-9


def test_cov_n1_examples(capsys):
    _, out, _ = run(["cov", "--family", "jacobi-trig", "--alpha", "0", "--beta", "0", "--n", "1", "--format", "json"], capsys)
    assert json.loads(out)["result"]["sigma"] == [[0.25]]
    _, out, _ = run(["cov", "--family", "laguerre", "--nu", "1", "--n", "1", "--format", "json"], capsys)
    assert json.loads(out)["result"]["sigma"] == [[0.5]]


def test_ratio_and_gram_checks(capsys):
    code, out, _ = run(["limit", "--kind", "ratio", "--alpha", "0.5", "--r", "2", "--s", "3", "--format", "json"], capsys)
    res = json.loads(out)["result"]
    assert code == 0 and res["passed"] and res["ratio"] == pytest.approx(res["expected"], rel=1e-14)
    code, out, _ = run(["limit", "--kind", "gram", "--alpha", "0", "--r-max", "3", "--format", "json"], capsys)
    assert code == 0 and json.loads(out)["result"]["max_deviation_from_identity"] <= 1e-8


def test_cross_check_failure_exit_code(capsys):
    code, out, _ = run(["limit", "--kind", "laguerre", "--nu", "1", "--cross-check", "--tol", "0", "--format", "json"], capsys)
    doc = json.loads(out)
    assert doc["result"]["cross_check"]["value"] == pytest.approx(doc["result"]["value"], rel=1e-9)
    assert code == (0 if doc["result"]["cross_check"]["passed"] else 3)


def test_converge_report_fields(capsys):
    code, out, _ = run(["converge", "--family", "jacobi-trig", "--alpha", "0", "--beta", "0", "--format", "json"], capsys)
    res = json.loads(out)["result"]
    assert code == 0
    assert res["n_grid"] == [25, 50, 100, 200] and res["fitted_rate"] <= -0.8
    doc = json.loads(out)
    assert doc["metadata"]["defaults"] == {"grid": [25, 50, 100, 200], "y_max": 0.8}


def test_converge_non_monotone_exits_3(capsys):
    # algebraic entries decay like N^-4, so their gap to the limit grows along the grid
    code, out, _ = run(["converge", "--family", "jacobi", "--alpha", "0", "--beta", "0", "--format", "json"], capsys)
    assert code == 3 and json.loads(out)["result"]["strictly_decreasing"] is False


def test_sample_reproducible_and_passes(capsys):
    argv = ["sample", "--family", "jacobi", "--alpha", "0", "--beta", "0", "--n", "1", "--coupling", "1e4",
            "--samples", "200000", "--format", "json"]
    code, first, _ = run(argv, capsys)
    _, second, _ = run(argv, capsys)
    assert code == 0
    assert json.loads(first)["result"] == json.loads(second)["result"]


def test_sample_tuning_exit_4(capsys):
    code, out, err = run(["sample", "--family", "jacobi", "--alpha", "0", "--beta", "0", "--n", "1", "--coupling", "1e4",
                          "--samples", "5000", "--burn-in", "100", "--proposal-scale", "0.01"], capsys)
    assert code == 4 and out == "" and "TuningError" in err


def test_samples_csv(tmp_path, capsys):
    path = tmp_path / "s.csv"
    code, _, _ = run(["sample", "--family", "laguerre", "--nu", "1", "--n", "1", "--coupling", "1e4", "--samples", "4000",
                      "--burn-in", "100", "--chains", "2", "--samples-csv", str(path)], capsys)
    assert code == 0 and len(path.read_text().splitlines()) == 4000


@pytest.mark.parametrize(
    "argv",
    [
        ["zeros", "--family", "jacobi", "--alpha", "-2", "--beta", "0", "--n", "2"],
        ["zeros", "--family", "laguerre", "--n", "2"],
        ["zeros", "--family", "laguerre", "--nu", "0", "--n", "2"],
        ["cov", "--family", "jacobi", "--alpha", "0", "--beta", "0", "--n", "0"],
        ["limit", "--kind", "jacobi-trig", "--r", "1"],
        ["converge", "--family", "laguerre", "--nu", "1", "--grid", "10,20"],
        ["sample", "--family", "jacobi", "--alpha", "0", "--beta", "0", "--n", "1", "--coupling", "-1"],
    ],
)
def test_domain_errors_exit_2(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 2 and out == "" and err.strip()


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["zeros", "--family", "jacobi", "--alpha", "0", "--beta", "0"],
        ["zeros", "--family", "hermite", "--n", "2"],
        ["zeros", "--family", "jacobi", "--alpha", "0", "--beta", "0", "--n", "2", "--unknown"],
        ["converge", "--family", "laguerre", "--nu", "1", "--grid", "a,b"],
    ],
)
def test_usage_errors_exit_1(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 1 and "error" in err


def test_output_file_and_unwritable_path(tmp_path, capsys):
    path = tmp_path / "z.json"
    code, out, _ = run(["zeros", "--family", "laguerre", "--nu", "1", "--n", "3", "--format", "json", "-o", str(path)], capsys)
    assert code == 0 and out == ""
    assert len(json.loads(path.read_text())["result"]["zeros"]) == 3
    code, _, _ = run(["zeros", "--family", "laguerre", "--nu", "1", "--n", "3", "-o", str(tmp_path / "no" / "x.csv")], capsys)
    assert code == 1


def test_version(capsys):
    code, out, _ = run(["--version"], capsys)
    assert code == 0 and "0.1.0" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "frozen_edge", "zeros", "--family", "laguerre", "--nu", "1", "--n", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.strip().endswith("1,1.0")
    proc = subprocess.run([sys.executable, "-m", "frozen_edge", "zeros", "--family", "laguerre", "--nu", "-1", "--n", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 2
