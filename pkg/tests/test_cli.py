"""CLI behavior: scenario ingestion, report determinism, exit codes, suites."""

import copy
import json
import math

import numpy as np
import pytest

from lossinfo.cli import main
from lossinfo.scenario import load_scenario, parse_loss_string, parse_scenario
from lossinfo.errors import ScenarioError
from oracles import random_joint, shannon_mutual_information


def make_valid_doc():
    return {
        "variables": [
            {"name": "X", "alphabet": ["a", "b"]},
            {"name": "Y", "alphabet": 3},
        ],
        "joint": [0.10, 0.20, 0.10, 0.25, 0.05, 0.30],
        "real_values": {"X": [-1.0, 2.0], "Y": [0.0, 1.0, 4.0]},
        "queries": [
            {"quantity": "H", "target": "X", "loss": "log"},
            {"quantity": "I", "target": "X", "given": ["Y"], "loss": "log"},
            {"quantity": "H_cond", "target": "X", "given": ["Y"], "loss": "square"},
            {"quantity": "U", "target": "X", "from": ["Y"], "to": ["X", "Y"],
             "loss": {"name": "tsallis", "q": 2}},
        ],
    }


def write_doc(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


# ---------------------------------------------------------------------------
# Scenario parsing
# ---------------------------------------------------------------------------


def test_parse_valid_scenario():
    s = parse_scenario(make_valid_doc())
    assert s.atom_count == 6
    assert s.variable("Y").size == 3
    assert s.variable_partition("X").blocks == ((0, 1, 2), (3, 4, 5))
    assert s.variable_partition("Y").blocks == ((0, 3), (1, 4), (2, 5))


def test_row_major_order_worked_example():
    # 2x3 layout: atoms (x0,y0) (x0,y1) (x0,y2) (x1,y0) (x1,y1) (x1,y2)
    s = parse_scenario(make_valid_doc())
    cols = s._symbol_columns()
    assert cols[:, 0].tolist() == [0, 0, 0, 1, 1, 1]
    assert cols[:, 1].tolist() == [0, 1, 2, 0, 1, 2]


def test_parse_loss_strings():
    assert parse_loss_string("log").name == "log"
    spec = parse_loss_string("tsallis:q=2")
    assert spec.name == "tsallis" and spec.param("q") == 2.0
    spec2 = parse_loss_string("bregman:phi=exponential_sum")
    assert spec2.param("phi") == "exponential_sum"
    with pytest.raises(ScenarioError):
        parse_loss_string("nope")
    with pytest.raises(ScenarioError):
        parse_loss_string("tsallis:q")


MANDATORY_DELETIONS = [
    (("variables",), "variables"),
    (("joint",), "joint"),
    (("queries",), "queries"),
    (("variables", 0, "name"), "variables[0].name"),
    (("variables", 0, "alphabet"), "variables[0].alphabet"),
    (("queries", 0, "quantity"), "queries[0].quantity"),
    (("queries", 0, "target"), "queries[0].target"),
    (("queries", 0, "loss"), "queries[0].loss"),
    (("queries", 1, "given"), "queries[1].given"),
    (("queries", 3, "to"), "queries[3].to"),
]


@pytest.mark.parametrize("path,field", MANDATORY_DELETIONS)
def test_every_mandatory_field_deletion_is_named(tmp_path, capsys, path, field):
    doc = copy.deepcopy(make_valid_doc())
    target = doc
    for key in path[:-1]:
        target = target[key]
    del target[path[-1]]
    code = main(["compute", "--scenario", write_doc(tmp_path, doc)])
    assert code == 2
    err = capsys.readouterr().err
    assert field in err


def test_schema_rejects_bad_joint(tmp_path, capsys):
    doc = make_valid_doc()
    doc["joint"] = [0.5, 0.5]  # wrong length
    assert main(["compute", "--scenario", write_doc(tmp_path, doc)]) == 2
    assert "joint" in capsys.readouterr().err

    doc = make_valid_doc()
    doc["joint"][0] += 0.5  # sums to 1.5
    assert main(["compute", "--scenario", write_doc(tmp_path, doc)]) == 2


def test_schema_rejects_unknown_variable_in_query(tmp_path, capsys):
    doc = make_valid_doc()
    doc["queries"][1]["given"] = ["W"]
    assert main(["compute", "--scenario", write_doc(tmp_path, doc)]) == 2
    assert "queries[1].given" in capsys.readouterr().err


def test_invalid_json_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{\n  broken\n}")
    assert main(["compute", "--scenario", str(path)]) == 2
    assert "line" in capsys.readouterr().err


def test_square_loss_requires_embedding(tmp_path, capsys):
    doc = make_valid_doc()
    del doc["real_values"]
    assert main(["compute", "--scenario", write_doc(tmp_path, doc)]) == 2
    assert "real_values" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# compute
# ---------------------------------------------------------------------------


def test_compute_fair_coin(tmp_path, capsys):
    doc = {
        "variables": [{"name": "X", "alphabet": 2}],
        "joint": [0.5, 0.5],
        "queries": [{"quantity": "H", "target": "X", "loss": "log"}],
    }
    assert main(["compute", "--scenario", write_doc(tmp_path, doc)]) == 0
    report = json.loads(capsys.readouterr().out)
    row = report["results"][0]
    assert abs(row["value_nats"] - 0.6931471805599453) < 1e-12
    assert row["value_bits"] == 1.0
    assert row["value_bits"] == row["value_nats"] / math.log(2)


def test_compute_independent_information_is_zero(tmp_path, capsys):
    px = [0.3, 0.7]
    py = [0.2, 0.5, 0.3]
    doc = {
        "variables": [{"name": "X", "alphabet": 2}, {"name": "Y", "alphabet": 3}],
        "joint": [px[i] * py[j] for i in range(2) for j in range(3)],
        "queries": [{"quantity": "I", "target": "X", "given": ["Y"], "loss": "log"}],
    }
    assert main(["compute", "--scenario", write_doc(tmp_path, doc)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert abs(report["results"][0]["value"]) < 1e-12


def test_compute_random_3x3_matches_shannon_oracle(tmp_path, capsys):
    rng = np.random.default_rng(33)
    joint = random_joint(rng, (3, 3))
    doc = {
        "variables": [{"name": "X", "alphabet": 3}, {"name": "Y", "alphabet": 3}],
        "joint": [float(v) for v in joint.reshape(-1)],
        "queries": [{"quantity": "I", "target": "X", "given": ["Y"], "loss": "log"}],
    }
    assert main(["compute", "--scenario", write_doc(tmp_path, doc)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert abs(report["results"][0]["value"] - shannon_mutual_information(joint)) < 1e-9


def test_compute_all_quantities_and_losses(tmp_path, capsys):
    path = write_doc(tmp_path, make_valid_doc())
    assert main(["compute", "--scenario", path]) == 0
    report = json.loads(capsys.readouterr().out)
    assert len(report["results"]) == 4
    quantities = [r["quantity"] for r in report["results"]]
    assert quantities == ["H", "I", "H_cond", "U"]
    # U from sigma(Y) to sigma(X, Y) equals H_cond(X | Y) under the same loss
    u_row = report["results"][3]
    assert u_row["value"] >= -1e-12


def test_compute_round_trip_determinism(tmp_path, capsys):
    path = write_doc(tmp_path, make_valid_doc())
    assert main(["compute", "--scenario", path]) == 0
    first = capsys.readouterr().out
    assert main(["compute", "--scenario", path]) == 0
    second = capsys.readouterr().out
    assert first == second
    # a report re-read and recomputed carries identical values
    report = json.loads(first)
    again = json.loads(second)
    assert report == again


def test_compute_out_file_matches_stdout(tmp_path, capsys):
    path = write_doc(tmp_path, make_valid_doc())
    out = tmp_path / "report.json"
    assert main(["compute", "--scenario", path, "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert out.read_text() == stdout


def test_compute_table_format(tmp_path, capsys):
    path = write_doc(tmp_path, make_valid_doc())
    assert main(["compute", "--scenario", path, "--format", "table"]) == 0
    out = capsys.readouterr().out
    assert "target=X" in out and "loss=log" in out


def test_solver_failure_exits_3(tmp_path, capsys):
    # exponential-sum Bregman at overflow-scale embeddings evaluates to NaN
    doc = {
        "variables": [{"name": "X", "alphabet": 2}],
        "joint": [0.5, 0.5],
        "real_values": {"X": [800.0, 800.0]},
        "queries": [
            {"quantity": "H", "target": "X",
             "loss": {"name": "bregman", "phi": "exponential_sum"}}
        ],
    }
    assert main(["compute", "--scenario", write_doc(tmp_path, doc)]) == 3
    assert "solver" in capsys.readouterr().err.lower()


def test_infinity_renders_as_literal_inf():
    from lossinfo.extreal import POS_INF

    assert json.dumps(POS_INF.render()) == '"inf"'


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def three_var_doc():
    rng = np.random.default_rng(5)
    joint = random_joint(rng, (2, 3, 2))
    return {
        "variables": [
            {"name": "X", "alphabet": 2},
            {"name": "Y", "alphabet": 3},
            {"name": "Z", "alphabet": 2},
        ],
        "joint": [float(v) for v in joint.reshape(-1)],
        "real_values": {"X": [0.0, 1.0], "Y": [-1.0, 0.5, 2.0], "Z": [1.0, 3.0]},
        "queries": [{"quantity": "H", "target": "X", "loss": "log"}],
    }


@pytest.mark.parametrize("suite", ["telescope", "prop1", "pythagoras", "bridge", "belief"])
def test_verify_suites_pass(tmp_path, capsys, suite):
    path = write_doc(tmp_path, three_var_doc())
    assert main(["verify", "--scenario", path, "--suite", suite]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["all_pass"] is True
    assert report["checks"]
    assert all(c["residual"] < 1e-9 for c in report["checks"])


def test_verify_prop1_on_four_atom_space(tmp_path, capsys):
    rng = np.random.default_rng(6)
    joint = random_joint(rng, (2, 2))
    doc = {
        "variables": [{"name": "A", "alphabet": 2}, {"name": "B", "alphabet": 2}],
        "joint": [float(v) for v in joint.reshape(-1)],
        "queries": [{"quantity": "H", "target": "A", "loss": "log"}],
    }
    path = write_doc(tmp_path, doc)
    assert main(["verify", "--scenario", path, "--suite", "prop1"]) == 0
    report = json.loads(capsys.readouterr().out)
    monotonicity = [c for c in report["checks"] if c["check"] == "prop1.monotonicity"]
    assert monotonicity and all(c["pass"] for c in monotonicity)


def test_verify_bridge_on_3x2_table(tmp_path, capsys):
    rng = np.random.default_rng(7)
    joint = random_joint(rng, (3, 2))
    doc = {
        "variables": [{"name": "Y", "alphabet": 3}, {"name": "Z", "alphabet": 2}],
        "joint": [float(v) for v in joint.reshape(-1)],
        "queries": [{"quantity": "H", "target": "Y", "loss": "log"}],
    }
    path = write_doc(tmp_path, doc)
    assert main(["verify", "--scenario", path, "--suite", "bridge"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert all(c["residual"] < 1e-9 for c in report["checks"])


def test_verify_unknown_suite_is_rejected(tmp_path, capsys):
    path = write_doc(tmp_path, three_var_doc())
    with pytest.raises(SystemExit):
        main(["verify", "--scenario", path, "--suite", "bogus"])


# ---------------------------------------------------------------------------
# lattice
# ---------------------------------------------------------------------------


def test_lattice_atoms_1_single_row(tmp_path, capsys):
    out = tmp_path / "l.csv"
    assert main(["lattice", "--atoms", "1", "--seed", "0", "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "partition_id,block_count,optimal_risk,uncertainty_from_trivial"
    assert len(lines) == 2
    assert lines[1].startswith("0,1,")
    assert lines[1].endswith(",0.0")  # U = 0 on a single atom


def test_lattice_atoms_3_has_bell3_rows(tmp_path, capsys):
    out = tmp_path / "l.csv"
    assert main(["lattice", "--atoms", "3", "--seed", "42", "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 1 + 5  # header + Bell(3)
    report = json.loads(capsys.readouterr().out)
    assert report["monotonicity"]["violations"] == 0


def test_lattice_seeded_runs_are_byte_identical(tmp_path, capsys):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["lattice", "--atoms", "5", "--seed", "9", "--out", str(out1)]) == 0
    capsys.readouterr()
    assert main(["lattice", "--atoms", "5", "--seed", "9", "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_lattice_rejects_out_of_range_atoms(capsys):
    assert main(["lattice", "--atoms", "9"]) == 2
    assert "atoms" in capsys.readouterr().err


def test_lattice_csv_to_stdout_without_out(capsys):
    assert main(["lattice", "--atoms", "2", "--seed", "3"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("partition_id,block_count,")


def test_lattice_with_log_loss(tmp_path, capsys):
    out = tmp_path / "l.csv"
    assert main(["lattice", "--atoms", "4", "--seed", "1", "--loss", "log", "--out", str(out)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["monotonicity"]["violations"] == 0


# ---------------------------------------------------------------------------
# witness
# ---------------------------------------------------------------------------


def test_witness_at_sqrt_pi_is_zero(capsys):
    n = repr(math.sqrt(math.pi))
    assert main(["witness", "--family", "gaussian_logloss", "--n", n]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["ladder"][0][1] == 0.0
    assert report["entropy"] == "inf"


def test_witness_logloss_ladder_strictly_decreasing(capsys):
    assert main(["witness", "--family", "gaussian_logloss", "--n", "1,10,100,1000"]) == 0
    report = json.loads(capsys.readouterr().out)
    bounds = [b for _, b in report["ladder"]]
    assert bounds == sorted(bounds, reverse=True)
    assert report["strictly_decreasing"] is True


def test_witness_hyvarinen_ladder(capsys):
    assert main(
        ["witness", "--family", "shifted_gaussian_hyvarinen", "--n", "10,100,1000"]
    ) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["strictly_decreasing"] is True


def test_witness_invalid_family_exits_2(capsys):
    assert main(["witness", "--family", "bogus", "--n", "1"]) == 2
    assert "family" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# shipped example scenarios stay valid
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "name", ["fair_coin", "two_by_three", "independent", "three_vars"]
)
def test_shipped_scenarios_load_and_compute(name, capsys):
    from pathlib import Path

    path = Path(__file__).resolve().parents[1] / "docs" / "scenarios" / f"{name}.json"
    load_scenario(path)
    assert main(["compute", "--scenario", str(path)]) == 0
    capsys.readouterr()
