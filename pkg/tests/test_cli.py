"""
Command line front end: verbs, outputs and exit codes.
"""

import sys
from pathlib import Path

import pytest

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.core import Constraint, GraphRelInstance, Pair, PathDecomposition, parse_srg, serialize_srg
from src.main import EXIT_CAP, EXIT_INPUT, EXIT_OK, EXIT_PIPELINE, main


PERFECT = "sigma=finite:1 rho=finite:1"
CODE = "sigma=finite:0 rho=finite:1"


def write_instance(path: Path, inst: GraphRelInstance, with_bags: bool = True) -> str:
    pd = PathDecomposition.single_bag(inst.n) if with_bags else None
    path.write_text(serialize_srg(inst, pd), encoding="utf-8")
    return str(path)


def run(capsys, *argv: str):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out


def key_values(text: str) -> dict:
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


def test_classify_dominating_set(capsys):
    code, out = run(capsys, "classify", "--pair", "sigma=cofinite: rho=cofinite:0")
    assert code == EXIT_OK
    fields = key_values(out)
    assert fields["c"] == "3"
    assert fields["trivial"] == "no"
    assert "rcase" in fields["managers"]


def test_classify_structure(capsys):
    _, out = run(capsys, "classify", "--pair", CODE)
    fields = key_values(out)
    assert fields["c"] == "2"
    assert fields["structure"] == "unbounded"
    _, out = run(capsys, "classify", "--pair", "sigma=finite:0,3 rho=finite:3")
    assert key_values(out)["structure"] == "3"


def test_classify_trivial_pair_omits_c(capsys):
    code, out = run(capsys, "classify", "--pair", "sigma=cofinite: rho=cofinite:")
    assert code == EXIT_OK
    fields = key_values(out)
    assert fields["trivial"] == "yes"
    assert fields["trivial_rule"] == "all_subsets"
    assert "c" not in fields


def test_classify_bad_pair(capsys):
    code, _ = run(capsys, "classify", "--pair", "sigma=finite:x rho=finite:1")
    assert code == EXIT_INPUT


def test_count_engines_agree(tmp_path, capsys):
    inst = GraphRelInstance.plain(5, [(0, 1), (1, 2), (2, 3), (3, 4)], Pair.parse("sigma=cofinite: rho=cofinite:"))
    path = write_instance(tmp_path / "path.srg", inst)
    code, oracle_out = run(capsys, "count", path, "--engine", "oracle")
    assert code == EXIT_OK
    assert oracle_out == "32\n"
    code, dp_out = run(capsys, "count", path, "--engine", "dp")
    assert code == EXIT_OK
    assert dp_out == oracle_out


def test_count_dp_needs_bags(tmp_path, capsys):
    inst = GraphRelInstance.plain(2, [(0, 1)], Pair.parse(PERFECT))
    path = write_instance(tmp_path / "edge.srg", inst, with_bags=False)
    code, _ = run(capsys, "count", path, "--engine", "dp")
    assert code == EXIT_INPUT


def test_count_malformed_file(tmp_path, capsys):
    path = tmp_path / "broken.srg"
    path.write_text("srg v1\nvertices two\n", encoding="utf-8")
    code, out = run(capsys, "count", str(path))
    assert code == EXIT_INPUT
    assert out == ""


def test_count_missing_file(tmp_path, capsys):
    code, _ = run(capsys, "count", str(tmp_path / "absent.srg"))
    assert code == EXIT_INPUT


def test_count_over_cap(tmp_path, capsys):
    inst = GraphRelInstance.plain(12, [], Pair.parse(PERFECT))
    path = write_instance(tmp_path / "wide.srg", inst)
    code, _ = run(capsys, "--cap", "8", "count", path, "--engine", "oracle")
    assert code == EXIT_CAP


def test_count_dp_state_limit(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr("src.config.settings._settings", None)
    monkeypatch.setenv("SIGMARHO_DP_MAX_STATES", "3")
    inst = GraphRelInstance.plain(6, [], Pair.parse("sigma=cofinite: rho=cofinite:"))
    path = write_instance(tmp_path / "loose.srg", inst)
    code, out = run(capsys, "count", path, "--engine", "dp")
    assert code == EXIT_CAP
    assert out == ""


def test_reduce_sat_then_count(tmp_path, capsys):
    cnf = tmp_path / "phi.cnf"
    cnf.write_text("p cnf 1 1\n1 0\n", encoding="utf-8")
    out = tmp_path / "phi.srg"
    code, _ = run(capsys, "reduce-sat", str(cnf), "--pair", CODE, "--group-width", "2", "--out", str(out))
    assert code == EXIT_OK
    doc = parse_srg(out.read_text(encoding="utf-8"))
    assert doc.decomposition is not None
    code, counted = run(capsys, "--cap", "40", "count", str(out), "--engine", "oracle")
    assert code == EXIT_OK
    assert counted == "1\n"


def test_reduce_sat_is_deterministic(tmp_path, capsys):
    cnf = tmp_path / "phi.cnf"
    cnf.write_text("p cnf 2 1\n1 2 0\n", encoding="utf-8")
    _, first = run(capsys, "reduce-sat", str(cnf), "--pair", CODE, "--group-width", "2")
    _, second = run(capsys, "reduce-sat", str(cnf), "--pair", CODE, "--group-width", "2")
    assert first == second and first.startswith("srg v1\n")


def test_remove_relations_decision_passes_relation_free_input(tmp_path, capsys):
    inst = GraphRelInstance.plain(3, [(0, 1), (1, 2)], Pair.parse(PERFECT))
    path = write_instance(tmp_path / "plain.srg", inst)
    out = tmp_path / "out.srg"
    code, _ = run(capsys, "remove-relations", path, "--mode", "decision", "--out", str(out))
    assert code == EXIT_OK
    assert out.read_bytes() == Path(path).read_bytes()


def test_remove_relations_decision_removes_relations(tmp_path, capsys):
    inst = GraphRelInstance.plain(3, [(0, 1), (1, 2)], Pair.parse(CODE),
                                  constraints=(Constraint.hw_eq([0, 2], 1),))
    path = write_instance(tmp_path / "rel.srg", inst)
    code, out = run(capsys, "remove-relations", path, "--mode", "decision")
    assert code == EXIT_OK
    doc = parse_srg(out)
    assert not doc.instance.constraints
    assert doc.decomposition is not None


def test_remove_relations_counting_matches_direct_count(tmp_path, capsys):
    inst = GraphRelInstance.plain(4, [(0, 1), (1, 2), (2, 3), (3, 0)], Pair.parse(PERFECT),
                                  constraints=(Constraint.hw_eq([0, 2], 1),))
    path = write_instance(tmp_path / "c4.srg", inst)
    plan_path = tmp_path / "plan.json"
    code, out = run(capsys, "remove-relations", path, "--mode", "counting", "--engine", "oracle",
                    "--out", str(plan_path))
    assert code == EXIT_OK
    assert out == "4\n"
    assert '"program"' in plan_path.read_text(encoding="utf-8")


def test_remove_relations_precondition_exit_code(tmp_path, capsys):
    inst = GraphRelInstance.plain(2, [(0, 1)], Pair.parse("sigma=cofinite: rho=cofinite:"),
                                  constraints=(Constraint.hw_eq([0, 1], 1),))
    path = write_instance(tmp_path / "trivial.srg", inst)
    code, _ = run(capsys, "remove-relations", path, "--mode", "counting")
    assert code == EXIT_PIPELINE


def test_build_then_certify(tmp_path, capsys):
    out = tmp_path / "gadget.srg"
    code, _ = run(capsys, "build", "sigma_rho", "s=1", "r=1", "--pair", PERFECT, "--out", str(out))
    assert code == EXIT_OK
    doc = parse_srg(out.read_text(encoding="utf-8"))
    assert doc.portals == (0,)
    code, verdict = run(capsys, "certify", str(out))
    assert code == EXIT_OK
    assert verdict.startswith("verdict=")


def test_certify_detects_a_broken_gadget(tmp_path, capsys):
    out = tmp_path / "gadget.srg"
    run(capsys, "build", "sigma_rho", "s=1", "r=1", "--pair", PERFECT, "--out", str(out))
    lines = out.read_text(encoding="utf-8").splitlines()
    edge = next(i for i, line in enumerate(lines) if line.startswith("edge "))
    broken = tmp_path / "broken.srg"
    broken.write_text("\n".join(lines[:edge] + lines[edge + 1:]) + "\n", encoding="utf-8")
    code, _ = run(capsys, "certify", str(broken))
    assert code == EXIT_PIPELINE


@pytest.mark.parametrize("argv", [
    ["build", "sigma_rho", "s=1", "--pair", PERFECT],
    ["build", "no_such_kind", "--pair", PERFECT],
    ["build", "sigma_rho", "s", "--pair", PERFECT],
])
def test_build_rejects_bad_parameters(argv, capsys):
    code, _ = run(capsys, *argv)
    assert code in (EXIT_INPUT, EXIT_PIPELINE)


def test_manager_build_and_certify(tmp_path, capsys):
    out = tmp_path / "manager.srg"
    code, _ = run(capsys, "build", "manager", "--pair", CODE, "--case", "rcase", "--rank", "1", "--out", str(out))
    assert code == EXIT_OK
    assert parse_srg(out.read_text(encoding="utf-8")).portals is not None
    code, text = run(capsys, "certify", "--manager", "rcase", "--pair", CODE, "--rank", "1")
    assert code == EXIT_OK
    assert key_values(text)["rank"] == "1"
