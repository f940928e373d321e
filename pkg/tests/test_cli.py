import json
import math

import numpy as np
import pytest

from logdet_lmi.cli import (
    EXIT_CONE,
    EXIT_INFEASIBLE,
    EXIT_MAX_ITER,
    EXIT_OK,
    EXIT_PARSE,
    constraint_from_json,
    constraint_to_json,
    load_problem,
    main,
)
from logdet_lmi.lmi import constraint_equal, lift_f, lift_g


def write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def eval_file(tmp_path, **extra):
    payload = {
        "version": "1",
        "kind": "F",
        "K": [[1.0, 0.0], [0.0, 1.0]],
        "X": [[1.0, 0.0], [0.0, 1.0]],
    }
    payload.update(extra)
    return write(tmp_path, "prob.json", payload)


def box_problem(tmp_path, **extra):
    payload = {
        "version": "1",
        "kind": "G",
        "K": [[1.0]],
        "H": {
            "name": "box",
            "blocks": [
                [[{"const": [[2.0]]}, {"var": "X", "sign": -1}], None],
                [None, [{"var": "X"}, {"const": [[-0.5]]}]],
            ],
        },
    }
    payload.update(extra)
    return write(tmp_path, "box.json", payload)


def test_eval_command(tmp_path, capsys):
    json_out = tmp_path / "report.json"
    code = main(["eval", "--input", eval_file(tmp_path), "--json", str(json_out)])
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert "1.38629436" in out
    report = json.loads(json_out.read_text())
    assert report["format_version"] == "1"
    assert report["value"] == pytest.approx(2 * math.log(2.0))
    assert np.allclose(report["z_star"], 0.5 * np.eye(2))
    assert abs(report["lift_margin"]) < 1e-9
    assert report["sylvester"]["lhs"] == pytest.approx(report["sylvester"]["rhs"])
    assert report["tolerances"]["cone_tol"] == 1e-9


def test_eval_scalar_g(tmp_path, capsys):
    path = write(
        tmp_path,
        "g.json",
        {"version": "1", "kind": "G", "K": [[2.0]], "X": [[4.0]]},
    )
    assert main(["eval", "--input", path]) == EXIT_OK
    out = capsys.readouterr().out
    assert "0.810930216" in out
    assert "0.444444444" in out


def test_eval_zero_k(tmp_path, capsys):
    path = write(
        tmp_path,
        "z.json",
        {
            "version": "1",
            "kind": "F",
            "K": [[0.0, 0.0], [0.0, 0.0]],
            "X": [[3.0, 0.0], [0.0, 7.0]],
        },
    )
    assert main(["eval", "--input", path]) == EXIT_OK
    assert "value: 0" in capsys.readouterr().out


def test_eval_requires_x(tmp_path, capsys):
    path = write(tmp_path, "nox.json", {"version": "1", "kind": "F", "K": [[1.0]]})
    assert main(["eval", "--input", path]) == EXIT_PARSE


def test_parse_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["eval", "--input", str(bad)]) == EXIT_PARSE
    assert main(["eval", "--input", str(tmp_path / "missing.json")]) == EXIT_PARSE
    assert (
        main(["eval", "--input", write(tmp_path, "v2.json", {"version": "2", "kind": "F", "K": [[1.0]]})])
        == EXIT_PARSE
    )
    assert (
        main(["eval", "--input", write(tmp_path, "k.json", {"version": "1", "kind": "Q", "K": [[1.0]]})])
        == EXIT_PARSE
    )


def test_asymmetric_matrix_rejected(tmp_path):
    path = write(
        tmp_path,
        "asym.json",
        {"version": "1", "kind": "F", "K": [[1.0, 0.5], [0.0, 1.0]], "X": [[1.0, 0.0], [0.0, 1.0]]},
    )
    assert main(["eval", "--input", path]) == EXIT_PARSE


def test_cone_violations_exit_2(tmp_path):
    indefinite_k = write(
        tmp_path,
        "ik.json",
        {"version": "1", "kind": "F", "K": [[1.0, 2.0], [2.0, 1.0]], "X": [[1.0, 0.0], [0.0, 1.0]]},
    )
    assert main(["eval", "--input", indefinite_k]) == EXIT_CONE
    singular_x = write(
        tmp_path,
        "sx.json",
        {"version": "1", "kind": "F", "K": [[1.0]], "X": [[0.0]]},
    )
    assert main(["eval", "--input", singular_x]) == EXIT_CONE


def test_tol_env_override(tmp_path, monkeypatch):
    slightly_indefinite = write(
        tmp_path,
        "si.json",
        {
            "version": "1",
            "kind": "F",
            "K": [[1.0, 0.0], [0.0, -1e-6]],
            "X": [[1.0, 0.0], [0.0, 1.0]],
        },
    )
    assert main(["eval", "--input", slightly_indefinite]) == EXIT_CONE
    monkeypatch.setenv("LOGDET_LMI_TOL", "1e-3")
    assert main(["eval", "--input", slightly_indefinite]) == EXIT_OK
    monkeypatch.setenv("LOGDET_LMI_TOL", "not-a-number")
    assert main(["eval", "--input", slightly_indefinite]) == EXIT_PARSE


def test_lift_command_and_round_trip(tmp_path, capsys):
    json_out = tmp_path / "lift.json"
    path = write(tmp_path, "l.json", {"version": "1", "kind": "F", "K": [[1.0]]})
    assert main(["lift", "--input", path, "--json", str(json_out)]) == EXIT_OK
    out = capsys.readouterr().out
    assert ">= 0" in out and "Z" in out and "X" in out
    report = json.loads(json_out.read_text())
    reparsed = constraint_from_json(report["constraint"])
    assert constraint_equal(lift_f([[1.0]]).constraint, reparsed)


def test_lift_round_trip_g(tmp_path):
    original = lift_g([[4.0, 0.0], [0.0, 1.0]]).constraint
    doc = json.loads(json.dumps(constraint_to_json(original)))
    reparsed = constraint_from_json(doc)
    assert constraint_equal(original, reparsed)
    # and a second round trip is bit-identical
    assert json.dumps(constraint_to_json(reparsed)) == json.dumps(doc)


def test_solve_constrained_box(tmp_path, capsys):
    json_out = tmp_path / "sol.json"
    code = main(["solve", "--input", box_problem(tmp_path), "--json", str(json_out)])
    assert code == EXIT_OK
    report = json.loads(json_out.read_text())
    assert report["status"] == "OPTIMAL"
    assert report["assignment"]["X"][0][0] == pytest.approx(2.0, abs=1e-4)
    assert report["objective"] == pytest.approx(math.log(1.5), abs=1e-5)
    assert all(m >= -1e-7 for m in report["margins"].values())


def test_solve_lifted_when_x_frozen(tmp_path, capsys):
    code = main(["solve", "--input", eval_file(tmp_path)])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "OPTIMAL" in out
    assert "1.3862943" in out


def test_solve_needs_h_or_x(tmp_path):
    path = write(tmp_path, "n.json", {"version": "1", "kind": "G", "K": [[1.0]]})
    assert main(["solve", "--input", path]) == EXIT_PARSE


def test_solve_trace_streams_to_stderr(tmp_path, capsys):
    assert main(["solve", "--input", box_problem(tmp_path), "--trace"]) == EXIT_OK
    err = capsys.readouterr().err
    assert "t=" in err and "dec=" in err and "margin=" in err


def test_solve_infeasible_exit_3(tmp_path):
    path = write(
        tmp_path,
        "inf.json",
        {
            "version": "1",
            "kind": "G",
            "K": [[1.0]],
            "H": {"blocks": [[[{"const": [[-1.0]]}]]]},
        },
    )
    assert main(["solve", "--input", path]) == EXIT_INFEASIBLE


def test_solve_max_iter_exit_4(tmp_path):
    path = eval_file(tmp_path, solver={"max_outer": 1})
    assert main(["solve", "--input", path]) == EXIT_MAX_ITER


def test_unknown_solver_option_rejected(tmp_path):
    path = eval_file(tmp_path, solver={"warp_speed": 9})
    assert main(["solve", "--input", path]) == EXIT_PARSE


def test_h_with_foreign_variable_rejected(tmp_path):
    path = box_problem(tmp_path)
    doc = json.loads(open(path).read())
    doc["H"]["blocks"][0][0] = [{"var": "Y"}]
    path2 = write(tmp_path, "alien.json", doc)
    assert main(["solve", "--input", path2]) == EXIT_PARSE


def test_verify_strict_case(tmp_path, capsys):
    json_out = tmp_path / "verify.json"
    code = main(
        ["verify", "--input", eval_file(tmp_path), "--trials", "80", "--seed", "5",
         "--json", str(json_out)]
    )
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "STRICT_CONSISTENT" in out
    report = json.loads(json_out.read_text())
    assert report["verdict"] == "STRICT_CONSISTENT"
    assert report["seed"] == 5
    assert report["injective"] is True
    assert report["hessian_min"] >= -1e-4
    assert "convexity_tol" in report["tolerances"]


def test_verify_singular_k_lists_witnesses(tmp_path, capsys):
    path = write(
        tmp_path,
        "sing.json",
        {"version": "1", "kind": "F", "K": [[1.0, 0.0], [0.0, 0.0]]},
    )
    assert main(["verify", "--input", path, "--trials", "80"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "CONVEX_CONSISTENT" in out
    assert "collision found" in out


def test_verify_g_zero_k_strict(tmp_path, capsys):
    path = write(
        tmp_path,
        "g0.json",
        {"version": "1", "kind": "G", "K": [[0.0, 0.0], [0.0, 0.0]]},
    )
    assert main(["verify", "--input", path, "--trials", "80"]) == EXIT_OK
    assert "STRICT_CONSISTENT" in capsys.readouterr().out


def test_structure_field_parsing(tmp_path):
    pf = load_problem(
        write(
            tmp_path,
            "st.json",
            {"version": "1", "kind": "F", "K": [[1.0]], "structure": "diagonal"},
        )
    )
    assert pf.structure.value == "DIAGONAL"
    assert (
        main(["solve", "--input", write(tmp_path, "stb.json", {"version": "1", "kind": "F", "K": [[1.0]], "structure": "SPARSE"})])
        == EXIT_PARSE
    )
