import json

import pytest

from legendre_betti.cli import main, run


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_multiples_reports_factorization(capsys):
    code, out, _ = _run(capsys, "multiples", "--n", "4")
    data = json.loads(out)
    assert code == 0
    assert data["B"] == "288*l^7 - 3648*l^6 + 17408*l^5 - 38912*l^4 + 40960*l^3 - 16384*l^2"
    assert data["b_n"] == "32"
    assert ["3*l - 4", 2] in data["factorization_B"]["factors"]


def test_roth_expand_zero_terms_is_usage_error(capsys):
    code, _, err = _run(capsys, "roth", "expand", "--prec", "0")
    assert code == 2
    assert "manifest" in err


def test_unknown_flag_prints_usage(capsys):
    code, _, err = _run(capsys, "xi", "--frobnicate")
    assert code == 2
    assert "usage:" in err


def test_malformed_config_exit_two(tmp_path, capsys):
    bad = tmp_path / "cfg.json"
    bad.write_text("{not json")
    assert _run(capsys, "report-all", "--config", str(bad))[0] == 2
    bad.write_text(json.dumps({"n_max": 2}))
    assert _run(capsys, "report-all", "--config", str(bad))[0] == 2


def test_reduced_report(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_max": 4, "only": ["golden_abscissa_table", "degree_laws",
                                                     "xi_golden_values", "conjugate_branch"]}))
    code, out, _ = _run(capsys, "report-all", "--config", str(cfg))
    data = json.loads(out)
    assert code == 0 and data["all_passed"]
    assert set(data["matrix"]) == {"golden_abscissa_table", "degree_laws", "xi_golden_values",
                                   "conjugate_branch"}


def test_out_directory_and_manifest(tmp_path, capsys):
    code, _, _ = _run(capsys, "--out", str(tmp_path), "roth", "gaps", "--depth", "30")
    assert code == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "roth gaps"
    assert json.loads((tmp_path / "result.json").read_text())["max_gap"] == 2


def test_density_grid_is_csv(tmp_path, capsys):
    code, _, _ = _run(capsys, "density-grid", "--window", "0,0.5,0,0.5", "--step", "0.25", "--out", str(tmp_path))
    assert code == 0
    lines = (tmp_path / "result.csv").read_text().splitlines()
    assert lines[0] == "re_lambda,im_lambda,density"
    assert len(lines) == 1 + 9
    assert lines[1].endswith("nan")


def test_height_integral_json(capsys):
    code, out, _ = _run(capsys, "height-integral", "--eps", "1e-3", "--tol", "1e-2")
    data = json.loads(out)
    assert code == 0
    assert abs(data["value"] - 0.25) < 0.01
    assert {"value", "error_estimate", "cells", "excluded_mass_bound"} <= set(data)


def test_betti_eval_and_singular_point(capsys):
    code, out, _ = _run(capsys, "betti-eval", "--lambda", "0.3,0.4", "--method", "both")
    assert code == 0 and json.loads(out)["density_relative_gap"] < 1e-6
    code, _, _ = _run(capsys, "betti-eval", "--lambda", "0,0")
    assert code == 2


def test_torsion_count_plane(capsys):
    code, out, _ = _run(capsys, "torsion-count", "--n", "20")
    assert code == 0 and json.loads(out)["N_n"] == 100


def test_exact_subcommands(capsys):
    for argv in (["xi", "--n", "3"], ["mult-scan", "--nmax", "5"], ["sharpness", "--d", "2", "3"],
                 ["two-beta", "--random", "2"], ["qi-report", "--nmax", "5"], ["wang-check", "--random", "3"],
                 ["roth", "cf", "--maxdeg", "6"], ["roth", "check", "--maxdeg", "10"]):
        code, out, _ = _run(capsys, *argv)
        assert code == 0, argv
        json.loads(out)


def test_torsion_section_is_assertion_failure(capsys):
    code, _, _ = _run(capsys, "xi", "--section", '{"x": "0", "mu_sq": "1"}')
    assert code in (1, 2)


def test_precision_unreachable_exit_three(capsys):
    code, _, _ = _run(capsys, "height-integral", "--tol", "1e-12", "--max-cells", "20")
    assert code == 3


def test_wang_instance_file(tmp_path, capsys):
    path = tmp_path / "inst.json"
    path.write_text(json.dumps({"S": ["t", "inf"], "A_star": ["t"], "r": 0, "f": "t + 1",
                                "choices": {"inf": "t"}}))
    code, out, _ = _run(capsys, "wang-check", "--instance", str(path))
    assert code == 0 and json.loads(out)["instance"]["hypothesis_held"]
    path.write_text(json.dumps({"S": ["t"], "A_star": ["t - 1"], "f": "t"}))
    assert _run(capsys, "wang-check", "--instance", str(path))[0] == 2


def test_run_is_deterministic():
    a = run(["roth", "check", "--maxdeg", "12"])
    b = run(["roth", "check", "--maxdeg", "12"])
    assert a[2].outputs_digest == b[2].outputs_digest
