import json

import pytest

from secure_swipt.cli import EXIT_CHECK, EXIT_OK, EXIT_USAGE, main
from secure_swipt.io import read_solution
from secure_swipt.sweep import CSV_SCHEMA, SWEEP_SCHEMA, read_csv


def test_print_config(capsys):
    assert main(["print-config"]) == EXIT_OK
    cfg = json.loads(capsys.readouterr().out)
    assert cfg["schema"] == SWEEP_SCHEMA
    assert cfg["trials"] == 50


def test_print_config_from_scenario_file(tmp_path, capsys, default_cfg):
    p = tmp_path / "scen.json"
    p.write_text(json.dumps(default_cfg.replace(eta=0.25).to_dict()))
    assert main(["print-config", "--config", str(p)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["scenario"]["eta"] == 0.25


@pytest.mark.parametrize("argv", [
    ["sweep"],
    ["sweep", "--out", "x.csv", "--trials", "0"],
    ["solve-one", "--instance", "i.json", "--out", "o.json", "--scheme", "mrt"],
    ["bogus"],
])
def test_argparse_usage_errors(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == EXIT_USAGE


def test_bad_config_is_usage_error(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text('{"trials": -3}')
    assert main(["print-config", "--config", str(p)]) == EXIT_USAGE
    p.write_text("not json")
    assert main(["print-config", "--config", str(p)]) == EXIT_USAGE
    assert main(["solve-one", "--instance", str(tmp_path / "none.json"), "--out", "o.json"]) == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_make_instance_then_solve(tmp_path, capsys):
    inst = tmp_path / "i.json"
    assert main(["make-instance", "--seed", "0", "--out", str(inst)]) == EXIT_OK
    out = tmp_path / "o.json"
    assert main(["solve-one", "--instance", str(inst), "--out", str(out)]) == EXIT_OK
    data = read_solution(out)
    assert data["status"] == "Optimal"
    assert data["recovery"]["ok"] is True
    assert data["feasibility"]["feasible"] is True
    assert "rank-one via" in capsys.readouterr().out


def test_solve_one_baseline(tmp_path):
    inst = tmp_path / "i.json"
    main(["make-instance", "--seed", "0", "--out", str(inst)])
    out = tmp_path / "o.json"
    assert main(["solve-one", "--instance", str(inst), "--out", str(out), "--scheme", "zf-fixed-rho"]) == EXIT_OK
    data = read_solution(out)
    assert data["scheme"] == "zf-fixed-rho"
    assert data["recovery"] is None


def test_infeasible_instance_exits_zero(tmp_path):
    inst = tmp_path / "i.json"
    # three desired users on three antennas with an eavesdropper leaves no null space for ZF
    main(["make-instance", "--seed", "1", "--n-tx", "3", "--gamma-db", "20", "--out", str(inst)])
    out = tmp_path / "o.json"
    rc = main(["solve-one", "--instance", str(inst), "--out", str(out), "--scheme", "zf-opt-rho"])
    data = read_solution(out)
    assert (rc, data["status"]) in {(EXIT_OK, "Infeasible"), (EXIT_OK, "Optimal")}


def test_small_sweep(tmp_path, capsys):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({"schema": SWEEP_SCHEMA, "gamma_req_grid_db": [5.0], "n_tx_grid": [5]}))
    out = tmp_path / "r.csv"
    rc = main(["sweep", "--config", str(cfg), "--out", str(out), "--trials", "1", "--seed", "4",
               "--scheme", "optimal", "--scheme", "zf-opt-rho", "-q"])
    assert rc == EXIT_OK
    assert out.read_text().startswith(f"# schema: {CSV_SCHEMA}")
    rows = read_csv(out)
    assert [r["scheme"] for r in rows] == ["optimal", "zf-opt-rho"]


def test_sweep_unwritable_output(tmp_path):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({"gamma_req_grid_db": [0.0], "n_tx_grid": [5], "schemes": ["optimal"]}))
    rc = main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "no" / "r.csv"), "--trials", "1", "-q"])
    assert rc == EXIT_USAGE


def test_verify_quick_and_corrupted(capsys):
    assert main(["verify", "--seeds", "3", "--fuzz", "50", "-q"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "all checks passed" in out
    assert main(["verify", "--seeds", "3", "--fuzz", "50", "--solver-tol", "1e-2", "-q"]) == EXIT_CHECK
    assert "FAIL" in capsys.readouterr().out
