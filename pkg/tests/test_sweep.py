import json

import numpy as np
import pytest

from secure_swipt import ConfigError, ScenarioConfig
from secure_swipt.sweep import (
    CSV_SCHEMA, ROW_FIELDS, SWEEP_SCHEMA, SweepReport, SweepSpec, TrialResult, aggregate, emit_csv, load_sweep,
    read_csv, run_sweep, trial_channels,
)

SMALL = SweepSpec(gamma_req_grid_db=(0.0, 10.0), n_tx_grid=(5,), trials=1, seed=3)


def test_defaults():
    spec = SweepSpec()
    assert spec.gamma_req_grid_db == (0.0, 5.0, 10.0, 15.0, 20.0)
    assert spec.n_tx_grid == (5, 8)
    assert spec.trials == 50
    assert spec.schemes == ("optimal", "zf-opt-rho", "zf-fixed-rho")


@pytest.mark.parametrize("kw,field", [
    ({"trials": 0}, "trials"), ({"gamma_req_grid_db": ()}, "gamma_req_grid_db"),
    ({"n_tx_grid": ()}, "n_tx_grid"), ({"n_tx_grid": (2,)}, "n_tx_grid"),
    ({"schemes": ("mrt",)}, "schemes"), ({"workers": 0}, "workers"),
])
def test_validation(kw, field):
    with pytest.raises(ConfigError) as err:
        SweepSpec(**kw)
    assert field in err.value.fields


def test_file_round_trip(tmp_path):
    spec = SweepSpec(trials=3, seed=9, base=ScenarioConfig(eta=0.3))
    p = tmp_path / "s.json"
    p.write_text(json.dumps(spec.to_dict()))
    assert load_sweep(p) == spec
    assert spec.to_dict()["schema"] == SWEEP_SCHEMA
    p.write_text(json.dumps({"trials": 2, "oops": 1}))
    with pytest.raises(ConfigError):
        load_sweep(p)


def test_channels_shared_and_truncated():
    spec = SweepSpec(trials=2)
    a, b = trial_channels(spec, 1), trial_channels(spec, 1)
    np.testing.assert_array_equal(a.h, b.h)
    assert a.n_tx == 8
    assert not np.array_equal(trial_channels(spec, 0).h, a.h)


def _result(g, n, s, t, feasible=True, p=1.0):
    return TrialResult(g, n, s, t, "Optimal" if feasible else "Infeasible", feasible, True,
                       p, p / 2, p / 2, 1.0, 0.5, 1e-3, 0.1)


def test_joint_feasibility_averaging():
    spec = SweepSpec(gamma_req_grid_db=(0.0,), n_tx_grid=(5,), schemes=("optimal", "zf-opt-rho"), trials=3)
    res = [
        _result(0.0, 5, "optimal", 0, p=1.0), _result(0.0, 5, "zf-opt-rho", 0, p=2.0),
        _result(0.0, 5, "optimal", 1, p=3.0), _result(0.0, 5, "zf-opt-rho", 1, feasible=False),
        _result(0.0, 5, "optimal", 2, p=5.0), _result(0.0, 5, "zf-opt-rho", 2, p=4.0),
    ]
    rep = aggregate(res, spec)
    opt = rep.row(0.0, 5, "optimal")
    assert (opt.trials, opt.feasible, opt.joint) == (3, 3, 2)
    # trial 1 is dropped: mean of 1 W and 5 W
    assert opt.total_power_dbm == pytest.approx(10 * np.log10(3.0 * 1e3))
    b1 = rep.row(0.0, 5, "zf-opt-rho")
    assert b1.feasibility_rate == pytest.approx(2 / 3)
    assert b1.total_power_dbm == pytest.approx(10 * np.log10(3.0 * 1e3))
    # order of results does not matter
    assert aggregate(res[::-1], spec).rows == rep.rows


def test_empty_and_single_row_csv(tmp_path):
    p = emit_csv(SweepReport([]), tmp_path / "empty.csv")
    lines = p.read_text().splitlines()
    assert lines == [f"# schema: {CSV_SCHEMA}", ",".join(ROW_FIELDS)]
    spec = SweepSpec(gamma_req_grid_db=(0.0,), n_tx_grid=(5,), schemes=("optimal",), trials=1)
    rep = aggregate([_result(0.0, 5, "optimal", 0)], spec)
    p = emit_csv(rep, tmp_path / "one.csv")
    body = [ln for ln in p.read_text().splitlines() if not ln.startswith("#")]
    assert len(body) == 2
    row = read_csv(p)[0]
    assert row["total_power_dbm"] == "30.0000"
    assert set(row) == set(ROW_FIELDS)


def test_unwritable_path(tmp_path):
    with pytest.raises(OSError, match="cannot write"):
        emit_csv(SweepReport([]), tmp_path / "no" / "such" / "dir.csv")


def test_read_rejects_foreign_file(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ConfigError):
        read_csv(p)


def test_rerun_is_byte_identical(tmp_path):
    a = emit_csv(run_sweep(SMALL), tmp_path / "a.csv").read_bytes()
    b = emit_csv(run_sweep(SMALL), tmp_path / "b.csv").read_bytes()
    assert a == b
    rows = read_csv(tmp_path / "a.csv")
    assert len(rows) == 2 * 3
    assert all(r["feasibility_rate"] == "1.0000" for r in rows)


def test_worker_pool_matches_serial(tmp_path):
    serial = run_sweep(SMALL)
    pooled = run_sweep(SweepSpec(**{**SMALL.__dict__, "workers": 2}))
    for a, b in zip(serial.rows, pooled.rows):
        assert a.total_power_dbm == pytest.approx(b.total_power_dbm, abs=1e-9)
        assert (a.gamma_req_db, a.n_tx, a.scheme) == (b.gamma_req_db, b.n_tx, b.scheme)
