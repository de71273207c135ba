import numpy as np
import pytest

from reference import cvxpy_relaxation, unit_instance
from secure_swipt import (
    BuildError, ChannelRealization, ProblemInstance, ScenarioConfig, build_program, generate_scenario,
    solve_instance, verify_primal,
)
from secure_swipt.oracle import grid_oracle, oracle_for, reference_instance
from secure_swipt.recovery import stationarity_residual
from secure_swipt.sdp import INFEASIBLE, OPTIMAL, BeamformingSolution

# frozen from a reviewed run; both solvers and the grid agree on the first one
REFERENCE_POWER_W = 0.3        # exact: both constraints bind at rho = 1/2
SEED0_OPTIMAL_W = 47.29283843884838


def test_reference_instance_exact():
    sol, _ = solve_instance(reference_instance())
    assert sol.status == OPTIMAL
    assert sol.objective_w == pytest.approx(REFERENCE_POWER_W, rel=1e-6)
    assert sol.rho[0] == pytest.approx(0.5, abs=1e-5)
    assert np.trace(sol.V).real == pytest.approx(0.0, abs=1e-7)


def test_grid_oracle_agrees():
    ref = oracle_for(reference_instance(), n=2000, zoom=2)
    assert ref.power_w == pytest.approx(REFERENCE_POWER_W, rel=1e-4)
    assert ref.rho == pytest.approx(0.5, abs=1e-3)


def test_grid_oracle_without_harvesting():
    # only the SINR constraint: p = gamma (sigma_a + sigma_s) / |h|^2 at rho -> 1
    r = grid_oracle(2.0, 0.1, 0.1, 1.0, 0.5, 0.0, n=2000, zoom=2)
    assert r.power_w == pytest.approx(0.1, rel=2e-3)


def test_no_harvesting_requirement():
    inst = reference_instance()
    cfg = inst.cfg.replace(p_min_desired_dbm=None)
    sol, _ = solve_instance(ProblemInstance(inst.channels, cfg))
    assert sol.objective_w == pytest.approx(0.2, rel=1e-6)
    assert sol.rho[0] == pytest.approx(1.0, abs=1e-6)


def test_zero_channel_is_infeasible():
    inst = reference_instance()
    ch = ChannelRealization(np.zeros((1, 2)), np.zeros((0, 2, 1)))
    sol, cert = solve_instance(ProblemInstance(ch, inst.cfg))
    assert sol.status == INFEASIBLE
    assert np.all(np.isnan(sol.W))
    assert cert.ray is not None


def test_block_counts(inst0):
    prog = build_program(inst0)
    kinds = [(b.tag.split("[")[0], b.kind) for b in prog.blocks]
    dims = prog.cone.dims
    assert sorted(dims.s).count(16) == 4
    assert sorted(dims.s).count(4) == 6
    assert kinds.count(("C1", "lp")) == 3
    assert kinds.count(("C4", "lp")) == 2
    assert len(dims.q) == 6


def test_frozen_regression(solved0, inst0):
    sol, cert = solved0
    assert sol.status == OPTIMAL
    assert sol.objective_w == pytest.approx(SEED0_OPTIMAL_W, rel=1e-6)
    assert verify_primal(inst0, sol).feasible
    assert abs(cert.duality_gap) <= 1e-6 * sol.objective_w
    assert cert.primal_objective == pytest.approx(cert.dual_objective, rel=1e-6)
    assert stationarity_residual(cert, inst0).max() < 1e-6


def test_rank_one_solution_meets_det_form(solved0, inst0):
    sol, _ = solved0
    rep = verify_primal(inst0, sol)
    assert rep.ranks == [1, 1, 1]
    assert np.all(rep.eav_bits <= inst0.cfg.r_eav_matrix + 1e-6)


def test_homogeneity(inst0, solved0):
    c_db = 6.0
    cfg = inst0.cfg
    scaled = cfg.replace(
        sigma_ant_dbm=cfg.sigma_ant_dbm + c_db, sigma_s_dbm=cfg.sigma_s_dbm + c_db,
        p_min_desired_dbm=cfg.p_min_desired_dbm + c_db, p_min_roaming_dbm=cfg.p_min_roaming_dbm + c_db,
    )
    sol, _ = solve_instance(ProblemInstance(inst0.channels, scaled))
    assert sol.objective_w == pytest.approx(solved0[0].objective_w * 10 ** (c_db / 10), rel=1e-6)


def test_unitary_invariance(inst0, solved0, rng):
    Q, R = np.linalg.qr(rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8)))
    sol, _ = solve_instance(ProblemInstance(inst0.channels.rotate(Q), inst0.cfg))
    assert sol.objective_w == pytest.approx(solved0[0].objective_w, rel=1e-6)
    # the beams rotate along with the channels
    W_back = np.einsum("ji,kjl,lm->kim", Q.conj(), sol.W, Q)
    np.testing.assert_allclose(W_back, solved0[0].W, atol=1e-4 * np.abs(solved0[0].W).max())


def test_monotone_in_sinr_target():
    cfg = ScenarioConfig(n_tx=5)
    ch = generate_scenario(cfg, 4)
    objs = [solve_instance(ProblemInstance(ch, cfg.replace(gamma_req_db=g)))[0].objective_w for g in (0, 6, 12)]
    assert objs[0] <= objs[1] <= objs[2]


@pytest.mark.parametrize("seed,kw", [
    (0, {}), (1, {"n_tx": 5, "K": 3, "M": 2, "gamma_db": 10.0}), (2, {"n_tx": 3, "K": 1, "roam_dbm": 30.0}),
])
def test_matches_cvxpy(seed, kw):
    inst = unit_instance(seed, **kw)
    status, ref = cvxpy_relaxation(inst)
    sol, _ = solve_instance(inst)
    assert sol.status == OPTIMAL
    assert status.startswith("optimal")
    assert sol.objective_w == pytest.approx(ref, rel=1e-4)
    assert verify_primal(inst, sol).feasible


def test_verify_flags_each_violation(solved0, inst0):
    sol = solved0[0]
    weak = BeamformingSolution(sol.W * 0.9, sol.V, sol.rho, 0.0, OPTIMAL)
    assert "C1" in verify_primal(inst0, weak).violations
    loud = BeamformingSolution(sol.W * 3.0, sol.V * 0.0, sol.rho, 0.0, OPTIMAL)
    assert "C2" in verify_primal(inst0, loud).violations
    greedy = BeamformingSolution(sol.W, sol.V, np.full(3, 1.0), 0.0, OPTIMAL)
    assert "C3" in verify_primal(inst0, greedy).violations
    bad_v = sol.V - 2 * np.trace(sol.V).real * np.eye(8)
    assert "C6" in verify_primal(inst0, BeamformingSolution(sol.W, bad_v, sol.rho, 0.0, OPTIMAL)).violations
    out_of_range = BeamformingSolution(sol.W, sol.V, np.array([0.5, 1.2, 0.5]), 0.0, OPTIMAL)
    assert "C5" in verify_primal(inst0, out_of_range).violations


def test_mismatched_instance_rejected(default_cfg):
    ch = generate_scenario(default_cfg.replace(n_desired=2), 0)
    with pytest.raises(BuildError):
        ProblemInstance(ch, default_cfg)


def test_single_large_solve_is_fast(inst0):
    sol, _ = solve_instance(inst0)
    assert sol.solve_time_s < 2.0
