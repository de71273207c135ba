import numpy as np
import pytest

from secure_swipt import (
    ChannelRealization, ContractError, ProblemInstance, ScenarioConfig, generate_scenario, solve_scheme,
    verify_primal, zf_directions,
)
from secure_swipt.baselines import FIXED_RHO, SCHEMES
from secure_swipt.oracle import reference_instance
from secure_swipt.sdp import INFEASIBLE, OPTIMAL


def test_nulling(default_cfg):
    ch = generate_scenario(default_cfg, 11)
    zf = zf_directions(ch)
    assert zf.directions.shape == (3, 8)
    np.testing.assert_allclose(np.linalg.norm(zf.directions, axis=1), 1.0)
    assert zf.nulling_error(ch) <= 1e-8
    # each beam keeps a nonzero gain toward its own receiver
    gains = np.abs(np.einsum("kn,kn->k", ch.h.conj(), zf.directions))
    assert np.all(gains > 1e-3 * np.linalg.norm(ch.h, axis=1))


def test_single_user_is_matched_filter():
    ch = ChannelRealization(np.array([[3.0, 4.0j]]), np.zeros((0, 2, 1)))
    d = zf_directions(ch).directions[0]
    assert abs(np.vdot(d, ch.h[0])) == pytest.approx(5.0)


def test_too_many_users():
    ch = ChannelRealization(np.ones((3, 2)), np.zeros((0, 2, 1)))
    with pytest.raises(ContractError):
        zf_directions(ch)


def test_unknown_scheme(inst0):
    with pytest.raises(ContractError):
        solve_scheme(inst0, "mrt")


@pytest.mark.parametrize("seed", [0, 5])
def test_ordering_and_feasibility(default_cfg, seed):
    inst = ProblemInstance(generate_scenario(default_cfg, seed), default_cfg)
    sols = {s: solve_scheme(inst, s)[0] for s in SCHEMES}
    assert all(s.status == OPTIMAL for s in sols.values())
    opt, b1, b2 = (sols[s].objective_w for s in SCHEMES)
    assert opt <= b1 * (1 + 1e-6)
    assert b1 <= b2 * (1 + 1e-6)
    np.testing.assert_array_equal(sols["zf-fixed-rho"].rho, FIXED_RHO)
    for s in SCHEMES[1:]:
        assert verify_primal(inst, sols[s]).feasible
        # beams stay on their zero-forcing directions
        zf = zf_directions(inst.channels)
        for k, Wk in enumerate(sols[s].W):
            d = zf.directions[k]
            np.testing.assert_allclose(Wk, np.trace(Wk).real * np.outer(d, d.conj()), atol=1e-9 * np.abs(Wk).max())


def test_coincidence_case():
    # one user, no eavesdropper: zero forcing is matched filtering and the best ratio is 1/2
    inst = reference_instance()
    objs = [solve_scheme(inst, s)[0].objective_w for s in SCHEMES]
    assert objs == pytest.approx([0.3, 0.3, 0.3], rel=1e-6)


def test_fixed_ratio_can_be_infeasible():
    # an eavesdropper on the user's line of sight at 10 dB lower gain: secrecy
    # caps the user's SINR at 10 for rho -> 1 but at 20/3 for rho = 1/2
    cfg = ScenarioConfig(
        n_tx=2, n_rx_eav=1, n_desired=1, n_roaming=1, gamma_req_db=9.0,
        p_min_desired_dbm=None, p_min_roaming_dbm=None, sigma_ant_dbm=20.0, sigma_s_dbm=20.0,
    )
    h = np.array([[1, 0]], complex)
    g = np.zeros((1, 2, 1), complex)
    g[0, 0, 0] = np.sqrt(0.1)
    inst = ProblemInstance(ChannelRealization(h, g), cfg)
    b1, _ = solve_scheme(inst, "zf-opt-rho")
    b2, _ = solve_scheme(inst, "zf-fixed-rho")
    assert b1.status == OPTIMAL and b2.status == INFEASIBLE
    assert b1.objective_w == pytest.approx(0.2 * 10 ** 0.9, rel=1e-6)
