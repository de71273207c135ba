"""Brute-force reference for one receiver and no eavesdroppers.

Without eavesdroppers artificial noise only hurts, and with a single
receiver the best beam is matched to its channel. Two unknowns remain:
the transmit power p and the splitting ratio rho. The oracle scans a
rectangular grid over both and keeps the cheapest feasible point, then
rescans a smaller box around it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .scenario import ChannelRealization, ScenarioConfig
from .sdp import ProblemInstance


@dataclass(frozen=True)
class OracleResult:
    power_w: float
    rho: float
    grid: tuple[int, int]


def _scan(gain, sa, ss, gam, eta, pmin, rho, p, chunk=256):
    best = (np.inf, np.nan)
    for i in range(0, rho.size, chunk):
        r = rho[i:i + chunk, None]
        ok = (r * p * gain >= gam * (r * sa + ss)) & (eta * (1.0 - r) * (p * gain + sa) >= pmin)
        cost = np.where(ok, p[None, :], np.inf)
        j = np.unravel_index(np.argmin(cost), cost.shape)
        if cost[j] < best[0]:
            best = (float(cost[j]), float(rho[i + j[0]]))
    return best


def grid_oracle(gain: float, sigma_ant: float, sigma_s: float, gamma: float, eta: float,
                p_min: float, n: int = 10_000, zoom: int = 1) -> OracleResult:
    """Minimum power over an ``n`` by ``n`` grid of (rho, p), refined ``zoom`` times.

    ``gain`` is ``||h||^2``. Power values are the transmit power along h.
    """
    if gain <= 0:
        raise ContractError("zero channel gain: no finite power meets the SINR target")
    if p_min > 0 and eta <= 0:
        raise ContractError("harvesting target with zero conversion efficiency")
    # any rho in (0, 1) gives a finite feasible power; use rho = 1/2 to bound the box
    p_hi = 2.0 * max(gamma * (0.5 * sigma_ant + sigma_s) / (0.5 * gain),
                     (p_min / (0.5 * eta) - sigma_ant) / gain if p_min > 0 else 0.0)
    r_lo, r_hi, p_lo = 0.0, 1.0, 0.0
    best = (np.inf, np.nan)
    for _ in range(zoom + 1):
        rho = np.linspace(r_lo, r_hi, n + 2)[1:-1]
        p = np.linspace(p_lo, p_hi, n + 1)
        cand = _scan(gain, sigma_ant, sigma_s, gamma, eta, p_min, rho, p)
        if cand[0] < best[0]:
            best = cand
        if not np.isfinite(best[0]):
            break
        dr, dp = 4 * (r_hi - r_lo) / n, 4 * (p_hi - p_lo) / n
        r_lo, r_hi = max(0.0, best[1] - dr), min(1.0, best[1] + dr)
        p_lo, p_hi = max(0.0, best[0] - dp), best[0] + dp
    return OracleResult(best[0], best[1], (n, n))


def oracle_for(inst: ProblemInstance, n: int = 10_000, zoom: int = 1) -> OracleResult:
    ch, cfg = inst.channels, inst.cfg
    if ch.n_desired != 1 or ch.n_roaming != 0:
        raise ContractError("the grid oracle covers one desired receiver and no roaming receivers")
    gain = float(np.linalg.norm(ch.h[0]) ** 2)
    return grid_oracle(gain, cfg.sigma_ant_w, cfg.sigma_s_w, float(cfg.gamma_req[0]), cfg.eta,
                       float(cfg.p_min_desired_w[0]), n, zoom)


def reference_instance() -> ProblemInstance:
    """Two antennas, unit channel on the first, 0.1 W noises and harvesting target."""
    cfg = ScenarioConfig(
        n_tx=2, n_rx_eav=1, n_desired=1, n_roaming=0, gamma_req_db=0.0,
        p_min_desired_dbm=20.0, eta=0.5, sigma_ant_dbm=20.0, sigma_s_dbm=20.0,
    )
    ch = ChannelRealization(np.array([[1.0, 0.0]]), np.zeros((0, 2, 1)))
    return ProblemInstance(ch, cfg)
