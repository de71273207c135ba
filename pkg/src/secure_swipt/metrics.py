"""Closed-form link quantities: SINR, eavesdropper capacity bound, secrecy
capacity and harvested power.

Shapes follow :class:`~secure_swipt.scenario.ChannelRealization`: ``W`` is
(K, N_T, N_T), ``V`` is (N_T, N_T), ``rho`` is (K,), ``h`` is (K, N_T) and
``g`` is (M, N_T, N_R). Powers are linear Watts, capacities bit/s/Hz.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .hermitian import hermitian_part, numerical_rank, psd_sqrt_inv

GAP_TOL = 1e-9
EIG_TOL = 1e-8


def quad(h: np.ndarray, A: np.ndarray) -> float:
    """Real quadratic form h^H A h."""
    return float(np.real(np.vdot(h, A @ h)))


def sinr(k: int, W, V, rho, h, sigma_ant: float, sigma_s: float) -> float:
    rho_k = float(rho[k])
    if rho_k == 0.0:
        return 0.0
    hk = h[k]
    signal = quad(hk, W[k])
    interference = sum(quad(hk, W[j]) for j in range(len(W)) if j != k)
    an = quad(hk, V)
    return rho_k * signal / (rho_k * (interference + an + sigma_ant) + sigma_s)


def capacity(sinr_value: float) -> float:
    return float(np.log2(1.0 + sinr_value))


def _eav_inner(m: int, k: int, W, V, g, sigma_ant: float, sigma_s: float) -> np.ndarray:
    """Q^{-1/2} G^H W_k G Q^{-1/2} with Q the eavesdropper noise-plus-AN covariance."""
    G = g[m]
    n_r = G.shape[1]
    Q = G.conj().T @ V @ G + (sigma_ant + sigma_s) * np.eye(n_r)
    Qi = psd_sqrt_inv(Q)
    return hermitian_part(Qi @ (G.conj().T @ W[k] @ G) @ Qi)


def eav_capacity_upper(m: int, k: int, W, V, g, sigma_ant: float, sigma_s: float) -> float:
    """Worst-case (all power to the decoder) rate of eavesdropper m on stream k."""
    lam = np.linalg.eigvalsh(_eav_inner(m, k, W, V, g, sigma_ant, sigma_s))
    return float(np.sum(np.log2(1.0 + np.maximum(lam, 0.0))))


def eav_capacity_trace_form(m: int, k: int, W, V, g, sigma_ant: float, sigma_s: float) -> float:
    """log2(1 + tr(A)); equals the determinant form when W_k has rank one."""
    A = _eav_inner(m, k, W, V, g, sigma_ant, sigma_s)
    return float(np.log2(1.0 + max(np.trace(A).real, 0.0)))


def secrecy_capacity(k: int, W, V, rho, h, g, sigma_ant: float, sigma_s: float) -> float:
    c_k = capacity(sinr(k, W, V, rho, h, sigma_ant, sigma_s))
    worst = max(
        (eav_capacity_upper(m, k, W, V, g, sigma_ant, sigma_s) for m in range(len(g))),
        default=0.0,
    )
    return max(c_k - worst, 0.0)


def received_power_desired(k: int, W, V, h, sigma_ant: float) -> float:
    hk = h[k]
    return sum(quad(hk, Wj) for Wj in W) + quad(hk, V) + sigma_ant


def harvested_desired(k: int, W, V, rho, h, sigma_ant: float, eta: float) -> float:
    return eta * (1.0 - float(rho[k])) * received_power_desired(k, W, V, h, sigma_ant)


def received_power_roaming(m: int, W, V, g, sigma_ant: float) -> float:
    G = g[m]
    total = np.trace(G.conj().T @ (V + np.sum(W, axis=0)) @ G).real
    return float(total) + G.shape[1] * sigma_ant


def harvested_roaming(m: int, W, V, g, sigma_ant: float, eta: float) -> float:
    """Harvested power of a roaming receiver that does not eavesdrop."""
    return eta * received_power_roaming(m, W, V, g, sigma_ant)


def lemma1_gap(A) -> float:
    """det(I + A) - (1 + tr A) for a PSD matrix A; zero iff rank(A) <= 1."""
    A = hermitian_part(np.asarray(A, dtype=complex))
    lam = np.linalg.eigvalsh(A)
    if lam[0] < -EIG_TOL * max(1.0, float(np.abs(lam).max())):
        raise ContractError("lemma1_gap requires a positive semidefinite matrix")
    lam = np.maximum(lam, 0.0)
    return float(np.prod(1.0 + lam) - (1.0 + lam.sum()))


def prop1_lmi_holds(m: int, k: int, W, V, xi: float, g, sigma_ant: float, sigma_s: float,
                    tol: float = EIG_TOL) -> bool:
    """Check the linear matrix inequality G^H W_k G <= (xi - 1) Q_m."""
    if xi <= 1:
        raise ContractError("xi must exceed 1")
    lam_max = float(np.linalg.eigvalsh(_eav_inner(m, k, W, V, g, sigma_ant, sigma_s))[-1])
    return lam_max <= (xi - 1.0) * (1.0 + tol)


def det_form_holds(m: int, k: int, W, V, xi: float, g, sigma_ant: float, sigma_s: float,
                   tol: float = EIG_TOL) -> bool:
    """Check det(I + Q^{-1} G^H W_k G) <= xi."""
    lam = np.linalg.eigvalsh(_eav_inner(m, k, W, V, g, sigma_ant, sigma_s))
    return float(np.prod(1.0 + np.maximum(lam, 0.0))) <= xi * (1.0 + tol)


@dataclass(frozen=True)
class MetricsReport:
    sinr: np.ndarray
    cap_desired_bits: np.ndarray
    cap_eav_bits: np.ndarray  # (M, K)
    secrecy_bits: np.ndarray
    harvested_desired_w: np.ndarray
    harvested_roaming_w: np.ndarray
    total_tx_power_w: float
    signal_power_w: float
    an_power_w: float

    @property
    def total_harvested_w(self) -> float:
        return float(self.harvested_desired_w.sum() + self.harvested_roaming_w.sum())


def evaluate(W, V, rho, channels, cfg) -> MetricsReport:
    """All link metrics for one operating point."""
    h, g = channels.h, channels.g
    sa, ss, eta = cfg.sigma_ant_w, cfg.sigma_s_w, cfg.eta
    K, M = h.shape[0], g.shape[0]
    gam = np.array([sinr(k, W, V, rho, h, sa, ss) for k in range(K)])
    cap = np.log2(1.0 + gam)
    eav = np.array([[eav_capacity_upper(m, k, W, V, g, sa, ss) for k in range(K)] for m in range(M)])
    eav = eav.reshape(M, K)
    worst = eav.max(axis=0) if M else np.zeros(K)
    sec = np.maximum(cap - worst, 0.0)
    e_des = np.array([harvested_desired(k, W, V, rho, h, sa, eta) for k in range(K)])
    e_roam = np.array([harvested_roaming(m, W, V, g, sa, eta) for m in range(M)])
    signal = float(sum(np.trace(Wk).real for Wk in W))
    an = float(np.trace(V).real)
    return MetricsReport(gam, cap, eav, sec, e_des, e_roam, signal + an, signal, an)


def rank_one_ok(W, tol: float = 1e-6) -> bool:
    return all(numerical_rank(Wk, tol) <= 1 for Wk in W)
