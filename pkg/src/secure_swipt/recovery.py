"""Relaxation tightness checks, KKT diagnostics and rank-one reconstruction.

The dual certificate returned by :func:`secure_swipt.sdp.solve` carries the
multipliers in physical units, so the matrices below can be rebuilt directly
from channels and multipliers:

``U_k = I + sum_m G_m (X_mk - nu_m I) G_m^H + sum_{j != k} (alpha_j - beta_j) h_j h_j^H``

and the PSD multiplier of ``W_k`` is ``Z_k = U_k - (alpha_k / Gamma_k + beta_k) h_k h_k^H``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conic import SolverOptions
from .errors import ContractError, RecoveryError
from .hermitian import RANK_TOL, dominant_eigenpair, eigenvalue_ratio, hermitian_part, null_space, numerical_rank
from .sdp import (
    BeamformingSolution, DualCertificate, FeasibilityReport, ProblemInstance,
    _assemble_problem, solve, verify_primal,
)

__all__ = [
    "RankProfile", "RhoCheck", "RecoveryResult",
    "rank_profile", "rho_closed_form", "kkt_rho_check", "complementary_slackness_check",
    "stationarity_residual", "u_matrix", "construct_rank_one",
]

ACTIVE_TOL = 1e-7
OBJECTIVE_TOL = 1e-6
FEAS_TOL = 1e-7
# the restricted problem is small; solve it well inside FEAS_TOL
RESTRICTED_OPTS = SolverOptions(feastol=1e-10, reltol=1e-10)


@dataclass(frozen=True)
class RankProfile:
    w_ranks: tuple[int, ...]
    w_ratios: tuple[float, ...]
    v_rank: int
    tol: float = RANK_TOL

    @property
    def rank_one(self) -> bool:
        return all(r <= self.tol for r in self.w_ratios)

    def needs_recovery(self) -> list[int]:
        return [k for k, r in enumerate(self.w_ratios) if r > self.tol]


def rank_profile(sol: BeamformingSolution, tol: float = RANK_TOL) -> RankProfile:
    if not sol.is_optimal:
        raise ContractError(f"rank profile needs an optimal solution, got {sol.status}")
    ranks = tuple(numerical_rank(Wk, tol) for Wk in sol.W)
    ratios = tuple(min(1.0, max(0.0, eigenvalue_ratio(Wk))) for Wk in sol.W)
    return RankProfile(ranks, ratios, numerical_rank(sol.V, tol), tol)


def rho_closed_form(alpha: float, beta: float, sigma_s: float, eta: float, p_min: float) -> float:
    """Splitting ratio implied by stationarity in rho."""
    a = np.sqrt(alpha * sigma_s * eta)
    b = np.sqrt(beta * p_min)
    if a + b == 0.0:
        raise ContractError("both multipliers vanish; the ratio is undetermined")
    return float(a / (a + b))


@dataclass(frozen=True)
class RhoCheck:
    residual: np.ndarray          # NaN where skipped
    predicted: np.ndarray
    skipped: dict = field(default_factory=dict)

    @property
    def checked(self) -> np.ndarray:
        return np.flatnonzero(~np.isnan(self.residual))

    def max_residual(self) -> float:
        r = self.residual[~np.isnan(self.residual)]
        return float(r.max()) if r.size else 0.0


def _relative_slacks(sol: BeamformingSolution, inst: ProblemInstance):
    from . import metrics

    ch, cfg = inst.channels, inst.cfg
    sa, ss, eta = cfg.sigma_ant_w, cfg.sigma_s_w, cfg.eta
    gam, pk = cfg.gamma_req, cfg.p_min_desired_w
    K = ch.n_desired
    c1 = np.array([
        (metrics.sinr(k, sol.W, sol.V, sol.rho, ch.h, sa, ss) - gam[k]) / gam[k] for k in range(K)
    ])
    c3 = np.full(K, np.inf)
    for k in range(K):
        if pk[k] > 0:
            c3[k] = (metrics.harvested_desired(k, sol.W, sol.V, sol.rho, ch.h, sa, eta) - pk[k]) / pk[k]
    return c1, c3


def kkt_rho_check(sol: BeamformingSolution, cert: DualCertificate, inst: ProblemInstance,
                  active_tol: float = ACTIVE_TOL) -> RhoCheck:
    """Compare solver splitting ratios with the stationarity closed form.

    The formula assumes both the SINR and the harvesting constraint of user
    k bind. Users where either has relative slack above ``active_tol`` (or
    no harvesting requirement) are skipped and listed with the reason.
    """
    if not sol.is_optimal:
        raise ContractError(f"KKT checks need an optimal solution, got {sol.status}")
    cfg = inst.cfg
    K = inst.channels.n_desired
    pk = cfg.p_min_desired_w
    c1, c3 = _relative_slacks(sol, inst)
    res = np.full(K, np.nan)
    pred = np.full(K, np.nan)
    skipped = {}
    for k in range(K):
        a, b = float(cert.alpha[k]), float(cert.beta[k])
        if pk[k] <= 0:
            skipped[k] = "no harvesting requirement"
        elif c1[k] > active_tol:
            skipped[k] = f"SINR constraint slack ({c1[k]:.1e})"
        elif c3[k] > active_tol or b <= 0:
            skipped[k] = f"harvesting constraint slack ({c3[k]:.1e}), ratio tends to 1"
        elif a <= 0:
            skipped[k] = "SINR multiplier vanishes"
        if k in skipped:
            continue
        pred[k] = rho_closed_form(a, b, cfg.sigma_s_w, cfg.eta, pk[k])
        res[k] = abs(pred[k] - sol.rho[k])
    return RhoCheck(res, pred, skipped)


def complementary_slackness_check(sol: BeamformingSolution, cert: DualCertificate,
                                  eps: float = 1e-300) -> np.ndarray:
    """Normalized ``||Z_k W_k||_F`` per user."""
    if cert.Z is None:
        raise ContractError("certificate has no matrix multipliers for W")
    out = []
    for Zk, Wk in zip(cert.Z, sol.W):
        num = np.linalg.norm(Zk @ Wk)
        out.append(num / (np.linalg.norm(Zk) * np.linalg.norm(Wk) + eps))
    return np.asarray(out, dtype=float)


def u_matrix(k: int, cert: DualCertificate, inst: ProblemInstance) -> np.ndarray:
    ch = inst.channels
    N = ch.n_tx
    U = np.eye(N, dtype=complex)
    for m in range(ch.n_roaming):
        G = ch.g[m]
        inner = cert.X[m, k] - cert.nu[m] * np.eye(G.shape[1])
        U += G @ inner @ G.conj().T
    for j in range(ch.n_desired):
        if j != k:
            h = ch.h[j]
            U += (cert.alpha[j] - cert.beta[j]) * np.outer(h, h.conj())
    return hermitian_part(U)


def stationarity_residual(cert: DualCertificate, inst: ProblemInstance) -> np.ndarray:
    """Relative mismatch between the solver's Z_k and the one rebuilt from multipliers."""
    if cert.Z is None:
        raise ContractError("certificate has no matrix multipliers for W")
    gam = inst.cfg.gamma_req
    out = []
    for k, Zk in enumerate(cert.Z):
        h = inst.channels.h[k]
        c = cert.alpha[k] / gam[k] + cert.beta[k]
        Z_rebuilt = u_matrix(k, cert, inst) - c * np.outer(h, h.conj())
        out.append(np.linalg.norm(Zk - Z_rebuilt) / max(np.linalg.norm(Z_rebuilt), 1.0))
    return np.asarray(out)


@dataclass(frozen=True)
class RecoveryResult:
    W: np.ndarray
    V: np.ndarray
    rho: np.ndarray
    objective_w: float
    objective_delta: float       # relative to the relaxed objective
    feasibility: FeasibilityReport
    recovered: tuple[int, ...]   # users that went through the null-space construction
    method: str                  # "unchanged", "truncate", "truncate+resolve" or "construct"
    directions: np.ndarray       # (K, N_T) unit beam directions
    diagnostics: dict = field(default_factory=dict)

    @property
    def beams(self) -> np.ndarray:
        """w_k with W_k = w_k w_k^H."""
        p = np.array([np.trace(Wk).real for Wk in self.W])
        return self.directions * np.sqrt(np.maximum(p, 0.0))[:, None]


def _finalize(inst, sol, W, V, rho, recovered, method, directions, diag) -> RecoveryResult:
    from .sdp import BeamformingSolution as _BS

    obj = float(sum(np.trace(Wk).real for Wk in W) + np.trace(V).real)
    delta = abs(obj - sol.objective_w) / max(abs(sol.objective_w), np.finfo(float).tiny)
    cand = _BS(W, V, rho, obj, sol.status, sol.scheme)
    report = verify_primal(inst, cand, tol=FEAS_TOL)
    diag = dict(diag, objective_delta=delta, violations=report.violations, ranks=report.ranks)
    if not report.feasible:
        raise RecoveryError("recovered point violates the original constraints", diag)
    if delta > OBJECTIVE_TOL:
        raise RecoveryError(f"objective changed by {delta:.2e} (relative)", diag)
    if any(r > 1 for r in report.ranks):
        raise RecoveryError("recovered beams are not rank one", diag)
    return RecoveryResult(W, V, rho, obj, delta, report, tuple(recovered), method, directions, diag)


def _truncate(sol: BeamformingSolution):
    W, dirs = [], []
    V = sol.V.copy()
    for Wk in sol.W:
        lam, u = dominant_eigenpair(Wk)
        Wt = max(lam, 0.0) * np.outer(u, u.conj())
        V = V + (Wk - Wt)
        W.append(Wt)
        dirs.append(u)
    return np.stack(W), hermitian_part(V), np.stack(dirs)


def construct_rank_one(sol: BeamformingSolution, cert: DualCertificate, inst: ProblemInstance,
                       tol: float = RANK_TOL, null_tol: float = RANK_TOL,
                       opts: SolverOptions | None = None) -> RecoveryResult:
    """Turn a relaxed optimum into one with rank-one W_k and the same power.

    Near-rank-one solutions are truncated to the dominant eigenpair, with the
    discarded part moved into the artificial noise. Otherwise each offending
    W_k is split into a component along the null space N_k of U_k (which can
    be carried by the noise covariance instead) and a single direction u_k
    outside it. The remaining powers come from re-solving the problem with
    all directions fixed and only nonnegative scalars free.
    """
    prof = rank_profile(sol, tol)
    if prof.rank_one:
        W, V, dirs = _truncate(sol)
        exact = all(r <= 1 for r in prof.w_ranks) and np.allclose(W, sol.W, rtol=0, atol=0)
        method = "unchanged" if exact else "truncate"
        if exact:
            W, V = sol.W, sol.V
        try:
            return _finalize(inst, sol, W, V, sol.rho, (), method, dirs, {"profile": prof})
        except RecoveryError as exc:
            if exact:
                raise
            # the discarded tails, moved into V, can cost SINR; let the powers adjust
            tails = [np.linalg.eigh(Wk)[1][:, :-1] for Wk in sol.W]
            diag = dict(exc.diagnostics, truncate_violations=exc.diagnostics.get("violations"))
            return _restricted(inst, sol, dirs, np.concatenate(tails, axis=1), tuple(range(len(dirs))),
                               "truncate+resolve", diag, opts)

    ch = inst.channels
    N = ch.n_tx
    todo = prof.needs_recovery()
    dirs, v_dirs = [], []
    diag = {"profile": prof, "null_dims": {}}
    for k, Wk in enumerate(sol.W):
        if k not in todo:
            dirs.append(dominant_eigenpair(Wk)[1])
            continue
        U = u_matrix(k, cert, inst)
        Nk = null_space(U, null_tol)
        diag["null_dims"][k] = Nk.shape[1]
        leak = float(np.abs(ch.h[k].conj() @ Nk).max(initial=0.0)) / np.linalg.norm(ch.h[k])
        diag.setdefault("h_leak", {})[k] = leak
        if Nk.shape[1] == 0:
            raise RecoveryError(f"U_{k} has no null space; dual certificate too inaccurate", diag)
        P = np.eye(N) - Nk @ Nk.conj().T
        lam, u = dominant_eigenpair(hermitian_part(P @ Wk @ P))
        if lam <= null_tol * np.trace(Wk).real:
            raise RecoveryError(f"W_{k} lies inside the null space of U_{k}; no beam direction found", diag)
        dirs.append(u)
        # orthonormal directions spanning the part of W_k inside N_k
        mu, ev = np.linalg.eigh(hermitian_part(Nk.conj().T @ Wk @ Nk))
        keep = mu > null_tol * max(mu.max(initial=0.0), np.finfo(float).tiny)
        v_dirs.append(Nk @ ev[:, keep])
    return _restricted(inst, sol, np.stack(dirs), np.concatenate(v_dirs, axis=1), todo, "construct", diag, opts)


def _restricted(inst, sol, dirs, vd, recovered, method, diag, opts):
    """Re-solve with beam directions fixed; only beam powers and extra noise along ``vd`` are free."""
    diag["v_directions"] = vd.shape[1]
    rsol, _ = solve(_assemble_problem(
        inst, sol.scheme, w_dirs=list(dirs), rho_fixed=sol.rho, v_offset=sol.V, v_dirs=vd,
        power_unit=sol.objective_w,
    ), opts or RESTRICTED_OPTS)
    diag["restricted_status"] = rsol.status
    if not rsol.is_optimal:
        raise RecoveryError(f"restricted re-solve ended with status {rsol.status}", diag)
    return _finalize(inst, sol, rsol.W, hermitian_part(rsol.V), sol.rho, recovered, method, dirs, diag)
