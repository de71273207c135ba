"""Zero-forcing reference schemes.

Both fix each information beam to a zero-forcing direction and optimize
only its power, the noise covariance and (for the first scheme) the
splitting ratios. The second scheme freezes every ratio at one half.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .conic import SolverOptions
from .errors import ContractError
from . import metrics
from .hermitian import eig_hermitian, fix_phase
from .scenario import ChannelRealization
from .sdp import BeamformingSolution, ProblemInstance, _assemble_problem, solve_rescaled

SCHEMES = ("optimal", "zf-opt-rho", "zf-fixed-rho")
FIXED_RHO = 0.5


@dataclass(frozen=True)
class ZfDirectionSet:
    directions: np.ndarray          # (K, N_T), unit rows
    powers: np.ndarray | None = None

    def nulling_error(self, channels: ChannelRealization) -> float:
        """max_{j != k} |h_j^H w_k| / ||h_j||."""
        h = channels.h
        worst = 0.0
        for k, w in enumerate(self.directions):
            for j in range(h.shape[0]):
                if j != k:
                    worst = max(worst, abs(np.vdot(h[j], w)) / max(np.linalg.norm(h[j]), 1e-300))
        return worst


def zf_directions(channels: ChannelRealization) -> ZfDirectionSet:
    h = channels.h
    K, N = h.shape
    if K > N:
        raise ContractError(f"zero forcing needs n_tx >= K (got K={K}, n_tx={N})")
    if K == 1:
        nrm = np.linalg.norm(h[0])
        if nrm == 0:
            raise ContractError("zero channel has no matched-filter direction")
        w = fix_phase((h[0] / nrm)[:, None])[:, 0]
        return ZfDirectionSet(w[None])
    dirs = []
    for k in range(K):
        others = np.delete(h, k, axis=0)
        # h_j^H w = 0  <=>  w in the null space of sum_j h_j h_j^H
        C = others.T @ others.conj()
        dirs.append(eig_hermitian(C).vectors[:, 0])
    return ZfDirectionSet(np.stack(dirs))


def _solve_zf(inst: ProblemInstance, scheme: str, rho_fixed, opts):
    zf = zf_directions(inst.channels)
    sol, _ = solve_rescaled(
        lambda p0: _assemble_problem(inst, scheme, w_dirs=list(zf.directions), rho_fixed=rho_fixed, power_unit=p0),
        opts,
    )
    return _top_up(inst, sol) if sol.is_optimal else sol


def _top_up(inst: ProblemInstance, sol: BeamformingSolution, rounds: int = 3) -> BeamformingSolution:
    """Raise beam powers just enough to close SINR shortfalls left by roundoff.

    With heavy artificial noise the SINR constraint is a small difference of
    large terms and the solver may land a few ppm short. Nulled beams barely
    couple, so a per-user rescale settles in one or two rounds. Whether the
    result is still feasible elsewhere is for the caller's verification.
    """
    ch, cfg = inst.channels, inst.cfg
    W = sol.W.copy()
    for _ in range(rounds):
        short = False
        for k in range(len(W)):
            got = metrics.sinr(k, W, sol.V, sol.rho, ch.h, cfg.sigma_ant_w, cfg.sigma_s_w)
            need = cfg.gamma_req[k]
            if 0.0 < got < need:
                W[k] *= need / got * (1.0 + 1e-12)
                short = True
        if not short:
            break
    if np.array_equal(W, sol.W):
        return sol
    objective = float(sum(np.trace(Wk).real for Wk in W) + np.trace(sol.V).real)
    return replace(sol, W=W, objective_w=objective)


def solve_baseline1(inst: ProblemInstance, opts: SolverOptions | None = None) -> BeamformingSolution:
    """Zero-forcing beams; powers, noise covariance and ratios optimized."""
    return _solve_zf(inst, "zf-opt-rho", None, opts)


def solve_baseline2(inst: ProblemInstance, opts: SolverOptions | None = None) -> BeamformingSolution:
    K = inst.channels.n_desired
    return _solve_zf(inst, "zf-fixed-rho", np.full(K, FIXED_RHO), opts)


def solve_scheme(inst: ProblemInstance, scheme: str, opts: SolverOptions | None = None):
    """Dispatch by scheme name; returns ``(solution, certificate or None)``."""
    from .sdp import solve_instance

    if scheme == "optimal":
        return solve_instance(inst, opts)
    if scheme == "zf-opt-rho":
        return solve_baseline1(inst, opts), None
    if scheme == "zf-fixed-rho":
        return solve_baseline2(inst, opts), None
    raise ContractError(f"unknown scheme {scheme!r}; expected one of {', '.join(SCHEMES)}")
