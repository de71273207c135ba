"""Homogeneous primal-dual interior-point method for dense cone programs.

Solves ::

    minimize    c^T x
    subject to  G x + s = h,   s in K

together with its dual ::

    maximize    -h^T z
    subject to  G^T z + c = 0,   z in K*

where K is a product of nonnegative orthants, second-order cones and PSD
cones (see :mod:`.cones`). The method embeds the pair in a self-dual
homogeneous model, so infeasibility is detected through certificates
instead of divergence. Steps use Nesterov-Todd scaling and a Mehrotra
predictor-corrector.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import kernels
from .cones import ConeDims, compute_scaling

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
DUAL_INFEASIBLE = "DualInfeasible"
NUMERICAL_FAILURE = "NumericalFailure"

_log = logging.getLogger(__name__)

_STEP = 0.99
_EXPON = 3


@dataclass(frozen=True)
class SolverOptions:
    feastol: float = 1e-8
    reltol: float = 1e-8
    abstol: float = 1e-10
    max_iter: int = 200
    backend: str | None = None
    # a stalled run is still reported optimal if its best iterate meets
    # the tolerances relaxed by this factor (flagged in ``info``)
    inaccurate_factor: float = 100.0


@dataclass
class ConeSolution:
    status: str
    x: np.ndarray
    s: np.ndarray
    z: np.ndarray
    primal_objective: float
    dual_objective: float
    gap: float
    primal_residual: float
    dual_residual: float
    iterations: int
    solve_time: float
    info: dict = field(default_factory=dict)


class ConeProgram:
    """Dense cone program data with cached PSD column structure."""

    def __init__(self, c, G, h, dims: ConeDims):
        self.c = np.asarray(c, dtype=float)
        self.G = np.asarray(G, dtype=float)
        self.h = np.asarray(h, dtype=float)
        self.dims = dims
        m, n = self.G.shape
        if self.c.shape != (n,) or self.h.shape != (m,) or dims.size != m:
            raise ValueError(
                f"inconsistent shapes: c {self.c.shape}, G {self.G.shape}, h {self.h.shape}, cones {dims.size}"
            )
        self.psd_data = kernels.PsdSchurData.from_matrix(self.G, dims)
        ell = dims.l
        self._G_lp = self.G[:ell]
        self._soc_rows = {d: self.G[idx] for d, idx in dims.soc_groups.items()}


def _block_rinv(scaling, dims: ConeDims):
    """R^{-1} of every PSD block, in block order."""
    counters = {n: 0 for n in dims.psd_groups}
    out = []
    for n in dims.s:
        out.append(scaling.Rinv[n][counters[n]])
        counters[n] += 1
    return out


class _KKT:
    """Factorization of [[0, G^T], [G, -W^T W]] for one scaling.

    The default path is a Cholesky factorization of the normal matrix
    ``G^T W^{-1} W^{-T} G``. Near the optimum of degenerate problems that
    matrix can be singular to working precision; then a QR factorization of
    ``W^{-T} G`` is used instead, which only sees the square root of the
    condition number.
    """

    RESIDUAL_TOL = 1e-6

    def __init__(self, prog: ConeProgram, scaling, backend):
        self.prog, self.W = prog, scaling
        self.mode = "chol"
        self.qr = None
        dims = prog.dims
        n = prog.G.shape[1]
        H = np.zeros((n, n))
        if dims.l:
            A = prog._G_lp / scaling.d[:, None]
            H += A.T @ A
        for dq, rows in prog._soc_rows.items():
            beta, v = scaling.beta[dq], scaling.v[dq]
            jv = v.copy()
            jv[:, 1:] *= -1.0
            jr = rows.copy()
            jr[:, 1:, :] *= -1.0
            A = (2.0 * np.einsum("ij,ijk->ik", jv, rows)[:, None, :] * jv[:, :, None] - jr) / beta[:, None, None]
            A = A.reshape(-1, n)
            H += A.T @ A
        if dims.s:
            kernels.schur_psd_accumulate(H, prog.psd_data, _block_rinv(scaling, dims), backend)
        H = 0.5 * (H + H.T)
        scale = np.sqrt(np.maximum(np.diag(H), 1e-300))
        self.scale = scale
        try:
            self.factor = sla.cho_factor(H / scale[:, None] / scale[None, :], lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            self._use_qr()

    def _use_qr(self):
        if self.qr is None:
            Gh = self.W.apply(self.prog.G.T, inverse=True, trans=True).T
            Q, R = np.linalg.qr(Gh)
            d = np.abs(np.diag(R))
            if not np.all(np.isfinite(R)) or d.min(initial=np.inf) <= 1e-15 * d.max(initial=0.0):
                raise np.linalg.LinAlgError("scaled constraint matrix is rank deficient")
            self.qr = (Gh, Q, R)
        self.mode = "qr"

    def _solve_once(self, bx, bzs):
        W, G = self.W, self.prog.G
        if self.mode == "qr":
            Gh, Q, R = self.qr
            y = sla.solve_triangular(R, bx, trans="T", check_finite=False)
            ux = sla.solve_triangular(R, y + Q.T @ bzs, check_finite=False)
            return ux, Gh @ ux - bzs
        rhs = (bx + G.T @ W.apply(bzs, inverse=True)) / self.scale
        ux = sla.cho_solve(self.factor, rhs, check_finite=False) / self.scale
        uzs = W.apply(G @ ux, inverse=True, trans=True) - bzs
        return ux, uzs

    def _refined(self, bx, bzs, refine):
        W, G = self.W, self.prog.G
        ux, uzs = self._solve_once(bx, bzs)
        for _ in range(refine + 1):
            gz = G.T @ W.apply(uzs, inverse=True)
            wg = W.apply(G @ ux, inverse=True, trans=True)
            ex = bx - gz
            ez = bzs - (wg - uzs)
            err = max(
                np.linalg.norm(ex) / max(np.linalg.norm(bx), np.linalg.norm(gz), 1e-300),
                np.linalg.norm(ez) / max(np.linalg.norm(bzs), np.linalg.norm(wg), 1e-300),
            )
            if _ == refine:
                break
            dx, dz = self._solve_once(ex, ez)
            ux += dx
            uzs += dz
        return ux, uzs, err

    def solve(self, bx: np.ndarray, bzs: np.ndarray, refine: int = 3):
        """Solve the scaled system

            G^T W^{-1} uzs = bx,    W^{-T} G ux - uzs = bzs

        (``uzs = W uz``) with a few rounds of iterative refinement.
        """
        ux, uzs, err = self._refined(bx, bzs, refine)
        if err > self.RESIDUAL_TOL and self.mode == "chol":
            self._use_qr()
            ux, uzs, err = self._refined(bx, bzs, refine)
        return ux, uzs


def _initial_point(prog: ConeProgram, backend):
    dims = prog.dims
    e = dims.identity()
    ident = compute_scaling(dims, e, e)
    kkt = _KKT(prog, ident, backend)
    n = prog.G.shape[1]
    # identity scaling: scaled and unscaled coordinates coincide
    x, _ = kkt.solve(np.zeros(n), prog.h)
    s = prog.h - prog.G @ x
    _, z = kkt.solve(-prog.c, np.zeros_like(prog.h))
    for v in (s, z):
        t = -dims.min_eig(v)
        if t >= -1e-8 * max(np.linalg.norm(v), 1.0):
            v += (1.0 + t) * e
    return x, s, z


class _Breakdown(Exception):
    pass


def _residuals(prog, x, s, z, tau, kappa, resx0, resz0):
    c, G, h = prog.c, prog.G, prog.h
    r = {}
    r["rx"] = G.T @ z + c * tau
    r["rz"] = s + G @ x - h * tau
    r["cx"], r["hz"] = float(c @ x), float(h @ z)
    r["rt"] = kappa + r["cx"] + r["hz"]
    r["sz"] = float(s @ z)
    r["pcost"], r["dcost"] = r["cx"] / tau, -r["hz"] / tau
    r["gap"] = r["sz"] / tau ** 2
    r["pres"] = float(np.linalg.norm(r["rz"])) / tau / resz0
    r["dres"] = float(np.linalg.norm(r["rx"])) / tau / resx0
    if r["pcost"] < 0:
        r["relgap"] = r["gap"] / -r["pcost"]
    elif r["dcost"] > 0:
        r["relgap"] = r["gap"] / r["dcost"]
    else:
        r["relgap"] = np.inf
    hz, cx = r["hz"], r["cx"]
    r["pinf"] = float(np.linalg.norm(G.T @ z)) / resx0 / -hz if hz < 0 else np.inf
    r["dinf"] = float(np.linalg.norm(G @ x + s)) / resz0 / -cx if cx < 0 else np.inf
    return r


def _converged(r, opts, factor=1.0) -> bool:
    return (
        r["pres"] <= factor * opts.feastol
        and r["dres"] <= factor * opts.feastol
        and (r["gap"] <= factor * opts.abstol or r["relgap"] <= factor * opts.reltol)
    )


def _merit(r) -> float:
    return max(r["pres"], r["dres"], min(r["relgap"], r["gap"]))


def solve_cone_program(prog: ConeProgram, opts: SolverOptions | None = None) -> ConeSolution:
    opts = opts or SolverOptions()
    backend = opts.backend
    start = time.perf_counter()
    c, G, h, dims = prog.c, prog.G, prog.h, prog.dims
    e = dims.identity()
    deg = dims.degree
    resx0 = max(1.0, np.linalg.norm(c))
    resz0 = max(1.0, np.linalg.norm(h))

    x, s, z = _initial_point(prog, backend)
    tau, kappa = 1.0, 1.0
    status = NUMERICAL_FAILURE
    info: dict = {}
    best = None
    it = 0
    for it in range(opts.max_iter + 1):
        r = _residuals(prog, x, s, z, tau, kappa, resx0, resz0)
        _log.debug(
            "it %3d pcost %.9e dcost %.9e gap %.2e pres %.2e dres %.2e tau %.2e kappa %.2e",
            it, r["pcost"], r["dcost"], r["gap"], r["pres"], r["dres"], tau, kappa,
        )
        if best is None or _merit(r) < _merit(best[0]):
            best = (r, x, s, z, tau, kappa, it)
        if _converged(r, opts):
            status = OPTIMAL
            break
        if r["pinf"] <= opts.feastol:
            status = INFEASIBLE
            break
        if r["dinf"] <= opts.feastol:
            status = DUAL_INFEASIBLE
            break
        if it == opts.max_iter:
            info["failure"] = "iteration limit"
            break
        try:
            # overflow past the optimum is caught by the finiteness test below
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                step = _step(prog, backend, x, s, z, tau, kappa, r, e, deg)
        except (_Breakdown, np.linalg.LinAlgError, FloatingPointError) as exc:
            info["failure"] = str(exc) or type(exc).__name__
            break
        if not (step[3] > 1e-150 and all(np.all(np.isfinite(v)) for v in step)):
            info["failure"] = "iterate left the floating-point range"
            break
        x, s, z, tau, kappa = step

    if status == NUMERICAL_FAILURE and best is not None and _converged(best[0], opts, opts.inaccurate_factor):
        # the last good iterate meets a looser tolerance; accept it, flagged
        r, x, s, z, tau, kappa, _ = best
        status = OPTIMAL
        info["reduced_accuracy"] = True
    elif status != OPTIMAL and status != INFEASIBLE and status != DUAL_INFEASIBLE and best is not None:
        r, x, s, z, tau, kappa, _ = best

    if status == INFEASIBLE:
        xs, ss, zs = np.full_like(x, np.nan), np.full_like(s, np.nan), z / -r["hz"]
    elif status == DUAL_INFEASIBLE:
        xs, ss, zs = x / -r["cx"], s / -r["cx"], np.full_like(z, np.nan)
    else:
        xs, ss, zs = x / tau, s / tau, z / tau
    return ConeSolution(
        status=status, x=xs, s=ss, z=zs,
        primal_objective=float(r["pcost"]), dual_objective=float(r["dcost"]), gap=float(r["gap"]),
        primal_residual=float(r["pres"]), dual_residual=float(r["dres"]),
        iterations=it, solve_time=time.perf_counter() - start, info=info,
    )


def _step(prog, backend, x, s, z, tau, kappa, r, e, deg):
    """One Mehrotra predictor-corrector step of the homogeneous model."""
    c, G, h, dims = prog.c, prog.G, prog.h, prog.dims
    rx, rz, rt = r["rx"], r["rz"], r["rt"]
    mu = (r["sz"] + tau * kappa) / (deg + 1)
    if not (np.isfinite(mu) and mu > 0):
        raise _Breakdown("complementarity lost")

    W = compute_scaling(dims, s, z)
    if not np.all(np.isfinite(W.lam)):
        raise _Breakdown("scaling is not finite")
    kkt = _KKT(prog, W, backend)
    lam = W.lam
    hs = W.apply(h, inverse=True, trans=True)
    rzs = W.apply(rz, inverse=True, trans=True)
    x2, z2s = kkt.solve(-c, hs)
    denom_tau = tau * (z2s @ z2s)

    def direction(sigma, rc, rtk):
        # z-quantities are scaled: zs = W z
        q = W.lam_div(rc)
        x1, z1s = kkt.solve(-(1.0 - sigma) * rx, -(1.0 - sigma) * rzs - q)
        dtau = (rtk + tau * ((1.0 - sigma) * rt + c @ x1 + hs @ z1s)) / (kappa + denom_tau)
        dx = x1 + dtau * x2
        dzs = z1s + dtau * z2s
        dkappa = (rtk - kappa * dtau) / tau
        return dx, dzs, dtau, dkappa, q - dzs

    def step_length(dzs, dtau, dkappa, dss):
        a = min(W.max_step(dss), W.max_step(dzs))
        if dtau < 0:
            a = min(a, -tau / dtau)
        if dkappa < 0:
            a = min(a, -kappa / dkappa)
        return a

    lamsq = W.lam_prod(lam)
    aff = direction(0.0, -lamsq, -tau * kappa)
    a_aff = min(1.0, step_length(*aff[1:]))
    sigma = max(0.0, 1.0 - a_aff) ** _EXPON
    corr = dims.jprod(aff[4], aff[1])
    comb = direction(
        sigma,
        -lamsq - corr + sigma * mu * e,
        -tau * kappa - aff[2] * aff[3] + sigma * mu,
    )
    dx, dzs, dtau, dkappa, dss = comb
    alpha = min(1.0, _STEP * step_length(*comb[1:]))
    if not np.isfinite(alpha) or alpha <= 1e-14:
        raise _Breakdown("step length collapsed")
    ds = W.apply(dss, trans=True)
    dz = W.apply(dzs, inverse=True)
    _log.log(5, "   alpha %.3f sigma %.2e", alpha, sigma)
    out = (x + alpha * dx, s + alpha * ds, z + alpha * dz, tau + alpha * dtau, kappa + alpha * dkappa)
    if not (np.all(np.isfinite(out[1])) and np.all(np.isfinite(out[2]))):
        raise _Breakdown("iterate is not finite")
    if dims.min_eig(out[1]) <= 0 or dims.min_eig(out[2]) <= 0 or out[3] <= 0 or out[4] <= 0:
        raise _Breakdown("iterate left the cone")
    return out
