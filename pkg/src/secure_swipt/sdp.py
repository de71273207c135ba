"""Secure SWIPT power minimization as a conic program.

The relaxed design problem has Hermitian PSD matrix variables ``W_k``
(information beams) and ``V`` (artificial noise), plus power-splitting
ratios ``rho_k``. The reciprocal terms ``1/rho_k`` and ``1/(1 - rho_k)``
become auxiliary scalars bound by rotated second-order cones. Complex PSD
constraints are passed to the real solver through the 2n x 2n embedding.

Internally every matrix variable is an affine function of the real solver
vector. That lets the same assembler serve the full relaxation, the
zero-forcing baselines (``W_k = q_k w_k w_k^H``) and the restricted
re-solve used for rank-one recovery.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .conic import ConeDims, ConeProgram, SolverOptions, smat, solve_cone_program, svec
from .conic.ipm import DUAL_INFEASIBLE, INFEASIBLE, NUMERICAL_FAILURE, OPTIMAL
from .errors import BuildError, ContractError
from .hermitian import complex_from_embedding, hermitian_part, numerical_rank, real_embedding
from . import metrics
from .scenario import ChannelRealization, ScenarioConfig

RHO_EPS = 1e-9

__all__ = [
    "OPTIMAL", "INFEASIBLE", "NUMERICAL_FAILURE",
    "ProblemInstance", "ConicProgram", "BeamformingSolution", "DualCertificate",
    "FeasibilityReport", "build_program", "solve", "solve_instance", "verify_primal",
]


@dataclass(frozen=True)
class ProblemInstance:
    channels: ChannelRealization
    cfg: ScenarioConfig

    def __post_init__(self):
        ch, cfg = self.channels, self.cfg
        if (ch.n_desired, ch.n_roaming) != (cfg.n_desired, cfg.n_roaming):
            raise BuildError(
                "instance",
                f"channels have K={ch.n_desired}, M={ch.n_roaming}; config expects "
                f"K={cfg.n_desired}, M={cfg.n_roaming}",
            )
        if ch.n_roaming and ch.n_rx_eav != cfg.n_rx_eav:
            raise BuildError("instance", f"channels have N_R={ch.n_rx_eav}, config expects {cfg.n_rx_eav}")

    @property
    def n_tx(self) -> int:
        return self.channels.n_tx


# ---------------------------------------------------------------- affine forms

@dataclass
class _Scalar:
    """const + coef @ x"""
    const: float
    coef: np.ndarray

    def __add__(self, other):
        if isinstance(other, _Scalar):
            return _Scalar(self.const + other.const, self.coef + other.coef)
        return _Scalar(self.const + float(other), self.coef)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rsub__(self, other):
        return (-1.0) * self + other

    def __rmul__(self, a: float):
        return _Scalar(a * self.const, a * self.coef)

    def __neg__(self):
        return (-1.0) * self


def _scalar_affine(a, nvar):
    if isinstance(a, _Scalar):
        return a
    return _Scalar(float(a), np.zeros(nvar))


@dataclass
class _Herm:
    """const + sum_j x_j coef[j], Hermitian-valued."""
    const: np.ndarray
    coef: np.ndarray  # (nvar, n, n)

    def __add__(self, other):
        return _Herm(self.const + other.const, self.coef + other.coef)

    def __sub__(self, other):
        return _Herm(self.const - other.const, self.coef - other.coef)

    def __rmul__(self, a: float):
        return _Herm(a * self.const, a * self.coef)

    def congruence(self, G: np.ndarray) -> "_Herm":
        """G^H (.) G"""
        Gh = G.conj().T
        return _Herm(Gh @ self.const @ G, Gh @ self.coef @ G)

    def quad(self, h: np.ndarray) -> _Scalar:
        """h^H (.) h"""
        return _Scalar(
            float(np.real(np.vdot(h, self.const @ h))),
            np.real(np.einsum("i,jik,k->j", h.conj(), self.coef, h)),
        )

    def trace(self) -> _Scalar:
        return _Scalar(
            float(np.trace(self.const).real),
            np.real(np.trace(self.coef, axis1=1, axis2=2)),
        )

    def value(self, x: np.ndarray) -> np.ndarray:
        return hermitian_part(self.const + np.tensordot(x, self.coef, axes=1))


def _hermitian_basis(n: int) -> np.ndarray:
    """n^2 real-coordinate basis of the n x n Hermitian matrices."""
    out = np.zeros((n * n, n, n), dtype=complex)
    j = 0
    for p in range(n):
        out[j, p, p] = 1.0
        j += 1
    for p in range(n):
        for q in range(p + 1, n):
            out[j, p, q] = out[j, q, p] = 1.0
            out[j + 1, p, q], out[j + 1, q, p] = 1j, -1j
            j += 2
    return out


# ---------------------------------------------------------------- program

@dataclass
class _Block:
    tag: str
    kind: str            # "lp", "soc", "psd"
    exprs: list          # _Scalar entries (lp/soc) or a single _Herm (psd)
    scale: float = 1.0
    rows: slice = field(default_factory=lambda: slice(0, 0))


@dataclass
class ConicProgram:
    """Real conic program plus the bookkeeping to map results back.

    ``blocks`` lists every constraint with its origin tag (``C1[k]``,
    ``C2bar[m,k]``, ``C3[k]``, ``C4[m]``, ``C5[k]``, ``C6``, ``C7[k]``,
    ``AUX-hyperbolic[t,k]`` / ``AUX-hyperbolic[s,k]``).
    """

    instance: ProblemInstance
    cone: ConeProgram
    blocks: list
    layout: dict          # name -> slice into x
    W: list               # _Herm per k, physical units
    V: _Herm
    rho: list             # _Scalar per k
    power_unit: float
    objective_offset: float
    scheme: str

    @property
    def dims(self) -> ConeDims:
        return self.cone.dims

    def tags(self, kind: str | None = None) -> list[str]:
        return [b.tag for b in self.blocks if kind is None or b.kind == kind]

    def psd_block_sizes(self, prefix: str) -> list[int]:
        return [2 * b.exprs[0].const.shape[0] for b in self.blocks if b.kind == "psd" and b.tag.startswith(prefix)]


def _power_unit(ch: ChannelRealization, cfg: ScenarioConfig) -> float:
    """A typical transmit power for this instance, used to scale variables."""
    sa, ss, eta = cfg.sigma_ant_w, cfg.sigma_s_w, cfg.eta
    gam = cfg.gamma_req
    pk = cfg.p_min_desired_w
    pm = cfg.p_min_roaming_w
    cands = []
    for k in range(ch.n_desired):
        g2 = float(np.vdot(ch.h[k], ch.h[k]).real)
        if g2 > 0:
            need = gam[k] * (sa + ss)
            if pk[k] > 0 and eta > 0:
                need = max(need, pk[k] / eta)
            cands.append(need / g2)
    for m in range(ch.n_roaming):
        g2 = float(np.linalg.norm(ch.g[m], 2) ** 2)
        if g2 > 0 and eta > 0:
            need = pm[m] / eta - ch.n_rx_eav * sa
            if need > 0:
                cands.append(need / g2)
    p0 = max(cands, default=1.0)
    return p0 if np.isfinite(p0) and p0 > 0 else 1.0


def _check_instance(inst: ProblemInstance):
    cfg = inst.cfg
    if not np.all(cfg.gamma_req > 0):
        raise BuildError("C1", "SINR targets must be positive")
    if cfg.sigma_ant_w <= 0 or cfg.sigma_s_w <= 0:
        raise BuildError("C1", "noise powers must be positive")
    if cfg.n_roaming and not np.all(cfg.xi_eav > 1):
        raise BuildError("C2bar", "tolerated eavesdropping rates must be positive")
    if cfg.eta <= 0:
        if np.any(cfg.p_min_desired_w > 0):
            raise BuildError("C3", "energy harvesting target needs a positive conversion efficiency")
        if np.any(cfg.p_min_roaming_w > 0):
            raise BuildError("C4", "energy harvesting target needs a positive conversion efficiency")


class _Assembler:
    def __init__(self, inst: ProblemInstance, scheme: str, power_unit: float | None = None):
        _check_instance(inst)
        self.inst, self.scheme = inst, scheme
        self.p0 = power_unit if power_unit else _power_unit(inst.channels, inst.cfg)
        self.nvar = 0
        self.layout: dict[str, slice] = {}
        self.blocks: list[_Block] = []

    def reserve(self, name: str, count: int) -> slice:
        sl = slice(self.nvar, self.nvar + count)
        self.nvar += count
        self.layout[name] = sl
        return sl

    def scalar_var(self, sl: slice, i: int) -> _Scalar:
        c = np.zeros(self.nvar)
        c[sl.start + i] = 1.0
        return _Scalar(0.0, c)

    def herm_var(self, sl: slice, basis: np.ndarray, offset: np.ndarray | None, unit: float) -> _Herm:
        n = basis.shape[-1]
        coef = np.zeros((self.nvar, n, n), dtype=complex)
        coef[sl] = unit * basis
        const = np.zeros((n, n), dtype=complex) if offset is None else np.asarray(offset, dtype=complex)
        return _Herm(const, coef)

    def add(self, tag, kind, exprs, scale=None):
        if scale is None:
            if kind == "psd":
                e = exprs[0]
                mx = float(np.abs(e.coef).max(initial=0.0))
            else:
                mx = max((float(np.abs(e.coef).max(initial=0.0)) for e in exprs), default=0.0)
            scale = 1.0 / mx if mx > 0 else 1.0
        self.blocks.append(_Block(tag, kind, exprs, scale))

    def assemble(self, c: np.ndarray, W, V, rho, objective_offset=0.0) -> ConicProgram:
        order = {"lp": 0, "soc": 1, "psd": 2}
        blocks = sorted(self.blocks, key=lambda b: order[b.kind])  # stable
        nl = 0
        q, s = [], []
        rows_h, rows_G = [], []
        off = 0
        for b in blocks:
            if b.kind == "psd":
                e = b.exprs[0]
                n2 = 2 * e.const.shape[0]
                hv = svec(real_embedding(e.const))
                Gv = -svec(real_embedding(e.coef)).T
                size = n2 * (n2 + 1) // 2
                s.append(n2)
            else:
                hv = np.array([e.const for e in b.exprs])
                Gv = -np.stack([e.coef for e in b.exprs])
                size = len(b.exprs)
                if b.kind == "lp":
                    nl += size
                else:
                    q.append(size)
            rows_h.append(b.scale * hv)
            rows_G.append(b.scale * Gv)
            b.rows = slice(off, off + size)
            off += size
        dims = ConeDims(l=nl, q=tuple(q), s=tuple(s))
        h = np.concatenate(rows_h) if rows_h else np.zeros(0)
        G = np.vstack(rows_G) if rows_G else np.zeros((0, self.nvar))
        cone = ConeProgram(c, G, h, dims)
        return ConicProgram(
            self.inst, cone, blocks, dict(self.layout), W, V, rho,
            self.p0, objective_offset, self.scheme,
        )


def _assemble_problem(
    inst: ProblemInstance,
    scheme: str,
    w_dirs: list | None = None,
    rho_fixed: np.ndarray | None = None,
    v_offset: np.ndarray | None = None,
    v_dirs: np.ndarray | None = None,
    power_unit: float | None = None,
) -> ConicProgram:
    """Shared assembler.

    ``w_dirs[k]`` fixes W_k = q_k w w^H with scalar q_k >= 0; ``None`` gives a
    full Hermitian W_k. ``v_dirs`` (columns) restricts V to
    ``v_offset + sum_t gamma_t v_t v_t^H`` with gamma_t >= 0.
    ``rho_fixed`` freezes the splitting ratios. ``power_unit`` overrides the
    heuristic variable scale.
    """
    ch, cfg = inst.channels, inst.cfg
    K, M, N = ch.n_desired, ch.n_roaming, ch.n_tx
    a = _Assembler(inst, scheme, power_unit)
    p0 = a.p0
    pk = cfg.p_min_desired_w
    has_c3 = pk > 0
    full_basis = _hermitian_basis(N)

    w_slices = []
    for k in range(K):
        cnt = N * N if w_dirs is None else 1
        w_slices.append(a.reserve(f"W[{k}]", cnt))
    if v_dirs is None:
        v_slice = a.reserve("V", N * N)
    else:
        v_slice = a.reserve("V", v_dirs.shape[1])
    free_rho = rho_fixed is None
    if free_rho:
        r_slice = a.reserve("rho", K)
        t_slice = a.reserve("t", K)
        s_idx = np.flatnonzero(has_c3)
        s_slice = a.reserve("s", len(s_idx))

    W = []
    for k in range(K):
        if w_dirs is None:
            W.append(a.herm_var(w_slices[k], full_basis, None, p0))
        else:
            w = np.asarray(w_dirs[k], dtype=complex)
            W.append(a.herm_var(w_slices[k], np.outer(w, w.conj())[None], None, p0))
    if v_dirs is None:
        V = a.herm_var(v_slice, full_basis, v_offset, p0)
    else:
        basis = np.einsum("it,jt->tij", v_dirs, v_dirs.conj())
        V = a.herm_var(v_slice, basis, v_offset, p0)

    sa, ss, eta = cfg.sigma_ant_w, cfg.sigma_s_w, cfg.eta
    gam = cfg.gamma_req
    xi = cfg.xi_eav
    W_sum = W[0]
    for k in range(1, K):
        W_sum = W_sum + W[k]
    total = V + W_sum

    c1_base, c3_base = {}, {}
    for k in range(K):
        hk = ch.h[k]
        expr = (1.0 / gam[k]) * W[k].quad(hk) - V.quad(hk) - sa
        for j in range(K):
            if j != k:
                expr = expr - W[j].quad(hk)
        c1_base[k] = expr
    for k in np.flatnonzero(has_c3):
        c3_base[int(k)] = total.quad(ch.h[k]) + sa

    def coef_scale(e):
        mx = float(np.abs(e.coef).max(initial=0.0))
        return mx if mx > 0 else 1.0

    if free_rho:
        # The reciprocals enter as t = t_hat / w_t and s = s_hat / w_s, with
        # weights chosen so t_hat and s_hat carry O(1) coefficients in their
        # (normalized) rows. The cones become t_hat*rho >= w_t and
        # s_hat*(1 - rho) >= w_s.
        rho = [a.scalar_var(r_slice, k) for k in range(K)]
        w_t = {k: ss / coef_scale(c1_base[k]) for k in range(K)}
        w_s = {k: (pk[k] / eta) / coef_scale(c3_base[k]) for k in c3_base}
        t_hat = {k: a.scalar_var(t_slice, k) for k in range(K)}
        s_hat = {int(k): a.scalar_var(s_slice, i) for i, k in enumerate(s_idx)}
        t = {k: (1.0 / w_t[k]) * t_hat[k] for k in range(K)}
        s_aux = {k: (1.0 / w_s[k]) * s_hat[k] for k in s_hat}
    else:
        rho_fixed = np.asarray(rho_fixed, dtype=float)
        if np.any(rho_fixed <= 0) or np.any(rho_fixed > 1) or np.any(has_c3 & (rho_fixed >= 1)):
            raise BuildError("C5", "fixed splitting ratios must lie in (0, 1)")
        rho = [_scalar_affine(r, a.nvar) for r in rho_fixed]
        t = {k: _scalar_affine(1.0 / r, a.nvar) for k, r in enumerate(rho_fixed)}
        s_aux = {int(k): _scalar_affine(1.0 / (1.0 - rho_fixed[k]), a.nvar) for k in np.flatnonzero(has_c3)}

    for k in range(K):
        a.add(f"C1[{k}]", "lp", [c1_base[k] - ss * t[k]])
    for m in range(M):
        Gm = ch.g[m]
        Q = V.congruence(Gm)
        Q = _Herm(Q.const + (sa + ss) * np.eye(Gm.shape[1]), Q.coef)
        for k in range(K):
            a.add(f"C2bar[{m},{k}]", "psd", [(xi[m, k] - 1.0) * Q - W[k].congruence(Gm)])
    for k in c3_base:
        a.add(f"C3[{k}]", "lp", [c3_base[k] - (pk[k] / eta) * s_aux[k]])
    pm = cfg.p_min_roaming_w
    for m in range(M):
        need = pm[m] / eta if pm[m] > 0 else 0.0
        expr = total.congruence(ch.g[m]).trace() + ch.n_rx_eav * sa - need
        a.add(f"C4[{m}]", "lp", [expr])
    if free_rho:
        for k in range(K):
            upper = 1.0 - RHO_EPS if has_c3[k] else 1.0
            a.add(f"C5[{k}]", "lp", [rho[k] - RHO_EPS, upper - rho[k]], scale=1.0)
            # (x + y, 2 sqrt(w), x - y) in SOC  <=>  x*y >= w
            r = np.sqrt(w_t[k])
            a.add(
                f"AUX-hyperbolic[t,{k}]", "soc",
                [t_hat[k] + rho[k], _scalar_affine(2.0 * r, a.nvar), t_hat[k] - rho[k]], scale=1.0 / r,
            )
            if k in s_hat:
                r = np.sqrt(w_s[k])
                a.add(
                    f"AUX-hyperbolic[s,{k}]", "soc",
                    [s_hat[k] - rho[k] + 1.0, _scalar_affine(2.0 * r, a.nvar), s_hat[k] + rho[k] - 1.0],
                    scale=1.0 / r,
                )
    if v_dirs is None:
        a.add("C6", "psd", [V])
    else:
        for i in range(v_dirs.shape[1]):
            a.add(f"C6[{i}]", "lp", [a.scalar_var(v_slice, i)], scale=1.0)
    for k in range(K):
        if w_dirs is None:
            a.add(f"C7[{k}]", "psd", [W[k]])
        else:
            a.add(f"C7[{k}]", "lp", [a.scalar_var(w_slices[k], 0)], scale=1.0)

    objective = total.trace()
    c = objective.coef / p0
    return a.assemble(c, W, V, rho, objective_offset=objective.const)


def build_program(inst: ProblemInstance, power_unit: float | None = None) -> ConicProgram:
    """Full relaxation: Hermitian W_k and V, free splitting ratios."""
    return _assemble_problem(inst, scheme="optimal", power_unit=power_unit)


# ---------------------------------------------------------------- results

@dataclass(frozen=True)
class BeamformingSolution:
    W: np.ndarray          # (K, N_T, N_T), Watts
    V: np.ndarray          # (N_T, N_T), Watts
    rho: np.ndarray        # (K,)
    objective_w: float
    status: str
    scheme: str = "optimal"
    slacks: dict = field(default_factory=dict)
    iterations: int = 0
    solve_time_s: float = 0.0

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL

    @property
    def signal_power_w(self) -> float:
        return float(sum(np.trace(Wk).real for Wk in self.W))

    @property
    def an_power_w(self) -> float:
        return float(np.trace(self.V).real)


@dataclass(frozen=True)
class DualCertificate:
    """Multipliers in physical units (per Watt of the respective constraint)."""

    Z: np.ndarray | None      # (K, N_T, N_T); None when W_k is not a matrix variable
    Y: np.ndarray | None
    X: np.ndarray             # (M, K, N_R, N_R)
    alpha: np.ndarray
    beta: np.ndarray          # zero where the harvesting constraint is absent
    nu: np.ndarray
    duality_gap: float
    primal_objective: float
    dual_objective: float
    dual_residual: float
    ray: np.ndarray | None = None


def _total_objective(W, V) -> float:
    return float(sum(np.trace(Wk).real for Wk in W) + np.trace(V).real)


def solve(prog: ConicProgram, opts: SolverOptions | None = None):
    """Solve a conic program; returns ``(BeamformingSolution, DualCertificate)``."""
    inst = prog.instance
    ch = inst.channels
    K, M, N = ch.n_desired, ch.n_roaming, ch.n_tx
    nr = ch.n_rx_eav
    start = time.perf_counter()
    res = solve_cone_program(prog.cone, opts)
    status = {OPTIMAL: OPTIMAL, INFEASIBLE: INFEASIBLE, DUAL_INFEASIBLE: NUMERICAL_FAILURE}.get(
        res.status, NUMERICAL_FAILURE
    )
    p0 = prog.power_unit
    nan_mat = np.full((N, N), np.nan, dtype=complex)

    if status == INFEASIBLE:
        sol = BeamformingSolution(
            np.repeat(nan_mat[None], K, axis=0), nan_mat, np.full(K, np.nan), float("nan"),
            status, prog.scheme, {}, res.iterations, time.perf_counter() - start,
        )
        cert = DualCertificate(
            None, None, np.zeros((M, K, nr, nr), dtype=complex), np.zeros(K), np.zeros(K),
            np.zeros(M), float("nan"), float("nan"), float("nan"), float("nan"), ray=res.z,
        )
        return sol, cert

    x, z, s = res.x, res.z, res.s
    W = np.stack([w.value(x) for w in prog.W])
    V = prog.V.value(x)
    rho = np.array([r.const + r.coef @ x for r in prog.rho])

    slacks = {}
    alpha, beta, nu = np.zeros(K), np.zeros(K), np.zeros(M)
    Z = np.zeros((K, N, N), dtype=complex) if any(b.tag.startswith("C7") and b.kind == "psd" for b in prog.blocks) else None
    Y = None
    X = np.zeros((M, K, nr, nr), dtype=complex)
    for b in prog.blocks:
        zb, sb = z[b.rows], s[b.rows]
        mult = p0 * b.scale
        if b.kind == "psd":
            n2 = 2 * b.exprs[0].const.shape[0]
            mat = 2.0 * mult * complex_from_embedding(smat(zb, n2))
            slack_mat = complex_from_embedding(smat(sb, n2)) / b.scale
            slacks[b.tag] = float(np.linalg.eigvalsh(hermitian_part(slack_mat))[0])
        else:
            slacks[b.tag] = float(sb.min() / b.scale) if b.kind == "lp" else float(
                (sb[0] - np.linalg.norm(sb[1:])) / b.scale
            )
        name, _, idx = b.tag.partition("[")
        ids = [int(i) for i in idx.rstrip("]").split(",") if i.strip().isdigit()] if idx else []
        if name == "C1":
            alpha[ids[0]] = mult * zb[0]
        elif name == "C3":
            beta[ids[0]] = mult * zb[0]
        elif name == "C4":
            nu[ids[0]] = mult * zb[0]
        elif name == "C2bar":
            X[ids[0], ids[1]] = mat
        elif name == "C6" and b.kind == "psd":
            Y = mat
        elif name == "C7" and b.kind == "psd":
            Z[ids[0]] = mat

    objective = _total_objective(W, V)
    sol = BeamformingSolution(
        W, V, rho, objective, status, prog.scheme, slacks, res.iterations, time.perf_counter() - start,
    )
    cert = DualCertificate(
        Z, Y, X, alpha, beta, nu,
        duality_gap=p0 * (res.primal_objective - res.dual_objective),
        primal_objective=p0 * res.primal_objective + prog.objective_offset,
        dual_objective=p0 * res.dual_objective + prog.objective_offset,
        dual_residual=res.dual_residual,
    )
    return sol, cert


RESCALE_RATIO = 10.0


def solve_rescaled(build, opts: SolverOptions | None = None, retries: int = 2):
    """Solve ``build(None)``; on a numerical failure far from the power unit, rescale and retry.

    The heuristic power unit can miss the optimum by orders of magnitude on
    nearly infeasible draws, and the interior-point method then loses
    primal accuracy at the end. The failed run's best iterate is a good
    enough scale for a second attempt.
    """
    prog = build(None)
    sol, cert = solve(prog, opts)
    spent = sol.solve_time_s
    for _ in range(retries):
        if sol.status != NUMERICAL_FAILURE or not np.isfinite(sol.objective_w) or sol.objective_w <= 0:
            break
        ratio = sol.objective_w / prog.power_unit
        if 1.0 / RESCALE_RATIO <= ratio <= RESCALE_RATIO:
            break
        prog = build(sol.objective_w)
        sol, cert = solve(prog, opts)
        spent += sol.solve_time_s
    return replace(sol, solve_time_s=spent), cert


def solve_instance(inst: ProblemInstance, opts: SolverOptions | None = None):
    return solve_rescaled(lambda p0: build_program(inst, p0), opts)


# ---------------------------------------------------------------- verification

@dataclass(frozen=True)
class FeasibilityReport:
    """Worst violation per original constraint family.

    Residuals are relative for power and SINR constraints, in bits for the
    eavesdropping constraint and eigenvalue units (relative to the matrix
    norm) for the PSD checks. Zero means satisfied.
    """

    residuals: dict
    ranks: list
    eav_bits: np.ndarray
    tol: float

    @property
    def feasible(self) -> bool:
        return all(v <= self.tol for v in self.residuals.values())

    @property
    def violations(self) -> dict:
        return {k: v for k, v in self.residuals.items() if v > self.tol}


def verify_primal(inst: ProblemInstance, sol: BeamformingSolution, tol: float = 1e-6) -> FeasibilityReport:
    """Check a solution against the original (unrelaxed) constraints."""
    ch, cfg = inst.channels, inst.cfg
    K, M = ch.n_desired, ch.n_roaming
    W, V, rho = sol.W, sol.V, sol.rho
    sa, ss, eta = cfg.sigma_ant_w, cfg.sigma_s_w, cfg.eta
    gam = cfg.gamma_req
    res = {}

    c1 = 0.0
    for k in range(K):
        got = metrics.sinr(k, W, V, rho, ch.h, sa, ss)
        c1 = max(c1, (gam[k] - got) / gam[k])
    res["C1"] = max(c1, 0.0)

    eav = np.zeros((M, K))
    c2 = 0.0
    r_eav = cfg.r_eav_matrix
    for m in range(M):
        for k in range(K):
            try:
                eav[m, k] = metrics.eav_capacity_upper(m, k, W, V, ch.g, sa, ss)
            except ContractError:
                # indefinite V can make the noise covariance singular
                eav[m, k] = np.inf
            c2 = max(c2, eav[m, k] - r_eav[m, k])
    res["C2"] = max(c2, 0.0)

    pk = cfg.p_min_desired_w
    c3 = 0.0
    for k in range(K):
        if pk[k] > 0:
            got = metrics.harvested_desired(k, W, V, rho, ch.h, sa, eta)
            c3 = max(c3, (pk[k] - got) / pk[k])
    res["C3"] = max(c3, 0.0)

    pm = cfg.p_min_roaming_w
    c4 = 0.0
    for m in range(M):
        if pm[m] > 0:
            got = metrics.harvested_roaming(m, W, V, ch.g, sa, eta)
            c4 = max(c4, (pm[m] - got) / pm[m])
    res["C4"] = max(c4, 0.0)

    res["C5"] = float(max(0.0, -rho.min(initial=0.0), rho.max(initial=0.0) - 1.0))

    def psd_violation(A):
        A = hermitian_part(A)
        lam = np.linalg.eigvalsh(A)
        return max(0.0, -lam[0] / max(float(np.abs(lam).max()), np.finfo(float).tiny))

    res["C6"] = psd_violation(V)
    res["C7"] = max((psd_violation(Wk) for Wk in W), default=0.0)
    ranks = [numerical_rank(Wk) for Wk in W]
    return FeasibilityReport(res, ranks, eav, tol)
