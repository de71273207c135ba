"""End-to-end invariant checks behind the ``verify`` command.

Each check returns a :class:`CheckResult`; the suite passes when no check
fails. Checks that cannot run for a configuration (eavesdropper checks
without eavesdroppers) are reported as skipped rather than passed.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .conic import SolverOptions
from .errors import RecoveryError
from .hermitian import RANK_TOL
from .oracle import oracle_for, reference_instance
from .recovery import complementary_slackness_check, construct_rank_one, kkt_rho_check, rank_profile
from .scenario import ScenarioConfig, generate_scenario
from .sdp import ProblemInstance, solve_instance

_log = logging.getLogger(__name__)

LEMMA_TOL = 1e-9
RHO_TOL = 1e-4
CS_TOL = 1e-6
RANK_RATE = 0.99
ORACLE_TOL = 1e-3
INVARIANCE_TOL = 1e-6


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    skipped: bool = False

    def line(self) -> str:
        tag = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        return f"{tag} {self.name}: {self.detail}"


@dataclass(frozen=True)
class SuiteSpec:
    seeds: int = 200
    base: ScenarioConfig = field(default_factory=ScenarioConfig)
    solver_tol: float = 1e-9
    fuzz: int = 1000
    invariance_seeds: int = 20
    monotone_seeds: int = 5
    first_seed: int = 0

    @property
    def solver(self) -> SolverOptions:
        return SolverOptions(feastol=self.solver_tol, reltol=self.solver_tol,
                             abstol=min(1e-10, self.solver_tol * 1e-4))


@dataclass(frozen=True)
class SuiteReport:
    results: tuple[CheckResult, ...]
    elapsed_s: float

    @property
    def passed(self) -> bool:
        return all(r.passed or r.skipped for r in self.results)

    def lines(self) -> list[str]:
        return [r.line() for r in self.results]


# --------------------------------------------------------------- matrix fuzz

def _random_psd(rng, n, rank):
    A = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    return A @ A.conj().T * rng.uniform(0.1, 3.0)


def check_lemma1(count: int, rng) -> CheckResult:
    worst_neg, worst_r1, best_hi = 0.0, 0.0, np.inf
    for _ in range(count):
        n = int(rng.integers(2, 6))
        rank = int(rng.integers(0, n + 1))
        A = _random_psd(rng, n, rank) if rank else np.zeros((n, n), complex)
        gap = metrics.lemma1_gap(A)
        worst_neg = min(worst_neg, gap)
        if rank <= 1:
            worst_r1 = max(worst_r1, abs(gap))
        else:
            best_hi = min(best_hi, gap)
    ok = worst_neg >= -LEMMA_TOL and worst_r1 <= LEMMA_TOL and best_hi > LEMMA_TOL
    return CheckResult(
        "lemma1-fuzz", ok,
        f"{count} matrices; min gap {worst_neg:.1e}, max |gap| at rank<=1 {worst_r1:.1e}, "
        f"min gap at rank>=2 {best_hi:.1e}",
    )


def check_prop1(base: ScenarioConfig, count: int, rng) -> CheckResult:
    if base.n_roaming == 0:
        return CheckResult("prop1-equivalence", True, "no roaming receivers; skipped", skipped=True)
    cfg = base
    sa, ss = cfg.sigma_ant_w, cfg.sigma_s_w
    disagree = 0
    sides = [0, 0]
    for _ in range(count):
        ch = generate_scenario(cfg, seed=int(rng.integers(2**31)))
        w = rng.standard_normal(cfg.n_tx) + 1j * rng.standard_normal(cfg.n_tx)
        W = np.zeros((cfg.n_desired, cfg.n_tx, cfg.n_tx), complex)
        W[0] = np.outer(w, w.conj()) * 10 ** rng.uniform(-3, 1)
        V = _random_psd(rng, cfg.n_tx, int(rng.integers(0, cfg.n_tx + 1))) * 10 ** rng.uniform(-4, 0)
        lam = float(np.linalg.eigvalsh(metrics._eav_inner(0, 0, W, V, ch.g, sa, ss))[-1])
        # place xi on either side of the boundary, away from the tolerance band
        xi = 1.0 + lam * rng.choice([0.5, 0.9, 1.1, 2.0])
        lmi = metrics.prop1_lmi_holds(0, 0, W, V, xi, ch.g, sa, ss)
        det = metrics.det_form_holds(0, 0, W, V, xi, ch.g, sa, ss)
        disagree += lmi != det
        sides[int(lmi)] += 1
    # identity noise and G = I reduce the inner matrix to diag(1, 1)
    g = np.zeros((1, 2, 2), complex)
    g[0] = np.eye(2)
    W2 = np.eye(2, dtype=complex)[None]
    V0 = np.zeros((2, 2), complex)
    sep = metrics.prop1_lmi_holds(0, 0, W2, V0, 2.0, g, 0.5, 0.5) and not metrics.det_form_holds(
        0, 0, W2, V0, 2.0, g, 0.5, 0.5)
    ok = disagree == 0 and sep
    return CheckResult(
        "prop1-equivalence", ok,
        f"{count} rank-one draws ({sides[1]} inside, {sides[0]} outside), {disagree} disagreements; "
        f"rank-two counterexample {'separates' if sep else 'does NOT separate'} the two forms",
    )


# --------------------------------------------------------------- solver checks

def check_oracle(opts: SolverOptions | None = None) -> CheckResult:
    inst = reference_instance()
    t = time.perf_counter()
    sol, _ = solve_instance(inst, opts)
    dt = time.perf_counter() - t
    ref = oracle_for(inst)
    rel = abs(sol.objective_w - ref.power_w) / ref.power_w if sol.is_optimal else np.inf
    ok = sol.is_optimal and rel <= ORACLE_TOL
    return CheckResult(
        "oracle", ok, f"solver {sol.objective_w:.6g} W vs grid {ref.power_w:.6g} W, rel {rel:.1e}, solve {dt:.2f} s",
    )


def _relative(a, b):
    return abs(a - b) / max(abs(a), abs(b))


def _haar_unitary(n, rng):
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def _shift_db(value, c_db):
    v = np.asarray(value, dtype=float) + c_db
    return float(v) if v.ndim == 0 else tuple(v.tolist())


def check_invariance(spec: SuiteSpec) -> CheckResult:
    """Objective scales with noise and targets, and ignores a common transmit rotation."""
    rng = np.random.default_rng([spec.first_seed, 7])
    base = spec.base
    worst_h, worst_u, used = 0.0, 0.0, 0
    for seed in range(spec.first_seed, spec.first_seed + spec.invariance_seeds):
        ch = generate_scenario(base, seed)
        s0, _ = solve_instance(ProblemInstance(ch, base), spec.solver)
        if not s0.is_optimal:
            continue
        c_db = float(rng.uniform(-10, 10))
        scaled = base.replace(
            sigma_ant_dbm=base.sigma_ant_dbm + c_db, sigma_s_dbm=base.sigma_s_dbm + c_db,
            p_min_desired_dbm=_shift_db(base.p_min_desired_dbm, c_db),
            p_min_roaming_dbm=_shift_db(base.p_min_roaming_dbm, c_db),
        )
        s1, _ = solve_instance(ProblemInstance(ch, scaled), spec.solver)
        s2, _ = solve_instance(ProblemInstance(ch.rotate(_haar_unitary(ch.n_tx, rng)), base), spec.solver)
        if not (s1.is_optimal and s2.is_optimal):
            worst_h = np.inf
            continue
        used += 1
        worst_h = max(worst_h, _relative(s1.objective_w, s0.objective_w * 10 ** (c_db / 10)))
        worst_u = max(worst_u, _relative(s2.objective_w, s0.objective_w))
    ok = used > 0 and worst_h <= INVARIANCE_TOL and worst_u <= INVARIANCE_TOL
    return CheckResult(
        "homogeneity", ok,
        f"{used} instances; scaling rel err {worst_h:.1e}, rotation rel err {worst_u:.1e}",
    )


def check_monotone(spec: SuiteSpec, grid_db=(0.0, 5.0, 10.0, 15.0)) -> CheckResult:
    worst, used = 0.0, 0
    for seed in range(spec.first_seed, spec.first_seed + spec.monotone_seeds):
        ch = generate_scenario(spec.base, seed)
        prev = None
        for g in grid_db:
            sol, _ = solve_instance(ProblemInstance(ch, spec.base.replace(gamma_req_db=g)), spec.solver)
            if not sol.is_optimal:
                break
            if prev is not None:
                worst = max(worst, (prev - sol.objective_w) / prev)
            prev = sol.objective_w
        else:
            used += 1
    ok = used > 0 and worst <= INVARIANCE_TOL
    return CheckResult(
        "monotonicity", ok, f"{used} seeds over {list(grid_db)} dB; largest decrease {worst:.1e} (relative)",
    )


def check_kkt_and_rank(spec: SuiteSpec, progress=None) -> list[CheckResult]:
    """KKT closed form, complementary slackness and rank-one rate from one batch of solves."""
    rho_res, cs_res, ratios = [], [], []
    checked, skipped, statuses = 0, 0, {}
    repaired, repair_fail = 0, []
    for i, seed in enumerate(range(spec.first_seed, spec.first_seed + spec.seeds)):
        inst = ProblemInstance(generate_scenario(spec.base, seed), spec.base)
        sol, cert = solve_instance(inst, spec.solver)
        statuses[sol.status] = statuses.get(sol.status, 0) + 1
        if progress:
            progress(i + 1, spec.seeds)
        if not sol.is_optimal:
            continue
        rc = kkt_rho_check(sol, cert, inst)
        checked += rc.checked.size
        skipped += len(rc.skipped)
        rho_res.append(rc.max_residual())
        cs_res.append(float(complementary_slackness_check(sol, cert).max()))
        prof = rank_profile(sol)
        ratios.append(max(prof.w_ratios))
        if not prof.rank_one:
            try:
                construct_rank_one(sol, cert, inst)
                repaired += 1
            except RecoveryError as exc:
                repair_fail.append((seed, str(exc)))
    n_opt = len(ratios)
    rho_max = max(rho_res, default=0.0)
    cs_max = max(cs_res, default=0.0)
    rate = float(np.mean(np.asarray(ratios) <= RANK_TOL)) if n_opt else 0.0
    status_txt = ", ".join(f"{k} {v}" for k, v in sorted(statuses.items()))
    return [
        CheckResult(
            "kkt-rho", n_opt > 0 and checked > 0 and rho_max <= RHO_TOL,
            f"{checked} users checked, {skipped} skipped (inactive constraint); max |rho - formula| {rho_max:.1e}",
        ),
        CheckResult(
            "kkt-slackness", n_opt > 0 and cs_max <= CS_TOL,
            f"max normalized ||Z_k W_k|| {cs_max:.1e} over {n_opt} solutions ({status_txt})",
        ),
        CheckResult(
            "rank-one-rate", n_opt > 0 and rate >= RANK_RATE and not repair_fail,
            f"{rate:.1%} of {n_opt} solutions rank one; {repaired} repaired, {len(repair_fail)} repair failures"
            + (f" (first: seed {repair_fail[0][0]}: {repair_fail[0][1]})" if repair_fail else ""),
        ),
    ]


def verify_suite(spec: SuiteSpec | None = None, progress=None) -> SuiteReport:
    spec = spec or SuiteSpec()
    t0 = time.perf_counter()
    rng = np.random.default_rng([spec.first_seed, 1])
    out = [
        check_oracle(spec.solver),
        check_lemma1(spec.fuzz, rng),
        check_prop1(spec.base, spec.fuzz, rng),
    ]
    out += check_kkt_and_rank(spec, progress)
    out.append(check_invariance(spec))
    out.append(check_monotone(spec))
    for r in out:
        _log.info(r.line())
    return SuiteReport(tuple(out), time.perf_counter() - t0)


__all__ = ["CheckResult", "SuiteSpec", "SuiteReport", "verify_suite"]
