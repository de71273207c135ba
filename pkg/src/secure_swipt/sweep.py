"""Seeded Monte-Carlo sweeps over the SINR target, antenna count and scheme.

Every trial draws one channel set at the largest antenna count and
truncates it for the smaller ones, so all grid points and schemes of a
trial see the same propagation geometry. Averages at a grid point use only
trials that every compared scheme solved and verified.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import metrics
from .baselines import SCHEMES, solve_scheme
from .conic import SolverOptions
from .errors import ConfigError, RecoveryError
from .recovery import construct_rank_one
from .scenario import ScenarioConfig, generate_scenario, watt_to_dbm
from .sdp import ProblemInstance, verify_primal

SWEEP_SCHEMA = "secure-swipt/sweep/1"
CSV_SCHEMA = "secure-swipt/sweep-csv/1"
VERIFY_TOL = 1e-6

_log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepSpec:
    gamma_req_grid_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0)
    n_tx_grid: tuple[int, ...] = (5, 8)
    schemes: tuple[str, ...] = SCHEMES
    trials: int = 50
    base: ScenarioConfig = field(default_factory=ScenarioConfig)
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "gamma_req_grid_db", tuple(float(g) for g in self.gamma_req_grid_db))
        object.__setattr__(self, "n_tx_grid", tuple(int(n) for n in self.n_tx_grid))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        bad = {}
        if self.trials < 1:
            bad["trials"] = "need at least one trial"
        if not self.gamma_req_grid_db:
            bad["gamma_req_grid_db"] = "grid is empty"
        if not self.n_tx_grid:
            bad["n_tx_grid"] = "grid is empty"
        elif min(self.n_tx_grid) <= self.base.n_rx_eav:
            bad["n_tx_grid"] = "every antenna count must exceed n_rx_eav"
        unknown = [s for s in self.schemes if s not in SCHEMES]
        if unknown or not self.schemes:
            bad["schemes"] = f"unknown or empty: {unknown}"
        if self.workers < 1:
            bad["workers"] = "need at least one worker"
        if bad:
            raise ConfigError(bad)

    def to_dict(self) -> dict:
        return {
            "schema": SWEEP_SCHEMA,
            "gamma_req_grid_db": list(self.gamma_req_grid_db),
            "n_tx_grid": list(self.n_tx_grid),
            "schemes": list(self.schemes),
            "trials": self.trials,
            "seed": self.seed,
            "workers": self.workers,
            "scenario": self.base.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        data = dict(data)
        schema = data.pop("schema", SWEEP_SCHEMA)
        if schema != SWEEP_SCHEMA:
            raise ConfigError({"schema": f"unsupported schema {schema!r}"})
        base = ScenarioConfig.from_dict(data.pop("scenario", {}))
        known = {"gamma_req_grid_db", "n_tx_grid", "schemes", "trials", "seed", "workers"}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError({name: "unknown field" for name in unknown})
        return cls(base=base, **data)


def load_sweep(path) -> SweepSpec:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError({"path": f"cannot read {path}: {exc.strerror}"}) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError({"path": f"{path} is not valid JSON: {exc}"}) from exc
    if not isinstance(data, dict):
        raise ConfigError({"path": f"{path} must contain a JSON object"})
    return SweepSpec.from_dict(data)


@dataclass(frozen=True)
class TrialResult:
    gamma_db: float
    n_tx: int
    scheme: str
    trial: int
    status: str
    feasible: bool
    rank_one: bool = False
    total_w: float = math.nan
    signal_w: float = math.nan
    an_w: float = math.nan
    secrecy_bits: float = math.nan
    eav_bits: float = math.nan
    harvested_w: float = math.nan
    solve_time_s: float = 0.0


def trial_channels(spec: SweepSpec, trial: int):
    """Channel draw of one trial at the largest antenna count."""
    cfg = spec.base.replace(n_tx=max(spec.n_tx_grid))
    return generate_scenario(cfg, seed=np.random.SeedSequence([spec.seed, trial]))


TIGHT = SolverOptions(feastol=1e-10, reltol=1e-10)


def _accept(inst, scheme, opts):
    """Solve, then verify (baselines) or recover a rank-one point (optimal).

    Returns ``(solution, (W, V, rho) or None, status, rank_one)``.
    """
    sol, cert = solve_scheme(inst, scheme, opts)
    if not sol.is_optimal:
        return sol, None, sol.status, False
    if scheme == "optimal":
        try:
            rec = construct_rank_one(sol, cert, inst)
        except RecoveryError as exc:
            return sol, None, f"RecoveryFailed: {exc}", False
        return sol, (rec.W, rec.V, rec.rho), sol.status, rec.method != "construct"
    if not verify_primal(inst, sol, VERIFY_TOL).feasible:
        return sol, None, "VerifyFailed", True
    return sol, (sol.W, sol.V, sol.rho), sol.status, True


def _run_one(inst: ProblemInstance, scheme: str, gamma_db: float, trial: int,
             opts: SolverOptions | None) -> TrialResult:
    n_tx = inst.channels.n_tx
    sol, point, status, rank_one = _accept(inst, scheme, opts)
    elapsed = sol.solve_time_s
    if point is None and sol.is_optimal:
        # an optimal but slightly inaccurate answer: one tighter re-solve
        _log.info("trial %d, %s dB, N_T=%d, %s: %s; re-solving", trial, gamma_db, n_tx, scheme, status)
        sol, point, status, rank_one = _accept(inst, scheme, TIGHT)
        elapsed += sol.solve_time_s
    key = dict(gamma_db=gamma_db, n_tx=n_tx, scheme=scheme, trial=trial, solve_time_s=elapsed)
    if point is None:
        _log.warning("trial %d, %s dB, N_T=%d, %s: %s", trial, gamma_db, n_tx, scheme, status)
        return TrialResult(status=status.split(":")[0], feasible=False, **key)
    W, V, rho = point
    rep = metrics.evaluate(W, V, rho, inst.channels, inst.cfg)
    # best eavesdropper per stream, averaged over streams
    worst_eav = float(np.mean(rep.cap_eav_bits.max(axis=0))) if rep.cap_eav_bits.size else 0.0
    return TrialResult(
        status=status, feasible=True, rank_one=rank_one,
        total_w=rep.total_tx_power_w, signal_w=rep.signal_power_w, an_w=rep.an_power_w,
        secrecy_bits=float(np.mean(rep.secrecy_bits)), eav_bits=worst_eav,
        harvested_w=rep.total_harvested_w, **key,
    )


def run_trial(spec: SweepSpec, trial: int, opts: SolverOptions | None = None) -> list[TrialResult]:
    full = trial_channels(spec, trial)
    out = []
    for n_tx in spec.n_tx_grid:
        ch = full.truncate(n_tx)
        for g in spec.gamma_req_grid_db:
            cfg = spec.base.replace(n_tx=n_tx, gamma_req_db=g)
            inst = ProblemInstance(ch, cfg)
            for scheme in spec.schemes:
                out.append(_run_one(inst, scheme, g, trial, opts))
    return out


def _trial_worker(args):
    spec, trial, opts = args
    return run_trial(spec, trial, opts)


ROW_FIELDS = (
    "gamma_req_db", "n_tx", "scheme", "trials", "feasible", "joint",
    "feasibility_rate", "rank_one_rate",
    "total_power_dbm", "signal_power_dbm", "an_power_dbm", "secrecy_bits", "eav_rate_bits", "harvested_dbm",
)


@dataclass(frozen=True)
class SweepRow:
    gamma_req_db: float
    n_tx: int
    scheme: str
    trials: int
    feasible: int
    joint: int
    feasibility_rate: float
    rank_one_rate: float
    total_power_dbm: float
    signal_power_dbm: float
    an_power_dbm: float
    secrecy_bits: float
    eav_rate_bits: float
    harvested_dbm: float
    mean_solve_time_s: float


@dataclass
class SweepReport:
    rows: list[SweepRow]
    results: list[TrialResult] = field(default_factory=list)
    spec: SweepSpec | None = None

    def row(self, gamma_db: float, n_tx: int, scheme: str) -> SweepRow:
        for r in self.rows:
            if (r.gamma_req_db, r.n_tx, r.scheme) == (float(gamma_db), int(n_tx), scheme):
                return r
        raise KeyError((gamma_db, n_tx, scheme))

    def series(self, n_tx: int, scheme: str, column: str) -> np.ndarray:
        rows = sorted((r for r in self.rows if r.n_tx == n_tx and r.scheme == scheme), key=lambda r: r.gamma_req_db)
        return np.array([getattr(r, column) for r in rows], dtype=float)


def _dbm(x: float) -> float:
    return float(watt_to_dbm(x)) if x > 0 else -math.inf


def aggregate(results: list[TrialResult], spec: SweepSpec) -> SweepReport:
    """Average over jointly feasible trials; powers are averaged in Watts."""
    by_key: dict[tuple, dict[int, TrialResult]] = {}
    for r in results:
        by_key.setdefault((r.gamma_db, r.n_tx, r.scheme), {})[r.trial] = r
    rows = []
    for n_tx in spec.n_tx_grid:
        for g in spec.gamma_req_grid_db:
            per_scheme = {s: by_key.get((g, n_tx, s), {}) for s in spec.schemes}
            joint = sorted(
                t for t in range(spec.trials)
                if all(t in per_scheme[s] and per_scheme[s][t].feasible for s in spec.schemes)
            )
            for s in spec.schemes:
                recs = per_scheme[s]
                feas = [r for r in recs.values() if r.feasible]
                sel = [recs[t] for t in joint]

                def mean(attr, sel=sel):
                    return float(np.mean([getattr(r, attr) for r in sel])) if sel else math.nan

                rows.append(SweepRow(
                    gamma_req_db=g, n_tx=n_tx, scheme=s, trials=len(recs), feasible=len(feas), joint=len(joint),
                    feasibility_rate=len(feas) / max(len(recs), 1),
                    rank_one_rate=(sum(r.rank_one for r in feas) / len(feas)) if feas else math.nan,
                    total_power_dbm=_dbm(mean("total_w")), signal_power_dbm=_dbm(mean("signal_w")),
                    an_power_dbm=_dbm(mean("an_w")), secrecy_bits=mean("secrecy_bits"),
                    eav_rate_bits=mean("eav_bits"),
                    harvested_dbm=_dbm(mean("harvested_w")),
                    mean_solve_time_s=float(np.mean([r.solve_time_s for r in recs.values()])) if recs else math.nan,
                ))
    return SweepReport(rows, sorted(results, key=lambda r: (r.trial, r.n_tx, r.gamma_db, r.scheme)), spec)


def run_sweep(spec: SweepSpec, opts: SolverOptions | None = None, progress=None) -> SweepReport:
    """Run every trial (optionally on a process pool) and aggregate.

    ``progress`` is called with the number of finished trials.
    """
    results: list[TrialResult] = []
    if spec.workers == 1:
        for t in range(spec.trials):
            results.extend(run_trial(spec, t, opts))
            if progress:
                progress(t + 1)
    else:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            jobs = [(spec, t, opts) for t in range(spec.trials)]
            for done, chunk in enumerate(pool.map(_trial_worker, jobs), start=1):
                results.extend(chunk)
                if progress:
                    progress(done)
    return aggregate(results, spec)


def _fmt(v, digits=4) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "-inf" if v < 0 else "inf"
    return f"{v:.{digits}f}"


def emit_csv(report: SweepReport, path) -> Path:
    """Write the report as CSV: a schema comment, a header, one row per grid key.

    Solve times are left out so that reruns with the same seed produce
    identical files.
    """
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            fh.write(f"# schema: {CSV_SCHEMA}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(ROW_FIELDS)
            for r in report.rows:
                w.writerow([_fmt(getattr(r, f)) for f in ROW_FIELDS])
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write sweep CSV to {path}: {exc.strerror}") from exc
    return path


def read_csv(path) -> list[dict]:
    with Path(path).open() as fh:
        first = fh.readline().strip()
        if first != f"# schema: {CSV_SCHEMA}":
            raise ConfigError({"schema": f"unexpected first line {first!r}"})
        return list(csv.DictReader(fh))
