"""JSON file formats for single instances and their solutions.

Complex arrays are stored as ``{"re": [...], "im": [...]}`` with nested
lists of the array's shape. Floats go through :func:`json.dumps`, which
writes the shortest repr that round-trips, so nothing is lost. Every file
carries a ``schema`` string; readers reject unknown ones.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError, RecoveryError
from .recovery import RecoveryResult, rank_profile
from .scenario import ChannelRealization, ScenarioConfig
from .sdp import BeamformingSolution, DualCertificate, FeasibilityReport, ProblemInstance

INSTANCE_SCHEMA = "secure-swipt/instance/1"
SOLUTION_SCHEMA = "secure-swipt/solution/1"


def encode_complex(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"shape": list(a.shape), "re": a.real.tolist(), "im": a.imag.tolist()}


def decode_complex(obj, name: str = "array") -> np.ndarray:
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
        shape = tuple(obj.get("shape", re.shape))
        return (re + 1j * im).reshape(shape)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError({name: f"malformed complex array ({exc})"}) from exc


def _num(x):
    """Floats that JSON cannot hold become strings ("nan", "inf", "-inf")."""
    x = float(x)
    return x if math.isfinite(x) else str(x)


def _real_list(a):
    return [_num(v) for v in np.ravel(a)]


def _read_json(path: Path) -> dict:
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError({"path": f"cannot read {path}: {exc.strerror}"}) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError({"path": f"{path} is not valid JSON: {exc}"}) from exc
    if not isinstance(data, dict):
        raise ConfigError({"path": f"{path} must contain a JSON object"})
    return data


def _write_json(obj: dict, path) -> Path:
    path = Path(path)
    try:
        path.write_text(json.dumps(obj, indent=1) + "\n")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc
    return path


# ------------------------------------------------------------------ instances

def instance_to_dict(inst: ProblemInstance) -> dict:
    return {
        "schema": INSTANCE_SCHEMA,
        "config": inst.cfg.to_dict(),
        "h": encode_complex(inst.channels.h),
        "g": encode_complex(inst.channels.g),
        "distances_m": inst.channels.distances_m.tolist(),
    }


def instance_from_dict(data: dict) -> ProblemInstance:
    schema = data.get("schema")
    if schema != INSTANCE_SCHEMA:
        raise ConfigError({"schema": f"expected {INSTANCE_SCHEMA!r}, got {schema!r}"})
    missing = [k for k in ("config", "h", "g") if k not in data]
    if missing:
        raise ConfigError({k: "missing" for k in missing})
    cfg = ScenarioConfig.from_dict(data["config"])
    ch = ChannelRealization(
        decode_complex(data["h"], "h"), decode_complex(data["g"], "g"), data.get("distances_m", []),
    )
    return ProblemInstance(ch, cfg)


def write_instance(inst: ProblemInstance, path) -> Path:
    return _write_json(instance_to_dict(inst), path)


def read_instance(path) -> ProblemInstance:
    return instance_from_dict(_read_json(Path(path)))


# ------------------------------------------------------------------ solutions

def _certificate_dict(cert: DualCertificate | None):
    if cert is None:
        return None
    out = {
        "alpha": _real_list(cert.alpha),
        "beta": _real_list(cert.beta),
        "nu": _real_list(cert.nu),
        "X": encode_complex(cert.X),
        "duality_gap": _num(cert.duality_gap),
        "primal_objective": _num(cert.primal_objective),
        "dual_objective": _num(cert.dual_objective),
        "dual_residual": _num(cert.dual_residual),
    }
    out["Z"] = None if cert.Z is None else encode_complex(cert.Z)
    out["Y"] = None if cert.Y is None else encode_complex(cert.Y)
    return out


def _feasibility_dict(rep: FeasibilityReport | None):
    if rep is None:
        return None
    return {
        "tol": rep.tol,
        "feasible": rep.feasible,
        "residuals": {k: _num(v) for k, v in rep.residuals.items()},
        "ranks": [int(r) for r in rep.ranks],
        "eav_bits": [_real_list(row) for row in np.atleast_2d(rep.eav_bits)] if rep.eav_bits.size else [],
    }


def recovery_dict(sol: BeamformingSolution, result: RecoveryResult | None = None,
                  error: RecoveryError | None = None) -> dict:
    """Rank profile plus either the repaired point or the failure reason."""
    prof = rank_profile(sol)
    out = {
        "rank_tol": prof.tol,
        "w_ranks": list(prof.w_ranks),
        "w_eig_ratios": _real_list(prof.w_ratios),
        "v_rank": prof.v_rank,
    }
    if error is not None:
        out.update(ok=False, error=str(error))
        return out
    if result is None:
        return out
    out.update(
        ok=True,
        method=result.method,
        recovered_users=list(result.recovered),
        objective_w=result.objective_w,
        objective_delta=result.objective_delta,
        feasibility=_feasibility_dict(result.feasibility),
        W=encode_complex(result.W),
        V=encode_complex(result.V),
        beams=encode_complex(result.beams),
    )
    return out


def solution_to_dict(sol: BeamformingSolution, cert: DualCertificate | None = None,
                     feasibility: FeasibilityReport | None = None, recovery: dict | None = None) -> dict:
    return {
        "schema": SOLUTION_SCHEMA,
        "scheme": sol.scheme,
        "status": sol.status,
        "objective_w": _num(sol.objective_w),
        "iterations": sol.iterations,
        "solve_time_s": sol.solve_time_s,
        "W": encode_complex(sol.W),
        "V": encode_complex(sol.V),
        "rho": _real_list(sol.rho),
        "certificate": _certificate_dict(cert),
        "feasibility": _feasibility_dict(feasibility),
        "recovery": recovery,
    }


def write_solution(path, sol, cert=None, feasibility=None, recovery=None) -> Path:
    return _write_json(solution_to_dict(sol, cert, feasibility, recovery), path)


def read_solution(path) -> dict:
    """Load a solution file; complex arrays are decoded, the rest left as parsed."""
    data = _read_json(Path(path))
    if data.get("schema") != SOLUTION_SCHEMA:
        raise ConfigError({"schema": f"expected {SOLUTION_SCHEMA!r}, got {data.get('schema')!r}"})
    for key in ("W", "V"):
        data[key] = decode_complex(data[key], key)
    data["rho"] = np.array([float(v) for v in data["rho"]])
    rec = data.get("recovery") or {}
    for key in ("W", "V", "beams"):
        if key in rec:
            rec[key] = decode_complex(rec[key], f"recovery.{key}")
    return data
