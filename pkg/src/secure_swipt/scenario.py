"""Scenario configuration and random channel generation.

Channels follow an indoor two-slope path-loss law (free space up to a
breakpoint, a steeper exponent beyond it) with Rician small-scale fading.
Path loss is folded into the channel amplitudes, so ``h`` and ``g`` carry
units of sqrt(Watt) gain and every power downstream is in linear Watts.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, ContractError

CONFIG_SCHEMA = "secure-swipt/config/1"

# Free-space loss constant for distance in metres and frequency in Hz.
_FSPL_CONST_DB = -147.55


def dbm_to_watt(x_dbm):
    """Convert dBm to Watts; ``-inf`` maps to 0 W."""
    out = 10.0 ** ((np.asarray(x_dbm, dtype=float) - 30.0) / 10.0)
    return float(out) if out.ndim == 0 else out


def watt_to_dbm(p_w):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(p_w, dtype=float)) + 30.0


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


@dataclass(frozen=True)
class ScenarioConfig:
    """Physical and QoS parameters of one simulated deployment.

    Per-receiver quantities (``gamma_req_db``, ``p_min_*_dbm``) and the
    per-link ``r_eav_bits`` accept a scalar, which is broadcast.
    """

    n_tx: int = 8
    n_rx_eav: int = 2
    n_desired: int = 3
    n_roaming: int = 2
    gamma_req_db: float | tuple[float, ...] = 10.0
    r_eav_bits: float | tuple[tuple[float, ...], ...] = 1.0
    p_min_desired_dbm: float | tuple[float, ...] = 0.0
    p_min_roaming_dbm: float | tuple[float, ...] = 0.0
    eta: float = 0.5
    sigma_ant_dbm: float = -114.0
    sigma_s_dbm: float = -53.0
    carrier_hz: float = 470e6
    d_ref_m: float = 2.0
    d_max_m: float = 50.0
    breakpoint_m: float = 10.0
    far_exponent: float = 3.5
    rician_k_db: float = 3.0
    antenna_gain_tx_db: float = 10.0
    antenna_gain_rx_db: float = 10.0
    seed: int = 0

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ConfigError(problems)

    def problems(self) -> dict[str, str]:
        bad: dict[str, str] = {}
        if self.n_tx <= 1:
            bad["n_tx"] = "need more than one transmit antenna"
        if self.n_rx_eav < 1:
            bad["n_rx_eav"] = "need at least one antenna per roaming receiver"
        elif self.n_tx <= self.n_rx_eav:
            bad["n_rx_eav"] = "must be smaller than n_tx"
        if self.n_desired < 1:
            bad["n_desired"] = "need at least one desired receiver"
        if self.n_roaming < 0:
            bad["n_roaming"] = "must be non-negative"
        if not 0.0 <= self.eta <= 1.0:
            bad["eta"] = "must lie in [0, 1]"
        try:
            g = self.gamma_db_vector
            if not np.all(np.isfinite(g)):
                bad["gamma_req_db"] = "must be finite"
        except ValueError as exc:
            bad["gamma_req_db"] = str(exc)
        try:
            r = self.r_eav_matrix
            if r.size and not np.all(r > 0):
                bad["r_eav_bits"] = "must be positive"
        except ValueError as exc:
            bad["r_eav_bits"] = str(exc)
        for name, n in (("p_min_desired_dbm", self.n_desired), ("p_min_roaming_dbm", self.n_roaming)):
            try:
                _broadcast(getattr(self, name), n, name)
            except ValueError as exc:
                bad[name] = str(exc)
        if not self.d_ref_m < self.d_max_m:
            bad["d_ref_m"] = "must be smaller than d_max_m"
        if self.d_ref_m <= 0:
            bad["d_ref_m"] = "must be positive"
        if self.carrier_hz <= 0:
            bad["carrier_hz"] = "must be positive"
        if self.breakpoint_m <= 0:
            bad["breakpoint_m"] = "must be positive"
        for name in ("sigma_ant_dbm", "sigma_s_dbm"):
            if not math.isfinite(getattr(self, name)):
                bad[name] = "noise power must be finite"
        return bad

    # derived quantities, linear units
    @property
    def gamma_db_vector(self) -> np.ndarray:
        return _broadcast(self.gamma_req_db, self.n_desired, "gamma_req_db")

    @property
    def gamma_req(self) -> np.ndarray:
        return db_to_linear(self.gamma_db_vector)

    @property
    def r_eav_matrix(self) -> np.ndarray:
        """Tolerated eavesdropping rate, shape (M, K)."""
        r = np.asarray(self.r_eav_bits, dtype=float)
        shape = (self.n_roaming, self.n_desired)
        if r.ndim == 0:
            return np.full(shape, float(r))
        if r.shape != shape:
            raise ValueError(f"expected scalar or shape {shape}, got {r.shape}")
        return r

    @property
    def xi_eav(self) -> np.ndarray:
        return 2.0 ** self.r_eav_matrix

    @property
    def p_min_desired_w(self) -> np.ndarray:
        return _dbm_vector(self.p_min_desired_dbm, self.n_desired, "p_min_desired_dbm")

    @property
    def p_min_roaming_w(self) -> np.ndarray:
        return _dbm_vector(self.p_min_roaming_dbm, self.n_roaming, "p_min_roaming_dbm")

    @property
    def sigma_ant_w(self) -> float:
        return float(dbm_to_watt(self.sigma_ant_dbm))

    @property
    def sigma_s_w(self) -> float:
        return float(dbm_to_watt(self.sigma_s_dbm))

    @property
    def rician_k(self) -> float:
        return float(db_to_linear(self.rician_k_db))

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        out = {"schema": CONFIG_SCHEMA}
        for f in dataclasses.fields(self):
            out[f.name] = _jsonable(getattr(self, f.name))
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        data = dict(data)
        schema = data.pop("schema", CONFIG_SCHEMA)
        if schema != CONFIG_SCHEMA:
            raise ConfigError({"schema": f"unsupported schema {schema!r}"})
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError({name: "unknown field" for name in unknown})
        kwargs = {k: _tupleize(v) for k, v in data.items()}
        return cls(**kwargs)


def _broadcast(value, n: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValueError(f"{name}: expected scalar or {n} values, got shape {arr.shape}")
    return arr


def _dbm_vector(value, n: int, name: str) -> np.ndarray:
    if value is None:
        return np.zeros(n)
    if np.ndim(value) and any(v is None for v in value):
        value = [-math.inf if v is None else v for v in value]
    return dbm_to_watt(_broadcast(value, n, name)) if n else np.zeros(0)


def _jsonable(v):
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    return v


def _tupleize(v):
    if isinstance(v, list):
        return tuple(_tupleize(x) for x in v)
    return v


def load_config(path) -> ScenarioConfig:
    """Read a JSON key/value scenario file; missing keys keep their defaults."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError({"path": f"cannot read {path}: {exc.strerror}"}) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError({"path": f"{path} is not valid JSON: {exc}"}) from exc
    if not isinstance(data, dict):
        raise ConfigError({"path": f"{path} must contain a JSON object"})
    return ScenarioConfig.from_dict(data)


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of all channels.

    ``h`` has shape (K, N_T): row k is the channel vector of desired
    receiver k. ``g`` has shape (M, N_T, N_R). ``distances_m`` lists the K
    desired receivers first, then the M roaming receivers.
    """

    h: np.ndarray
    g: np.ndarray
    distances_m: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        h = np.asarray(self.h, dtype=complex)
        g = np.asarray(self.g, dtype=complex)
        if h.ndim != 2:
            raise ContractError(f"h must have shape (K, N_T), got {h.shape}")
        if g.size == 0 and (g.ndim != 3 or g.shape[1] != h.shape[1]):
            g = np.zeros((0, h.shape[1], 1), dtype=complex)
        if g.ndim != 3 or g.shape[1] != h.shape[1]:
            raise ContractError(f"g must have shape (M, N_T, N_R), got {g.shape}")
        if not (np.all(np.isfinite(h)) and np.all(np.isfinite(g))):
            raise ContractError("channel entries must be finite")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "distances_m", np.asarray(self.distances_m, dtype=float))

    @property
    def n_tx(self) -> int:
        return self.h.shape[1]

    @property
    def n_desired(self) -> int:
        return self.h.shape[0]

    @property
    def n_roaming(self) -> int:
        return self.g.shape[0]

    @property
    def n_rx_eav(self) -> int:
        return self.g.shape[2]

    def truncate(self, n_tx: int) -> "ChannelRealization":
        """Keep the first ``n_tx`` transmit antennas."""
        if n_tx > self.n_tx:
            raise ContractError(f"cannot truncate {self.n_tx} antennas to {n_tx}")
        return ChannelRealization(self.h[:, :n_tx], self.g[:, :n_tx, :], self.distances_m)

    def rotate(self, unitary: np.ndarray) -> "ChannelRealization":
        """Apply a common transmit-side unitary to every channel."""
        return ChannelRealization(
            np.einsum("ij,kj->ki", unitary, self.h),
            np.einsum("ij,mjr->mir", unitary, self.g),
            self.distances_m,
        )


def path_loss_db(d_m: float, cfg: ScenarioConfig) -> float:
    """Two-slope path loss in dB, net of transmit and receive antenna gains."""
    if d_m < cfg.d_ref_m:
        raise ContractError(f"distance {d_m} m is below the reference distance {cfg.d_ref_m} m")

    def free_space(d):
        return 20.0 * math.log10(d) + 20.0 * math.log10(cfg.carrier_hz) + _FSPL_CONST_DB

    if d_m <= cfg.breakpoint_m:
        loss = free_space(d_m)
    else:
        loss = free_space(cfg.breakpoint_m) + 10.0 * cfg.far_exponent * math.log10(d_m / cfg.breakpoint_m)
    return loss - cfg.antenna_gain_tx_db - cfg.antenna_gain_rx_db


def rician_channel(rows: int, cols: int, k_factor_linear: float, rng: np.random.Generator) -> np.ndarray:
    """Unit-power Rician fading matrix.

    The line-of-sight part has one random phase shared by all entries
    (one receiver per call); the scattered part is i.i.d. CN(0, 1).
    """
    if k_factor_linear < 0:
        raise ContractError("Rician factor must be non-negative")
    if math.isinf(k_factor_linear):
        return np.full((rows, cols), np.exp(1j * rng.uniform(0.0, 2 * math.pi)))
    los = math.sqrt(k_factor_linear / (k_factor_linear + 1.0)) * np.exp(1j * rng.uniform(0.0, 2 * math.pi))
    nlos = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / math.sqrt(2.0)
    return los + math.sqrt(1.0 / (k_factor_linear + 1.0)) * nlos


def generate_scenario(cfg: ScenarioConfig, seed=None) -> ChannelRealization:
    """Draw receiver positions and channels.

    ``seed`` overrides ``cfg.seed``; it may be anything accepted by
    :func:`numpy.random.default_rng` (an int or a sequence of ints).
    """
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    n_rx = cfg.n_desired + cfg.n_roaming
    distances = rng.uniform(cfg.d_ref_m, cfg.d_max_m, size=n_rx)
    amp = np.array([10.0 ** (-path_loss_db(d, cfg) / 20.0) for d in distances])
    k = cfg.rician_k
    h = np.stack([amp[i] * rician_channel(cfg.n_tx, 1, k, rng)[:, 0] for i in range(cfg.n_desired)])
    g = [amp[cfg.n_desired + m] * rician_channel(cfg.n_tx, cfg.n_rx_eav, k, rng) for m in range(cfg.n_roaming)]
    g = np.stack(g) if g else np.zeros((0, cfg.n_tx, cfg.n_rx_eav), dtype=complex)
    return ChannelRealization(h, g, distances)
