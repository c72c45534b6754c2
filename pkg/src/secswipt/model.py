"""Scenario construction: configuration, channel generation, uncertainty radii.

All quantities are stored in watts and linear units. Power-like config keys
may be given in dBm in the config file (``<key>_dbm``); conversion happens on
load only.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# Minimum BS-UE distance used in the pathloss law (meters).
MIN_DISTANCE = 1.0


class ConfigError(ValueError):
    """Raised for unparsable config files or invariant violations."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watt_to_dbm(w: float) -> float:
    return 10.0 * math.log10(w) + 30.0


@dataclass(frozen=True)
class NetworkConfig:
    """Scenario constants. Defaults reproduce the paper's simulation setup."""

    K: int = 3
    N_k: int = 4
    N1_k: int = 2
    M: int = 5
    N_ev: int = 2
    Pk_max: float = dbm_to_watt(26.0)
    P_max: float = dbm_to_watt(30.0)
    e_min: float = dbm_to_watt(-20.0)
    zeta: float = 0.5
    sigma_a2: float = dbm_to_watt(-90.0)
    eps0: float = 0.005
    eps1: float = 1e-3
    cell_radius: float = 40.0
    inner_radius: float = 15.0
    pathloss_exp: float = 3.0
    rician_K: float = 10.0  # 10 dB
    xi: float = 0.2
    P_A: float = 0.6
    P_c: float = 2.5
    r_qos: float = 0.5 * math.log(2.0)  # nats/s/Hz
    r_min: float = 0.1  # nats/s/Hz, initialization rate target
    seed: int = 0

    def __post_init__(self):
        validate(self)

    def replace(self, **changes) -> "NetworkConfig":
        return dataclasses.replace(self, **changes)

    @property
    def N2_k(self) -> int:
        return self.N_k - self.N1_k

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_INT_KEYS = ("K", "N_k", "N1_k", "M", "N_ev", "seed")
_POSITIVE_KEYS = ("Pk_max", "P_max", "e_min", "sigma_a2", "cell_radius",
                  "inner_radius", "pathloss_exp", "rician_K", "P_A", "P_c")
# keys that may be written as <key>_dbm in config files
DBM_KEYS = ("Pk_max", "P_max", "e_min", "sigma_a2", "P_A", "P_c")


def validate(cfg: NetworkConfig) -> None:
    for key in ("K", "M", "N_ev", "N_k"):
        if getattr(cfg, key) < 1:
            raise ConfigError(key, "must be >= 1")
    if not 0 < cfg.N1_k <= cfg.N_k:
        raise ConfigError("N1_k", "need 0 < N1_k <= N_k")
    for key in _POSITIVE_KEYS:
        v = getattr(cfg, key)
        if not (np.isfinite(v) and v > 0):
            raise ConfigError(key, "must be strictly positive")
    if cfg.inner_radius >= cfg.cell_radius:
        raise ConfigError("inner_radius", "must be smaller than cell_radius")
    if not 0 < cfg.zeta < 1:
        raise ConfigError("zeta", "must lie in (0, 1)")
    if not 0 < cfg.xi <= 1:
        raise ConfigError("xi", "must lie in (0, 1]")
    for key in ("eps0", "eps1", "r_qos", "r_min"):
        if getattr(cfg, key) < 0:
            raise ConfigError(key, "must be nonnegative")


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines ('#' comments, ':' also accepted)."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            raise ConfigError(f"line {lineno}", f"cannot parse {raw!r}")
        key, value = (s.strip() for s in line.split(sep, 1))
        out[key] = value
    return out


def config_from_mapping(values: dict, base: NetworkConfig | None = None) -> NetworkConfig:
    """Build a config from string/number values, converting dBm/dB/bit keys."""
    base = base or NetworkConfig()
    fields = {f.name for f in dataclasses.fields(NetworkConfig)}
    changes = {}
    for key, raw in values.items():
        try:
            value = float(raw)
        except (TypeError, ValueError):
            raise ConfigError(key, f"not a number: {raw!r}") from None
        if key.endswith("_dbm") and key[:-4] in DBM_KEYS:
            changes[key[:-4]] = dbm_to_watt(value)
        elif key == "rician_K_db":
            changes["rician_K"] = 10.0 ** (value / 10.0)
        elif key in ("r_qos_bits", "r_min_bits"):
            changes[key[:-5]] = value * math.log(2.0)
        elif key in fields:
            if key in _INT_KEYS:
                if value != int(value):
                    raise ConfigError(key, "must be an integer")
                value = int(value)
            changes[key] = value
        else:
            raise ConfigError(key, "unknown key")
    try:
        return dataclasses.replace(base, **changes)
    except ConfigError:
        raise


def load_config(path) -> NetworkConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(str(path), "config file not found")
    return config_from_mapping(parse_config_text(path.read_text()))


def dump_config(cfg: NetworkConfig) -> str:
    """Inverse of :func:`load_config` (linear units, exact floats)."""
    return "".join(f"{k} = {v!r}\n" for k, v in cfg.to_dict().items())


@dataclass
class ChannelSet:
    """Estimated channels and their uncertainty radii.

    h[kb, k, n]    : (M,) channel BS kb -> UE (k, n)
    Hev[kb, k]     : (M, N_ev) channel BS kb -> eavesdropper k
    eps_ue[kb,k,n] : radius of the UE channel error ball
    eps_ev[kb,k]   : radius of the eavesdropper channel error ball
    """

    h: np.ndarray
    Hev: np.ndarray
    eps_ue: np.ndarray
    eps_ev: np.ndarray
    bs_pos: np.ndarray | None = None
    ue_pos: np.ndarray | None = None
    ev_pos: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return self.h.shape[0]

    @property
    def N(self) -> int:
        return self.h.shape[2]

    @property
    def M(self) -> int:
        return self.h.shape[3]

    def ue_distances(self) -> np.ndarray:
        """(K, N) distance of each UE to its serving BS."""
        return np.linalg.norm(self.ue_pos - self.bs_pos[:, None, :], axis=-1)

    def to_json(self) -> str:
        def cplx(a):
            a = np.asarray(a)
            return np.stack([a.real, a.imag], axis=-1).tolist()

        doc = {
            "h": cplx(self.h),
            "Hev": cplx(self.Hev),
            "eps_ue": self.eps_ue.tolist(),
            "eps_ev": self.eps_ev.tolist(),
            "meta": self.meta,
        }
        for key in ("bs_pos", "ue_pos", "ev_pos"):
            val = getattr(self, key)
            doc[key] = None if val is None else val.tolist()
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "ChannelSet":
        doc = json.loads(text)

        def cplx(v):
            a = np.asarray(v, dtype=float)
            return a[..., 0] + 1j * a[..., 1]

        pos = {k: (None if doc.get(k) is None else np.asarray(doc[k]))
               for k in ("bs_pos", "ue_pos", "ev_pos")}
        return cls(h=cplx(doc["h"]), Hev=cplx(doc["Hev"]),
                   eps_ue=np.asarray(doc["eps_ue"]), eps_ev=np.asarray(doc["eps_ev"]),
                   meta=doc.get("meta", {}), **pos)


def uncertainty_radius(cfg: NetworkConfig, norm_sq: float, serving: bool) -> float:
    if norm_sq < 0:
        raise ValueError("norm_sq must be nonnegative")
    return (cfg.eps1 if serving else cfg.eps0) * norm_sq


def ue_radii(h: np.ndarray, eps0: float, eps1: float) -> np.ndarray:
    norms = np.sum(np.abs(h) ** 2, axis=-1)
    K = h.shape[0]
    serving = np.eye(K, dtype=bool)[:, :, None]
    return np.where(serving, eps1 * norms, eps0 * norms)


def ev_radii(Hev: np.ndarray, eps0: float) -> np.ndarray:
    return eps0 * np.sum(np.abs(Hev) ** 2, axis=(-2, -1))


def with_uncertainty(cs: ChannelSet, eps0: float, eps1: float) -> ChannelSet:
    """Same channels, radii recomputed for new uncertainty levels."""
    return dataclasses.replace(cs, eps_ue=ue_radii(cs.h, eps0, eps1),
                               eps_ev=ev_radii(cs.Hev, eps0))


def bs_positions(K: int, cell_radius: float) -> np.ndarray:
    """Centers of K mutually tangent cells on a hexagonal lattice.

    The first three form the equilateral triangle (0,0), (2R,0), (R, R*sqrt(3)).
    """
    d = 2.0 * cell_radius
    a1 = np.array([d, 0.0])
    a2 = np.array([d / 2.0, d * math.sqrt(3) / 2.0])
    pts = [(0, 0), (1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)]
    ring = 2
    while len(pts) < K:
        for i in range(-ring, ring + 1):
            for j in range(-ring, ring + 1):
                if max(abs(i), abs(j), abs(i + j)) == ring:
                    pts.append((i, j))
        ring += 1
    return np.array([i * a1 + j * a2 for i, j in pts[:K]])


def _disc_points(rng, n, r_lo, r_hi):
    """Area-uniform points in the annulus r_lo <= r <= r_hi."""
    u = rng.uniform(size=n)
    r = np.sqrt(u * (r_hi ** 2 - r_lo ** 2) + r_lo ** 2)
    theta = rng.uniform(0.0, 2 * math.pi, size=n)
    return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)


def steering(M: int, angle) -> np.ndarray:
    """Half-wavelength ULA response, unit-modulus entries."""
    angle = np.asarray(angle, dtype=float)
    m = np.arange(M)
    return np.exp(1j * math.pi * np.multiply.outer(np.sin(angle), m))


def pathloss(d, exponent: float):
    return np.maximum(np.asarray(d, dtype=float), MIN_DISTANCE) ** (-exponent)


def rician(rng, los: np.ndarray, gain, rician_K: float) -> np.ndarray:
    """sqrt(gain) * (sqrt(K/(K+1)) * LOS + sqrt(1/(K+1)) * CN(0, 1))."""
    nlos = (rng.standard_normal(los.shape) + 1j * rng.standard_normal(los.shape)) / math.sqrt(2)
    kr = rician_K
    amp = np.sqrt(np.asarray(gain, dtype=float))[..., None]
    return amp * (math.sqrt(kr / (kr + 1)) * los + math.sqrt(1 / (kr + 1)) * nlos)


def channel_vector(rng, d: float, bearing: float, M: int, rician_K: float, exponent: float):
    return rician(rng, steering(M, bearing), float(pathloss(d, exponent)), rician_K)


def place_nodes(cfg: NetworkConfig, rng):
    bs = bs_positions(cfg.K, cfg.cell_radius)
    ue = np.empty((cfg.K, cfg.N_k, 2))
    ev = np.empty((cfg.K, 2))
    for k in range(cfg.K):
        ue[k, :cfg.N1_k] = bs[k] + _disc_points(rng, cfg.N1_k, 0.0, cfg.inner_radius)
        ue[k, cfg.N1_k:] = bs[k] + _disc_points(rng, cfg.N2_k, cfg.inner_radius, cfg.cell_radius)
        ev[k] = bs[k] + _disc_points(rng, 1, 0.0, cfg.inner_radius)[0]
    return bs, ue, ev


def generate_channels(cfg: NetworkConfig, seed: int | None = None) -> ChannelSet:
    """Draw node positions and Rician channels; deterministic in the seed.

    Positions and fading use separate RNG streams so that a sweep over M keeps
    the same geometry for a given seed.
    """
    seed = cfg.seed if seed is None else seed
    bs, ue, ev = place_nodes(cfg, np.random.default_rng([seed, 0]))
    rng = np.random.default_rng([seed, 1, cfg.M, cfg.N_ev])
    K, N, M, Nev = cfg.K, cfg.N_k, cfg.M, cfg.N_ev

    # BS kb -> UE (k, n)
    delta = ue[None, :, :, :] - bs[:, None, None, :]
    dist = np.linalg.norm(delta, axis=-1)
    bearing = np.arctan2(delta[..., 1], delta[..., 0])
    los = steering(M, bearing)
    h = rician(rng, los, pathloss(dist, cfg.pathloss_exp), cfg.rician_K)

    # BS kb -> eavesdropper k, LOS = outer product of both array responses
    dv = ev[None, :, :] - bs[:, None, :]
    dist_ev = np.linalg.norm(dv, axis=-1)
    bear_ev = np.arctan2(dv[..., 1], dv[..., 0])
    los_ev = steering(M, bear_ev)[..., :, None] * np.conj(steering(Nev, bear_ev))[..., None, :]
    gain = pathloss(dist_ev, cfg.pathloss_exp)
    nlos = (rng.standard_normal(los_ev.shape) + 1j * rng.standard_normal(los_ev.shape)) / math.sqrt(2)
    kr = cfg.rician_K
    Hev = np.sqrt(gain)[..., None, None] * (math.sqrt(kr / (kr + 1)) * los_ev + math.sqrt(1 / (kr + 1)) * nlos)

    return ChannelSet(h=h, Hev=Hev, eps_ue=ue_radii(h, cfg.eps0, cfg.eps1),
                      eps_ev=ev_radii(Hev, cfg.eps0), bs_pos=bs, ue_pos=ue, ev_pos=ev,
                      meta={"seed": int(seed)})


def normalize(cs: ChannelSet, cfg: NetworkConfig):
    """Rescale to noise = 1 and network budget = 1.

    Beamformers scale by 1/sqrt(P_max) and channels by sqrt(P_max)/sigma_a, so
    every SINR and rate is unchanged. Powers (including P_A, P_c) are divided
    by P_max and the energy threshold by sigma_a2; SEE values therefore come
    out multiplied by P_max.
    """
    s = math.sqrt(cfg.P_max / cfg.sigma_a2)
    p = cfg.P_max / cfg.sigma_a2
    cs_n = dataclasses.replace(cs, h=cs.h * s, Hev=cs.Hev * s,
                               eps_ue=cs.eps_ue * p, eps_ev=cs.eps_ev * p)
    cfg_n = cfg.replace(sigma_a2=1.0, P_max=1.0, Pk_max=cfg.Pk_max / cfg.P_max,
                        e_min=cfg.e_min / cfg.sigma_a2, P_A=cfg.P_A / cfg.P_max,
                        P_c=cfg.P_c / cfg.P_max)
    return cs_n, cfg_n


def beam_scale(cfg: NetworkConfig) -> float:
    """Factor mapping normalized beamformers back to watts^(1/2)."""
    return math.sqrt(cfg.P_max)
