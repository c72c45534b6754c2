"""Exact, solver-independent evaluation of rates, energies and powers.

Rates are in nats/s/Hz; divide by ln 2 for bits. Beamformers are stored as
dense arrays xE (K, N1, M) and xI (K, N, M).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .model import ChannelSet, NetworkConfig

LN2 = math.log(2.0)


class NonpositiveDenominatorError(ArithmeticError):
    """Worst-case eavesdropper noise q_{k,n} <= 0: uncertainty too large."""


@dataclass
class BeamformerSet:
    xE: np.ndarray  # (K, N1, M) energy beams, zone-1 UEs
    xI: np.ndarray  # (K, N, M) information beams

    @classmethod
    def zeros(cls, cfg: NetworkConfig) -> "BeamformerSet":
        return cls(np.zeros((cfg.K, cfg.N1_k, cfg.M), complex),
                   np.zeros((cfg.K, cfg.N_k, cfg.M), complex))

    @classmethod
    def random(cls, cfg: NetworkConfig, rng, scale: float = 1.0) -> "BeamformerSet":
        def draw(shape):
            return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)
        return cls(draw((cfg.K, cfg.N1_k, cfg.M)), draw((cfg.K, cfg.N_k, cfg.M)))

    def copy(self) -> "BeamformerSet":
        return BeamformerSet(self.xE.copy(), self.xI.copy())

    def scaled(self, c: float) -> "BeamformerSet":
        return BeamformerSet(self.xE * c, self.xI * c)

    def to_dict(self) -> dict:
        def cplx(a):
            return np.stack([a.real, a.imag], axis=-1).tolist()
        return {"xE": cplx(self.xE), "xI": cplx(self.xI)}

    @classmethod
    def from_dict(cls, doc: dict) -> "BeamformerSet":
        def cplx(v):
            a = np.asarray(v, float)
            return a[..., 0] + 1j * a[..., 1]
        return cls(cplx(doc["xE"]), cplx(doc["xI"]))


@dataclass(frozen=True)
class TimeSplit:
    """Energy fraction eta and its reparametrization mu = 1/(1 - eta)."""

    eta: float
    mu: float

    def __post_init__(self):
        if not 0 < self.eta < 1:
            raise ValueError(f"eta must lie in (0, 1), got {self.eta}")
        if abs(self.mu * (1 - self.eta) - 1) > 1e-12 * max(1.0, self.mu):
            raise ValueError("mu and eta are inconsistent")

    @classmethod
    def from_eta(cls, eta: float) -> "TimeSplit":
        if not 0 < eta < 1:
            raise ValueError(f"eta must lie in (0, 1), got {eta}")
        return cls(eta, 1.0 / (1.0 - eta))

    @classmethod
    def from_mu(cls, mu: float) -> "TimeSplit":
        if not mu > 1:
            raise ValueError(f"mu must exceed 1, got {mu}")
        return cls(1.0 - 1.0 / mu, mu)


# --------------------------------------------------------------------------
# link gains


def _cross(h: np.ndarray, x: np.ndarray) -> np.ndarray:
    """h (Kb, K, N, M), x (Kb, J, M) -> |h[kb,k,n]^H x[kb,j]|^2, shape (Kb, K, N, J)."""
    return np.abs(np.einsum("bknm,bjm->bknj", h.conj(), x)) ** 2


def _ev_cross(H: np.ndarray, x: np.ndarray) -> np.ndarray:
    """H (Kb, K, M, V), x (Kb, J, M) -> ||H[kb,k]^H x[kb,j]||^2, shape (Kb, K, J)."""
    return np.sum(np.abs(np.einsum("bkmv,bjm->bkjv", H.conj(), x)) ** 2, axis=-1)


def _power(x: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(x) ** 2, axis=-1)


def _own(a: np.ndarray) -> np.ndarray:
    """Diagonal a[k, k, n, n] of a (K, K, N, N) array -> (K, N)."""
    K, N = a.shape[1], a.shape[2]
    return a[np.arange(K)[:, None], np.arange(K)[:, None], np.arange(N), np.arange(N)]


def signal_power(cs: ChannelSet, xI: np.ndarray) -> np.ndarray:
    """|h_{k,k,n}^H x_{k,n}|^2, shape (K, N)."""
    return np.abs(np.einsum("knm,knm->kn", _serving(cs.h).conj(), xI)) ** 2


def _serving(h: np.ndarray) -> np.ndarray:
    K = h.shape[0]
    return h[np.arange(K), np.arange(K)]


def interference(cs: ChannelSet, xI: np.ndarray, cfg: NetworkConfig) -> np.ndarray:
    """phi_{k,n}: worst-case interference-plus-noise at UE (k,n), shape (K, N)."""
    g = _cross(cs.h, xI)  # (Kb, K, N, Nb)
    p = _power(xI)  # (Kb, Nb)
    K, N = xI.shape[0], xI.shape[1]
    kk = np.arange(K)
    nn = np.arange(N)
    total = g.sum(axis=(0, 3))
    own = g[kk[:, None], kk[:, None], nn, nn]
    eps_terms = np.einsum("bkn,b->kn", cs.eps_ue, p.sum(axis=1))
    own_eps = cs.eps_ue[kk[:, None], kk[:, None], nn] * p
    return total - own + eps_terms - own_eps + cfg.sigma_a2


def worst_signal(cs: ChannelSet, xI: np.ndarray) -> np.ndarray:
    """|h^H x|^2 - eps_{k,k,n} ||x||^2 (may be negative)."""
    K = xI.shape[0]
    eps = cs.eps_ue[np.arange(K), np.arange(K)]
    return signal_power(cs, xI) - eps * _power(xI)


def f1(cs: ChannelSet, xI: np.ndarray, cfg: NetworkConfig) -> np.ndarray:
    """ln(1 + worst-case SINR), numerator clamped at zero."""
    return np.log1p(np.maximum(worst_signal(cs, xI), 0.0) / interference(cs, xI, cfg))


def harvested_energy(cs: ChannelSet, x: BeamformerSet, ts: TimeSplit, cfg: NetworkConfig) -> np.ndarray:
    """zeta * eta * (sum of received energy-beam power + sigma_a2), shape (K, N1)."""
    N1 = x.xE.shape[1]
    g = _cross(cs.h[:, :, :N1, :], x.xE)  # (Kb, K, N1, J)
    return cfg.zeta * ts.eta * (g.sum(axis=(0, 3)) + cfg.sigma_a2)


def received_energy_power(cs: ChannelSet, xE: np.ndarray) -> np.ndarray:
    """sum_{kb, j} |h_{kb,k,n1}^H xE_{kb,j}|^2, shape (K, N1) (noise excluded)."""
    N1 = xE.shape[1]
    return _cross(cs.h[:, :, :N1, :], xE).sum(axis=(0, 3))


def worst_ue_rate(cs, x: BeamformerSet, ts: TimeSplit, cfg) -> np.ndarray:
    return (1.0 - ts.eta) * f1(cs, x.xI, cfg)


def _ev_terms(cs: ChannelSet, x: BeamformerSet):
    """Jamming and information-leakage aggregates at each eavesdropper.

    Returns (jam (K,), leak (K,), own (K, N)) where
      jam[k]   = sum_{kb,j} ||Hev^H xE||^2 - eps_ev ||xE||^2
      leak[k]  = sum_{kb,nb} ||Hev^H xI||^2 - eps_ev ||xI||^2
      own[k,n] = the (kb=k, nb=n) term of leak.
    """
    eE = _ev_cross(cs.Hev, x.xE)  # (Kb, K, J)
    eI = _ev_cross(cs.Hev, x.xI)  # (Kb, K, Nb)
    pE = _power(x.xE)
    pI = _power(x.xI)
    jam = eE.sum(axis=(0, 2)) - np.einsum("bk,b->k", cs.eps_ev, pE.sum(axis=1))
    leak = eI.sum(axis=(0, 2)) - np.einsum("bk,b->k", cs.eps_ev, pI.sum(axis=1))
    K = x.xI.shape[0]
    kk = np.arange(K)
    own = eI[kk, kk, :] - cs.eps_ev[kk, kk][:, None] * pI
    return jam, leak, own


def ev_numerator(cs: ChannelSet, xI: np.ndarray) -> np.ndarray:
    """||Hev_{k,k}^H x_{k,n}||^2 + eps_{k,k} ||x_{k,n}||^2, shape (K, N)."""
    K = xI.shape[0]
    kk = np.arange(K)
    Hs = cs.Hev[kk, kk]  # (K, M, V)
    leak = np.sum(np.abs(np.einsum("kmv,knm->knv", Hs.conj(), xI)) ** 2, axis=-1)
    return leak + cs.eps_ev[kk, kk][:, None] * _power(xI)


def ev_noise(cs: ChannelSet, x: BeamformerSet, ts: TimeSplit, cfg) -> np.ndarray:
    """q_{k,n}(x, eta), shape (K, N)."""
    jam, leak, own = _ev_terms(cs, x)
    ratio = ts.eta / (1.0 - ts.eta)
    return (ratio * jam)[:, None] + leak[:, None] - own + cfg.N_ev * cfg.sigma_a2 / (1.0 - ts.eta)


def ev_noise_mu(cs: ChannelSet, x: BeamformerSet, mu: float, cfg) -> np.ndarray:
    """q-bar_{k,n}(x, mu): the same quantity written in mu = 1/(1-eta)."""
    jam, leak, own = _ev_terms(cs, x)
    return ((mu - 1.0) * jam)[:, None] + leak[:, None] - own + mu * cfg.N_ev * cfg.sigma_a2


def worst_ev_sinr(cs, x: BeamformerSet, ts: TimeSplit, cfg) -> np.ndarray:
    q = ev_noise(cs, x, ts, cfg)
    if np.any(q <= 0):
        raise NonpositiveDenominatorError(
            f"worst-case eavesdropper noise nonpositive (min q = {q.min():.3e})")
    return ev_numerator(cs, x.xI) / q


def f2(cs, x: BeamformerSet, ts: TimeSplit, cfg) -> np.ndarray:
    return np.log1p(worst_ev_sinr(cs, x, ts, cfg))


def f2_mu(cs, x: BeamformerSet, mu: float, cfg) -> np.ndarray:
    q = ev_noise_mu(cs, x, mu, cfg)
    if np.any(q <= 0):
        raise NonpositiveDenominatorError(
            f"worst-case eavesdropper noise nonpositive (min q = {q.min():.3e})")
    return np.log1p(ev_numerator(cs, x.xI) / q)


def secrecy_rate(cs, x: BeamformerSet, ts: TimeSplit, cfg) -> np.ndarray:
    """(1 - eta) f1 - f2 in nats/s/Hz, shape (K, N)."""
    return (1.0 - ts.eta) * f1(cs, x.xI, cfg) - f2(cs, x, ts, cfg)


def secrecy_rate_bits(cs, x, ts, cfg) -> np.ndarray:
    return secrecy_rate(cs, x, ts, cfg) / LN2


def powers(x: BeamformerSet, ts: TimeSplit, cfg=None):
    """Per-cell transmit power g_k and network power g."""
    gk = ts.eta * _power(x.xE).sum(axis=1) + (1.0 - ts.eta) * _power(x.xI).sum(axis=1)
    return gk, float(gk.sum())


def powers_mu(x: BeamformerSet, mu: float) -> np.ndarray:
    """Per-cell g-bar_k(x, mu) = sum||xE||^2 + (sum||xI||^2 - sum||xE||^2)/mu."""
    pe = _power(x.xE).sum(axis=1)
    pi = _power(x.xI).sum(axis=1)
    return pe + (pi - pe) / mu


def see_denominator(x: BeamformerSet, ts: TimeSplit, cfg) -> np.ndarray:
    gk, _ = powers(x, ts, cfg)
    return gk / cfg.xi + cfg.M * cfg.P_A + cfg.P_c


def see_values(cs, x: BeamformerSet, ts: TimeSplit, cfg) -> np.ndarray:
    """Per-cell secrecy energy efficiency, nats/J/Hz (min over cells is the objective)."""
    return secrecy_rate(cs, x, ts, cfg).sum(axis=1) / see_denominator(x, ts, cfg)


# --------------------------------------------------------------------------
# feasibility audit


@dataclass
class AuditReport:
    """Per constraint family: (passed, worst relative violation)."""

    families: dict = field(default_factory=dict)
    tol: float = 1e-6

    @property
    def ok(self) -> bool:
        return all(p for p, _ in self.families.values())

    def failed(self) -> list:
        return [k for k, (p, _) in self.families.items() if not p]

    def worst(self) -> float:
        return max((v for _, v in self.families.values()), default=0.0)

    def __str__(self):
        return ", ".join(f"{k}={'ok' if p else 'FAIL'}({v:.2e})" for k, (p, v) in self.families.items())


def feasibility_audit(cs, x: BeamformerSet, ts: TimeSplit | float, cfg, tol: float = 1e-6,
                      r_qos: float | None = None) -> AuditReport:
    """Check the original constraints at (x, eta).

    Violations are relative to the limit, e.g. (g_k - Pk_max) / Pk_max and
    (e_min - E) / e_min; a family passes when its worst violation is <= tol.
    With ``r_qos`` given, the per-UE secrecy QoS family is audited as well
    (violation relative to max(r_qos, 1)).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    eta = ts.eta if isinstance(ts, TimeSplit) else float(ts)
    fam = {}
    eta_viol = max(0.0, -eta, eta - 1.0) if 0 < eta < 1 else max(abs(eta), abs(eta - 1.0), 1.0)
    fam["time_split"] = (0 < eta < 1, 0.0 if 0 < eta < 1 else eta_viol)
    if not 0 < eta < 1:
        return AuditReport(fam, tol)
    ts = TimeSplit.from_eta(eta)

    def family(viol):
        v = float(np.max(viol)) if np.size(viol) else 0.0
        v = max(v, 0.0)
        return (v <= tol, v)

    caps = np.concatenate([_power(x.xE).ravel(), _power(x.xI).ravel()])
    fam["beam_caps"] = family((caps - cfg.Pk_max) / cfg.Pk_max)
    gk, g = powers(x, ts, cfg)
    fam["cell_power"] = family((gk - cfg.Pk_max) / cfg.Pk_max)
    fam["network_power"] = family(np.array([(g - cfg.P_max) / cfg.P_max]))
    E = harvested_energy(cs, x, ts, cfg)
    fam["energy_harvest"] = family((cfg.e_min - E) / cfg.e_min)
    if r_qos is not None:
        rate = secrecy_rate(cs, x, ts, cfg)
        fam["secrecy_qos"] = family((r_qos - rate) / max(r_qos, 1.0))
    return AuditReport(fam, tol)


# --------------------------------------------------------------------------
# report


@dataclass
class MetricReport:
    ue_rate: np.ndarray  # (1-eta) f1
    ev_term: np.ndarray  # f2
    secrecy: np.ndarray
    energy: np.ndarray  # (K, N1)
    cell_power: np.ndarray
    network_power: float
    see: np.ndarray
    eta: float

    @property
    def min_secrecy(self) -> float:
        return float(self.secrecy.min())

    @property
    def min_see(self) -> float:
        return float(self.see.min())

    def to_json(self) -> str:
        return json.dumps({
            "eta": self.eta,
            "ue_rate_nats": self.ue_rate.tolist(),
            "ev_term_nats": self.ev_term.tolist(),
            "secrecy_nats": self.secrecy.tolist(),
            "secrecy_bits": (self.secrecy / LN2).tolist(),
            "harvested_energy": self.energy.tolist(),
            "cell_power": self.cell_power.tolist(),
            "network_power": self.network_power,
            "see_nats_per_joule": self.see.tolist(),
            "min_secrecy_nats": self.min_secrecy,
            "min_see_nats_per_joule": self.min_see,
        })

    def csv_rows(self) -> list:
        """One row per UE: k, n, ue_rate, ev_term, secrecy (nats), secrecy (bits), energy."""
        header = "k,n,ue_rate_nats,ev_term_nats,secrecy_nats,secrecy_bits,harvested_energy"
        rows = [header]
        K, N = self.secrecy.shape
        N1 = self.energy.shape[1]
        for k in range(K):
            for n in range(N):
                e = self.energy[k, n] if n < N1 else float("nan")
                rows.append(f"{k},{n},{self.ue_rate[k, n]!r},{self.ev_term[k, n]!r},"
                            f"{self.secrecy[k, n]!r},{self.secrecy[k, n] / LN2!r},{e!r}")
        return rows


def metric_report(cs, x: BeamformerSet, ts: TimeSplit, cfg) -> MetricReport:
    rate = worst_ue_rate(cs, x, ts, cfg)
    ev = f2(cs, x, ts, cfg)
    gk, g = powers(x, ts, cfg)
    sec = rate - ev
    see = sec.sum(axis=1) / (gk / cfg.xi + cfg.M * cfg.P_A + cfg.P_c)
    return MetricReport(rate, ev, sec, harvested_energy(cs, x, ts, cfg), gk, g, see, ts.eta)
