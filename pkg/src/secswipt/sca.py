"""Convex bounds and inner approximations around an expansion point.

Every object here is numeric: it stores the coefficients of a bound built at
an expansion point and can evaluate the bound at any other point. The conic
assembly reads the same coefficients, so the oracle tests in ``validation``
exercise exactly what the optimizer uses.

Notation (per UE (k, n)):
  phi      interference-plus-noise at the UE, worst case
  N        ||Hev_kk^H x_kn||^2 + eps_kk ||x_kn||^2, eavesdropper leakage
  q        worst-case eavesdropper noise written in mu
  d        worst-case SINR of the UE at the expansion point
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import metrics as mt
from .metrics import BeamformerSet

# Margins used by the subproblems.
NU_FLOOR = 1e-9  # nu >= NU_FLOOR * sigma_a2
TRUST_MARGIN = 1e-9


class InvalidExpansion(ValueError):
    """The expansion point violates a precondition of a bound."""


# --------------------------------------------------------------------------
# iterate


@dataclass
class Iterate:
    """Feasible point (x, mu) with auxiliaries and cached values.

    nu[k, n]   worst-case signal power at the point (bound auxiliary)
    beta[k, n] squared eavesdropper noise, sqrt(beta) = q-bar
    t[k]       squared power denominator of the energy-efficiency ratio
    """

    x: BeamformerSet
    mu: float
    nu: np.ndarray | None = None
    beta: np.ndarray | None = None
    t: np.ndarray | None = None
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.mu > 1:
            raise InvalidExpansion(f"mu must exceed 1, got {self.mu}")
        for name in ("nu", "beta", "t"):
            v = getattr(self, name)
            if v is not None and np.any(np.asarray(v) <= 0):
                raise InvalidExpansion(f"{name} must be strictly positive")

    @property
    def eta(self) -> float:
        return 1.0 - 1.0 / self.mu

    @property
    def ts(self) -> mt.TimeSplit:
        return mt.TimeSplit.from_mu(self.mu)

    @property
    def gamma(self):
        return None if self.beta is None else np.sqrt(self.beta)

    @property
    def tau(self):
        return None if self.t is None else np.sqrt(self.t)


def rotate_phases(x: BeamformerSet, cs) -> BeamformerSet:
    """Rotate each xI_{k,n} so that h_{k,k,n}^H xI_{k,n} is real and >= 0."""
    K = x.xI.shape[0]
    h_own = cs.h[np.arange(K), np.arange(K)]
    inner = np.einsum("knm,knm->kn", h_own.conj(), x.xI)
    phase = np.where(np.abs(inner) > 0, np.exp(-1j * np.angle(inner)), 1.0)
    return BeamformerSet(x.xE.copy(), x.xI * phase[..., None])


def serving_real(cs, xI) -> np.ndarray:
    """Re{h_{k,k,n}^H xI_{k,n}}, shape (K, N)."""
    K = xI.shape[0]
    h_own = cs.h[np.arange(K), np.arange(K)]
    return np.einsum("knm,knm->kn", h_own.conj(), xI).real


def serving_eps(cs) -> np.ndarray:
    K = cs.K
    return cs.eps_ue[np.arange(K), np.arange(K)]


def worst_signal_re(cs, xI) -> np.ndarray:
    """(Re{h^H x})^2 - eps_{k,k,n} ||x||^2."""
    return serving_real(cs, xI) ** 2 - serving_eps(cs) * np.sum(np.abs(xI) ** 2, axis=-1)


def fbar1(cs, xI, mu, cfg) -> np.ndarray:
    """(1/mu) ln(1 + worst-case SINR) with the real-part signal model."""
    return np.log1p(worst_signal_re(cs, xI) / mt.interference(cs, xI, cfg)) / mu


def power_denominator(x, mu, cfg) -> np.ndarray:
    """(1/xi) g-bar_k + M P_A + P_c, shape (K,)."""
    return mt.powers_mu(x, mu) / cfg.xi + cfg.M * cfg.P_A + cfg.P_c


def make_iterate(x: BeamformerSet, mu: float, cs, cfg, *, eavesdropper=True, see=False,
                 rotate=True) -> Iterate:
    """Build an expansion point with tight auxiliaries.

    nu = worst-case signal power, sqrt(beta) = q-bar, sqrt(t) = power
    denominator, i.e. every auxiliary sits on its constraint boundary.
    """
    if rotate:
        x = rotate_phases(x, cs)
    nu = worst_signal_re(cs, x.xI)
    phi = mt.interference(cs, x.xI, cfg)
    values = {"phi": phi, "signal": nu, "fbar1": np.log1p(nu / phi) / mu,
              "gbar": mt.powers_mu(x, mu)}
    beta = None
    if eavesdropper:
        q = mt.ev_noise_mu(cs, x, mu, cfg)
        if np.any(q <= 0):
            raise InvalidExpansion(f"eavesdropper noise nonpositive (min {q.min():.3e})")
        values["qbar"] = q
        values["fbar2"] = np.log1p(mt.ev_numerator(cs, x.xI) / q)
        beta = q ** 2
    else:
        values["fbar2"] = np.zeros_like(nu)
    t = None
    if see:
        t = power_denominator(x, mu, cfg) ** 2
    floor = NU_FLOOR * cfg.sigma_a2
    values["nu_raw"] = nu
    return Iterate(x=x, mu=float(mu), nu=np.maximum(nu, floor), beta=beta, t=t, values=values)


# --------------------------------------------------------------------------
# bound pieces


@dataclass
class BoundPiece:
    """One term of a bound, kept for inspection and JSON dumps."""

    kind: str  # linear | convex-quadratic | quadratic-over-linear | reciprocal | epigraph-cone
    tag: str
    index: tuple
    payload: dict

    def to_dict(self):
        def conv(v):
            if isinstance(v, np.ndarray):
                return v.tolist() if not np.iscomplexobj(v) else np.stack([v.real, v.imag], -1).tolist()
            return v
        return {"kind": self.kind, "tag": self.tag, "index": list(self.index),
                "payload": {k: conv(v) for k, v in self.payload.items()}}


def dump_pieces(pieces, path=None) -> str:
    grouped = {}
    for p in pieces:
        grouped.setdefault(p.tag, []).append(p.to_dict())
    text = json.dumps(grouped)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def log_rate_coefficients(d, scale):
    """Coefficients of ln(1 + 1/x)/s >= a - b x - c s around x = 1/d, s = scale.

    Returns (a, b, c). With d = 0 all three vanish.
    """
    d = np.asarray(d, float)
    L = np.log1p(d)
    a = 2.0 * L / scale + d / (scale * (d + 1.0))
    b = d ** 2 / (scale * (d + 1.0))
    c = L / scale ** 2
    return a, b, c


@dataclass
class RateMinorant:
    """a - b phi/nu - c mu with nu <= psi - eps||x||^2, nu >= floor."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    re_l: np.ndarray  # Re{h^H x} at the expansion
    phi_l: np.ndarray
    nu_l: np.ndarray
    mu_l: float
    active: np.ndarray  # False where d == 0 (bound is identically zero)

    def psi(self, cs, xI):
        return 2.0 * self.re_l * serving_real(cs, xI) - self.re_l ** 2

    def nu_max(self, cs, xI):
        """Largest admissible nu at xI."""
        return self.psi(cs, xI) - serving_eps(cs) * np.sum(np.abs(xI) ** 2, axis=-1)

    def value(self, cs, xI, mu, cfg, nu=None):
        if nu is None:
            nu = self.nu_max(cs, xI)
        phi = mt.interference(cs, xI, cfg)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = self.a - self.b * phi / nu - self.c * mu
        return np.where(self.active, val, 0.0)

    def pieces(self):
        out = []
        K, N = self.a.shape
        for k in range(K):
            for n in range(N):
                out.append(BoundPiece("quadratic-over-linear", "rate_minorant", (k, n),
                                      {"a": float(self.a[k, n]), "b": float(self.b[k, n]),
                                       "c": float(self.c[k, n]), "d": float(self.d[k, n])}))
                out.append(BoundPiece("linear", "signal_linearization", (k, n),
                                      {"re_l": float(self.re_l[k, n]), "nu_floor": NU_FLOOR}))
        return out


def minorant_f1(it: Iterate, cs, cfg) -> RateMinorant:
    re_l = serving_real(cs, it.x.xI)
    if np.any(re_l < -1e-12 * np.maximum(1.0, np.abs(re_l).max())):
        raise InvalidExpansion("serving inner products must have nonnegative real part")
    nu_l = re_l ** 2 - serving_eps(cs) * np.sum(np.abs(it.x.xI) ** 2, axis=-1)
    phi_l = mt.interference(cs, it.x.xI, cfg)
    if np.any(nu_l < -1e-12 * phi_l):
        raise InvalidExpansion("worst-case signal power negative at the expansion point")
    floor = NU_FLOOR * cfg.sigma_a2
    active = nu_l > floor
    d = np.where(active, nu_l / phi_l, 0.0)
    a, b, c = log_rate_coefficients(d, it.mu)
    return RateMinorant(a, b, c, d, re_l, phi_l, np.where(active, nu_l, 1.0), it.mu, active)


@dataclass
class LeakageMajorant:
    """f2_l + (N(x)/sqrt(beta) - s_l)/(1 + s_l), valid with sqrt(beta) <= q-bar.

    sqrt(beta) <= q-bar is imposed through the inner approximation
        0.5*(beta/(q_l (mu_l-1)) + q_l (mu_l-1)/(mu-1)^2) <= q-bar_inner(x, mu)
    and the trust region mu <= 2 mu_l - 1.
    """

    f2_l: np.ndarray
    s_l: np.ndarray  # N_l / q_l
    q_l: np.ndarray  # sqrt(beta_l)
    mu_l: float
    xE_l: np.ndarray
    xI_l: np.ndarray

    @property
    def mu_max(self) -> float:
        return 2.0 * self.mu_l - 1.0

    def value(self, cs, x: BeamformerSet, beta):
        N = mt.ev_numerator(cs, x.xI)
        return self.f2_l + (N / np.sqrt(beta) - self.s_l) / (1.0 + self.s_l)

    def cone_lhs(self, beta, mu):
        c = self.q_l * (self.mu_l - 1.0)
        return 0.5 * (beta / c + c / (mu - 1.0) ** 2)

    def q_inner(self, cs, x: BeamformerSet, mu, cfg):
        """Concave minorant of q-bar(x, mu)/(mu - 1), tight at the expansion."""
        ml1 = self.mu_l - 1.0
        y = mu - 1.0
        GE_l = ev_proj(cs.Hev, self.xE_l)
        GE = ev_proj(cs.Hev, x.xE)
        pE = np.sum(np.abs(x.xE) ** 2, axis=-1)
        jam = (np.sum(2 * np.real(np.conj(GE_l) * GE) - np.abs(GE_l) ** 2, axis=(0, 2, 3))
               - np.einsum("bk,bj->k", cs.eps_ev, pE))
        GI_l = ev_proj(cs.Hev, self.xI_l)
        GI = ev_proj(cs.Hev, x.xI)
        cross = np.sum(np.real(np.conj(GI_l) * GI), axis=-1)  # (Kb, K, Nb)
        sq_l = np.sum(np.abs(GI_l) ** 2, axis=-1)
        pI = np.sum(np.abs(x.xI) ** 2, axis=-1)
        eps_p = cs.eps_ev[:, :, None] * pI[:, None, :]  # (Kb, K, Nb)
        cross_o = _others(cross)
        sq_o = _others(sq_l)
        eps_o = _others(eps_p)
        noise = cfg.N_ev * cfg.sigma_a2
        return (jam[:, None] - eps_o / y + 2.0 * cross_o / ml1 - sq_o * y / ml1 ** 2
                + (1.0 + 2.0 / ml1 - y / ml1 ** 2) * noise)

    def inner_satisfied(self, cs, x, mu, beta, cfg, tol=0.0):
        if not mu < self.mu_max:
            return np.zeros_like(self.q_l, dtype=bool)
        return self.cone_lhs(beta, mu) <= self.q_inner(cs, x, mu, cfg) + tol

    def pieces(self):
        out = []
        K, N = self.f2_l.shape
        for k in range(K):
            for n in range(N):
                out.append(BoundPiece("quadratic-over-linear", "leakage_majorant", (k, n),
                                      {"f2_l": float(self.f2_l[k, n]), "s_l": float(self.s_l[k, n]),
                                       "q_l": float(self.q_l[k, n])}))
                out.append(BoundPiece("epigraph-cone", "eve_noise_inner", (k, n),
                                      {"mu_l": self.mu_l, "mu_max": self.mu_max}))
        out.append(BoundPiece("reciprocal", "inverse_mu_minus_one", (), {"mu_l": self.mu_l}))
        return out


def ev_proj(Hev, x) -> np.ndarray:
    """Hev[kb, k]^H x[kb, j] for all pairs, shape (Kb, K, J, V)."""
    return np.einsum("bkmv,bjm->bkjv", Hev.conj(), x)


def _others(a) -> np.ndarray:
    """From a[kb, k, nb] form sum over (kb, nb) != (k, n), shape (K, N)."""
    K = a.shape[1]
    kk = np.arange(K)
    return a.sum(axis=(0, 2))[:, None] - a[kk, kk, :]


def majorant_f2(it: Iterate, cs, cfg) -> LeakageMajorant:
    q = mt.ev_noise_mu(cs, it.x, it.mu, cfg)
    if np.any(q <= 0):
        raise InvalidExpansion(f"eavesdropper noise nonpositive (min {q.min():.3e})")
    N = mt.ev_numerator(cs, it.x.xI)
    s = N / q
    return LeakageMajorant(np.log1p(s), s, q, it.mu, it.x.xE.copy(), it.x.xI.copy())


@dataclass
class PowerInner:
    """Convex inner approximation of the mu-form power budgets."""

    mu_l: float
    xE_l: np.ndarray

    def cell(self, x: BeamformerSet, mu) -> np.ndarray:
        pE = np.sum(np.abs(x.xE) ** 2, axis=(1, 2))
        pI = np.sum(np.abs(x.xI) ** 2, axis=(1, 2))
        lin = np.sum(2 * np.real(np.conj(self.xE_l) * x.xE), axis=(1, 2))
        pl = np.sum(np.abs(self.xE_l) ** 2, axis=(1, 2))
        return pE + pI / mu - lin / self.mu_l + mu * pl / self.mu_l ** 2

    def network(self, x, mu) -> float:
        return float(self.cell(x, mu).sum())

    def satisfied(self, x, mu, cfg, tol=0.0) -> bool:
        return bool(np.all(self.cell(x, mu) <= cfg.Pk_max + tol) and self.network(x, mu) <= cfg.P_max + tol)

    def pieces(self):
        return [BoundPiece("linear", "power_linearization", (k,),
                           {"mu_l": self.mu_l, "xE_l": self.xE_l[k]}) for k in range(self.xE_l.shape[0])]


def inner_power_constraints(it: Iterate, cfg=None) -> PowerInner:
    if not it.mu > 1:
        raise InvalidExpansion("mu must exceed 1")
    return PowerInner(it.mu, it.x.xE.copy())


@dataclass
class EnergyInner:
    """Linearized received energy-beam power >= (e/zeta)(1 + 1/(mu-1)) - sigma^2."""

    xE_l: np.ndarray
    e_over_zeta: float
    sigma2: float

    def lhs(self, cs, xE) -> np.ndarray:
        N1 = xE.shape[1]
        h = cs.h[:, :, :N1, :]
        g_l = np.einsum("bknm,bjm->bknj", h.conj(), self.xE_l)
        g = np.einsum("bknm,bjm->bknj", h.conj(), xE)
        return np.sum(2 * np.real(np.conj(g_l) * g) - np.abs(g_l) ** 2, axis=(0, 3))

    def rhs(self, mu) -> float:
        return self.e_over_zeta * (1.0 + 1.0 / (mu - 1.0)) - self.sigma2

    def satisfied(self, cs, xE, mu, tol=0.0):
        return self.lhs(cs, xE) >= self.rhs(mu) - tol

    def pieces(self):
        K, N1 = self.xE_l.shape[:2]
        return [BoundPiece("linear", "energy_linearization", (k, n),
                           {"e_over_zeta": self.e_over_zeta}) for k in range(K) for n in range(N1)]


def inner_eh_constraint(it: Iterate, cs, cfg) -> EnergyInner:
    return EnergyInner(it.x.xE.copy(), cfg.e_min / cfg.zeta, cfg.sigma_a2)


def true_eh_satisfied(cs, xE, mu, cfg, tol=0.0):
    """Exact mu-form energy constraint on the received energy-beam power."""
    p = mt.received_energy_power(cs, xE)
    return p >= cfg.e_min / cfg.zeta * (1.0 + 1.0 / (mu - 1.0)) - cfg.sigma_a2 - tol


# --------------------------------------------------------------------------
# energy-efficiency bounds


@dataclass
class EfficiencyMinorant:
    """A - B phi/nu - C (sqrt(t_l)/(2 mu_l) mu^2 + mu_l/(2 sqrt(t_l)) t)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    sqrt_t_l: np.ndarray  # (K,)
    mu_l: float
    active: np.ndarray
    rate: RateMinorant

    def value(self, cs, xI, mu, t, cfg, nu=None):
        if nu is None:
            nu = self.rate.nu_max(cs, xI)
        phi = mt.interference(cs, xI, cfg)
        st = self.sqrt_t_l[:, None]
        quad = st / (2 * self.mu_l) * mu ** 2 + self.mu_l / (2 * st) * np.asarray(t)[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            val = self.A - self.B * phi / nu - self.C * quad
        return np.where(self.active, val, 0.0)

    def pieces(self):
        K, N = self.A.shape
        return [BoundPiece("quadratic-over-linear", "efficiency_minorant", (k, n),
                           {"A": float(self.A[k, n]), "B": float(self.B[k, n]),
                            "C": float(self.C[k, n]), "sqrt_t_l": float(self.sqrt_t_l[k])})
                for k in range(K) for n in range(N)]


def see_minorant_phi(it: Iterate, cs, cfg) -> EfficiencyMinorant:
    if it.t is None:
        raise InvalidExpansion("energy-efficiency expansion needs t")
    rate = minorant_f1(it, cs, cfg)
    st = np.sqrt(it.t)
    A, B, C = log_rate_coefficients(rate.d, it.mu * st[:, None])
    return EfficiencyMinorant(A, B, C, rate.d, st, it.mu, rate.active, rate)


@dataclass
class EfficiencyMajorant:
    """f2_l/sqrt(t) + (N/sqrt(t beta) - s_l (3 - t/t_l)/(2 sqrt(t_l)))/(1 + s_l), t <= 3 t_l."""

    leak: LeakageMajorant
    t_l: np.ndarray  # (K,)

    @property
    def t_max(self):
        return 3.0 * self.t_l

    def value(self, cs, x, t, beta):
        L = self.leak
        N = mt.ev_numerator(cs, x.xI)
        t = np.asarray(t, float)[:, None]
        tl = self.t_l[:, None]
        return (L.f2_l / np.sqrt(t)
                + (N / np.sqrt(t * beta) - L.s_l / (2 * np.sqrt(tl)) * (3 - t / tl)) / (1 + L.s_l))

    def pieces(self):
        K = self.t_l.shape[0]
        return [BoundPiece("epigraph-cone", "efficiency_majorant", (k,),
                           {"t_l": float(self.t_l[k]), "t_max": float(3 * self.t_l[k])})
                for k in range(K)]


def see_majorant_psi(it: Iterate, cs, cfg) -> EfficiencyMajorant:
    if it.t is None:
        raise InvalidExpansion("energy-efficiency expansion needs t")
    return EfficiencyMajorant(majorant_f2(it, cs, cfg), np.asarray(it.t, float).copy())


def am_gm_upper(mu, t, mu_l, t_l):
    """Upper bound on mu*sqrt(t): sqrt(t_l)/(2 mu_l) mu^2 + mu_l/(2 sqrt(t_l)) t."""
    st = np.sqrt(t_l)
    return st / (2 * mu_l) * mu ** 2 + mu_l / (2 * st) * t


def inv_sqrt_lower(t, t_bar):
    """Tangent lower bound of 1/sqrt(t) at t_bar."""
    return (3.0 - t / t_bar) / (2.0 * np.sqrt(t_bar))


# --------------------------------------------------------------------------
# scalar inequality battery


@dataclass
class Inequality:
    """lower(args) <= upper(args) on the sampled domain, tight at tangent(args)."""

    name: str
    sample: callable  # rng, n -> dict of arrays
    lower: callable
    upper: callable
    tangent: callable  # args -> args at the expansion point


def _pos(rng, n, lo=1e-3, hi=1e3):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), n))


def _cvec(rng, n, m):
    return (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) * np.exp(
        rng.uniform(-2, 2, (n, 1)))


def _ln_ineq():
    def sample(rng, n):
        return {"x": _pos(rng, n), "t": 1 + _pos(rng, n, 1e-3, 10), "xb": _pos(rng, n),
                "tb": 1 + _pos(rng, n, 1e-3, 10)}

    def lower(p):
        xb, tb, x, t = p["xb"], p["tb"], p["x"], p["t"]
        L = np.log1p(1 / xb)
        return 2 * L / tb + 1 / (tb * (xb + 1)) - x / ((xb + 1) * xb * tb) - L / tb ** 2 * t

    return Inequality("log_ratio_tangent", sample, lower,
                      lambda p: np.log1p(1 / p["x"]) / p["t"],
                      lambda p: {**p, "x": p["xb"], "t": p["tb"]})


def _c4():
    def sample(rng, n):
        return {"x": _pos(rng, n), "t": 1 + _pos(rng, n, 1e-3, 10), "xb": _pos(rng, n),
                "tb": 1 + _pos(rng, n, 1e-3, 10)}

    def lower(p):
        a, b, c = log_rate_coefficients(p["xb"], p["tb"])
        return a - b / p["x"] - c * p["t"]

    return Inequality("log_rate_minorant", sample, lower,
                      lambda p: np.log1p(p["x"]) / p["t"],
                      lambda p: {**p, "x": p["xb"], "t": p["tb"]})


def _scalar_f1_sample(rng, n):
    """Scalar model of the UE rate: signal s = re^2 - e*w, interference phi."""
    re = _pos(rng, n, 1e-1, 1e2)
    w = _pos(rng, n, 1e-2, 1e1)
    eps = rng.uniform(0, 1, n) * re ** 2 / w * 0.9
    phi = _pos(rng, n, 1e-1, 1e3)
    re_b = re * np.exp(rng.uniform(-0.3, 0.3, n))
    w_b = w * np.exp(rng.uniform(-0.3, 0.3, n))
    # keep the expansion strictly inside the domain
    w_b = np.minimum(w_b, 0.9 * re_b ** 2 / np.maximum(eps, 1e-300))
    phi_b = phi * np.exp(rng.uniform(-0.3, 0.3, n))
    return {"re": re, "w": w, "eps": eps, "phi": phi, "mu": 1 + _pos(rng, n, 1e-2, 10),
            "re_b": re_b, "w_b": w_b, "phi_b": phi_b, "mu_b": 1 + _pos(rng, n, 1e-2, 10)}


def _c5():
    def coeffs(p):
        d = (p["re_b"] ** 2 - p["eps"] * p["w_b"]) / p["phi_b"]
        return log_rate_coefficients(d, p["mu_b"])

    def lower(p):
        a, b, c = coeffs(p)
        s = p["re"] ** 2 - p["eps"] * p["w"]
        return a - b * p["phi"] / s - c * p["mu"]

    def upper(p):
        return np.log1p((p["re"] ** 2 - p["eps"] * p["w"]) / p["phi"]) / p["mu"]

    return Inequality("rate_minorant_signal", _scalar_f1_sample, lower, upper,
                      lambda p: {**p, "re": p["re_b"], "w": p["w_b"], "phi": p["phi_b"], "mu": p["mu_b"]})


def _c62():
    def sample(rng, n):
        p = _scalar_f1_sample(rng, n)
        p["frac"] = rng.uniform(0, 1, n)
        return p

    def nu(p):
        psi = 2 * p["re_b"] * p["re"] - p["re_b"] ** 2
        return p["frac"] * (psi - p["eps"] * p["w"])

    def lower(p):
        d = (p["re_b"] ** 2 - p["eps"] * p["w_b"]) / p["phi_b"]
        a, b, c = log_rate_coefficients(d, p["mu_b"])
        v = nu(p)
        with np.errstate(divide="ignore"):
            val = a - b * p["phi"] / v - c * p["mu"]
        return np.where(v > 0, val, -np.inf)

    def upper(p):
        return np.log1p((p["re"] ** 2 - p["eps"] * p["w"]) / p["phi"]) / p["mu"]

    return Inequality("rate_minorant_nu", sample, lower, upper,
                      lambda p: {**p, "re": p["re_b"], "w": p["w_b"], "phi": p["phi_b"],
                                 "mu": p["mu_b"], "frac": np.ones_like(p["frac"])})


def _etakn2():
    """sqrt(beta) <= q-bar rewritten after division by (mu - 1); both sides differ by a
    positive factor, so lower - upper has the sign of sqrt(beta) - q-bar.

    Checked as: (sqrt(beta) + E)/(mu-1) + eps_E <= J + L/(mu-1) + (1 + 1/(mu-1)) s2
    whenever sqrt(beta) <= q-bar = (mu-1)(J - eps_E) + L - E + mu s2.
    """
    def sample(rng, n):
        J = _pos(rng, n)
        epsE = rng.uniform(0, 1, n) * J
        L = _pos(rng, n)
        E = rng.uniform(0, 1, n) * L
        s2 = _pos(rng, n, 1e-2, 1e2)
        mu = 1 + _pos(rng, n, 1e-2, 10)
        q = (mu - 1) * (J - epsE) + L - E + mu * s2
        beta = (rng.uniform(0, 1, n) * q) ** 2
        return {"J": J, "epsE": epsE, "L": L, "E": E, "s2": s2, "mu": mu, "beta": beta, "q": q}

    def lower(p):
        y = p["mu"] - 1
        return np.sqrt(p["beta"]) / y + p["E"] / y + p["epsE"]

    def upper(p):
        y = p["mu"] - 1
        return p["J"] + p["L"] / y + (1 + 1 / y) * p["s2"]

    return Inequality("eve_noise_rewrite", sample, lower, upper,
                      lambda p: {**p, "beta": p["q"] ** 2})


def _app12():
    def sample(rng, n):
        m = 4
        return {"x": _cvec(rng, n, m), "xl": _cvec(rng, n, m), "y": _pos(rng, n), "yl": _pos(rng, n)}

    def lower(p):
        re = np.sum(np.real(np.conj(p["xl"]) * p["x"]), axis=1)
        return 2 * re / p["yl"] - np.sum(np.abs(p["xl"]) ** 2, axis=1) * p["y"] / p["yl"] ** 2

    return Inequality("quad_over_linear_tangent", sample, lower,
                      lambda p: np.sum(np.abs(p["x"]) ** 2, axis=1) / p["y"],
                      lambda p: {**p, "x": p["xl"], "y": p["yl"]})


def _app1():
    def sample(rng, n):
        return {"x": _cvec(rng, n, 4), "xl": _cvec(rng, n, 4)}

    def lower(p):
        re = np.sum(np.real(np.conj(p["xl"]) * p["x"]), axis=1)
        return 2 * re - np.sum(np.abs(p["xl"]) ** 2, axis=1)

    return Inequality("norm_square_tangent", sample, lower,
                      lambda p: np.sum(np.abs(p["x"]) ** 2, axis=1),
                      lambda p: {**p, "x": p["xl"]})


def _app2():
    def sample(rng, n):
        return {"mu": 1 + _pos(rng, n, 1e-3, 1e2), "mul": 1 + _pos(rng, n, 1e-3, 1e2)}

    return Inequality("reciprocal_tangent", sample,
                      lambda p: 2 / (p["mul"] - 1) - (p["mu"] - 1) / (p["mul"] - 1) ** 2,
                      lambda p: 1 / (p["mu"] - 1),
                      lambda p: {**p, "mu": p["mul"]})


def _etakn3():
    def sample(rng, n):
        return {"beta": _pos(rng, n, 1e-4, 1e4), "mu": 1 + _pos(rng, n, 1e-3, 1e2),
                "betal": _pos(rng, n, 1e-4, 1e4), "mul": 1 + _pos(rng, n, 1e-3, 1e2)}

    def upper(p):
        c = np.sqrt(p["betal"]) * (p["mul"] - 1)
        return 0.5 * (p["beta"] / c + c / (p["mu"] - 1) ** 2)

    return Inequality("sqrt_ratio_am_gm", sample,
                      lambda p: np.sqrt(p["beta"]) / (p["mu"] - 1), upper,
                      lambda p: {**p, "beta": p["betal"], "mu": p["mul"]})


def _log_concave():
    def sample(rng, n):
        return {"t": _pos(rng, n, 1e-4, 1e4), "tp": _pos(rng, n, 1e-4, 1e4)}

    return Inequality("log_tangent_upper", sample,
                      lambda p: np.log1p(p["t"]),
                      lambda p: np.log1p(p["tp"]) + (p["t"] - p["tp"]) / (1 + p["tp"]),
                      lambda p: {**p, "t": p["tp"]})


def appendix_inequality_suite() -> list:
    """Scalar/vector inequalities behind every bound, as sampleable checks."""
    return [_ln_ineq(), _c4(), _c5(), _c62(), _etakn2(), _app12(), _app1(), _app2(), _etakn3(),
            _log_concave()]
