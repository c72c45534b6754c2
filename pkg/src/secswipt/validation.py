"""Independent checks of the bound layer and a brute-force baseline.

Targets (the true functions and the original constraints) are always
evaluated with ``metrics``; the objects under test come from ``sca``. All
checks run in whatever units the caller passes, normally the normalized
scenario (noise 1, network budget 1).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import metrics as mt
from . import sca
from .metrics import BeamformerSet, TimeSplit
from .model import NetworkConfig, generate_channels, normalize

TANGENCY_TOL = 1e-9
DOMINATION_TOL = 1e-12


@dataclass
class OracleReport:
    name: str
    samples: int
    max_violation: float
    tol: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.max_violation = float(self.max_violation)
        self.passed = bool(self.max_violation <= self.tol)

    def to_dict(self) -> dict:
        return asdict(self)


def summarize(reports) -> str:
    """JSON summary of a report list."""
    reports = list(reports)
    return json.dumps({"passed": all(r.passed for r in reports),
                       "reports": [r.to_dict() for r in reports]}, indent=2)


def merge(reports) -> list:
    """Combine same-named reports (e.g. over many expansions) into one each."""
    out = {}
    for r in reports:
        if r.name in out:
            o = out[r.name]
            out[r.name] = OracleReport(r.name, o.samples + r.samples,
                                       max(o.max_violation, r.max_violation), max(o.tol, r.tol))
        else:
            out[r.name] = r
    return list(out.values())


def _rel(a, b) -> float:
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-300)
    d = np.where(a == b, 0.0, np.abs(a - b) / scale)
    return float(np.max(d)) if d.size else 0.0


def _excess(lower, upper) -> np.ndarray:
    """Amount by which lower exceeds upper (absolute)."""
    lower = np.asarray(lower, float)
    upper = np.asarray(upper, float)
    ok = np.isfinite(upper) & ~np.isnan(lower)
    return np.where(ok, lower - upper, 0.0)


# --------------------------------------------------------------------------
# expansions


def random_expansion(cfg: NetworkConfig, rng, *, see=True, max_tries=100):
    """Random valid expansion point on a random normalized channel draw.

    Returns (Iterate, cs_n, cfg_n). Beam norms are drawn up to the per-cell
    budget and mu uniformly in (1.05, 4).
    """
    for _ in range(max_tries):
        seed = int(rng.integers(2 ** 31))
        cs, cfg_n = normalize(generate_channels(cfg, seed), cfg)
        nb = cfg.N_k + cfg.N1_k
        x = BeamformerSet.random(cfg_n, rng)
        for arr in (x.xE, x.xI):
            norms = np.linalg.norm(arr, axis=-1, keepdims=True)
            target = np.sqrt(rng.uniform(0.05, 1.0, norms.shape) * cfg_n.Pk_max / nb)
            arr *= target / norms
        mu = float(rng.uniform(1.05, 4.0))
        try:
            it = sca.make_iterate(x, mu, cs, cfg_n, see=see)
            sca.minorant_f1(it, cs, cfg_n)
        except sca.InvalidExpansion:
            continue
        if np.any(it.values["nu_raw"] <= 0):
            continue
        return it, cs, cfg_n
    raise RuntimeError("no valid random expansion found")


def _perturb(x: BeamformerSet, cfg, rng, scale=0.1) -> BeamformerSet:
    s = scale * math.sqrt(cfg.Pk_max)
    d = BeamformerSet.random(cfg, rng, s)
    return BeamformerSet(x.xE + d.xE, x.xI + d.xI)


def _beta_max(maj: sca.LeakageMajorant, cs, x, mu, cfg):
    """Largest beta allowed by the eavesdropper-noise inner approximation."""
    c = maj.q_l * (maj.mu_l - 1.0)
    return c * (2.0 * maj.q_inner(cs, x, mu, cfg) - c / (mu - 1.0) ** 2)


# --------------------------------------------------------------------------
# tangency


def tangency_suite(it: sca.Iterate, cs, cfg, tol: float = TANGENCY_TOL) -> list:
    """Every bound evaluated at its own expansion point equals its target."""
    x, mu = it.x, it.mu
    ts = TimeSplit.from_mu(mu)
    f1_true = mt.f1(cs, x.xI, cfg) / mu
    out = []

    mino = sca.minorant_f1(it, cs, cfg)
    out.append(OracleReport("tangency:rate_minorant", 1,
                            _rel(mino.value(cs, x.xI, mu, cfg), f1_true), tol))

    pw = sca.inner_power_constraints(it, cfg)
    out.append(OracleReport("tangency:power_inner", 1, _rel(pw.cell(x, mu), mt.powers(x, ts)[0]), tol))

    eh = sca.inner_eh_constraint(it, cs, cfg)
    out.append(OracleReport("tangency:energy_inner", 1,
                            _rel(eh.lhs(cs, x.xE), mt.received_energy_power(cs, x.xE)), tol))

    if it.beta is not None:
        maj = sca.majorant_f2(it, cs, cfg)
        f2_true = mt.f2(cs, x, ts, cfg)
        q = mt.ev_noise(cs, x, ts, cfg)
        out.append(OracleReport("tangency:leakage_majorant", 1,
                                _rel(maj.value(cs, x, it.beta), f2_true), tol))
        out.append(OracleReport("tangency:eve_noise_inner", 1,
                                max(_rel(maj.q_inner(cs, x, mu, cfg), q / (mu - 1.0)),
                                    _rel(maj.cone_lhs(it.beta, mu), q / (mu - 1.0))), tol))
        if it.t is not None:
            st = np.sqrt(it.t)
            den = mt.see_denominator(x, ts, cfg)
            phi = sca.see_minorant_phi(it, cs, cfg)
            psi = sca.see_majorant_psi(it, cs, cfg)
            out.append(OracleReport("tangency:efficiency_minorant", 1,
                                    _rel(phi.value(cs, x.xI, mu, it.t, cfg), f1_true / st[:, None]), tol))
            out.append(OracleReport("tangency:efficiency_majorant", 1,
                                    _rel(psi.value(cs, x, it.t, it.beta), f2_true / st[:, None]), tol))
            out.append(OracleReport("tangency:power_denominator", 1, _rel(st, den), tol))
    return out


# --------------------------------------------------------------------------
# domination


def domination_suite(it: sca.Iterate, cs, cfg, n_samples: int = 1000, rng=None,
                     tol: float = DOMINATION_TOL) -> list:
    """Sample points in each bound's validity region and count bound violations.

    Beamformers are Gaussian perturbations of scale 0.1 sqrt(Pk_max) around
    the expansion, mu is uniform on (1, 2 mu_l - 1) and each bound auxiliary is
    taken at its least favourable admissible value (largest nu, largest beta).
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(rng)
    mino = sca.minorant_f1(it, cs, cfg)
    maj = sca.majorant_f2(it, cs, cfg) if it.beta is not None else None
    phi_b = sca.see_minorant_phi(it, cs, cfg) if it.t is not None else None
    psi_b = sca.see_majorant_psi(it, cs, cfg) if (it.t is not None and maj) else None
    worst = {"rate_minorant": -np.inf, "leakage_majorant": -np.inf,
             "efficiency_minorant": -np.inf, "efficiency_majorant": -np.inf}
    counts = dict.fromkeys(worst, 0)
    mu_hi = 2.0 * it.mu - 1.0
    for _ in range(n_samples):
        x = _perturb(it.x, cfg, rng)
        mu = float(rng.uniform(1.0, mu_hi))
        if mu <= 1.0:
            continue
        ts = TimeSplit.from_mu(mu)
        nu = mino.nu_max(cs, x.xI)
        valid = nu > 0
        f1_true = mt.f1(cs, x.xI, cfg) / mu
        if np.any(valid & mino.active):
            v = _excess(mino.value(cs, x.xI, mu, cfg), f1_true)[valid & mino.active]
            worst["rate_minorant"] = max(worst["rate_minorant"], v.max())
            counts["rate_minorant"] += 1
        t = None
        if phi_b is not None:
            t = it.t * rng.uniform(0.2, 3.0, it.t.shape)
            st = np.sqrt(t)[:, None]
            sel = valid & phi_b.active
            if np.any(sel):
                v = _excess(phi_b.value(cs, x.xI, mu, t, cfg), f1_true / st)[sel]
                worst["efficiency_minorant"] = max(worst["efficiency_minorant"], v.max())
                counts["efficiency_minorant"] += 1
        if maj is not None:
            bmax = _beta_max(maj, cs, x, mu, cfg)
            ok = bmax > 0
            if not np.any(ok):
                continue
            beta = np.where(ok, bmax, 1.0)
            f2_true = mt.f2(cs, x, ts, cfg)
            v = _excess(f2_true, maj.value(cs, x, beta))[ok]
            worst["leakage_majorant"] = max(worst["leakage_majorant"], v.max())
            counts["leakage_majorant"] += 1
            if psi_b is not None:
                st = np.sqrt(t)[:, None]
                v = _excess(f2_true / st, psi_b.value(cs, x, t, beta))[ok]
                worst["efficiency_majorant"] = max(worst["efficiency_majorant"], v.max())
                counts["efficiency_majorant"] += 1
    return [OracleReport(f"domination:{k}", counts[k], max(worst[k], 0.0), tol)
            for k in worst if counts[k] > 0]


def appendix_suite(n_samples: int = 10_000, rng=None, tol: float = DOMINATION_TOL,
                   tangency_tol: float = TANGENCY_TOL) -> list:
    """Scalar inequality battery: domination on random draws, equality at the tangent."""
    rng = np.random.default_rng(rng)
    out = []
    for ineq in sca.appendix_inequality_suite():
        p = ineq.sample(rng, n_samples)
        with np.errstate(all="ignore"):
            v = _excess(ineq.lower(p), ineq.upper(p))
        out.append(OracleReport(f"inequality:{ineq.name}", n_samples, max(float(v.max()), 0.0), tol))
        pt = ineq.tangent(p)
        out.append(OracleReport(f"inequality_tangency:{ineq.name}", n_samples,
                                _rel(ineq.lower(pt), ineq.upper(pt)), tangency_tol))
    return out


# --------------------------------------------------------------------------
# inner-approximation soundness


def inner_approximation_suite(it: sca.Iterate, cs, cfg, n_samples: int = 1000, rng=None,
                              tol: float = 0.0, max_draws: int | None = None) -> list:
    """Points satisfying an inner approximation must satisfy the original constraint.

    Perturbation scales are log-uniform in [1e-4, 1] x 0.1 sqrt(Pk_max) so that
    both near-boundary and distant points are drawn; draws violating the
    approximation are discarded until n_samples accepted points per family.
    """
    rng = np.random.default_rng(rng)
    max_draws = max_draws or 200 * n_samples
    pw = sca.inner_power_constraints(it, cfg)
    eh = sca.inner_eh_constraint(it, cs, cfg)
    maj = sca.majorant_f2(it, cs, cfg) if it.beta is not None else None
    acc = {"power": 0, "energy": 0}
    worst = {"power": 0.0, "energy": 0.0}
    if maj is not None:
        acc["eve_noise"] = 0
        worst["eve_noise"] = 0.0
    draws = 0
    while min(acc.values()) < n_samples and draws < max_draws:
        draws += 1
        x = _perturb(it.x, cfg, rng, 0.1 * 10 ** rng.uniform(-4, 0))
        mu = float(rng.uniform(1.0, 2.0 * it.mu - 1.0))
        if mu <= 1.0:
            continue
        ts = TimeSplit.from_mu(mu)
        if acc["power"] < n_samples and pw.satisfied(x, mu, cfg):
            gk, g = mt.powers(x, ts, cfg)
            v = max(float(np.max(gk - cfg.Pk_max)) / cfg.Pk_max, (g - cfg.P_max) / cfg.P_max)
            worst["power"] = max(worst["power"], v)
            acc["power"] += 1
        if acc["energy"] < n_samples and np.all(eh.satisfied(cs, x.xE, mu)):
            E = mt.harvested_energy(cs, x, ts, cfg)
            worst["energy"] = max(worst["energy"], float(np.max(cfg.e_min - E)) / cfg.e_min)
            acc["energy"] += 1
        if maj is not None and acc["eve_noise"] < n_samples and mu < maj.mu_max:
            bmax = _beta_max(maj, cs, x, mu, cfg)
            if np.all(bmax > 0):
                beta = bmax * rng.uniform(0.0, 1.0, bmax.shape) ** (1 / 8)
                assert np.all(maj.inner_satisfied(cs, x, mu, beta, cfg, tol=1e-12 * np.abs(maj.q_l)))
                q = mt.ev_noise(cs, x, ts, cfg)
                v = float(np.max((np.sqrt(beta) - q) / np.maximum(np.abs(q), 1.0)))
                worst["eve_noise"] = max(worst["eve_noise"], v)
                acc["eve_noise"] += 1
    # floating-point slack for comparisons of equal quantities
    ftol = max(tol, 1e-12)
    return [OracleReport(f"inner:{k}", acc[k], max(worst[k], 0.0) if acc[k] >= n_samples else math.inf,
                         ftol) for k in acc]


# --------------------------------------------------------------------------
# brute-force baseline


@dataclass
class GridSpec:
    n_mu: int = 50
    power_levels: int = 9
    eta_lo: float = 0.02
    eta_hi: float = 0.98
    audit_tol: float = 1e-9
    max_points: int = 2_000_000


@dataclass
class GridResult:
    value: float  # best min secrecy rate, nats/s/Hz (-inf if none feasible)
    x: BeamformerSet | None
    mu: float | None
    n_points: int
    n_feasible: int

    @property
    def feasible(self) -> bool:
        return self.x is not None


def matched_directions(cs, cfg):
    """Unit vectors along the serving channels h_{k,k,n}, energy beams first."""
    K = cfg.K
    h_own = cs.h[np.arange(K), np.arange(K)]  # (K, N, M)
    u = h_own / np.linalg.norm(h_own, axis=-1, keepdims=True)
    return u[:, :cfg.N1_k], u


def grid_oracle(cs, cfg: NetworkConfig, spec: GridSpec | None = None) -> GridResult:
    """Exhaustive sweep over eta x per-beam power on matched-filter directions.

    Each beam gets a power from linspace(0, Pk_max, power_levels); the best
    min-secrecy-rate among points passing the feasibility audit is returned.
    """
    spec = spec or GridSpec()
    if cfg.K > 2 or cfg.N_k > 2 or cfg.M > 3:
        raise ValueError("grid oracle is meant for tiny instances (K, N <= 2, M <= 3)")
    uE, uI = matched_directions(cs, cfg)
    nE, nI = uE.shape[0] * uE.shape[1], uI.shape[0] * uI.shape[1]
    levels = np.linspace(0.0, cfg.Pk_max, spec.power_levels)
    n_points = spec.power_levels ** (nE + nI) * spec.n_mu
    if n_points > spec.max_points:
        raise ValueError(f"grid too large ({n_points} points)")
    etas = np.linspace(spec.eta_lo, spec.eta_hi, spec.n_mu)
    best = GridResult(-math.inf, None, None, n_points, 0)
    for combo in itertools.product(levels, repeat=nE + nI):
        amp = np.sqrt(np.asarray(combo))
        x = BeamformerSet(uE * amp[:nE].reshape(uE.shape[:2])[..., None],
                          uI * amp[nE:].reshape(uI.shape[:2])[..., None])
        for eta in etas:
            ts = TimeSplit.from_eta(float(eta))
            if np.any(mt.ev_noise(cs, x, ts, cfg) <= 0):
                continue
            if not mt.feasibility_audit(cs, x, ts, cfg, tol=spec.audit_tol).ok:
                continue
            best.n_feasible += 1
            val = float(np.min(mt.secrecy_rate(cs, x, ts, cfg)))
            if val > best.value:
                best.value, best.x, best.mu = val, x.copy(), ts.mu
    return best


# --------------------------------------------------------------------------
# bundles


def tiny_config(**changes) -> NetworkConfig:
    """Single-cell instance small enough for the grid oracle."""
    base = dict(K=1, N_k=2, N1_k=1, M=2, N_ev=1)
    base.update(changes)
    return NetworkConfig(**base)


def certify_bounds(cfg: NetworkConfig, n_expansions: int = 100, n_samples: int = 1000,
                   n_appendix: int = 10_000, seed: int = 0) -> list:
    """Tangency and domination on random expansions plus the inequality battery."""
    rng = np.random.default_rng(seed)
    reports = []
    for _ in range(n_expansions):
        it, cs, cfg_n = random_expansion(cfg, rng)
        reports += tangency_suite(it, cs, cfg_n)
        reports += domination_suite(it, cs, cfg_n, n_samples, rng)
    reports = merge(reports)
    return reports + appendix_suite(n_appendix, rng)


def feasible_expansion(cfg: NetworkConfig, seed: int):
    """Expansion at the feasible starting point of the secrecy algorithm.

    Returns (Iterate, cs_n, cfg_n) in normalized units.
    """
    from .algorithms import initialize_secrecy
    cs = generate_channels(cfg, seed)
    it = initialize_secrecy(cs, cfg)
    cs_n, cfg_n = normalize(cs, cfg)
    return it, cs_n, cfg_n


def certify_inner(cfg: NetworkConfig, seeds=range(5), n_samples: int = 1000, seed: int = 0) -> list:
    """Inner-approximation soundness around feasible points of several channel draws."""
    rng = np.random.default_rng(seed)
    reports = []
    for s in seeds:
        it, cs, cfg_n = feasible_expansion(cfg, s)
        reports += inner_approximation_suite(it, cs, cfg_n, n_samples, rng)
    return merge(reports)
