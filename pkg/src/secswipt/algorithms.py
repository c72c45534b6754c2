"""Path-following loops for the max-min secrecy rate and the max-min secrecy
energy efficiency, with their initializations.

Subproblems are built and solved in normalized units; every reported value
(trace objective, audit, returned beamformers) is recomputed by
:mod:`secswipt.metrics` in physical units at the extracted point.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import assemble as asm
from . import conic
from . import metrics as mt
from . import sca
from .metrics import BeamformerSet, TimeSplit
from .model import NetworkConfig, beam_scale, normalize

MU0_SCHEDULE = (1.11, 1.25, 1.5, 2.0, 4.0)


class InitializationError(RuntimeError):
    def __init__(self, msg, shortfall=float("nan"), attempts=()):
        super().__init__(msg)
        self.shortfall = shortfall
        self.attempts = list(attempts)


class SolverFailure(RuntimeError):
    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = trace


@dataclass
class RunOptions:
    rel_tol: float = 1e-4
    patience: int = 2  # consecutive small changes needed to stop
    max_iter: int = 100
    tol: float = conic.DEFAULT_TOL
    ascent_slack: float = 1e-8
    audit_tol: float = 1e-6
    mu0_schedule: tuple = MU0_SCHEDULE
    max_init_steps: int = 30
    max_qos_steps: int = 60
    r_min: float | None = None  # rate target of the initialization, cfg.r_min if None
    r_qos: float | None = None  # energy-efficiency QoS, cfg.r_qos if None


@dataclass
class IterRecord:
    iter: int
    true_obj: float
    sub_obj: float
    mu: float
    residuals: dict
    seconds: float


@dataclass
class RunTrace:
    mode: str  # secrecy | secrecy-noeve | see
    records: list = field(default_factory=list)
    x: BeamformerSet | None = None  # physical units
    mu: float = float("nan")
    reason: str = ""
    init_obj: float = float("nan")
    init_seconds: float = 0.0
    dims: tuple = ()
    audit: mt.AuditReport | None = None

    @property
    def iterations(self) -> int:
        return max(len(self.records) - 1, 0)

    @property
    def objective(self) -> np.ndarray:
        return np.array([r.true_obj for r in self.records])

    @property
    def final(self) -> float:
        return self.records[-1].true_obj if self.records else float("nan")

    @property
    def converged(self) -> bool:
        return self.reason == "converged"

    @property
    def ts(self) -> TimeSplit:
        return TimeSplit.from_mu(self.mu)

    def monotone(self, slack: float = 1e-8) -> bool:
        obj = self.objective
        return bool(np.all(np.diff(obj) >= -slack))

    def to_dict(self) -> dict:
        return {"mode": self.mode, "reason": self.reason, "iterations": self.iterations,
                "mu": self.mu, "eta": 1 - 1 / self.mu if self.mu > 1 else None,
                "init_obj": self.init_obj, "init_seconds": self.init_seconds,
                "final": self.final, "dims": list(self.dims),
                "audit": None if self.audit is None else
                {k: [bool(p), float(v)] for k, (p, v) in self.audit.families.items()},
                "records": [r.__dict__ for r in self.records],
                "x": None if self.x is None else self.x.to_dict()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["iter", "true_obj_nats", "true_obj_bits", "subproblem_obj", "mu",
                    "res_primal", "res_dual", "res_gap", "seconds"])
        for r in self.records:
            res = r.residuals or {}
            w.writerow([r.iter, repr(r.true_obj), repr(r.true_obj / mt.LN2), repr(r.sub_obj),
                        repr(r.mu), res.get("primal", ""), res.get("dual", ""), res.get("gap", ""),
                        f"{r.seconds:.6f}"])
        return buf.getvalue()


def problem_dimensions(cfg: NetworkConfig) -> tuple:
    """(scalar variables, linear constraints, quadratic constraints) of one
    secrecy subproblem: MK(N+N1)+1, 3KN+KN1+K+1, 4KN+2KN1+1."""
    K, N, N1, M = cfg.K, cfg.N_k, cfg.N1_k, cfg.M
    return (M * K * (N + N1) + 1, 3 * K * N + K * N1 + K + 1, 4 * K * N + 2 * K * N1 + 1)


def eh_infeasible(cs, cfg: NetworkConfig) -> np.ndarray:
    """Zone-1 UEs whose energy target is out of reach for any admissible beams.

    With every cell budget spent on energy beams, the received power is at
    most sum_kb ||h_kb||^2 Pk_max, so zeta (that + sigma^2) < e_min certifies
    infeasibility. Returns a (K, N1) boolean mask.
    """
    N1 = cfg.N1_k
    gain = np.sum(np.abs(cs.h[:, :, :N1, :]) ** 2, axis=(0, 3))
    return cfg.zeta * (gain * cfg.Pk_max + cfg.sigma_a2) < cfg.e_min


# --------------------------------------------------------------------------
# objectives in physical units


def true_objective(mode: str, cs, x: BeamformerSet, mu: float, cfg) -> float:
    ts = TimeSplit.from_mu(mu)
    if mode == "secrecy":
        return float(mt.secrecy_rate(cs, x, ts, cfg).min())
    if mode == "secrecy-noeve":
        return float(mt.worst_ue_rate(cs, x, ts, cfg).min())
    if mode == "see":
        return float(mt.see_values(cs, x, ts, cfg).min())
    raise ValueError(mode)


class _Scenario:
    def __init__(self, cs, cfg):
        self.cs, self.cfg = cs, cfg
        self.csn, self.cfgn = normalize(cs, cfg)
        self.scale = beam_scale(cfg)

    def phys(self, x: BeamformerSet) -> BeamformerSet:
        return x.scaled(self.scale)

    def norm(self, x: BeamformerSet) -> BeamformerSet:
        return x.scaled(1.0 / self.scale)


# --------------------------------------------------------------------------
# initialization


def _init_at(sc: _Scenario, mu0: float, opts: RunOptions):
    """Returns (x normalized, margin) after the fixed-mu0 initialization steps."""
    p = asm.assemble_init_program(sc.csn, sc.cfgn, mu0, r_min=opts.r_min)
    res = conic.solve(p, opts.tol)
    if not res.ok:
        return None, -math.inf, res.status
    x, r = asm.extract_init(p, res.z)
    steps = 0
    while r <= 0 and steps < opts.max_init_steps:
        p = asm.assemble_init_program(sc.csn, sc.cfgn, mu0, xE_l=x.xE, r_min=opts.r_min)
        res = conic.solve(p, opts.tol)
        if not res.ok:
            break
        x_new, r_new = asm.extract_init(p, res.z)
        x = x_new
        improved = r_new > r + 1e-9 * max(1.0, abs(r))
        r = r_new
        steps += 1
        if not improved:
            break
    return x, r, "ok"


def initialize_secrecy(cs, cfg, opts: RunOptions | None = None, *, eavesdropper=True,
                       _scenario=None) -> sca.Iterate:
    """Feasible starting point in normalized units (phase-rotated).

    Tries mu0 values in order; for each, maximizes the energy margin under
    per-beam, power and worst-case rate constraints and refines it by
    linearizing the harvested power until it is positive.
    """
    opts = opts or RunOptions()
    sc = _scenario or _Scenario(cs, cfg)
    if np.any(eh_infeasible(cs, cfg)):
        raise InitializationError("energy target unreachable for some zone-1 UE",
                                  shortfall=math.inf)
    attempts = []
    best = -math.inf
    for mu0 in opts.mu0_schedule:
        x, r, status = _init_at(sc, mu0, opts)
        attempts.append((mu0, status, r))
        best = max(best, r)
        if x is None or r <= 0:
            continue
        xp = sc.phys(x)
        if not mt.feasibility_audit(cs, xp, TimeSplit.from_mu(mu0), cfg, opts.audit_tol).ok:
            attempts[-1] = (mu0, "audit-failed", r)
            continue
        try:
            return sca.make_iterate(x, mu0, sc.csn, sc.cfgn, eavesdropper=eavesdropper)
        except sca.InvalidExpansion as exc:
            attempts[-1] = (mu0, f"invalid-expansion: {exc}", r)
    raise InitializationError("no feasible start over the mu0 schedule", shortfall=-best,
                              attempts=attempts)


# --------------------------------------------------------------------------
# main loop


def _loop(mode, sc: _Scenario, it: sca.Iterate, opts: RunOptions, trace: RunTrace, r_qos=None):
    cs, cfg = sc.cs, sc.cfg
    eve = mode != "secrecy-noeve"
    see = mode == "see"
    x_phys = sc.phys(it.x)
    obj = true_objective(mode, cs, x_phys, it.mu, cfg)
    trace.records.append(IterRecord(0, obj, float("nan"), it.mu, {}, 0.0))
    trace.x, trace.mu = x_phys, it.mu
    small = 0
    for ell in range(1, opts.max_iter + 1):
        t0 = time.perf_counter()
        try:
            if see:
                p = asm.assemble_see_subproblem(it, sc.csn, sc.cfgn, r_qos=r_qos)
            else:
                p = asm.assemble_secrecy_subproblem(it, sc.csn, sc.cfgn, eavesdropper=eve)
        except asm.AssemblyError as exc:
            trace.reason = f"assembly-error: {exc}"
            return it
        res = conic.solve(p, opts.tol)
        if not res.ok:
            trace.reason = f"solver-{res.status}"
            raise SolverFailure(f"subproblem {ell}: {res.raw_status}", trace)
        cert = conic.certify(p, res, 10 * opts.tol)
        ex = asm.extract(p, res.z)
        x_new = sca.rotate_phases(ex.x, sc.csn)
        xp = sc.phys(x_new)
        ts = TimeSplit.from_mu(ex.mu)
        audit = mt.feasibility_audit(cs, xp, ts, cfg, opts.audit_tol,
                                     r_qos=(r_qos if see else None))
        new_obj = true_objective(mode, cs, xp, ex.mu, cfg)
        if not audit.ok:
            trace.reason = f"rejected-step: audit failed ({', '.join(audit.failed())})"
            return it
        if new_obj < obj - opts.ascent_slack:
            trace.reason = f"rejected-step: objective decreased by {obj - new_obj:.3e}"
            return it
        try:
            it_new = sca.make_iterate(x_new, ex.mu, sc.csn, sc.cfgn, eavesdropper=eve, see=see,
                                      rotate=False)
        except sca.InvalidExpansion as exc:
            trace.reason = f"invalid-expansion: {exc}"
            return it
        res_info = dict(res.residuals, certified=bool(cert.passed), iterations=res.iterations)
        trace.records.append(IterRecord(ell, new_obj, res.objective, ex.mu, res_info,
                                        time.perf_counter() - t0))
        change = abs(new_obj - obj) / max(abs(obj), 1e-12)
        it, obj = it_new, new_obj
        trace.x, trace.mu = xp, ex.mu
        small = small + 1 if change <= opts.rel_tol else 0
        if small >= opts.patience:
            trace.reason = "converged"
            return it
    trace.reason = "max-iter"
    return it


def _finish(trace: RunTrace, sc: _Scenario, opts, r_qos=None):
    trace.audit = mt.feasibility_audit(sc.cs, trace.x, TimeSplit.from_mu(trace.mu), sc.cfg,
                                       opts.audit_tol, r_qos=r_qos)
    trace.dims = problem_dimensions(sc.cfg)
    return trace


def _start(sc, opts, init, eavesdropper):
    """Iterate from a given physical (x, mu) or from the initialization."""
    if init is None:
        return initialize_secrecy(sc.cs, sc.cfg, opts, eavesdropper=eavesdropper, _scenario=sc)
    x, mu = init
    return sca.make_iterate(sc.norm(x), mu, sc.csn, sc.cfgn, eavesdropper=eavesdropper)


def run_secrecy(cs, cfg, opts: RunOptions | None = None, init=None) -> RunTrace:
    """Max-min secrecy rate. ``init`` optionally gives a feasible (x, mu) in physical units."""
    return _run_rate("secrecy", cs, cfg, opts, init)


def run_secrecy_noeve(cs, cfg, opts: RunOptions | None = None, init=None) -> RunTrace:
    """Max-min worst-case user rate with the eavesdropper term dropped."""
    return _run_rate("secrecy-noeve", cs, cfg, opts, init)


def _run_rate(mode, cs, cfg, opts, init):
    opts = opts or RunOptions()
    sc = _Scenario(cs, cfg)
    t0 = time.perf_counter()
    it = _start(sc, opts, init, mode == "secrecy")
    trace = RunTrace(mode, init_seconds=time.perf_counter() - t0)
    trace.init_obj = true_objective(mode, cs, sc.phys(it.x), it.mu, cfg)
    _loop(mode, sc, it, opts, trace)
    return _finish(trace, sc, opts)


def initialize_see(cs, cfg, opts: RunOptions | None = None, init=None, _scenario=None) -> sca.Iterate:
    """Start for the energy-efficiency loop: a secrecy-feasible point pushed by
    secrecy path-following steps until every UE meets the QoS target, with t
    set to the squared power denominator."""
    opts = opts or RunOptions()
    sc = _scenario or _Scenario(cs, cfg)
    r_qos = cfg.r_qos if opts.r_qos is None else opts.r_qos
    it = _start(sc, opts, init, True)
    rate = true_objective("secrecy", cs, sc.phys(it.x), it.mu, cfg)
    steps = 0
    while rate < r_qos and steps < opts.max_qos_steps:
        tr = RunTrace("secrecy")
        sub = RunOptions(**{**opts.__dict__, "max_iter": 1})
        it = _loop("secrecy", sc, it, sub, tr)
        new_rate = tr.final
        steps += 1
        if tr.reason != "max-iter" and tr.reason != "converged" or new_rate <= rate + 1e-12:
            rate = new_rate
            break
        rate = new_rate
    if rate < r_qos:
        raise InitializationError(f"QoS target {r_qos:.4g} nats unattainable (best {rate:.4g})",
                                  shortfall=r_qos - rate)
    return sca.make_iterate(it.x, it.mu, sc.csn, sc.cfgn, see=True, rotate=False)


def run_see(cs, cfg, opts: RunOptions | None = None, init=None) -> RunTrace:
    """Max-min over cells of the secrecy energy efficiency with per-UE QoS."""
    opts = opts or RunOptions()
    sc = _Scenario(cs, cfg)
    r_qos = cfg.r_qos if opts.r_qos is None else opts.r_qos
    t0 = time.perf_counter()
    it = initialize_see(cs, cfg, opts, init, _scenario=sc)
    trace = RunTrace("see", init_seconds=time.perf_counter() - t0)
    trace.init_obj = true_objective("see", cs, sc.phys(it.x), it.mu, cfg)
    _loop("see", sc, it, opts, trace, r_qos=r_qos)
    return _finish(trace, sc, opts, r_qos=r_qos)


def see_decomposition(trace: RunTrace, cs, cfg) -> dict:
    """Per-cell numerator (sum secrecy rate), denominator (consumed power) and SEE."""
    ts = trace.ts
    num = mt.secrecy_rate(cs, trace.x, ts, cfg).sum(axis=1)
    den = mt.see_denominator(trace.x, ts, cfg)
    return {"numerator": num, "denominator": den, "see": num / den}
