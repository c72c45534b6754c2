"""Canonical second-order cone programs.

Standard form::

    maximize    c^T z
    subject to  A z = b
                z[cone.slice] in cone      for every cone

Cones act on disjoint slices of z:

  nonneg   z >= 0 elementwise
  soc      z0 >= ||z[1:]||
  rsoc     2 z0 z1 >= ||z[2:]||^2,  z0, z1 >= 0

The builder introduces one fresh slack block per cone and ties it to the
model variables with equalities, so cone membership is always over plain
variable slices. Complex model quantities are stored as interleaved
(re, im) pairs.
"""
from __future__ import annotations

import json
import math
import time
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 200

CONE_KINDS = ("nonneg", "soc", "rsoc")


# --------------------------------------------------------------------------
# affine expressions


@dataclass
class Affine:
    """nrows affine rows  G z + g  stored as COO triplets."""

    nrows: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    const: np.ndarray

    @staticmethod
    def zeros(nrows: int) -> "Affine":
        e = np.zeros(0, int)
        return Affine(nrows, e, e, np.zeros(0), np.zeros(nrows))

    @staticmethod
    def constant(values) -> "Affine":
        v = np.atleast_1d(np.asarray(values, float))
        out = Affine.zeros(v.size)
        out.const = v.copy()
        return out

    @staticmethod
    def var(idx, coef=1.0) -> "Affine":
        """One row per index: coef * z[idx]."""
        idx = np.atleast_1d(np.asarray(idx, int))
        coef = np.broadcast_to(np.asarray(coef, float), idx.shape)
        return Affine(idx.size, np.arange(idx.size), idx.copy(), coef.copy(), np.zeros(idx.size))

    @staticmethod
    def row(idx, coef, const=0.0) -> "Affine":
        """A single row sum_i coef_i z[idx_i] + const."""
        idx = np.atleast_1d(np.asarray(idx, int))
        coef = np.broadcast_to(np.asarray(coef, float), idx.shape)
        return Affine(1, np.zeros(idx.size, int), idx.copy(), coef.copy(), np.array([float(const)]))

    def __add__(self, other: "Affine") -> "Affine":
        if other.nrows != self.nrows:
            raise ValueError("row count mismatch")
        return Affine(self.nrows, np.concatenate([self.rows, other.rows]),
                      np.concatenate([self.cols, other.cols]),
                      np.concatenate([self.vals, other.vals]), self.const + other.const)

    def __sub__(self, other: "Affine") -> "Affine":
        return self + other * -1.0

    def __mul__(self, s: float) -> "Affine":
        return Affine(self.nrows, self.rows, self.cols, self.vals * s, self.const * s)

    __rmul__ = __mul__

    def plus_const(self, c) -> "Affine":
        return Affine(self.nrows, self.rows, self.cols, self.vals, self.const + c)

    def scale_rows(self, s) -> "Affine":
        s = np.broadcast_to(np.asarray(s, float), (self.nrows,))
        return Affine(self.nrows, self.rows, self.cols, self.vals * s[self.rows], self.const * s)

    @staticmethod
    def vstack(parts) -> "Affine":
        parts = list(parts)
        offs = np.cumsum([0] + [p.nrows for p in parts])
        return Affine(int(offs[-1]), np.concatenate([p.rows + o for p, o in zip(parts, offs)]),
                      np.concatenate([p.cols for p in parts]),
                      np.concatenate([p.vals for p in parts]),
                      np.concatenate([p.const for p in parts]))

    def to_csr(self, n: int) -> sp.csr_matrix:
        return sp.csr_matrix((self.vals, (self.rows, self.cols)), shape=(self.nrows, n))

    def evaluate(self, z) -> np.ndarray:
        out = self.const.copy()
        np.add.at(out, self.rows, self.vals * np.asarray(z)[self.cols])
        return out


def complex_rows(row, base, a, part: str, nrows: int, scale=1.0) -> Affine:
    """Rows of Re{a_t^H x_t} (part='re') or Im{...} (part='im').

    ``base[t]`` is the first real index of the interleaved vector x_t; term t
    is added to row ``row[t]``.
    """
    a = np.atleast_2d(a)
    T, M = a.shape
    row = np.broadcast_to(np.asarray(row, int), (T,))
    base = np.broadcast_to(np.asarray(base, int), (T,))
    scale = np.broadcast_to(np.asarray(scale, float), (T,))
    m2 = 2 * np.arange(M)
    c_re = (base[:, None] + m2).ravel()
    c_im = c_re + 1
    r = np.repeat(row, M)
    s = np.repeat(scale, M)
    if part == "re":
        v_re, v_im = a.real.ravel(), a.imag.ravel()
    elif part == "im":
        v_re, v_im = -a.imag.ravel(), a.real.ravel()
    else:
        raise ValueError(part)
    return Affine(nrows, np.concatenate([r, r]), np.concatenate([c_re, c_im]),
                  np.concatenate([v_re * s, v_im * s]), np.zeros(nrows))


def complex_map(base: int, G, scale=1.0) -> Affine:
    """2P rows (re, im interleaved) of y = G^H x for one interleaved vector x (G is M x P)."""
    G = np.atleast_2d(G)
    M, P = G.shape
    re = complex_rows(2 * np.arange(P), base, G.T, "re", 2 * P, scale)
    im = complex_rows(2 * np.arange(P) + 1, base, G.T, "im", 2 * P, scale)
    return re + im


# --------------------------------------------------------------------------
# program


@dataclass
class Cone:
    kind: str
    start: int
    size: int
    tag: str = ""

    @property
    def slice(self):
        return slice(self.start, self.start + self.size)


@dataclass
class ConicProgram:
    n: int
    c: np.ndarray
    A: sp.csr_matrix
    b: np.ndarray
    cones: list
    names: dict  # name -> (start, stop)
    families: Counter = field(default_factory=Counter)
    slack_of: tuple | None = None  # (slack indices, Affine) to complete primal points
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        covered = np.zeros(self.n, bool)
        for cone in self.cones:
            if cone.kind not in CONE_KINDS:
                raise ValueError(f"unknown cone kind {cone.kind}")
            if cone.start < 0 or cone.start + cone.size > self.n:
                raise ValueError("cone slice out of range")
            if covered[cone.slice].any():
                raise ValueError("cone slices overlap")
            covered[cone.slice] = True

    def var(self, name) -> np.ndarray:
        a, b = self.names[name]
        return np.arange(a, b)

    def value(self, z, name) -> np.ndarray:
        a, b = self.names[name]
        return np.asarray(z)[a:b]

    def complete(self, z_model) -> np.ndarray:
        """Fill the cone slack entries of a model point."""
        z = np.array(z_model, float)
        if self.slack_of is not None:
            idx, aff = self.slack_of
            z[idx] = 0.0
            z[idx] = aff.evaluate(z)
        return z

    def objective(self, z) -> float:
        return float(self.c @ z)

    def to_json(self) -> str:
        A = self.A.tocoo()
        return json.dumps({
            "sense": "maximize",
            "n": self.n,
            "objective": self.c.tolist(),
            "A": {"shape": list(A.shape), "rows": A.row.tolist(), "cols": A.col.tolist(),
                  "vals": A.data.tolist()},
            "b": self.b.tolist(),
            "cones": [{"kind": c.kind, "start": c.start, "size": c.size, "tag": c.tag}
                      for c in self.cones],
            "names": {k: list(v) for k, v in self.names.items()},
        })

    @classmethod
    def from_json(cls, text: str) -> "ConicProgram":
        d = json.loads(text)
        A = sp.csr_matrix((d["A"]["vals"], (d["A"]["rows"], d["A"]["cols"])),
                          shape=tuple(d["A"]["shape"]))
        return cls(d["n"], np.asarray(d["objective"], float), A, np.asarray(d["b"], float),
                   [Cone(c["kind"], c["start"], c["size"], c.get("tag", "")) for c in d["cones"]],
                   {k: tuple(v) for k, v in d["names"].items()})


class Builder:
    """Incremental construction of a :class:`ConicProgram`."""

    def __init__(self):
        self.n = 0
        self.names = {}
        self._eq = []
        self._cones = []
        self._slack_idx = []
        self._slack_aff = []
        self._obj = {}
        self.families = Counter()

    def var(self, name: str, size: int) -> np.ndarray:
        if name in self.names:
            raise ValueError(f"duplicate variable {name}")
        idx = np.arange(self.n, self.n + size)
        self.names[name] = (self.n, self.n + size)
        self.n += size
        return idx

    def eq(self, expr: Affine, tag: str = "") -> None:
        """expr == 0."""
        self._eq.append(expr)
        if tag:
            self.families[tag] += expr.nrows

    def cone(self, kind: str, expr: Affine, tag: str = "", count: int | None = None) -> np.ndarray:
        """Constrain the rows of expr to a cone via a fresh slack block."""
        if kind not in CONE_KINDS:
            raise ValueError(kind)
        m = expr.nrows
        if kind == "soc" and m < 1 or kind == "rsoc" and m < 2:
            raise ValueError("cone too small")
        s = self.var(f"_slack{len(self._cones)}", m)
        self._slack_idx.append(s)
        self._slack_aff.append(expr)
        self._cones.append(Cone(kind, int(s[0]), m, tag))
        if tag:
            self.families[tag] += (m if kind == "nonneg" else 1) if count is None else count
        return s

    def nonneg(self, expr: Affine, tag: str = "") -> np.ndarray:
        return self.cone("nonneg", expr, tag)

    def soc(self, expr: Affine, tag: str = "") -> np.ndarray:
        return self.cone("soc", expr, tag)

    def rsoc(self, u: Affine, v: Affine, w: Affine, tag: str = "") -> np.ndarray:
        """2 u v >= ||w||^2 with u, v scalars."""
        return self.cone("rsoc", Affine.vstack([u, v, w]), tag)

    def maximize(self, idx, coef=1.0) -> None:
        idx = np.atleast_1d(idx)
        for i, c in zip(idx, np.broadcast_to(coef, idx.shape)):
            self._obj[int(i)] = self._obj.get(int(i), 0.0) + float(c)

    def build(self, meta=None) -> ConicProgram:
        n = self.n
        c = np.zeros(n)
        for i, v in self._obj.items():
            c[i] = v
        blocks, rhs = [], []
        for e in self._eq:
            blocks.append(e.to_csr(n))
            rhs.append(-e.const)
        slack_idx = np.concatenate(self._slack_idx) if self._slack_idx else np.zeros(0, int)
        if self._slack_aff:
            aff = Affine.vstack(self._slack_aff)
            # s - (G z + g) = 0
            S = sp.csr_matrix((np.ones(slack_idx.size), (np.arange(slack_idx.size), slack_idx)),
                              shape=(slack_idx.size, n))
            blocks.append(S - aff.to_csr(n))
            rhs.append(aff.const)
            slack_of = (slack_idx, aff)
        else:
            slack_of = None
        A = sp.vstack(blocks, format="csr") if blocks else sp.csr_matrix((0, n))
        b = np.concatenate(rhs) if rhs else np.zeros(0)
        return ConicProgram(n, c, A, b, list(self._cones), dict(self.names),
                            Counter(self.families), slack_of, dict(meta or {}))


# --------------------------------------------------------------------------
# cone geometry


_R = 1.0 / math.sqrt(2.0)


def rsoc_to_soc(z) -> np.ndarray:
    """(u, v, w) with 2uv >= ||w||^2  ->  ((u+v)/sqrt2, (u-v)/sqrt2, w) in the SOC."""
    z = np.asarray(z, float)
    out = z.copy()
    out[0] = _R * (z[0] + z[1])
    out[1] = _R * (z[0] - z[1])
    return out


def cone_violation(kind: str, z) -> float:
    """Absolute distance-like violation of cone membership (0 if inside)."""
    z = np.asarray(z, float)
    if kind == "nonneg":
        return float(max(0.0, -z.min())) if z.size else 0.0
    if kind == "rsoc":
        z = rsoc_to_soc(z)
    return float(max(0.0, np.linalg.norm(z[1:]) - z[0]))


# --------------------------------------------------------------------------
# solving


@dataclass
class SolveResult:
    status: str  # optimal | infeasible | unbounded | numeric-failure
    z: np.ndarray | None
    y: np.ndarray | None
    objective: float
    residuals: dict
    iterations: int
    seconds: float
    raw_status: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


def _rsoc_transform(cones) -> sp.csr_matrix:
    """Block-diagonal map sending each rotated-cone block (u, v, w) to its
    second-order-cone image; identity elsewhere. Symmetric and involutive."""
    rows, cols, vals = [], [], []
    off = 0
    for cone in cones:
        m = cone.size
        if cone.kind == "rsoc":
            rows += [off, off, off + 1, off + 1]
            cols += [off, off + 1, off, off + 1]
            vals += [_R, _R, _R, -_R]
            rest = np.arange(off + 2, off + m)
        else:
            rest = np.arange(off, off + m)
        rows += rest.tolist()
        cols += rest.tolist()
        vals += [1.0] * rest.size
        off += m
    return sp.csr_matrix((vals, (rows, cols)), shape=(off, off))


def _clarabel_data(p: ConicProgram):
    """Clarabel form  A x + s = b, s in K  of the program.

    When every cone slice is a builder slack s = G z + g over model
    variables only, the slacks are eliminated and the cone rows become
    -G z + s = g. Returns (A, b, cones, q, lift) where lift maps a Clarabel
    primal/dual pair back to (z, y) of the full program.
    """
    import clarabel

    n = p.n
    neq = p.A.shape[0]
    reduced = False
    if p.slack_of is not None:
        sidx, aff = p.slack_of
        ns = sidx.size
        expected = np.concatenate([np.arange(c.start, c.start + c.size) for c in p.cones]) \
            if p.cones else np.zeros(0, int)
        is_slack = np.zeros(n, bool)
        is_slack[sidx] = True
        G = aff.to_csr(n)
        Aeq = p.A[: neq - ns]
        reduced = (ns == expected.size and np.array_equal(sidx, expected)
                   and not G[:, is_slack].nnz and not Aeq[:, is_slack].nnz
                   and not np.any(p.c[is_slack]))
    if reduced:
        cols = np.flatnonzero(~is_slack)
        Aeq = Aeq[:, cols]
        beq = p.b[: neq - ns]
        G = G[:, cols]
        g = aff.const
    else:
        cols = np.arange(n)
        Aeq = p.A
        beq = p.b
        idx = np.concatenate([np.arange(c.start, c.start + c.size) for c in p.cones]) \
            if p.cones else np.zeros(0, int)
        G = sp.csr_matrix((np.ones(idx.size), (np.arange(idx.size), idx)), shape=(idx.size, n))
        g = np.zeros(idx.size)
    T = _rsoc_transform(p.cones)
    A = sp.vstack([Aeq, -(T @ G)], format="csc")
    b = np.concatenate([beq, T @ g])
    cones = []
    if Aeq.shape[0]:
        cones.append(clarabel.ZeroConeT(Aeq.shape[0]))
    pending = 0
    for cone in p.cones:
        if cone.kind == "nonneg":
            pending += cone.size
            continue
        if pending:
            cones.append(clarabel.NonnegativeConeT(pending))
            pending = 0
        cones.append(clarabel.SecondOrderConeT(cone.size))
    if pending:
        cones.append(clarabel.NonnegativeConeT(pending))
    m_eq = Aeq.shape[0]

    def lift(x, zdual):
        z = np.zeros(n)
        z[cols] = x
        y = np.asarray(zdual, float)
        if reduced:
            return p.complete(z), np.concatenate([y[:m_eq], T.T @ y[m_eq:]])
        return z, y[:m_eq]

    return A, b, cones, -p.c[cols], lift


# Settings tried in order until a result passes the independent residual
# audit at ACCEPT_FACTOR * tol; deterministic for identical inputs.
RETRY_SETTINGS = (
    {},
    {"equilibrate_enable": False},
    {"equilibrate_max_iter": 50, "iterative_refinement_reltol": 1e-14,
     "iterative_refinement_max_iter": 50},
    {"equilibrate_enable": False, "iterative_refinement_reltol": 1e-15,
     "iterative_refinement_max_iter": 100, "max_step_fraction": 0.95},
)
ACCEPT_FACTOR = 10.0


def _clarabel_solve(A, b, cones, q, tol, max_iter, extra):
    import clarabel

    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.max_iter = max_iter
    settings.tol_feas = tol
    settings.tol_gap_abs = tol
    settings.tol_gap_rel = tol
    settings.tol_infeas_abs = tol
    settings.tol_infeas_rel = tol
    settings.presolve_enable = False
    for k, v in extra.items():
        setattr(settings, k, v)
    nv = A.shape[1]
    return clarabel.DefaultSolver(sp.csc_matrix((nv, nv)), q, A, b, cones, settings).solve()


def solve(p: ConicProgram, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> SolveResult:
    """Interior-point solve (Clarabel) followed by an independent residual audit."""
    t0 = time.perf_counter()
    if p.n == 0:
        return SolveResult("optimal", np.zeros(0), np.zeros(p.A.shape[0]), 0.0,
                           {"primal": 0.0, "cone": 0.0, "dual": 0.0, "gap": 0.0}, 0, 0.0, "trivial")
    A, b, cones, q, lift = _clarabel_data(p)
    iters = 0
    best = None
    for extra in RETRY_SETTINGS:
        sol = _clarabel_solve(A, b, cones, q, tol, max_iter, extra)
        iters += int(sol.iterations)
        raw = str(sol.status)
        if raw in ("PrimalInfeasible", "DualInfeasible"):
            status = "infeasible" if raw == "PrimalInfeasible" else "unbounded"
            return SolveResult(status, None, None, float("nan"), {}, iters,
                               time.perf_counter() - t0, raw)
        if raw not in ("Solved", "AlmostSolved"):
            continue
        z, y = lift(np.asarray(sol.x, float), sol.z)
        res = residuals(p, z, y)
        worst = max(res.values())
        if best is None or worst < best[0]:
            best = (worst, z, y, res, raw)
        if worst <= ACCEPT_FACTOR * tol:
            break
    if best is None or best[0] > ACCEPT_FACTOR * tol:
        return SolveResult("numeric-failure", None, None, float("nan"),
                           {} if best is None else best[3], iters, time.perf_counter() - t0,
                           raw if best is None else best[4])
    _, z, y, res, raw = best
    return SolveResult("optimal", z, y, float(p.c @ z), res, iters, time.perf_counter() - t0, raw)


def residuals(p: ConicProgram, z, y) -> dict:
    """Relative KKT residuals computed from scratch.

    primal  ||Az - b||_inf / (1 + ||b||_inf + ||Az||_inf)
    cone    worst cone violation of z relative to 1 + ||z_slice||_inf
    dual    multiplier lambda = A^T y - c must vanish off the cone slices and
            lie in the (self-dual) cones on them
    gap     |b^T y - c^T z| / (1 + |c^T z| + |b^T y|)
    """
    z = np.asarray(z, float)
    y = np.asarray(y, float)
    Az = p.A @ z
    primal = float(np.max(np.abs(Az - p.b), initial=0.0)
                   / (1.0 + np.max(np.abs(p.b), initial=0.0) + np.max(np.abs(Az), initial=0.0)))
    lam = p.A.T @ y - p.c
    on_cone = np.zeros(p.n, bool)
    cone_v = 0.0
    dual_cone = 0.0
    lam_scale = 1.0 + np.max(np.abs(p.c), initial=0.0) + np.max(np.abs(lam), initial=0.0)
    for cone in p.cones:
        sl = cone.slice
        on_cone[sl] = True
        zs = z[sl]
        cone_v = max(cone_v, cone_violation(cone.kind, zs) / (1.0 + np.max(np.abs(zs))))
        dual_cone = max(dual_cone, cone_violation(cone.kind, lam[sl]) / lam_scale)
    free = np.max(np.abs(lam[~on_cone]), initial=0.0) / lam_scale
    pobj = float(p.c @ z)
    dobj = float(p.b @ y)
    gap = abs(dobj - pobj) / (1.0 + abs(pobj) + abs(dobj))
    return {"primal": primal, "cone": cone_v, "dual": float(max(free, dual_cone)), "gap": gap}


@dataclass
class Certificate:
    passed: bool
    residuals: dict
    tol: float

    def __str__(self):
        parts = ", ".join(f"{k}={v:.2e}" for k, v in self.residuals.items())
        return f"{'pass' if self.passed else 'FAIL'} (tol {self.tol:.1e}: {parts})"


def certify(p: ConicProgram, res: SolveResult, tol: float = 10 * DEFAULT_TOL) -> Certificate:
    """Re-audit a solver result: primal feasibility, cone membership, dual
    feasibility and duality gap, all recomputed from the program data."""
    if res.status != "optimal" or res.z is None:
        return Certificate(False, {"status": float("nan")}, tol)
    r = residuals(p, res.z, res.y)
    return Certificate(all(v <= tol for v in r.values()), r, tol)


def primal_violation(p: ConicProgram, z) -> dict:
    """Absolute primal residuals (used for the self-feasibility oracle)."""
    z = np.asarray(z, float)
    eq = float(np.max(np.abs(p.A @ z - p.b), initial=0.0))
    cone = max((cone_violation(c.kind, z[c.slice]) for c in p.cones), default=0.0)
    return {"equality": eq, "cone": cone}


# --------------------------------------------------------------------------
# analytic test programs

# The default tolerance bounds relative residuals; matching closed forms to
# 1e-8 in absolute terms needs a tighter stop.
ANALYTIC_TOL = 1e-10


@dataclass
class AnalyticCase:
    name: str
    program: ConicProgram
    objective: float  # optimal value (maximization)
    solution: dict  # variable name -> optimal value
    status: str = "optimal"


def analytic_test_set() -> list:
    """Small programs with closed-form optima, used to check the solve path.

    box_projection   max -t, t >= ||z - c||^2, 0 <= z <= 1, c = (1.5, -0.3, 2.4):
                     z* = clip(c, 0, 1) = (1, 0, 1), t* = 2.3
    ball_projection  max -t, t >= ||z - c||^2, ||z|| <= 1, c = (3, 4):
                     z* = c/||c||, t* = (||c|| - 1)^2 = 16
    rotated_cone     max -z, z * 1 >= w^2, w = 2: z* = 4
    lp_vertex        max z1 + z2, z1 + 2 z2 <= 4, 3 z1 + z2 <= 6, z >= 0: z* = (1.6, 1.2)
    linear_on_ball   max (1, 2, 2).z, ||z|| <= 1: z* = (1, 2, 2)/3, value 3
    infeasible       z >= 1 and z <= 0
    """
    cases = []

    def projection(name, c, constrain):
        b = Builder()
        z = b.var("z", len(c))
        t = b.var("t", 1)
        b.rsoc(Affine.var(t), Affine.constant(0.5), Affine.var(z) - Affine.constant(c))
        constrain(b, z)
        b.maximize(t, -1.0)
        return b.build()

    c = np.array([1.5, -0.3, 2.4])
    star = np.clip(c, 0.0, 1.0)

    def box(b, z):
        b.nonneg(Affine.var(z))
        b.nonneg(Affine.constant(np.ones(3)) - Affine.var(z))

    cases.append(AnalyticCase("box_projection", projection("box", c, box),
                              -float(np.sum((star - c) ** 2)), {"z": star}))

    c = np.array([3.0, 4.0])

    def ball(b, z):
        b.soc(Affine.vstack([Affine.constant(1.0), Affine.var(z)]))

    cases.append(AnalyticCase("ball_projection", projection("ball", c, ball),
                              -(np.linalg.norm(c) - 1.0) ** 2, {"z": c / np.linalg.norm(c)}))

    b = Builder()
    z = b.var("z", 1)
    w = b.var("w", 1)
    b.rsoc(Affine.var(z), Affine.constant(0.5), Affine.var(w))
    b.eq(Affine.var(w).plus_const(-2.0))
    b.maximize(z, -1.0)
    cases.append(AnalyticCase("rotated_cone", b.build(), -4.0, {"z": np.array([4.0]),
                                                                "w": np.array([2.0])}))

    b = Builder()
    z = b.var("z", 2)
    b.nonneg(Affine.var(z))
    b.nonneg(Affine.vstack([Affine.row(z, [-1.0, -2.0], 4.0), Affine.row(z, [-3.0, -1.0], 6.0)]))
    b.maximize(z, 1.0)
    cases.append(AnalyticCase("lp_vertex", b.build(), 2.8, {"z": np.array([1.6, 1.2])}))

    b = Builder()
    z = b.var("z", 3)
    b.soc(Affine.vstack([Affine.constant(1.0), Affine.var(z)]))
    b.maximize(z, [1.0, 2.0, 2.0])
    cases.append(AnalyticCase("linear_on_ball", b.build(), 3.0,
                              {"z": np.array([1.0, 2.0, 2.0]) / 3.0}))

    b = Builder()
    z = b.var("z", 1)
    b.nonneg(Affine.var(z).plus_const(-1.0))
    b.nonneg(Affine.var(z, -1.0))
    b.maximize(z, 1.0)
    cases.append(AnalyticCase("infeasible", b.build(), float("nan"), {}, status="infeasible"))
    return cases
