"""Assembly of the convex subproblems into conic programs.

All programs expect normalized scenarios (noise power 1, network budget 1,
see :func:`secswipt.model.normalize`). Auxiliary variables carry a hat when
they are stored relative to their value at the expansion point, e.g.
nu = nu_l * nu_hat, beta = q_l^2 * beta_hat, t = t_l * t_hat; at the expansion
point every hatted variable equals 1. The time-split variable enters as
mu = 1 + (mu_l - 1) mu_hat and the reciprocal of mu - 1 as v_hat/(mu_l - 1),
which keeps mu - 1 well resolved when it is small.

Constraint family tags used for the dimension table:
  linear:    serving_real, nu_floor, beta_positive, energy_inner, cell_power,
             network_power
  quadratic: beam_cap_info, signal_bound, eve_noise_inner, objective,
             beam_cap_energy, energy_epigraph, inverse_mu
Everything else is tagged as an auxiliary lifting cone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import metrics as mt
from . import sca
from .conic import Affine, Builder, ConicProgram, complex_map, complex_rows
from .metrics import BeamformerSet

LINEAR_FAMILIES = ("serving_real", "nu_floor", "beta_positive", "energy_inner", "cell_power",
                   "network_power")
QUADRATIC_FAMILIES = ("beam_cap_info", "signal_bound", "eve_noise_inner", "objective",
                      "beam_cap_energy", "energy_epigraph", "inverse_mu")
BETA_FLOOR = 1e-12


class AssemblyError(ValueError):
    pass


@dataclass
class Layout:
    K: int
    N: int
    N1: int
    M: int
    xE0: int
    xI0: int

    def e(self, k, j):
        """First real index of xE[k, j]."""
        return self.xE0 + 2 * ((np.asarray(k) * self.N1 + np.asarray(j)) * self.M)

    def i(self, k, n):
        return self.xI0 + 2 * ((np.asarray(k) * self.N + np.asarray(n)) * self.M)

    def beam(self, base):
        return np.arange(base, base + 2 * self.M)


def _vec(base, M, scale=1.0) -> Affine:
    return Affine.var(np.arange(base, base + 2 * M), scale)


def table_counts(p: ConicProgram) -> tuple:
    """(scalar variables, linear constraints, quadratic constraints) by family tags."""
    lin = sum(p.families.get(f, 0) for f in LINEAR_FAMILIES)
    quad = sum(p.families.get(f, 0) for f in QUADRATIC_FAMILIES)
    return p.meta["complex_scalars"], lin, quad


class _Model:
    """Shared blocks of the secrecy and energy-efficiency subproblems."""

    def __init__(self, it: sca.Iterate, cs, cfg, eavesdropper: bool):
        self.it, self.cs, self.cfg, self.eve = it, cs, cfg, eavesdropper
        K, N, M = cs.K, cs.N, cs.M
        N1 = it.x.xE.shape[1]
        self.K, self.N, self.N1, self.M = K, N, N1, M
        b = self.b = Builder()
        xE = b.var("xE", 2 * K * N1 * M)
        xI = b.var("xI", 2 * K * N * M)
        self.L = Layout(K, N, N1, M, int(xE[0]), int(xI[0]))
        self.ml1 = it.mu - 1.0
        self.mu_hat = int(b.var("mu_hat", 1)[0])
        self.v = int(b.var("inv_mu1_hat", 1)[0])  # v / (mu_l - 1) >= 1/(mu - 1)

    def mu_aff(self, coef=1.0, const=0.0) -> Affine:
        """coef * mu + const."""
        return Affine.row([self.mu_hat], [coef * self.ml1], coef + const)

    # ---- beams, power and energy --------------------------------------

    def caps(self):
        b, L, cfg = self.b, self.L, self.cfg
        r = math.sqrt(cfg.Pk_max)
        for k in range(self.K):
            for j in range(self.N1):
                b.soc(Affine.vstack([Affine.constant(r), _vec(L.e(k, j), self.M)]), "beam_cap_energy")
            for n in range(self.N):
                b.soc(Affine.vstack([Affine.constant(r), _vec(L.i(k, n), self.M)]), "beam_cap_info")

    def power(self):
        """Inner approximation of the per-cell and network budgets.

        Returns the per-cell power expression (Affine, K rows)."""
        b, L, it, cfg = self.b, self.L, self.it, self.cfg
        K, N1, M = self.K, self.N1, self.M
        self.eE = b.var("energy_power", K * N1)
        self.pI = b.var("info_power_over_mu", K)
        for k in range(K):
            for j in range(N1):
                b.rsoc(Affine.var(self.eE[k * N1 + j]), Affine.constant(0.5),
                       _vec(L.e(k, j), M), "energy_epigraph")
            b.rsoc(Affine.var(self.pI[k]), self.mu_aff(0.5),
                   Affine.vstack([_vec(L.i(k, n), M) for n in range(self.N)]), "info_power")
        mu_l = it.mu
        xEl = it.x.xE
        pl = np.sum(np.abs(xEl) ** 2, axis=(1, 2))
        rows = []
        for k in range(K):
            e = (Affine.row(np.r_[self.eE[k * N1:(k + 1) * N1], self.pI[k]], np.ones(N1 + 1))
                 + self.mu_aff(pl[k] / mu_l ** 2))
            lin = complex_rows(np.zeros(N1, int), L.e(k, np.arange(N1)), xEl[k], "re", 1,
                               -2.0 / mu_l)
            rows.append(e + lin)
        g = Affine.vstack(rows)
        b.nonneg((g * -1.0).plus_const(cfg.Pk_max), "cell_power")
        tot = Affine(1, np.zeros(g.rows.size, int), g.cols, g.vals, np.array([g.const.sum()]))
        b.nonneg((tot * -1.0).plus_const(cfg.P_max), "network_power")
        self.gbar = g
        return g

    def reciprocal(self):
        b = self.b
        b.rsoc(Affine.var(self.v), Affine.var(self.mu_hat, 0.5), Affine.constant(1.0), "inverse_mu")

    def energy(self):
        """Linearized harvested energy, rows scaled by zeta (mu_l - 1)/(e_min mu_l)
        so that the threshold side equals 1 at the expansion point."""
        b, L, it, cs, cfg = self.b, self.L, self.it, self.cs, self.cfg
        K, N1 = self.K, self.N1
        w = self.ml1 / it.mu
        s = w * cfg.zeta / cfg.e_min
        rows = []
        for k in range(K):
            for n1 in range(N1):
                h = cs.h[:, k, n1, :]  # (Kb, M)
                g_l = np.einsum("bm,bjm->bj", h.conj(), it.x.xE)  # (Kb, J)
                kb, j = np.meshgrid(np.arange(K), np.arange(N1), indexing="ij")
                a = g_l[..., None] * h[:, None, :]  # (Kb, J, M)
                expr = complex_rows(np.zeros(K * N1, int), L.e(kb.ravel(), j.ravel()),
                                    a.reshape(-1, self.M), "re", 1, 2.0 * s)
                const = s * (cfg.sigma_a2 - np.sum(np.abs(g_l) ** 2)) - w
                expr = expr + Affine.row([self.v], [-w / self.ml1], const)
                rows.append(expr)
        b.nonneg(Affine.vstack(rows), "energy_inner")

    # ---- user rate ------------------------------------------------------

    def rate(self):
        """Rate minorant auxiliaries. Returns (minorant, s_hat indices)."""
        b, L, it, cs, cfg = self.b, self.L, self.it, self.cs, self.cfg
        K, N, M = self.K, self.N, self.M
        mino = sca.minorant_f1(it, cs, cfg)
        self.mino = mino
        h_own = cs.h[np.arange(K), np.arange(K)]
        eps_own = sca.serving_eps(cs)
        # serving inner products stay in the right half plane
        rows = [complex_rows([0], L.i(k, n), h_own[k, n][None], "re", 1,
                             1.0 / max(np.linalg.norm(h_own[k, n]) * math.sqrt(cfg.Pk_max), 1e-300))
                for k in range(K) for n in range(N)]
        b.nonneg(Affine.vstack(rows), "serving_real")

        self.s_hat = b.var("phi_over_nu", K * N)
        self.nu_hat = b.var("nu_hat", K * N)
        self.sig_eps = b.var("signal_eps", K * N)
        floor = sca.NU_FLOOR * cfg.sigma_a2
        floors = []
        all_kb, all_nb = np.meshgrid(np.arange(K), np.arange(N), indexing="ij")
        all_kb, all_nb = all_kb.ravel(), all_nb.ravel()
        for k in range(K):
            for n in range(N):
                u = k * N + n
                if not mino.active[k, n]:
                    b.nonneg(Affine.var(self.nu_hat[u]), "nu_floor")
                    b.eq(Affine.var(self.s_hat[u]))
                    b.eq(Affine.var(self.sig_eps[u]))
                    continue
                nul, phil, rel = mino.nu_l[k, n], mino.phi_l[k, n], mino.re_l[k, n]
                # phi/nu epigraph: s_hat * nu_hat >= phi / phi_l
                others = ~((all_kb == k) & (all_nb == n))
                kb, nb = all_kb[others], all_nb[others]
                hk = cs.h[kb, k, n, :]  # (T, M)
                bases = L.i(kb, nb)
                T = kb.size
                sc = 1.0 / math.sqrt(phil)
                interf = complex_rows(np.arange(T), bases, hk, "re", T, sc)
                interf_im = complex_rows(np.arange(T), bases, hk, "im", T, sc)
                epsw = np.sqrt(cs.eps_ue[kb, k, n]) * sc
                eps_rows = Affine.var((bases[:, None] + np.arange(2 * M)).ravel(),
                                      np.repeat(epsw, 2 * M))
                w = Affine.vstack([interf, interf_im, eps_rows,
                                   Affine.constant(math.sqrt(cfg.sigma_a2) * sc)])
                b.rsoc(Affine.var(self.s_hat[u]), Affine.var(self.nu_hat[u], 0.5), w, "objective")
                # nu_l nu_hat <= psi - eps ||x||^2, scaled by 1/nu_l
                b.rsoc(Affine.var(self.sig_eps[u]), Affine.constant(0.5),
                       _vec(L.i(k, n), M, math.sqrt(eps_own[k, n] / nul)), "signal_bound")
                psi = complex_rows([0], L.i(k, n), h_own[k, n][None], "re", 1, 2 * rel / nul)
                psi = psi.plus_const(-rel ** 2 / nul)
                link = psi + Affine.row([self.nu_hat[u], self.sig_eps[u]], [-1.0, -1.0])
                b.nonneg(link, "signal_link")
                floors.append(Affine.var(self.nu_hat[u]).plus_const(-floor / nul))
        if floors:
            b.nonneg(Affine.vstack(floors), "nu_floor")
        return mino

    def rate_expr(self, k, n, coeffs=None) -> Affine:
        """a - (b/d) s_hat - c mu for UE (k, n) (zero where inactive)."""
        mino = self.mino
        if not mino.active[k, n]:
            return Affine.constant(0.0)
        a, bb, c = coeffs if coeffs is not None else (mino.a, mino.b, mino.c)
        d = mino.d[k, n]
        u = k * self.N + n
        return Affine.row([self.s_hat[u]], [-bb[k, n] / d], a[k, n]) + self.mu_aff(-c[k, n])

    # ---- eavesdropper ---------------------------------------------------

    def leakage_vec(self, k, n, scale) -> Affine:
        """Rows whose squared norm is ||Hev_kk^H x_kn||^2 + eps_kk ||x_kn||^2 (times scale^2)."""
        cs, L, M = self.cs, self.L, self.M
        H = cs.Hev[k, k]
        return Affine.vstack([complex_map(L.i(k, n), H, scale),
                              _vec(L.i(k, n), M, scale * math.sqrt(cs.eps_ev[k, k]))])

    def eavesdropper(self):
        b, L, it, cs, cfg = self.b, self.L, self.it, self.cs, self.cfg
        K, N, N1, M = self.K, self.N, self.N1, self.M
        maj = sca.majorant_f2(it, cs, cfg)
        self.maj = maj
        mu_l = it.mu
        ml1 = mu_l - 1.0
        # w_hat = (mu_l - 1)^2 w >= v_hat^2, pi_hat = (mu_l - 1) pi >= ||x||^2 / mu_hat
        self.w = int(b.var("inv_mu1_sq_hat", 1)[0])
        b.rsoc(Affine.var(self.w), Affine.constant(0.5), Affine.var(self.v), "inverse_mu_sq")
        self.pi = b.var("info_power_over_mu1_hat", K * N)
        for k in range(K):
            for n in range(N):
                b.rsoc(Affine.var(self.pi[k * N + n]), Affine.var(self.mu_hat, 0.5),
                       _vec(L.i(k, n), M), "info_power_mu1")
        b.nonneg(Affine.row([self.mu_hat], [-1.0], 2.0 - sca.TRUST_MARGIN / ml1), "trust_region")

        self.beta_hat = b.var("beta_hat", K * N)
        self.rho = b.var("sqrt_beta_hat", K * N)
        self.z_hat = b.var("leak_over_sqrt_beta", K * N)
        b.nonneg(Affine.var(self.beta_hat).plus_const(-BETA_FLOOR), "beta_positive")

        GE_l = sca.ev_proj(cs.Hev, it.x.xE)  # (Kb, K, J, V)
        GI_l = sca.ev_proj(cs.Hev, it.x.xI)  # (Kb, K, Nb, V)
        noise = cfg.N_ev * cfg.sigma_a2
        kbE, jE = np.meshgrid(np.arange(K), np.arange(N1), indexing="ij")
        kbE, jE = kbE.ravel(), jE.ravel()
        kbI, nbI = np.meshgrid(np.arange(K), np.arange(N), indexing="ij")
        kbI, nbI = kbI.ravel(), nbI.ravel()
        for k in range(K):
            # jamming linearization, common to all UEs of cell k
            aE = np.einsum("bmv,bjv->bjm", cs.Hev[:, k], GE_l[:, k])  # (Kb, J, M)
            jam = complex_rows(np.zeros(K * N1, int), L.e(kbE, jE), aE.reshape(-1, M), "re", 1, 2.0)
            jam_c = -np.sum(np.abs(GE_l[:, k]) ** 2)
            eps_e = Affine.row(self.eE, -np.repeat(cs.eps_ev[:, k], N1))
            aI = np.einsum("bmv,bnv->bnm", cs.Hev[:, k], GI_l[:, k])  # (Kb, Nb, M)
            sqI = np.sum(np.abs(GI_l[:, k]) ** 2, axis=-1)  # (Kb, Nb)
            for n in range(N):
                u = k * N + n
                q_l = maj.q_l[k, n]
                sc = ml1 / q_l
                others = ~((kbI == k) & (nbI == n))
                cross = complex_rows(np.zeros(others.sum(), int), L.i(kbI[others], nbI[others]),
                                     aI.reshape(-1, M)[others], "re", 1, 2.0 / ml1)
                sq_o = sqI.ravel()[others].sum()
                pis = Affine.row(self.pi[others], -cs.eps_ev[kbI[others], k] / ml1)
                mu_part = self.mu_aff(-sq_o / ml1 ** 2 - noise / ml1 ** 2,
                                      sq_o / ml1 ** 2 + noise * (1 + 2 / ml1 + 1 / ml1 ** 2))
                qin = (jam + eps_e + pis + cross + mu_part).plus_const(jam_c)
                lhs = Affine.row([self.beta_hat[u], self.w], [0.5, 0.5])
                b.nonneg(qin * sc - lhs, "eve_noise_inner")
                # sqrt(beta) epigraph pieces
                b.rsoc(Affine.var(self.beta_hat[u]), Affine.constant(0.5),
                       Affine.var(self.rho[u]), "sqrt_beta")
                b.rsoc(Affine.var(self.z_hat[u]), Affine.var(self.rho[u], 0.5),
                       self.leakage_vec(k, n, 1.0 / math.sqrt(q_l)), "leakage_ratio")
        return maj

    def leak_expr(self, k, n) -> Affine:
        """f2_l + (z_hat - s_l)/(1 + s_l)."""
        maj = self.maj
        s = maj.s_l[k, n]
        return Affine.row([self.z_hat[k * self.N + n]], [1.0 / (1 + s)],
                          maj.f2_l[k, n] - s / (1 + s))

    def finish(self, kind, extra=None) -> ConicProgram:
        K, N, N1, M = self.K, self.N, self.N1, self.M
        meta = {"kind": kind, "K": K, "N": N, "N1": N1, "M": M, "mu_l": self.it.mu,
                "complex_scalars": M * K * (N + N1) + 1, "eavesdropper": self.eve}
        meta.update(extra or {})
        return self.b.build(meta)


def assemble_secrecy_subproblem(it: sca.Iterate, cs, cfg, eavesdropper: bool = True) -> ConicProgram:
    """Max-min of the secrecy-rate minorant over the convexified feasible set."""
    try:
        m = _Model(it, cs, cfg, eavesdropper)
        m.caps()
        m.power()
        m.reciprocal()
        m.energy()
        m.rate()
        if eavesdropper:
            m.eavesdropper()
    except sca.InvalidExpansion as exc:
        raise AssemblyError(str(exc)) from exc
    b = m.b
    r = int(b.var("r", 1)[0])
    rows = []
    for k in range(m.K):
        for n in range(m.N):
            e = m.rate_expr(k, n)
            if eavesdropper:
                e = e - m.leak_expr(k, n)
            rows.append(e + Affine.row([r], [-1.0]))
    b.nonneg(Affine.vstack(rows), "objective_link")
    b.maximize(r)
    return m.finish("secrecy" if eavesdropper else "secrecy-noeve")


def assemble_see_subproblem(it: sca.Iterate, cs, cfg, r_qos: float | None = None) -> ConicProgram:
    """Max-min over cells of the energy-efficiency minorant with per-UE QoS."""
    if it.t is None:
        raise AssemblyError("energy-efficiency expansion needs t")
    r_qos = cfg.r_qos if r_qos is None else r_qos
    try:
        m = _Model(it, cs, cfg, True)
        m.caps()
        g = m.power()
        m.reciprocal()
        m.energy()
        m.rate()
        m.eavesdropper()
        phi = sca.see_minorant_phi(it, cs, cfg)
        psi = sca.see_majorant_psi(it, cs, cfg)
    except sca.InvalidExpansion as exc:
        raise AssemblyError(str(exc)) from exc
    b, K, N = m.b, m.K, m.N
    mu_l = it.mu
    t_l = np.asarray(it.t, float)
    st = np.sqrt(t_l)
    t_hat = b.var("t_hat", K)
    omega = b.var("sqrt_t_hat", K)
    y_inv = b.var("inv_sqrt_t_hat", K)
    m_hat = int(b.var("mu_sq_hat", 1)[0])
    kappa = b.var("sqrt_t_beta_hat", K * N)
    z2 = b.var("leak_over_sqrt_t_beta", K * N)
    b.nonneg(Affine.var(t_hat).plus_const(-BETA_FLOOR), "t_positive")
    b.nonneg(Affine.var(t_hat, -1.0).plus_const(3.0 - sca.TRUST_MARGIN), "t_trust_region")
    b.rsoc(Affine.var(m_hat), Affine.constant(0.5), m.mu_aff(1.0 / mu_l), "mu_square")
    for k in range(K):
        b.rsoc(Affine.var(t_hat[k]), Affine.constant(0.5), Affine.var(omega[k]), "sqrt_t")
        b.rsoc(Affine.var(y_inv[k]), Affine.var(omega[k], 0.5), Affine.constant(1.0), "inv_sqrt_t")
        # (1/xi) g_k + M P_A + P_c <= sqrt(t_l) * omega_k, scaled by 1/sqrt(t_l)
        gk = Affine(1, np.zeros(int((g.rows == k).sum()), int), g.cols[g.rows == k],
                    g.vals[g.rows == k], g.const[k:k + 1])
        den = (gk * (1.0 / cfg.xi)).plus_const(cfg.M * cfg.P_A + cfg.P_c) * (1.0 / st[k])
        b.nonneg(Affine.row([omega[k]], [1.0]) - den, "power_denominator")
        for n in range(N):
            u = k * N + n
            b.rsoc(Affine.var(t_hat[k]), Affine.var(m.beta_hat[u], 0.5), Affine.var(kappa[u]),
                   "sqrt_t_beta")
            b.rsoc(Affine.var(z2[u]), Affine.var(kappa[u], 0.5),
                   m.leakage_vec(k, n, 1.0 / math.sqrt(m.maj.q_l[k, n])), "leakage_ratio_t")
    r = int(b.var("r", 1)[0])
    rows = []
    for k in range(K):
        cell = Affine.row([r], [-1.0])
        for n in range(N):
            u = k * N + n
            if phi.active[k, n]:
                D = phi.D[k, n]
                C = phi.C[k, n]
                cell = cell + Affine.row([m.s_hat[u], m_hat, t_hat[k]],
                                         [-phi.B[k, n] / D, -C * st[k] * mu_l / 2,
                                          -C * mu_l * st[k] / 2], phi.A[k, n])
            s = psi.leak.s_l[k, n]
            f2 = psi.leak.f2_l[k, n]
            cell = cell - Affine.row([y_inv[k], z2[u], t_hat[k]],
                                     [f2 / st[k], 1.0 / ((1 + s) * st[k]),
                                      s / (2 * st[k] * (1 + s))],
                                     -3 * s / (2 * st[k] * (1 + s)))
        rows.append(cell)
    b.nonneg(Affine.vstack(rows), "objective_link")
    # QoS through the secrecy-rate pieces
    qos = [m.rate_expr(k, n) - m.leak_expr(k, n) + Affine.constant(-r_qos)
           for k in range(K) for n in range(N)]
    b.nonneg(Affine.vstack(qos), "qos")
    b.maximize(r)
    return m.finish("see", {"r_qos": r_qos})


# --------------------------------------------------------------------------
# expansion point and extraction


def _interleave(a) -> np.ndarray:
    return np.stack([a.real, a.imag], axis=-1).ravel()


def expansion_point(p: ConicProgram, it: sca.Iterate, cs, cfg) -> np.ndarray:
    """The expansion point lifted into the program's variable space."""
    z = np.zeros(p.n)
    x = it.x
    mu = it.mu
    z[p.var("xE")] = _interleave(x.xE)
    z[p.var("xI")] = _interleave(x.xI)
    z[p.var("mu_hat")] = 1.0
    z[p.var("inv_mu1_hat")] = 1.0
    z[p.var("energy_power")] = np.sum(np.abs(x.xE) ** 2, axis=-1).ravel()
    z[p.var("info_power_over_mu")] = np.sum(np.abs(x.xI) ** 2, axis=(1, 2)) / mu
    mino = sca.minorant_f1(it, cs, cfg)
    eps_own = sca.serving_eps(cs)
    pw = np.sum(np.abs(x.xI) ** 2, axis=-1)
    z[p.var("phi_over_nu")] = np.where(mino.active, 1.0, 0.0).ravel()
    z[p.var("nu_hat")] = np.where(mino.active, 1.0, 0.0).ravel()
    z[p.var("signal_eps")] = np.where(mino.active, eps_own * pw / mino.nu_l, 0.0).ravel()
    obj = np.where(mino.active, mino.a - mino.b / np.where(mino.active, mino.d, 1.0) - mino.c * mu, 0.0)
    if "beta_hat" in p.names:
        maj = sca.majorant_f2(it, cs, cfg)
        z[p.var("inv_mu1_sq_hat")] = 1.0
        z[p.var("info_power_over_mu1_hat")] = pw.ravel()
        z[p.var("beta_hat")] = 1.0
        z[p.var("sqrt_beta_hat")] = 1.0
        z[p.var("leak_over_sqrt_beta")] = maj.s_l.ravel()
        obj = obj - maj.f2_l
    if p.meta["kind"] == "see":
        K = cs.K
        z[p.var("t_hat")] = 1.0
        z[p.var("sqrt_t_hat")] = 1.0
        z[p.var("inv_sqrt_t_hat")] = 1.0
        z[p.var("mu_sq_hat")] = 1.0
        z[p.var("sqrt_t_beta_hat")] = 1.0
        z[p.var("leak_over_sqrt_t_beta")] = sca.majorant_f2(it, cs, cfg).s_l.ravel()
        cell = obj.sum(axis=1) / np.sqrt(it.t)
        z[p.var("r")] = cell.min()
    else:
        z[p.var("r")] = obj.min()
    return p.complete(z)


@dataclass
class Extracted:
    x: BeamformerSet
    mu: float
    r: float
    aux: dict


def extract(p: ConicProgram, z) -> Extracted:
    K, N, N1, M = (p.meta[k] for k in ("K", "N", "N1", "M"))

    def cplx(name, shape):
        v = p.value(z, name).reshape(*shape, 2)
        return v[..., 0] + 1j * v[..., 1]

    x = BeamformerSet(cplx("xE", (K, N1, M)), cplx("xI", (K, N, M)))
    aux = {name: p.value(z, name).copy() for name in p.names
           if not name.startswith("_") and name not in ("xE", "xI", "r")}
    mu = 1.0 + (p.meta["mu_l"] - 1.0) * float(p.value(z, "mu_hat")[0])
    return Extracted(x, mu, float(p.value(z, "r")[0]), aux)


# --------------------------------------------------------------------------
# initialization programs


def assemble_init_program(cs, cfg, mu0: float, xE_l=None, r_min: float | None = None) -> ConicProgram:
    """Initialization at fixed mu0.

    Without ``xE_l``: maximize the smallest margin Re{h^H xE} - sqrt(e/(zeta eta0)).
    With ``xE_l``: maximize the smallest linearized energy slack. In both
    cases beams obey the caps and the fixed-mu0 power budgets, and every UE
    meets a worst-case SINR target corresponding to rate r_min through a
    second-order cone.
    """
    r_min = cfg.r_min if r_min is None else r_min
    K, N, M = cs.K, cs.N, cs.M
    N1 = cfg.N1_k
    b = Builder()
    xE = b.var("xE", 2 * K * N1 * M)
    xI = b.var("xI", 2 * K * N * M)
    L = Layout(K, N, N1, M, int(xE[0]), int(xI[0]))
    r = int(b.var("r", 1)[0])
    rp = math.sqrt(cfg.Pk_max)
    for k in range(K):
        for j in range(N1):
            b.soc(Affine.vstack([Affine.constant(rp), _vec(L.e(k, j), M)]), "beam_cap_energy")
        for n in range(N):
            b.soc(Affine.vstack([Affine.constant(rp), _vec(L.i(k, n), M)]), "beam_cap_info")
    eta0 = 1.0 - 1.0 / mu0
    cell_vecs = []
    for k in range(K):
        v = Affine.vstack([_vec(L.e(k, j), M, math.sqrt(eta0)) for j in range(N1)]
                          + [_vec(L.i(k, n), M, math.sqrt(1 / mu0)) for n in range(N)])
        cell_vecs.append(v)
        b.soc(Affine.vstack([Affine.constant(rp), v]), "cell_power")
    b.soc(Affine.vstack([Affine.constant(math.sqrt(cfg.P_max))] + cell_vecs), "network_power")
    # worst-case SINR >= exp(r_min mu0) - 1
    theta = math.expm1(r_min * mu0)
    st = math.sqrt(theta)
    h_own = cs.h[np.arange(K), np.arange(K)]
    eps_own = sca.serving_eps(cs)
    kk, nn = np.meshgrid(np.arange(K), np.arange(N), indexing="ij")
    kk, nn = kk.ravel(), nn.ravel()
    for k in range(K):
        for n in range(N):
            others = ~((kk == k) & (nn == n))
            kb, nb = kk[others], nn[others]
            T = kb.size
            hk = cs.h[kb, k, n, :]
            bases = L.i(kb, nb)
            sc = 1.0 / (np.linalg.norm(h_own[k, n]) * rp)
            head = complex_rows([0], L.i(k, n), h_own[k, n][None], "re", 1, sc)
            w = Affine.vstack([
                complex_rows(np.arange(T), bases, hk, "re", T, st * sc),
                complex_rows(np.arange(T), bases, hk, "im", T, st * sc),
                Affine.var((bases[:, None] + np.arange(2 * M)).ravel(),
                           np.repeat(np.sqrt(cs.eps_ue[kb, k, n]) * st * sc, 2 * M)),
                _vec(L.i(k, n), M, math.sqrt(eps_own[k, n]) * sc),
                Affine.constant(st * math.sqrt(cfg.sigma_a2) * sc),
            ])
            b.soc(Affine.vstack([head, w]), "rate_target")
    target = cfg.e_min / cfg.zeta * mu0 / (mu0 - 1)
    rows = []
    for k in range(K):
        for n1 in range(N1):
            if xE_l is None:
                h = h_own[k, n1]
                sc = 1.0 / math.sqrt(target)
                e = complex_rows([0], L.e(k, n1), h[None], "re", 1, sc).plus_const(-1.0)
            else:
                h = cs.h[:, k, n1, :]
                g_l = np.einsum("bm,bjm->bj", h.conj(), xE_l)
                kb, j = np.meshgrid(np.arange(K), np.arange(N1), indexing="ij")
                a = g_l[..., None] * h[:, None, :]
                sc = 1.0 / target
                e = complex_rows(np.zeros(K * N1, int), L.e(kb.ravel(), j.ravel()),
                                 a.reshape(-1, M), "re", 1, 2 * sc)
                e = e.plus_const(sc * (cfg.sigma_a2 - np.sum(np.abs(g_l) ** 2)) - 1.0)
            rows.append(e + Affine.row([r], [-1.0]))
    b.nonneg(Affine.vstack(rows), "energy_margin")
    b.maximize(r)
    return b.build({"kind": "init", "K": K, "N": N, "N1": N1, "M": M, "mu0": mu0,
                    "complex_scalars": M * K * (N + N1) + 1, "linearized": xE_l is not None})


def extract_init(p: ConicProgram, z) -> tuple:
    K, N, N1, M = (p.meta[k] for k in ("K", "N", "N1", "M"))

    def cplx(name, shape):
        v = p.value(z, name).reshape(*shape, 2)
        return v[..., 0] + 1j * v[..., 1]

    return BeamformerSet(cplx("xE", (K, N1, M)), cplx("xI", (K, N, M))), float(p.value(z, "r")[0])
