import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from secswipt import metrics as mt
from secswipt.metrics import BeamformerSet, TimeSplit
from secswipt.model import ChannelSet, NetworkConfig, generate_channels, normalize


def _instance(seed, **cfg_changes):
    cfg = NetworkConfig(K=2, N_k=2, N1_k=1, M=3, **cfg_changes)
    cs, cfg_n = normalize(generate_channels(cfg, seed), cfg)
    x = BeamformerSet.random(cfg_n, np.random.default_rng(seed), 0.2)
    return cs, cfg_n, x


def _loop_rates(cs, x, eta, cfg):
    """Term-by-term evaluation of worst-case UE rate and eavesdropper SINR."""
    K, N = x.xI.shape[:2]
    N1 = x.xE.shape[1]
    ue = np.zeros((K, N))
    ev = np.zeros((K, N))
    for k in range(K):
        for n in range(N):
            h = cs.h[k, k, n]
            xi = x.xI[k, n]
            sig = abs(np.vdot(h, xi)) ** 2 - cs.eps_ue[k, k, n] * np.vdot(xi, xi).real
            phi = cfg.sigma_a2
            for kb in range(K):
                for nb in range(N):
                    if (kb, nb) == (k, n):
                        continue
                    xo = x.xI[kb, nb]
                    phi += abs(np.vdot(cs.h[kb, k, n], xo)) ** 2 + cs.eps_ue[kb, k, n] * np.vdot(xo, xo).real
            ue[k, n] = (1 - eta) * math.log1p(max(sig, 0.0) / phi)
            num = np.linalg.norm(cs.Hev[k, k].conj().T @ xi) ** 2 + cs.eps_ev[k, k] * np.vdot(xi, xi).real
            q = cfg.N_ev * cfg.sigma_a2 / (1 - eta)
            for kb in range(K):
                for j in range(N1):
                    xe = x.xE[kb, j]
                    q += eta / (1 - eta) * (np.linalg.norm(cs.Hev[kb, k].conj().T @ xe) ** 2
                                            - cs.eps_ev[kb, k] * np.vdot(xe, xe).real)
                for nb in range(N):
                    if (kb, nb) == (k, n):
                        continue
                    xo = x.xI[kb, nb]
                    q += (np.linalg.norm(cs.Hev[kb, k].conj().T @ xo) ** 2
                          - cs.eps_ev[kb, k] * np.vdot(xo, xo).real)
            ev[k, n] = num / q
    return ue, ev


@given(seed=st.integers(0, 10_000), eta=st.floats(0.05, 0.95))
def test_rates_match_loop_evaluation(seed, eta):
    cs, cfg, x = _instance(seed)
    ts = TimeSplit.from_eta(eta)
    ue, ev = _loop_rates(cs, x, eta, cfg)
    np.testing.assert_allclose(mt.worst_ue_rate(cs, x, ts, cfg), ue, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(mt.worst_ev_sinr(cs, x, ts, cfg), ev, rtol=1e-10)
    np.testing.assert_allclose(mt.secrecy_rate(cs, x, ts, cfg), ue - np.log1p(ev), rtol=1e-9, atol=1e-12)


@given(seed=st.integers(0, 10_000), eta=st.floats(0.01, 0.99))
def test_mu_form_consistency(seed, eta):
    cs, cfg, x = _instance(seed)
    ts = TimeSplit.from_eta(eta)
    np.testing.assert_allclose(mt.f2_mu(cs, x, ts.mu, cfg), mt.f2(cs, x, ts, cfg), rtol=1e-10)
    gk, _ = mt.powers(x, ts)
    np.testing.assert_allclose(mt.powers_mu(x, ts.mu), gk, rtol=1e-12)


@given(seed=st.integers(0, 10_000), eta=st.floats(0.01, 0.99))
def test_secrecy_below_user_rate(seed, eta):
    cs, cfg, x = _instance(seed)
    ts = TimeSplit.from_eta(eta)
    assert np.all(mt.secrecy_rate(cs, x, ts, cfg) <= mt.worst_ue_rate(cs, x, ts, cfg) + 1e-15)


@given(seed=st.integers(0, 10_000), c=st.floats(1.0, 5.0))
def test_scaling_does_not_reduce_signal(seed, c):
    cs, cfg, x = _instance(seed)
    a = mt.worst_signal(cs, x.xI)
    b = mt.worst_signal(cs, x.xI * c)
    assert np.all(np.maximum(b, 0) >= np.maximum(a, 0) - 1e-12)


def test_timesplit():
    ts = TimeSplit.from_eta(0.2)
    assert ts.mu == pytest.approx(1.25)
    assert TimeSplit.from_mu(4.0).eta == pytest.approx(0.75)
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            TimeSplit.from_eta(bad)


def _single(h, hev=None, eps=0.0, cfg=None):
    cfg = cfg or NetworkConfig(K=1, N_k=1, N1_k=1, M=len(h), N_ev=1, sigma_a2=1.0)
    h = np.asarray(h, complex).reshape(1, 1, 1, -1)
    Hev = np.zeros((1, 1, h.shape[-1], 1), complex) if hev is None else np.asarray(hev, complex).reshape(1, 1, -1, 1)
    return ChannelSet(h=h, Hev=Hev, eps_ue=np.full((1, 1, 1), eps), eps_ev=np.zeros((1, 1))), cfg


def test_harvested_energy_examples():
    cs, cfg = _single([1.0, 1.0])
    cfg = cfg.replace(zeta=0.5, sigma_a2=1.0)
    ts = TimeSplit.from_eta(0.5)
    zero = BeamformerSet.zeros(cfg)
    np.testing.assert_allclose(mt.harvested_energy(cs, zero, ts, cfg), 0.5 * 0.5 * 1.0)
    # single term |h^H x|^2 = 2 with noise removed from the comparison
    x = BeamformerSet(np.array([[[1.0, 0.0]]], complex) * math.sqrt(2), np.zeros((1, 1, 2), complex))
    e = mt.harvested_energy(cs, x, ts, cfg) - 0.5 * 0.5 * cfg.sigma_a2
    np.testing.assert_allclose(e, 0.5)
    x2 = x.scaled(2.0)
    e2 = mt.harvested_energy(cs, x2, ts, cfg) - 0.5 * 0.5 * cfg.sigma_a2
    np.testing.assert_allclose(e2, 4 * e)


def test_user_rate_examples():
    cs, cfg = _single([1.0])
    ts = TimeSplit.from_eta(0.3)
    x = BeamformerSet(np.zeros((1, 1, 1), complex), np.ones((1, 1, 1), complex))
    np.testing.assert_allclose(mt.worst_ue_rate(cs, x, ts, cfg), 0.7 * math.log(2))
    assert np.all(mt.worst_ue_rate(cs, BeamformerSet.zeros(cfg), ts, cfg) == 0)
    cs2, _ = _single([1.0], eps=2.0)
    assert np.all(mt.worst_ue_rate(cs2, x, ts, cfg) == 0)


def test_ev_examples():
    cs, cfg = _single([1.0, 0.0])
    ts = TimeSplit.from_eta(0.4)
    x = BeamformerSet(np.zeros((1, 1, 2), complex), np.array([[[1.0, 0.5]]], complex))
    assert np.all(mt.worst_ev_sinr(cs, x, ts, cfg) == 0)
    np.testing.assert_allclose(mt.secrecy_rate(cs, x, ts, cfg), mt.worst_ue_rate(cs, x, ts, cfg))
    cs, cfg = _single([1.0, 0.0], hev=[1.0, 1.0])
    np.testing.assert_allclose(mt.worst_ev_sinr(cs, x, ts, cfg),
                               abs(1.5) ** 2 / (cfg.N_ev * cfg.sigma_a2 / 0.6))
    assert np.all(mt.secrecy_rate(cs, BeamformerSet.zeros(cfg), ts, cfg) == 0)


def test_ev_sinr_decreases_with_eta():
    cs, cfg, x = _instance(5, eps0=0.0)
    vals = [mt.worst_ev_sinr(cs, x, TimeSplit.from_eta(e), cfg) for e in (0.2, 0.4, 0.6)]
    assert np.all(vals[1] < vals[0]) and np.all(vals[2] < vals[1])


def test_nonpositive_denominator():
    cfg = NetworkConfig(K=1, N_k=2, N1_k=1, M=2, N_ev=1, sigma_a2=1e-9)
    cs = ChannelSet(h=np.ones((1, 1, 2, 2), complex), Hev=np.ones((1, 1, 2, 1), complex) * 1e-3,
                    eps_ue=np.zeros((1, 1, 2)), eps_ev=np.full((1, 1), 10.0))
    x = BeamformerSet(np.ones((1, 1, 2), complex), np.ones((1, 2, 2), complex))
    with pytest.raises(mt.NonpositiveDenominatorError):
        mt.worst_ev_sinr(cs, x, TimeSplit.from_eta(0.5), cfg)


def test_powers_examples(rng):
    cfg = NetworkConfig(K=2, N_k=2, N1_k=1, M=3)
    x = BeamformerSet.random(cfg, rng)
    ts = TimeSplit.from_eta(0.5)
    gk, g = mt.powers(x, ts)
    assert g == pytest.approx(gk.sum(), rel=0, abs=0)
    pe = np.sum(np.abs(x.xE) ** 2, axis=(1, 2))
    pi = np.sum(np.abs(x.xI) ** 2, axis=(1, 2))
    np.testing.assert_allclose(gk, 0.5 * pe + 0.5 * pi)
    assert mt.powers(BeamformerSet.zeros(cfg), ts)[1] == 0


def test_see_examples(rng):
    cfg = NetworkConfig(K=2, N_k=2, N1_k=1, M=5)
    cs, cfg_n = normalize(generate_channels(cfg, 0), cfg)
    ts = TimeSplit.from_eta(0.3)
    assert np.all(mt.see_values(cs, BeamformerSet.zeros(cfg_n), ts, cfg_n) == 0)
    # xi = 0.2, g_k = 0.2 W, M = 5, P_A = 0.6, P_c = 2.5 -> 6.5 W
    x = BeamformerSet(np.zeros((2, 1, 5), complex), np.zeros((2, 2, 5), complex))
    x.xI[:, 0, 0] = math.sqrt(0.2 / 0.7)
    np.testing.assert_allclose(mt.see_denominator(x, ts, cfg), 6.5)
    x = BeamformerSet.random(cfg_n, rng, 0.1)
    see = mt.see_values(cs, x, ts, cfg_n)
    np.testing.assert_allclose(see * mt.see_denominator(x, ts, cfg_n),
                               mt.secrecy_rate(cs, x, ts, cfg_n).sum(axis=1), rtol=1e-12)


def test_audit_examples(paper_cfg, paper_channels):
    zero = BeamformerSet.zeros(paper_cfg)
    rep = mt.feasibility_audit(paper_channels, zero, 0.5, paper_cfg)
    assert "energy_harvest" in rep.failed()
    x = BeamformerSet.zeros(paper_cfg)
    x.xI[0, 0, 0] = math.sqrt(paper_cfg.Pk_max + 2e-6 * paper_cfg.Pk_max)
    rep = mt.feasibility_audit(paper_channels, x, 0.5, paper_cfg)
    assert "beam_caps" in rep.failed()
    assert not mt.feasibility_audit(paper_channels, x, 1.0, paper_cfg).ok
    with pytest.raises(ValueError):
        mt.feasibility_audit(paper_channels, x, 0.5, paper_cfg, tol=0)


def test_metric_report_json(paper_cfg, paper_channels, rng):
    import json
    x = BeamformerSet.random(paper_cfg, rng, 0.05)
    ts = TimeSplit.from_eta(0.4)
    rep = mt.metric_report(paper_channels, x, ts, paper_cfg)
    doc = json.loads(rep.to_json())
    expected = float(mt.secrecy_rate(paper_channels, x, ts, paper_cfg).min())
    assert doc["min_secrecy_nats"] == pytest.approx(expected, rel=1e-12)
