import math

import numpy as np
import pytest

from secswipt import algorithms as al
from secswipt import metrics as mt
from secswipt import validation as val
from secswipt.model import ChannelSet, NetworkConfig, generate_channels


def test_report_invariant():
    assert val.OracleReport("a", 1, 0.5, 1.0).passed
    assert not val.OracleReport("a", 1, 2.0, 1.0).passed
    assert val.OracleReport("a", 1, 1.0, 1.0).passed


def test_merge_and_summary():
    import json
    rs = val.merge([val.OracleReport("a", 2, 0.1, 1.0), val.OracleReport("a", 3, 0.2, 1.0),
                    val.OracleReport("b", 1, 5.0, 1.0)])
    assert [(r.name, r.samples, r.max_violation) for r in rs] == [("a", 5, 0.2), ("b", 1, 5.0)]
    assert json.loads(val.summarize(rs))["passed"] is False


def test_domination_rejects_zero_samples():
    it, cs, cfg = val.random_expansion(NetworkConfig(K=2, N_k=2, N1_k=1, M=3), np.random.default_rng(0))
    with pytest.raises(ValueError):
        val.domination_suite(it, cs, cfg, 0)


def test_inner_suite_small():
    for r in val.certify_inner(NetworkConfig(K=2, N_k=2, N1_k=1, M=3), seeds=[0], n_samples=200):
        assert r.passed and r.samples == 200, r


def _closed_form_instance(gain=1e-2):
    cfg = NetworkConfig(K=1, N_k=1, N1_k=1, M=1, N_ev=1, eps0=0.0, eps1=0.0)
    h = np.full((1, 1, 1, 1), math.sqrt(gain), complex)
    cs = ChannelSet(h=h, Hev=np.zeros((1, 1, 1, 1), complex), eps_ue=np.zeros((1, 1, 1)),
                    eps_ev=np.zeros((1, 1)))
    return cs, cfg


def test_grid_closed_form():
    cs, cfg = _closed_form_instance()
    res = val.grid_oracle(cs, cfg, val.GridSpec(n_mu=50, power_levels=9))
    assert res.feasible
    eta = 1 - 1 / res.mu
    P = float(np.sum(np.abs(res.x.xI) ** 2))
    expected = (1 - eta) * math.log1p(P * abs(cs.h[0, 0, 0, 0]) ** 2 / cfg.sigma_a2)
    assert res.value == pytest.approx(expected, rel=1e-12)


def test_grid_zero_point_infeasible():
    cs, cfg = _closed_form_instance()
    zero = mt.BeamformerSet.zeros(cfg)
    for eta in np.linspace(0.02, 0.98, 5):
        assert cfg.e_min > cfg.zeta * eta * cfg.sigma_a2
        assert not mt.feasibility_audit(cs, zero, eta, cfg).ok


def test_grid_deterministic_and_dominated_by_run():
    cfg = val.tiny_config()
    cs = generate_channels(cfg, 0)
    spec = val.GridSpec(n_mu=10, power_levels=5)
    a = val.grid_oracle(cs, cfg, spec)
    b = val.grid_oracle(cs, cfg, spec)
    assert a.value == b.value and a.mu == b.mu
    tr = al.run_secrecy(cs, cfg, init=(a.x, a.mu))
    assert tr.final >= a.value - 1e-6


def test_grid_rejects_large_instances():
    with pytest.raises(ValueError):
        val.grid_oracle(None, NetworkConfig())
