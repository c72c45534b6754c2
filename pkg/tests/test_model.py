import math

import numpy as np
import pytest

from secswipt import model
from secswipt.model import ConfigError, NetworkConfig, generate_channels, normalize


def test_dbm_conversions():
    assert model.dbm_to_watt(26.0) == pytest.approx(0.398107, rel=1e-5)
    assert model.dbm_to_watt(30.0) == 1.0
    assert model.watt_to_dbm(model.dbm_to_watt(-20.0)) == pytest.approx(-20.0)


def test_load_config_converts_dbm(tmp_path):
    f = tmp_path / "s.cfg"
    f.write_text("Pk_max_dbm = 26  # per cell\nP_max_dbm: 30\nM = 6\n")
    cfg = model.load_config(f)
    assert cfg.Pk_max == pytest.approx(10 ** -0.4)
    assert cfg.P_max == 1.0
    assert cfg.M == 6


@pytest.mark.parametrize("text,key", [("zeta = 1.5", "zeta"), ("M = 0", "M"),
                                      ("N1_k = 9", "N1_k"), ("bogus = 1", "bogus"),
                                      ("M = 2.5", "M"), ("eps0 = -1", "eps0")])
def test_invalid_config_reports_key(tmp_path, text, key):
    f = tmp_path / "bad.cfg"
    f.write_text(text)
    with pytest.raises(ConfigError) as e:
        model.load_config(f)
    assert e.value.key == key


def test_missing_and_unparsable_config(tmp_path):
    with pytest.raises(ConfigError):
        model.load_config(tmp_path / "none.cfg")
    f = tmp_path / "x.cfg"
    f.write_text("no separator here")
    with pytest.raises(ConfigError):
        model.load_config(f)


def test_dump_load_roundtrip(tmp_path):
    cfg = NetworkConfig(M=4, e_min=model.dbm_to_watt(-10))
    f = tmp_path / "c.cfg"
    f.write_text(model.dump_config(cfg))
    assert model.load_config(f) == cfg


def test_uncertainty_radius_examples():
    cfg = NetworkConfig()
    assert model.uncertainty_radius(cfg, 2.0, True) == pytest.approx(0.002)
    assert model.uncertainty_radius(cfg, 0.0, False) == 0.0
    assert model.uncertainty_radius(cfg, 4.0, False) == pytest.approx(0.02)
    with pytest.raises(ValueError):
        model.uncertainty_radius(cfg, -1.0, True)


def test_channels_deterministic(paper_cfg):
    a = generate_channels(paper_cfg, 7)
    b = generate_channels(paper_cfg, 7)
    assert np.array_equal(a.h, b.h) and np.array_equal(a.Hev, b.Hev)
    assert not np.array_equal(a.h, generate_channels(paper_cfg, 8).h)


def test_channel_shapes_and_radii(paper_cfg, paper_channels):
    cs = paper_channels
    K, N, M, V = paper_cfg.K, paper_cfg.N_k, paper_cfg.M, paper_cfg.N_ev
    assert cs.h.shape == (K, K, N, M)
    assert cs.Hev.shape == (K, K, M, V)
    norms = np.sum(np.abs(cs.h) ** 2, axis=-1)
    for kb in range(K):
        for k in range(K):
            eps = paper_cfg.eps1 if kb == k else paper_cfg.eps0
            np.testing.assert_allclose(cs.eps_ue[kb, k], eps * norms[kb, k])
    np.testing.assert_allclose(cs.eps_ev, paper_cfg.eps0 * np.sum(np.abs(cs.Hev) ** 2, axis=(-2, -1)))


def test_zero_serving_uncertainty():
    cfg = NetworkConfig(eps1=0.0)
    cs = generate_channels(cfg, 3)
    assert np.all(cs.eps_ue[np.arange(3), np.arange(3)] == 0)


def test_geometry(paper_cfg):
    for seed in range(5):
        cs = generate_channels(paper_cfg, seed)
        d = cs.ue_distances()
        assert np.all(d > 0) and np.all(d <= paper_cfg.cell_radius + 1e-9)
        assert np.all(d[:, :paper_cfg.N1_k] <= paper_cfg.inner_radius + 1e-9)
        assert np.all(d[:, paper_cfg.N1_k:] >= paper_cfg.inner_radius - 1e-9)
        ev = np.linalg.norm(cs.ev_pos - cs.bs_pos, axis=-1)
        assert np.all(ev <= paper_cfg.inner_radius + 1e-9)


def test_cells_tangent():
    bs = model.bs_positions(3, 40.0)
    d = np.linalg.norm(bs[:, None] - bs[None], axis=-1)
    np.testing.assert_allclose(d[np.triu_indices(3, 1)], 80.0)


def test_pathloss_scaling():
    rng = np.random.default_rng(0)
    n = 20000
    p1 = np.mean([np.sum(np.abs(model.channel_vector(rng, 10.0, 0.3, 4, 10.0, 3.0)) ** 2) for _ in range(n)])
    p2 = np.mean([np.sum(np.abs(model.channel_vector(rng, 20.0, 0.3, 4, 10.0, 3.0)) ** 2) for _ in range(n)])
    assert p2 / p1 == pytest.approx(1 / 8, rel=0.05)


def test_same_geometry_across_antenna_counts():
    a = generate_channels(NetworkConfig(M=4), 2)
    b = generate_channels(NetworkConfig(M=6), 2)
    np.testing.assert_array_equal(a.ue_pos, b.ue_pos)


def test_normalize_preserves_rates(paper_cfg, paper_channels, rng):
    from secswipt import metrics as mt
    cs_n, cfg_n = normalize(paper_channels, paper_cfg)
    assert cfg_n.sigma_a2 == 1.0 and cfg_n.P_max == 1.0
    x = mt.BeamformerSet.random(cfg_n, rng, 0.1)
    ts = mt.TimeSplit.from_eta(0.3)
    xp = x.scaled(model.beam_scale(paper_cfg))
    np.testing.assert_allclose(mt.secrecy_rate(cs_n, x, ts, cfg_n),
                               mt.secrecy_rate(paper_channels, xp, ts, paper_cfg), rtol=1e-9)
    np.testing.assert_allclose(mt.harvested_energy(cs_n, x, ts, cfg_n) * paper_cfg.sigma_a2,
                               mt.harvested_energy(paper_channels, xp, ts, paper_cfg), rtol=1e-9)


def test_channel_json_roundtrip(paper_channels):
    back = model.ChannelSet.from_json(paper_channels.to_json())
    np.testing.assert_array_equal(back.h, paper_channels.h)
    np.testing.assert_array_equal(back.eps_ev, paper_channels.eps_ev)


def test_with_uncertainty(paper_channels):
    cs0 = model.with_uncertainty(paper_channels, 0.0, 0.0)
    assert np.all(cs0.eps_ue == 0) and np.all(cs0.eps_ev == 0)
    assert math.isclose(float(np.sum(cs0.h - paper_channels.h).real), 0.0)
