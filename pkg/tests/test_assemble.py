import numpy as np
import pytest

from secswipt import assemble as asm
from secswipt import conic, sca, validation
from secswipt import metrics as mt
from secswipt.model import NetworkConfig


@pytest.fixture(scope="module")
def expansion():
    return validation.feasible_expansion(NetworkConfig(), 0)


@pytest.fixture(scope="module")
def see_expansion(expansion):
    it, cs, cfg = expansion
    return sca.make_iterate(it.x, it.mu, cs, cfg, see=True), cs, cfg


def test_table_counts():
    cfg = NetworkConfig(M=4)
    it, cs, cfg_n = validation.random_expansion(cfg, np.random.default_rng(0))
    assert asm.table_counts(asm.assemble_secrecy_subproblem(it, cs, cfg_n)) == (73, 46, 61)
    assert asm.table_counts(asm.assemble_secrecy_subproblem(it, cs, cfg_n, eavesdropper=False)) == (73, 34, 49)


def test_secrecy_expansion_is_feasible_and_tight(expansion):
    it, cs, cfg = expansion
    p = asm.assemble_secrecy_subproblem(it, cs, cfg)
    z = asm.expansion_point(p, it, cs, cfg)
    v = conic.primal_violation(p, z)
    assert v["equality"] < 1e-9 and v["cone"] < 1e-9
    assert p.objective(z) == pytest.approx(mt.secrecy_rate(cs, it.x, it.ts, cfg).min(), rel=1e-10)


def test_see_expansion_is_feasible_and_tight(see_expansion):
    it, cs, cfg = see_expansion
    p = asm.assemble_see_subproblem(it, cs, cfg, r_qos=0.0)
    z = asm.expansion_point(p, it, cs, cfg)
    v = conic.primal_violation(p, z)
    assert v["equality"] < 1e-9 and v["cone"] < 1e-9
    assert p.objective(z) == pytest.approx(mt.see_values(cs, it.x, it.ts, cfg).min(), rel=1e-10)


def test_extract_roundtrip(expansion):
    it, cs, cfg = expansion
    p = asm.assemble_secrecy_subproblem(it, cs, cfg)
    e = asm.extract(p, asm.expansion_point(p, it, cs, cfg))
    np.testing.assert_allclose(e.x.xI, it.x.xI, atol=1e-12)
    np.testing.assert_allclose(e.x.xE, it.x.xE, atol=1e-12)
    assert e.mu == pytest.approx(it.mu, rel=1e-12)


def test_assembly_idempotent(expansion):
    it, cs, cfg = expansion
    a = asm.assemble_secrecy_subproblem(it, cs, cfg)
    b = asm.assemble_secrecy_subproblem(it, cs, cfg)
    assert (a.A != b.A).nnz == 0
    np.testing.assert_array_equal(a.b, b.b)
    np.testing.assert_array_equal(a.c, b.c)


@pytest.mark.parametrize("eavesdropper", [True, False])
def test_subproblem_improves(expansion, eavesdropper):
    it, cs, cfg = expansion
    if not eavesdropper:
        it = sca.make_iterate(it.x, it.mu, cs, cfg, eavesdropper=False)
    p = asm.assemble_secrecy_subproblem(it, cs, cfg, eavesdropper=eavesdropper)
    res = conic.solve(p)
    assert res.ok and conic.certify(p, res).passed
    z0 = asm.expansion_point(p, it, cs, cfg)
    assert res.objective >= p.objective(z0) - 1e-7
    e = asm.extract(p, res.z)
    mode = "secrecy" if eavesdropper else "secrecy-noeve"
    from secswipt.algorithms import true_objective
    # the subproblem value is a lower bound of the true objective at its solution
    assert true_objective(mode, cs, e.x, e.mu, cfg) >= res.objective - 1e-6
    assert mt.feasibility_audit(cs, e.x, mt.TimeSplit.from_mu(e.mu), cfg).ok


def test_see_subproblem_improves(see_expansion):
    it, cs, cfg = see_expansion
    p = asm.assemble_see_subproblem(it, cs, cfg, r_qos=0.0)
    res = conic.solve(p)
    assert res.ok and conic.certify(p, res).passed
    assert res.objective >= p.objective(asm.expansion_point(p, it, cs, cfg)) - 1e-7
    e = asm.extract(p, res.z)
    assert mt.see_values(cs, e.x, mt.TimeSplit.from_mu(e.mu), cfg).min() >= res.objective - 1e-6


def test_init_program(expansion):
    _, cs, cfg = expansion
    p = asm.assemble_init_program(cs, cfg, 1.5)
    res = conic.solve(p)
    assert res.ok
    x, r = asm.extract_init(p, res.z)
    caps = np.concatenate([np.sum(np.abs(x.xE) ** 2, -1).ravel(), np.sum(np.abs(x.xI) ** 2, -1).ravel()])
    assert np.all(caps <= cfg.Pk_max * (1 + 1e-6))


def test_noeve_needs_no_eavesdropper_quantities(expansion):
    it, cs, cfg = expansion
    it = sca.make_iterate(it.x, it.mu, cs, cfg, eavesdropper=False)
    assert it.beta is None
    p = asm.assemble_secrecy_subproblem(it, cs, cfg, eavesdropper=False)
    assert p.meta["eavesdropper"] is False
