import numpy as np
import pytest

from secswipt import conic
from secswipt.conic import Affine, Builder


@pytest.mark.parametrize("case", conic.analytic_test_set(), ids=lambda c: c.name)
def test_analytic_cases(case):
    res = conic.solve(case.program, conic.ANALYTIC_TOL)
    assert res.status == case.status
    if case.status != "optimal":
        return
    assert res.objective == pytest.approx(case.objective, abs=1e-8)
    for name, v in case.solution.items():
        np.testing.assert_allclose(case.program.value(res.z, name), v, atol=1e-8)
    assert conic.certify(case.program, res, 10 * conic.ANALYTIC_TOL).passed


def test_default_tolerance_certifies():
    for case in conic.analytic_test_set()[:-1]:
        res = conic.solve(case.program)
        assert res.ok and conic.certify(case.program, res).passed


def test_certify_detects_perturbation():
    case = conic.analytic_test_set()[0]
    res = conic.solve(case.program)
    z = res.z.copy()
    z[case.program.var("z")[0]] += 1e-3
    bad = conic.SolveResult("optimal", z, res.y, res.objective, {}, 0, 0.0)
    assert not conic.certify(case.program, bad).passed


def test_certify_rejects_non_optimal():
    case = conic.analytic_test_set()[-1]
    res = conic.solve(case.program)
    assert not conic.certify(case.program, res).passed


def test_zero_program():
    p = Builder().build()
    res = conic.solve(p)
    assert res.ok and conic.certify(p, res).passed


def test_unbounded():
    b = Builder()
    z = b.var("z", 1)
    b.nonneg(Affine.var(z))
    b.maximize(z)
    assert conic.solve(b.build()).status == "unbounded"


def test_determinism():
    case = conic.analytic_test_set()[1]
    a = conic.solve(case.program)
    b = conic.solve(case.program)
    np.testing.assert_array_equal(a.z, b.z)


def test_json_roundtrip():
    case = conic.analytic_test_set()[0]
    p = case.program
    q = conic.ConicProgram.from_json(p.to_json())
    assert q.n == p.n and (q.A != p.A).nnz == 0
    np.testing.assert_array_equal(q.b, p.b)
    res = conic.solve(q, conic.ANALYTIC_TOL)
    assert res.objective == pytest.approx(case.objective, abs=1e-8)


def test_cone_slices_validated():
    with pytest.raises(ValueError):
        conic.ConicProgram(2, np.zeros(2), conic.sp.csr_matrix((0, 2)), np.zeros(0),
                           [conic.Cone("soc", 0, 2), conic.Cone("nonneg", 1, 1)], {})
    with pytest.raises(ValueError):
        conic.ConicProgram(2, np.zeros(2), conic.sp.csr_matrix((0, 2)), np.zeros(0),
                           [conic.Cone("psd", 0, 2)], {})


def test_cone_violation():
    assert conic.cone_violation("soc", [1.0, 0.6, 0.8]) == 0.0
    assert conic.cone_violation("soc", [1.0, 3.0, 4.0]) == pytest.approx(4.0)
    assert conic.cone_violation("rsoc", [2.0, 1.0, 2.0]) == 0.0
    assert conic.cone_violation("rsoc", [1.0, 1.0, 2.0]) > 0
    assert conic.cone_violation("nonneg", [1.0, -0.5]) == 0.5


def test_affine_evaluate():
    e = Affine.row([0, 2], [1.0, -2.0], 3.0)
    assert e.evaluate(np.array([1.0, 5.0, 2.0]))[0] == pytest.approx(0.0)
