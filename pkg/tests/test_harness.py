import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracbody import harness
from fracbody.core import FieldError, bump, field_sum, gaussian, validate_params
from fracbody.starbody import ball


@given(
    lhs=st.floats(0.1, 10.0),
    rel=st.floats(-0.5, 0.5),
    tol=st.floats(0.0, 0.1),
)
def test_check_relations(lhs, rel, tol):
    rhs = lhs * (1 + rel)
    le = harness.Check("x", lhs, rhs, "<=", tol)
    ge = harness.Check("x", lhs, rhs, ">=", tol)
    eq = harness.Check("x", lhs, rhs, "==", tol)
    assert le.passed or ge.passed
    assert eq.passed == (le.passed and ge.passed)
    assert harness.Check("x", lhs, rhs, "<", tol).passed <= le.passed
    d = le.to_dict()
    assert d["tolerance"] == tol and d["relation"] == "<="


def test_unasserted_checks_do_not_fail():
    rep = harness.Report("t")
    rep.check("info", 1.0, "<", 0.0, 0.0, asserted=False)
    assert rep.passed
    rep.check("bad", 2.0, "<=", 1.0, 0.01)
    assert not rep.passed
    assert "[INFO]" in rep.checks[0].line() and "[FAIL]" in rep.checks[1].line()


def test_report_serialisation_is_stable():
    rep = harness.Report("t", inputs={"b": 1, "a": np.float64(2.0)})
    rep.check("c", 1.0, "==", 1.0, 0.0)
    rep.rows.append({"s": 0.5, "v": np.float64(1.25)})
    with rep.stage("work"):
        pass
    text = rep.to_json()
    assert text == rep.to_json()
    data = json.loads(text)
    assert list(data) == sorted(data)
    assert "timings" not in text and "work" in rep.meta()["timings_s"]
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert rows[0][:3] == ["report", "record", "name"]
    assert rep.to_csv().count("\r\n") == 3


def test_classification():
    assert harness.is_radial(gaussian(2))
    assert not harness.is_radial(harness.preset_field("offset_bump", 2))
    assert not harness.is_radial(harness.preset_field("sheared_gaussian", 2))
    assert harness.is_even(harness.preset_field("even_pair", 2))
    assert not harness.is_even(harness.preset_field("skewed", 2))
    assert harness.is_affine_radial(harness.preset_field("sheared_bump", 2))
    assert not harness.is_affine_radial(harness.preset_field("two_bump", 2))
    with pytest.raises(KeyError):
        harness.preset_field("nope", 2)


def test_chain_radial_equality(coarse):
    rep = harness.sobolev_chain_report(gaussian(2), validate_params(2, 0.5, 2.0), coarse)
    assert rep.passed
    assert rep.results["B"] == pytest.approx(rep.results["C"], rel=0.02)
    assert {"A", "A_over_B", "A_over_C"} <= set(rep.results)


def test_chain_asymmetric_and_rejections(coarse):
    params = validate_params(2, 0.5, 2.0)
    rep = harness.sobolev_chain_report(harness.preset_field("two_bump", 2), params, coarse, asymmetric=True)
    assert rep.passed
    with pytest.raises(FieldError):
        harness.sobolev_chain_report(harness.preset_field("signed_pair", 2), params, coarse, asymmetric=True)
    with pytest.raises(ValueError):
        harness.sobolev_chain_report(gaussian(1), validate_params(1, 0.9, 2.0, sobolev=False), coarse)


def test_chain_fails_at_tiny_tolerance(coarse):
    rep = harness.sobolev_chain_report(gaussian(2), validate_params(2, 0.5, 2.0), coarse, tol=1e-12)
    assert not rep.passed


def test_abs_value_reduction(coarse):
    params = validate_params(2, 0.5, 2.0)
    f = harness.preset_field("signed_pair", 2)
    rep = harness.abs_value_reduction_check(f, params, coarse, tol=0.0)
    assert rep.passed
    assert rep.results["seminorm_abs_f"] < rep.results["seminorm_f"]
    same = harness.abs_value_reduction_check(bump(2, 1.0), params, coarse)
    assert same.passed
    neg = harness.abs_value_reduction_check(f.scaled(-1.0), params, coarse, tol=0.0)
    assert neg.results["seminorm_f"] == pytest.approx(rep.results["seminorm_f"], rel=1e-12)


def test_ps_report(coarse):
    params = validate_params(2, 0.5, 2.0)
    eq = harness.affine_ps_report(bump(2, 1.0), params, coarse)
    assert eq.passed and any("equality" in c.name for c in eq.checks)
    with pytest.raises(FieldError):
        harness.affine_ps_report(harness.preset_field("signed_pair", 2), params, coarse)


def test_asym_report(coarse):
    params = validate_params(2, 0.5, 2.0)
    even = harness.asym_strengthening_report(harness.preset_field("even_pair", 2), params, coarse)
    skew = harness.asym_strengthening_report(harness.preset_field("skewed", 2), params, coarse)
    assert even.passed and skew.passed
    assert even.results["plus_minus_dilates"] and not skew.results["plus_minus_dilates"]
    strict = [c for c in skew.checks if "strict" in c.name][0]
    assert not strict.asserted and strict.passed


def test_optimal_report_is_seeded(coarse):
    params = validate_params(2, 0.5, 2.0)
    f = harness.preset_field("skewed", 2)
    a = harness.optimal_body_report(f, params, 20, 3, coarse)
    b = harness.optimal_body_report(f, params, 20, 3, coarse)
    assert a.passed and a.to_json() == b.to_json()
    radial = harness.optimal_body_report(gaussian(2), params, 5, 0, coarse)
    assert radial.passed and any("ball candidate" in c.name for c in radial.checks)


def test_bbm_limit_target_scaling(quad):
    # K = lam B: target scales as lam^{n+p}
    f = gaussian(1)
    grid = quad.grid(1)
    t1 = harness.bbm_target(f, ball(grid), 2.0, quad)
    t2 = harness.bbm_target(f, ball(grid, 1.3), 2.0, quad)
    assert t2 == pytest.approx(1.3**3 * t1)
    assert t1 == pytest.approx(harness.euclidean_gradient_target(f, 2.0, quad), rel=1e-8)
    assert t1 == pytest.approx(2 * np.sqrt(np.pi / 2), rel=1e-6)
    with pytest.raises(FieldError):
        harness.bbm_limit_report(harness.preset_field("ball_indicator", 1), ball(grid), 2.0, [0.5], quad)


def test_affine_invariance_small(coarse):
    rep = harness.affine_invariance_report(gaussian(2), validate_params(2, 0.5, 2.0), coarse, shears=2, seed=1)
    assert rep.passed


def test_random_sl_has_unit_determinant():
    rng = np.random.default_rng(0)
    for _ in range(10):
        assert harness.random_sl(rng, 2).det == pytest.approx(1.0)


def test_dual_inequalities_report():
    rep = harness.dual_inequalities_report(2, 10, seed=0)
    assert rep.passed
    with pytest.raises(ValueError):
        harness.dual_inequalities_report(2, 1, 0, alpha=1.0)


def test_riesz_report_smoke():
    rep = harness.riesz_report(harness.random_riesz_triples(2, seed=0, n=1))
    assert rep.passed and len(rep.rows) == 2
