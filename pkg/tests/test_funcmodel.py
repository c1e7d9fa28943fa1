import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from cfprobe.funcmodel import (
    BUILTIN_CATALOG,
    IS_CF,
    NOT_CF,
    CatalogEntry,
    ProbabilityMeasure,
    SampleRangeError,
    builtin,
    catalog_entry,
    evaluate,
    from_expression,
    from_samples,
    load_samples,
    measure_abs_laplace,
    measure_cf,
    point_mass,
    symmetric_pair,
    validate,
)
from cfprobe.quadrature import integrate_half_line


@pytest.mark.parametrize(
    "name, t, expected",
    [("one", 3.7, 1.0), ("gaussian", 0.0, 1.0), ("cauchy_cf", 1.0, math.exp(-1)), ("polya_triangle", 0.25, 0.75)],
)
def test_evaluate_builtins(name, t, expected):
    assert evaluate(builtin(name), t) == pytest.approx(expected, abs=1e-15)


def test_sampled_source_interpolates_and_refuses_extrapolation():
    t = np.linspace(-2, 2, 81)
    f = from_samples(t, np.exp(-t * t / 2))
    assert evaluate(f, 0.33) == pytest.approx(math.exp(-0.33**2 / 2), abs=1e-4)
    with pytest.raises(SampleRangeError):
        evaluate(f, 2.5)
    assert f.support == 2.0
    assert f.derivative_order_available == 0


def test_load_samples(tmp_path):
    path = tmp_path / "f.csv"
    path.write_text("t,f\n-1,0.5\n0,1\n1,0.5\n")
    f = load_samples(path)
    assert evaluate(f, 0.0) == 1.0
    bad = tmp_path / "bad.csv"
    bad.write_text("t,f\n0,x\n1,2\n")
    with pytest.raises(ValueError, match="non-numeric"):
        load_samples(bad)
    with pytest.raises(ValueError, match="ascending"):
        from_samples([0, 0, 1], [1, 1, 1])


@pytest.mark.parametrize("name", list(BUILTIN_CATALOG))
def test_builtins_validate(name):
    flagged, issues = validate(builtin(name))
    assert issues == []
    assert flagged.is_even_validated and flagged.normalization_checked


@pytest.mark.parametrize(
    "text, fragment",
    [("exp(-(t-1)^2)", "not even"), ("2*exp(-t^2)", "not 1"), ("sin(t) + 1", "not even")],
)
def test_validate_reports_issues(text, fragment):
    flagged, issues = validate(from_expression(text))
    assert any(fragment in msg for msg in issues)


def test_catalog_invariants():
    for entry in BUILTIN_CATALOG.values():
        if entry.measure is not None:
            assert entry.expected_verdict == IS_CF
    assert BUILTIN_CATALOG["quartic_exp"].expected_verdict == NOT_CF
    with pytest.raises(ValueError):
        CatalogEntry(builtin("quartic_exp"), point_mass(), NOT_CF)


def test_cos_family_lookup():
    f = catalog_entry("cos(2.5)").candidate
    assert evaluate(f, 1.0) == pytest.approx(math.cos(2.5))
    assert catalog_entry("cos(1)") is BUILTIN_CATALOG["cos(1)"]
    with pytest.raises(KeyError):
        catalog_entry("nope")


def test_sinc_derivatives_are_continuous_across_the_series_switch():
    f = builtin("sinc_uniform")
    t = np.array([4.0 - 1e-12, 4.0 + 1e-12])
    d = f.derivatives(t, 7)
    np.testing.assert_allclose(d[:, 0], d[:, 1], rtol=1e-9, atol=1e-12)


# measures ------------------------------------------------------------------------

MEASURES = [
    symmetric_pair(1.0),
    point_mass(),
    ProbabilityMeasure("gaussian", 1.0),
    ProbabilityMeasure("cauchy", 1.0),
    ProbabilityMeasure("laplace", 2.0),
    ProbabilityMeasure("uniform", 1.0),
    ProbabilityMeasure("triangular", 0.5),
]


@pytest.mark.parametrize(
    "m, t, expected",
    [
        (symmetric_pair(1.0), math.pi, -1.0),
        (ProbabilityMeasure("gaussian", 1.0), 2.0, math.exp(-2)),
        (ProbabilityMeasure("uniform", 1.0), 0.0, 1.0),
    ],
)
def test_measure_cf_examples(m, t, expected):
    assert measure_cf(m, t) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("m", MEASURES, ids=lambda m: m.kind)
@given(st.floats(-50, 50))
def test_measure_cf_even_and_bounded(m, t):
    v = measure_cf(m, t)
    assert v == pytest.approx(measure_cf(m, -t), abs=1e-15)
    assert abs(v) <= 1 + 1e-15


@pytest.mark.parametrize(
    "m, y, expected",
    [
        (symmetric_pair(1.0), 1.0, math.exp(-1)),
        (ProbabilityMeasure("laplace", 1.0), 1.0, 0.5),
        (ProbabilityMeasure("gaussian", 1.0), 1.0, math.exp(0.5) * special.erfc(1 / math.sqrt(2))),
    ],
)
def test_measure_abs_laplace_examples(m, y, expected):
    assert measure_abs_laplace(m, y) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("m", [m for m in MEASURES if m.kind != "atoms"], ids=lambda m: m.kind)
@pytest.mark.parametrize("y", [0.01, 0.7, 3.0, 45.0])
def test_measure_abs_laplace_matches_density_quadrature(m, y):
    est = integrate_half_line(lambda x: 2 * m.density(x) * np.exp(-x * y))
    assert measure_abs_laplace(m, y) == pytest.approx(est.real, abs=1e-9)


@pytest.mark.parametrize("m", MEASURES, ids=lambda m: m.kind)
def test_measure_abs_laplace_nonincreasing(m):
    ys = np.geomspace(1e-6, 100, 60)
    vals = np.atleast_1d(measure_abs_laplace(m, ys))
    assert np.all(np.diff(vals) <= 1e-15)
    assert np.all(vals <= 1.0)


FIRST_ABS_MOMENT = {
    "pair": 1.0, "point": 0.0, "gaussian": math.sqrt(2 / math.pi),
    "laplace": 2.0, "uniform": 0.5, "triangular": 0.5 / 3,
}


@pytest.mark.parametrize(
    "m, key", list(zip([m for m in MEASURES if m.kind != "cauchy"],
                       ["pair", "point", "gaussian", "laplace", "uniform", "triangular"])),
)
def test_measure_abs_laplace_unit_limit(m, key):
    # 1 - v(y) = y E|X| + O(y^2): the limit is 1, approached linearly
    y = 1e-6
    v = float(measure_abs_laplace(m, y))
    assert 1.0 - v == pytest.approx(y * FIRST_ABS_MOMENT[key], rel=1e-5, abs=1e-15)


def test_cauchy_limit_is_slow():
    # int exp(-|x| y) dCauchy ~ 1 - (2/pi) y log(1/y): not within 1e-8 at 1e-6
    v = measure_abs_laplace(ProbabilityMeasure("cauchy", 1.0), 1e-6)
    assert 1 - v == pytest.approx((2 / math.pi) * 1e-6 * (math.log(1e6) + 1 - np.euler_gamma), rel=1e-3)


def test_measure_validation():
    with pytest.raises(ValueError):
        ProbabilityMeasure("atoms", atoms=((1.0, 0.7),))
    with pytest.raises(ValueError):
        ProbabilityMeasure("gaussian", -1.0)
    with pytest.raises(ValueError):
        ProbabilityMeasure("weibull")
