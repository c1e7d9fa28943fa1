import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from cfprobe.funcmodel import BUILTIN_CATALOG, IS_CF, SampleRangeError, builtin, catalog_entry, from_samples
from cfprobe.funcmodel.expr import NotDifferentiable
from cfprobe.harmonic import (
    EQ1_5,
    EQ1_6,
    EQ1_7,
    HalfPlanePoint,
    analytic_completion,
    axis_derivatives,
    completion_estimate,
    conjugate_estimate,
    conjugate_v,
    corollary_kernel_estimates,
    corollary_kernel_integrals,
    default_y_grid,
    derivative_bound,
    poisson_estimate,
    poisson_extension,
)
from cfprobe.quadrature import QuadratureConfig

from .conftest import simpson
from .reference import GAUSS_D1, GAUSS_U01, POLYA_U01

TIGHT = QuadratureConfig(abs_tol=1e-13, rel_tol=1e-13)
EVEN_NAMES = list(BUILTIN_CATALOG)
SMOOTH = ["one", "gaussian", "laplace_cf", "cos(1)", "sinc_uniform", "quartic_exp", "quartic_rational"]


def cand(name):
    return catalog_entry(name).candidate


def test_default_grid():
    g = default_y_grid()
    assert len(g) == 25 and g[0] == pytest.approx(0.05) and g[-1] == pytest.approx(20.0)
    assert np.allclose(np.diff(np.log(g)), math.log(400) / 24)


def test_half_plane_point_requires_positive_y():
    with pytest.raises(ValueError):
        HalfPlanePoint(0.0, 0.0)


@pytest.mark.parametrize(
    "name, p, expected",
    [
        ("one", (3.0, 0.2), 1.0),
        ("cos(1)", (0.0, 1.0), math.exp(-1)),
        ("polya_triangle", (0.0, 1.0), POLYA_U01),
        ("gaussian", (0.0, 1.0), GAUSS_U01),
    ],
)
def test_poisson_examples(name, p, expected):
    assert poisson_extension(cand(name), HalfPlanePoint(*p)) == pytest.approx(expected, abs=1e-9)


def test_polya_value_by_simpson():
    kern = lambda t: (1 / math.pi) / (1 + t * t) * np.maximum(0, 1 - np.abs(t))  # noqa: E731
    assert simpson(kern, -1, 1, 10**6) == pytest.approx(POLYA_U01, abs=1e-12)


@pytest.mark.parametrize("name, y", [("cos(1)", 2.0), ("gaussian", 0.3), ("one", 7.0)])
def test_conjugate_vanishes_on_the_axis_for_even_f(name, y):
    assert abs(conjugate_v(cand(name), HalfPlanePoint(0.0, y))) <= 1e-9


def test_conjugate_of_constant_off_axis():
    # the regularised kernel integrates to ln ratio / 2 over [-L, L], which tends to 0
    L = 1e4
    g = lambda t: ((1 - t) / ((1 - t) ** 2 + 1) + t / (t * t + 1)) / math.pi  # noqa: E731
    truncated = math.log(((1 + L) ** 2 + 1) / ((1 - L) ** 2 + 1)) / (2 * math.pi)
    assert simpson(g, -L, L, 2 * 10**6) == pytest.approx(truncated, abs=1e-9)
    assert truncated == pytest.approx(0.0, abs=1e-3)
    assert abs(conjugate_v(builtin("one"), HalfPlanePoint(1.0, 1.0))) <= 1e-8


@pytest.mark.parametrize(
    "name, p, expected",
    [
        ("one", (0.0, 1.0), 1.0),
        ("cos(1)", (0.0, 0.7), math.exp(-0.7)),
        ("laplace_cf", (0.0, 1.0), 0.5),
    ],
)
def test_completion_examples(name, p, expected):
    z = analytic_completion(cand(name), HalfPlanePoint(*p))
    assert z.real == pytest.approx(expected, abs=1e-9)
    assert abs(z.imag) <= 1e-9


def test_completion_of_gaussian_off_axis():
    # E(z) = exp(-z^2/2)... checked against u and v: the completion of exp(-t^2/2)
    # is a Faddeeva value, sqrt(pi/2) w(z / sqrt 2) / sqrt(pi/2) = w(z/sqrt2)
    z = 0.7 + 0.4j
    expected = special.wofz(z / math.sqrt(2))
    got = analytic_completion(builtin("gaussian"), HalfPlanePoint(z.real, z.imag))
    assert got.real == pytest.approx(expected.real, abs=1e-9)


@pytest.mark.parametrize("name", ["gaussian", "cos(1)", "polya_triangle", "sinc_uniform"])
@pytest.mark.parametrize("p", [(0.3, 0.2), (-2.0, 1.5), (5.0, 4.0)])
def test_completion_parts_are_consistent(name, p):
    f, pt = cand(name), HalfPlanePoint(*p)
    e, u, v = completion_estimate(f, pt), poisson_estimate(f, pt), conjugate_estimate(f, pt)
    assert abs(e.real - u.real) <= e.error_bound + u.error_bound
    assert abs(e.imag - v.real) <= e.error_bound + v.error_bound


@pytest.mark.parametrize("name", ["one", "gaussian", "cos(1)", "laplace_cf"])
@pytest.mark.parametrize("p", [(0.0, 1.0), (1.0, 1.0), (0.0, 2.0)])
def test_harmonicity(name, p):
    # 5-point Laplacian; tight tolerances so quadrature noise stays under h^2
    h = 1e-3
    f = cand(name)
    u = lambda x, y: poisson_extension(f, HalfPlanePoint(x, y), TIGHT)  # noqa: E731
    x, y = p
    lap = (u(x + h, y) + u(x - h, y) + u(x, y + h) + u(x, y - h) - 4 * u(x, y)) / h**2
    assert abs(lap) <= 1e-4


@pytest.mark.parametrize("name", ["gaussian", "cos(1)", "laplace_cf", "sinc_uniform"])
@pytest.mark.parametrize("x", [0.0, 0.5, -1.0, 2.0])
def test_boundary_limit_is_first_order(name, x):
    # u(x, y) - f(x) = O(y): the gap shrinks at least linearly
    f = cand(name)
    fx = float(f(np.array(x)))
    gaps = [poisson_extension(f, HalfPlanePoint(x, y), TIGHT) - fx for y in (1e-2, 1e-3)]
    assert abs(gaps[1]) <= 2e-3
    if abs(gaps[0]) > 1e-6:
        assert abs(gaps[1]) <= 0.11 * abs(gaps[0])


def test_boundary_limit_of_cos():
    # u(x, y) = exp(-y) cos x exactly
    for x in (0.0, 0.5, 2.0):
        got = poisson_extension(cand("cos(1)"), HalfPlanePoint(x, 1e-3))
        assert got == pytest.approx(math.exp(-1e-3) * math.cos(x), abs=1e-9)


# axis derivatives ------------------------------------------------------------


def test_axis_table_for_constant(default_grid):
    t = axis_derivatives(builtin("one"), default_grid, 8)
    np.testing.assert_allclose(t.values[0], 1.0, atol=1e-9)
    assert np.all(np.abs(t.values[1:]) <= t.error_bounds[1:] + 1e-9)


@pytest.mark.parametrize("k", range(9))
def test_axis_table_for_cos(default_grid, k):
    t = axis_derivatives(cand("cos(1)"), default_grid, 8)
    y = np.array(default_grid)
    exact = (-1) ** k * np.exp(-y)
    assert np.all(np.abs(t.values[k] - exact) <= t.error_bounds[k] + 1e-9 * np.abs(exact))


@pytest.mark.parametrize("k", range(9))
def test_axis_table_for_laplace(default_grid, k):
    t = axis_derivatives(cand("laplace_cf"), default_grid, 8)
    y = np.array(default_grid)
    exact = (-1) ** k * math.factorial(k) / (1 + y) ** (k + 1)
    assert np.all(np.abs(t.values[k] - exact) <= t.error_bounds[k] + 1e-9 * np.abs(exact))


def test_gaussian_first_derivative():
    t = axis_derivatives(builtin("gaussian"), (1.0,), 2)
    assert t.values[1, 0] == pytest.approx(GAUSS_D1, abs=1e-9)
    assert GAUSS_D1 == pytest.approx(-0.2747, abs=1e-4)


@pytest.mark.parametrize("name", [n for n, e in BUILTIN_CATALOG.items() if e.expected_verdict == IS_CF])
def test_table_invariants(default_grid, name):
    t = axis_derivatives(cand(name), default_grid, 8)
    assert np.all(np.abs(t.values[0]) <= 1 + t.error_bounds[0])
    ok = t.converged
    assert np.all(t.imag_residuals[ok] <= 10 * t.error_bounds[ok] + 1e-12)
    # order 0 is the Poisson extension on the axis
    for j in (0, 12, 24):
        u = poisson_extension(cand(name), HalfPlanePoint(0.0, default_grid[j]))
        assert t.values[0, j] == pytest.approx(u, abs=t.error_bounds[0, j] + 1e-9)


@pytest.mark.parametrize("name", ["gaussian", "cos(1)", "laplace_cf", "polya_triangle"])
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_derivatives_match_richardson_differences_of_d0(name, k):
    f = cand(name)
    y0s = np.array([0.5, 1.0, 2.0, 5.0])

    def stencil(h):
        offsets = np.arange(-3, 4)[None, :] * h[:, None]
        d0 = np.array([[poisson_extension(f, HalfPlanePoint(0.0, y + o), TIGHT) for o in row]
                       for y, row in zip(y0s, offsets)])
        # 7-point central weights for the first four derivatives
        w = {
            1: np.array([-1, 9, -45, 0, 45, -9, 1]) / 60,
            2: np.array([2, -27, 270, -490, 270, -27, 2]) / 180,
            3: np.array([1, -8, 13, 0, -13, 8, -1]) / 8,
            4: np.array([-1, 12, -39, 56, -39, 12, -1]) / 6,
        }[k]
        return d0 @ w / h**k

    # steps grow with y so roundoff / h^k stays below the shrinking derivative
    order = 6 if k <= 2 else 4
    h = np.full(len(y0s), 0.02) if k <= 2 else 0.03 * y0s
    fine, coarse = stencil(h), stencil(2 * h)
    fd = fine + (fine - coarse) / (2**order - 1)
    t = axis_derivatives(f, tuple(y0s), k, TIGHT)
    np.testing.assert_allclose(t.values[k], fd, rtol=1e-5, atol=1e-9)


def test_derivative_bound():
    assert derivative_bound(0, 0.1) == 1.0
    assert derivative_bound(3, 1.0) == pytest.approx((3 / math.e) ** 3)


def test_jobs_do_not_change_the_table(default_grid):
    f = from_samples(np.linspace(-60, 60, 4801), np.exp(-np.linspace(-60, 60, 4801) ** 2 / 2))
    a = axis_derivatives(f, default_grid[:10], 6, jobs=1)
    axis_derivatives.__globals__["_TABLES"].clear()
    b = axis_derivatives(f, default_grid[:10], 6, jobs=4)
    for name in ("values", "error_bounds", "imag_residuals", "converged"):
        assert np.array_equal(getattr(a, name), getattr(b, name))


def test_table_is_read_only(default_grid):
    t = axis_derivatives(builtin("one"), default_grid[:3], 2)
    with pytest.raises(ValueError):
        t.values[0, 0] = 2.0


@pytest.mark.parametrize("grid", [(), (0.0, 1.0), (2.0, 1.0)])
def test_axis_grid_validation(grid):
    with pytest.raises(ValueError):
        axis_derivatives(builtin("one"), grid, 2)


def test_sampled_range_errors():
    t = np.linspace(-5, 5, 201)
    f = from_samples(t, np.exp(-t * t / 2))
    with pytest.raises(SampleRangeError):
        axis_derivatives(f, (1.0, 6.0), 2)
    with pytest.raises(SampleRangeError):
        poisson_extension(f, HalfPlanePoint(4.5, 1.0))
    with pytest.raises(NotDifferentiable):
        corollary_kernel_integrals(f, 1.0, 0, EQ1_6)


# corollary kernels -------------------------------------------------------------


@pytest.mark.parametrize(
    "name, which, n, expected",
    [
        ("gaussian", EQ1_5, 0, math.pi * GAUSS_U01),
        ("gaussian", EQ1_6, 0, math.pi * GAUSS_D1),
        ("one", EQ1_5, 3, math.pi),
    ],
)
def test_corollary_examples(name, which, n, expected):
    assert corollary_kernel_integrals(cand(name), 1.0, n, which) == pytest.approx(expected, abs=1e-9)


def test_corollary_rejects_unknown_condition():
    with pytest.raises(ValueError):
        corollary_kernel_integrals(builtin("gaussian"), 1.0, 0, "Eq1_8")


@pytest.mark.parametrize("name", ["gaussian", "cos(1)", "laplace_cf"])
@pytest.mark.parametrize("y", [0.05, 0.4, 1.0, 6.0])
def test_corollary_matches_axis_derivatives(name, y):
    f = cand(name)
    n_max = 3
    ests = corollary_kernel_estimates(f, y, n_max)
    t = axis_derivatives(f, (y,), 2 * n_max + 2)
    for n in range(n_max + 1):
        for which, k, sign in ((EQ1_6, 2 * n + 1, (-1) ** n), (EQ1_7, 2 * n + 2, (-1) ** (n + 1))):
            e = ests[(which, n)]
            target = math.pi * sign * t.values[k, 0]
            slack = e.error_bound + math.pi * t.error_bounds[k, 0] + 1e-9 * abs(target)
            assert abs(e.real - target) <= slack, (which, n)


@settings(max_examples=15)
@given(st.floats(-3, 3), st.floats(0.1, 5))
def test_poisson_is_bounded_by_sup(x, y):
    for name in ("sinc_uniform", "polya_triangle"):
        u = poisson_estimate(cand(name), HalfPlanePoint(x, y))
        assert abs(u.real) <= 1 + u.error_bound
