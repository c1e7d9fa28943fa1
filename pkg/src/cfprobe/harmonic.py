"""Harmonic continuation into the upper half plane and its axis derivatives.

For a bounded continuous ``f`` the bounded harmonic function with boundary
values ``f`` is the Poisson integral

    u(x, y) = (1/pi) int y / ((x - t)^2 + y^2) f(t) dt,

its conjugate (normalised so the integral converges for every bounded f) is

    v(x, y) = (1/pi) int [(x - t)/((x - t)^2 + y^2) + t/(t^2 + 1)] f(t) dt,

and ``E = u + i v`` is analytic.  Derivatives along the imaginary axis
need no derivatives of ``f``:

    d^k/dy^k u(0, y) = Re[ i^k E^(k)(iy) ],
    E^(k)(z) = (-1)^k (i k! / pi) int f(t) / (z - t)^(k+1) dt.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .funcmodel import CandidateFunction, NotDifferentiable, SampleRangeError
from .quadrature import IntegralEstimate, QuadratureConfig, cauchy_tail_bound, kernel_integrals

K_MAX_DEFAULT = 16


def default_y_grid(ymin: float = 0.05, ymax: float = 20.0, n: int = 25) -> tuple[float, ...]:
    return tuple(float(v) for v in np.geomspace(ymin, ymax, n))


@dataclass(frozen=True)
class HalfPlanePoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError("points of the upper half plane need y > 0")


def _sup_norm(f) -> float:
    """Bound on ``|f|`` used beyond a sampled support (largest sample, at least 1)."""
    return max(1.0, float(np.max(np.abs(f.source.values))))


def _support_args(f, x: float, y: float, tails):
    support = getattr(f, "support", None)
    if support is None:
        return {"support": None, "tail_bounds": None}
    if support - abs(x) <= y:
        raise SampleRangeError(f"point ({x}, {y}) is too close to the edge of the sampled range")
    bound = _sup_norm(f)
    return {"support": support, "tail_bounds": [bound * b for b in tails((support - abs(x)) / y)]}


def poisson_estimate(f: CandidateFunction, p: HalfPlanePoint, cfg=QuadratureConfig()) -> IntegralEstimate:
    def kernel(s):
        k = 1.0 / (math.pi * (1.0 + s * s))
        return k[None], k[None]

    tails = lambda cut: [cauchy_tail_bound(2, cut) / math.pi]  # noqa: E731
    return kernel_integrals(
        f, p.x, p.y, kernel, [1.0], cfg,
        breakpoints=getattr(f, "breakpoints", ()),
        **_support_args(f, p.x, p.y, tails),
    )[0]


def poisson_extension(f: CandidateFunction, p: HalfPlanePoint, cfg=QuadratureConfig()) -> float:
    """``u_f(x, y)``."""
    return poisson_estimate(f, p, cfg).real


def _completion_kernel(x: float, y: float):
    def kernel(s):
        tp = x + y * s
        tm = x - y * s
        kp = (1j / math.pi) * (1.0 / (1j - s) + y * tp / (tp * tp + 1.0))
        km = (1j / math.pi) * (1.0 / (1j + s) + y * tm / (tm * tm + 1.0))
        return kp[None], km[None]

    return kernel


def _completion_tail(x: float, y: float):
    def tails(cut):
        # Real part ~ Poisson kernel, imaginary part decays like 1/s^2 with
        # constant bounded by (|x| + y + 1/y) / pi; integrate both tails.
        c = (abs(x) + y + 1.0 / y + 1.0) / math.pi
        return [cauchy_tail_bound(2, cut) / math.pi + 2.0 * c / max(cut, 1e-300)]

    return tails


def completion_estimate(f: CandidateFunction, p: HalfPlanePoint, cfg=QuadratureConfig()) -> IntegralEstimate:
    return kernel_integrals(
        f, p.x, p.y, _completion_kernel(p.x, p.y), [1.0], cfg,
        breakpoints=getattr(f, "breakpoints", ()),
        **_support_args(f, p.x, p.y, _completion_tail(p.x, p.y)),
    )[0]


def analytic_completion(f: CandidateFunction, p: HalfPlanePoint, cfg=QuadratureConfig()) -> complex:
    """``E_f(x + iy) = u_f + i v_f``."""
    return completion_estimate(f, p, cfg).value


def conjugate_estimate(f: CandidateFunction, p: HalfPlanePoint, cfg=QuadratureConfig()) -> IntegralEstimate:
    def kernel(s):
        tp = x + y * s
        tm = x - y * s
        kp = (-s / (1.0 + s * s) + y * tp / (tp * tp + 1.0)) / math.pi
        km = (s / (1.0 + s * s) + y * tm / (tm * tm + 1.0)) / math.pi
        return kp[None], km[None]

    x, y = p.x, p.y
    tails = _completion_tail(x, y)
    return kernel_integrals(
        f, x, y, kernel, [1.0], cfg,
        breakpoints=getattr(f, "breakpoints", ()),
        **_support_args(f, x, y, tails),
    )[0]


def conjugate_v(f: CandidateFunction, p: HalfPlanePoint, cfg=QuadratureConfig()) -> float:
    """``v_f(x, y)`` with the ``t/(t^2+1)`` normalisation."""
    return conjugate_estimate(f, p, cfg).real


# axis derivatives -----------------------------------------------------------


def derivative_bound(k: int, y: float) -> float:
    """A priori bound on ``|d^k/dy^k u(0, y)|`` for a characteristic function.

    ``|x|^k exp(-|x| y) <= (k / (e y))^k``, integrated against a probability
    measure.
    """
    if k == 0:
        return 1.0
    return (k / (math.e * y)) ** k


@dataclass(frozen=True)
class AxisDerivativeTable:
    """``values[k][j]`` approximates ``d^k/dy^k u_f(0, y_grid[j])``."""

    y_grid: tuple[float, ...]
    max_order: int
    values: np.ndarray
    error_bounds: np.ndarray
    imag_residuals: np.ndarray
    converged: np.ndarray

    def informative(self) -> np.ndarray:
        """Cells whose error bar is below the a priori size of the quantity."""
        bound = np.array([[derivative_bound(k, y) for y in self.y_grid] for k in range(self.max_order + 1)])
        return self.error_bounds < bound

    def inconclusive(self) -> np.ndarray:
        return ~(self.converged & self.informative())


def axis_column(f: CandidateFunction, y: float, K: int, cfg=QuadratureConfig()):
    """All orders ``0..K`` at one ``y``: (values, errors, imag residuals, converged)."""
    consts = [((-1j) ** k) * 1j * math.factorial(k) / math.pi for k in range(K + 1)]

    def kernel(s):
        zp = 1j - s
        zm = 1j + s
        kp = np.empty((K + 1,) + s.shape, dtype=complex)
        km = np.empty_like(kp)
        # order 0 uses the regularised completion kernel so its imaginary
        # part (v_f(0, y)) is finite
        reg_p = y * (y * s) / ((y * s) ** 2 + 1.0)
        kp[0] = (1j / math.pi) * (1.0 / zp + reg_p)
        km[0] = (1j / math.pi) * (1.0 / zm - reg_p)
        pp, pm = 1.0 / zp, 1.0 / zm
        for k in range(1, K + 1):
            pp = pp / zp
            pm = pm / zm
            kp[k] = consts[k] * pp
            km[k] = consts[k] * pm
        return kp, km

    scales = [y ** (-k) for k in range(K + 1)]
    support = getattr(f, "support", None)
    tails = None
    if support is not None:
        if y >= support:
            raise SampleRangeError(f"y = {y} is not inside the sampled half width {support}")
        cut = support / y
        tails = [_completion_tail(0.0, y)(cut)[0]]
        tails += [math.factorial(k) / math.pi * cauchy_tail_bound(k + 1, cut) for k in range(1, K + 1)]
        tails = [_sup_norm(f) * b for b in tails]
    ests = kernel_integrals(
        f, 0.0, y, kernel, scales, cfg,
        support=support, tail_bounds=tails,
        breakpoints=getattr(f, "breakpoints", ()),
    )
    vals = np.array([e.real for e in ests])
    errs = np.array([e.error_bound for e in ests])
    imag = np.array([abs(e.imag) for e in ests])
    conv = np.array([e.converged for e in ests])
    return vals, errs, imag, conv


def axis_derivatives(
    f: CandidateFunction,
    y_grid,
    K: int = K_MAX_DEFAULT,
    cfg: QuadratureConfig = QuadratureConfig(),
    jobs: int = 1,
) -> AxisDerivativeTable:
    """Table of ``d^k/dy^k u_f(0, y)`` for ``k <= K`` over ``y_grid``.

    Each column is independent; ``jobs > 1`` fills columns on a thread pool
    and assembles them in grid order, so the table does not depend on
    ``jobs``.
    """
    y_grid = tuple(float(y) for y in y_grid)
    if K < 0:
        raise ValueError("K must be nonnegative")
    if not y_grid or any(y <= 0 for y in y_grid) or list(y_grid) != sorted(y_grid):
        raise ValueError("y grid must be nonempty, ascending and positive")
    support = getattr(f, "support", None)
    if support is not None and y_grid[-1] >= support:
        raise SampleRangeError(f"y = {y_grid[-1]} is not inside the sampled half width {support}")
    key = (f, y_grid, K, cfg)
    if key not in _TABLES:
        if len(_TABLES) >= _TABLE_CACHE_SIZE:
            _TABLES.pop(next(iter(_TABLES)))
        _TABLES[key] = _fill_table(f, y_grid, K, cfg, jobs)
    return _TABLES[key]


# keyed on candidate identity; jobs is deliberately not part of the key
_TABLES: dict = {}
_TABLE_CACHE_SIZE = 64


def _fill_table(f, y_grid, K, cfg, jobs):
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            cols = list(pool.map(lambda y: axis_column(f, y, K, cfg), y_grid))
    else:
        cols = [axis_column(f, y, K, cfg) for y in y_grid]
    vals = np.stack([c[0] for c in cols], axis=1)
    errs = np.stack([c[1] for c in cols], axis=1)
    imag = np.stack([c[2] for c in cols], axis=1)
    conv = np.stack([c[3] for c in cols], axis=1)
    for a in (vals, errs, imag, conv):
        a.flags.writeable = False
    return AxisDerivativeTable(y_grid, K, vals, errs, imag, conv)


# kernels against derivatives of f (the Corollary 3 route) --------------------

EQ1_5, EQ1_6, EQ1_7 = "Eq1_5", "Eq1_6", "Eq1_7"


def corollary_kernel_estimates(
    f: CandidateFunction, y: float, n_max: int, cfg=QuadratureConfig()
) -> dict[tuple[str, int], IntegralEstimate]:
    """All three integrals for ``n = 0..n_max`` at one ``y`` (one panel set).

    Keys are ``(Eq1_5, 0)`` and ``(Eq1_6, n)``, ``(Eq1_7, n)``.  The values
    are the bare integrals; the sign prefixes belong to the caller.
    """
    top = 2 * n_max + 1
    if top > f.derivative_order_available:
        raise NotDifferentiable(f"{f.name}: derivatives to order {top} are not available")
    # rows: 0 -> f with Im 1/(t-iy); 1 + 2n -> f^(2n) Re 1/(t-iy)^2;
    # 2 + 2n -> f^(2n+1) Im 1/(t-iy)^2.  Row r sees derivative order
    # max(r - 1, 0).
    orders = [0] + [m for n in range(n_max + 1) for m in (2 * n, 2 * n + 1)]

    def frows(t):
        d = f.derivatives(t, top)
        return d[orders]

    def kernel(s):
        rows = len(orders)
        kp = np.empty((rows,) + s.shape)
        km = np.empty_like(kp)
        kp[0] = km[0] = 1.0 / (1.0 + s * s)
        inv2p = 1.0 / (s - 1j) ** 2
        inv2m = 1.0 / (-s - 1j) ** 2
        for n in range(n_max + 1):
            kp[1 + 2 * n], km[1 + 2 * n] = inv2p.real, inv2m.real
            kp[2 + 2 * n], km[2 + 2 * n] = inv2p.imag, inv2m.imag
        return kp, km

    scales = [1.0] + [1.0 / y] * (2 * n_max + 2)
    if getattr(f, "support", None) is not None:
        raise NotDifferentiable("sampled candidates carry no derivatives")
    ests = kernel_integrals(frows, 0.0, y, kernel, scales, cfg, breakpoints=getattr(f, "breakpoints", ()))
    out = {(EQ1_5, 0): ests[0]}
    for n in range(n_max + 1):
        out[(EQ1_6, n)] = ests[1 + 2 * n]
        out[(EQ1_7, n)] = ests[2 + 2 * n]
    return out


def corollary_kernel_integrals(
    f: CandidateFunction, y: float, n: int, which: str, cfg=QuadratureConfig()
) -> float:
    """One of the three kernel integrals, unsigned.

    ``Eq1_5``: ``int Im(1/(t - iy)) f(t) dt``;
    ``Eq1_6``: ``int Re(1/(t - iy)^2) f^(2n)(t) dt``;
    ``Eq1_7``: ``int Im(1/(t - iy)^2) f^(2n+1)(t) dt``.
    """
    if which not in (EQ1_5, EQ1_6, EQ1_7):
        raise ValueError(f"unknown condition {which!r}")
    if which == EQ1_5:
        n = 0
    ests = corollary_kernel_estimates(f, y, n, cfg)
    return ests[(which, n)].real
