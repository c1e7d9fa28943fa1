"""Adaptive Gauss-Kronrod quadrature over finite and infinite intervals.

Two engines live here:

* :func:`adaptive_integrate` / :func:`integrate_half_line` /
  :func:`integrate_line` -- globally adaptive G7/K15 bisection for
  absolutely integrable integrands (infinite ranges are mapped onto a
  finite interval).
* :func:`kernel_integrals` -- integrals of a bounded, possibly
  non-decaying function against slowly decaying rational kernels, of the
  form ``int f(x + y*s) K(s) ds``.  These are computed with a Gaussian
  window ``exp(-(s/S)**2)`` at a ladder of widths ``S`` and extrapolated
  to ``S -> inf`` with Neville's scheme in ``1/S``.  Every window width
  shares one adaptive panel set, so all kernels and all widths come out
  of the same function evaluations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

_EPS = np.finfo(float).eps

# 15-point Kronrod nodes on [-1, 1] with the embedded 7-point Gauss rule.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[1::2] = np.concatenate([_WG[:-1], _WG[::-1]])


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and budgets shared by every integral in the package.

    ``max_subdivisions`` bounds the number of panels of an adaptive
    integral; the windowed kernel engine multiplies it by
    ``window_budget_factor`` because one panel set there serves many
    integrals at once and must resolve oscillation over long ranges.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 2000
    tail_cut_tol: float = 1e-12
    window_levels: int = 6
    window_budget_factor: int = 25

    def __post_init__(self):
        if min(self.abs_tol, self.rel_tol, self.tail_cut_tol) <= 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 10:
            raise ValueError("max_subdivisions must be at least 10")
        if self.window_levels < 3:
            raise ValueError("window_levels must be at least 3")


@dataclass(frozen=True)
class IntegralEstimate:
    value: complex
    error_bound: float
    subdivisions_used: int
    converged: bool
    regularized: bool = False
    notes: tuple[str, ...] = field(default=())

    @property
    def real(self) -> float:
        return float(np.real(self.value))

    @property
    def imag(self) -> float:
        return float(np.imag(self.value))

    def __add__(self, other: "IntegralEstimate") -> "IntegralEstimate":
        return IntegralEstimate(
            self.value + other.value,
            self.error_bound + other.error_bound,
            self.subdivisions_used + other.subdivisions_used,
            self.converged and other.converged,
            self.regularized or other.regularized,
            self.notes + other.notes,
        )

    def scaled(self, c: complex) -> "IntegralEstimate":
        return IntegralEstimate(
            self.value * c,
            self.error_bound * abs(c),
            self.subdivisions_used,
            self.converged,
            self.regularized,
            self.notes,
        )


def _target(values, roundoff, cfg: QuadratureConfig, weight=1.0):
    """Per-output accuracy target, never below the roundoff floor."""
    return np.maximum(
        np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(values)) * weight,
        100.0 * roundoff,
    )


def _panel_rule(g, a: np.ndarray, b: np.ndarray):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    t = c[:, None] + h[:, None] * NODES[None, :]
    vals = np.asarray(g(t))
    if vals.shape != t.shape:
        vals = np.broadcast_to(vals, t.shape)
    bad = ~np.isfinite(vals).all(axis=1)
    if bad.any():
        vals = np.where(np.isfinite(vals), vals, 0.0)
    hi = h * (vals @ KRONROD_WEIGHTS)
    lo = h * (vals @ GAUSS_WEIGHTS)
    absint = h * (np.abs(vals) @ KRONROD_WEIGHTS)
    err = np.abs(hi - lo)
    err[bad] = np.inf  # a non-finite sample poisons the panel
    return hi, err, absint


def adaptive_integrate(
    g: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    cfg: QuadratureConfig = QuadratureConfig(),
    breakpoints: Sequence[float] = (),
) -> IntegralEstimate:
    """Integrate ``g`` over the finite interval ``[a, b]``.

    ``g`` must accept an ndarray of abscissae and return values of the
    same shape (real or complex).  Panels are bisected largest-error
    first until the summed error meets the tolerance or the panel budget
    ``cfg.max_subdivisions`` is used up.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("adaptive_integrate needs finite limits")
    if a == b:
        return IntegralEstimate(0.0, 0.0, 0, True)
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    edges = np.unique(np.clip(np.concatenate([[a, b], np.asarray(breakpoints, float)]), a, b))
    lo_e, hi_e = edges[:-1], edges[1:]
    val, err, absint = _panel_rule(g, lo_e, hi_e)
    while True:
        total = val.sum()
        roundoff = _EPS * absint.sum()
        tol = _target(total, roundoff, cfg)
        if err.sum() <= tol:
            converged = True
            break
        if len(lo_e) >= cfg.max_subdivisions:
            converged = False
            break
        worst = int(np.argmax(err))
        mid = 0.5 * (lo_e[worst] + hi_e[worst])
        if not lo_e[worst] < mid < hi_e[worst]:
            converged = False
            break
        nv, ne, na = _panel_rule(g, np.array([lo_e[worst], mid]), np.array([mid, hi_e[worst]]))
        keep = np.arange(len(lo_e)) != worst
        lo_e = np.concatenate([lo_e[keep], [lo_e[worst], mid]])
        hi_e = np.concatenate([hi_e[keep], [mid, hi_e[worst]]])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])
        absint = np.concatenate([absint[keep], na])
    # Sum in abscissa order so the result does not depend on refinement history.
    order = np.argsort(lo_e, kind="stable")
    total = val[order].sum()
    bound = float(err.sum() + 50.0 * _EPS * absint.sum())
    return IntegralEstimate(complex(total) * sign, bound, len(lo_e), converged)


def integrate_half_line(g, cfg: QuadratureConfig = QuadratureConfig()) -> IntegralEstimate:
    """Integrate an absolutely integrable ``g`` over ``[0, inf)``.

    Uses ``t = u / (1 - u)``; the Kronrod nodes are interior so the
    singular endpoint ``u = 1`` is never evaluated.
    """

    def mapped(u):
        one_minus = 1.0 - u
        # panels squeezed against u = 1 can round a node onto it
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return g(u / one_minus) / (one_minus * one_minus)

    return adaptive_integrate(mapped, 0.0, 1.0, cfg, breakpoints=(0.5,))


def integrate_line(g, cfg: QuadratureConfig = QuadratureConfig()) -> IntegralEstimate:
    """Integrate an absolutely integrable ``g`` over the whole real line."""
    return integrate_half_line(lambda t: g(t) + g(-t), cfg)


# ---------------------------------------------------------------------------
# windowed kernel engine


def neville_weights(h: Sequence[float]) -> np.ndarray:
    """Weights ``c`` with ``sum(c * v)`` = polynomial extrapolation of ``v(h)`` to ``h = 0``."""
    h = np.asarray(h, dtype=float)
    c = np.empty(len(h))
    for j in range(len(h)):
        others = np.delete(h, j)
        c[j] = np.prod(others / (others - h[j]))
    return c


def window_widths(y: float, cfg: QuadratureConfig) -> np.ndarray:
    # 32 / y keeps the window at least ~32 units wide in t, so frequencies
    # of f down to ~0.5 sit far from the kernel transform's kink at zero.
    s0 = max(16.0, 32.0 / y)
    return s0 * 2.0 ** np.arange(cfg.window_levels)


@dataclass
class _Panels:
    a: np.ndarray
    b: np.ndarray
    val: np.ndarray  # (panels, rows, levels) complex
    err: np.ndarray
    absint: np.ndarray


def kernel_integrals(
    f: Callable[[np.ndarray], np.ndarray],
    x: float,
    y: float,
    kernel: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]],
    scales: Sequence[float],
    cfg: QuadratureConfig = QuadratureConfig(),
    support: float | None = None,
    tail_bounds: Sequence[float] | None = None,
    breakpoints: Sequence[float] = (),
) -> list[IntegralEstimate]:
    """Integrals ``scale_r * int_0^inf [f(x+y*s) kp_r(s) + f(x-y*s) km_r(s)] ds``.

    Parameters
    ----------
    f : callable
        Vectorised, bounded function on the real line.  It may instead
        return one row per kernel row (shape ``(rows,) + t.shape``), which
        lets each kernel see a different derivative of the candidate.
    x, y : float
        Centre and scale of the substitution ``t = x + y*s``; ``y > 0``.
    kernel : callable
        ``kernel(s) -> (kp, km)`` with arrays of shape ``(rows,) + s.shape``.
        The kernels must decay at least like ``1/s**2``.
    scales : sequence of float
        Constant factor applied to each row's result.
    support : float, optional
        When given, ``f`` is only known on ``[-support, support]``: the
        integral is truncated there, no window is used and
        ``tail_bounds[r]`` (a bound on ``int |kernel|`` beyond the cut,
        times ``sup |f|``) is added to each error bound.
    breakpoints : sequence of float
        Points in ``t`` where ``f`` is not smooth.

    Returns
    -------
    list of IntegralEstimate, one per kernel row.
    """
    if not y > 0:
        raise ValueError("kernel_integrals requires y > 0")
    scales = np.asarray(scales, dtype=float)
    nrows = len(scales)

    if support is None:
        widths = window_widths(y, cfg)
        coeffs = neville_weights(1.0 / widths)
        length = 7.0 * widths[-1]
    else:
        widths = np.array([np.inf])
        coeffs = np.array([1.0])
        length = max((support - abs(x)) / y, 0.0)
        if length == 0.0:
            raise ValueError("integration point lies outside the sampled support")
    coeff_abs = np.abs(coeffs).sum()

    def evaluate(a, b):
        c = 0.5 * (a + b)
        h = 0.5 * (b - a)
        s = c[:, None] + h[:, None] * NODES[None, :]  # (P, 15)
        kp, km = kernel(s)  # (R, P, 15)
        fp = np.asarray(f(x + y * s), dtype=float)
        fm = np.asarray(f(x - y * s), dtype=float)
        if fp.ndim == s.ndim:
            fp, fm = fp[None], fm[None]
        g = fp * kp + fm * km  # (R, P, 15)
        if support is None:
            win = np.exp(-((s[None] / widths[:, None, None]) ** 2))  # (L, P, 15)
        else:
            win = np.ones((1,) + s.shape)
        gw = g[:, None] * win[None]  # (R, L, P, 15)
        hi = np.einsum("rlpn,n->prl", gw, KRONROD_WEIGHTS) * h[:, None, None]
        lo = np.einsum("rlpn,n->prl", gw, GAUSS_WEIGHTS) * h[:, None, None]
        ab = np.einsum("rlpn,n->prl", np.abs(gw), KRONROD_WEIGHTS) * h[:, None, None]
        return hi, np.abs(hi - lo), ab

    # Initial partition: geometric near the origin (kernel peak at |s| ~ 1),
    # plus the candidate's own non-smooth points.
    edges = [0.0]
    e = 1.0 / 64.0
    while e < length:
        edges.append(e)
        e *= 2.0
    edges.append(length)
    for bp in breakpoints:
        for sbp in (abs(bp - x) / y, abs(bp + x) / y):
            if 0.0 < sbp < length:
                edges.append(sbp)
    edges = np.unique(np.asarray(edges))
    a, b = edges[:-1], edges[1:]
    val, err, absint = evaluate(a, b)
    budget = cfg.max_subdivisions * (cfg.window_budget_factor if support is None else 1)

    converged = True
    while True:
        totals = val.sum(axis=0)  # (R, L)
        extrap = np.abs(totals @ coeffs) * np.abs(scales)
        roundoff = _EPS * absint.sum(axis=0)
        weight = 1.0 / (coeff_abs * np.maximum(np.abs(scales), 1e-300))
        tol = np.maximum(
            np.maximum(cfg.abs_tol, cfg.rel_tol * extrap)[:, None] * weight[:, None] * 0.25,
            100.0 * roundoff,
        )
        score = (err / tol[None]).max(axis=(1, 2))
        if np.all(err.sum(axis=0) <= tol):
            break
        if len(a) >= budget:
            converged = False
            break
        order = np.argsort(-score, kind="stable")
        csum = np.cumsum(score[order])
        n = int(np.searchsorted(csum, 0.5 * csum[-1])) + 1
        n = max(1, min(n, budget - len(a)))
        pick = np.sort(order[:n])
        mid = 0.5 * (a[pick] + b[pick])
        keep = np.ones(len(a), dtype=bool)
        keep[pick] = False
        na = np.concatenate([a[pick], mid])
        nb = np.concatenate([mid, b[pick]])
        nv, ne, nabs = evaluate(na, nb)
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])
        absint = np.concatenate([absint[keep], nabs])

    order = np.argsort(a, kind="stable")
    totals = val[order].sum(axis=0)  # (R, L)
    quad_err = err.sum(axis=0) + 50.0 * _EPS * absint.sum(axis=0)

    out = []
    for r in range(nrows):
        value = totals[r] @ coeffs
        bound = float(np.abs(coeffs) @ quad_err[r])
        notes: tuple[str, ...] = ()
        if support is None:
            # Extrapolation error: full ladder against the ladder without
            # its widest window.
            coarse = totals[r, :-1] @ neville_weights(1.0 / widths[:-1])
            bound += float(abs(value - coarse))
        else:
            bound += float(tail_bounds[r]) if tail_bounds is not None else 0.0
            notes = ("truncated to sampled support",)
        est = IntegralEstimate(complex(value), bound, len(a), converged, notes=notes)
        out.append(est.scaled(scales[r]))
    return out


# ---------------------------------------------------------------------------
# Cauchy-type kernels


def cauchy_power_kernel(power: int):
    """Kernel rows for ``int f(t) / (i*y - t)**power dt`` after ``t = y*s``.

    Returns a callable suitable for :func:`kernel_integrals` with ``x = 0``;
    the ``y**(1 - power)`` factor is left to the caller.
    """

    def kernel(s):
        kp = 1.0 / (1j - s) ** power
        km = 1.0 / (1j + s) ** power
        return kp[None], km[None]

    return kernel


def cauchy_tail_bound(power: int, cut: float) -> float:
    """``2 * int_cut^inf (1 + s^2)^(-power/2) ds`` for ``power >= 1``."""
    if power == 1:
        return math.inf
    if power == 2:
        return 2.0 * (math.pi / 2.0 - math.atan(cut))
    # (1+s^2)^(-p/2) <= s^(-p) beyond the cut.
    return 2.0 * cut ** (1 - power) / (power - 1)


def cauchy_power_integral(
    f, y: float, power: int, cfg: QuadratureConfig = QuadratureConfig()
) -> IntegralEstimate:
    """``int f(t) / (i*y - t)**power dt`` over the real line.

    ``power = 1`` is not absolutely convergent for a general bounded ``f``;
    the request is answered with the regularised kernel
    ``1/(i*y - t) + t/(t**2 + 1)`` and the estimate is flagged.
    """
    if not y > 0:
        raise ValueError("y must be positive")
    if power < 1:
        raise ValueError("power must be >= 1")
    support = getattr(f, "support", None)
    breakpoints = getattr(f, "breakpoints", ())
    if power == 1:

        def kernel(s):
            t = y * s
            reg = y * t / (t * t + 1.0)
            kp = y / (1j * y - t) + reg
            km = y / (1j * y + t) - reg
            return kp[None], km[None]

        tails = None
        if support is not None:
            # |Re| <= |y^2 - 1| / t^3 and |Im| <= y / t^2 beyond the cut.
            tails = [abs(y * y - 1.0) / support**2 + 2.0 * y / support]
        est = kernel_integrals(f, 0.0, y, kernel, [1.0], cfg, support, tails, breakpoints)[0]
        return IntegralEstimate(est.value, est.error_bound, est.subdivisions_used,
                                est.converged, True, est.notes + ("regularized first-order kernel",))
    scale = y ** (1 - power)
    tails = None
    if support is not None:
        tails = [cauchy_tail_bound(power, support / y)]
    return kernel_integrals(
        f, 0.0, y, cauchy_power_kernel(power), [scale], cfg, support, tails, breakpoints
    )[0]
