"""Decision procedures: complete monotonicity on the imaginary axis, its
kernel-integral form, the Egorov conditions, and the verdict aggregation.

Every check returns a :class:`CriterionReport`.  A cell whose signed value
is below ``-(error_bound + sign_tol)`` yields a certificate; cells whose
quadrature did not converge, or whose error bar exceeds the a priori size
of the quantity, are counted as inconclusive and never certify anything.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import harmonic
from .funcmodel import CandidateFunction, SampleRangeError, validate
from .oracles import FourierGrid, fourier_density
from .quadrature import QuadratureConfig, integrate_half_line
from .reports import (
    FAIL,
    INAPPLICABLE,
    INCONCLUSIVE,
    PASS,
    CriterionReport,
    ViolationCertificate,
    finish,
    inapplicable,
)

log = logging.getLogger(__name__)

IS_CF_CONSISTENT = "IS_CF_CONSISTENT"
NOT_CF = "NOT_CF"
VERDICT_INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class CheckPolicy:
    """Grids and tolerances shared by the checkers."""

    ymin: float = 0.05
    ymax: float = 20.0
    ypoints: int = 25
    k_max: int = 8
    n_max: int = 3
    p_max: int = 3
    deltas: tuple[float, ...] = (0.1, 1.0, 10.0)
    sign_tol: float = 1e-8
    fd_steps: tuple[float, ...] = (0.1,)
    fd_order: int = 6
    fd_points: int = 60
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    jobs: int = 1

    def __post_init__(self):
        if not self.sign_tol > 0:
            raise ValueError("sign_tol must be positive")
        if not 0 < self.ymin <= self.ymax or self.ypoints < 1:
            raise ValueError("y grid needs 0 < ymin <= ymax and at least one point")
        if self.ypoints > 1 and self.ymin == self.ymax:
            raise ValueError("several y points need ymin < ymax")
        if min(self.k_max, self.n_max, self.p_max, self.fd_order) < 0:
            raise ValueError("orders must be nonnegative")
        if not self.deltas or any(d <= 0 for d in self.deltas):
            raise ValueError("delta grid must be nonempty and positive")
        if not self.fd_steps or any(h <= 0 for h in self.fd_steps) or self.fd_points < 1:
            raise ValueError("finite-difference steps must be nonempty and positive")

    @property
    def y_grid(self) -> tuple[float, ...]:
        if self.ypoints == 1:
            return (float(self.ymin),)
        return harmonic.default_y_grid(self.ymin, self.ymax, self.ypoints)


def _precheck(f: CandidateFunction, name: str) -> CriterionReport | None:
    _, issues = validate(f)
    if issues:
        return inapplicable(name, "; ".join(issues))
    return None


def _cell(signed: float, err: float, ok: bool, sign_tol: float):
    """Classify one cell: ('bad' | 'cert' | 'fine', margin)."""
    if not ok:
        return "bad", None
    margin = signed + err
    if signed < -(err + sign_tol):
        return "cert", margin
    return "fine", margin


class _Tally:
    def __init__(self, name: str, sign_tol: float):
        self.name = name
        self.sign_tol = sign_tol
        self.certs: list[ViolationCertificate] = []
        self.evaluated = 0
        self.inconclusive = 0
        self.worst: float | None = None

    def add(self, index: dict, y: float | None, signed: float, err: float, ok: bool, **extra):
        self.evaluated += 1
        kind, margin = _cell(signed, err, ok, self.sign_tol)
        if kind == "bad":
            self.inconclusive += 1
            return
        self.worst = margin if self.worst is None else min(self.worst, margin)
        if kind == "cert":
            self.certs.append(ViolationCertificate(self.name, index, y, float(signed), float(err), extra))

    def report(self, completeness: dict, notes=()) -> CriterionReport:
        return finish(self.name, self.certs, self.evaluated, self.inconclusive, self.worst, completeness, notes)


# complete monotonicity on the axis ------------------------------------------------


def theorem2_check(f: CandidateFunction, policy: CheckPolicy = CheckPolicy()) -> CriterionReport:
    """Signs of ``(-1)^k d^k/dy^k u_f(0, y)`` over the policy grid.

    PASS only means no violation up to ``k_max`` on the grid; the report's
    ``completeness`` field records that scope.
    """
    name = "theorem2"
    if (bad := _precheck(f, name)) is not None:
        return bad
    completeness = {"k_max": policy.k_max, "y_grid": list(policy.y_grid)}
    try:
        table = harmonic.axis_derivatives(f, policy.y_grid, policy.k_max, policy.quadrature, policy.jobs)
    except SampleRangeError as exc:
        return inapplicable(name, str(exc), **completeness)
    return table_report(table, policy.sign_tol, completeness)


def table_report(table: harmonic.AxisDerivativeTable, sign_tol: float, completeness=None) -> CriterionReport:
    tally = _Tally("theorem2", sign_tol)
    ok = ~table.inconclusive() & (table.imag_residuals <= 10 * table.error_bounds + sign_tol)
    for k in range(table.max_order + 1):
        for j, y in enumerate(table.y_grid):
            signed = (-1) ** k * table.values[k, j]
            tally.add({"k": k}, y, signed, table.error_bounds[k, j], bool(ok[k, j]))
    completeness = completeness or {"k_max": table.max_order, "y_grid": list(table.y_grid)}
    return tally.report(completeness)


def fd_samples_check(
    u_values, h: float, order: int, errors=None, tol: float = 1e-8, y0: float = 0.0, converged=None
) -> CriterionReport:
    """Alternating finite differences of equally spaced samples ``u(y0 + i h)``.

    Checks ``(-1)^n Delta_h^n u(y_i) >= -(2^n max err + tol)`` for
    ``n <= order``.  A difference touching an unconverged sample is
    inconclusive.
    """
    u = np.asarray(u_values, dtype=float)
    errs = np.zeros_like(u) if errors is None else np.asarray(errors, dtype=float)
    conv = np.ones(u.shape, dtype=bool) if converged is None else np.asarray(converged, dtype=bool)
    tally = _Tally("finite_difference", tol)
    diff = u.copy()
    for n in range(order + 1):
        if n:
            diff = np.diff(diff)
        for i, d in enumerate(diff):
            err = 2.0**n * float(errs[i : i + n + 1].max())
            ok = bool(conv[i : i + n + 1].all())
            tally.add({"n": n, "h": h}, y0 + i * h, (-1) ** n * d, err, ok)
    return tally.report({"order": order, "h": h, "samples": len(u)})


def finite_difference_cm_check(f: CandidateFunction, policy: CheckPolicy = CheckPolicy()) -> CriterionReport:
    """Derivative-free variant: alternating differences of ``u_f(0, y)``."""
    name = "finite_difference"
    if (bad := _precheck(f, name)) is not None:
        return bad
    parts = []
    try:
        for h in policy.fd_steps:
            m = min(policy.fd_points, int(math.floor((policy.ymax - policy.ymin) / h)) + 1)
            ys = policy.ymin + h * np.arange(max(m, policy.fd_order + 1))
            ests = [harmonic.poisson_estimate(f, harmonic.HalfPlanePoint(0.0, float(y)), policy.quadrature) for y in ys]
            parts.append(fd_samples_check(
                [e.real for e in ests], h, policy.fd_order, [e.error_bound for e in ests],
                policy.sign_tol, policy.ymin, [e.converged for e in ests],
            ))
    except SampleRangeError as exc:
        return inapplicable(name, str(exc))
    certs = [c for r in parts for c in r.certificates]
    margins = [r.worst_margin for r in parts if r.worst_margin is not None]
    return finish(
        name, certs, sum(r.cells_evaluated for r in parts), sum(r.cells_inconclusive for r in parts),
        min(margins) if margins else None,
        {"order": policy.fd_order, "steps": list(policy.fd_steps), "ymin": policy.ymin},
    )


# kernel integrals against derivatives of f ------------------------------------------


def _has_derivatives(f: CandidateFunction, order: int) -> bool:
    return f.derivative_order_available >= order and f.support is None


def _bounded_derivatives(f: CandidateFunction, order: int) -> bool:
    t = np.concatenate([-np.geomspace(1e-3, 1e4, 200)[::-1], [0.0], np.geomspace(1e-3, 1e4, 200)])
    with np.errstate(all="ignore"):
        d = f.derivatives(t, order)
    return bool(np.all(np.isfinite(d)))


def corollary3_check(f: CandidateFunction, policy: CheckPolicy = CheckPolicy()) -> CriterionReport:
    """Signs of the three kernel integrals over ``n <= n_max`` and the y grid.

    Conditions: ``I5 >= 0``, ``(-1)^(n+1) I6(n) >= 0`` and
    ``(-1)^(n+1) I7(n) >= 0``.
    """
    name = "corollary3"
    if (bad := _precheck(f, name)) is not None:
        return bad
    top = 2 * policy.n_max + 1
    completeness = {"n_max": policy.n_max, "y_grid": list(policy.y_grid)}
    if not _has_derivatives(f, top) or not _bounded_derivatives(f, top):
        return inapplicable(name, f"needs bounded derivatives up to order {top}", **completeness)
    tally = _Tally(name, policy.sign_tol)
    bound = harmonic.derivative_bound
    for y in policy.y_grid:
        ests = harmonic.corollary_kernel_estimates(f, y, policy.n_max, policy.quadrature)
        e5 = ests[(harmonic.EQ1_5, 0)]
        tally.add({"n": 0, "condition": "1.5"}, y, e5.real, e5.error_bound,
                  e5.converged and e5.error_bound < math.pi)
        for n in range(policy.n_max + 1):
            sign = (-1) ** (n + 1)
            for cond, key, k in (("1.6", harmonic.EQ1_6, 2 * n + 1), ("1.7", harmonic.EQ1_7, 2 * n + 2)):
                e = ests[(key, n)]
                ok = e.converged and e.error_bound < math.pi * bound(k, y)
                tally.add({"n": n, "condition": cond}, y, sign * e.real, e.error_bound, ok)
    return tally.report(completeness)


# Egorov -----------------------------------------------------------------------------

EGOROV_DECADES = 6


def l1_probe(f, decades: int = EGOROV_DECADES, samples: int = 2001) -> tuple[bool, list[float]]:
    """Heuristic absolute-integrability test on ``[1, 10^decades]``.

    ``int |f|`` over successive decades must shrink geometrically and the
    last decade must carry less than 1e-3.
    """
    masses = []
    for j in range(decades):
        t = np.geomspace(10.0**j, 10.0 ** (j + 1), samples)
        with np.errstate(all="ignore"):
            v = np.abs(np.asarray(f(t), dtype=float))
        masses.append(float(np.trapezoid(v, t)) if np.all(np.isfinite(v)) else math.inf)
    last, prev = masses[-1], masses[-2]
    ok = last < 1e-3 and (last <= 0.5 * prev or last < 1e-12)
    return ok, masses


def transform_l1_probe(f, grid: FourierGrid = FourierGrid()) -> tuple[bool, float]:
    """Integrability of the FFT density: the outer half of the grid holds < 1e-3 of ``int |g|``."""
    x, g = fourier_density(f, grid)
    dx = grid.dx
    total = float(np.abs(g).sum() * dx)
    outer = float(np.abs(g[np.abs(x) > 0.5 * np.abs(x).max()]).sum() * dx)
    return (math.isfinite(total) and outer < 1e-3 * max(total, 1e-300)), total


def egorov_check(f: CandidateFunction, policy: CheckPolicy = CheckPolicy()) -> CriterionReport:
    """Signs of the two Egorov integrals for ``p <= p_max`` and ``delta`` in the grid.

    ``(-1)^p int_0^inf f^(2p)(t) / (delta + t^2) dt >= 0`` and
    ``(-1)^(p+1) int_0^inf t f^(2p+1)(t) / (delta + t^2) dt >= 0``.
    The growth hypothesis on the derivatives is not gated; the report
    says so.
    """
    name = "egorov"
    if (bad := _precheck(f, name)) is not None:
        return bad
    top = 2 * policy.p_max + 1
    completeness = {"p_max": policy.p_max, "deltas": list(policy.deltas)}
    notes = ("derivative growth hypothesis not checked",)
    if not _has_derivatives(f, top):
        return inapplicable(name, f"needs derivatives up to order {top}", **completeness)
    ok, _ = l1_probe(f)
    if not ok:
        return inapplicable(name, "f does not look absolutely integrable", **completeness)
    ok, _ = transform_l1_probe(f)
    if not ok:
        return inapplicable(name, "the Fourier transform of f does not look absolutely integrable", **completeness)
    tally = _Tally(name, policy.sign_tol)
    cfg = policy.quadrature
    for p in range(policy.p_max + 1):
        for delta in policy.deltas:
            def first(t, p=p, delta=delta):
                return f.derivatives(t, 2 * p)[2 * p] / (delta + t * t)

            def second(t, p=p, delta=delta):
                return t * f.derivatives(t, 2 * p + 1)[2 * p + 1] / (delta + t * t)

            for cond, g, sign in (("first", first, (-1) ** p), ("second", second, (-1) ** (p + 1))):
                est = integrate_half_line(g, cfg)
                tally.add({"p": p, "delta": delta, "condition": cond}, None, sign * est.real,
                          est.error_bound, est.converged)
    return tally.report(completeness, notes)


# aggregation -------------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    label: str
    contributing: tuple[str, ...]
    failed: tuple[str, ...] = ()


def aggregate_verdict(reports, oracle_reports=()) -> Verdict:
    """NOT_CF on any failure; IS_CF_CONSISTENT when every applicable check passes."""
    allr = list(reports) + list(oracle_reports)
    applicable = [r for r in allr if r.status != INAPPLICABLE]
    if not applicable:
        raise ValueError("no applicable criterion")
    ids = tuple(r.criterion for r in applicable)
    failed = tuple(r.criterion for r in applicable if r.status == FAIL)
    if failed:
        return Verdict(NOT_CF, ids, failed)
    if all(r.status == PASS for r in applicable):
        return Verdict(IS_CF_CONSISTENT, ids)
    return Verdict(VERDICT_INCONCLUSIVE, ids)


__all__ = [
    "FAIL", "INAPPLICABLE", "INCONCLUSIVE", "IS_CF_CONSISTENT", "NOT_CF", "PASS",
    "VERDICT_INCONCLUSIVE", "CheckPolicy", "CriterionReport", "Verdict", "ViolationCertificate",
    "aggregate_verdict", "corollary3_check", "egorov_check", "fd_samples_check",
    "finite_difference_cm_check", "l1_probe", "table_report", "theorem2_check",
    "transform_l1_probe",
]
