"""Candidate functions and the builtin catalog."""

from __future__ import annotations

import csv
import dataclasses
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from .expr import Node, NotDifferentiable, derivatives, evaluate_tree, parse_expression, to_text
from .measures import ProbabilityMeasure, point_mass, symmetric_pair

EVAL_TOL = 1e-10
EVENNESS_PROBES = np.array([2.0**k * 1e-3 for k in range(25)])

IS_CF = "IS_CF"
NOT_CF = "NOT_CF"


class SampleRangeError(ValueError):
    """A sampled candidate was evaluated outside its grid."""


@dataclass(frozen=True)
class Builtin:
    name: str


@dataclass(frozen=True)
class Expression:
    tree: Node

    @property
    def text(self) -> str:
        return to_text(self.tree)


@dataclass(frozen=True, eq=False)
class Sampled:
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or len(grid) < 2:
            raise ValueError("sample grid and values must be 1-d arrays of equal length >= 2")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("sample grid must be strictly ascending")
        if not (np.all(np.isfinite(grid)) and np.all(np.isfinite(values))):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True, eq=False)
class CandidateFunction:
    """A real function on the line proposed as a characteristic function.

    Calling the candidate evaluates it (vectorised).  ``derivatives(t, n)``
    returns ``f^(k)(t)`` for ``k <= n`` when ``n`` does not exceed
    ``derivative_order_available``.
    """

    name: str
    source: Builtin | Expression | Sampled
    derivative_order_available: float = math.inf
    is_even_validated: bool = False
    abs_integrable_hint: bool | None = None
    normalization_checked: bool = False
    breakpoints: tuple[float, ...] = ()
    _eval: Callable | None = field(default=None, repr=False)
    _deriv: Callable | None = field(default=None, repr=False)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        src = self.source
        if isinstance(src, Sampled):
            if np.any(t < src.grid[0]) or np.any(t > src.grid[-1]):
                raise SampleRangeError(
                    f"t outside sampled range [{src.grid[0]}, {src.grid[-1]}]"
                )
            return self._eval(t)
        if isinstance(src, Expression):
            return evaluate_tree(src.tree, t)
        return self._eval(t)

    @property
    def support(self) -> float | None:
        """Half width of the symmetric interval where a sampled source is known."""
        if isinstance(self.source, Sampled):
            return float(max(min(-self.source.grid[0], self.source.grid[-1]), 0.0))
        return None

    def derivatives(self, t, order: int) -> np.ndarray:
        if order > self.derivative_order_available:
            raise NotDifferentiable(
                f"{self.name}: derivatives up to order {order} are not available"
            )
        if isinstance(self.source, Expression):
            return derivatives(self.source.tree, t, order)
        if self._deriv is None:
            raise NotDifferentiable(f"{self.name}: no derivative provider")
        return self._deriv(np.asarray(t, dtype=float), order)

    def evaluate(self, t: float) -> float:
        return float(self(np.array(t)))


def evaluate(f: CandidateFunction, t: float) -> float:
    """``f(t)`` as a float."""
    return f.evaluate(t)


def from_expression(text: str, name: str | None = None) -> CandidateFunction:
    tree = parse_expression(text)
    differentiable = not any(n.op == "abs" for n in tree.walk())
    return CandidateFunction(
        name=name or text,
        source=Expression(tree),
        derivative_order_available=math.inf if differentiable else 0,
    )


def from_samples(grid, values, name: str = "samples") -> CandidateFunction:
    src = Sampled(grid, values)
    # flat stretches (underflowed tails) divide by zero slopes inside scipy
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        interp = PchipInterpolator(src.grid, src.values, extrapolate=False)
    return CandidateFunction(
        name=name,
        source=src,
        derivative_order_available=0,
        _eval=lambda t: interp(t),
    )


def load_samples(path: str | Path) -> CandidateFunction:
    """Read a two-column CSV ``t, f(t)`` with a header row."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 3:
        raise ValueError(f"{path}: need a header row and at least two samples")
    try:
        data = np.array([[float(a), float(b)] for a, b in (r[:2] for r in rows[1:] if r)])
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric sample: {exc}") from None
    return from_samples(data[:, 0], data[:, 1], name=path.name)


def validate(f: CandidateFunction, eval_tol: float = EVAL_TOL) -> tuple[CandidateFunction, list[str]]:
    """Check evenness and ``f(0) = 1``; return the flagged candidate and issues."""
    issues = []
    probes = EVENNESS_PROBES
    if isinstance(f.source, Sampled):
        probes = probes[probes <= (f.support or 0.0)]
    even = True
    if len(probes):
        with np.errstate(all="ignore"):
            plus, minus = f(probes), f(-probes)
        bad = ~(np.abs(plus - minus) <= eval_tol)
        if np.any(bad):
            even = False
            t_bad = float(probes[np.argmax(bad)])
            issues.append(f"not even: |f(t) - f(-t)| > {eval_tol:g} at t = {t_bad!r}")
    else:
        even = False
        issues.append("no evenness probes inside the sampled range")
    try:
        f0 = float(f(np.array(0.0)))
    except SampleRangeError:
        f0 = math.nan
    normalized = abs(f0 - 1.0) <= eval_tol
    if not normalized:
        issues.append(f"f(0) = {f0!r}, not 1")
    flagged = dataclasses.replace(f, is_even_validated=even, normalization_checked=normalized)
    return flagged, issues


# builtins -------------------------------------------------------------------


def _sinc_derivatives(t: np.ndarray, order: int) -> np.ndarray:
    """Derivatives of sin(t)/t: power series near 0, quotient rule elsewhere."""
    out = np.empty((order + 1,) + t.shape)
    near = np.abs(t) <= 4.0
    if np.any(~near):
        far = t[~near]
        out[:, ~near] = derivatives(_SINC_TREE, far, order)
    if np.any(near):
        x = t[near]
        for k in range(order + 1):
            acc = np.zeros_like(x)
            # sinc(t) = sum (-1)^m t^(2m) / (2m+1)!; converges fast for |t| <= 4
            for m in range((k + 1) // 2, (k + 1) // 2 + 40):
                p = 2 * m - k
                coef = (-1) ** m * math.factorial(2 * m) / (math.factorial(p) * math.factorial(2 * m + 1))
                acc += coef * x**p
            out[k][near] = acc
    return out


_SINC_TREE = parse_expression("sin(t)/t")


@dataclass(frozen=True)
class CatalogEntry:
    candidate: CandidateFunction
    measure: ProbabilityMeasure | None
    expected_verdict: str

    def __post_init__(self):
        if self.measure is not None and self.expected_verdict != IS_CF:
            raise ValueError("an entry with a ground-truth measure must be IS_CF")


def _expr_builtin(name: str, text: str, **kw) -> CandidateFunction:
    tree = parse_expression(text)
    differentiable = not any(n.op == "abs" for n in tree.walk())
    return CandidateFunction(
        name=name,
        source=Builtin(name),
        derivative_order_available=math.inf if differentiable else 0,
        _eval=lambda t: evaluate_tree(tree, t),
        _deriv=(lambda t, n: derivatives(tree, t, n)) if differentiable else None,
        **kw,
    )


def _cos_entry(a: float) -> CatalogEntry:
    name = f"cos({a:g})"
    cand = _expr_builtin(name, f"cos({a!r}*t)", abs_integrable_hint=False)
    measure = point_mass(0.0) if a == 0 else symmetric_pair(a)
    return CatalogEntry(cand, measure, IS_CF)


def _catalog() -> dict[str, CatalogEntry]:
    polya = CandidateFunction(
        name="polya_triangle",
        source=Builtin("polya_triangle"),
        derivative_order_available=0,
        abs_integrable_hint=True,
        breakpoints=(-1.0, 0.0, 1.0),
        _eval=lambda t: np.clip(1.0 - np.abs(t), 0.0, None),
    )
    sinc = CandidateFunction(
        name="sinc_uniform",
        source=Builtin("sinc_uniform"),
        abs_integrable_hint=False,
        _eval=lambda t: np.sinc(np.asarray(t) / math.pi),
        _deriv=_sinc_derivatives,
    )
    entries = {
        "one": CatalogEntry(_expr_builtin("one", "1", abs_integrable_hint=False), point_mass(0.0), IS_CF),
        "gaussian": CatalogEntry(
            _expr_builtin("gaussian", "exp(-t^2/2)", abs_integrable_hint=True),
            ProbabilityMeasure("gaussian", 1.0), IS_CF,
        ),
        "cauchy_cf": CatalogEntry(
            _expr_builtin("cauchy_cf", "exp(-abs(t))", abs_integrable_hint=True, breakpoints=(0.0,)),
            ProbabilityMeasure("cauchy", 1.0), IS_CF,
        ),
        "laplace_cf": CatalogEntry(
            _expr_builtin("laplace_cf", "1/(1+t^2)", abs_integrable_hint=True),
            ProbabilityMeasure("laplace", 1.0), IS_CF,
        ),
        "cos(1)": _cos_entry(1.0),
        "polya_triangle": CatalogEntry(polya, None, IS_CF),
        "sinc_uniform": CatalogEntry(sinc, ProbabilityMeasure("uniform", 1.0), IS_CF),
        "quartic_exp": CatalogEntry(
            _expr_builtin("quartic_exp", "exp(-t^4)", abs_integrable_hint=True), None, NOT_CF
        ),
        "quartic_rational": CatalogEntry(
            _expr_builtin("quartic_rational", "1/(1+t^4)", abs_integrable_hint=True), None, NOT_CF
        ),
    }
    return entries


BUILTIN_CATALOG: dict[str, CatalogEntry] = _catalog()
_COS = re.compile(r"cos\(\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*\)")


def catalog_entry(name: str) -> CatalogEntry:
    """Look up a builtin; ``cos(a)`` accepts any real ``a``."""
    if name in BUILTIN_CATALOG:
        return BUILTIN_CATALOG[name]
    m = _COS.fullmatch(name.strip())
    if m:
        return _cos_entry(abs(float(m.group(1))))
    if name == "cos":
        return BUILTIN_CATALOG["cos(1)"]
    known = ", ".join(BUILTIN_CATALOG)
    raise KeyError(f"unknown builtin {name!r} (known: {known}, cos(a))")


def builtin(name: str) -> CandidateFunction:
    return catalog_entry(name).candidate
