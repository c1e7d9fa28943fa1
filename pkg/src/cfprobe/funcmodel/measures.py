"""Symmetric probability measures with closed-form characteristic functions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from ..quadrature import QuadratureConfig, integrate_half_line

FAMILIES = ("atoms", "gaussian", "cauchy", "laplace", "uniform", "triangular")


@dataclass(frozen=True)
class ProbabilityMeasure:
    """A symmetric probability measure on the line.

    ``kind`` is one of :data:`FAMILIES`.  Continuous families carry one
    positive ``param`` (variance for ``gaussian``, scale for ``cauchy`` and
    ``laplace``, half width for ``uniform`` and ``triangular``).  Atoms are
    ``(location, weight)`` pairs; they are symmetrised on use, so an atom
    at ``x`` acts as weight/2 at ``x`` and at ``-x``.
    """

    kind: str
    param: float = 1.0
    atoms: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind not in FAMILIES:
            raise ValueError(f"unknown measure family {self.kind!r}")
        if self.kind == "atoms":
            if not self.atoms:
                raise ValueError("atom list is empty")
            if any(w < 0 for _, w in self.atoms):
                raise ValueError("atom weights must be nonnegative")
            if abs(self.total_weight - 1.0) > 1e-12:
                raise ValueError(f"atom weights sum to {self.total_weight!r}, not 1")
        elif not self.param > 0:
            raise ValueError("measure parameter must be positive")

    @property
    def total_weight(self) -> float:
        if self.kind == "atoms":
            return math.fsum(w for _, w in self.atoms)
        return 1.0

    def density(self, x):
        """Lebesgue density (continuous families only)."""
        x = np.asarray(x, dtype=float)
        p = self.param
        if self.kind == "gaussian":
            return np.exp(-x * x / (2 * p)) / math.sqrt(2 * math.pi * p)
        if self.kind == "cauchy":
            return p / (math.pi * (x * x + p * p))
        if self.kind == "laplace":
            return np.exp(-np.abs(x) / p) / (2 * p)
        if self.kind == "uniform":
            return np.where(np.abs(x) <= p, 0.5 / p, 0.0)
        if self.kind == "triangular":
            return np.clip(p - np.abs(x), 0.0, None) / (p * p)
        raise ValueError("discrete measures have no density")


def point_mass(x: float = 0.0) -> ProbabilityMeasure:
    return ProbabilityMeasure("atoms", atoms=((x, 1.0),))


def symmetric_pair(a: float) -> ProbabilityMeasure:
    return ProbabilityMeasure("atoms", atoms=((a, 0.5), (-a, 0.5)))


def measure_cf(m: ProbabilityMeasure, t):
    """Characteristic function of ``m`` at ``t`` (real, even)."""
    t = np.asarray(t, dtype=float)
    p = m.param
    if m.kind == "atoms":
        return sum(w * np.cos(x * t) for x, w in m.atoms)
    if m.kind == "gaussian":
        return np.exp(-p * t * t / 2)
    if m.kind == "cauchy":
        return np.exp(-p * np.abs(t))
    if m.kind == "laplace":
        return 1.0 / (1.0 + p * p * t * t)
    if m.kind == "uniform":
        return np.sinc(p * t / math.pi)
    # triangular: (sin(c t / 2) / (c t / 2))^2
    return np.sinc(p * t / (2 * math.pi)) ** 2


def measure_abs_laplace(m: ProbabilityMeasure, y, cfg: QuadratureConfig = QuadratureConfig()):
    """``int exp(-|x| y) dm(x)`` for ``y > 0``."""
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr <= 0):
        raise ValueError("y must be positive")
    p = m.param
    if m.kind == "atoms":
        return sum(w * np.exp(-abs(x) * y_arr) for x, w in m.atoms)
    if m.kind == "gaussian":
        return special.erfcx(y_arr * math.sqrt(p / 2))
    if m.kind == "laplace":
        return 1.0 / (1.0 + p * y_arr)
    if m.kind == "uniform":
        z = p * y_arr
        return -np.expm1(-z) / z
    if m.kind == "triangular":
        z = p * y_arr
        small = z < 1e-3
        zs = np.where(small, 1.0, z)
        big = 2.0 / zs - 2.0 * (-np.expm1(-zs)) / (zs * zs)
        series = 1.0 - z / 3.0 + z * z / 12.0
        return np.where(small, series, big)
    # cauchy
    return np.vectorize(lambda yy: _cauchy_abs_laplace(p, yy, cfg), otypes=[float])(y_arr)


def _cauchy_abs_laplace(scale: float, y: float, cfg: QuadratureConfig) -> float:
    z = scale * y
    if z < 30.0:
        si, ci = special.sici(z)
        return (2 / math.pi) * (ci * math.sin(z) + (math.pi / 2 - si) * math.cos(z))
    # the Ci/Si combination cancels for large z; integrate the density instead
    est = integrate_half_line(lambda x: 2 * scale / (math.pi * (x * x + scale * scale)) * np.exp(-x * y), cfg)
    return est.real
