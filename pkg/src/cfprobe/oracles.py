"""Independent checks: Fourier density, Gram matrices, exact axis values, measure recovery."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .funcmodel import ProbabilityMeasure, measure_abs_laplace
from .quadrature import QuadratureConfig, integrate_half_line
from .reports import FAIL, INAPPLICABLE, PASS, CriterionReport, ViolationCertificate, finish, inapplicable

TRUNCATION_BUDGET = 1e-4
WEIGHT_FLOOR = 1e-10


@dataclass(frozen=True)
class FourierGrid:
    """``N`` samples of ``f`` on ``[-T, T)``; the dual grid has spacing ``pi / T``."""

    half_width: float = 16.0
    n: int = 2**14

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("half width must be positive")
        if self.n < 256 or self.n & (self.n - 1):
            raise ValueError("sample count must be a power of two >= 256")

    @property
    def dt(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def dx(self) -> float:
        return math.pi / self.half_width


def fourier_density(f, grid: FourierGrid = FourierGrid()) -> tuple[np.ndarray, np.ndarray]:
    """Samples of ``g(x) = (1/2pi) int_{-T}^{T} f(t) exp(-ixt) dt`` on the dual grid.

    Periodic trapezoid rule via one FFT.  Returns ``(x, g)`` with ``x``
    ascending and centred on 0.
    """
    n, T, dt = grid.n, grid.half_width, grid.dt
    t = -T + dt * np.arange(n)
    ft = np.asarray(f(t), dtype=float)
    m = np.fft.fftshift(np.fft.fftfreq(n, d=1.0 / n))  # integer frequencies
    x = 2.0 * math.pi * m / (n * dt)
    spec = np.fft.fftshift(np.fft.fft(ft))
    # shift the origin of t from index 0 (t = -T) to t = 0
    g = (dt / (2.0 * math.pi)) * np.real(spec * np.exp(1j * x * T))
    return x, g


def truncation_tail(f, T: float, cfg: QuadratureConfig = QuadratureConfig()) -> tuple[float, bool]:
    """``(1/pi) int_T^inf |f|`` (bounds the change in ``g`` from cutting at T)."""
    est = integrate_half_line(lambda s: np.abs(np.asarray(f(T + s), dtype=float)), cfg)
    return est.real / math.pi + est.error_bound, est.converged


def bochner_fft_check(
    f,
    grid: FourierGrid = FourierGrid(),
    tol: float = 1e-6,
    budget: float = TRUNCATION_BUDGET,
    cfg: QuadratureConfig = QuadratureConfig(),
) -> CriterionReport:
    """Sign of the candidate density on the FFT grid.

    FAIL when ``min g < -(tol * max g + tail)``, where ``tail`` bounds the
    effect of truncating ``f`` at ``T``.  INAPPLICABLE when that tail
    cannot be bounded below ``budget`` (slowly decaying or oscillating
    candidates such as cos or sinc).
    """
    completeness = {"half_width": grid.half_width, "n": grid.n, "tol": tol}
    if getattr(f, "support", None) is not None:
        return inapplicable("bochner", "f is unknown beyond its sampled range", **completeness)
    tail, ok = truncation_tail(f, grid.half_width, cfg)
    completeness["truncation_bound"] = tail if math.isfinite(tail) else None
    if not ok or not tail <= budget:
        return inapplicable("bochner", f"|f| beyond T = {grid.half_width:g} is not below the truncation budget {budget:g}", **completeness)
    x, g = fourier_density(f, grid)
    gmax = float(np.max(g))
    slack = tol * max(gmax, 0.0) + tail
    i = int(np.argmin(g))
    certs = []
    if g[i] < -slack:
        certs.append(ViolationCertificate("bochner", {"x": float(x[i])}, None, float(g[i]), slack))
    return finish("bochner", certs, 1, 0, float(g[i]) + slack, completeness)


def psd_gram_check(f, points, tol: float = 1e-8) -> CriterionReport:
    """Smallest eigenvalue of ``G[i, j] = f(x_i - x_j)``."""
    pts = np.asarray(points, dtype=float)
    if len(np.unique(pts)) != len(pts):
        raise ValueError("points must be distinct")
    G = np.asarray(f(pts[:, None] - pts[None, :]), dtype=float)
    G = 0.5 * (G + G.T)
    lam = float(np.linalg.eigvalsh(G)[0])
    certs = []
    if lam < -tol:
        certs.append(
            ViolationCertificate("psd", {"size": len(pts)}, None, lam, tol, {"points": pts.tolist()})
        )
    return finish("psd", certs, 1, 0, lam + tol, {"points": len(pts), "tol": tol})


def random_points(rng: np.random.Generator, size: int = 16, spread: float = 8.0) -> np.ndarray:
    return np.sort(rng.uniform(-spread, spread, size))


def adversarial_points(
    f, seed: int = 0, trials: int = 200, size: int = 64, span: float = math.inf
) -> tuple[np.ndarray, float]:
    """Seeded random search for a point set with a negative Gram eigenvalue.

    Candidates are jittered lattices: their Gram matrices are close to
    Toeplitz, whose spectra sample a periodised transform of ``f``.  All
    pairwise differences stay below ``span``.
    """
    rng = np.random.default_rng(seed)
    h_hi = min(2.0, 0.9 * span / size)
    h_lo = min(0.2, 0.5 * h_hi)
    best, best_lam = None, math.inf
    for _ in range(trials):
        h = rng.uniform(h_lo, h_hi)
        pts = h * np.arange(size) + rng.uniform(-0.1, 0.1, size) * h
        G = np.asarray(f(pts[:, None] - pts[None, :]), dtype=float)
        lam = float(np.linalg.eigvalsh(0.5 * (G + G.T))[0])
        if lam < best_lam:
            best, best_lam = pts, lam
    return best, best_lam


def ground_truth_axis(m: ProbabilityMeasure, y_grid, cfg: QuadratureConfig = QuadratureConfig()) -> list[float]:
    """``u(0, y) = int exp(-|x| y) dm(x)`` in closed form."""
    return [float(v) for v in np.atleast_1d(measure_abs_laplace(m, np.asarray(y_grid, dtype=float), cfg))]


# measure recovery -------------------------------------------------------------


class NNLSError(RuntimeError):
    """The active-set iteration hit its cap; ``iterate`` holds the last weights."""

    def __init__(self, msg: str, iterate: np.ndarray):
        super().__init__(msg)
        self.iterate = iterate


def nnls(A: np.ndarray, b: np.ndarray, max_iter: int | None = None, tol: float | None = None) -> tuple[np.ndarray, float]:
    """Lawson-Hanson active-set solution of ``min ||Ax - b||`` with ``x >= 0``.

    Returns ``(x, ||Ax - b||)``.  Weights outside the passive set are
    exactly zero.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    max_iter = 3 * n if max_iter is None else max_iter
    if tol is None:
        tol = 10 * max(m, n) * np.finfo(float).eps * np.linalg.norm(A, 1) * max(np.linalg.norm(b), 1.0)
    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    w = A.T @ (b - A @ x)
    it = 0
    while (~passive).any() and (w[~passive] > tol).any():
        j = np.flatnonzero(~passive)[np.argmax(w[~passive])]
        passive[j] = True
        while True:
            it += 1
            if it > max_iter:
                raise NNLSError("active-set iteration cap reached", x.copy())
            z = np.zeros(n)
            z[passive] = np.linalg.lstsq(A[:, passive], b, rcond=None)[0]
            if (z[passive] > 0).all():
                x = z
                break
            # step back to the boundary of the feasible region
            neg = np.flatnonzero(passive & (z <= 0))
            ratios = x[neg] / (x[neg] - z[neg])
            alpha = ratios.min()
            x = x + alpha * (z - x)
            x[neg[ratios == alpha]] = 0.0
            passive &= x > 0
            x[~passive] = 0.0
        w = A.T @ (b - A @ x)
    return x, float(np.linalg.norm(A @ x - b))


def default_rate_grid() -> np.ndarray:
    return np.concatenate([[0.0], np.geomspace(1e-3, 50.0, 200)])


@dataclass(frozen=True)
class ExponentialMixture:
    """``u(y) = sum w_j exp(-t_j y)``."""

    rates: tuple[float, ...]
    weights: tuple[float, ...]
    residual: float

    def __post_init__(self):
        if len(self.rates) != len(self.weights):
            raise ValueError("rates and weights differ in length")
        if any(r < 0 for r in self.rates) or any(w < 0 for w in self.weights):
            raise ValueError("rates and weights must be nonnegative")

    @property
    def mass(self) -> float:
        return math.fsum(self.weights)

    def mass_in(self, lo: float, hi: float) -> float:
        return math.fsum(w for r, w in zip(self.rates, self.weights) if lo <= r <= hi)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return sum(w * np.exp(-r * y) for r, w in zip(self.rates, self.weights))


def recover_measure(y_grid, u_values, rate_grid=None, floor: float = WEIGHT_FLOOR) -> ExponentialMixture:
    """Fit ``u`` by a nonnegative combination of ``exp(-t y)`` over ``rate_grid``."""
    y = np.asarray(y_grid, dtype=float)
    u = np.asarray(u_values, dtype=float)
    rates = default_rate_grid() if rate_grid is None else np.asarray(rate_grid, dtype=float)
    if y.size == 0 or rates.size == 0 or y.shape != u.shape:
        raise ValueError("need matching, nonempty y and u arrays and a nonempty rate grid")
    if np.any(u <= 0):
        raise ValueError("axis values must be positive")
    if not np.any(rates == 0):
        raise ValueError("rate grid must include 0")
    A = np.exp(-np.outer(y, rates))
    w, res = nnls(A, u)
    keep = w > floor
    return ExponentialMixture(tuple(float(r) for r in rates[keep]), tuple(float(v) for v in w[keep]), res)


__all__ = [
    "FAIL", "INAPPLICABLE", "PASS", "ExponentialMixture", "FourierGrid", "NNLSError",
    "adversarial_points", "bochner_fft_check", "default_rate_grid", "fourier_density",
    "ground_truth_axis", "nnls", "psd_gram_check", "random_points", "recover_measure",
    "truncation_tail",
]
