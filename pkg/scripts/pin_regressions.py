"""Recompute the regression values frozen in tests/reference.py.

Run after any change to the quadrature or the checkers; the printed values
must match the frozen ones (or the change must be justified and the file
updated).

    python scripts/pin_regressions.py
"""

import math

import numpy as np
from scipy.optimize import minimize_scalar

from cfprobe.criteria import CheckPolicy, theorem2_check
from cfprobe.funcmodel import builtin
from cfprobe.oracles import FourierGrid, adversarial_points, fourier_density
from cfprobe.quadrature import QuadratureConfig, integrate_half_line


def first_failure(name):
    report = theorem2_check(builtin(name), CheckPolicy())
    cert = min(report.certificates, key=lambda c: (c.index["k"], c.y))
    return cert.index["k"], cert.y, cert.observed


def density_minimum(name, grid=FourierGrid(16.0, 2**16)):
    f = builtin(name)
    x, g = fourier_density(f, grid)
    i = int(np.argmin(np.where(x >= 0, g, np.inf)))
    cfg = QuadratureConfig(abs_tol=1e-14, rel_tol=1e-14)

    def direct(xx):
        return integrate_half_line(lambda t: f(t) * np.cos(xx * t), cfg).real / math.pi

    res = minimize_scalar(direct, bracket=(x[i - 1], x[i], x[i + 1]), tol=1e-10)
    return float(x[i]), float(g[i]), float(res.x), float(res.fun)


def main():
    for name in ("quartic_exp", "quartic_rational"):
        k, y, v = first_failure(name)
        print(f"{name}: first theorem2 failure k={k} y={y!r} signed value={v!r}")
        xg, gg, xs, gs = density_minimum(name)
        print(f"{name}: FFT min g({xg!r}) = {gg!r}; refined g({xs!r}) = {gs!r}")
    pts, lam = adversarial_points(builtin("quartic_exp"), seed=0)
    print(f"quartic_exp: adversarial 64-point lattice (seed 0) spacing={pts[1] - pts[0]!r} lambda_min={lam!r}")


if __name__ == "__main__":
    main()
