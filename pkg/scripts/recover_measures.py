"""Recover the rate measure of u(0, y) by nonnegative least squares.

    python scripts/recover_measures.py

For each builtin with a known law, fits ``u(0, y) = sum w_j exp(-t_j y)``
from 40 axis samples and prints the total mass, the residual and the
heaviest atoms.  cos(a) should give one atom near rate a; the Laplace
and Gaussian laws spread their mass.
"""

import numpy as np

from cfprobe.funcmodel import BUILTIN_CATALOG
from cfprobe.harmonic import axis_derivatives
from cfprobe.oracles import recover_measure


def main():
    y = np.geomspace(0.05, 20, 40)
    rates = np.concatenate([[0.0], np.linspace(0, 5, 201)[1:]])
    for name, entry in BUILTIN_CATALOG.items():
        if entry.measure is None:
            continue
        u = axis_derivatives(entry.candidate, tuple(y), 0).values[0]
        mix = recover_measure(y, u, rates)
        top = sorted(zip(mix.weights, mix.rates), reverse=True)[:3]
        atoms = ", ".join(f"{w:.4f}@{r:.3f}" for w, r in top)
        print(f"{name:<16} mass {mix.mass:.6f}  residual {mix.residual:.2e}  top atoms {atoms}")


if __name__ == "__main__":
    main()
