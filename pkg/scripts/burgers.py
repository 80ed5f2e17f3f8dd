"""Bilinear Loewner reduction of a Carleman-lifted Burgers discretization."""
import argparse

import numpy as np

from loewner import (
    ModelKernel,
    TimeSeries,
    benchmarks,
    build_bilinear_set,
    carleman,
    reduce_bilinear,
    simulate_bilinear,
)
from loewner.loewner_bilinear import bilinear_singular_values, interleaved_points


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=10, help="grid points of the discretization")
    ap.add_argument("--nu", type=float, default=0.1, help="viscosity")
    ap.add_argument("--k", type=int, default=40, help="interpolation points per side")
    ap.add_argument("--tol", type=float, default=1e-10)
    a = ap.parse_args()

    full = carleman(benchmarks.burgers_spec(a.n, a.nu))
    lam, mu = interleaved_points(a.k, 1e-2, 1e2, "real")
    bset = build_bilinear_set(ModelKernel(full), lam, mu)
    sv, _ = bilinear_singular_values(bset)
    r = int(np.sum(sv > a.tol))
    red = reduce_bilinear(bset, r)

    t = benchmarks.burgers_grid()
    u = TimeSeries(t[1] - t[0], benchmarks.burgers_input(t))
    yf = simulate_bilinear(full, u).y[:, 0]
    yr = simulate_bilinear(red, u).y[:, 0]
    print(f"lifted order {full.n}, reduced order {r}")
    print(f"max relative output error over [0, {t[-1]:g}]: {np.max(np.abs(yr - yf)) / np.max(np.abs(yf)):.2e}")


if __name__ == "__main__":
    main()
