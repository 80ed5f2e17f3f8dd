"""Rational fit of a delay descriptor model sampled on the imaginary axis."""
import argparse

import numpy as np

from loewner import benchmarks, conjugate_close, loewner_fit, partition_data, samples_from_function, transfer_siso


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--points", type=int, default=100, help="frequencies before conjugate closure")
    a = ap.parse_args()

    g = benchmarks.gust_fixture(a.seed)
    w = np.logspace(-1, 1, a.points)
    data = conjugate_close(samples_from_function(g, 1j * w))
    fit = loewner_fit(partition_data(data))
    wt = np.sqrt(w[1:] * w[:-1])
    ref = np.array([g(1j * x)[0, 0] for x in wt])
    err = np.max(np.abs(transfer_siso(fit.model, 1j * wt) - ref) / np.abs(ref))
    print(f"detected order {fit.model.n} (nu = {fit.orders.nu}); max relative error between samples {err:.2e}")


if __name__ == "__main__":
    main()
