"""Irrational transport fit and data-driven controller identification."""
import argparse

import numpy as np

from loewner import (
    ReferenceModel,
    benchmarks,
    conjugate_close,
    ideal_controller_samples,
    identify_controller,
    loewner_fit,
    partition_data,
    samples_from_function,
    transfer_siso,
)
from loewner.lddc import closed_loop_eval, filtered_pi
from loewner.model_core import pencil_eigenvalues


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--xm", type=float, default=1.9592, help="measurement position")
    ap.add_argument("--order", type=int, default=33)
    a = ap.parse_args()

    tr = benchmarks.transport(a.xm)
    w = np.logspace(-2, 1, 150)
    plant = conjugate_close(samples_from_function(lambda s: np.reshape(tr(s), (1, 1)), 1j * w))
    fit = loewner_fit(partition_data(plant), r=a.order)
    wt = np.sqrt(w[1:] * w[:-1])
    err = np.max(np.abs(transfer_siso(fit.model, 1j * wt) - tr(1j * wt)) / np.abs(tr(1j * wt)))
    print(f"order {a.order} fit: max relative error on a disjoint grid {err:.2e}")

    M = ReferenceModel.closed_loop(fit.model, filtered_pi())
    K = identify_controller(ideal_controller_samples(plant, M), order_rule="gap").model
    print(f"identified controller order {K.n}, poles {pencil_eigenvalues(K.A, K.E)}")
    rep = closed_loop_eval(plant, K, M)
    print(f"closed-loop deviation from the reference: max {rep.max_error:.2e}, mean {rep.mean_error:.2e}")


if __name__ == "__main__":
    main()
