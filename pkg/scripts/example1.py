"""Fit (s^2 + s + 1)/(s + 1) from eight real samples and report the pencil."""
import numpy as np

from loewner import TangentialDataSet, build_pencil, detect_order, project_reduce, transfer_siso
from loewner.model_core import pencil_eigenvalues


def H(s):
    return np.array([[(s**2 + s + 1) / (s + 1)]])


def main():
    data = TangentialDataSet.from_function(H, [1.0, 3.0, 5.0, 7.0], [2.0, 4.0, 6.0, 8.0])
    pencil = build_pencil(data)
    rep = detect_order(pencil)
    print("normalized singular values of [L, Ms]:", np.array2string(rep.sv_row, precision=6))
    print(f"nu = {rep.nu}, r = {rep.r}")
    model = project_reduce(pencil, rep.r)
    print("pencil eigenvalues:", pencil_eigenvalues(model.A, model.E))
    z = np.array([0.5j, 2.0, -3 + 1j])
    err = np.abs(transfer_siso(model, z) - H(z)[0, 0]) / np.abs(H(z)[0, 0])
    print("relative error at", z, ":", err)


if __name__ == "__main__":
    main()
