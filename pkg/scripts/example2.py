"""Discrete-time fit of z/(z - 1/2) from unit-circle samples with feed-through extraction."""
import numpy as np

from loewner import TangentialDataSet, build_pencil, detect_order, loewner_fit, realify, transfer_siso


def H(z):
    return np.array([[z / (z - 0.5)]])


def main():
    lam = np.exp(1j * np.array([-0.1, 0.1, -2.0, 2.0]))
    mu = np.exp(1j * np.array([-1.0, 1.0, -3.0, 3.0]))
    data = TangentialDataSet.from_function(H, lam, mu)
    rep = detect_order(build_pencil(realify(data)))
    print(f"realified pencil: nu = {rep.nu}, r = {rep.r}")
    fit = loewner_fit(data, h=1.0)
    m = fit.model
    print(f"D = {fit.D[0, 0]:.6f}, order {m.n}")
    print(f"E = {m.E[0, 0]:.4f}, A = {m.A[0, 0]:.4f}, B = {m.B[0, 0]:.4f}, C = {m.C[0, 0]:.4f}")
    z = np.exp(1j * np.linspace(0, 2 * np.pi, 50, endpoint=False) + 0.01j)
    err = np.max(np.abs(transfer_siso(m, z) - H(z)[0, 0]) / np.abs(H(z)[0, 0]))
    print(f"max relative error on 50 unit-circle points: {err:.2e}")


if __name__ == "__main__":
    main()
