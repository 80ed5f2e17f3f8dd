"""Two-variable (frequency x real parameter) Loewner interpolation.

The surface is represented in barycentric form

    H(s, p) = sum c_ik w_ik / ((s - lam_i)(p - pi_k)) / sum c_ik / ((s - lam_i)(p - pi_k))

with coefficients ``c`` taken from the null space of the stacked 2-D Loewner
matrix. Coefficients are vectorized row-major: ``vec(c)[i*(q+1) + k] = c[i, k]``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as spla

from .errors import (
    DenominatorZero,
    DimensionMismatch,
    IndexOutOfRange,
    NotConjugateClosed,
    NullSpaceDimension,
    TooFewPoints,
)
from .loewner_lti import DEFAULT_TOL, _T2, numerical_rank
from .model_core import _frozen

log = logging.getLogger(__name__)


def _freq_order(z: np.ndarray) -> np.ndarray:
    """Deterministic frequency ordering: by |imag|, negative imaginary first."""
    return np.lexsort((z.real, z.imag, np.abs(z.imag)))


@dataclass(frozen=True, eq=False)
class ParamGrid:
    """Samples ``Phi[k, l] = H(z_k, p_l)`` on a tensor grid, stored sorted."""

    z: np.ndarray
    p: np.ndarray
    Phi: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=complex).ravel()
        p = np.asarray(self.p, dtype=float).ravel()
        Phi = np.asarray(self.Phi, dtype=complex)
        if Phi.shape != (z.size, p.size):
            raise DimensionMismatch(f"Phi is {Phi.shape}, grid is {(z.size, p.size)}")
        if np.unique(z).size != z.size or np.unique(p).size != p.size:
            raise DimensionMismatch("grid points must be distinct")
        iz, ip = _freq_order(z), np.argsort(p)
        object.__setattr__(self, "z", _frozen(z[iz]))
        object.__setattr__(self, "p", _frozen(p[ip]))
        object.__setattr__(self, "Phi", _frozen(Phi[np.ix_(iz, ip)]))

    @classmethod
    def from_function(cls, H, z, p) -> "ParamGrid":
        z = np.asarray(z, dtype=complex)
        p = np.asarray(p, dtype=float)
        return cls(z, p, np.array([[H(a, b) for b in p] for a in z], dtype=complex))


def loewner_1d(x, fx, y, fy) -> np.ndarray:
    """Scalar Loewner matrix, rows indexed by ``y`` and columns by ``x``."""
    x, y = np.asarray(x), np.asarray(y)
    return (np.asarray(fy)[:, None] - np.asarray(fx)[None, :]) / (y[:, None] - x[None, :])


def slice_loewner(grid: ParamGrid, axis: str, index: int) -> np.ndarray:
    """1-D Loewner matrix of one grid slice with an alternating split.

    ``axis="frequency"``: column ``index`` (parameter frozen) along z.
    ``axis="parameter"``: row ``index`` (frequency frozen) along p.
    """
    if axis == "frequency":
        if not 0 <= index < grid.p.size:
            raise IndexOutOfRange(f"parameter index {index} out of range")
        x, f = grid.z, grid.Phi[:, index]
    elif axis == "parameter":
        if not 0 <= index < grid.z.size:
            raise IndexOutOfRange(f"frequency index {index} out of range")
        x, f = grid.p, grid.Phi[index, :]
    else:
        raise ValueError(f"unknown axis {axis!r}")
    return loewner_1d(x[0::2], f[0::2], x[1::2], f[1::2])


def _rank(M, tol):
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return numerical_rank(s, tol) if np.max(np.abs(M)) > 0 else 0


def detect_orders(grid: ParamGrid, tol: float = DEFAULT_TOL) -> tuple[int, int]:
    """Max numerical rank over frequency slices (r) and parameter slices (q)."""
    r = max(_rank(slice_loewner(grid, "frequency", l), tol) for l in range(grid.p.size))
    q = max(_rank(slice_loewner(grid, "parameter", k), tol) for k in range(grid.z.size))
    return r, q


@dataclass(frozen=True, eq=False)
class Assembly2D:
    """The stacked matrix together with the split it was built from."""

    matrix: np.ndarray
    lam: np.ndarray
    pis: np.ndarray
    mu: np.ndarray
    nus: np.ndarray
    w: np.ndarray
    orders: tuple[int, int]
    blocks: tuple[int, int, int]


def _support(n_total, count):
    if count > n_total - 1:
        raise TooFewPoints(f"need more than {count} points on an axis, have {n_total}")
    return np.arange(count), np.arange(count, n_total)


def assemble_2d(grid: ParamGrid, orders: tuple[int, int],
                support: tuple[int, int] | None = None) -> Assembly2D:
    """Stack [L_lam; L_pi; L_2] for support sizes (r+1, q+1).

    The leading points of each sorted axis are the support; the rest are
    the left (row) points. ``support`` overrides the support sizes.
    """
    r, q = orders
    nb, mb = support or (r + 1, q + 1)
    li, mi = _support(grid.z.size, nb)
    pi_, ni = _support(grid.p.size, mb)
    z, p, Phi = grid.z, grid.p, grid.Phi
    lam, mu, pis, nus = z[li], z[mi], p[pi_], p[ni]
    w = Phi[np.ix_(li, pi_)]
    nl, ml = mu.size, nus.size
    ncol = nb * mb

    L_lam = np.zeros((nb * ml, ncol), dtype=complex)
    for i in range(nb):
        L_lam[i * ml:(i + 1) * ml, i * mb:(i + 1) * mb] = loewner_1d(pis, w[i], nus, Phi[li[i], ni])
    L_pi = np.zeros((mb * nl, ncol), dtype=complex)
    for k in range(mb):
        L_pi[k * nl:(k + 1) * nl, k::mb] = loewner_1d(lam, w[:, k], mu, Phi[mi, pi_[k]])
    num = Phi[np.ix_(mi, ni)].reshape(nl, ml, 1, 1) - w.reshape(1, 1, nb, mb)
    den = (mu[:, None, None, None] - lam[None, None, :, None]) * (nus[None, :, None, None] - pis[None, None, None, :])
    L2 = (num / den).reshape(nl * ml, ncol)
    M = np.vstack([L_lam, L_pi, L2])
    return Assembly2D(M, lam, pis, mu, nus, w, (r, q), (L_lam.shape[0], L_pi.shape[0], L2.shape[0]))


def barycentric_coeffs(L2hat: np.ndarray, shape: tuple[int, int], tol: float = DEFAULT_TOL,
                       deficiency: int = 1) -> np.ndarray:
    """Null vector of the stacked matrix, reshaped and normalized.

    Unit norm, first nonzero entry real positive. No null space at ``tol``
    (noisy data) gives a warning and the least-squares direction; a larger
    null space than ``deficiency`` raises NullSpaceDimension.
    """
    M = np.asarray(L2hat)
    _, s, Vh = np.linalg.svd(M)
    ncol = M.shape[1]
    sfull = np.zeros(ncol)
    sfull[:s.size] = s
    rank = numerical_rank(sfull, tol)
    null = ncol - rank
    if null == 0:
        warnings.warn("no exact null space; returning the smallest singular direction", RuntimeWarning)
    elif null > deficiency:
        raise NullSpaceDimension(f"null space has dimension {null}, expected {deficiency}")
    c = Vh[-1].conj()
    return _normalize(c).reshape(shape)


def _normalize(c):
    c = c / np.linalg.norm(c)
    nz = np.flatnonzero(np.abs(c) > 1e-14)
    if nz.size:
        ph = c[nz[0]] / abs(c[nz[0]])
        c = c / ph
    return c


@dataclass(frozen=True, eq=False)
class ParametricBarycentricModel:
    lam: np.ndarray
    pis: np.ndarray
    c: np.ndarray
    w: np.ndarray
    orders: tuple[int, int]

    def __post_init__(self):
        for name in ("lam", "pis", "c", "w"):
            object.__setattr__(self, name, _frozen(np.asarray(getattr(self, name), dtype=complex)
                                                   if name != "pis" else np.asarray(self.pis, dtype=float)))

    def __call__(self, xi, rho, method: str = "block"):
        return eval_parametric(self, xi, rho, method)


def _weights(x, support, tol=1e-14):
    """Cauchy weights 1/(x - support) or a unit vector at a support point."""
    d = x - support
    hit = np.flatnonzero(np.abs(d) <= tol * max(abs(x), 1.0))
    if hit.size:
        e = np.zeros(support.size, dtype=complex)
        e[hit[0]] = 1.0
        return e, True
    return 1.0 / d, False


def _ratio(model, xi, rho):
    a, _ = _weights(complex(xi), model.lam)
    b, _ = _weights(float(rho), model.pis)
    den = a @ model.c @ b
    num = a @ (model.c * model.w) @ b
    scale = np.linalg.norm(a) * np.linalg.norm(model.c) * np.linalg.norm(b)
    if abs(den) <= 1e-14 * scale:
        raise DenominatorZero(f"barycentric denominator vanishes at ({xi}, {rho})")
    return num / den


def _J(eta, x):
    t = eta.size - 1
    J = np.zeros((t, t + 1), dtype=complex)
    J[:, 0] = x - eta[0]
    J[np.arange(t), np.arange(1, t + 1)] = eta[1:] - x
    return J


def block_matrices(model: ParametricBarycentricModel, xi, rho):
    """Return (Phi, B, C) with H = C Phi^{-1} B for the block evaluator."""
    lam, pis, c, w = model.lam, model.pis, model.c, model.w
    r, q = lam.size - 1, pis.size - 1
    tau = np.array([1.0 / np.prod([pis[k] - pis[l] for l in range(q + 1) if l != k]) for k in range(q + 1)])
    n = r + 2 * q + 2
    P = np.zeros((n, n), dtype=complex)
    Jp = _J(pis.astype(complex), rho).T
    P[:r, :r + 1] = _J(lam, xi)
    P[r:r + q + 1, :r + 1] = c.T
    P[r:r + q + 1, r + 1:r + 1 + q] = Jp
    P[r + q + 1:, :r + 1] = (c * w).T
    P[r + q + 1:, r + 1 + q:n - 1] = Jp
    P[r + q + 1:, n - 1] = tau
    B = np.zeros(n, dtype=complex)
    B[r:r + q + 1] = tau
    C = np.zeros(n)
    C[-1] = -1.0
    return P, B, C


def eval_parametric(model: ParametricBarycentricModel, xi, rho, method: str = "block") -> complex:
    """Evaluate the surface by the block resolvent (default) or the ratio form.

    At support points the interpolated value is used through the ratio form.
    """
    _, at_l = _weights(complex(xi), model.lam)
    _, at_p = _weights(float(rho), model.pis)
    if method == "ratio" or at_l or at_p:
        return complex(_ratio(model, xi, rho))
    if method != "block":
        raise ValueError(f"unknown method {method!r}")
    P, B, C = block_matrices(model, complex(xi), float(rho))
    try:
        lu = spla.lu_factor(P, check_finite=True)
    except (ValueError, np.linalg.LinAlgError):
        raise DenominatorZero(f"singular block matrix at ({xi}, {rho})") from None
    if np.min(np.abs(np.diag(lu[0]))) <= 1e-14 * np.max(np.abs(P)):
        raise DenominatorZero(f"singular block matrix at ({xi}, {rho})")
    return complex(C @ spla.lu_solve(lu, B))


def fit_parametric(grid: ParamGrid, tol: float = DEFAULT_TOL,
                   orders: tuple[int, int] | None = None) -> ParametricBarycentricModel:
    """Order detection, assembly and null-space coefficients in one call."""
    r, q = orders or detect_orders(grid, tol)
    asm = assemble_2d(grid, (r, q))
    c = barycentric_coeffs(asm.matrix, (r + 1, q + 1), tol)
    return ParametricBarycentricModel(asm.lam, asm.pis, c, asm.w, (r, q))


def fit_parametric_real(grid: ParamGrid, tol: float = DEFAULT_TOL,
                        orders: tuple[int, int] | None = None) -> ParametricBarycentricModel:
    """Real-arithmetic variant for conjugate-closed frequency grids.

    Frequency support consists of whole conjugate pairs (so ``r + 1`` is
    rounded up to even when needed). Row pairs and column pairs of the
    stacked matrix are combined with the same unitary blocks as in the 1-D
    case, which makes the matrix real and gives real coefficients c_hat with
    ``c = (T kron I) c_hat``.
    """
    r, q = orders or detect_orders(grid, tol)
    z = grid.z
    nb = r + 1
    if any(abs(x.imag) <= 1e-12 * max(abs(x), 1) for x in z[:nb]):
        raise NotConjugateClosed("real variant needs a grid of conjugate pairs")
    nb += nb % 2
    mb = q + 1
    asm = assemble_2d(grid, (r, q), support=(nb, mb))
    lam, mu = asm.lam, asm.mu
    if not (np.allclose(lam[1::2], np.conj(lam[0::2])) and mu.size % 2 == 0
            and np.allclose(mu[1::2], np.conj(mu[0::2]))):
        raise NotConjugateClosed("frequency grid is not conjugate closed")
    ml, nl = asm.nus.size, mu.size
    Tc = np.kron(spla.block_diag(*[_T2] * (nb // 2)), np.eye(mb))
    Sl = _T2.conj().T
    # row transforms: L_lam rows pair (i, l) with (i', l); L_pi rows (k, j) pair over j; L_2 rows (j, l) pair over j
    R1 = np.kron(spla.block_diag(*[Sl] * (nb // 2)), np.eye(ml))
    R2 = np.kron(np.eye(mb), spla.block_diag(*[Sl] * (nl // 2)))
    R3 = np.kron(spla.block_diag(*[Sl] * (nl // 2)), np.eye(ml))
    Rt = spla.block_diag(R1, R2, R3)
    Mr = Rt @ asm.matrix @ Tc
    scale = max(np.max(np.abs(Mr)), 1e-300)
    if np.max(np.abs(Mr.imag)) > 1e-9 * scale:
        raise NotConjugateClosed("data are not conjugate symmetric")
    deficiency = (nb - r) * (mb - q)
    chat = barycentric_coeffs(Mr.real, (nb * mb,), tol, deficiency=deficiency).real
    c = _normalize(Tc @ chat).reshape(nb, mb)
    return ParametricBarycentricModel(lam, asm.pis, c, asm.w, (r, q))


def model_to_dict(model: ParametricBarycentricModel) -> dict:
    enc = lambda a: [[float(v.real), float(v.imag)] for v in np.ravel(a)]
    return {"type": "parametric", "orders": list(model.orders), "lambda": enc(model.lam),
            "pi": [float(x) for x in model.pis], "c": enc(model.c), "w": enc(model.w),
            "shape": list(model.c.shape)}


def model_from_dict(d: dict) -> ParametricBarycentricModel:
    dec = lambda a: np.array([x[0] + 1j * x[1] for x in a])
    shape = tuple(d["shape"])
    return ParametricBarycentricModel(dec(d["lambda"]), np.array(d["pi"], dtype=float),
                                      dec(d["c"]).reshape(shape), dec(d["w"]).reshape(shape),
                                      tuple(d["orders"]))
