"""Bilinear Loewner framework (SISO).

Kernels are the generalized transfer functions
``H_l(s_1..s_l) = C Phi(s_1) N ... N Phi(s_l) B`` with ``Phi(s) = (sE - A)^-1``.
Data are collected along right chains (lam_i, ..., lam_1) and left chains
(mu_1, ..., mu_j); every needed kernel value has the form
``H(mu_1..mu_j, lam_i..lam_1)`` with either part possibly empty.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from .errors import (
    CoincidentPoints,
    DimensionMismatch,
    InsufficientData,
    RankTooLarge,
    SingularLoewner,
    UnsupportedTruncation,
)
from .model_core import (
    RCOND_TOL,
    BilinearModel,
    _frozen,
    rcond,
    resolvent_solve,
)


@dataclass(frozen=True, eq=False)
class QuadraticBilinearSpec:
    """``x' = F1 x + F2 (x kron x) + (G0 + G1 x) u``, ``y = C x``."""

    F1: np.ndarray
    F2: np.ndarray
    G0: np.ndarray
    G1: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        F1 = np.atleast_2d(np.asarray(self.F1, dtype=float))
        n = F1.shape[0]
        F2 = np.asarray(self.F2, dtype=float).reshape(n, n * n)
        G0 = np.asarray(self.G0, dtype=float).reshape(n)
        G1 = np.asarray(self.G1, dtype=float).reshape(n, n)
        C = np.asarray(self.C, dtype=float).reshape(n)
        for name, val in zip(("F1", "F2", "G0", "G1", "C"), (F1, F2, G0, G1, C)):
            object.__setattr__(self, name, _frozen(val))

    @property
    def n(self) -> int:
        return self.F1.shape[0]

    def rhs(self, x, u):
        return self.F1 @ x + self.F2 @ np.kron(x, x) + (self.G0 + self.G1 @ x) * u


def carleman(spec: QuadraticBilinearSpec, N: int = 2) -> BilinearModel:
    """Second-order Carleman bilinearization on the state (x, x kron x)."""
    if N != 2:
        raise UnsupportedTruncation("only the quadratic truncation N=2 is supported")
    n = spec.n
    I = np.eye(n)
    F1, F2, G0, G1 = spec.F1, spec.F2, spec.G0[:, None], spec.G1
    A = np.block([[F1, F2], [np.zeros((n * n, n)), np.kron(F1, I) + np.kron(I, F1)]])
    Nm = np.block([[G1, np.zeros((n, n * n))],
                   [np.kron(G0, I) + np.kron(I, G0), np.kron(G1, I) + np.kron(I, G1)]])
    B = np.concatenate([spec.G0, np.zeros(n * n)])
    C = np.concatenate([spec.C, np.zeros(n * n)])
    return BilinearModel(np.eye(n + n * n), A, Nm, B, C)


def eval_generalized_tf(model: BilinearModel, points) -> complex:
    """H_l at ``points = (s_1, ..., s_l)``."""
    pts = list(np.atleast_1d(points))
    x = resolvent_solve(model.E, model.A, pts[-1], model.B.astype(complex))
    for s in reversed(pts[:-1]):
        x = resolvent_solve(model.E, model.A, s, model.N @ x)
    return complex(model.C @ x)


class Kernel(Protocol):
    def __call__(self, left: tuple, right: tuple) -> complex: ...


class ModelKernel:
    """Kernel oracle backed by a bilinear model, caching chain products.

    ``left`` row vectors C Phi(mu_1) N ... N Phi(mu_j) and ``right`` column
    vectors Phi(lam_i) N ... N Phi(lam_1) B are memoized per chain.
    """

    def __init__(self, model: BilinearModel):
        self.model = model
        self._l: dict[tuple, np.ndarray] = {}
        self._r: dict[tuple, np.ndarray] = {}

    def _left(self, pts: tuple) -> np.ndarray:
        if pts in self._l:
            return self._l[pts]
        M = self.model
        prev = M.C.astype(complex) if len(pts) == 1 else self._left(pts[:-1]) @ M.N
        P = pts[-1] * M.E - M.A
        if rcond(P) < RCOND_TOL:
            raise SingularLoewner(f"point {pts[-1]} is a pole")
        v = np.linalg.solve(P.T, prev)
        self._l[pts] = v
        return v

    def _right(self, pts: tuple) -> np.ndarray:
        if pts in self._r:
            return self._r[pts]
        M = self.model
        prev = M.B.astype(complex) if len(pts) == 1 else M.N @ self._right(pts[1:])
        P = pts[0] * M.E - M.A
        if rcond(P) < RCOND_TOL:
            raise SingularLoewner(f"point {pts[0]} is a pole")
        v = np.linalg.solve(P, prev)
        self._r[pts] = v
        return v

    def __call__(self, left: tuple, right: tuple) -> complex:
        left, right = tuple(left), tuple(right)
        if not left and not right:
            raise ValueError("empty kernel argument")
        if not left:
            return complex(self.model.C @ self._right(right))
        if not right:
            return complex(self._left(left) @ self.model.B)
        return complex(self._left(left) @ self.model.N @ self._right(right))


def table_kernel(table: dict[tuple, complex]) -> Kernel:
    """Kernel backed by a lookup of measured values keyed by point tuples."""

    def k(left, right):
        key = tuple(complex(z) for z in tuple(left) + tuple(right))
        try:
            return table[key]
        except KeyError:
            raise InsufficientData(f"no kernel value for points {key}") from None

    return k


def flat_kernel(fn: Callable[[tuple], complex]) -> Kernel:
    """Adapt a function of the concatenated point tuple to the kernel protocol."""
    return lambda left, right: fn(tuple(left) + tuple(right))


@dataclass(frozen=True, eq=False)
class InterpolationTuples:
    """Right chain points lam_1..lam_k and left chain points mu_1..mu_k."""

    lam: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=complex).ravel()
        mu = np.asarray(self.mu, dtype=complex).ravel()
        if lam.size != mu.size or lam.size == 0:
            raise DimensionMismatch("need as many left as right points")
        allp = np.concatenate([lam, mu])
        if np.unique(allp).size != allp.size:
            raise CoincidentPoints("interpolation points must be pairwise distinct")
        object.__setattr__(self, "lam", _frozen(lam))
        object.__setattr__(self, "mu", _frozen(mu))

    @property
    def k(self) -> int:
        return self.lam.size

    def right_chains(self) -> list[tuple]:
        """(lam_1), (lam_2, lam_1), ..."""
        return [tuple(self.lam[:i + 1][::-1]) for i in range(self.k)]

    def left_chains(self) -> list[tuple]:
        """(mu_1), (mu_1, mu_2), ..."""
        return [tuple(self.mu[:j + 1]) for j in range(self.k)]

    def matched(self) -> list[tuple[tuple, tuple]]:
        """The 2k + k^2 (left, right) tuples matched by the order-k interpolant."""
        lch, mch = self.right_chains(), self.left_chains()
        return [(m, ()) for m in mch] + [((), l) for l in lch] + [(m, l) for m in mch for l in lch]


@dataclass(frozen=True, eq=False)
class BilinearLoewnerSet:
    L: np.ndarray
    Ms: np.ndarray
    T: np.ndarray
    V: np.ndarray
    W: np.ndarray
    lam: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        for name in ("L", "Ms", "T", "V", "W", "lam", "mu"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def k(self) -> int:
        return self.L.shape[0]


def build_bilinear_set(kernel: Kernel, tuples, mu=None) -> BilinearLoewnerSet:
    """Assemble L, Ms, T, V, W from kernel values along the two chains.

    ``tuples`` is an :class:`InterpolationTuples`, or the right points with the
    left points passed as ``mu``.
    """
    if not isinstance(tuples, InterpolationTuples):
        tuples = InterpolationTuples(tuples, mu)
    lam, mu, k = tuples.lam, tuples.mu, tuples.k
    allp = np.concatenate([lam, mu])
    lch, mch = tuples.right_chains(), tuples.left_chains()
    V = np.array([kernel(mch[j], ()) for j in range(k)])
    W = np.array([kernel((), lch[i]) for i in range(k)])
    T = np.array([[kernel(mch[j], lch[i]) for i in range(k)] for j in range(k)])
    L = np.empty((k, k), dtype=complex)
    Ms = np.empty((k, k), dtype=complex)
    for j in range(k):
        for i in range(k):
            a = V[j] if i == 0 else T[j, i - 1]  # H(mu_1..mu_j, lam_{i-1}..lam_1)
            b = W[i] if j == 0 else T[j - 1, i]  # H(mu_1..mu_{j-1}, lam_i..lam_1)
            d = mu[j] - lam[i]
            L[j, i] = (a - b) / d
            Ms[j, i] = (mu[j] * a - lam[i] * b) / d
    if np.all(np.isreal(allp)) and all(np.allclose(x.imag, 0, atol=1e-14 * max(np.abs(x).max(), 1))
                                       for x in (L, Ms, T, V, W)):
        L, Ms, T, V, W = (x.real for x in (L, Ms, T, V, W))
    return BilinearLoewnerSet(L, Ms, T, V[:, None], W[None, :], lam, mu)


def factored_set(model: BilinearModel, lam, mu) -> BilinearLoewnerSet:
    """Same quantities from the generalized controllability/observability matrices."""
    lam = np.asarray(lam, dtype=complex).ravel()
    mu = np.asarray(mu, dtype=complex).ravel()
    Rm, Om = reachability_matrix(model, lam), observability_matrix(model, mu)
    E, A, Nm = model.E, model.A, model.N
    return BilinearLoewnerSet(-Om @ E @ Rm, -Om @ A @ Rm, Om @ Nm @ Rm, (Om @ model.B)[:, None],
                              (model.C @ Rm)[None, :], lam, mu)


def reachability_matrix(model: BilinearModel, lam) -> np.ndarray:
    cols = []
    x = None
    for i, s in enumerate(lam):
        rhs = model.B.astype(complex) if i == 0 else model.N @ x
        x = resolvent_solve(model.E, model.A, s, rhs)
        cols.append(x)
    return np.column_stack(cols)


def observability_matrix(model: BilinearModel, mu) -> np.ndarray:
    rows = []
    y = None
    for j, s in enumerate(mu):
        rhs = model.C.astype(complex) if j == 0 else y @ model.N
        y = resolvent_solve(model.E.T, model.A.T, s, rhs)
        rows.append(y)
    return np.vstack(rows)


def shift_matrices(k: int) -> tuple[np.ndarray, np.ndarray]:
    """Chain shifts: S_R moves column i-1 to i, S_L moves row j-1 to j."""
    S_R = np.eye(k, k=1)
    return S_R, S_R.T.copy()


def sylvester_residual(bset: BilinearLoewnerSet) -> float:
    """Relative residual of ``M L - L Lam = V R - Ld W + T S_R - S_L T``.

    Here ``R = e_1^T`` and ``Ld = e_1``.
    """
    k = bset.k
    S_R, S_L = shift_matrices(k)
    e1 = np.zeros(k)
    e1[0] = 1.0
    Lam, Mu = np.diag(bset.lam), np.diag(bset.mu)
    lhs = Mu @ bset.L - bset.L @ Lam
    rhs = bset.V @ e1[None, :] - e1[:, None] @ bset.W + bset.T @ S_R - S_L @ bset.T
    scale = sum(np.linalg.norm(x) for x in (Mu @ bset.L, bset.L @ Lam, bset.V, bset.W, bset.T))
    return float(np.linalg.norm(lhs - rhs) / scale) if scale else 0.0


def realize_bilinear(bset: BilinearLoewnerSet) -> BilinearModel:
    """Order-k interpolant (-L, -Ms, T, V, W)."""
    if rcond(bset.L) < RCOND_TOL:
        raise SingularLoewner("Loewner matrix is singular; reduce instead")
    return BilinearModel(-bset.L, -bset.Ms, bset.T, bset.V[:, 0], bset.W[0])


def bilinear_singular_values(bset: BilinearLoewnerSet) -> tuple[np.ndarray, np.ndarray]:
    s1 = np.linalg.svd(np.hstack([bset.L, bset.Ms]), compute_uv=False)
    s2 = np.linalg.svd(np.vstack([bset.L, bset.Ms]), compute_uv=False)
    return s1 / s1[0], s2 / s2[0]


def reduce_bilinear(bset: BilinearLoewnerSet, r: int) -> BilinearModel:
    """Project all five matrices on the leading r singular vectors."""
    if not 1 <= r <= bset.k:
        raise RankTooLarge(f"r={r} outside [1, {bset.k}]")
    Y = np.linalg.svd(np.hstack([bset.L, bset.Ms]))[0][:, :r]
    X = np.linalg.svd(np.vstack([bset.L, bset.Ms]))[2][:r].conj().T
    Yh = Y.conj().T
    return BilinearModel(-Yh @ bset.L @ X, -Yh @ bset.Ms @ X, Yh @ bset.T @ X,
                         (Yh @ bset.V)[:, 0], (bset.W @ X)[0])


def interleaved_points(k: int, lo: float, hi: float, axis: str = "imag") -> tuple[np.ndarray, np.ndarray]:
    """2k log-spaced magnitudes dealt alternately to lam and mu.

    ``axis="imag"`` puts them on the imaginary axis, ``"real"`` on the
    positive real axis (real points keep the surrogate real).
    """
    mag = np.logspace(np.log10(lo), np.log10(hi), 2 * k)
    pts = 1j * mag if axis == "imag" else mag.astype(complex)
    return pts[0::2], pts[1::2]


def kernel_data(kernel: Kernel, tuples: InterpolationTuples) -> list[dict]:
    """Matched kernel values as ``{"order", "points", "value"}`` records."""
    out = []
    for left, right in tuples.matched():
        pts = list(left) + list(right)
        v = kernel(left, right)
        out.append({"order": len(pts), "points": [[float(z.real), float(z.imag)] for z in pts],
                    "value": [v.real, v.imag]})
    return out


def model_to_dict(model: BilinearModel) -> dict:
    cplx = model.field == "complex"
    enc = (lambda a: [[float(v.real), float(v.imag)] for v in np.ravel(a)]) if cplx else \
        (lambda a: [float(v) for v in np.ravel(a)])
    return {"type": "bilinear", "field": model.field, "n": model.n,
            **{k: enc(getattr(model, k)) for k in "EANBC"}}


def model_from_dict(d: dict) -> BilinearModel:
    n = int(d["n"])

    def dec(a, shape):
        a = np.asarray(a, dtype=float)
        if a.ndim == 2 and a.shape[-1] == 2:
            a = a[:, 0] + 1j * a[:, 1]
        return a.reshape(shape)

    return BilinearModel(dec(d["E"], (n, n)), dec(d["A"], (n, n)), dec(d["N"], (n, n)),
                         dec(d["B"], (n,)), dec(d["C"], (n,)))
