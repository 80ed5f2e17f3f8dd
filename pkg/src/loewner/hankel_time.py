"""Discrete-time identification from input/output samples.

Markov parameters, Hankel realizations, the projected pole pencil and
Backward Euler conversions between continuous and discrete descriptor models.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as spla

from .errors import (
    InsufficientData,
    InsufficientExcitation,
    OutOfRange,
    PencilNotRegular,
    RankTooLarge,
    SingularStep,
    SingularTransform,
    ZeroLeadingInput,
)
from .model_core import (
    RCOND_TOL,
    DescriptorModel,
    TimeSeries,
    _frozen,
    pencil_eigenvalues,
    rcond,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class HankelPair:
    U0: np.ndarray
    U1: np.ndarray
    Y0: np.ndarray
    Y1: np.ndarray


@dataclass(frozen=True, eq=False)
class MarkovSequence:
    """h_0 .. h_K stored as an array of shape (K+1, p, m)."""

    h: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        if h.ndim == 1:
            h = h[:, None, None]
        if h.shape[0] < 1:
            raise InsufficientData("empty Markov sequence")
        object.__setattr__(self, "h", _frozen(h))

    def __len__(self):
        return self.h.shape[0]

    @property
    def siso(self) -> np.ndarray:
        return self.h[:, 0, 0]


def _scalar_seq(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 2:
        if x.shape[1] != 1:
            raise InsufficientExcitation("Hankel realization is single-input single-output")
        x = x[:, 0]
    return x


def hankel(x, k: int, M: int, L: int) -> np.ndarray:
    """M x L Hankel matrix with entry (a, b) = x[k + a + b]."""
    x = _scalar_seq(x)
    if k < 0 or k + M + L - 1 > x.size:
        raise OutOfRange(f"Hankel block k={k}, M={M}, L={L} needs {k + M + L - 1} samples, have {x.size}")
    return spla.hankel(x[k:k + M], x[k + M - 1:k + M + L - 1])


def build_hankel(series: TimeSeries, k: int, M: int, L: int) -> HankelPair:
    """U_k, U_{k+1}, Y_k, Y_{k+1}; the shifted pair needs k + M + L samples."""
    if series.y is None:
        raise InsufficientData("series carries no output")
    N = len(series)
    if k + M + L > N:
        raise OutOfRange(f"need k + M + L <= {N} for the shifted blocks")
    u, y = series.u, series.y
    return HankelPair(hankel(u, k, M, L), hankel(u, k + 1, M, L), hankel(y, k, M, L), hankel(y, k + 1, M, L))


def recover_markov(u, y, n: int) -> MarkovSequence:
    """Solve the lower-triangular Toeplitz system for h_0..h_n.

    ``u`` of shape (N,) or (N, 1) with ``y`` of shape (N,) or (N, p). A batch
    of experiments may be given as ``u`` (E, N, m) and ``y`` (E, N, p); then the
    leading inputs of all experiments must span R^m.
    """
    u = np.asarray(u, dtype=float)
    y = np.asarray(y, dtype=float)
    if u.ndim <= 2:
        u = u.reshape(1, u.shape[0], -1)
        y = y.reshape(1, y.shape[0], -1)
    ne, N, m = u.shape
    p = y.shape[2]
    if n + 1 > N:
        raise InsufficientData(f"need {n + 1} samples, have {N}")
    U0 = u[:, 0, :].T  # m x E
    if m == 1 and ne == 1:
        if u[0, 0, 0] == 0.0:
            raise ZeroLeadingInput("u_0 must be nonzero")
    elif np.linalg.matrix_rank(U0) < m:
        raise ZeroLeadingInput("leading inputs do not span the input space")
    h = np.zeros((n + 1, p, m))
    pinv = np.linalg.pinv(U0)
    for t in range(n + 1):
        # y_t = sum_j h_j u_{t-j}
        past = np.einsum("jpm,ejm->pe", h[:t], u[:, t:0:-1, :]) if t else 0.0
        h[t] = (y[:, t, :].T - past) @ pinv
    return MarkovSequence(h)


def _siso(h) -> np.ndarray:
    if isinstance(h, MarkovSequence):
        if h.h.shape[1:] != (1, 1):
            raise InsufficientExcitation("Hankel realization is single-input single-output")
        return h.siso
    return np.asarray(h, dtype=float).ravel()


def _impulse_matrices(h: np.ndarray, n: int):
    if h.size < 2 * n + 1:
        raise InsufficientData(f"need {2 * n + 1} Markov parameters, have {h.size}")
    Et = spla.hankel(h[1:n + 1], h[n:2 * n])
    At = spla.hankel(h[2:n + 2], h[n + 1:2 * n + 1])
    Ct = h[1:n + 1].reshape(1, n)
    return Et, At, Ct.T.copy(), Ct, np.array([[h[0]]])


def realize_from_impulse(h, n: int, step: float = 1.0) -> DescriptorModel:
    """Order-n realization from Hankel matrices of Markov parameters.

    If the n x n Hankel matrix is numerically rank deficient (n above the
    true order) the pencil would be singular; the result is then projected
    onto the leading singular subspace of the numerical rank, with a warning.
    """
    hs = _siso(h)
    if n == 0:
        return DescriptorModel(np.zeros((0, 0)), np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)),
                               np.array([[hs[0]]]), h=step)
    mats = _impulse_matrices(hs, n)
    s = np.linalg.svd(mats[0], compute_uv=False)
    rk = int(np.sum(s > 1e-12 * s[0])) if s[0] > 0 else 0
    if rk < n:
        warnings.warn(f"Hankel matrix has numerical rank {rk} < n={n}; projecting", RuntimeWarning)
        return reduce_hankel(hs, n, rk, step) if rk else realize_from_impulse(hs, 0, step)
    return DescriptorModel(*mats, h=step)


def reduce_hankel(h, n: int, r: int, step: float = 1.0) -> DescriptorModel:
    """Project the order-n Hankel realization on its leading r singular vectors."""
    if r > n:
        raise RankTooLarge(f"r={r} exceeds n={n}")
    Et, At, Bt, Ct, Dt = _impulse_matrices(_siso(h), n)
    U, _, Vh = np.linalg.svd(Et)
    Y, X = U[:, :r], Vh[:r].T
    return DescriptorModel(Y.T @ Et @ X, Y.T @ At @ X, Y.T @ Bt, Ct @ X, Dt, h=step)


def hankel_singular_values(h, n: int) -> np.ndarray:
    Et = _impulse_matrices(_siso(h), n)[0]
    s = np.linalg.svd(Et, compute_uv=False)
    return s / s[0]


# ---------------------------------------------------------------- pencil from I/O


def _projected(u, y, n, M, L, k):
    u, y = _scalar_seq(u), _scalar_seq(y)
    if L is None:
        L = 2 * n + 4
    if M is None:
        M = L + n + 2
    if k + M + L > u.size:
        raise OutOfRange(f"need k + M + L <= {u.size} samples")
    U0 = hankel(u, k, M, L)
    Y0 = hankel(y, k, M, L)
    Y1 = hankel(y, k + 1, M, L)
    Q, Rq, _ = spla.qr(U0, pivoting=True, mode="economic")
    d = np.abs(np.diag(Rq))
    rk = int(np.sum(d > 1e-12 * d[0])) if d.size and d[0] > 0 else 0
    if M < n + rk:
        raise InsufficientExcitation(f"M={M} is below n + rank(U0) = {n + rk}")
    Q = Q[:, :rk]
    Q0 = Y0 - Q @ (Q.T @ Y0)
    Q1 = Y1 - Q @ (Q.T @ Y1)
    return Q0, Q1


def realize_from_io(u, y, n: int, M: int | None = None, L: int | None = None,
                    k: int = 0, step: float = 1.0, seed: int = 0) -> DescriptorModel:
    """Minimal realization from one input/output record at rest.

    Rows of the projected Hankel pair are compressed by column-pivoted QR
    and the leading n columns are kept; a seeded random left projection is
    the fallback when that pencil is not regular.
    """
    hm = recover_markov(u, y, n)
    hs = hm.siso
    if n == 0:
        return realize_from_impulse(hs, 0, step)
    Q0, Q1 = _projected(u, y, n, M, L, k)
    s0 = np.linalg.svd(Q0, compute_uv=False)
    if s0.size < n or s0[n - 1] <= 1e-12 * s0[0]:
        raise InsufficientExcitation("projected output Hankel matrix has rank below n")
    _, _, piv = spla.qr(Q0.T, pivoting=True)
    rows = np.sort(piv[:n])
    candidates = [(Q0[rows][:, :n], Q1[rows][:, :n])]
    rng = np.random.default_rng(seed)
    Yr = rng.standard_normal((Q0.shape[0], n))
    candidates.append((Yr.T @ Q0[:, :n], Yr.T @ Q1[:, :n]))
    for Et, At in candidates:
        if _regular(Et, At):
            Bt = Et[:, :1].copy()
            Ct = hs[1:n + 1].reshape(1, n)
            return DescriptorModel(Et, At, Bt, Ct, np.array([[hs[0]]]), h=step)
    raise PencilNotRegular("no regular n x n compression found")


def _regular(E, A, trials: int = 3) -> bool:
    if rcond(E) < RCOND_TOL:
        return False
    rng = np.random.default_rng(1)
    return all(rcond(z * E - A) > RCOND_TOL for z in rng.standard_normal(trials) + 1j * rng.standard_normal(trials))


def pole_pencil(u, y, n: int, M: int | None = None, L: int | None = None, k: int = 0,
                tol: float = 1e-10) -> np.ndarray:
    """Finite generalized eigenvalues of the projected pencil (Q1, Q0).

    The pencil is compressed to its numerical rank with the SVD bases of
    [Q0, Q1] and [Q0; Q1].
    """
    Q0, Q1 = _projected(u, y, n, M, L, k)
    Ur, s, _ = np.linalg.svd(np.hstack([Q0, Q1]))
    if s.size == 0 or s[0] == 0:
        return np.zeros(0, dtype=complex)
    rk = int(np.sum(s > tol * s[0]))
    X = np.linalg.svd(np.vstack([Q0, Q1]))[2][:rk].T
    Y = Ur[:, :rk]
    ev = pencil_eigenvalues(Y.T @ Q1 @ X, Y.T @ Q0 @ X)
    fin = ev[np.isfinite(ev)]
    return fin[np.argsort(-np.abs(fin))]


# ---------------------------------------------------------------- conversions


def discretize_backward_euler(model: DescriptorModel, h: float) -> DescriptorModel:
    """Exact descriptor form of the implicit Euler recursion.

    With F = E - hA the recursion F x[k+1] = E x[k] + h B u[k+1] has transfer
    H_c((z - 1)/(h z)), realized as (F, E, hB, C F^-1 E, D + h C F^-1 B).
    """
    if model.discrete:
        raise ValueError("model is already discrete")
    F = model.E - h * model.A
    if rcond(F) < RCOND_TOL:
        raise SingularStep(f"E - hA is singular for h={h}")
    lu = spla.lu_factor(F)
    FiE = spla.lu_solve(lu, model.E)
    FiB = spla.lu_solve(lu, model.B)
    return DescriptorModel(F, model.E, h * model.B, model.C @ FiE, model.D + h * model.C @ FiB, h=h)


def to_continuous_bilinear(model: DescriptorModel, h: float | None = None) -> DescriptorModel:
    """Inverse of :func:`discretize_backward_euler` (s = (z - 1)/(h z)).

    Gives (hA, A - E, B, C A^-1 E, D - C A^-1 B) in terms of the discrete matrices.
    """
    h = model.h if h is None else h
    if h is None:
        raise ValueError("step size required")
    Ad, Ed = model.A, model.E
    if model.n and rcond(Ad) < RCOND_TOL:
        raise SingularTransform("discrete A is singular; no inverse Backward Euler map")
    if model.n == 0:
        return DescriptorModel(Ed, Ad, model.B, model.C, model.D)
    lu = spla.lu_factor(Ad)
    return DescriptorModel(h * Ad, Ad - Ed, model.B, model.C @ spla.lu_solve(lu, Ed),
                           model.D - model.C @ spla.lu_solve(lu, model.B))
