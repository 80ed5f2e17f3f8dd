"""Shared model types, transfer evaluation and time simulation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as spla
from scipy.linalg.lapack import get_lapack_funcs

from .errors import (
    ConflictingData,
    DimensionMismatch,
    InvalidModel,
    SchemaError,
    SingularE,
    SingularPencil,
)

RCOND_TOL = 1e-13
INF_TOL = 1e-10
# an index-k block at infinity splits by about eps**(1/k); this covers k = 2
INF_TOL_SCALED = 1e-6


def _frozen(a, dtype=None):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


def _as2d(a, rows=None, cols=None):
    a = np.asarray(a)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        if rows == 1:
            a = a.reshape(1, -1)
        else:
            a = a.reshape(-1, 1)
    return a


def rcond(M: np.ndarray) -> float:
    """Reciprocal 1-norm condition estimate via LU (LAPACK gecon)."""
    M = np.asarray(M)
    if M.size == 0:
        return 1.0
    if not np.all(np.isfinite(M)):
        return 0.0
    getrf, gecon = get_lapack_funcs(("getrf", "gecon"), (M,))
    anorm = np.linalg.norm(M, 1)
    if anorm == 0.0:
        return 0.0
    lu, _, info = getrf(M)
    if info > 0:
        return 0.0
    rc, _ = gecon(lu, anorm, norm="1")
    return float(rc)


def is_real_array(a, tol=0.0) -> bool:
    a = np.asarray(a)
    if not np.iscomplexobj(a):
        return True
    if a.size == 0:
        return True
    return bool(np.max(np.abs(a.imag)) <= tol * max(np.max(np.abs(a)), 1.0))


@dataclass(frozen=True, eq=False)
class DescriptorModel:
    """Descriptor realization ``E x' = A x + B u, y = C x + D u``.

    ``h`` is ``None`` for continuous time, otherwise the sampling step of a
    discrete-time model. ``field`` is inferred when omitted.
    """

    E: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray | None = None
    h: float | None = None
    field: str | None = None

    def __post_init__(self):
        A = np.asarray(self.A)
        n = A.shape[0] if A.ndim == 2 else int(A.size)
        E = np.asarray(self.E)
        if A.size != n * n or E.size != n * n:
            raise DimensionMismatch(f"E and A must both be {n} x {n}")
        A, E = A.reshape(n, n), E.reshape(n, n)
        B = _as2d(self.B)
        if B.shape[0] != n:
            if B.size == 0 and n == 0:
                B = B.reshape(0, max(B.shape[-1], 1))
            else:
                raise DimensionMismatch(f"B has {B.shape[0]} rows, expected {n}")
        C = _as2d(self.C, rows=1)
        if C.shape[1] != n:
            if C.size == 0 and n == 0:
                C = C.reshape(max(C.shape[0], 1), 0)
            else:
                raise DimensionMismatch(f"C has {C.shape[1]} columns, expected {n}")
        p, m = C.shape[0], B.shape[1]
        D = np.zeros((p, m)) if self.D is None else _as2d(self.D)
        if D.shape != (p, m):
            raise DimensionMismatch(f"D has shape {D.shape}, expected {(p, m)}")
        if self.h is not None and not self.h > 0:
            raise InvalidModel("sampling step must be positive")
        mats = (E, A, B, C, D)
        real = all(is_real_array(x) for x in mats)
        fld = self.field or ("real" if real else "complex")
        if fld not in ("real", "complex"):
            raise InvalidModel(f"unknown scalar field {fld!r}")
        if fld == "real":
            if not real:
                raise InvalidModel("real model has entries with nonzero imaginary part")
            mats = tuple(np.real(x).astype(float) for x in mats)
        else:
            mats = tuple(np.asarray(x, dtype=complex) for x in mats)
        for name, val in zip("EABCD", mats):
            object.__setattr__(self, name, _frozen(val))
        object.__setattr__(self, "field", fld)
        if self.h is not None:
            object.__setattr__(self, "h", float(self.h))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @property
    def discrete(self) -> bool:
        return self.h is not None

    def replace(self, **kw) -> "DescriptorModel":
        args = dict(E=self.E, A=self.A, B=self.B, C=self.C, D=self.D, h=self.h)
        args.update(kw)
        return DescriptorModel(**args)

    def __call__(self, xi):
        return eval_transfer(self, xi)


@dataclass(frozen=True, eq=False)
class FrequencySample:
    point: complex
    response: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", complex(self.point))
        object.__setattr__(self, "response", _frozen(_as2d(self.response), complex))


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled input (and optionally output) sequences.

    ``u`` is stored as an (N, m) array and ``y`` as (N, p).
    """

    step: float
    u: np.ndarray
    y: np.ndarray | None = None
    start_index: int = 0

    def __post_init__(self):
        if not self.step > 0:
            raise InvalidModel("time step must be positive")
        u = np.asarray(self.u, dtype=float)
        if u.ndim == 1:
            u = u[:, None]
        object.__setattr__(self, "u", _frozen(u))
        if self.y is not None:
            y = np.asarray(self.y, dtype=float)
            if y.ndim == 1:
                y = y[:, None]
            if y.shape[0] != u.shape[0]:
                raise DimensionMismatch("u and y must have the same length")
            object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "step", float(self.step))

    def __len__(self):
        return self.u.shape[0]

    @property
    def t(self) -> np.ndarray:
        return (self.start_index + np.arange(len(self))) * self.step


@dataclass(frozen=True, eq=False)
class BilinearModel:
    """SISO bilinear system ``E x' = A x + N x u + B u, y = C x``."""

    E: np.ndarray
    A: np.ndarray
    N: np.ndarray
    B: np.ndarray
    C: np.ndarray
    field: str | None = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A))
        n = A.shape[0]
        E = np.asarray(self.E).reshape(n, n)
        Nm = np.asarray(self.N).reshape(n, n)
        B = np.asarray(self.B).reshape(n)
        C = np.asarray(self.C).reshape(n)
        if A.shape != (n, n):
            raise DimensionMismatch("A must be square")
        mats = (E, A, Nm, B, C)
        real = all(is_real_array(x) for x in mats)
        fld = self.field or ("real" if real else "complex")
        if fld == "real":
            if not real:
                raise InvalidModel("real model has entries with nonzero imaginary part")
            mats = tuple(np.real(x).astype(float) for x in mats)
        else:
            mats = tuple(np.asarray(x, dtype=complex) for x in mats)
        if rcond(mats[0]) < 1e-13:
            raise SingularE("E is numerically singular")
        for name, val in zip("EANBC", mats):
            object.__setattr__(self, name, _frozen(val))
        object.__setattr__(self, "field", fld)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def linear_part(self) -> DescriptorModel:
        return DescriptorModel(self.E, self.A, self.B[:, None], self.C[None, :])


# ---------------------------------------------------------------- evaluation


def resolvent_solve(E, A, xi, rhs):
    """Solve ``(xi E - A) X = rhs``; raise SingularPencil near a pole."""
    P = xi * E - A
    if P.size == 0:
        return np.zeros_like(rhs, dtype=complex)
    if rcond(P) < RCOND_TOL:
        raise SingularPencil(f"xi*E - A is singular at xi={xi}")
    return np.linalg.solve(P, rhs)


def eval_transfer(model: DescriptorModel, xi) -> np.ndarray:
    """Evaluate ``C (xi E - A)^{-1} B + D`` at a scalar point (p x m result)."""
    xi = complex(xi)
    if model.n == 0:
        return np.array(model.D, dtype=complex)
    X = resolvent_solve(model.E, model.A, xi, model.B.astype(complex))
    return model.C @ X + model.D


def freqresp(model: DescriptorModel, points) -> np.ndarray:
    """Transfer values at many points, shape (k, p, m)."""
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    out = np.empty((pts.size, model.p, model.m), dtype=complex)
    for k, z in enumerate(pts):
        out[k] = eval_transfer(model, z)
    return out


def transfer_siso(model: DescriptorModel, points) -> np.ndarray:
    return freqresp(model, points)[:, 0, 0]


def pencil_eigenvalues(A, E, inf_tol: float = INF_TOL, scaled_tol: float = INF_TOL_SCALED) -> np.ndarray:
    """Generalized eigenvalues of (A, E), infinite ones returned as ``inf``.

    Uses the homogeneous (alpha, beta) form so that infinite eigenvalues are
    detected rather than by overflow. An eigenvalue is infinite when
    ``|beta| <= inf_tol * |alpha|`` (E is noise next to A) or when
    ``|beta| ||A|| <= scaled_tol * |alpha| ||E||`` (a split multiple
    infinite eigenvalue, judged independently of the scaling of A and E).
    """
    A = np.atleast_2d(A)
    E = np.atleast_2d(E)
    if A.size == 0:
        return np.zeros(0, dtype=complex)
    ab = spla.eig(A, E, right=False, homogeneous_eigvals=True)
    alpha, beta = ab[0], ab[1]
    out = np.empty(alpha.shape, dtype=complex)
    na, ne = np.linalg.norm(A) or 1.0, np.linalg.norm(E)
    inf = (np.abs(beta) <= inf_tol * np.abs(alpha)) | (np.abs(beta) * na <= scaled_tol * np.abs(alpha) * ne)
    out[inf] = np.inf
    out[~inf] = alpha[~inf] / beta[~inf]
    return out


def poles(model: DescriptorModel) -> np.ndarray:
    ev = pencil_eigenvalues(model.A, model.E)
    return ev[np.isfinite(ev)]


# ---------------------------------------------------------------- simulation


def simulate_discrete(model: DescriptorModel, series: TimeSeries, x0=None) -> TimeSeries:
    """Run ``E x[k+1] = A x[k] + B u[k]``, ``y[k] = C x[k] + D u[k]``."""
    if series.y is not None:
        raise InvalidModel("input series must not carry an output")
    if series.u.shape[1] != model.m:
        raise DimensionMismatch(f"input has {series.u.shape[1]} channels, model {model.m}")
    n = model.n
    x = np.zeros(n, dtype=model.A.dtype) if x0 is None else np.asarray(x0, dtype=model.A.dtype).copy()
    u = series.u
    if n == 0:
        y = u @ model.D.T
        return TimeSeries(series.step, u, np.real(y), series.start_index)
    if rcond(model.E) < RCOND_TOL:
        raise SingularE("E is numerically singular")
    Ei = np.linalg.inv(model.E)
    F, G = Ei @ model.A, Ei @ model.B
    C, D = model.C, model.D
    y = np.empty((len(series), model.p), dtype=np.result_type(F, C, float))
    for k in range(len(series)):
        y[k] = C @ x + D @ u[k]
        x = F @ x + G @ u[k]
    if np.iscomplexobj(y):
        y = y.real
    return TimeSeries(series.step, u, y, series.start_index)


def impulse_response(model: DescriptorModel, count: int) -> np.ndarray:
    """Markov parameters h_0..h_{count-1} of a discrete model, shape (count, p, m)."""
    Ei = np.linalg.inv(model.E)
    F, G = Ei @ model.A, Ei @ model.B
    h = np.empty((count, model.p, model.m), dtype=np.result_type(F, float))
    h[0] = model.D
    X = G
    for k in range(1, count):
        h[k] = model.C @ X
        X = F @ X
    return h


def simulate_bilinear(model: BilinearModel, series: TimeSeries, scheme: str = "rk4") -> TimeSeries:
    """Fixed-step integration of the bilinear ODE from rest.

    ``scheme`` is ``"rk4"`` (classical Runge-Kutta with the input linearly
    interpolated at half steps) or ``"euler"`` (explicit).
    """
    Ei = np.linalg.inv(model.E)
    A, Nm, B = Ei @ model.A, Ei @ model.N, Ei @ model.B
    u = series.u[:, 0]
    h = series.step
    f = lambda x, w: A @ x + (Nm @ x) * w + B * w
    x = np.zeros(model.n, dtype=A.dtype)
    y = np.empty(len(u), dtype=A.dtype)
    y[0] = model.C @ x
    for k in range(len(u) - 1):
        u0, u1 = u[k], u[k + 1]
        if scheme == "rk4":
            um = 0.5 * (u0 + u1)
            k1 = f(x, u0)
            k2 = f(x + 0.5 * h * k1, um)
            k3 = f(x + 0.5 * h * k2, um)
            k4 = f(x + h * k3, u1)
            x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        elif scheme == "euler":
            x = x + h * f(x, u0)
        else:
            raise InvalidModel(f"unknown integrator {scheme!r}")
        y[k + 1] = model.C @ x
    if np.iscomplexobj(y):
        y = y.real
    return TimeSeries(series.step, series.u, y, series.start_index)


# ---------------------------------------------------------------- samples


def conjugate_close(samples: Sequence[FrequencySample], tol: float = 1e-10) -> list[FrequencySample]:
    """Add the mirror sample (conj z, conj H) for every sample; idempotent.

    Output is sorted by imaginary part, then real part.
    """
    pool: dict[tuple, FrequencySample] = {}

    def key(z):
        return (round(z.imag, 12) + 0.0, round(z.real, 12) + 0.0)

    def add(s: FrequencySample):
        k = key(s.point)
        if k in pool:
            other = pool[k].response
            scale = max(np.max(np.abs(other)), np.max(np.abs(s.response)), 1e-300)
            if other.shape != s.response.shape or np.max(np.abs(other - s.response)) > tol * scale:
                raise ConflictingData(f"conflicting responses at {s.point}")
        else:
            pool[k] = s

    for s in samples:
        add(s)
    for s in list(pool.values()):
        add(FrequencySample(np.conj(s.point), np.conj(s.response)))
    return [pool[k] for k in sorted(pool)]


def samples_from_function(fun: Callable, points) -> list[FrequencySample]:
    return [FrequencySample(z, fun(z)) for z in np.atleast_1d(points)]


# ---------------------------------------------------------------- JSON


def _enc(M, cplx):
    M = np.asarray(M)
    if cplx:
        return [[[float(v.real), float(v.imag)] for v in row] for row in np.atleast_2d(M)]
    return [[float(v) for v in row] for row in np.atleast_2d(M)]


def _dec(obj, shape=None):
    a = np.asarray(obj, dtype=float)
    if a.ndim == 3 and a.shape[-1] == 2:
        a = a[..., 0] + 1j * a[..., 1]
    if shape is not None:
        a = a.reshape(shape)
    return a


def model_to_dict(model: DescriptorModel) -> dict:
    cplx = model.field == "complex"
    time = "continuous" if model.h is None else {"kind": "discrete", "h": model.h}
    d = {"type": "descriptor", "field": model.field, "time": time}
    for name in "EABCD":
        M = getattr(model, name)
        d[name] = _enc(M, cplx) if M.size else []
        d[name + "_shape"] = list(M.shape)
    return d


def model_from_dict(d: dict) -> DescriptorModel:
    try:
        time = d.get("time", "continuous")
        h = None
        if isinstance(time, dict):
            h = float(time["h"])
        elif time != "continuous":
            raise SchemaError(f"unknown time kind {time!r}")
        mats = {}
        for name in "EABCD":
            shape = d.get(name + "_shape")
            mats[name] = _dec(d[name], shape)
        return DescriptorModel(h=h, field=d.get("field"), **mats)
    except KeyError as exc:
        raise SchemaError(f"model JSON lacks key {exc}") from None


def model_to_json(model: DescriptorModel) -> str:
    return json.dumps(model_to_dict(model), indent=1)


def model_from_json(text: str) -> DescriptorModel:
    return model_from_dict(json.loads(text))
