"""Loewner pencil construction, order detection, projection and realification."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as spla

from .errors import (
    CoincidentPoints,
    DimensionMismatch,
    NotConjugateClosed,
    RankTooLarge,
    TooFewPoints,
)
from .model_core import (
    DescriptorModel,
    FrequencySample,
    SingularPencil,
    _frozen,
    eval_transfer,
    is_real_array,
    pencil_eigenvalues,
)

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
_T2 = np.array([[1.0, -1.0j], [1.0, 1.0j]]) / np.sqrt(2.0)


# ------------------------------------------------------------------ data


@dataclass(frozen=True, eq=False)
class TangentialDataSet:
    """Right data (lam, R, W) and left data (mu, L, V).

    Shapes: ``R`` m x nr, ``W`` p x nr, ``L`` nl x p, ``V`` nl x m. ``Lam`` and
    ``Mu`` are the (possibly block diagonal, after realification) point
    matrices; ``lam``/``mu`` always hold the underlying complex points.
    """

    lam: np.ndarray
    R: np.ndarray
    W: np.ndarray
    mu: np.ndarray
    L: np.ndarray
    V: np.ndarray
    Lam: np.ndarray | None = None
    Mu: np.ndarray | None = None
    source: "TangentialDataSet | None" = None

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=complex).ravel()
        mu = np.asarray(self.mu, dtype=complex).ravel()
        R, W = np.atleast_2d(self.R), np.atleast_2d(self.W)
        L, V = np.atleast_2d(self.L), np.atleast_2d(self.V)
        nr, nl = lam.size, mu.size
        if R.shape[1] != nr or W.shape[1] != nr:
            raise DimensionMismatch("R and W need one column per right point")
        if L.shape[0] != nl or V.shape[0] != nl:
            raise DimensionMismatch("L and V need one row per left point")
        if R.shape[0] != V.shape[1] or W.shape[0] != L.shape[1]:
            raise DimensionMismatch("inconsistent input/output dimensions")
        if np.unique(lam).size != nr or np.unique(mu).size != nl:
            raise CoincidentPoints("repeated support points")
        if nr and nl and np.min(np.abs(mu[:, None] - lam[None, :])) == 0.0:
            raise CoincidentPoints("a left point coincides with a right point")
        Lam = np.diag(lam) if self.Lam is None else np.asarray(self.Lam)
        Mu = np.diag(mu) if self.Mu is None else np.asarray(self.Mu)
        for name, val in (("lam", lam), ("mu", mu), ("R", R), ("W", W), ("L", L),
                          ("V", V), ("Lam", Lam), ("Mu", Mu)):
            object.__setattr__(self, name, _frozen(val))

    @property
    def m(self) -> int:
        return self.R.shape[0]

    @property
    def p(self) -> int:
        return self.W.shape[0]

    @property
    def points(self) -> np.ndarray:
        return np.concatenate([self.lam, self.mu])

    @property
    def structured(self) -> bool:
        """True when the point matrices are not diagonal (realified data)."""
        return self.source is not None

    @property
    def is_real(self) -> bool:
        return all(is_real_array(x) for x in (self.Lam, self.Mu, self.R, self.W, self.L, self.V))

    def scaled(self, c: complex) -> "TangentialDataSet":
        return TangentialDataSet(self.lam, self.R, c * self.W, self.mu, self.L, c * self.V,
                                 self.Lam, self.Mu, self.source)

    @classmethod
    def from_function(cls, H: Callable, lam, mu, R=None, L=None) -> "TangentialDataSet":
        """Sample ``H`` (returning p x m arrays) with the given directions.

        Missing directions default to ones (SISO) or cyclic unit vectors.
        """
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        mu = np.atleast_1d(np.asarray(mu, dtype=complex))
        H0 = np.atleast_2d(H(lam[0]))
        p, m = H0.shape
        if R is None:
            R = _cyclic(m, lam.size).T
        if L is None:
            L = _cyclic(p, mu.size)
        R, L = np.atleast_2d(R), np.atleast_2d(L)
        W = np.column_stack([np.atleast_2d(H(z)) @ R[:, i] for i, z in enumerate(lam)])
        V = np.vstack([L[j] @ np.atleast_2d(H(z)) for j, z in enumerate(mu)])
        return cls(lam, R, W, mu, L, V)


def _cyclic(dim: int, count: int) -> np.ndarray:
    """Rows are unit vectors e_0, e_1, ... cycling through ``dim``."""
    out = np.zeros((count, dim))
    out[np.arange(count), np.arange(count) % dim] = 1.0
    return out


def _units(points: np.ndarray, tol: float = 1e-12) -> list[list[int]]:
    """Group indices into conjugate pairs (negative imaginary first) or singletons."""
    used = set()
    units = []
    for k, z in enumerate(points):
        if k in used:
            continue
        used.add(k)
        scale = max(abs(z), 1.0)
        if abs(z.imag) <= tol * scale:
            units.append([k])
            continue
        mate = None
        for j in range(len(points)):
            if j not in used and abs(points[j] - np.conj(z)) <= tol * scale:
                mate = j
                break
        if mate is None:
            units.append([k])
        else:
            used.add(mate)
            units.append([k, mate] if z.imag < 0 else [mate, k])
    return units


def _units_in_order(points: np.ndarray, idx: list[int]) -> list[list[int]]:
    """Units among ``idx`` keeping the given order of first appearance."""
    sub = points[idx]
    return [[idx[k] for k in u] for u in sorted(_units(sub), key=min)]


def _unit_key(points, unit):
    z = points[unit[0]]
    im = abs(z.imag) if len(unit) == 2 else z.imag
    return (im, z.real)


def partition_data(
    samples: Sequence[FrequencySample],
    directions: str | tuple = "cyclic",
    right: Sequence[complex] | None = None,
    seed: int = 0,
) -> TangentialDataSet:
    """Split samples into right and left tangential data.

    Points are grouped into units (conjugate pairs or single points), sorted by
    (|imag|, real) and dealt alternately, starting with the right side. An
    explicit ``right`` list of points overrides the alternation; the right
    side then follows the given order.

    ``directions`` is ``"cyclic"`` (unit vectors), ``"ones"``, ``"random"`` (seeded
    Gaussian) or a tuple ``(R, L)`` of explicit direction arrays. Both members
    of a conjugate pair share one real direction.
    """
    samples = list(samples)
    if len(samples) < 2:
        raise TooFewPoints("at least two samples are required")
    pts = np.array([s.point for s in samples])
    if np.unique(pts).size != pts.size:
        raise CoincidentPoints("duplicated sample points")
    units = _units(pts)
    if right is None:
        units.sort(key=lambda u: _unit_key(pts, u))
        r_units, l_units = units[0::2], units[1::2]
    else:
        r_idx = []
        for z in right:
            z = complex(z)
            hit = np.flatnonzero(np.abs(pts - z) <= 1e-12 * max(abs(z), 1.0))
            if hit.size == 0:
                raise DimensionMismatch(f"right point {z} is not among the samples")
            r_idx.append(int(hit[0]))
        r_units = _units_in_order(pts, r_idx)
        taken = set(r_idx)
        rest = [k for k in range(pts.size) if k not in taken]
        l_units = sorted(_units_in_order(pts, rest), key=lambda u: _unit_key(pts, u))
    if not r_units or not l_units:
        raise TooFewPoints("both sides need at least one point")
    p, m = samples[0].response.shape
    rng = np.random.default_rng(seed)

    def dirs(count, dim, explicit):
        if explicit is not None:
            return np.atleast_2d(np.asarray(explicit))
        if directions == "cyclic":
            return _cyclic(dim, count)
        if directions == "random":
            d = rng.standard_normal((count, dim))
            return d / np.linalg.norm(d, axis=1, keepdims=True)
        if directions == "ones":
            return np.ones((count, dim))
        raise ValueError(f"unknown direction policy {directions!r}")

    Rx = Lx = None
    if isinstance(directions, tuple):
        Rx, Lx = directions
    rdir = dirs(len(r_units), m, Rx)
    ldir = dirs(len(l_units), p, Lx)

    lam, Rcols, Wcols = [], [], []
    for u_i, u in enumerate(r_units):
        for k in u:
            r = rdir[u_i]
            lam.append(pts[k])
            Rcols.append(r)
            Wcols.append(samples[k].response @ r)
    mu, Lrows, Vrows = [], [], []
    for u_j, u in enumerate(l_units):
        for k in u:
            l = ldir[u_j]
            mu.append(pts[k])
            Lrows.append(l)
            Vrows.append(l @ samples[k].response)
    return TangentialDataSet(np.array(lam), np.array(Rcols).T, np.array(Wcols).T,
                             np.array(mu), np.array(Lrows), np.array(Vrows))


# ------------------------------------------------------------------ pencil


@dataclass(frozen=True, eq=False)
class LoewnerPencil:
    """Loewner matrix ``L``, shifted Loewner matrix ``Ms`` and the data vectors."""

    L: np.ndarray
    Ms: np.ndarray
    V: np.ndarray
    W: np.ndarray
    data: TangentialDataSet

    def __post_init__(self):
        for name in ("L", "Ms", "V", "W"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def shape(self):
        return self.L.shape

    @property
    def is_real(self) -> bool:
        return all(is_real_array(x) for x in (self.L, self.Ms, self.V, self.W))


def build_pencil(data: TangentialDataSet) -> LoewnerPencil:
    """Divided differences for diagonal data; Sylvester solves otherwise."""
    lam, mu = data.lam, data.mu
    diff = mu[:, None] - lam[None, :]
    if np.any(diff == 0):
        raise CoincidentPoints("some left point equals a right point")
    if not data.structured:
        VR = data.V @ data.R
        LW = data.L @ data.W
        Lm = (VR - LW) / diff
        Mm = (mu[:, None] * VR - LW * lam[None, :]) / diff
    else:
        Lam, Mu = data.Lam, data.Mu
        rhs1 = data.V @ data.R - data.L @ data.W
        rhs2 = Mu @ data.V @ data.R - data.L @ data.W @ Lam
        Lm = spla.solve_sylvester(Mu, -Lam, rhs1)
        Mm = spla.solve_sylvester(Mu, -Lam, rhs2)
        if data.is_real:
            Lm, Mm = Lm.real, Mm.real
    return LoewnerPencil(Lm, Mm, np.array(data.V), np.array(data.W), data)


def sylvester_residual(pencil: LoewnerPencil) -> tuple[float, float]:
    """Relative Frobenius residuals of the two Sylvester identities."""
    d = pencil.data
    Lam, Mu = d.Lam, d.Mu
    L, Ms, V, W = pencil.L, pencil.Ms, pencil.V, pencil.W

    def rel(terms):
        res = np.linalg.norm(terms[0] - terms[1] - terms[2] + terms[3])
        scale = sum(np.linalg.norm(t) for t in terms)
        return float(res / scale) if scale > 0 else 0.0

    r1 = rel((Mu @ L, L @ Lam, V @ d.R, d.L @ W))
    r2 = rel((Mu @ Ms, Ms @ Lam, Mu @ V @ d.R, d.L @ W @ Lam))
    return r1, r2


# ------------------------------------------------------------------ orders


def numerical_rank(sv: np.ndarray, tol: float) -> int:
    sv = np.asarray(sv)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv / sv[0] > tol))


def _normalized_sv(M):
    if M.size == 0:
        return np.zeros(0)
    s = np.linalg.svd(M, compute_uv=False)
    return s / s[0] if s[0] > 0 else s


def gap_order(sv: np.ndarray, max_order: int | None = None, floor: float = 1e-15) -> int:
    """Order at the largest ratio between consecutive normalized singular values."""
    sv = np.maximum(np.asarray(sv, dtype=float), floor)
    k = sv.size - 1 if max_order is None else min(max_order, sv.size - 1)
    if k < 1:
        return int(sv.size)
    ratios = sv[:k] / sv[1:k + 1]
    return int(np.argmax(ratios)) + 1


@dataclass(frozen=True, eq=False)
class OrderReport:
    r: int
    nu: int
    sv_row: np.ndarray  # [L, Ms]
    sv_col: np.ndarray  # [L; Ms]
    sv_L: np.ndarray
    rank_violations: list = field(default_factory=list)


def detect_order(pencil: LoewnerPencil, tol: float = DEFAULT_TOL, check_points: bool = True,
                 scale: float | None = None) -> OrderReport:
    """Numerical ranks of [L, Ms] (r) and L (nu) plus the pencil rank check.

    ``scale`` optionally sets an absolute reference for the largest singular
    value, so that a pencil of pure rounding noise has rank zero.
    """
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    L, Ms = pencil.L, pencil.Ms
    sv_row = _normalized_sv(np.hstack([L, Ms]))
    sv_col = _normalized_sv(np.vstack([L, Ms]))
    sv_L = _normalized_sv(L)
    r = numerical_rank(sv_row, tol)
    nu = numerical_rank(sv_L, tol)
    if scale is not None and r:
        top = np.linalg.norm(np.hstack([L, Ms]), 2)
        if top < tol * scale:
            r = nu = 0
    if np.linalg.norm(L) < tol * max(np.linalg.norm(Ms), 1e-300):
        nu = 0
    violations = []
    if check_points and r > 0:
        ref = max(np.linalg.norm(L, 2), np.linalg.norm(Ms, 2))
        for z in pencil.data.points:
            s = np.linalg.svd(z * L - Ms, compute_uv=False)
            k = int(np.sum(s > tol * max(ref * max(abs(z), 1.0), s[0])))
            if k != r:
                violations.append((complex(z), k))
    return OrderReport(r, nu, sv_row, sv_col, sv_L, violations)


def project_reduce(pencil: LoewnerPencil, r: int, h: float | None = None) -> DescriptorModel:
    """Petrov-Galerkin projection onto leading singular vectors of the pencil."""
    nl, nr = pencil.shape
    if not 1 <= r <= min(nl, nr):
        raise RankTooLarge(f"r={r} outside [1, {min(nl, nr)}]")
    L, Ms = pencil.L, pencil.Ms
    Y = np.linalg.svd(np.hstack([L, Ms]))[0][:, :r]
    X = np.linalg.svd(np.vstack([L, Ms]))[2][:r].conj().T
    Yh = Y.conj().T
    return DescriptorModel(-Yh @ L @ X, -Yh @ Ms @ X, Yh @ pencil.V, pencil.W @ X, h=h)


# ------------------------------------------------------------------ real arithmetic


def _block_transform(points: np.ndarray):
    """Canonical order and block unitary T for one side of the data."""
    units = _units(points)
    order, blocks = [], []
    for u in units:
        if len(u) == 1:
            if abs(points[u[0]].imag) > 1e-12 * max(abs(points[u[0]]), 1.0):
                raise NotConjugateClosed(f"point {points[u[0]]} lacks its conjugate")
            blocks.append(np.ones((1, 1)))
        else:
            blocks.append(_T2)
        order.extend(u)
    return np.array(order), spla.block_diag(*blocks)


def _check_real(name, a, tol=1e-12):
    scale = max(np.max(np.abs(a)) if a.size else 0.0, 1e-300)
    if a.size and np.max(np.abs(a.imag)) > tol * scale * max(1.0, np.sqrt(a.size)):
        raise NotConjugateClosed(f"{name} keeps an imaginary part after realification")
    return a.real


def realify(data: TangentialDataSet) -> TangentialDataSet:
    """Transform conjugate-closed data to real arithmetic.

    Each conjugate pair (z, conj z) on either side is mapped by the unitary
    block ``T = [[1, -i], [1, i]] / sqrt(2)`` on the right and by ``T^H`` on the
    left; real points are left alone.
    """
    if data.structured:
        return data
    ro, T = _block_transform(data.lam)
    lo, Tl = _block_transform(data.mu)
    S = Tl.conj().T
    lam, R, W = data.lam[ro], data.R[:, ro], data.W[:, ro]
    mu, L, V = data.mu[lo], data.L[lo], data.V[lo]
    src = TangentialDataSet(lam, R, W, mu, L, V)
    Lam = _check_real("Lam", T.conj().T @ np.diag(lam) @ T)
    Mu = _check_real("Mu", S @ np.diag(mu) @ S.conj().T)
    Rr = _check_real("R", R @ T)
    Wr = _check_real("W", W @ T)
    Lr = _check_real("L", S @ L)
    Vr = _check_real("V", S @ V)
    return TangentialDataSet(lam, Rr, Wr, mu, Lr, Vr, Lam, Mu, source=src)


def realify_pencil(pencil: LoewnerPencil) -> LoewnerPencil:
    """Apply the same block transforms directly to an existing pencil."""
    data = pencil.data
    if data.structured:
        return pencil
    ro, T = _block_transform(data.lam)
    lo, Tl = _block_transform(data.mu)
    S = Tl.conj().T
    L = _check_real("L", S @ pencil.L[np.ix_(lo, ro)] @ T)
    Ms = _check_real("Ms", S @ pencil.Ms[np.ix_(lo, ro)] @ T)
    V = _check_real("V", S @ pencil.V[lo])
    W = _check_real("W", pencil.W[:, ro] @ T)
    return LoewnerPencil(L, Ms, V, W, realify(data))


# ------------------------------------------------------------------ D term


@dataclass(frozen=True, eq=False)
class PolynomialPart:
    D: np.ndarray
    improper: bool
    corrected: TangentialDataSet | None
    infinite_count: int = 0


def _with_responses(data: TangentialDataSet, W, V) -> TangentialDataSet:
    src = None
    if data.source is not None:
        s = data.source
        ro, T = _block_transform(s.lam)
        lo, Tl = _block_transform(s.mu)
        # back to complex: W_c = W_r T^H, V_c = S^H V_r with S = Tl^H
        src = TangentialDataSet(s.lam, s.R, W @ T.conj().T, s.mu, s.L, Tl @ V)
    return TangentialDataSet(data.lam, data.R, W, data.mu, data.L, V, data.Lam, data.Mu, src)


def extract_polynomial_part(pencil: LoewnerPencil, orders: OrderReport | None = None,
                            tol: float = DEFAULT_TOL) -> PolynomialPart:
    """Separate a constant feed-through from the data.

    The pencil is projected to order r. If all its infinite eigenvalues are
    non-dynamic (their count equals r - nu), the feed-through is
    ``D = -C X (Y^H A X)^{-1} Y^H B`` on the null spaces of E and corrected data
    (responses minus D) are returned. Otherwise the data carry a genuine
    polynomial part and ``improper`` is set.
    """
    rep = orders or detect_order(pencil, tol, check_points=False)
    p, m = pencil.data.p, pencil.data.m
    zero = np.zeros((p, m))
    if rep.r <= rep.nu or rep.r == 0:
        return PolynomialPart(zero, False, None, 0)
    model = project_reduce(pencil, rep.r)
    ev = pencil_eigenvalues(model.A, model.E)
    n_inf = int(np.sum(~np.isfinite(ev)))
    k = rep.r - rep.nu
    if n_inf > k or n_inf == 0:
        return PolynomialPart(zero, n_inf > k, None, n_inf)
    U, s, Vh = np.linalg.svd(model.E)
    Xi = Vh[-k:].conj().T
    Yi = U[:, -k:]
    core = Yi.conj().T @ model.A @ Xi
    D = -model.C @ Xi @ np.linalg.solve(core, Yi.conj().T @ model.B)
    d = pencil.data
    if np.iscomplexobj(D) and is_real_array(D, 1e-9) and d.is_real:
        D = D.real
    corrected = _with_responses(d, d.W - D @ d.R, d.V - d.L @ D)
    return PolynomialPart(D, False, corrected, n_inf)


# ------------------------------------------------------------------ checks


@dataclass(frozen=True, eq=False)
class InterpolationReport:
    max_violation: float
    right: np.ndarray
    left: np.ndarray

    def ok(self, tol: float) -> bool:
        return self.max_violation <= tol


def check_interpolation(model: DescriptorModel, data: TangentialDataSet, tol: float = 1e-8) -> InterpolationReport:
    """Residuals of the right and left tangential interpolation conditions.

    Residuals are scaled by the largest data value. Points that are poles of
    the model report ``inf``.
    """
    d = data.source if data.structured else data
    scale = max(np.max(np.abs(d.W)) if d.W.size else 0, np.max(np.abs(d.V)) if d.V.size else 0, 1e-300)
    right = np.empty(d.lam.size)
    for i, z in enumerate(d.lam):
        try:
            right[i] = np.linalg.norm(eval_transfer(model, z) @ d.R[:, i] - d.W[:, i]) / scale
        except SingularPencil:
            right[i] = np.inf
    left = np.empty(d.mu.size)
    for j, z in enumerate(d.mu):
        try:
            left[j] = np.linalg.norm(d.L[j] @ eval_transfer(model, z) - d.V[j]) / scale
        except SingularPencil:
            left[j] = np.inf
    worst = float(max(right.max(initial=0.0), left.max(initial=0.0)))
    return InterpolationReport(worst, right, left)


# ------------------------------------------------------------------ pipeline


@dataclass(frozen=True, eq=False)
class LoewnerFit:
    model: DescriptorModel
    orders: OrderReport
    D: np.ndarray
    improper: bool
    pencil: LoewnerPencil


def loewner_fit(
    data: TangentialDataSet,
    tol: float = DEFAULT_TOL,
    r: int | None = None,
    real: bool = True,
    feedthrough: bool = True,
    order_rule: str = "tol",
    max_order: int | None = None,
    h: float | None = None,
) -> LoewnerFit:
    """Build, realify (when possible), detect the order and project.

    ``order_rule`` is ``"tol"`` (singular values above ``tol``) or ``"gap"``
    (largest drop between consecutive singular values). With
    ``feedthrough`` a non-dynamic infinite part is split off as D and the
    remaining data are refitted.
    """
    if real and not data.structured:
        try:
            data = realify(data)
        except NotConjugateClosed:
            log.info("data are not conjugate closed; staying complex")
    pencil = build_pencil(data)
    rep = detect_order(pencil, tol, check_points=False)
    D = np.zeros((data.p, data.m))
    improper = False
    if feedthrough and r is None and order_rule == "tol" and rep.r > rep.nu:
        part = extract_polynomial_part(pencil, rep, tol)
        improper = part.improper
        if part.corrected is not None:
            D = part.D
            scale = np.linalg.norm(np.hstack([pencil.L, pencil.Ms]), 2)
            pencil = build_pencil(part.corrected)
            rep2 = detect_order(pencil, tol, check_points=False, scale=scale)
            rep = OrderReport(rep2.r, rep2.nu, rep.sv_row, rep.sv_col, rep.sv_L, rep.rank_violations)
    if r is None:
        if order_rule == "gap":
            r = gap_order(rep.sv_row, max_order)
        else:
            r = rep.r
    if r == 0:
        model = DescriptorModel(np.zeros((0, 0)), np.zeros((0, 0)), np.zeros((0, data.m)),
                                np.zeros((data.p, 0)), D, h=h)
    else:
        model = project_reduce(pencil, r, h=h).replace(D=D)
    return LoewnerFit(model, rep, D, improper, pencil)
