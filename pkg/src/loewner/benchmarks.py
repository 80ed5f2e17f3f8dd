"""Benchmark systems with their excitation signals.

Covers an irrational transport transfer function, delay models, a building-like
structural chain and a quadratic-bilinear Burgers discretization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as spla

from .errors import BranchPoint, SingularResolvent, WeightZeroAtPoint
from .loewner_bilinear import QuadraticBilinearSpec
from .model_core import RCOND_TOL, DescriptorModel, FrequencySample, rcond


@dataclass(frozen=True)
class IrrationalTF:
    """Deterministic SISO evaluator with excluded points."""

    evaluator: Callable[[complex], complex]
    excluded: tuple = ()
    description: str = ""

    def __call__(self, s):
        return self.evaluator(s)


# ---------------------------------------------------------------- transport


def transport_tf(x: float, s, w0: float = 3.0, m: float = 0.5):
    """Heat-transport channel at position ``x`` behind a second-order actuator.

    ``G(x, s) = sqrt(pi / s) exp(-x^2 s) w0^2 / (s^2 + m w0 s + w0^2)`` with the
    principal square root. Accepts scalars or arrays.
    """
    s = np.asarray(s, dtype=complex)
    if np.any(s == 0):
        raise BranchPoint("transport_tf has a branch point at s = 0")
    den = s * s + m * w0 * s + w0 * w0
    if np.any(den == 0):
        raise SingularResolvent("s is an actuator pole")
    val = np.sqrt(np.pi) / np.sqrt(s) * np.exp(-x * x * s) * w0 * w0 / den
    return val[()] if val.ndim == 0 else val


def transport(x: float = 1.9592, w0: float = 3.0, m: float = 0.5) -> IrrationalTF:
    return IrrationalTF(lambda s: transport_tf(x, s, w0, m), (0.0,), f"transport x={x}")


def actuator_tf(s, w0: float = 3.0, m: float = 0.5):
    s = np.asarray(s, dtype=complex)
    return w0 * w0 / (s * s + m * w0 * s + w0 * w0)


# ---------------------------------------------------------------- delay model


@dataclass(frozen=True, eq=False)
class DelayModel:
    """``(C0 + C1 e^{-tau_m s}) (sE - A0 - A1 e^{-tau1 s} - A2 e^{-tau2 s})^{-1} B``."""

    E: np.ndarray
    A0: np.ndarray
    A1: np.ndarray
    A2: np.ndarray
    B: np.ndarray
    C0: np.ndarray
    C1: np.ndarray
    tau1: float = 0.0
    tau2: float = 0.0
    tau_m: float = 0.0

    def __call__(self, s):
        return gust_delay_tf(self.E, self.A0, self.A1, self.A2, self.B, self.C0, self.C1,
                             self.tau1, self.tau2, self.tau_m, s)


def gust_delay_tf(E, A0, A1, A2, B, C0, C1, tau1, tau2, tau_m, s) -> np.ndarray:
    """p x m response of the delay descriptor model at one point ``s``."""
    s = complex(s)
    B = np.atleast_2d(np.asarray(B))
    B = B.T if B.shape[0] != np.shape(E)[0] else B
    P = s * np.asarray(E) - A0 - np.asarray(A1) * np.exp(-tau1 * s) - np.asarray(A2) * np.exp(-tau2 * s)
    if rcond(P) < RCOND_TOL:
        raise SingularResolvent(f"delay resolvent singular at s={s}")
    Cs = np.atleast_2d(C0) + np.atleast_2d(C1) * np.exp(-tau_m * s)
    return Cs @ np.linalg.solve(P, B)


def gust_fixture(seed: int = 0, n: int = 8) -> DelayModel:
    """Synthetic SISO stand-in for the aeroservoelastic delay model.

    Lightly damped modes with small delayed feedback terms and a sensor delay.
    """
    rng = np.random.default_rng(seed)
    wn = np.linspace(1.0, 6.0, n // 2)
    zeta = 0.05 + 0.05 * rng.random(n // 2)
    blocks = [np.array([[0.0, 1.0], [-w * w, -2 * z * w]]) for w, z in zip(wn, zeta)]
    A0 = spla.block_diag(*blocks)
    A1 = 0.05 * rng.standard_normal((n, n))
    A2 = 0.02 * rng.standard_normal((n, n))
    B = rng.standard_normal((n, 1))
    C0 = rng.standard_normal((1, n))
    C1 = 0.3 * rng.standard_normal((1, n))
    return DelayModel(np.eye(n), A0, A1, A2, B, C0, C1, tau1=0.05, tau2=0.1, tau_m=0.02)


# ---------------------------------------------------------------- spectral shift


def integrator_weight(a: float = 1e-2, b: float = 1e-3) -> Callable:
    """``s / ((s + a)(s + b))``: removes an integrator before fitting."""
    return lambda s: s / ((s + a) * (s + b))


def delay_weight(tau: float) -> Callable:
    """``e^{s tau}``: removes a known delay before fitting."""
    return lambda s: np.exp(s * tau)


def spectral_shift(samples: Sequence[FrequencySample], weight: Callable) -> list[FrequencySample]:
    out = []
    for smp in samples:
        w = complex(weight(smp.point))
        if w == 0 or not np.isfinite(w):
            raise WeightZeroAtPoint(f"weight vanishes at {smp.point}")
        out.append(FrequencySample(smp.point, smp.response * w))
    return out


def unshift(evaluator: Callable, weight: Callable) -> Callable:
    """Evaluator of the original function from a fit of the shifted data."""

    def f(s):
        w = weight(s)
        if np.any(np.asarray(w) == 0):
            raise WeightZeroAtPoint(f"weight vanishes at {s}")
        return evaluator(s) / w

    return f


# ---------------------------------------------------------------- structural chain


def structural_chain(floors: int = 8, scaling: float = 1e4, seed: int = 0, alpha: float = 0.05,
                     beta: float = 0.004, stiffness: float = 1e3, coupling: float = 0.02) -> DescriptorModel:
    """Shear-building analog with 3 DOF per floor in first-order form.

    Masses and spring constants are drawn uniformly within 20 % of 1 and
    ``stiffness``; the torsional DOF of each floor couples weakly to the two
    translations. Rayleigh damping ``beta K + alpha M``. The input force acts
    on the two ground-floor translations, scaled by ``scaling``; the output
    is the top-floor first translation.
    """
    if floors < 1:
        raise ValueError("floors must be >= 1")
    rng = np.random.default_rng(seed)
    nd = 3 * floors
    mass = rng.uniform(0.8, 1.2, nd)
    k = rng.uniform(0.8, 1.2, nd) * stiffness
    K = np.zeros((nd, nd))
    for f in range(floors):
        for d in range(3):
            i = 3 * f + d
            K[i, i] += k[i]
            if f > 0:
                j = i - 3
                K[j, j] += k[i]
                K[i, j] -= k[i]
                K[j, i] -= k[i]
        c = coupling * k[3 * f]
        i = 3 * f
        for a in (i, i + 1):
            K[a, i + 2] += c
            K[i + 2, a] += c
    M = np.diag(mass)
    D = beta * K + alpha * M
    E = spla.block_diag(np.eye(nd), M)
    A = np.block([[np.zeros((nd, nd)), np.eye(nd)], [-K, -D]])
    b = np.zeros(nd)
    b[:2] = 1.0
    B = np.concatenate([np.zeros(nd), b])[:, None] * scaling
    C = np.zeros((1, 2 * nd))
    C[0, 3 * (floors - 1)] = 1.0
    return DescriptorModel(E, A, B, C)


# ---------------------------------------------------------------- Burgers


def burgers_spec(n: int, nu: float) -> QuadraticBilinearSpec:
    """Viscous Burgers on (0, 1) with boundary control at x = 0.

    Central second differences for diffusion, first-order upwind differences
    for ``-v v_x`` and a homogeneous Dirichlet condition at x = 1; the output
    is the spatial mean of v.
    """
    if n < 2 or nu <= 0:
        raise ValueError("need n >= 2 and nu > 0")
    h = 1.0 / (n + 1)
    F1 = nu / h**2 * (np.diag(-2 * np.ones(n)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1))
    F2 = np.zeros((n, n * n))
    for i in range(n):
        F2[i, i * n + i] -= 1 / h
        if i > 0:
            F2[i, i * n + i - 1] += 1 / h
    G0 = np.zeros(n)
    G0[0] = nu / h**2
    G1 = np.zeros((n, n))
    G1[0, 0] = 1 / h
    return QuadraticBilinearSpec(F1, F2, G0, G1, np.ones(n) / n)


# ---------------------------------------------------------------- inputs


BUILDING_STEP = 4e-3
BUILDING_SAMPLES = 2001


def building_input(t):
    t = np.asarray(t, dtype=float)
    return (np.cos(50 * t) + 2 * np.cos(20 * t) + 3 * np.cos(10 * t)) / 10


def burgers_input(t):
    t = np.asarray(t, dtype=float)
    return (np.cos(2 * np.pi * t) + np.sin(20 * np.pi * t) * np.exp(-t / 5)) / 5


def building_grid(step: float = BUILDING_STEP, samples: int = BUILDING_SAMPLES) -> np.ndarray:
    return np.arange(samples) * step


def burgers_grid(step: float = 2e-3, T: float = 10.0) -> np.ndarray:
    return np.linspace(0.0, T, int(round(T / step)) + 1)
