"""Data-driven controller design by Loewner interpolation of ideal-controller samples.

Given plant responses H(z_k) and a reference closed loop M, the ideal
one-degree-of-freedom controller at z_k is ``H^-1 M (1 - M)^-1``; a
reduced rational controller is then identified from these samples.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    ClosedLoopSingularAtPoint,
    PlantZeroAtPoint,
    ReferenceUnityAtPoint,
    TooFewPoints,
)
from .loewner_lti import LoewnerFit, loewner_fit, partition_data
from .model_core import DescriptorModel, FrequencySample, conjugate_close, transfer_siso

log = logging.getLogger(__name__)

UNITY_TOL = 1e-12


def _scalar(v) -> complex:
    return complex(np.asarray(v).reshape(-1)[0])


def _as_evaluator(obj) -> Callable[[complex], complex]:
    if isinstance(obj, DescriptorModel):
        return lambda z: complex(transfer_siso(obj, [z])[0])
    if isinstance(obj, ReferenceModel):
        return obj.evaluator
    if callable(obj):
        return lambda z: _scalar(obj(z))
    if isinstance(obj, (list, tuple)):
        table = {complex(s.point): _scalar(s.response) for s in obj}
        return lambda z: table[complex(z)]
    raise TypeError(f"cannot evaluate {type(obj).__name__}")


@dataclass(frozen=True)
class ReferenceModel:
    """SISO reference closed loop."""

    evaluator: Callable[[complex], complex]
    description: str = ""

    def __call__(self, z) -> complex:
        return self.evaluator(z)

    @classmethod
    def closed_loop(cls, plant, controller, description: str = "closed loop") -> "ReferenceModel":
        """``H K / (1 + H K)`` for evaluators, models or sample lists."""
        H, K = _as_evaluator(plant), _as_evaluator(controller)

        def f(z):
            hk = H(z) * K(z)
            return hk / (1 + hk)

        return cls(f, description)

    @classmethod
    def from_rational(cls, num: Sequence[float], den: Sequence[float]) -> "ReferenceModel":
        """Polynomial coefficients in descending powers."""
        num, den = np.asarray(num, dtype=complex), np.asarray(den, dtype=complex)
        return cls(lambda z: complex(np.polyval(num, z) / np.polyval(den, z)),
                   f"rational num={num.real.tolist()} den={den.real.tolist()}")

    @classmethod
    def from_model(cls, model: DescriptorModel) -> "ReferenceModel":
        return cls(_as_evaluator(model), f"descriptor model of order {model.n}")


def plant_from_spectra(points, u_spec, y_spec) -> list[FrequencySample]:
    """Empirical plant samples ``y(iw_k) / u(iw_k)``."""
    u_spec = np.asarray(u_spec, dtype=complex)
    if np.any(u_spec == 0):
        raise PlantZeroAtPoint("input spectrum vanishes at a sample point")
    return [FrequencySample(z, y / u) for z, u, y in zip(points, u_spec, np.asarray(y_spec, dtype=complex))]


@dataclass(frozen=True, eq=False)
class ControllerSamples:
    points: np.ndarray
    values: np.ndarray

    def __len__(self):
        return len(self.points)

    def as_samples(self) -> list[FrequencySample]:
        return [FrequencySample(z, v) for z, v in zip(self.points, self.values)]


def ideal_controller_samples(plant: Sequence[FrequencySample], M, strict: bool = False) -> ControllerSamples:
    """Pointwise ``K*(z) = H(z)^-1 M(z) (1 - M(z))^-1``.

    Points where ``|1 - M|`` falls below 1e-12 are dropped with a warning, or
    raise ReferenceUnityAtPoint when ``strict``.
    """
    Mf = _as_evaluator(M)
    pts, vals = [], []
    for smp in plant:
        z, h = complex(smp.point), _scalar(smp.response)
        if h == 0:
            raise PlantZeroAtPoint(f"plant response is zero at {z}")
        m = Mf(z)
        if abs(1 - m) < UNITY_TOL:
            if strict:
                raise ReferenceUnityAtPoint(f"M({z}) is numerically 1")
            warnings.warn(f"dropping {z}: reference model is numerically 1", RuntimeWarning, stacklevel=2)
            continue
        pts.append(z)
        vals.append(m / (h * (1 - m)))
    log.info("reference achievability (unstable zeros/poles of the plant) is assumed, not checked")
    return ControllerSamples(np.array(pts), np.array(vals))


def identify_controller(samples: ControllerSamples, tol: float = 1e-10, r: int | None = None,
                        order_rule: str = "tol", max_order: int | None = None,
                        directions="cyclic", seed: int = 0) -> LoewnerFit:
    """Rational controller interpolating the ideal samples (real when possible)."""
    if len(samples) < 4:
        raise TooFewPoints("need at least 4 controller samples")
    data = partition_data(conjugate_close(samples.as_samples()), directions=directions, seed=seed)
    return loewner_fit(data, tol=tol, r=r, order_rule=order_rule, max_order=max_order)


@dataclass(frozen=True, eq=False)
class ClosedLoopReport:
    points: np.ndarray
    achieved: np.ndarray
    reference: np.ndarray
    deviation: np.ndarray

    @property
    def max_error(self) -> float:
        return float(self.deviation.max()) if self.deviation.size else 0.0

    @property
    def mean_error(self) -> float:
        return float(self.deviation.mean()) if self.deviation.size else 0.0


def closed_loop_eval(plant: Sequence[FrequencySample], K, M) -> ClosedLoopReport:
    """Achieved loop ``HK/(1+HK)`` against the reference at the plant points."""
    Kf, Mf = _as_evaluator(K), _as_evaluator(M)
    pts, ach, ref = [], [], []
    for smp in plant:
        z, h = complex(smp.point), _scalar(smp.response)
        hk = h * Kf(z)
        if abs(1 + hk) < UNITY_TOL:
            raise ClosedLoopSingularAtPoint(f"1 + H K vanishes at {z}")
        pts.append(z)
        ach.append(hk / (1 + hk))
        ref.append(Mf(z))
    ach, ref = np.array(ach), np.array(ref)
    return ClosedLoopReport(np.array(pts), ach, ref, np.abs(ach - ref))


def filtered_pi(kp: float = 0.1914, ki: float = 0.0251, a: float = 5667.2) -> Callable:
    """``(kp + ki/s) / (s/a + 1)``: reference controller of the transport benchmark."""
    return lambda s: (kp + ki / s) / (s / a + 1)
