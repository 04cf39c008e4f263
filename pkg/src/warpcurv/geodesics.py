"""Geodesics of a doubly warped product, integrated with classical RK4.

Two interchangeable right-hand sides are provided on purpose: rhs_full
contracts the assembled product Christoffels, while rhs_split works purely
in factor terms (factor Christoffels plus warp-gradient forcing).  They are
algebraically identical, so their agreement is a structural check on the
Christoffel blocks, and the integrator accepts either.

The squared velocity norm <v, v> is monitored at every accepted sample;
geodesics preserve it exactly in the continuum, so its drift measures
integration error and aborts the run when it passes a threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .closed_form import christoffels_closed, _point_data
from .errors import (
    DegenerateMetricError,
    DomainExitError,
    EvalDomainError,
    NonpositiveWarpError,
    StepTooLargeError,
)
from .warped import ProductPoint, WarpedProductSpec, assemble_metric

__all__ = [
    "GeodesicState",
    "Trajectory",
    "rhs_full",
    "rhs_split",
    "integrate",
]


@dataclass
class GeodesicState:
    s: float
    position: ProductPoint
    velocity: np.ndarray

    def __post_init__(self):
        self.velocity = np.asarray(self.velocity, dtype=float)
        if len(self.velocity) != len(self.position.full):
            raise ValueError("velocity length must match position dimension")


@dataclass
class Trajectory:
    samples: list  # of GeodesicState
    norm_history: np.ndarray

    @property
    def s_values(self) -> np.ndarray:
        return np.array([st.s for st in self.samples])

    @property
    def positions(self) -> np.ndarray:
        return np.array([st.position.full for st in self.samples])

    @property
    def velocities(self) -> np.ndarray:
        return np.array([st.velocity for st in self.samples])

    @property
    def endpoint(self) -> GeodesicState:
        return self.samples[-1]


def rhs_full(spec: WarpedProductSpec, state: GeodesicState) -> np.ndarray:
    """Acceleration -Gamma^k_ij v^i v^j from the assembled Christoffels."""
    gamma = christoffels_closed(spec, state.position)
    v = state.velocity
    return -np.einsum("kij,i,j->k", gamma, v, v)


def rhs_split(spec: WarpedProductSpec, state: GeodesicState) -> np.ndarray:
    """Acceleration in factor form.

    Base:  -BGamma(x',x') + (f/h^2) <y',y'>_F grad_B f - 2 (dln h/ds) x'
    Fiber: -FGamma(y',y') + (h/f^2) <x',x'>_B grad_F h - 2 (dln f/ds) y'

    with all factor quantities unwarped.  Identical to rhs_full after
    expanding the Christoffel blocks; computed via a different code path.
    """
    d = _point_data(spec, state.position, with_hessians=False)
    m = d.m
    vB = state.velocity[:m]
    vF = state.velocity[m:]
    vB2 = float(vB @ d.gB @ vB)
    vF2 = float(vF @ d.gF @ vF)
    accel_B = (
        -np.einsum("kij,i,j->k", d.gammaB, vB, vB)
        + (d.f / d.h**2) * vF2 * d.dfU
        - 2.0 * float(d.lh @ vF) * vB
    )
    accel_F = (
        -np.einsum("kij,i,j->k", d.gammaF, vF, vF)
        + (d.h / d.f**2) * vB2 * d.dhU
        - 2.0 * float(d.lf @ vB) * vF
    )
    return np.concatenate([accel_B, accel_F])


_RHS = {"full": rhs_full, "split": rhs_split}


def _norm_at(spec: WarpedProductSpec, position: ProductPoint, velocity) -> float:
    g = assemble_metric(spec, position)
    return float(velocity @ g @ velocity)


def integrate(
    spec: WarpedProductSpec,
    initial: GeodesicState,
    s_end: float,
    step: float,
    rhs: str = "full",
    abort_drift: float = 1e-3,
) -> Trajectory:
    """Fixed-step classical RK4 from initial.s to s_end.

    Samples land on the uniform grid initial.s + k*step, plus one shorter
    final step when s_end is not a grid point, so the trajectory always
    ends exactly at s_end.  Raises DomainExitError when any evaluation
    leaves the chart (reporting the last healthy sample) and
    StepTooLargeError when the velocity-norm drift passes abort_drift
    relative to (1 + |initial norm|).
    """
    if rhs not in _RHS:
        raise ValueError(f"rhs must be one of {sorted(_RHS)}, got {rhs!r}")
    if step <= 0.0:
        raise ValueError("step must be positive")
    if s_end < initial.s:
        raise ValueError("s_end must be >= the initial parameter value")
    accel = _RHS[rhs]
    m = spec.base.dim

    span = s_end - initial.s
    whole = int(np.floor(span / step + 1e-9))
    remainder = span - whole * step
    if remainder <= 1e-12 * step:
        remainder = 0.0

    def deriv(y: np.ndarray) -> np.ndarray:
        pos = ProductPoint.from_full(y[: len(y) // 2], m)
        vel = y[len(y) // 2 :]
        state = GeodesicState(0.0, pos, vel)
        return np.concatenate([vel, accel(spec, state)])

    y = np.concatenate([initial.position.full, initial.velocity])
    s = initial.s
    n0 = _norm_at(spec, initial.position, initial.velocity)
    samples = [GeodesicState(s, initial.position, initial.velocity.copy())]
    norms = [n0]

    total_steps = whole + (1 if remainder else 0)
    for k in range(total_steps):
        h = step if k < whole else remainder
        try:
            k1 = deriv(y)
            k2 = deriv(y + (0.5 * h) * k1)
            k3 = deriv(y + (0.5 * h) * k2)
            k4 = deriv(y + h * k3)
            y_next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            pos = ProductPoint.from_full(y_next[: len(y) // 2], m)
            vel = y_next[len(y) // 2 :]
            norm = _norm_at(spec, pos, vel)
        except (EvalDomainError, NonpositiveWarpError, DegenerateMetricError) as exc:
            last = samples[-1]
            raise DomainExitError(last.s, last.position, str(exc)) from exc
        s = initial.s + (k + 1) * step if k < whole else s_end
        drift = abs(norm - n0)
        if drift > abort_drift * (1.0 + abs(n0)):
            raise StepTooLargeError(s, drift, abort_drift * (1.0 + abs(n0)))
        y = y_next
        samples.append(GeodesicState(s, pos, vel))
        norms.append(norm)

    return Trajectory(samples, np.asarray(norms))
