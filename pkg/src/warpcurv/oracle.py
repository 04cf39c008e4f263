"""Brute-force curvature of an arbitrary chart metric.

This route knows nothing about product structure: it differentiates the
Christoffel symbols of whatever metric it is handed.  The Christoffels
themselves are exact (dual numbers); only their derivatives are numerical,
so a single layer of central differences with Richardson extrapolation is
the entire error budget.

Deliberately imports nothing from the warped-product or closed-form
modules: its value as a cross-check depends on that separation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bundle import CurvatureBundle
from .errors import (
    DegenerateMetricError,
    DegeneratePlaneError,
    EvalDomainError,
    NumericalInstabilityError,
    StencilDomainError,
)
from .geometry import MetricSpec, christoffels_of, metric_at, _coords, _inverse_of

__all__ = [
    "DiffPolicy",
    "riemann_fd",
    "ricci_fd",
    "scalar_fd",
    "sectional_fd",
    "bundle_fd",
    "TensorComparison",
    "ComparisonReport",
    "compare_bundles",
]


@dataclass(frozen=True)
class DiffPolicy:
    """Step-size and extrapolation policy for the single derivative layer.

    base_step is scaled per coordinate by (1 + |x_i|) when relative_scaling
    is on.  richardson_levels counts central-difference evaluations at
    h, h/2, h/4, ... combined by one Neville tableau; level 2 is the
    default (error falls from h^2 to h^4).
    """

    base_step: float = 1e-4
    richardson_levels: int = 2
    relative_scaling: bool = True

    def __post_init__(self):
        if not self.base_step > 0.0:
            raise ValueError("base_step must be positive")
        if self.richardson_levels not in (1, 2, 3):
            raise ValueError("richardson_levels must be 1, 2, or 3")

    def steps_at(self, coords: np.ndarray) -> np.ndarray:
        if self.relative_scaling:
            return self.base_step * (1.0 + np.abs(coords))
        return np.full(len(coords), self.base_step)


def _gamma_shifted(spec: MetricSpec, coords: np.ndarray, axis: int, delta: float):
    x = coords.copy()
    x[axis] += delta
    try:
        return christoffels_of(spec, x)
    except (EvalDomainError, DegenerateMetricError) as exc:
        raise StencilDomainError(
            f"stencil point at x{axis} {delta:+.3e} failed: {exc}"
        ) from exc


def _dgamma(spec: MetricSpec, coords: np.ndarray, policy: DiffPolicy) -> np.ndarray:
    """out[l, k, i, j] = d_l Gamma^k_ij by extrapolated central differences."""
    d = spec.dim
    steps = policy.steps_at(coords)
    out = np.empty((d, d, d, d))
    for axis in range(d):
        tableau = []
        for level in range(policy.richardson_levels):
            h = steps[axis] / (2.0**level)
            gp = _gamma_shifted(spec, coords, axis, +h)
            gm = _gamma_shifted(spec, coords, axis, -h)
            tableau.append((gp - gm) / (2.0 * h))
        for k in range(1, len(tableau)):
            fac = 4.0**k
            tableau = [
                (fac * tableau[i + 1] - tableau[i]) / (fac - 1.0)
                for i in range(len(tableau) - 1)
            ]
        out[axis] = tableau[0]
    return out


def _riemann_common(gamma: np.ndarray, dgamma: np.ndarray) -> np.ndarray:
    """R^mu_{nu lam rho} = d_lam G^mu_{rho nu} - d_rho G^mu_{lam nu}
    + G^mu_{lam s} G^s_{rho nu} - G^mu_{rho s} G^s_{lam nu}."""
    a = dgamma.transpose(1, 3, 0, 2)  # [m,n,l,r] = dgamma[l, m, r, n]
    b = dgamma.transpose(1, 3, 2, 0)  # [m,n,l,r] = dgamma[r, m, l, n]
    t1 = np.einsum("mls,srn->mnlr", gamma, gamma)
    t2 = np.einsum("mrs,sln->mnlr", gamma, gamma)
    return a - b + t1 - t2


def riemann_fd(
    spec: MetricSpec, point, policy: DiffPolicy | None = None, convention: str = "paper"
) -> np.ndarray:
    if policy is None:
        policy = DiffPolicy()
    c = _coords(point, spec.dim)
    gamma = christoffels_of(spec, c)  # center point: errors propagate as-is
    dgamma = _dgamma(spec, c, policy)
    riem = _riemann_common(gamma, dgamma)
    if convention == "common":
        return riem
    if convention == "paper":
        return -riem
    raise ValueError(f"unknown convention {convention!r}")


def _ricci_from_common(riem_common: np.ndarray, scale_hint: float = 1.0) -> np.ndarray:
    ric = np.einsum("mnmr->nr", riem_common)
    scale = max(scale_hint, float(np.abs(ric).max()) if ric.size else 0.0)
    asym = float(np.abs(ric - ric.T).max())
    if asym > 1e-8 * max(1.0, scale):
        raise NumericalInstabilityError(
            f"Ricci asymmetry {asym:.3e} exceeds 1e-8 of scale {scale:.3e}"
        )
    return 0.5 * (ric + ric.T)


def ricci_fd(spec: MetricSpec, point, policy: DiffPolicy | None = None) -> np.ndarray:
    """Ricci tensor; contraction slot chosen so the round sphere comes out
    positive, and the result does not depend on the sign convention."""
    riem = riemann_fd(spec, point, policy, convention="common")
    return _ricci_from_common(riem)


def scalar_fd(spec: MetricSpec, point, policy: DiffPolicy | None = None) -> float:
    ric = ricci_fd(spec, point, policy)
    ginv = _inverse_of(metric_at(spec, point))
    return float(np.einsum("ij,ij->", ginv, ric))


def sectional_fd(
    spec: MetricSpec, point, u, v, policy: DiffPolicy | None = None
) -> float:
    """Sectional curvature of span{u, v}; independent of the convention tag."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    g = metric_at(spec, point)
    uu = float(u @ g @ u)
    vv = float(v @ g @ v)
    uv = float(u @ g @ v)
    denom = uu * vv - uv * uv
    scale = max(abs(uu * vv), uv * uv, 1e-30)
    if abs(denom) <= 1e-10 * scale:
        raise DegeneratePlaneError(
            f"plane Gram determinant {denom:.3e} is degenerate (scale {scale:.3e})"
        )
    riem = riemann_fd(spec, point, policy, convention="common")
    # numerator g(R(u,v)v, u) with (R(u,v)w)^mu = R^mu_{nu lam rho} w^nu u^lam v^rho
    rv = np.einsum("mnlr,n,l,r->m", riem, v, u, v)
    num = float(u @ g @ rv)
    return num / denom


def bundle_fd(
    spec: MetricSpec, point, policy: DiffPolicy | None = None, convention: str = "paper"
) -> CurvatureBundle:
    """All four tensors from one pass of stencil evaluations."""
    if policy is None:
        policy = DiffPolicy()
    c = _coords(point, spec.dim)
    gamma = christoffels_of(spec, c)
    dgamma = _dgamma(spec, c, policy)
    riem_common = _riemann_common(gamma, dgamma)
    ric = _ricci_from_common(riem_common)
    ginv = _inverse_of(metric_at(spec, c))
    scal = float(np.einsum("ij,ij->", ginv, ric))
    riem = riem_common if convention == "common" else -riem_common
    return CurvatureBundle(gamma, riem, ric, scal, convention)


# ---------------------------------------------------------------------------
# Bundle comparison


@dataclass
class TensorComparison:
    max_abs: float
    max_rel: float
    worst_index: tuple

    def as_dict(self):
        return {
            "max_abs": self.max_abs,
            "max_rel": self.max_rel,
            "worst_index": list(self.worst_index),
        }


@dataclass
class ComparisonReport:
    tensors: dict
    max_rel: float

    def as_dict(self):
        return {
            "tensors": {k: v.as_dict() for k, v in self.tensors.items()},
            "max_rel": self.max_rel,
        }

    def within(self, tol: float) -> bool:
        return self.max_rel <= tol


def _compare_arrays(a: np.ndarray, b: np.ndarray, floor: float = 0.0) -> TensorComparison:
    diff = np.abs(a - b)
    max_abs = float(diff.max()) if diff.size else 0.0
    scale = max(
        float(np.abs(a).max()) if a.size else 0.0,
        float(np.abs(b).max()) if b.size else 0.0,
        floor,
    )
    max_rel = (max_abs / scale) if scale > 0.0 else 0.0
    worst = np.unravel_index(int(diff.argmax()), diff.shape) if diff.size else ()
    return TensorComparison(max_abs, max_rel, tuple(int(i) for i in worst))


def compare_bundles(a: CurvatureBundle, b: CurvatureBundle) -> ComparisonReport:
    """Per-tensor deviation summary: worst absolute and relative slot.

    The relative deviation is max|a-b| divided by the larger of the two
    tensors' max magnitudes (0 when both vanish identically).  The scalar
    is additionally measured against the Ricci magnitude: it is a trace of
    Ricci, so when that trace cancels to a mathematical zero the roundoff
    residue should be judged relative to what was summed, not to itself.
    """
    if a.convention != b.convention:
        raise ValueError(
            f"bundles use different conventions: {a.convention!r} vs {b.convention!r}"
        )
    if a.dim != b.dim:
        raise ValueError("bundles have different dimensions")
    ricci_scale = max(float(np.abs(a.ricci).max()), float(np.abs(b.ricci).max()))
    tensors = {
        "christoffel": _compare_arrays(a.christoffel, b.christoffel),
        "riemann": _compare_arrays(a.riemann, b.riemann),
        "ricci": _compare_arrays(a.ricci, b.ricci),
        "scalar": _compare_arrays(
            np.asarray([a.scalar]), np.asarray([b.scalar]), floor=ricci_scale
        ),
    }
    return ComparisonReport(tensors, max(t.max_rel for t in tensors.values()))
