"""Coordinate-chart pseudo-Riemannian geometry for a single factor manifold.

A metric is a symmetric grid of expressions in the chart coordinates
x0..x{dim-1}.  Entry (i, j) and entry (j, i) are the same Expression object,
so symmetry of everything downstream (metric values, Christoffel symbols in
their lower pair, covariant Hessians) holds bitwise, not just to roundoff.

Partial derivatives of metric entries come from dual numbers, never from
finite differences; the only approximation anywhere in this module is the
linear solve for the inverse metric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMetricError
from .expr import Expression, evaluate, jet2, parse_expression, value_and_gradient

__all__ = [
    "MetricSpec",
    "ScalarFieldSpec",
    "Point",
    "metric_at",
    "inverse_metric_at",
    "christoffels_of",
    "covariant_hessian",
    "laplacian",
]


class Point:
    """An evaluation point: finite coordinates in some chart."""

    __slots__ = ("coords",)

    def __init__(self, coords):
        arr = np.atleast_1d(np.asarray(coords, dtype=float))
        if arr.ndim != 1:
            raise ValueError("coordinates must be one-dimensional")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coordinates must be finite")
        self.coords = arr

    def __len__(self):
        return len(self.coords)

    def __repr__(self):
        return f"Point({self.coords.tolist()!r})"


def _coords(point, dim: int) -> np.ndarray:
    c = point.coords if isinstance(point, Point) else np.asarray(point, dtype=float)
    if len(c) != dim:
        raise ValueError(f"point has {len(c)} coordinates, metric needs {dim}")
    return c


@dataclass(frozen=True)
class MetricSpec:
    """Symmetric grid of component expressions for one chart."""

    dim: int
    components: tuple  # dim x dim nested tuples of Expression
    name: str = ""

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("metric dimension must be >= 1")
        if len(self.components) != self.dim or any(
            len(row) != self.dim for row in self.components
        ):
            raise ValueError("components must form a dim x dim grid")
        for i in range(self.dim):
            for j in range(self.dim):
                e = self.components[i][j]
                if not isinstance(e, Expression):
                    raise TypeError("metric components must be Expression objects")
                if e.arity != self.dim:
                    raise ValueError(
                        f"component ({i},{j}) has arity {e.arity}, expected {self.dim}"
                    )
                if self.components[j][i] is not e:
                    raise ValueError(
                        f"components ({i},{j}) and ({j},{i}) must be the same object"
                    )

    @classmethod
    def from_strings(cls, dim: int, rows, name: str = "") -> "MetricSpec":
        """Parse a square grid of expression strings.

        Mirrored entries must be textually identical; each pair is parsed
        once and shared, which is what makes symmetry structural.
        """
        if len(rows) != dim or any(len(r) != dim for r in rows):
            raise ValueError("expected a square grid of expression strings")
        grid = [[None] * dim for _ in range(dim)]
        for i in range(dim):
            for j in range(i, dim):
                if rows[i][j] != rows[j][i]:
                    raise ValueError(
                        f"metric text is not symmetric at ({i},{j}): "
                        f"{rows[i][j]!r} vs {rows[j][i]!r}"
                    )
                e = parse_expression(rows[i][j], dim)
                grid[i][j] = grid[j][i] = e
        return cls(dim, tuple(tuple(r) for r in grid), name)


@dataclass(frozen=True)
class ScalarFieldSpec:
    """A scalar function on a chart, optionally constrained positive."""

    expr: Expression
    positivity_required: bool = False

    @classmethod
    def from_string(cls, text: str, arity: int, positivity_required: bool = False):
        return cls(parse_expression(text, arity), positivity_required)


def metric_at(spec: MetricSpec, point) -> np.ndarray:
    c = _coords(point, spec.dim)
    g = np.empty((spec.dim, spec.dim))
    for i in range(spec.dim):
        for j in range(i, spec.dim):
            g[i, j] = g[j, i] = evaluate(spec.components[i][j], c)
    return g


def _inverse_of(g: np.ndarray) -> np.ndarray:
    dim = g.shape[0]
    det = float(np.linalg.det(g))
    # determinant scales like entries^dim, so the degeneracy cutoff must too
    scale = max(1.0, float(np.abs(g).max())) ** dim
    if abs(det) < 1e-12 * scale:
        raise DegenerateMetricError(
            f"metric determinant {det!r} is degenerate at this point", det
        )
    return np.linalg.inv(g)


def inverse_metric_at(spec: MetricSpec, point) -> np.ndarray:
    return _inverse_of(metric_at(spec, point))


def _metric_and_first_derivs(spec: MetricSpec, c: np.ndarray):
    """Returns (g, D) with D[l, i, j] = d g_ij / d x_l, both bitwise symmetric."""
    dim = spec.dim
    g = np.empty((dim, dim))
    D = np.empty((dim, dim, dim))
    for i in range(dim):
        for j in range(i, dim):
            v, grad = value_and_gradient(spec.components[i][j], c)
            g[i, j] = g[j, i] = v
            D[:, i, j] = grad
            D[:, j, i] = grad
    return g, D


def _christoffels_from_parts(ginv: np.ndarray, D: np.ndarray) -> np.ndarray:
    # term[i, j, l] = d_i g_jl + d_j g_il - d_l g_ij; symmetric in (i, j)
    # bitwise because the two leading terms are mirror images and the
    # subtracted one is built symmetric.
    term = D + D.transpose(1, 0, 2) - D.transpose(1, 2, 0)
    return 0.5 * np.einsum("kl,ijl->kij", ginv, term)


def christoffels_of(spec: MetricSpec, point) -> np.ndarray:
    """Christoffel symbols of the second kind, indexed [k, i, j] = Gamma^k_ij."""
    c = _coords(point, spec.dim)
    g, D = _metric_and_first_derivs(spec, c)
    return _christoffels_from_parts(_inverse_of(g), D)


def covariant_hessian(spec: MetricSpec, fieldspec: ScalarFieldSpec, point) -> np.ndarray:
    """Second covariant derivative H_ij = d_i d_j f - Gamma^k_ij d_k f."""
    c = _coords(point, spec.dim)
    if fieldspec.expr.arity != spec.dim:
        raise ValueError("scalar field arity does not match metric dimension")
    jet = jet2(fieldspec.expr, c)
    gamma = christoffels_of(spec, point)
    return jet.hessian - np.einsum("kij,k->ij", gamma, jet.gradient)


def laplacian(spec: MetricSpec, fieldspec: ScalarFieldSpec, point) -> float:
    """Laplace-Beltrami value g^ij H_ij at the point."""
    ginv = inverse_metric_at(spec, point)
    hess = covariant_hessian(spec, fieldspec, point)
    return float(np.einsum("ij,ij->", ginv, hess))
