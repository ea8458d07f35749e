"""Scalar fields on flat semi-Euclidean domains and their graph hypersurfaces.

A field u on E^n_1 with 1 + <grad u, grad u> > 0 has a timelike graph in
E^(n+1)_1 = E^n_1 x R, where the extra graph coordinate is spacelike.  The
ambient coordinate order keeps the time coordinate last, so a domain point
(x_1, ..., x_{n-1}, t) lifts to (x_1, ..., x_{n-1}, y, t) with y = u(p).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .errors import DegeneratePlane, NonTimelikePoint
from .semispace import NULL_EPS, SemiSpace, euclid_flip, inner


@dataclass(frozen=True)
class ScalarField:
    """A smooth function on a flat semi-Euclidean domain.

    Derivatives are analytic callbacks: value(p) -> float, diff(p) -> the
    coordinate differential (covector components), hess(p) -> the symmetric
    matrix of second partials.  In affine coordinates on a flat domain the
    covariant Hessian equals the matrix of second partials, so hess() is
    both.  Finite differences are used only as a validation oracle
    (see fd_consistency).
    """

    domain: SemiSpace
    value: Callable[[np.ndarray], float]
    diff: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"


def fd_consistency(u: ScalarField, points, step: float = 1e-5) -> float:
    """Max relative error of diff/hess against central finite differences
    of value at the given probe points.  Validation oracle only."""
    worst = 0.0
    d = u.domain.dim
    for p in np.atleast_2d(points):
        g = np.zeros(d)
        H = np.zeros((d, d))
        for i in range(d):
            ei = np.zeros(d)
            ei[i] = step
            g[i] = (u.value(p + ei) - u.value(p - ei)) / (2 * step)
            H[i, i] = (u.value(p + ei) - 2 * u.value(p) + u.value(p - ei)) / step**2
            for j in range(i):
                ej = np.zeros(d)
                ej[j] = step
                H[i, j] = H[j, i] = (
                    u.value(p + ei + ej)
                    - u.value(p + ei - ej)
                    - u.value(p - ei + ej)
                    + u.value(p - ei - ej)
                ) / (4 * step**2)
        scale = max(1.0, float(np.abs(u.diff(p)).max()), float(np.abs(u.hess(p)).max()))
        worst = max(
            worst,
            float(np.abs(g - u.diff(p)).max()) / scale,
            float(np.abs(H - u.hess(p)).max()) / scale,
        )
    return worst


def lorentz_gradient(u: ScalarField, p) -> np.ndarray:
    """Metric-raised differential: timelike components of du negated, so
    that inner(grad u, x) = du(x) for every x."""
    return euclid_flip(u.domain, u.diff(np.asarray(p, dtype=float)))


def margin(u: ScalarField, p) -> float:
    """1 + <grad u, grad u>; positive exactly where the graph is timelike."""
    g = lorentz_gradient(u, p)
    return 1.0 + inner(u.domain, g, g)


def lifted_hessian(u: ScalarField, p, x, y) -> float:
    """Hessian of the lift of u to its graph, applied to the domain
    projections x, y: Hess u(x, y) / margin(u, p)."""
    m = margin(u, p)
    if m <= 0:
        raise NonTimelikePoint(f"margin {m} <= 0 at {p}")
    x = u.domain.check(x)
    y = u.domain.check(y)
    return float(x @ u.hess(np.asarray(p, dtype=float)) @ y) / m


def graph_curvature(u: ScalarField, p, x, y):
    """Unnormalized curvature R(x,y,x,y) of the graph on the plane spanned
    by the lifts of x and y, plus the plane's causal type.

    Returns (R, plane_type) with
    R = (Hess u(x,x) Hess u(y,y) - Hess u(x,y)^2) / margin and plane_type
    from the sign of the lifted plane's Gram discriminant.  R is left
    undivided by the discriminant; for a timelike plane (discriminant < 0)
    R >= 0 means sectional curvature <= 0.
    """
    m = margin(u, p)
    if m <= 0:
        raise NonTimelikePoint(f"margin {m} <= 0 at {p}")
    p = np.asarray(p, dtype=float)
    x = u.domain.check(x)
    y = u.domain.check(y)
    H = u.hess(p)
    R = float((x @ H @ x) * (y @ H @ y) - (x @ H @ y) ** 2) / m

    surf = GraphSurface(u)
    xb = surf.lift_tangent(p, x)
    yb = surf.lift_tangent(p, y)
    amb = surf.ambient
    gxx = inner(amb, xb, xb)
    gyy = inner(amb, yb, yb)
    gxy = inner(amb, xb, yb)
    disc = gxx * gyy - gxy**2
    scale = max(1.0, float(np.dot(xb, xb)) * float(np.dot(yb, yb)))
    if abs(disc) <= NULL_EPS * scale:
        raise DegeneratePlane(f"plane discriminant {disc} within tolerance of 0")
    plane_type = "spacelike" if disc > 0 else "timelike"
    return R, plane_type


@dataclass(frozen=True)
class GraphSurface:
    """The graph of u over E^n_1, embedded in E^(n+1)_1 with a spacelike
    graph coordinate inserted before the time coordinate."""

    u: ScalarField
    ambient: SemiSpace = dc_field(init=False)

    def __post_init__(self):
        dom = self.u.domain
        object.__setattr__(self, "ambient", SemiSpace(dom.n + 1, dom.k))

    @property
    def _y_slot(self) -> int:
        return self.u.domain.n

    def lift_point(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return np.insert(p, self._y_slot, self.u.value(p))

    def lift_tangent(self, p, x) -> np.ndarray:
        """Tangent lift: graph component is du(x)."""
        p = np.asarray(p, dtype=float)
        x = self.u.domain.check(x)
        return np.insert(x, self._y_slot, float(self.u.diff(p) @ x))

    def project(self, xbar) -> np.ndarray:
        return np.delete(np.asarray(xbar, dtype=float), self._y_slot)

    def normal(self, p) -> np.ndarray:
        """Inward ambient normal (raised gradient of y - u); spacelike with
        squared length equal to margin(u, p)."""
        p = np.asarray(p, dtype=float)
        cov = np.insert(-self.u.diff(p), self._y_slot, 1.0)
        return euclid_flip(self.ambient, cov)

    def speed(self, p, v) -> float:
        """<lift(v), lift(v)> in the ambient metric: <v,v> + du(v)^2.

        Evaluated in extended precision: the terms cancel to O(1) while
        each grows with the coordinates, so float64 evaluation alone
        costs ~|v|^2 * eps of spurious drift on long geodesics.
        """
        self.u.domain.check(p)
        self.u.domain.check(v)
        p = np.asarray(p, dtype=np.longdouble)
        v = np.asarray(v, dtype=np.longdouble)
        n = self.u.domain.n
        du_v = np.asarray(self.u.diff(p)) @ v
        return float(v[:n] @ v[:n] - v[n:] @ v[n:] + du_v**2)

    def height(self, p, v0) -> float:
        """<lift(p), v0> in the ambient metric."""
        return inner(self.ambient, self.lift_point(p), v0)


# ---------------------------------------------------------------------------
# Built-in field catalog


def hyperboloid_field(dim: int = 2) -> ScalarField:
    """u(p) = sqrt(|p|^2 + 1) on E^dim_1: the strictly convex timelike
    graph studied in the splitting analysis (dim = 2) and its
    higher-dimensional analogue."""
    dom = SemiSpace(dim - 1, 1)

    def val(p):
        return float(np.sqrt(float(np.dot(p, p)) + 1.0))

    def diff(p):
        # dtype-preserving so invariants can be evaluated in extended
        # precision on coordinates that grow large along geodesics
        p = np.asarray(p)
        return p / np.sqrt(np.dot(p, p) + 1.0)

    def hess(p):
        p = np.asarray(p, dtype=float)
        f = val(p)
        return ((f**2) * np.eye(dim) - np.outer(p, p)) / f**3

    return ScalarField(dom, val, diff, hess, name=f"hyperboloid{dim}" if dim != 2 else "hyperboloid")


def paraboloid_field() -> ScalarField:
    """u(x, t) = (x^2 + t^2) / 2 on E^2_1 (Lorentzian only where
    x^2 - t^2 > -1)."""
    dom = SemiSpace(1, 1)
    return ScalarField(
        dom,
        value=lambda p: 0.5 * float(p[0] ** 2 + p[1] ** 2),
        diff=lambda p: np.asarray(p, dtype=float).copy(),
        hess=lambda p: np.eye(2),
        name="paraboloid",
    )


def linear_field(coeffs=(0.3, 0.2), const: float = 0.0) -> ScalarField:
    c = np.asarray(coeffs, dtype=float)
    dom = SemiSpace(len(c) - 1, 1)
    return ScalarField(
        dom,
        value=lambda p: float(c @ p) + const,
        diff=lambda p: c.copy(),
        hess=lambda p: np.zeros((len(c), len(c))),
        name="linear",
    )


def get_field(name: str) -> ScalarField:
    """Resolve a catalog name: 'hyperboloid', 'hyperboloid3', 'paraboloid',
    'linear', or 'warbled:<sigma-name>' (sigma over the hyperboloid field)."""
    if name == "hyperboloid":
        return hyperboloid_field()
    if name == "hyperboloid3":
        return hyperboloid_field(3)
    if name == "paraboloid":
        return paraboloid_field()
    if name == "linear":
        return linear_field()
    if name.startswith("warbled:"):
        from .convexity import get_sigma, warble

        return warble(hyperboloid_field(), get_sigma(name.split(":", 1)[1]))
    raise KeyError(f"unknown field {name!r}")
