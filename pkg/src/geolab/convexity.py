"""Convexification of level sets: the eta/mu criterion, the lower bound h,
the reparametrization ODE rho'' + h rho' = 0, and the warble construction.

Given a proper nonnegative field u whose level sets are infinitesimally
convex, mu(a) measures how badly u fails to be convex across level a.  A
continuous minorant h of mu (taken nonpositive) feeds the ODE; its solution
rho has rho' = exp(-int h) >= 1 and f = rho o u is convex with the same
levels as u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np
from scipy.optimize import brentq, minimize

from .errors import (
    ConditionThreeViolated,
    CriticalPoint,
    FailedVerification,
    NegativeTangentHessian,
    SigmaSlopeViolation,
)
from .fields import ScalarField

TANGENT_NULL_TOL = 1e-10
CROSS_TOL = 1e-6


@dataclass(frozen=True)
class TransversalField:
    """A vector field N with N_p u > 0 off the critical set."""

    N: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"

    def __call__(self, p) -> np.ndarray:
        return self.N(np.asarray(p, dtype=float))


def euclid_gradient_field(u: ScalarField) -> TransversalField:
    """Default transversal field: the auxiliary-Euclidean gradient of u
    (components of du read as a vector), which satisfies Nu = |du|^2 > 0
    off the critical set."""
    return TransversalField(lambda p: u.diff(p).copy(), name="euclid-gradient")


@dataclass
class LevelSample:
    """Points on the level {u = a} with tangent frames (du(x) = 0)."""

    a: float
    points: np.ndarray  # (k, d)
    frames: list  # per point: (d-1, d) array of tangent directions


def sample_level(
    u: ScalarField,
    a: float,
    k: int,
    minimizer,
    seed: int = 0,
    s_max: float = 1e3,
) -> LevelSample:
    """Solve u(p0 + s d) = a along k random rays from the minimizer by
    bisection; tangent frames by orthogonal completion of du under the
    auxiliary Euclidean product."""
    p0 = np.asarray(minimizer, dtype=float)
    d = u.domain.dim
    rng = np.random.default_rng(seed)
    pts, frames = [], []
    while len(pts) < k:
        v = rng.normal(size=d)
        v /= np.linalg.norm(v)

        def g(s):
            return u.value(p0 + s * v) - a

        hi = 1.0
        while g(hi) < 0 and hi < s_max:
            hi *= 2.0
        if g(hi) < 0:
            continue  # level not reached along this ray
        s = brentq(g, 0.0, hi, xtol=1e-13, rtol=8.9e-16)
        p = p0 + s * v
        du = u.diff(p)
        # tangent frame: Euclidean-orthogonal complement of du
        basis = np.linalg.svd(du[None, :])[2][1:]
        pts.append(p)
        frames.append(basis)
    return LevelSample(a, np.array(pts), frames)


def eta(u: ScalarField, N: TransversalField, p) -> float:
    """Hess u(N_p, N_p) / (N_p u)^2."""
    p = np.asarray(p, dtype=float)
    Np = N(p)
    du = u.diff(p)
    Nu = float(du @ Np)
    if Nu <= 0 or np.linalg.norm(du) == 0:
        raise CriticalPoint(f"N u = {Nu} <= 0 at {p}")
    return float(Np @ u.hess(p) @ Np) / Nu**2


def mu(u: ScalarField, N: TransversalField, sample: LevelSample) -> float:
    """Infimum over the sampled level of eta(p) and
    eta(p) - Hess u(x, N_p)^2 / ((N_p u)^2 Hess u(x, x)).

    Condition (2) (tangent Hessian positive semidefinite) and condition (3)
    (tangent null directions have vanishing cross term) are enforced with
    witnesses.
    """
    if len(sample.points) == 0:
        raise ValueError("empty level sample")
    best = math.inf
    for p, frame in zip(sample.points, sample.frames):
        H = u.hess(p)
        Np = N(p)
        Nu = float(u.diff(p) @ Np)
        if Nu <= 0:
            raise CriticalPoint(f"N u = {Nu} <= 0 at {p}")
        e = float(Np @ H @ Np) / Nu**2
        best = min(best, e)
        for x in frame:
            hxx = float(x @ H @ x)
            hxn = float(x @ H @ Np)
            if hxx < -TANGENT_NULL_TOL * max(1.0, abs(H).max()):
                raise NegativeTangentHessian(
                    f"Hess u(x,x) = {hxx} < 0 on level {sample.a}", witness=(p, x)
                )
            if abs(hxx) <= TANGENT_NULL_TOL:
                if abs(hxn) > CROSS_TOL * float(np.linalg.norm(Np)):
                    raise ConditionThreeViolated(
                        f"null tangent with cross term {hxn} on level {sample.a}",
                        witness=(p, x),
                    )
                continue
            best = min(best, e - hxn**2 / (Nu**2 * hxx))
    return best


def mu_strict_form(u: ScalarField, N: TransversalField, sample: LevelSample) -> float:
    """Determinant form of mu, valid when Hess u is positive definite on
    the level tangents:
    [Hess u(x,x) Hess u(N,N) - Hess u(x,N)^2] / ((Nu)^2 Hess u(x,x))."""
    best = math.inf
    for p, frame in zip(sample.points, sample.frames):
        H = u.hess(p)
        Np = N(p)
        Nu = float(u.diff(p) @ Np)
        hnn = float(Np @ H @ Np)
        for x in frame:
            hxx = float(x @ H @ x)
            hxn = float(x @ H @ Np)
            best = min(best, (hxx * hnn - hxn**2) / (Nu**2 * hxx))
    return best


# ---------------------------------------------------------------------------
# Piecewise-linear minorant and the reparametrization ODE


@dataclass
class PiecewiseLinear:
    """Continuous piecewise-linear function with constant continuation
    outside its knots."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float)
        self.ys = np.asarray(self.ys, dtype=float)
        if len(self.xs) < 1 or np.any(np.diff(self.xs) <= 0):
            raise ValueError("knots must be strictly increasing and nonempty")

    def __call__(self, a):
        return np.interp(a, self.xs, self.ys)

    def clamped_nonpositive(self) -> "PiecewiseLinear":
        # zero crossings become knots so the clamp stays piecewise linear
        xs = list(self.xs)
        for i in range(len(self.xs) - 1):
            y0, y1 = self.ys[i], self.ys[i + 1]
            if y0 * y1 < 0:
                xs.append(self.xs[i] + (self.xs[i + 1] - self.xs[i]) * y0 / (y0 - y1))
        xs = np.unique(np.array(xs))
        return PiecewiseLinear(xs, np.minimum(self(xs), 0.0))

    def integral(self, lo: float, hi: float) -> float:
        """Exact integral over [lo, hi] (trapezoid on the knot partition,
        constant continuation outside)."""
        if hi < lo:
            return -self.integral(hi, lo)
        grid = np.unique(np.concatenate([[lo, hi], self.xs[(self.xs > lo) & (self.xs < hi)]]))
        vals = self(grid)
        return float(np.trapezoid(vals, grid))


def fit_h(mu_table, delta: float | None = None) -> PiecewiseLinear:
    """Continuous piecewise-linear minorant of sampled mu values minus a
    safety margin delta, extended by constant continuation.

    delta defaults to 0.05 * (1 + |min sample|) -- a heuristic guard for the
    gap between the sampled and true infimum, not a certificate.  If every
    sample is nonnegative the zero function suffices and delta is skipped.
    """
    table = np.asarray(mu_table, dtype=float)
    if table.ndim != 2 or len(table) == 0:
        raise ValueError("mu table must be a nonempty array of (a, mu) rows")
    a = table[:, 0]
    if np.any(np.diff(a) <= 0):
        raise ValueError("levels must be increasing")
    m = table[:, 1]
    if m.min() >= 0:
        return PiecewiseLinear(a, np.zeros_like(m))
    if delta is None:
        delta = 0.05 * (1.0 + abs(float(m.min())))
    return PiecewiseLinear(a, m - delta)


@dataclass
class RhoTable:
    """Tabulated solution of rho'' + h rho' = 0 with rho(a0) = a0 and
    rho'(a) = exp(-int_{a0}^a h) >= 1 (h nonpositive)."""

    h: PiecewiseLinear
    a0: float
    a1: float
    grid: np.ndarray = dc_field(init=False)
    rho_vals: np.ndarray = dc_field(init=False)

    def __post_init__(self, points_per_unit: int = 4000):
        n = max(64, int(points_per_unit * (self.a1 - self.a0)) + 1)
        grid = np.linspace(self.a0, self.a1, n)
        grid = np.unique(
            np.concatenate([grid, self.h.xs[(self.h.xs > self.a0) & (self.h.xs < self.a1)]])
        )
        rp = self.rho_prime(grid)
        rho = np.concatenate([[0.0], np.cumsum(np.diff(grid) * 0.5 * (rp[1:] + rp[:-1]))])
        self.grid = grid
        self.rho_vals = self.a0 + rho

    def rho_prime(self, a):
        a = np.atleast_1d(np.asarray(a, dtype=float))
        out = np.array([math.exp(-self.h.integral(self.a0, ai)) for ai in a])
        return out if out.size > 1 else float(out[0])

    def rho_second(self, a):
        return -self.h(a) * self.rho_prime(a)

    def rho(self, a):
        return np.interp(a, self.grid, self.rho_vals)

    def ode_residual(self, per_segment: int = 32, step: float = 1e-5) -> float:
        """Max |rho''_fd + h rho'| with rho'' by a local central difference
        of the exact rho', sampled on segment interiors (rho'' has
        derivative kinks at the knots of h, where differencing across a
        knot would be invalid)."""
        knots = np.unique(np.concatenate([[self.a0, self.a1], self.h.xs]))
        knots = knots[(knots >= self.a0) & (knots <= self.a1)]
        worst = 0.0
        for lo, hi in zip(knots[:-1], knots[1:]):
            if hi - lo < 1e-12:
                continue
            xs = np.linspace(lo, hi, per_segment + 2)[1:-1]
            d = min(step, 0.25 * (hi - lo) / (per_segment + 2))
            for x in xs:
                fd = (self.rho_prime(x + d) - self.rho_prime(x - d)) / (2 * d)
                worst = max(worst, abs(fd + self.h(x) * self.rho_prime(x)))
        return worst


def solve_rho(h: PiecewiseLinear, rng: tuple) -> RhoTable:
    """Solve the reparametrization ODE over [a0, a1].

    h is shifted to min(h, 0) first (the criterion allows assuming h
    nonpositive); the shift is visible on the returned table's h.
    """
    a0, a1 = float(rng[0]), float(rng[1])
    if a1 <= a0:
        raise ValueError("empty range")
    return RhoTable(h.clamped_nonpositive(), a0, a1)


# ---------------------------------------------------------------------------
# Warble maps


@dataclass(frozen=True)
class Sigma:
    """A proper smooth reparametrization of field values with 0 < s' <= 1."""

    name: str
    s: Callable[[float], float]
    ds: Callable[[float], float]
    d2s: Callable[[float], float]


def get_sigma(name: str) -> Sigma:
    if name == "identity":
        return Sigma("identity", lambda s: s, lambda s: 1.0, lambda s: 0.0)
    if name == "soft":
        # slope 1 - exp(-s)/2 stays in (1/2, 1]
        return Sigma(
            "soft",
            lambda s: s - (1.0 - math.exp(-s)) / 2.0,
            lambda s: 1.0 - math.exp(-s) / 2.0,
            lambda s: math.exp(-s) / 2.0,
        )
    raise KeyError(f"unknown sigma {name!r}")


def warble(
    f: ScalarField,
    sigma: Sigma,
    box: float = 6.0,
    grid: int = 201,
) -> ScalarField:
    """Compose u = sigma o f with chain-rule derivatives.

    Verifies 0 < sigma' <= 1 on a dense grid of the range of f over the
    probe box; the slope bound keeps u Lorentzian whenever f is, since
    <grad u, grad u> = <grad f, grad f> (sigma' o f)^2 > -1.
    """
    d = f.domain.dim
    axes = [np.linspace(-box, box, max(3, int(round(grid ** (1 / d))))) for _ in range(d)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    fvals = np.array([f.value(p) for p in mesh])
    for s in np.linspace(fvals.min(), fvals.max(), grid):
        slope = sigma.ds(float(s))
        if not 0.0 < slope <= 1.0 + 1e-12:
            raise SigmaSlopeViolation(
                f"sigma'({s}) = {slope} outside (0, 1]", witness=float(s)
            )

    def val(p):
        return sigma.s(f.value(p))

    def diff(p):
        return sigma.ds(f.value(p)) * f.diff(p)

    def hess(p):
        df = f.diff(p)
        fv = f.value(p)
        return sigma.d2s(fv) * np.outer(df, df) + sigma.ds(fv) * f.hess(p)

    return ScalarField(f.domain, val, diff, hess, name=f"warbled:{sigma.name}({f.name})")


# ---------------------------------------------------------------------------
# The convexify pipeline


@dataclass
class ConvexifyReport:
    conditions: dict
    mu_table: list
    h_knots: list
    h_shifted: bool
    rho_range: tuple
    ode_residual: float
    min_eigenvalue: float
    witness: list | None
    minimizer: list
    u_min: float
    seed: int

    def to_dict(self):
        return {
            "conditions": self.conditions,
            "mu_table": self.mu_table,
            "h_knots": self.h_knots,
            "h_shifted": self.h_shifted,
            "rho_range": list(self.rho_range),
            "ode_residual": self.ode_residual,
            "verification": {
                "min_eigenvalue": self.min_eigenvalue,
                "witness": self.witness,
            },
            "minimizer": self.minimizer,
            "u_min": self.u_min,
            "seed": self.seed,
        }


@dataclass
class ConvexifyResult:
    h: PiecewiseLinear
    rho: RhoTable
    f: ScalarField
    report: ConvexifyReport


def _find_minimizer(u: ScalarField):
    res = minimize(u.value, np.zeros(u.domain.dim), jac=u.diff, method="BFGS")
    return res.x, float(res.fun)


def convexify(
    u: ScalarField,
    N: TransversalField | None = None,
    n_levels: int = 24,
    samples_per_level: int = 48,
    a_max: float | None = None,
    box: float = 3.0,
    n_probes: int = 1000,
    seed: int = 0,
    eig_tol: float = 1e-8,
) -> ConvexifyResult:
    """Full pipeline: sample levels, tabulate mu, fit h, solve rho, compose
    f = rho o u and spot-check Hess f for positive semidefiniteness.

    Raises FailedVerification if the assembled Hessian has an eigenvalue
    below -eig_tol at any probe; propagates the condition (2)/(3) errors
    from mu.
    """
    if N is None:
        N = euclid_gradient_field(u)
    rng = np.random.default_rng(seed)
    d = u.domain.dim

    p_min, u_min = _find_minimizer(u)
    if a_max is None:
        corners = box * (2 * ((np.arange(2**d)[:, None] >> np.arange(d)) & 1) - 1)
        a_max = float(max(u.value(c) for c in corners))

    # condition (1): gradient vanishes only near the reported minimizer
    c1 = True
    for _ in range(200):
        p = rng.uniform(-box, box, size=d)
        if np.linalg.norm(u.diff(p)) <= 1e-8 and np.linalg.norm(p - p_min) > 1e-3:
            c1 = False
            break

    # near-critical sampling radius: smallest level at 5% of the span
    levels = u_min + np.linspace(0.05, 1.0, n_levels) * (a_max - u_min)
    mu_rows, c2, c3 = [], True, True
    for i, a in enumerate(levels):
        sample = sample_level(u, float(a), samples_per_level, p_min, seed=seed + i)
        try:
            mu_rows.append((float(a), mu(u, N, sample)))
        except NegativeTangentHessian:
            c2 = False
            raise
        except ConditionThreeViolated:
            c3 = False
            raise

    h = fit_h(mu_rows)
    shifted = bool(np.any(h(h.xs) > 0))
    rho = solve_rho(h, (u_min, a_max))

    def val(p):
        return float(rho.rho(u.value(p)))

    def diff(p):
        return rho.rho_prime(u.value(p)) * u.diff(p)

    def hess(p):
        du = u.diff(p)
        uv = u.value(p)
        return rho.rho_second(uv) * np.outer(du, du) + rho.rho_prime(uv) * u.hess(p)

    f = ScalarField(u.domain, val, diff, hess, name=f"convexified({u.name})")

    min_eig, witness = math.inf, None
    probes = 0
    while probes < n_probes:
        p = rng.uniform(-box, box, size=d)
        if u.value(p) > a_max:
            continue
        probes += 1
        lam = float(np.linalg.eigvalsh(f.hess(p))[0])
        if lam < min_eig:
            min_eig, witness = lam, p.copy()
    report = ConvexifyReport(
        conditions={"c1": c1, "c2": c2, "c3": c3, "c4": True},
        mu_table=[[a, m] for a, m in mu_rows],
        h_knots=[[float(x), float(y)] for x, y in zip(rho.h.xs, rho.h.ys)],
        h_shifted=shifted,
        rho_range=(float(u_min), float(a_max)),
        ode_residual=rho.ode_residual(),
        min_eigenvalue=min_eig,
        witness=list(map(float, witness)) if witness is not None else None,
        minimizer=list(map(float, p_min)),
        u_min=u_min,
        seed=seed,
    )
    if min_eig < -eig_tol:
        raise FailedVerification(
            f"Hess(rho o u) eigenvalue {min_eig} at {witness}",
            witness=witness,
            min_eigenvalue=min_eig,
        )
    return ConvexifyResult(h=rho.h, rho=rho, f=f, report=report)


# ---------------------------------------------------------------------------
# Convexity certificates along geodesics


@dataclass
class GeodesicConvexityReport:
    min_second_difference: float
    classification: str  # convex | strictly-convex | nonconvex
    witness: tuple | None  # (trajectory index, parameter)


def geodesic_convexity_report(
    value_on_domain: Callable[[np.ndarray], float],
    trajectories,
    samples: int = 201,
    tol: float = 1e-8,
) -> GeodesicConvexityReport:
    """Second differences of a field along integrated geodesics.

    value_on_domain evaluates the field at domain points of the graph (the
    lift or an ambient height function restricted to the graph).
    """
    best, witness = math.inf, None
    for idx, traj in enumerate(trajectories):
        ts, bases, _ = traj.resample(samples)
        if len(ts) < 3:
            continue
        step = ts[1] - ts[0]
        vals = np.array([value_on_domain(b) for b in bases])
        sd = (vals[2:] - 2 * vals[1:-1] + vals[:-2]) / step**2
        i = int(np.argmin(sd))
        if sd[i] < best:
            best, witness = float(sd[i]), (idx, float(ts[i + 1]))
    if best > tol:
        cls = "strictly-convex"
    elif best >= -tol:
        cls = "convex"
    else:
        cls = "nonconvex"
    return GeodesicConvexityReport(best, cls, witness)
