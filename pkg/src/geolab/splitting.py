"""Orthogonal-splitting coefficient analysis for the hyperboloid graph
x2 = sqrt((x1)^2 + t^2 + 1) in E^3_1, the boost splitting of the same
surface, hypothesis-bound scans, and the null-ruled hypersurfaces L_{C,v}.

An orthogonal splitting writes the induced metric in product coordinates
(x, tau) as <z, z'> = A(x,tau) x x' - beta(x,tau) t t' with no cross term.
The level-flow chart transports the tau = 0 slice along the orthogonal
trajectories of the time function; its tau-ODE is

    dx1/dtau = -x1 sinh(tau) cosh(tau) / (cosh^2(tau) + 2 x1^2)

with the closed form beta = (1 + 2 x1^2) cosh^2(tau) / (2 x1^2 + cosh^2).
A has no closed form and is extracted from the variational equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import OrthogonalTangentPoint, PathSearchExhausted, StepUnderflow
from .semispace import SemiSpace, inner

AMBIENT = SemiSpace(2, 1)  # (x1, x2, t), time last


def beta_closed_form(x1, tau):
    """beta(x1, tau) = (1 + 2 x1^2) cosh^2(tau) / (2 x1^2 + cosh^2(tau))."""
    c2 = np.cosh(tau) ** 2
    return (1.0 + 2.0 * np.asarray(x1) ** 2) * c2 / (2.0 * np.asarray(x1) ** 2 + c2)


def _flow_rhs(tau, y):
    x1, J = y
    ch, sh = math.cosh(tau), math.sinh(tau)
    den = ch**2 + 2 * x1**2
    f = -x1 * sh * ch / den
    # variational equation for J = d x1 / d x0
    dfdx = -sh * ch * (ch**2 - 2 * x1**2) / den**2
    return [f, dfdx * J]


@dataclass
class LevelFlowResult:
    """One orthogonal trajectory of the level flow with its extracted
    splitting coefficients."""

    x0: float
    taus: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    t: np.ndarray
    A: np.ndarray  # extracted from the variational factor J
    beta: np.ndarray  # extracted from the pulled-back metric
    beta_closed: np.ndarray
    J: np.ndarray
    cross_max: float  # worst |<e_x, e_tau>| along the path

    def rows(self):
        for i in range(len(self.taus)):
            yield (
                self.taus[i],
                self.x1[i],
                self.x2[i],
                self.t[i],
                self.beta[i],
                self.A[i],
            )


def level_flow(
    x0: float,
    tau_range: tuple = (-6.0, 6.0),
    tol: float = 1e-10,
    samples: int = 241,
) -> LevelFlowResult:
    """Integrate the orthogonal trajectory through (x0, tau=0) over
    tau_range and extract A, beta, and the orthogonality defect.

    The trajectory stays on the surface via x2 = sqrt(x1^2 + t^2 + 1),
    t = sinh(tau).  e_x = (J, x1 J / x2, 0) gives A = J^2 (1 + (x1/x2)^2);
    e_tau = (x1_tau, x2_tau, cosh tau) gives beta = cosh^2 - x1_tau^2 -
    x2_tau^2.
    """
    lo, hi = float(tau_range[0]), float(tau_range[1])
    taus = np.linspace(lo, hi, samples)
    if not (lo <= 0.0 <= hi):
        raise ValueError("tau range must contain 0 (the seeded slice)")

    vals = np.empty((samples, 2))
    for sign in (-1, 1):
        mask = taus * sign > 0 if sign < 0 else taus >= 0
        ts = taus[mask]
        if len(ts) == 0:
            continue
        order = np.argsort(sign * ts)
        sol = solve_ivp(
            _flow_rhs,
            (0.0, ts[order][-1] if sign > 0 else ts[order][-1]),
            [x0, 1.0],
            t_eval=ts[order] if sign > 0 else ts[order],
            rtol=tol,
            atol=tol,
            method="RK45",
        )
        if not sol.success:
            raise StepUnderflow(f"level flow failed: {sol.message}")
        vals[np.flatnonzero(mask)[order]] = sol.y.T

    x1, J = vals[:, 0], vals[:, 1]
    t = np.sinh(taus)
    x2 = np.sqrt(x1**2 + t**2 + 1.0)
    ch, sh = np.cosh(taus), np.sinh(taus)
    x1_tau = -x1 * sh * ch / (ch**2 + 2 * x1**2)
    x2_tau = (x1 * x1_tau + sh * ch) / x2
    A = J**2 * (1.0 + (x1 / x2) ** 2)
    beta = ch**2 - x1_tau**2 - x2_tau**2
    cross = np.abs(J * x1_tau + (x1 * J / x2) * x2_tau)
    return LevelFlowResult(
        x0=x0,
        taus=taus,
        x1=x1,
        x2=x2,
        t=t,
        A=A,
        beta=beta,
        beta_closed=beta_closed_form(x1, taus),
        J=J,
        cross_max=float(cross.max()),
    )


# ---------------------------------------------------------------------------
# Split charts


@dataclass
class SplitChart:
    """Product coordinates (x, tau) with metric <A x, x'> - beta t t'."""

    name: str
    embed: Callable[[float, float], np.ndarray]
    A: Callable[[float, float], float]
    beta: Callable[[float, float], float]

    def jacobian(self, x, tau, step=1e-6):
        ex = (self.embed(x + step, tau) - self.embed(x - step, tau)) / (2 * step)
        et = (self.embed(x, tau + step) - self.embed(x, tau - step)) / (2 * step)
        return ex, et

    def metric_defect(self, x, tau, step=1e-6):
        """(cross term, |<e_x,e_x> - A|, |<e_tau,e_tau> + beta|) from the
        finite-difference Jacobian."""
        ex, et = self.jacobian(x, tau, step)
        return (
            abs(inner(AMBIENT, ex, et)),
            abs(inner(AMBIENT, ex, ex) - self.A(x, tau)),
            abs(inner(AMBIENT, et, et) + self.beta(x, tau)),
        )


def boost_chart() -> SplitChart:
    """The static splitting (x, tau) -> (x, cosh(tau) sqrt(1+x^2),
    sinh(tau) sqrt(1+x^2)) of the hyperboloid graph, with closed-form
    A = (1 + 2x^2)/(1 + x^2) and beta = 1 + x^2."""

    def embed(x, tau):
        r = math.sqrt(1.0 + x**2)
        return np.array([x, math.cosh(tau) * r, math.sinh(tau) * r])

    return SplitChart(
        name="boost",
        embed=embed,
        A=lambda x, tau: (1.0 + 2.0 * x**2) / (1.0 + x**2),
        beta=lambda x, tau: 1.0 + x**2,
    )


def level_chart(tol: float = 1e-10) -> SplitChart:
    """The level-flow splitting seeded on the tau = 0 slice; A and beta are
    computed by integrating the orthogonal trajectory from (x, 0)."""

    from functools import lru_cache

    @lru_cache(maxsize=4096)
    def run(x, span):
        return level_flow(x, (-span, span), tol=tol, samples=121)

    def at(x, tau, attr):
        res = run(float(x), max(6.0, abs(tau) + 0.5))
        return float(np.interp(tau, res.taus, getattr(res, attr)))

    def embed(x, tau):
        return np.array([at(x, tau, "x1"), at(x, tau, "x2"), math.sinh(tau)])

    return SplitChart(
        name="level-flow",
        embed=embed,
        A=lambda x, tau: at(x, tau, "A"),
        beta=lambda x, tau: float(beta_closed_form(at(x, tau, "x1"), tau)),
    )


@dataclass
class BoundScan:
    A_inf: float
    A_sup: float
    beta_inf: float
    beta_sup: float
    witnesses: dict
    flags: dict


def bound_scan(
    chart: SplitChart,
    x_range: tuple,
    tau_range: tuple,
    grid: int = 25,
    beta_cap: float = 1e3,
    a_floor: float = 1e-2,
) -> BoundScan:
    """Grid extrema of A and beta over a rectangle, with argument
    witnesses; flags record which boundedness hypotheses fail on the
    scanned region (beta blowing past beta_cap, A sinking under a_floor)."""
    xs = np.linspace(*x_range, grid)
    taus = np.linspace(*tau_range, grid)
    A_vals = np.array([[chart.A(x, t) for t in taus] for x in xs])
    b_vals = np.array([[chart.beta(x, t) for t in taus] for x in xs])

    def arg(vals, pick):
        i, j = np.unravel_index(pick(vals), vals.shape)
        return (float(xs[i]), float(taus[j]))

    return BoundScan(
        A_inf=float(A_vals.min()),
        A_sup=float(A_vals.max()),
        beta_inf=float(b_vals.min()),
        beta_sup=float(b_vals.max()),
        witnesses={
            "A_inf": arg(A_vals, np.argmin),
            "A_sup": arg(A_vals, np.argmax),
            "beta_inf": arg(b_vals, np.argmin),
            "beta_sup": arg(b_vals, np.argmax),
        },
        flags={
            "A_bounded_below": bool(A_vals.min() >= a_floor),
            "beta_bounded_above": bool(b_vals.max() <= beta_cap),
            "beta_positive": bool(b_vals.min() > 0),
        },
    )


# ---------------------------------------------------------------------------
# Null-ruled hypersurfaces L_{C,v} = {(p + t v, t) : p on C, t real}


@dataclass
class PlaneCurve:
    """Sampled convex plane curve with unit tangents; closed curves wrap."""

    name: str
    params: np.ndarray
    points: np.ndarray  # (m, 2)
    tangents: np.ndarray  # (m, 2), unit
    closed: bool


def circle_curve(m: int = 256) -> PlaneCurve:
    th = 2 * np.pi * np.arange(m) / m
    pts = np.stack([np.cos(th), np.sin(th)], axis=1)
    tan = np.stack([-np.sin(th), np.cos(th)], axis=1)
    return PlaneCurve("circle", th, pts, tan, closed=True)


def parabola_curve(x_range: tuple = (-4.0, 4.0), m: int = 256) -> PlaneCurve:
    xs = np.linspace(*x_range, m)
    pts = np.stack([xs, 1.0 + xs**2], axis=1)
    tan = np.stack([np.ones_like(xs), 2.0 * xs], axis=1)
    tan /= np.linalg.norm(tan, axis=1, keepdims=True)
    return PlaneCurve("parabola", xs, pts, tan, closed=False)


@dataclass
class NullRuledSurface:
    """L_{C,v} with its normal field N_L = (N(p), N(p).v); the ruling
    direction K = (v, 1) is null and tangent to L."""

    curve: PlaneCurve
    v: np.ndarray
    normals2d: np.ndarray  # plane normals N(p), unit

    @property
    def space(self) -> SemiSpace:
        return AMBIENT

    def point(self, i: int, t: float) -> np.ndarray:
        p = self.curve.points[i]
        return np.array([p[0] + t * self.v[0], p[1] + t * self.v[1], t])

    def normal(self, i: int) -> np.ndarray:
        n = self.normals2d[i]
        return np.array([n[0], n[1], float(n @ self.v)])

    @property
    def ruling(self) -> np.ndarray:
        return np.array([self.v[0], self.v[1], 1.0])


def null_ruled(curve: PlaneCurve, v, tol: float = 1e-9) -> NullRuledSurface:
    """Build L_{C,v} for a unit plane vector v, rejecting curves whose
    tangent is somewhere orthogonal to v (there |N . v| = 1 and the normal
    N_L degenerates to a null vector)."""
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise ValueError("ruling direction must be a unit vector")
    dots = curve.tangents @ v
    bad = np.flatnonzero(np.abs(dots) <= tol)
    if len(bad):
        i = int(bad[0])
        raise OrthogonalTangentPoint(
            f"tangent orthogonal to v at parameter {curve.params[i]}",
            witness=curve.points[i],
        )
    # plane normal: rotate tangent by 90 degrees
    normals = np.stack([-curve.tangents[:, 1], curve.tangents[:, 0]], axis=1)
    surf = NullRuledSurface(curve, v, normals)
    # timelike + null-ruling invariants
    for i in range(0, len(curve.points), max(1, len(curve.points) // 32)):
        nl = surf.normal(i)
        assert inner(AMBIENT, nl, nl) > 0, "L is not timelike at a sample"
        assert abs(inner(AMBIENT, nl, surf.ruling)) <= 1e-12
    assert abs(inner(AMBIENT, surf.ruling, surf.ruling)) <= 1e-12
    return surf


@dataclass
class DiamondResult:
    classification: str  # vanishes | constant_sign | mixed
    path_params: np.ndarray
    path_points: np.ndarray


def diamond_check(
    curve: PlaneCurve, v, p, q, tol: float = 1e-9
) -> DiamondResult:
    """Classify <alpha', v> along candidate paths on C from p to q: the
    connectedness condition wants a path of constant sign or one along
    which it vanishes identically.

    Equal heights <p, v> = <q, v> use the level segment between them (the
    ruling argument); otherwise both arcs along C are tried and the best
    classification (vanishes > constant_sign > mixed) is reported.
    """
    v = np.asarray(v, dtype=float)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    ip = int(np.argmin(np.linalg.norm(curve.points - p, axis=1)))
    iq = int(np.argmin(np.linalg.norm(curve.points - q, axis=1)))
    if np.linalg.norm(curve.points[ip] - p) > 1e-6 or np.linalg.norm(
        curve.points[iq] - q
    ) > 1e-6:
        raise PathSearchExhausted("endpoints not on the sampled curve")

    if ip == iq:
        return DiamondResult("vanishes", curve.params[[ip]], curve.points[[ip]])
    if abs(float((p - q) @ v)) <= tol * max(1.0, np.linalg.norm(p - q)):
        # equal-height endpoints: straight level segment, <alpha', v> = 0
        seg = np.linspace(0, 1, 33)[:, None] * (q - p)[None, :] + p[None, :]
        return DiamondResult("vanishes", np.array([0.0, 1.0]), seg)

    def arc(i, j, direction):
        m = len(curve.points)
        if direction > 0:
            idx = np.arange(i, j + 1) if j >= i else np.arange(i, j + m + 1) % m
        else:
            idx = np.arange(i, j - 1, -1) if j <= i else np.arange(i, j - m - 1, -1) % m
        return idx

    candidates = [arc(ip, iq, +1)]
    if curve.closed:
        candidates.append(arc(ip, iq, -1))

    def classify(idx):
        d = curve.tangents[idx] @ v
        scale = max(1.0, float(np.abs(d).max()))
        if np.all(np.abs(d) <= tol * scale):
            return "vanishes"
        if np.all(d >= -tol * scale) or np.all(d <= tol * scale):
            return "constant_sign"
        return "mixed"

    order = {"vanishes": 0, "constant_sign": 1, "mixed": 2}
    best_idx, best_cls = None, None
    for idx in candidates:
        cls = classify(idx)
        if best_cls is None or order[cls] < order[best_cls]:
            best_idx, best_cls = idx, cls
    return DiamondResult(best_cls, curve.params[best_idx], curve.points[best_idx])
