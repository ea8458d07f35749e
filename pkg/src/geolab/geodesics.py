"""Geodesics of graph hypersurfaces: integration, boundary-value shooting,
first-exit maps and the winding degree of the exit map on surfaces.

The domain curve alpha of a graph geodesic gamma = (alpha, u o alpha)
satisfies  alpha'' = -(Hess u(alpha', alpha') / margin) * grad u,
so everything integrates in domain coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import fields
from .errors import (
    ConnectionNotFound,
    InsufficientSamples,
    LeftTimelikeRegion,
    NonTimelikePoint,
    StepUnderflow,
    Trapped,
)
from .fields import GraphSurface, ScalarField


@dataclass
class GeodesicState:
    """Domain position and domain velocity of a graph geodesic."""

    base: np.ndarray
    vel: np.ndarray

    def __post_init__(self):
        self.base = np.asarray(self.base, dtype=float)
        self.vel = np.asarray(self.vel, dtype=float)


@dataclass
class Trajectory:
    """An integrated geodesic: parameter grid, per-node states, and the
    conserved initial speed <gamma'(0), gamma'(0)> on the graph."""

    params: np.ndarray
    bases: np.ndarray
    vels: np.ndarray
    speed0: float
    surface: GraphSurface
    sol: object = None  # dense OdeSolution, when available

    def state_at(self, t: float) -> GeodesicState:
        if self.sol is None:
            i = int(np.argmin(np.abs(self.params - t)))
            return GeodesicState(self.bases[i], self.vels[i])
        y = self.sol(t)
        n = self.surface.u.domain.dim
        return GeodesicState(y[:n], y[n:])

    def speeds(self) -> np.ndarray:
        return np.array(
            [self.surface.speed(b, v) for b, v in zip(self.bases, self.vels)]
        )

    def speed_drift(self) -> float:
        return float(np.abs(self.speeds() - self.speed0).max())

    def resample(self, m: int):
        """Uniform parameter grid with bases and u-values, via the dense
        solution."""
        ts = np.linspace(self.params[0], self.params[-1], m)
        n = self.surface.u.domain.dim
        ys = self.sol(ts) if self.sol is not None else None
        if ys is None:
            raise ValueError("trajectory has no dense solution")
        return ts, ys[:n].T, ys[n:].T


def geodesic_rhs(u: ScalarField, s: GeodesicState) -> np.ndarray:
    """Domain acceleration -(Hess u(v, v) / margin) * grad u."""
    m = fields.margin(u, s.base)
    if m <= 0:
        raise NonTimelikePoint(f"margin {m} <= 0 at {s.base}")
    coeff = float(s.vel @ u.hess(s.base) @ s.vel) / m
    return -coeff * fields.lorentz_gradient(u, s.base)


def _ode_rhs(u: ScalarField, n: int):
    def rhs(t, y):
        base, vel = y[:n], y[n:]
        m = fields.margin(u, base)
        coeff = float(vel @ u.hess(base) @ vel) / m
        return np.concatenate([vel, -coeff * fields.lorentz_gradient(u, base)])

    return rhs


def integrate(
    u: ScalarField,
    s0: GeodesicState,
    t_end: float,
    tol: float = 1e-10,
    nodes_per_unit: int = 20,
) -> Trajectory:
    """Integrate the graph geodesic ODE with an adaptive embedded
    Runge-Kutta 4(5) pair; terminates with LeftTimelikeRegion if the
    margin reaches zero."""
    n = u.domain.dim
    if fields.margin(u, s0.base) <= 0:
        raise NonTimelikePoint(f"margin <= 0 at {s0.base}")
    surf = GraphSurface(u)
    y0 = np.concatenate([s0.base, s0.vel])
    if t_end == 0.0:
        return Trajectory(
            np.array([0.0]),
            s0.base[None, :],
            s0.vel[None, :],
            surf.speed(s0.base, s0.vel),
            surf,
        )

    def margin_event(t, y):
        return fields.margin(u, y[:n])

    margin_event.terminal = True
    k = max(2, int(nodes_per_unit * abs(t_end)) + 1)
    res = solve_ivp(
        _ode_rhs(u, n),
        (0.0, t_end),
        y0,
        method="RK45",
        rtol=tol,
        atol=tol * 1e-2,
        dense_output=True,
        t_eval=np.linspace(0.0, t_end, k),
        events=margin_event,
    )
    if res.status == 1:
        raise LeftTimelikeRegion(f"margin reached 0 at t = {res.t_events[0][0]}")
    if not res.success:
        # the RHS diverges as the margin vanishes, so the solver can
        # underflow just before the terminal event fires
        t_last = res.sol.t_max if res.sol is not None else 0.0
        if res.sol is not None and fields.margin(u, res.sol(t_last)[:n]) < 1e-2:
            raise LeftTimelikeRegion(f"margin collapsed near t = {t_last}")
        raise StepUnderflow(res.message)
    return Trajectory(
        res.t,
        res.y[:n].T,
        res.y[n:].T,
        surf.speed(s0.base, s0.vel),
        surf,
        sol=res.sol,
    )


# ---------------------------------------------------------------------------
# Boundary-value shooting


def _endpoint(u, p, v, n, tol):
    res = solve_ivp(
        _ode_rhs(u, n),
        (0.0, 1.0),
        np.concatenate([p, v]),
        method="RK45",
        rtol=tol,
        atol=tol,
    )
    if not res.success:
        return None
    return res.y[:n, -1]


def _endpoints_batch(u, p, vs, n, tol):
    """Endpoints of several shots integrated as one stacked system (shared
    adaptive step control); returns a list with None for diverged copies."""
    rhs1 = _ode_rhs(u, n)
    m = len(vs)

    def rhs(t, y):
        out = np.empty_like(y)
        for j in range(m):
            out[2 * n * j : 2 * n * (j + 1)] = rhs1(t, y[2 * n * j : 2 * n * (j + 1)])
        return out

    y0 = np.concatenate([np.concatenate([p, v]) for v in vs])
    res = solve_ivp(rhs, (0.0, 1.0), y0, method="RK45", rtol=tol, atol=tol)
    if not res.success:
        # fall back to individual shots so one divergent copy does not
        # poison the rest
        return [_endpoint(u, p, v, n, tol) for v in vs]
    return [res.y[2 * n * j : 2 * n * j + n, -1] for j in range(m)]


def connect(
    u: ScalarField,
    p,
    q,
    residual_tol: float = 1e-6,
    max_restarts: int = 32,
    tol: float = 1e-10,
    newton_iters: int = 30,
    seed: int = 0,
) -> Trajectory:
    """Find a geodesic of the graph of u from p to q by multistart shooting.

    Initial guess is the domain chord over parameter length 1; restarts
    perturb the chord with Gaussian noise.  Raises ConnectionNotFound with
    the best residual after max_restarts failures.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    n = u.domain.dim
    if np.array_equal(p, q):
        return integrate(u, GeodesicState(p, np.zeros(n)), 0.0, tol)

    chord = q - p
    shoot_tol = min(1e-9, tol * 10)
    rng = np.random.default_rng(seed)
    best = math.inf
    scale = max(1.0, float(np.linalg.norm(chord)))

    for attempt in range(max_restarts):
        v = chord.copy()
        if attempt > 0:
            v = v + rng.normal(scale=0.3 * scale * min(1.0, attempt / 4), size=n)
        for _ in range(newton_iters):
            # endpoint and finite-difference Jacobian columns in one
            # stacked integration
            h = 1e-7 * max(1.0, float(np.linalg.norm(v)))
            shots = [v] + [v + h * e for e in np.eye(n)]
            ends = _endpoints_batch(u, p, shots, n, shoot_tol)
            end = ends[0]
            if end is None:
                break
            r = end - q
            rnorm = float(np.linalg.norm(r))
            best = min(best, rnorm)
            if rnorm <= residual_tol / 4:
                break
            if any(e is None for e in ends[1:]):
                break
            J = np.stack([(e - end) / h for e in ends[1:]], axis=1)
            try:
                step = np.linalg.solve(J, -r)
            except np.linalg.LinAlgError:
                step, *_ = np.linalg.lstsq(J, -r, rcond=None)
            # damped update: backtrack until the residual shrinks
            lam, improved = 1.0, False
            for _ in range(8):
                end_new = _endpoint(u, p, v + lam * step, n, shoot_tol)
                if end_new is not None and np.linalg.norm(end_new - q) < rnorm:
                    v = v + lam * step
                    improved = True
                    break
                lam *= 0.5
            if not improved:
                break
        else:
            continue
        try:
            traj = integrate(u, GeodesicState(p, v), 1.0, tol)
        except (LeftTimelikeRegion, StepUnderflow, NonTimelikePoint):
            continue
        resid = float(np.linalg.norm(traj.bases[-1] - q))
        best = min(best, resid)
        if resid <= residual_tol:
            return traj
    raise ConnectionNotFound(
        f"no geodesic from {p} to {q} after {max_restarts} restarts "
        f"(best residual {best:.3e})",
        best_residual=best,
    )


# ---------------------------------------------------------------------------
# First-exit map and winding degree


@dataclass
class ExitResult:
    point: np.ndarray  # domain coordinates of the exit point
    param: float
    transversal: float  # (f o gamma)'(t0); positive certifies transversality
    trajectory: Trajectory


def first_exit(
    u: ScalarField,
    s0: GeodesicState,
    a: float,
    tol: float = 1e-10,
    budget: float = 1e3,
    refine_tol: float = 1e-10,
) -> ExitResult:
    """First parameter at which the geodesic's lift value u(alpha(t))
    reaches the level a, refined by bisection to |u - a| <= refine_tol.

    The parameter budget assumes a unit auxiliary-Euclidean initial speed;
    exhausting it raises Trapped.
    """
    n = u.domain.dim
    f0 = u.value(s0.base)
    if f0 >= a:
        raise ValueError(f"start value {f0} not below level {a}")

    def level_event(t, y):
        return u.value(y[:n]) - a

    level_event.terminal = True
    level_event.direction = 1

    res = solve_ivp(
        _ode_rhs(u, n),
        (0.0, budget),
        np.concatenate([s0.base, s0.vel]),
        method="RK45",
        rtol=tol,
        atol=tol,
        dense_output=True,
        events=level_event,
    )
    if not res.success:
        raise StepUnderflow(res.message)
    if res.status != 1 or len(res.t_events[0]) == 0:
        raise Trapped(f"no exit above level {a} within parameter budget {budget}")
    t0 = float(res.t_events[0][0])

    # bisection refinement on the dense solution
    lo = max(0.0, t0 - 1e-6 * max(1.0, t0))
    hi = min(res.t[-1], t0 + 1e-6 * max(1.0, t0))
    glo = u.value(res.sol(lo)[:n]) - a
    if glo > 0:
        lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        g = u.value(res.sol(mid)[:n]) - a
        if abs(g) <= refine_tol:
            t0 = mid
            break
        if g < 0:
            lo = mid
        else:
            hi = mid
    else:
        t0 = 0.5 * (lo + hi)

    y = res.sol(t0)
    base, vel = y[:n], y[n:]
    surf = GraphSurface(u)
    traj = Trajectory(
        res.t[res.t <= t0],
        res.y[:n, res.t <= t0].T,
        res.y[n:, res.t <= t0].T,
        surf.speed(s0.base, s0.vel),
        surf,
        sol=res.sol,
    )
    return ExitResult(base, t0, float(u.diff(base) @ vel), traj)


def winding_degree(
    u: ScalarField,
    p,
    a: float,
    m: int = 256,
    tol: float = 1e-10,
) -> int:
    """Winding number of the first-exit loop on a surface domain (n = 2).

    Shoots geodesics in m uniformly spaced auxiliary-Euclidean unit
    directions at p, tracks the angle of the exit point around p, and
    returns the total angle change over 2*pi.  Raises InsufficientSamples
    if consecutive exit points jump more than a half-turn.
    """
    p = np.asarray(p, dtype=float)
    if u.domain.dim != 2:
        raise ValueError("winding degree is implemented for surface domains only")
    thetas = np.linspace(0.0, 2 * math.pi, m, endpoint=False)
    angles = np.empty(m)
    for j, th in enumerate(thetas):
        v = np.array([math.cos(th), math.sin(th)])
        exit_ = first_exit(u, GeodesicState(p, v), a, tol=tol)
        d = exit_.point - p
        angles[j] = math.atan2(d[1], d[0])
    total = 0.0
    for j in range(m):
        delta = angles[(j + 1) % m] - angles[j]
        delta = (delta + math.pi) % (2 * math.pi) - math.pi
        if abs(delta) >= math.pi - 1e-9:
            raise InsufficientSamples(
                f"exit angle jumped {delta:.3f} rad between samples {j} and {j+1}"
            )
        total += delta
    return round(total / (2 * math.pi))


def rhs_defect(
    u: ScalarField, traj: Trajectory, samples: int = 33, h: float = 3e-5
) -> float:
    """Sup-norm defect of a trajectory against the geodesic equation.

    Re-integrates from the trajectory's initial state at a much tighter
    tolerance and compares centrally differenced velocities against the
    analytic RHS; the tight tolerance keeps the interpolation error of the
    evaluation points below the differencing truncation error.
    """
    if len(traj.params) < 2:
        return 0.0
    n = u.domain.dim
    t0, t1 = traj.params[0], traj.params[-1]
    ts = np.linspace(t0 + h, t1 - h, samples)
    t_eval = np.unique(np.concatenate([ts - h, ts, ts + h]))
    res = solve_ivp(
        _ode_rhs(u, n),
        (t0, t1),
        np.concatenate([traj.bases[0], traj.vels[0]]),
        method="RK45",
        rtol=1e-13,
        atol=1e-13,
        t_eval=t_eval,
    )
    if not res.success:
        raise StepUnderflow(res.message)
    at = {t: res.y[:, i] for i, t in enumerate(res.t)}
    worst = 0.0
    for t, tm, tp in zip(ts, ts - h, ts + h):
        acc_fd = (at[tp][n:] - at[tm][n:]) / (2 * h)
        acc = geodesic_rhs(u, GeodesicState(at[t][:n], at[t][n:]))
        worst = max(worst, float(np.abs(acc_fd - acc).max()))
    return worst
