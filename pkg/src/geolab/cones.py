"""Dual-cone algebra in semi-Euclidean spaces and recession/normal cone
analysis of convex hypersurfaces.

The dual of a cone K is K* = {w : <w, x> >= 0 for all x in K} under the
indefinite inner product.  Since <w, x> = euclid_flip(w) . x, all polyhedral
computations reduce to Euclidean double-description conversion after a flip.
Ambient dimension is capped at 6 (desk scale).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog, lsq_linear

from .errors import (
    ConeDegenerate,
    DimensionTooLarge,
    NotInCone,
)
from .semispace import SemiSpace, euclid_flip, inner

INCIDENCE_TOL = 1e-9
MAX_DIM = 6
EXACT_DIM = 4  # rational double description below this many coordinates


@dataclass
class PolyCone:
    """Convex cone given by generators (conic hull), halfspaces
    {x : <w, x> >= 0}, or both."""

    space: SemiSpace
    generators: np.ndarray | None = None
    halfspaces: np.ndarray | None = None

    def __post_init__(self):
        if self.space.dim > MAX_DIM:
            raise DimensionTooLarge(f"dimension {self.space.dim} > {MAX_DIM}")
        if self.generators is not None:
            self.generators = np.atleast_2d(np.asarray(self.generators, dtype=float))
        if self.halfspaces is not None:
            self.halfspaces = np.atleast_2d(np.asarray(self.halfspaces, dtype=float))
        if self.generators is None and self.halfspaces is None:
            raise ValueError("cone needs generators or halfspaces")

    def contains(self, x, tol: float = INCIDENCE_TOL) -> bool:
        x = self.space.check(x)
        scale = max(1.0, float(np.linalg.norm(x)))
        if self.halfspaces is not None:
            flipped = np.array([euclid_flip(self.space, w) for w in self.halfspaces])
            return bool(np.all(flipped @ x >= -tol * scale))
        # generator form: nonnegative least squares on the conic hull
        res = lsq_linear(
            self.generators.T, x, bounds=(0.0, np.inf), method="bvls", tol=1e-14
        )
        resid = float(np.linalg.norm(self.generators.T @ res.x - x))
        return resid <= tol * scale

    def ensure_generators(self) -> np.ndarray:
        if self.generators is None:
            flipped = np.array([euclid_flip(self.space, w) for w in self.halfspaces])
            self.generators = extreme_rays(flipped)
        return self.generators

    def to_dict(self) -> dict:
        return {
            "space": {"n": self.space.n, "k": self.space.k},
            "generators": None
            if self.generators is None
            else [list(map(float, g)) for g in self.generators],
            "halfspaces": None
            if self.halfspaces is None
            else [list(map(float, w)) for w in self.halfspaces],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PolyCone":
        sp = SemiSpace(d["space"]["n"], d["space"]["k"])
        return cls(sp, d.get("generators"), d.get("halfspaces"))


# ---------------------------------------------------------------------------
# Double-description conversion: extreme rays of {x : A x >= 0}


def _nullspace_exact(rows):
    """One-dimensional rational nullspace of a list of Fraction rows, or
    None if the nullspace dimension differs from one."""
    m = [list(r) for r in rows]
    d = len(m[0]) if m else 0
    pivots = []
    r = 0
    for c in range(d):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        m[r] = [v / m[r][c] for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(d) if c not in pivots]
    if len(free) != 1:
        return None
    c0 = free[0]
    v = [Fraction(0)] * d
    v[c0] = Fraction(1)
    for i, c in enumerate(pivots):
        v[c] = -m[i][c0]
    return v


def _candidate_ray(A, subset, exact: bool):
    rows = A[list(subset)]
    if exact:
        frac_rows = [[Fraction(x) for x in row] for row in rows]
        v = _nullspace_exact(frac_rows)
        if v is None:
            return None
        arr = np.array([float(x) for x in v])
    else:
        _, s, vt = np.linalg.svd(rows) if len(rows) else (None, np.array([]), np.eye(A.shape[1]))
        d = A.shape[1]
        rank = int(np.sum(s > 1e-12 * max(1.0, s[0] if len(s) else 1.0)))
        if d - rank != 1:
            return None
        arr = vt[-1]
    n = np.linalg.norm(arr)
    return arr / n if n > 0 else None


def extreme_rays(A: np.ndarray) -> np.ndarray:
    """Extreme rays of the Euclidean polyhedral cone {x : A x >= 0}.

    Lineality (the nullspace of A) is returned as +/- basis vector pairs;
    the pointed part is enumerated over (rank-1)-row subsets within the row
    space.  Exact rational arithmetic below EXACT_DIM coordinates (floats
    are exact rationals), float SVD above.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, d = A.shape
    rays: list[np.ndarray] = []

    _, s, vt = np.linalg.svd(A)
    rank = int(np.sum(s > 1e-12 * max(1.0, s[0])))
    lineality = vt[rank:]
    for b in lineality:
        rays.append(b)
        rays.append(-b)
    if rank == 0:
        return np.array(rays)

    if rank < d:
        # work in the row space; append lineality back afterwards
        Q = vt[:rank].T  # d x rank
        B = A @ Q
        sub = extreme_rays(B)
        for z in sub:
            if np.linalg.norm(z) > 0 and not _is_lineal(B, z):
                rays.append(Q @ z)
        return _dedup_rays(np.array(rays))

    exact = d <= EXACT_DIM and m <= 16
    if d == 1:
        for cand in (np.array([1.0]), np.array([-1.0])):
            if np.all(A @ cand >= -INCIDENCE_TOL):
                rays.append(cand)
        return _dedup_rays(np.array(rays))

    for subset in itertools.combinations(range(m), d - 1):
        r = _candidate_ray(A, subset, exact)
        if r is None:
            continue
        scale = np.abs(A).max()
        for cand in (r, -r):
            if np.all(A @ cand >= -INCIDENCE_TOL * max(1.0, scale)):
                rays.append(cand)
    return _dedup_rays(np.array(rays))


def _is_lineal(A, v, tol=INCIDENCE_TOL):
    return np.linalg.norm(A @ v) <= tol * max(1.0, np.abs(A).max())


def _dedup_rays(rays: np.ndarray) -> np.ndarray:
    out: list[np.ndarray] = []
    for r in rays:
        n = np.linalg.norm(r)
        if n <= INCIDENCE_TOL:
            continue
        r = r / n
        if not any(np.linalg.norm(r - o) <= 1e-8 for o in out):
            out.append(r)
    return np.array(out) if out else np.zeros((0, rays.shape[1] if rays.ndim == 2 else 0))


# ---------------------------------------------------------------------------
# Cone operations


def dual_cone(K: PolyCone) -> PolyCone:
    """K* = {w : <w, g> >= 0 for all generators g}: the generators of K are
    the halfspace normals of K*, and the generator form of K* comes from
    double description after the Euclidean flip."""
    G = K.ensure_generators()
    if len(G) == 0:
        # dual of the trivial cone is the full space
        d = K.space.dim
        eye = np.eye(d)
        return PolyCone(K.space, generators=np.vstack([eye, -eye]))
    flipped = np.array([euclid_flip(K.space, g) for g in G])
    gens = extreme_rays(flipped)
    if len(gens) == 0:
        gens = np.zeros((0, K.space.dim))
    return PolyCone(K.space, generators=gens, halfspaces=G.copy())


def cone_predicates(K: PolyCone) -> dict:
    """pointed / contains_line / has_interior.

    A generator cone contains a line iff 0 is a nontrivial nonnegative
    combination of generators (LP feasibility); interior iff the generators
    span the ambient space.
    """
    G = K.ensure_generators()
    d = K.space.dim
    if len(G) == 0:
        return {"pointed": True, "contains_line": False, "has_interior": False}
    has_interior = np.linalg.matrix_rank(G, tol=1e-10) == d
    res = linprog(
        c=np.zeros(len(G)),
        A_eq=np.vstack([G.T, np.ones((1, len(G)))]),
        b_eq=np.concatenate([np.zeros(d), [1.0]]),
        bounds=[(0, None)] * len(G),
        method="highs",
    )
    contains_line = bool(res.status == 0)
    return {
        "pointed": not contains_line,
        "contains_line": contains_line,
        "has_interior": bool(has_interior),
    }


def boundary_witness(K: PolyCone, x, tol: float = INCIDENCE_TOL):
    """A dual vector x* with <x, x*> = 0 iff x sits on the boundary of K;
    None for deep-interior points (certified by the minimum pairing with
    the dual generators exceeding tol)."""
    x = K.space.check(x)
    if not K.contains(x, tol=max(tol, 1e-8)):
        raise NotInCone(f"{x} not in the cone")
    dual = dual_cone(K)
    Gd = dual.ensure_generators()
    if len(Gd) == 0:
        return None  # dual is trivial: K is the full space, no boundary
    pair = np.array([inner(K.space, x, g) for g in Gd])
    i = int(np.argmin(np.abs(pair)))
    scale = max(1.0, float(np.linalg.norm(x)))
    if abs(pair[i]) <= tol * scale:
        return Gd[i]
    return None


# ---------------------------------------------------------------------------
# Lorentz cones (future/past)


def sphere_directions(n: int, m: int = 64) -> np.ndarray:
    """m roughly uniform unit directions in R^n (exact for n = 1, equal
    angles for n = 2, Fibonacci points for n = 3, seeded Gaussian above)."""
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        th = 2 * np.pi * np.arange(m) / m
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    if n == 3:
        i = np.arange(m) + 0.5
        phi = np.arccos(1 - 2 * i / m)
        th = np.pi * (1 + 5**0.5) * i
        return np.stack(
            [np.sin(phi) * np.cos(th), np.sin(phi) * np.sin(th), np.cos(phi)], axis=1
        )
    rng = np.random.default_rng(0)
    v = rng.normal(size=(m, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def causal_membership(space: SemiSpace, x, sense: int = +1, tol: float = 0.0) -> bool:
    """Exact membership in the closed future (sense +1) or past (sense -1)
    causal cone of E^{n+1}_1: sense * x_t >= |x_spatial|."""
    if space.k != 1:
        raise ValueError("causal cones need signature (n, 1)")
    x = space.check(x)
    return sense * x[-1] + tol >= float(np.linalg.norm(x[:-1]))


def dual_support_margin(space: SemiSpace, x, sense: int = +1) -> float:
    """Closed-form inf over the null generators (d, 1) of the future cone
    (or (d, -1) of the past cone) of <x, generator>:

        inf_d <x, (d, sense)> = -|x_spatial| - sense * x_t.

    Nonnegative exactly when x lies in the opposite causal cone, which is
    the exact statement future* = past in every dimension.
    """
    x = space.check(x)
    return -float(np.linalg.norm(x[:-1])) - sense * float(x[-1])


def causal_cone_approx(space: SemiSpace, sense: int = +1, m: int = 64):
    """Inscribed polyhedral approximation of the future/past cone by m null
    generators (d_j, sense); returns (cone, hausdorff_gap) where the gap is
    the worst angular defect of the direction sample (zero when n = 1, so
    the dimension-2 approximation is exact)."""
    if space.k != 1:
        raise ValueError("causal cones need signature (n, 1)")
    dirs = sphere_directions(space.n, m)
    gens = np.hstack([dirs, sense * np.ones((len(dirs), 1))])
    probe = sphere_directions(space.n, max(512, 4 * m))
    cosines = np.clip(probe @ dirs.T, -1.0, 1.0)
    gap = float(np.max(1.0 - np.max(cosines, axis=1)))
    return PolyCone(space, generators=gens), gap


# ---------------------------------------------------------------------------
# Recession / normal cones of convex hypersurfaces


@dataclass
class SampledHypersurface:
    """A convex hypersurface known through boundary points and inward
    normals (normals of supporting halfspaces containing the body)."""

    space: SemiSpace
    points: np.ndarray
    normals: np.ndarray


def rn_counterexample_body(m: int = 64) -> SampledHypersurface:
    """The body {x t >= 1, x > 0} in E^2_1, sampled along its boundary
    hyperbola (x, 1/x).  Inward normals (raised gradients of x t) are
    (1/x, -x): the open fourth quadrant."""
    sp = SemiSpace(1, 1)
    xs = np.geomspace(1e-2, 1e2, m)
    pts = np.stack([xs, 1.0 / xs], axis=1)
    normals = np.stack([1.0 / xs, -xs], axis=1)
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    return SampledHypersurface(sp, pts, normals)


def capped_cylinder_body(m: int = 64) -> SampledHypersurface:
    """The convex body {x1 >= 1, x2^2 + t^2 <= 1} in E^3_1, sampled on the
    flat cap and the lateral cylinder."""
    sp = SemiSpace(2, 1)
    pts, normals = [(np.array([1.0, 0.0, 0.0]))], [np.array([1.0, 0.0, 0.0])]
    th = 2 * np.pi * np.arange(m) / m
    for c, s in zip(np.cos(th), np.sin(th)):
        pts.append(np.array([2.0, c, s]))
        # inward Euclidean normal (0, -c, -s); raised (flip) normal
        normals.append(euclid_flip(sp, np.array([0.0, -c, -s])))
    return SampledHypersurface(sp, np.array(pts), np.array(normals))


def recession_normal(surface, probes=None) -> tuple[PolyCone, PolyCone]:
    """Sampled normal cone N_hat (conic hull of inward normals) and
    recession cone R_hat = dual(N_hat)."""
    if isinstance(surface, SampledHypersurface):
        space, normals = surface.space, surface.normals
    else:  # GraphSurface
        if probes is None:
            raise ValueError("graph surfaces need domain probe points")
        space = surface.ambient
        normals = np.array([surface.normal(p) for p in np.atleast_2d(probes)])
    normals = normals / np.linalg.norm(normals, axis=1, keepdims=True)
    N_hat = PolyCone(space, generators=normals)
    return dual_cone(N_hat), N_hat


@dataclass
class V0Result:
    v0: np.ndarray | None
    certificate: np.ndarray | None

    @property
    def empty(self) -> bool:
        return self.v0 is None


def find_v0(N_hat: PolyCone, R_hat: PolyCone, tol: float = 1e-9) -> V0Result:
    """A nonzero v0 interior to N_hat and inside R_hat, or Empty with a
    separating certificate s in (-R_hat) * cl N_hat.

    Interior points are written as sums of all normal generators with
    coefficients >= 1; membership in R_hat uses its halfspace form
    <n_j, v> >= 0.
    """
    G = N_hat.ensure_generators()
    d = N_hat.space.dim
    flipped = np.array([euclid_flip(N_hat.space, g) for g in G])
    # v = G^T lam, lam_i >= 1, flipped_j . v >= 0
    res = linprog(
        c=np.ones(len(G)),
        A_ub=-flipped @ G.T,
        b_ub=np.zeros(len(G)),
        bounds=[(1.0, None)] * len(G),
        method="highs",
    )
    if res.status == 0:
        v0 = G.T @ res.x
        if np.linalg.norm(v0) > tol:
            return V0Result(v0 / np.linalg.norm(v0), None)
    # certificate: s = sum alpha_i n_i, alpha >= 0, sum alpha = 1,
    # <n_j, s> <= tol  (s in cl N_hat and in -R_hat)
    cert = linprog(
        c=np.zeros(len(G)),
        A_ub=flipped @ G.T,
        b_ub=np.full(len(G), tol),
        A_eq=np.ones((1, len(G))),
        b_eq=np.array([1.0]),
        bounds=[(0, None)] * len(G),
        method="highs",
    )
    s = G.T @ cert.x if cert.status == 0 else None
    if s is not None and np.linalg.norm(s) > tol:
        s = s / np.linalg.norm(s)
    return V0Result(None, s)


def null_pair_in_dual(K: PolyCone, m: int = 64, tol: float = 1e-9):
    """For a full-dimensional cone with all generators spacelike: a pair of
    linearly independent null vectors u in the future cone and u' in the
    past cone, both in K*.

    Finds timelike w, w' in K* on either side of t = 0 by LP against a
    sampled null fan, then solves <c(s), c(s)> = 0 exactly on the segment
    [w, w'] (a quadratic in s).
    """
    space = K.space
    if space.k != 1:
        raise ValueError("null pairs need signature (n, 1)")
    G = K.ensure_generators()
    if np.linalg.matrix_rank(G, tol=1e-10) < space.dim:
        raise ConeDegenerate("cone lies in a proper subspace")
    for g in G:
        if inner(space, g, g) <= 0:
            raise ValueError(f"generator {g} is not spacelike")

    flipped = np.array([euclid_flip(space, g) for g in G])
    fan = sphere_directions(space.n, m)

    def timelike_dual(sense):
        # maximize margin s: w in K*, sense*w_t - d_j . w_s >= s, |w|_inf <= 1
        d = space.dim
        nf = len(fan)
        A_ub = np.zeros((len(G) + nf, d + 1))
        A_ub[: len(G), :d] = -flipped
        for j, dj in enumerate(fan):
            A_ub[len(G) + j, : d - 1] = dj
            A_ub[len(G) + j, d - 1] = -sense
            A_ub[len(G) + j, d] = 1.0
        c = np.zeros(d + 1)
        c[d] = -1.0
        res = linprog(
            c,
            A_ub=A_ub,
            b_ub=np.zeros(len(G) + nf),
            bounds=[(-1, 1)] * d + [(None, None)],
            method="highs",
        )
        if res.status != 0 or res.x[d] <= tol:
            raise ConeDegenerate(
                f"no strictly {'future' if sense > 0 else 'past'} timelike vector in the dual"
            )
        return res.x[:d]

    w = timelike_dual(+1)
    wp = timelike_dual(-1)
    # <c(s), c(s)> with c(s) = (1-s) w + s wp: quadratic a s^2 + b s + c0
    dv = wp - w
    a = inner(space, dv, dv)
    b = 2 * inner(space, w, dv)
    c0 = inner(space, w, w)
    roots = np.roots([a, b, c0]) if abs(a) > 1e-14 else np.array([-c0 / b])
    roots = np.sort(np.real(roots[np.abs(np.imag(roots)) < 1e-10]))
    roots = roots[(roots > 0) & (roots < 1)]
    if len(roots) < 2:
        raise ConeDegenerate("segment between dual timelike vectors misses the null cone twice")
    u = w + roots[0] * dv
    up = w + roots[-1] * dv
    if np.linalg.matrix_rank(np.stack([u, up]), tol=1e-9) < 2:
        raise ConeDegenerate("null pair degenerated to a single ray")
    return u, up
