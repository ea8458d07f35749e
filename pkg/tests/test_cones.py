import numpy as np
import pytest

from geolab import cones, fields
from geolab.cones import (
    PolyCone,
    boundary_witness,
    causal_cone_approx,
    causal_membership,
    cone_predicates,
    dual_cone,
    dual_support_margin,
    find_v0,
    null_pair_in_dual,
    recession_normal,
)
from geolab.errors import ConeDegenerate, DimensionTooLarge, NotInCone
from geolab.semispace import SemiSpace, inner


def random_cone(rng, d, m):
    return PolyCone(SemiSpace(d - 1, 1), generators=rng.normal(size=(m, d)))


def test_dimension_cap():
    with pytest.raises(DimensionTooLarge):
        PolyCone(SemiSpace(6, 1), generators=np.eye(7))


def test_single_ray_dual_is_halfspace():
    sp = SemiSpace(2, 1)
    K = PolyCone(sp, generators=[[1.0, 0.0, 0.0]])
    Kd = dual_cone(K)
    rng = np.random.default_rng(0)
    for _ in range(200):
        w = rng.normal(size=3)
        assert Kd.contains(w) == (inner(sp, w, [1.0, 0.0, 0.0]) >= -1e-9)
    preds = cone_predicates(Kd)
    assert preds["contains_line"] and preds["has_interior"]


def test_full_space_dual_is_origin():
    sp = SemiSpace(2, 1)
    K = PolyCone(sp, generators=np.vstack([np.eye(3), -np.eye(3)]))
    Kd = dual_cone(K)
    # only the zero vector satisfies all six halfspaces
    rng = np.random.default_rng(1)
    for _ in range(100):
        w = rng.normal(size=3)
        assert not Kd.contains(w)
    assert Kd.contains(np.zeros(3))


def test_future_dual_is_past_approx():
    sp = SemiSpace(2, 1)
    F, gap = causal_cone_approx(sp, +1, m=64)
    Fd = dual_cone(F)
    rng = np.random.default_rng(2)
    agree = 0
    for _ in range(500):
        w = rng.normal(size=3)
        in_dual = Fd.contains(w)
        in_past = causal_membership(sp, w, -1, tol=gap * float(np.linalg.norm(w)))
        # inscribed approximation: the true past cone sits inside the dual
        if causal_membership(sp, w, -1):
            assert in_dual
        agree += in_dual == in_past
    assert agree >= 490  # mismatches confined to the gap-width shell


@pytest.mark.parametrize("dim", [2, 3, 4, 5, 6])
def test_future_dual_is_past_exact(dim):
    # closed-form support function: x is in future* iff the infimum of
    # <x, (d, 1)> over unit directions d is >= 0, iff x lies in the past
    sp = SemiSpace(dim - 1, 1)
    rng = np.random.default_rng(dim)
    for _ in range(300):
        x = rng.normal(size=dim)
        assert (dual_support_margin(sp, x, +1) >= 0) == causal_membership(sp, x, -1)
        assert (dual_support_margin(sp, x, -1) >= 0) == causal_membership(sp, x, +1)


def test_future_dual_exact_polyhedral_dim2():
    # in dimension 2 the two null rays generate the cone exactly
    sp = SemiSpace(1, 1)
    F, gap = causal_cone_approx(sp, +1)
    assert gap == 0.0
    Fd = dual_cone(F)
    rng = np.random.default_rng(3)
    for _ in range(300):
        w = rng.normal(size=2)
        assert Fd.contains(w) == causal_membership(sp, w, -1, tol=1e-12)


def test_dual_antitone():
    rng = np.random.default_rng(4)
    for _ in range(25):
        d = rng.integers(2, 5)
        m = rng.integers(d, 9)
        K = random_cone(rng, d, m)
        sub = PolyCone(K.space, generators=K.generators[: max(1, m // 2)])
        Kd, subd = dual_cone(K), dual_cone(sub)
        for g in Kd.ensure_generators():
            assert subd.contains(g, tol=1e-8)


def test_dual_negation():
    rng = np.random.default_rng(5)
    for _ in range(25):
        d = rng.integers(2, 5)
        K = random_cone(rng, d, rng.integers(d, 9))
        negd = dual_cone(PolyCone(K.space, generators=-K.generators))
        Kd = dual_cone(K)
        # (-K)* = -K*: generator sets match as sets of rays
        a = sorted(map(tuple, np.round(-negd.generators, 8)))
        b = sorted(map(tuple, np.round(Kd.generators, 8)))
        assert a == b


def test_double_dual_membership():
    rng = np.random.default_rng(6)
    for trial in range(25):
        d = int(rng.integers(2, 5))
        K = random_cone(rng, d, int(rng.integers(d, 9)))
        Kdd = dual_cone(dual_cone(K))
        for _ in range(40):
            x = rng.normal(size=d)
            assert Kdd.contains(x, tol=1e-7) == K.contains(x, tol=1e-7)


def test_dual_involution_pointed():
    sp = SemiSpace(2, 1)
    K = PolyCone(sp, generators=np.array([[1.0, 0, 0], [0, 1, 0], [1, 1, 1], [2, 1, -1]]))
    if not cone_predicates(K)["pointed"]:
        pytest.skip("test cone must be pointed")
    Kdd = dual_cone(dual_cone(K))
    for g in K.generators:
        assert Kdd.contains(g, tol=1e-8)
    for g in Kdd.generators:
        assert K.contains(g, tol=1e-8)


def test_boundary_witness_cases():
    sp = SemiSpace(2, 1)
    F, _ = causal_cone_approx(sp, +1, m=64)
    # facet point: null generator direction
    x = F.generators[0]
    w = boundary_witness(F, x)
    assert w is not None and abs(inner(sp, x, w)) <= 1e-9 * np.linalg.norm(x)
    # deep interior: the time axis
    assert boundary_witness(F, np.array([0.0, 0.0, 1.0])) is None
    # zero vector pairs to zero with anything
    assert boundary_witness(F, np.zeros(3)) is not None
    with pytest.raises(NotInCone):
        boundary_witness(F, np.array([0.0, 0.0, -1.0]))


def test_null_pair_spacelike_cone():
    sp = SemiSpace(2, 1)
    th = np.linspace(0, 2 * np.pi, 12, endpoint=False)
    gens = np.stack([np.ones(12), 0.2 * np.cos(th), 0.2 * np.sin(th)], axis=1)
    K = PolyCone(sp, generators=gens)
    u, up = null_pair_in_dual(K)
    for v in (u, up):
        assert abs(inner(sp, v, v)) <= 1e-9
        assert min(inner(sp, v, g) for g in gens) >= -1e-9
    assert u[-1] > 0 and up[-1] < 0  # future / past
    assert np.linalg.matrix_rank(np.stack([u, up]), tol=1e-9) == 2


def test_null_pair_degenerate_subspace():
    sp = SemiSpace(2, 1)
    K = PolyCone(sp, generators=[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    with pytest.raises(ConeDegenerate):
        null_pair_in_dual(K)


def test_recession_normal_hyperboloid():
    u = fields.get_field("hyperboloid")
    surf = fields.GraphSurface(u)
    g = np.linspace(-3, 3, 9)
    probes = np.stack(np.meshgrid(g, g, indexing="ij"), -1).reshape(-1, 2)
    R_hat, N_hat = recession_normal(surf, probes)
    assert cone_predicates(N_hat)["has_interior"]
    assert cone_predicates(R_hat)["pointed"]
    res = find_v0(N_hat, R_hat)
    assert res.v0 is not None
    # graph recedes in the spacelike graph direction
    assert res.v0[1] > 0.9


def test_recession_normal_double_dual_closure():
    u = fields.get_field("hyperboloid")
    surf = fields.GraphSurface(u)
    g = np.linspace(-2, 2, 7)
    probes = np.stack(np.meshgrid(g, g, indexing="ij"), -1).reshape(-1, 2)
    _, N_hat = recession_normal(surf, probes)
    Ndd = dual_cone(dual_cone(N_hat))
    rng = np.random.default_rng(7)
    for _ in range(100):
        x = rng.normal(size=3)
        assert Ndd.contains(x, tol=1e-7) == N_hat.contains(x, tol=1e-7)


def test_rn_counterexample_empty():
    body = cones.rn_counterexample_body()
    R_hat, N_hat = recession_normal(body)
    res = find_v0(N_hat, R_hat)
    assert res.empty
    assert res.certificate is not None
    s = res.certificate
    # certificate separates: in the closed normal hull and in -R
    assert N_hat.contains(s, tol=1e-6)
    assert all(inner(body.space, n, s) <= 1e-6 for n in N_hat.generators)
    # the expected direction is the closed fourth-quadrant edge (0, -1)
    assert s[1] < -0.9


def test_capped_cylinder_v0():
    body = cones.capped_cylinder_body()
    R_hat, N_hat = recession_normal(body)
    res = find_v0(N_hat, R_hat)
    assert res.v0 is not None
    # the body recedes only along +x1
    assert res.v0[0] == pytest.approx(1.0, abs=1e-9)


def test_cone_json_roundtrip():
    sp = SemiSpace(2, 1)
    K = PolyCone(sp, generators=[[1.0, 0.0, 0.0], [0.0, 1.0, 1.0]])
    K2 = PolyCone.from_dict(K.to_dict())
    assert np.array_equal(K2.generators, K.generators)
    assert K2.space == sp
