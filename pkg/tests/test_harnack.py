import numpy as np
import pytest

from curvflow import flows, harnack, library
from curvflow.errors import PreconditionError
from curvflow.surface import SurfaceFlow


def _triple(fam, x, t):
    return harnack.triple_from_flow_point(flows.flow_point_data(fam, x, t))


def test_flat_triple_is_zero():
    tr = _triple(flows.static_flat(3), [0.1, 0.2, -0.3], 1.0)
    assert np.max(np.abs(tr.rm)) <= 1e-12
    assert np.max(np.abs(tr.p)) <= 1e-12
    assert np.max(np.abs(tr.m)) <= 1e-12
    assert harnack.harnack_min_eig(tr) == pytest.approx(0.0, abs=1e-12)


def test_triple_symmetries_on_corpus():
    cases = [
        (flows.constant_curvature(2, 3.0), [0.2, -0.1], 0.7),
        (flows.constant_curvature(3, 5.0), [0.1, 0.0, 0.3], 0.5),
        (flows.product_spheres(4.0, 2.0), [0.1, 0.2, -0.1, 0.0], 0.4),
    ]
    for fam, x, t in cases:
        tr = _triple(fam, x, t)
        for name, val in tr.check_symmetries().items():
            assert val <= 1e-10, f"{fam.kind}: {name} = {val}"


def test_constant_curvature_m_value_and_z():
    # unit-scale shrinking 2-sphere at t=1: M = 1.5 delta in the frame
    tr = _triple(flows.constant_curvature(2, 3.0), [0.2, 0.1], 1.0)
    assert np.max(np.abs(tr.m - 1.5 * np.eye(2))) <= 1e-9
    x = np.array([1.0, 0.0])
    u = np.zeros((2, 2))
    assert harnack.harnack_value(tr, u, x) == pytest.approx(1.5, abs=1e-9)
    # min eig = min(2 * curvature block, 1.5)
    assert harnack.harnack_min_eig(tr) == pytest.approx(1.5, abs=1e-9)
    # quadratic homogeneity
    u = np.array([[0.0, 0.7], [-0.7, 0.0]])
    x = np.array([0.3, -1.1])
    z1 = harnack.harnack_value(tr, u, x)
    z4 = harnack.harnack_value(tr, 2.0 * u, 2.0 * x)
    assert z4 == pytest.approx(4.0 * z1, rel=1e-14)


def test_min_eig_matches_sampling():
    for fam, x, t in [
        (flows.constant_curvature(2, 3.0), [0.2, 0.1], 1.0),
        (flows.constant_curvature(3, 5.0), [0.1, -0.2, 0.0], 0.6),
        (flows.product_spheres(4.0, 2.0), [0.1, 0.0, 0.2, -0.1], 0.5),
    ]:
        tr = _triple(fam, x, t)
        exact = harnack.harnack_min_eig(tr)
        sampled = harnack.harnack_min_eig_sampled(tr, n_samples=10_000, seed=7)
        assert abs(exact - sampled) <= 1e-6


def test_harnack_positivity_on_corpus():
    rng = np.random.default_rng(4)
    for fam in [
        flows.constant_curvature(2, 3.0),
        flows.constant_curvature(3, 5.0),
        flows.product_spheres(4.0, 2.0),
    ]:
        for _ in range(5):
            t = float(rng.uniform(0.1, 0.9)) * fam.t_max
            x = rng.uniform(-0.3, 0.3, size=fam.n)
            tr = _triple(fam, x, t)
            assert harnack.harnack_min_eig(tr) >= -1e-6


def test_harnack_positivity_on_perturbed_surface():
    flow = SurfaceFlow(grid_size=96, profile=lambda th: 0.05 * np.cos(th), t_start=1.0)
    flow.run_to(1.05)
    slc = flow.slice()
    tol = 10.0 * slc.h**2
    for k in slc.interior(0.4)[::8]:
        tr = harnack.triple_from_surface(slc, k)
        assert np.max(np.abs(tr.p)) > 0  # genuinely non-parallel Ricci
        assert harnack.harnack_min_eig(tr) >= -tol


def test_algebraic_identities_random_tensors():
    for dim in (2, 3, 4):
        res = harnack.algebraic_identities(dim, trials=100, seed=123)
        for name, val in res.items():
            assert val <= 1e-10, f"dim {dim}: {name} = {val}"


def test_algebraic_identity_loop_oracle():
    # index-loop evaluation of both sides, independent of einsum
    rng = np.random.default_rng(2)
    dim = 3
    rm = harnack.random_curvature_tensor(dim, rng)
    lhs = np.zeros((dim,) * 4)
    rhs = np.zeros((dim,) * 4)
    for i in range(dim):
        for j in range(dim):
            for k in range(dim):
                for l in range(dim):
                    for m in range(dim):
                        for n in range(dim):
                            lhs[i, j, k, l] += 2 * rm[i, m, j, n] * rm[k, m, l, n]
                            lhs[i, j, k, l] -= 2 * rm[i, m, j, n] * rm[l, m, k, n]
                            rhs[i, j, k, l] += rm[i, j, m, n] * rm[k, l, m, n]
    assert np.max(np.abs(lhs - rhs)) <= 1e-10
    assert harnack.curvature_rearrangement_residual(rm) <= 1e-10


def test_m_decomposition_on_flows():
    for fam, x, t in [
        (flows.constant_curvature(2, 3.0), [0.3, -0.2], 0.8),
        (flows.constant_curvature(3, 5.0), [0.0, 0.1, 0.2], 0.5),
        (flows.product_spheres(4.0, 2.0), [0.05, 0.1, -0.2, 0.15], 0.6),
    ]:
        data = flows.flow_point_data(fam, x, t)
        assert harnack.m_decomposition_residual(data) <= 1e-8


def test_m_decomposition_on_surface_grid():
    import math

    residuals = {}
    for m in (64, 128):
        flow = SurfaceFlow(grid_size=m, profile=lambda th: 0.05 * np.cos(th), t_start=1.0)
        flow.run_to(1.05)
        slc = flow.slice()
        hess = slc.hess_r_field()
        worst = 0.0
        p_fld = slc.p_field()
        cov_p = slc.cov_field(p_fld)
        for k in slc.interior(0.5)[::4]:
            pd = slc.point_data(k)
            ginv = pd["ginv"]
            div_p = np.einsum("qp,qpij->ij", ginv, cov_p[k])
            rhs = (
                div_p
                + np.einsum("ikjl,kl->ij", pd["rm"], ginv @ pd["ric"] @ ginv)
                + pd["ric"] / (2 * slc.t)
            )
            worst = max(worst, float(np.max(np.abs(pd["m"] - rhs))))
        residuals[m] = worst
    order = math.log(residuals[64] / residuals[128]) / math.log(2.0)
    assert order >= 1.5


def test_sum_of_squares_identity():
    rng = np.random.default_rng(11)
    for n in (2, 3):
        for _ in range(20):
            factors = []
            for _ in range(4):
                a = rng.normal(size=(n + 1, n + 1))
                factors.append(a - a.T)
            u = rng.normal(size=(n, n))
            u = u - u.T
            x = rng.normal(size=n)
            assert harnack.sum_of_squares_check(factors, u, x) <= 1e-9


def test_sum_of_squares_rank_one_and_zero():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(3, 3))
    factors = [a - a.T]
    u = np.array([[0.0, 1.0], [-1.0, 0.0]])
    x = np.array([0.5, -0.3])
    assert harnack.sum_of_squares_check(factors, u, x) <= 1e-12
    zero = [np.zeros((3, 3))]
    assert harnack.sum_of_squares_check(zero, u, x) == 0.0


def test_factorization_roundtrip_and_identity():
    tr = _triple(flows.constant_curvature(2, 3.0), [0.2, 0.1], 1.0)
    factors = harnack.factorize_curvature_form(tr.rm, tr.p, tr.m)
    rng = np.random.default_rng(8)
    u = rng.normal(size=(2, 2))
    u = u - u.T
    x = rng.normal(size=2)
    assert harnack.sum_of_squares_check(factors, u, x) <= 1e-9
    # reconstruction reproduces the blocks
    fs = np.stack(factors)
    m_rec = np.einsum("mi,mj->ij", fs[:, 0, 1:], fs[:, 0, 1:])
    assert np.max(np.abs(m_rec - tr.m)) <= 1e-9


def test_factorization_rejects_indefinite():
    rm = np.zeros((2, 2, 2, 2))
    p = np.zeros((2, 2, 2))
    m = -np.eye(2)
    with pytest.raises(PreconditionError):
        harnack.factorize_curvature_form(rm, p, m)


def test_soliton_gaussian():
    chart = library.flat(2)

    def f(coords):
        return (coords[0] * coords[0] + coords[1] * coords[1]) / 4.0

    points = [[0.0, 0.0], [0.5, -0.2], [1.0, 0.7]]
    rep = harnack.soliton_check(1.0, chart, f, points, seed=0)
    assert rep["hessian_residual"] <= 1e-10
    assert rep["vanishing_residual"] <= 1e-10
    assert rep["is_soliton"]


def test_soliton_detects_scaled_potential():
    chart = library.flat(2)

    def f(coords):
        return 1.1 * (coords[0] * coords[0] + coords[1] * coords[1]) / 4.0

    rep = harnack.soliton_check(1.0, chart, f, [[0.3, 0.4]], seed=0)
    assert rep["hessian_residual"] == pytest.approx(0.05, abs=1e-10)
    assert not rep["is_soliton"]


def test_soliton_flags_round_sphere():
    chart = library.sphere_stereographic(2)
    rep = harnack.soliton_check(1.0, chart, lambda c: 0.0, [[0.1, 0.2]], seed=0)
    assert not rep["is_soliton"]
    assert rep["vanishing_residual"] > 1e-3  # M != 0 is reported regardless
