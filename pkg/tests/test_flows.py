import numpy as np
import pytest

from curvflow import flows
from curvflow.charts import curvature_data
from curvflow.errors import ExtinctionError


SAMPLES = {
    2: [[0.0, 0.0], [0.3, -0.2], [0.1, 0.4]],
    3: [[0.0, 0.0, 0.0], [0.2, -0.1, 0.3]],
    4: [[0.1, -0.2, 0.05, 0.3], [0.0, 0.0, 0.0, 0.0]],
}


def test_static_flat_snapshot():
    fam = flows.static_flat(2)
    snap = flows.flow_closed_form(fam, 1.0)
    data = curvature_data(snap.chart, [0.4, -0.7])
    assert np.max(np.abs(data.ric)) == 0.0
    assert snap.flow_residual([0.4, -0.7]) == 0.0


def test_constant_curvature_scale_and_scalar():
    fam = flows.constant_curvature(2, 3.0)
    snap = flows.flow_closed_form(fam, 1.0)
    # c(1) = 3 - 2*1 = 1, so the metric is the unit sphere: R = 2
    data = curvature_data(snap.chart, [0.2, 0.1])
    assert data.scalar == pytest.approx(2.0, abs=1e-10)
    assert snap.flow_residual([0.2, 0.1]) <= 1e-10


def test_product_spheres_scales_and_mixed_planes():
    fam = flows.product_spheres(4.0, 2.0)
    snap = flows.flow_closed_form(fam, 0.5)
    data = curvature_data(snap.chart, [0.1, 0.2, -0.1, 0.05])
    # scales (3, 1): block scalar curvatures 2/3 and 2
    assert data.scalar == pytest.approx(2.0 / 3.0 + 2.0, abs=1e-9)
    # mixed-plane curvature vanishes
    assert abs(data.rm[0, 2, 0, 2]) <= 1e-10
    assert abs(data.rm[1, 3, 1, 3]) <= 1e-10


def test_extinction_error():
    fam = flows.constant_curvature(2, 3.0)
    with pytest.raises(ExtinctionError) as err:
        flows.flow_closed_form(fam, 1.6)
    assert err.value.extinction_time == pytest.approx(1.5)


def test_flow_equation_residual_random_samples():
    rng = np.random.default_rng(12)
    fams = [
        flows.static_flat(2),
        flows.constant_curvature(2, 3.0),
        flows.constant_curvature(3, 5.0),
        flows.product_spheres(4.0, 2.0),
    ]
    count = 0
    for fam in fams:
        for _ in range(5):
            t = rng.uniform(0.05, 0.9) * fam.t_max
            x = rng.uniform(-0.3, 0.3, size=fam.n)
            snap = flows.flow_closed_form(fam, t)
            assert snap.flow_residual(x) <= 1e-10
            count += 1
    assert count == 20


def test_dm_dt_matches_finite_difference():
    fam = flows.constant_curvature(2, 3.0)
    x = [0.2, -0.1]
    t, h = 0.7, 1e-3
    stencil = [-2, -1, 1, 2]
    weights = [1.0, -8.0, 8.0, -1.0]
    fd = sum(
        w * flows.flow_point_data(fam, x, t + k * h).m for k, w in zip(stencil, weights)
    ) / (12 * h)
    assert np.max(np.abs(fd - fam.dm_dt(x, t))) <= 1e-9


def test_scalar_taylor_matches_finite_difference():
    fam = flows.constant_curvature(3, 5.0)
    x = [0.1, 0.0, -0.2]
    t, h = 0.5, 1e-3
    taylor = fam.scalar_time_taylor(x, t, order=2)
    r = lambda s: flows.flow_point_data(fam, x, s).scalar
    assert taylor[0] == pytest.approx(r(t), rel=1e-12)
    assert taylor[1] == pytest.approx((r(t + h) - r(t - h)) / (2 * h), rel=1e-5)
    assert 2 * taylor[2] == pytest.approx((r(t + h) - 2 * r(t) + r(t - h)) / h**2, rel=1e-3)


@pytest.mark.parametrize(
    "fam, t",
    [
        (flows.static_flat(2), 1.0),
        (flows.constant_curvature(2, 3.0), 0.1),
        (flows.constant_curvature(3, 5.0), 0.1),
        (flows.constant_curvature(2, 3.0), 1.0),
        (flows.product_spheres(4.0, 2.0), 0.5),
    ],
)
def test_evolution_residuals_closed_form(fam, t):
    rng = np.random.default_rng(5)
    x = rng.uniform(-0.25, 0.25, size=fam.n)
    res = flows.evolution_residuals(fam, t, x)
    for name, val in res.items():
        assert val <= 1e-8, f"{fam.kind} at t={t}: {name} residual {val}"


def test_m_evolution_sign_is_pinned():
    # flipping the Ricci-correction sign in the M equation must break the residual
    fam = flows.constant_curvature(2, 3.0)
    x = [0.15, -0.2]
    t = 1.0
    data = flows.flow_point_data(fam, x, t)
    geom = data.geom
    cov2_ric = geom.cov2_ric()
    cov_p = cov2_ric - cov2_ric.transpose(0, 2, 1, 3)
    rhs = flows.m_evolution_rhs(
        geom.rm, geom.ginv, geom.ric, data.p, data.m, cov_p, np.zeros_like(data.m), t
    )
    wrong = rhs + 2.0 * (geom.ric_mixed.T @ data.m + data.m @ geom.ric_mixed)
    assert np.max(np.abs(fam.dm_dt(x, t) - rhs)) <= 1e-8
    assert np.max(np.abs(fam.dm_dt(x, t) - wrong)) > 1e-3


def test_m_closed_form_value():
    # unit-scale 2-sphere at t=1: M = 1.5 g
    fam = flows.constant_curvature(2, 3.0)
    x = [0.2, 0.1]
    data = flows.flow_point_data(fam, x, 1.0)
    assert np.max(np.abs(data.m - 1.5 * data.g)) <= 1e-9
    assert np.max(np.abs(fam.m_closed_form(x, 1.0) - data.m)) <= 1e-9


def test_p_vanishes_on_parallel_ricci_families():
    for fam, t in [
        (flows.constant_curvature(2, 3.0), 0.7),
        (flows.constant_curvature(3, 5.0), 0.4),
        (flows.product_spheres(4.0, 2.0), 0.5),
    ]:
        data = flows.flow_point_data(fam, [0.1] * fam.n, t)
        assert np.max(np.abs(data.p)) <= 1e-10


def test_snapshot_record_is_json_ready():
    import json

    snap = flows.flow_closed_form(flows.product_spheres(4.0, 2.0), 0.5)
    rec = snap.record()
    parsed = json.loads(json.dumps(rec))
    assert parsed["t"] == 0.5 and parsed["n"] == 4
    assert "product_spheres" in parsed["family"]


def test_positivity_preserved_along_flows():
    rng = np.random.default_rng(8)
    for fam in [
        flows.constant_curvature(2, 3.0),
        flows.constant_curvature(3, 5.0),
        flows.product_spheres(4.0, 2.0),
    ]:
        x = rng.uniform(-0.3, 0.3, size=fam.n)
        grid = np.linspace(0.05, 0.9, 8) * fam.t_max
        series = flows.operator_positivity_series(fam, grid, x)
        assert all(v >= -1e-8 for _, v in series)
