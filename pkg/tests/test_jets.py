import math

import numpy as np
import pytest

from curvflow import jets
from curvflow.errors import EvaluationDomainError
from curvflow.jets import Jet, JetSpace, jet_eval, jet_fd_crosscheck


def test_constant_field_order2():
    out = jet_eval(lambda c: 5.0, [0.3, -1.2], active=[0, 1], order=2)
    assert out.value == 5.0
    assert all(abs(v) == 0.0 for k, v in out.partial_table().items() if sum(k) > 0)


def test_bilinear_field():
    out = jet_eval(lambda c: c[0] * c[1], [3.0, 2.0], active=[0, 1], order=2)
    assert out.value == 6.0
    assert out.partial([0]) == 2.0
    assert out.partial([1]) == 3.0
    assert out.partial([0, 1]) == 1.0
    assert out.partial([0, 0]) == 0.0


def test_reciprocal_field():
    out = jet_eval(lambda c: 1.0 / c[0], [2.0], active=[0], order=2)
    assert out.value == pytest.approx(0.5, abs=1e-15)
    assert out.partial([0]) == pytest.approx(-0.25, abs=1e-15)
    assert out.partial([0, 0]) == pytest.approx(0.25, abs=1e-15)


def test_schwarz_symmetry_same_slot():
    sp = JetSpace(3, 4)
    j = Jet.variable(sp, 0, 1.0) * Jet.variable(sp, 1, 2.0) * Jet.variable(sp, 2, -1.0)
    assert j.partial([0, 1, 2]) == j.partial([2, 0, 1]) == j.partial([1, 2, 0])


def _random_poly(rng, nvars, deg=4):
    terms = []
    from itertools import combinations_with_replacement

    for total in range(deg + 1):
        for c in combinations_with_replacement(range(nvars), total):
            e = [0] * nvars
            for v in c:
                e[v] += 1
            terms.append((tuple(e), rng.uniform(-1, 1)))

    def f(coords):
        out = 0.0
        for e, a in terms:
            term = a
            for v, d in enumerate(e):
                for _ in range(d):
                    term = term * coords[v]
            out = out + term
        return out

    return f


def test_product_rule_random_polynomials():
    rng = np.random.default_rng(7)
    for _ in range(10):
        f = _random_poly(rng, 2)
        g = _random_poly(rng, 2)
        pt = rng.uniform(-0.8, 0.8, size=2)
        jf = jet_eval(f, pt, [0, 1], 4)
        jg = jet_eval(g, pt, [0, 1], 4)
        jfg = jet_eval(lambda c: f(c) * g(c), pt, [0, 1], 4)
        prod = jf * jg
        scale = max(1.0, np.max(np.abs(jfg.coef)))
        assert np.max(np.abs(prod.coef - jfg.coef)) / scale <= 1e-12


def test_elementary_functions_against_closed_forms():
    pt = [0.4]
    j = jet_eval(lambda c: jets.exp(jets.sin(c[0])), pt, [0], 3)
    x = pt[0]
    f = math.exp(math.sin(x))
    d1 = math.cos(x) * f
    d2 = (-math.sin(x) + math.cos(x) ** 2) * f
    assert j.value == pytest.approx(f, rel=1e-14)
    assert j.partial([0]) == pytest.approx(d1, rel=1e-13)
    assert j.partial([0, 0]) == pytest.approx(d2, rel=1e-13)

    j = jet_eval(lambda c: jets.sqrt(c[0]), [4.0], [0], 2)
    assert j.partial([0]) == pytest.approx(0.25, rel=1e-14)
    assert j.partial([0, 0]) == pytest.approx(-1.0 / 32.0, rel=1e-13)

    j = jet_eval(lambda c: jets.log(c[0]) * c[0], [2.0], [0], 2)
    assert j.partial([0]) == pytest.approx(math.log(2.0) + 1.0, rel=1e-14)


def test_order_cap_and_domain_errors():
    with pytest.raises(ValueError):
        jet_eval(lambda c: c[0], [1.0], [0], order=5)
    with pytest.raises(EvaluationDomainError):
        jet_eval(lambda c: 1.0 / c[0], [1e-320], [0], 2)
    with pytest.raises(EvaluationDomainError):
        jet_eval(lambda c: jets.log(c[0]), [-1.0], [0], 2)


def test_fd_crosscheck_sin():
    rep = jet_fd_crosscheck(
        lambda c: jets.sin(c[0]), [0.0], order=1, steps=[1e-2, 5e-3, 2.5e-3]
    )
    entry = rep["entries"][0]
    assert entry["jet"] == pytest.approx(1.0, abs=1e-15)
    assert all(o >= 1.8 for o in entry["order_estimates"])
    assert not entry["flagged"]


def test_fd_crosscheck_mixed_partial():
    rep = jet_fd_crosscheck(
        lambda c: jets.exp(c[0] + c[1]),
        [0.0, 0.0],
        order=2,
        steps=[2e-2, 1e-2, 5e-3],
        dirs=(0, 1),
    )
    entry = rep["entries"][0]
    assert entry["jet"] == pytest.approx(1.0, rel=1e-12)
    assert all(abs(d) < 1e-3 for d in entry["discrepancies"])
    assert all(o >= 1.8 for o in entry["order_estimates"])


def test_fd_crosscheck_rejects_bad_steps():
    with pytest.raises(ValueError):
        jet_fd_crosscheck(lambda c: c[0], [0.0], 1, steps=[1e-2, 1e-2, 1e-3])


def test_fd_crosscheck_flags_noise_floor():
    # steps driven into the rounding regime: the discrepancy stops shrinking
    # and the entry is flagged, not fatal
    rep = jet_fd_crosscheck(
        lambda c: jets.sin(c[0]) * jets.exp(c[0]),
        [0.3],
        order=2,
        steps=[1e-6, 5e-7, 2.5e-7],
        dirs=(0, 0),
    )
    entry = rep["entries"][0]
    assert entry["flagged"] or max(entry["discrepancies"]) < 1e-11


def test_fd_crosscheck_time_block_of_product_metric():
    # time-time block over a shrinking round 2-sphere: R(t) - N/(2t) with
    # R(t) = 2/(3 - 2t); its exact t-derivative is dR/dt + N/(2 t^2)
    n_fib = 8.0

    def g00(coords):
        t = coords[0]
        return 2.0 / (3.0 - 2.0 * t) - n_fib / (2.0 * t)

    t0 = 0.1
    rep = jet_fd_crosscheck(g00, [t0], order=1, steps=[1e-3, 5e-4, 2.5e-4])
    entry = rep["entries"][0]
    closed = 4.0 / (3.0 - 2.0 * t0) ** 2 + n_fib / (2.0 * t0**2)
    assert entry["jet"] == pytest.approx(closed, rel=1e-12)
    assert all(o >= 1.8 for o in entry["order_estimates"])
