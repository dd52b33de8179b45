import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ymren import jets
from ymren.errors import DomainError, OrderError
from ymren.fields import ChartPoint, SmoothField, evaluate_jet, fd_oracle
from ymren.jets import Jet, einsum

coords = st.lists(st.floats(-0.6, 0.6), min_size=6, max_size=6).map(np.array)


def poly_field(c):
    # a cubic with mixed terms; its jet is exact at order 3
    return SmoothField.expr(
        lambda X: c[0] * X[..., 0] ** 3 + c[1] * X[..., 0] * X[..., 1] * X[..., 2] + c[2] * X[..., 3] ** 2 * X[..., 5]
        + c[3] * X[..., 4],
        (), "cubic")


def test_ncoef_counts_monomials():
    assert jets.ncoef(0) == 1
    assert jets.ncoef(3) == math.comb(9, 3)
    assert jets.ncoef(5) == math.comb(11, 5)


def test_variables_jet_has_unit_gradient():
    x = np.array([0.1, -0.2, 0.3, 0.0, 0.5, -0.4])
    X = jets.variables(x, 2)
    np.testing.assert_allclose(X.value, x)
    np.testing.assert_allclose(X.grad().value, np.eye(6))


@given(coords)
def test_polynomial_partials_exact(x):
    c = np.array([1.3, -0.7, 2.1, 0.4])
    j = evaluate_jet(poly_field(c), ChartPoint(x))
    assert j.partial(0, 0, 0) == pytest.approx(6 * c[0])
    assert j.partial(0, 1, 2) == pytest.approx(c[1])
    assert j.partial(2, 1, 0) == pytest.approx(c[1])
    assert j.partial(3, 3) == pytest.approx(2 * c[2] * x[5])
    assert j.partial(4) == pytest.approx(c[3])


@given(coords)
def test_product_rule(x):
    a = jets.sin(jets.variables(x, 3)[..., 0]) + jets.variables(x, 3)[..., 1] ** 2
    b = jets.exp(0.3 * jets.variables(x, 3)[..., 2])
    lhs = (a * b).grad()
    rhs = a.grad() * b.truncate(2)[..., None] + b.grad() * a.truncate(2)[..., None]
    np.testing.assert_allclose(lhs.c, rhs.c, atol=1e-12)


@given(coords)
def test_exp_log_roundtrip(x):
    X = jets.variables(x, 3)
    u = 1.5 + 0.4 * jets.cos(X[..., 0] + X[..., 3])
    np.testing.assert_allclose(jets.log(jets.exp(u)).c, u.c, atol=1e-12)
    np.testing.assert_allclose((jets.sqrt(u) * jets.sqrt(u)).c, u.c, atol=1e-12)
    np.testing.assert_allclose((u * jets.reciprocal(u)).c, Jet.constant(1.0, 3).c, atol=1e-12)


@given(coords)
def test_matrix_inverse(x):
    X = jets.variables(x, 3)
    m = jets.stack([jets.stack([2 + X[..., 0], 0.3 * X[..., 1]]), jets.stack([0.3 * X[..., 1], 1.5 + X[..., 2] ** 2])])
    prod = einsum("...ij,...jk->...ik", m, jets.inv(m))
    np.testing.assert_allclose(prod.c, Jet.constant(np.eye(2), 3).c, atol=1e-12)


def test_log_of_nonpositive_raises():
    X = jets.variables(np.zeros(6), 2)
    with pytest.raises(DomainError):
        jets.log(X[..., 0] - 1.0)


def test_truncate_cannot_raise_order():
    with pytest.raises(OrderError):
        Jet.constant(1.0, 1).truncate(2)


def test_evaluate_jet_caps_public_order():
    with pytest.raises(OrderError):
        evaluate_jet(poly_field(np.ones(4)), ChartPoint(np.zeros(6)), order=4)


def test_partial_not_requested():
    j = evaluate_jet(poly_field(np.ones(4)), ChartPoint(np.zeros(6)), order=1)
    with pytest.raises(OrderError):
        j.partial(0, 1)


def test_chart_point_dimension():
    with pytest.raises(ValueError):
        ChartPoint((0.0, 1.0))
    assert ChartPoint(np.zeros(5), chart="sphere5").array.shape == (5,)


def test_domain_guard():
    f = SmoothField.expr(lambda X: X[..., 0], (), "x0", domain=lambda x: np.sum(x * x, -1) < 1)
    with pytest.raises(DomainError):
        f.jet(np.full(6, 0.9), 1)


TRANSCENDENTAL = SmoothField.expr(
    lambda X: jets.exp(0.5 * jets.sin(X[..., 0] * X[..., 1]) + 0.2 * X[..., 2])
    / (1.3 + X[..., 3] ** 2 + 0.1 * jets.cos(X[..., 4] - X[..., 5])),
    (), "transcendental")


@pytest.mark.parametrize("mi", [(0,), (3,), (0, 1), (2, 2), (0, 1, 4), (5, 5, 5), (1, 1, 3)])
def test_jet_matches_fd_oracle(mi):
    x = np.array([0.2, -0.4, 0.1, 0.3, -0.25, 0.5])
    exact = evaluate_jet(TRANSCENDENTAL, ChartPoint(x)).partial(*mi)
    approx = fd_oracle(TRANSCENDENTAL, ChartPoint(x), mi)
    assert approx == pytest.approx(exact, rel=1e-6, abs=1e-8)


# values and partials of TRANSCENDENTAL at X0, frozen from a symbolic computation
X0 = np.array([0.2, -0.4, 0.1, 0.3, -0.25, 0.5])
FROZEN = {(): 0.66994349826067912, (0, 1): 0.31844557793005257, (0, 1, 4): -0.014835255917512018}


@pytest.mark.parametrize("mi", sorted(FROZEN, key=len))
def test_jet_frozen_values(mi):
    assert evaluate_jet(TRANSCENDENTAL, ChartPoint(X0)).partial(*mi) == pytest.approx(FROZEN[mi], rel=1e-13)


@pytest.mark.parametrize("mi", [(0, 1), (0, 1, 4)])
def test_fd_oracle_frozen_values(mi):
    assert fd_oracle(TRANSCENDENTAL, ChartPoint(X0), mi) == pytest.approx(FROZEN[mi], rel=1e-7)


def test_batched_jets_match_pointwise():
    pts = np.random.default_rng(0).uniform(-0.5, 0.5, (4, 6))
    batch = TRANSCENDENTAL.jet(pts, 3).c
    for i, x in enumerate(pts):
        np.testing.assert_allclose(batch[i], TRANSCENDENTAL.jet(x, 3).c, rtol=1e-13, atol=1e-15)


def test_field_arithmetic():
    f = poly_field(np.ones(4))
    g = SmoothField.expr(lambda X: 2.0 + X[..., 0], (), "g")
    x = np.array([0.1, 0.2, 0.3, 0.4, 0.5, 0.6])
    assert (f * g)(x) == pytest.approx(f(x) * g(x))
    assert (f - g)(x) == pytest.approx(f(x) - g(x))
    assert (f / g)(x) == pytest.approx(f(x) / g(x))
