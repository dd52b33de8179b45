import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ymren import jets
from ymren import models as M
from ymren.errors import NotClosedError
from ymren.fields import SmoothField
from ymren.gauge import (ConnectionField, bianchi_residual, compactified_current_residual, coupled_grad_current,
                         current, curvature, gauge_jet, gauge_state, q2_apply)
from ymren.jets import einsum

seeds = st.integers(0, 2**31 - 1)
X0 = np.array([0.21, -0.14, 0.33, 0.05, -0.27, 0.12])
K = np.array([[0, 1j], [1j, 0]])  # K^2 = -1
THETA = np.array([0.4, -0.3, 0.2, 0.5, -0.1, 0.25])


def theta(X):
    return einsum("...i,i->...", X, THETA) + 0.3 * X[..., 0] * X[..., 2]


def gauge_transform(c: ConnectionField) -> ConnectionField:
    """A' = u A u^-1 - (du) u^-1 with u = exp(theta K), so (du) u^-1 = K dtheta."""

    def evaluator(coords, order, dtype=float):
        th = theta(jets.variables(coords, order + 1, dtype))
        dth = th.grad()
        th = th.truncate(order)
        cs, sn = jets.cos(th), jets.sin(th)
        u = cs[..., None, None] * np.eye(2) + sn[..., None, None] * K
        ui = cs[..., None, None] * np.eye(2) - sn[..., None, None] * K
        A = c.field._evaluator(coords, order, dtype)
        uA = einsum("...rx,...axs->...ars", u, A)
        uAu = einsum("...arx,...xs->...ars", uA, ui)
        return uAu - dth[..., :, None, None] * K

    return ConnectionField(SmoothField(evaluator, (6, 2, 2), "A'", valence="drc"), "A'")


def u_at(x):
    th = THETA @ x + 0.3 * x[0] * x[2]
    return np.cos(th) * np.eye(2) + np.sin(th) * K, np.cos(th) * np.eye(2) - np.sin(th) * K


def test_connection_shape_checked():
    with pytest.raises(ValueError):
        ConnectionField(SmoothField.constant(np.zeros((6, 2, 3))))


def test_constant_abelian_connection_is_flat():
    c = ConnectionField(SmoothField.constant(np.full((6, 1, 1), 0.3j)))
    assert np.max(np.abs(curvature(c, X0).components)) == 0


@pytest.mark.parametrize("phi", ["12", "12,34", "15,26,34"])
def test_maxwell_closed_forms_flat(phi):
    cfg = M.MaxwellConfig.from_spec(phi)
    c = M.maxwell_solution(cfg)
    delta = M.euclidean()
    x = M.random_points(np.random.default_rng(1), 6)
    st_ = gauge_state(c, delta, x, 3)
    np.testing.assert_allclose(st_.F.value[..., 0, 0], M.maxwell_curvature_closed_form(cfg, x), atol=1e-13)
    np.testing.assert_allclose(st_.nabla_F.value[..., 0, 0], M.maxwell_grad_curvature_closed_form(cfg, x),
                               atol=1e-13)
    np.testing.assert_allclose(st_.j.value[..., 0, 0], M.maxwell_current_closed_form(cfg, x), atol=1e-12)
    np.testing.assert_allclose(st_.nabla_j.value[..., 0, 0], M.maxwell_grad_current_closed_form(cfg, x),
                               atol=1e-12)
    np.testing.assert_allclose(np.real(st_.F_sq.value), M.maxwell_fsq_delta(cfg, x), atol=1e-12)


def test_maxwell_solves_yang_mills_on_hyperbolic_ball():
    gp, _ = M.hyperbolic_ball()
    c = M.maxwell_solution()
    for x in M.random_points(np.random.default_rng(2), 4):
        gj = gauge_jet(c, gp, x)
        assert np.max(np.abs(gj.j)) < 1e-10 * np.max(np.abs(gj.nabla_F))
        assert gj.F_sq == pytest.approx(M.maxwell_fsq_gplus(M.MaxwellConfig(), x), rel=1e-12)


@given(seeds)
def test_gauge_covariance(seed):
    rng = np.random.default_rng(seed)
    c = M.random_connection(rng, 2)
    m = M.random_metric(rng)
    c2 = gauge_transform(c)
    x = M.random_points(rng, 1)[0]
    u, ui = u_at(x)
    F, F2 = curvature(c, x).components, curvature(c2, x).components
    np.testing.assert_allclose(F2, u @ F @ ui, atol=1e-12)
    j, j2 = current(c, m, x).components, current(c2, m, x).components
    np.testing.assert_allclose(j2, u @ j @ ui, atol=1e-11)
    dj, dj2 = coupled_grad_current(c, m, x).components, coupled_grad_current(c2, m, x).components
    np.testing.assert_allclose(dj2, u @ dj @ ui, atol=1e-10)
    assert gauge_jet(c2, m, x).F_sq == pytest.approx(gauge_jet(c, m, x).F_sq, rel=1e-12)


@given(seeds)
def test_bianchi_identity(seed):
    rng = np.random.default_rng(seed)
    c = M.random_connection(rng, 1 + seed % 3)
    m = M.random_metric(rng)
    x = M.random_points(rng, 3)
    st_ = gauge_state(c, m, x, 2)
    assert np.max(np.abs(bianchi_residual(st_.geo, st_.F, st_.A))) < 1e-12


@given(seeds)
def test_compactified_current(seed):
    rng = np.random.default_rng(seed)
    c = M.random_connection(rng, 2)
    m = M.random_metric(rng)
    for x in M.random_points(rng, 2):
        res = compactified_current_residual(c, M.ball_sigma(), m, x)
        scale = np.max(np.abs(gauge_state(c, m, x, 2).nabla_F.value))
        assert np.max(np.abs(res)) < 1e-10 * scale


def test_q2_rejects_non_closed_form():
    phi = M.parse_phi("12")[:, :, None, None]
    X = SmoothField.expr(lambda X_: X_[..., 2][..., None, None, None, None] * phi, (6, 6, 1, 1), "X")
    with pytest.raises(NotClosedError):
        q2_apply(X, M.euclidean(), X0)


def test_q2_of_constant_form_on_flat_space_vanishes():
    phi = M.parse_phi("12,34")[:, :, None, None].astype(complex)
    out = q2_apply(SmoothField.constant(phi), M.euclidean(), X0)
    assert out.valence == "ddrc"
    assert np.max(np.abs(out.components)) == 0
