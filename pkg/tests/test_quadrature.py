import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ymren import models as M
from ymren.errors import FitError, ToleranceError
from ymren.quadrature import (QuadratureSpec, ball_integral, bulk_invariant_integral, bulk_spec, extract_finite_part,
                              log_refit, radial_rule, regulated_energy, sphere_integral, sphere_rule)

VOL = math.pi**3
FAST = QuadratureSpec(radial_order=16)


def test_sphere_rule_volume():
    x, w = sphere_rule()
    assert len(x) == 486
    np.testing.assert_allclose(np.linalg.norm(x, axis=1), 1.0, atol=1e-14)
    assert w.sum() == pytest.approx(VOL, rel=1e-14)


@pytest.mark.parametrize("i", range(6))
def test_sphere_second_and_fourth_moments(i):
    assert sphere_integral(lambda x: x[:, i] ** 2) == pytest.approx(VOL / 6, rel=1e-13)
    assert sphere_integral(lambda x: x[:, i] ** 4) == pytest.approx(VOL / 16, rel=1e-13)
    j = (i + 1) % 6
    assert sphere_integral(lambda x: x[:, i] ** 2 * x[:, j] ** 2) == pytest.approx(VOL / 48, rel=1e-13)


@given(st.integers(0, 5), st.integers(0, 5), st.integers(0, 5))
def test_odd_monomials_integrate_to_zero(i, j, k):
    assert abs(sphere_integral(lambda x: x[:, i] * x[:, j] * x[:, k])) < 1e-13


def test_sphere_monte_carlo_cross_check():
    spec = QuadratureSpec(mc_samples=20000, seed=3)
    assert sphere_integral(lambda x: 1 + x[:, 0] ** 2, spec) == pytest.approx(VOL * 7 / 6)
    with pytest.raises(ToleranceError):
        # the product rule cannot resolve a sharply peaked function
        sphere_integral(lambda x: np.exp(40 * x[:, 0]), spec, mc_tol=0.0)


def test_radial_rule_accumulates_at_outer_radius():
    r, w = radial_rule(0.9, FAST)
    assert w.sum() == pytest.approx(0.9)
    assert r.max() < 0.9 and 0.9 - r.max() < 1e-4


def test_ball_volume():
    assert ball_integral(lambda x: np.ones(len(x)), 1.0, bulk_spec()) == pytest.approx(VOL / 6, rel=1e-13)


def test_finite_part_of_synthetic_series():
    eps = np.linspace(0.01, 0.1, 10)
    fit = extract_finite_part(eps, 3 / eps + 7 + eps, n_poly=3)
    assert fit.a == pytest.approx(3, rel=1e-10)
    assert fit.b == pytest.approx(7, rel=1e-10)
    assert fit.poly[0] == pytest.approx(1, abs=1e-8)
    assert fit.rms_residual < 1e-10
    np.testing.assert_allclose(fit.predict(eps), 3 / eps + 7 + eps, rtol=1e-10)
    refit = log_refit(fit)
    assert refit.log_coef == pytest.approx(0, abs=1e-6)
    with_log = extract_finite_part(eps, 3 / eps + 7 + 0.5 * np.log(eps), n_poly=4, with_log=True)
    assert with_log.log_coef == pytest.approx(0.5, rel=1e-6)


@pytest.mark.parametrize("eps,values", [
    ([0.1, 0.2, 0.3], [1.0, 2.0, 3.0]),
    ([0.0, 0.1, 0.2, 0.3], [1.0, 2.0, 3.0, 4.0]),
    ([0.1, 0.2, 0.3, 0.4], [1.0, 2.0, 3.0]),
    ([0.1, 0.1, 0.1, 0.1], [1.0, 1.0, 1.0, 1.0]),
])
def test_finite_part_rejects_bad_samples(eps, values):
    with pytest.raises(FitError):
        extract_finite_part(eps, values, n_poly=2)


@pytest.mark.parametrize("phi,eps", [("12", 0.1), ("12,34", 0.2)])
def test_regulated_energy_matches_closed_form(phi, eps):
    cfg = M.MaxwellConfig.from_spec(phi)
    val = regulated_energy(M.maxwell_solution(cfg), eps, FAST)
    assert val == pytest.approx(M.maxwell_regulated_energy_closed_form(cfg, eps), rel=1e-10)


def test_regulated_energy_decreases_with_cutoff():
    c = M.maxwell_solution()
    vals = [regulated_energy(c, e, FAST, check=False) for e in (0.05, 0.1, 0.2)]
    assert vals[0] > vals[1] > vals[2] > 0


def test_regulated_energy_detects_unconverged_rule():
    with pytest.raises(ToleranceError):
        regulated_energy(M.maxwell_solution(), 0.1, QuadratureSpec(radial_panels=1, radial_order=2,
                                                                    panel_ratio=0.9))


@pytest.mark.parametrize("eps", [0.0, -0.1, 0.5])
def test_regulated_energy_cutoff_domain(eps):
    with pytest.raises(ValueError):
        regulated_energy(M.maxwell_solution(), eps, FAST)


def test_bulk_integral_of_closed_form():
    cfg = M.MaxwellConfig.from_spec("12,34")
    val = bulk_invariant_integral(lambda x: M.maxwell_eren_closed_form(cfg, x), M.euclidean())
    assert val == pytest.approx(M.maxwell_renormalized_energy(cfg), rel=1e-13)


@pytest.mark.parametrize("kwargs", [dict(radial_panels=0), dict(panel_ratio=1.0), dict(radial_order=1),
                                    dict(sphere_orders=(3, 3, 3, 6)), dict(sphere_orders=(1, 3, 3, 3, 6))])
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        QuadratureSpec(**kwargs)


def test_spec_refined():
    r = QuadratureSpec().refined()
    assert r.radial_panels == 24 and r.sphere_orders == (6, 6, 6, 6, 12)
