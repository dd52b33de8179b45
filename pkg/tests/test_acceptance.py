"""Acceptance checks: each test prints one PASS/FAIL line at the stated tolerance."""

import math

import numpy as np
import pytest

from ymren import cli
from ymren import invariants as inv
from ymren import models as M
from ymren import quadrature as Q
from ymren import suites as S
from ymren.fields import SmoothField, evaluate_jet, fd_oracle
from ymren import jets
from ymren.jets import einsum

PI3 = math.pi**3
CFG = M.MaxwellConfig()


@pytest.fixture(scope="module")
def routes():
    return Q.maxwell_energy_routes(CFG, Q.DEFAULT_EPS_GRID, Q.QuadratureSpec())


@pytest.fixture(scope="module")
def tractor_records():
    return S.tractor_suite(S.SuiteConfig(seed=0, size=S.CATALOG_SIZE, points=S.TRACTOR_POINTS))


def worst(records, name):
    rs = [r for r in records if r.name == name]
    assert rs, name
    return max(r.residual for r in rs), len(rs)


def test_maxwell_renormalized_energy_routes(routes, acceptance_line):
    exact = -PI3
    assert routes.exact == pytest.approx(exact, rel=1e-15)
    errs = routes.relative_errors()
    values = {"regulated_fit": routes.regulated.b, "closed_form_bulk": routes.closed_form_bulk,
              "generic_bulk": routes.generic_bulk, "conformal_bulk": routes.conformal_bulk}
    pair = max(abs(a - b) / abs(exact) for a in values.values() for b in values.values())
    ok = max(errs.values()) < 1e-4 and pair < 1e-4
    acceptance_line("[1] Maxwell-ball E_ren, three routes + conformal representative", ok,
                    " ".join(f"{k}={v:.10f}" for k, v in values.items())
                    + f" max_rel_err={max(errs.values()):.2e} tol=1e-4")
    assert ok


def test_regulated_energy_table(routes, acceptance_line):
    c = M.maxwell_solution(CFG)
    table = []
    for e in Q.TABLE_EPS_GRID:
        quad = Q.regulated_energy(c, e)
        closed = M.maxwell_regulated_energy_closed_form(CFG, e)
        table.append(abs(quad - closed) / abs(closed))
    a_exact = PI3 * CFG.norm_sq / 12
    a_err = abs(routes.regulated.a - a_exact) / a_exact
    log_coef = Q.log_refit(routes.regulated).log_coef
    ok = max(table) < 1e-6 and a_err < 1e-4 and abs(log_coef) < 1e-3 * abs(routes.exact)
    acceptance_line("[2] regulated-energy table, divergent coefficient, no log term", ok,
                    f"table_max_rel_err={max(table):.2e} (tol 1e-6) a_rel_err={a_err:.2e} (tol 1e-4) "
                    f"log_coef={log_coef:.2e} (bound {1e-3 * abs(routes.exact):.2e})")
    assert ok


def test_sphere_identity(acceptance_line):
    errs = []
    for spec in ("12", "12,34", "13,25,46"):
        mc = M.MaxwellConfig.from_spec(spec)
        val = Q.sphere_integral(lambda n: M.phi_nn(mc, n))
        exact = PI3 * mc.norm_sq / 6
        errs.append(abs(val - exact) / exact)
    ok = max(errs) < 1e-8
    acceptance_line("[3] sphere identity int phi^na phi_na = pi^3 |phi|^2 / 6", ok,
                    f"max_rel_err={max(errs):.2e} tol=1e-8")
    assert ok


def test_pointwise_identity_suite(acceptance_line):
    cfg = S.SuiteConfig(seed=0, size=S.CATALOG_SIZE, points=S.POINTS_PER_ENTRY)
    recs = S.catalog_suite(cfg)
    recs += S.maxwell_suite(cfg, {"q_shift_einstein"})
    names = S.CATALOG_NAMES + ("q_shift_einstein",)
    rows = {n: worst(recs, n) for n in names}
    ok = all(r < 1e-8 and n >= 100 for r, n in rows.values())
    acceptance_line("[4] pointwise identity suite", ok,
                    " ".join(f"{k}={r:.1e}/{n}" for k, (r, n) in rows.items()) + " tol=1e-8")
    assert ok


def test_poincare_einstein_specializations(acceptance_line):
    c = M.maxwell_solution(CFG)
    delta, sigma = M.euclidean(), M.ball_sigma()
    cfg = S.SuiteConfig(seed=0, size=S.CATALOG_SIZE, points=S.POINTS_PER_ENTRY)
    recs = S.maxwell_suite(cfg, {"q_fsq", "schrodinger_annihilation"})
    q, _ = worst(recs, "q_fsq")
    ann, _ = worst(recs, "schrodinger_annihilation")
    s = 2.0 ** -np.arange(4, 15)
    v = inv.potential_v(c, delta, sigma, inv.ray_points(inv.DEFAULT_RAY, s))
    v_fit = inv.fit_decay(s, v)
    v_small = abs(float(inv.potential_v(c, delta, sigma, inv.ray_points(inv.DEFAULT_RAY, [1e-3]))[0]))
    rng = np.random.default_rng(0)
    boundary = [np.asarray(inv.DEFAULT_RAY)] + list(rng.normal(size=(5, 6)))
    normal_bc = 0.0
    for b in boundary:
        scale = max(1.0, abs(float(M.maxwell_fsq_delta(CFG, b / np.linalg.norm(b)))))
        normal_bc = max(normal_bc, abs(inv.boundary_normal_check(c, delta, sigma, b)) / scale)
    asym = inv.asym_residual_order(c, sigma).exponent
    control = inv.asym_residual_order(c, sigma, K=1.0).exponent
    ok = q < 1e-8 and ann < 1e-9 and v_small < 0.05 and v_fit.exponent > 0 and normal_bc < 1e-6 and asym >= 1.8
    acceptance_line("[5] Poincare-Einstein / Yang-Mills specializations", ok,
                    f"Q=|F|^2 {q:.1e} (1e-8) annihilation {ann:.1e} (1e-9) |V(1e-3)|={v_small:.1e} (<0.05) "
                    f"V_order={v_fit.exponent:.2f} (>0) normal_derivative_bc={normal_bc:.1e} (1e-6) "
                    f"asym_order={asym:.2f} (>=1.8; "
                    f"K=1 control {control:.2f})")
    assert ok


def test_tractor_suite(tractor_records, acceptance_line):
    recs = tractor_records
    rows = {
        "tractor_curvature_blocks": (worst(recs, "tractor_curvature_blocks")[0], 1e-8),
        "tractor_fsq_weyl": (worst(recs, "tractor_fsq_weyl")[0], 1e-8),
        "tractor_trace_jj": (worst(recs, "tractor_trace_jj")[0], 1e-7),
        "tractor_trace_Fdj": (worst(recs, "tractor_trace_Fdj")[0], 1e-7),
        "tractor_trace_dFdF": (worst(recs, "tractor_trace_dFdF")[0], 1e-7),
    }
    einstein = worst(recs, "ads_einstein")[0]
    assert einstein < 1e-8  # the chart must be Einstein before the tractor property is meaningful
    rows["ads_einstein"] = (einstein, 1e-8)
    rows["ads_tractor_yang_mills"] = (worst(recs, "ads_tractor_yang_mills")[0], 1e-7)
    rows["weyl_energy_signed"] = (worst(recs, "weyl_energy_signed")[0], 1e-7)
    ok = all(r < t for r, t in rows.values())
    acceptance_line("[6] tractor suite", ok, " ".join(f"{k}={r:.1e}({t:.0e})" for k, (r, t) in rows.items()))
    assert ok


@pytest.mark.xfail(strict=True, reason="quarter-weighted Weyl energy integrand differs by a factor of -4; "
                                       "see notes/decisions.md")
def test_weyl_energy_quarter_weight(tractor_records, acceptance_line):
    random_res = worst([r for r in tractor_records if r.case != "ads"], "weyl_energy_literal")[0]
    ads_res = worst([r for r in tractor_records if r.case == "ads"], "weyl_energy_literal")[0]
    ok = ads_res < 1e-7
    acceptance_line("[6b] Weyl energy integrand, quarter weight, on the AdS chart", ok,
                    f"ads_residual={ads_res:.3f} random_metric_residual={random_res:.3f} tol=1e-7 "
                    "(documented mismatch: the signed relation -E_ren = RHS holds)")
    assert ok


def random_scalar_field(rng) -> SmoothField:
    k1, k2, w = rng.normal(size=(3, 6))
    t, a, b, d = rng.uniform(-1, 1, 4)

    def fn(X):
        lin = einsum("...i,i->...", X, k1)
        return (jets.exp(0.5 * a * jets.sin(lin + t)) * (1 + 0.3 * b * einsum("...i,i->...", X, w) ** 2)
                + 0.4 * d * jets.cos(einsum("...i,i->...", X, k2)) / (2 + X[..., 0] ** 2))

    return SmoothField.expr(fn, (), "random")


def test_engine_soundness(tmp_path, acceptance_line):
    rng = np.random.default_rng(2024)
    worst_fd = 0.0
    for _ in range(200):
        f = random_scalar_field(rng)
        x = rng.uniform(-0.5, 0.5, 6)
        j = evaluate_jet(f, x)
        for k in (1, 2, 3):
            mi = tuple(rng.integers(0, 6, k))
            exact = j.partial(*mi)
            approx = fd_oracle(f, x, mi)
            worst_fd = max(worst_fd, abs(approx - exact) / max(abs(exact), 1.0))
    c = M.maxwell_solution(CFG)
    base = Q.QuadratureSpec(radial_order=8)
    e = 0.02
    reg = [Q.regulated_energy(c, e, s, check=False) for s in (base, base.refined())]
    sph = [Q.sphere_integral(lambda n: M.phi_nn(CFG, n), s) for s in (base, base.refined())]
    bs = Q.bulk_spec()
    blk = [Q.bulk_invariant_integral(lambda x: M.maxwell_eren_closed_form(CFG, x), M.euclidean(), s)
           for s in (bs, bs.refined())]
    refine = max(abs(a - b) / abs(b) for a, b in (reg, sph, blk))
    paths = [tmp_path / f"r{i}.ndjson" for i in range(2)]
    for p in paths:
        assert cli.main(["verify", "--size", "3", "--points", "3", "--seed", "11", "--emit-json", str(p)]) == 0
    identical = paths[0].read_bytes() == paths[1].read_bytes()
    ok = worst_fd < 1e-6 and refine < 1e-7 and identical
    acceptance_line("[7] engine soundness", ok,
                    f"AD_vs_FD={worst_fd:.1e} (1e-6, 200 fields) refinement={refine:.1e} (1e-7) "
                    f"byte_identical={identical}")
    assert ok
