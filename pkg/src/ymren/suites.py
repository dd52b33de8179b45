"""Identity suites: batches of residual records over seeded random and model cases.

Each suite returns a list of :class:`~ymren.invariants.InvariantReport`.
Suites are deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import invariants as inv
from . import models as M
from .fields import SmoothField
from .gauge import compactified_current_rhs, gauge_state
from .geometry import DIM, conformal_rescale
from .invariants import reports

DEFAULT_TOL = 1e-8
SCHRODINGER_TOL = 1e-9
TRACTOR_TOL = 1e-7
CATALOG_SIZE = 24
POINTS_PER_ENTRY = 5
VERIFY_SIZE = 30
VERIFY_POINTS = 20
TRACTOR_POINTS = 10

CATALOG_NAMES = ("q_forms", "weitzenboeck", "anomaly_eren", "anomaly_divergence", "q_shift", "covariance_anomaly",
                 "covariance_eren", "compactified_current", "weyl_divergence", "riemann")
MAXWELL_NAMES = ("ym_equation", "compactified_current_plus", "q_fsq", "q_shift_einstein", "schrodinger_annihilation", "schrodinger_forms",
                 "potential_two_path")
VERIFY_NAMES = CATALOG_NAMES + MAXWELL_NAMES
TRACTOR_NAMES = ("tractor_curvature_blocks", "tractor_current_oracle", "tractor_trace_jj", "tractor_trace_Fdj",
                 "tractor_trace_dFdF", "tractor_fsq_weyl", "weyl_energy_literal", "weyl_energy_signed",
                 "ads_einstein", "ads_tractor_yang_mills", "ads_current_oracle", "ads_q_fsq")

# identities whose quoted form fails numerically (a constant-factor mismatch); reported but not counted
DOCUMENTED_MISMATCHES = ("weyl_energy_literal",)


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 0
    size: int = CATALOG_SIZE
    points: int = POINTS_PER_ENTRY
    tolerance: Optional[float] = None

    def tol(self, default: float) -> float:
        return default if self.tolerance is None else self.tolerance


def _tag(reps, case: str):
    return [inv.InvariantReport(r.point, r.name, r.lhs, r.rhs, r.residual, r.tolerance, case) for r in reps]


# pointwise identities on the random catalog --------------------------------------------------

def _riemann_sides(geo):
    g, P = geo.g.value, geo.P.value
    kn = (np.einsum("...ac,...bd->...abcd", g, P) - np.einsum("...bc,...ad->...abcd", g, P)
          + np.einsum("...bd,...ac->...abcd", g, P) - np.einsum("...ad,...bc->...abcd", g, P))
    return geo.Rdown.value, geo.W.value + kn


def _weyl_divergence_sides(geo):
    dW = geo.nabla(geo.W.truncate(geo.order - 2), "dddd").value  # [e, a, b, c, d]
    div = np.einsum("...ea,...eabcd->...bcd", geo.ginv.value, dW)
    C = geo.C.value  # [a, b, c]
    return div, (DIM - 3) * np.einsum("...cdb->...bcd", C)


def _compactified_sides(c, m_compact, sigma, x, m_plus=None):
    if m_plus is None:
        m_plus = conformal_rescale(m_compact, sigma.map(lambda s: 1 / s, name="1/sigma"))
    lhs = gauge_state(c, m_plus, x, 2).j.value
    rhs = compactified_current_rhs(gauge_state(c, m_compact, x, 2), sigma.jet(x, 2)).value
    return lhs, rhs


def catalog_suite(cfg: SuiteConfig = SuiteConfig(), only: Optional[set] = None) -> list:
    """Pointwise identities on seeded random (metric, connection, Omega, point) triples."""
    tol = cfg.tol(DEFAULT_TOL)
    want = (lambda name: True) if not only else (lambda name: name in only)
    sigma = M.ball_sigma()
    out = []
    for e in M.random_catalog(cfg.seed, cfg.size, cfg.points):
        x, case = e.points, e.label
        st = inv.state(e.connection, e.metric, x)
        v = st.values()
        reps = []
        A = inv.anomaly_from(st, v)
        E = inv.eren_from(v)
        if want("q_forms"):
            reps += reports("q_forms", x, np.real(inv.q_via_q2(st)), np.real(inv.q_expanded(v)), tol)
        if want("weitzenboeck"):
            reps += reports("weitzenboeck", x, *inv.weitzenboeck_sides(st), tol)
        if want("anomaly_eren"):
            reps += reports("anomaly_eren", x, np.real(A), np.real(E), tol)
        if want("anomaly_divergence"):
            reps += reports("anomaly_divergence", x, *inv.anomaly_divergence_sides(st), tol)
        if want("q_shift") or want("covariance_anomaly") or want("covariance_eren"):
            m2 = conformal_rescale(e.metric, e.omega)
            st2 = inv.state(e.connection, m2, x)
            v2 = st2.values()
            w6 = e.omega.jet(x, 0).value ** 6
            if want("q_shift"):
                rhs = inv.q_expanded(v) - 3 * inv.shift_term(st, inv.jets.log(e.omega.jet(x, 3)))
                reps += reports("q_shift", x, np.real(w6 * inv.q_expanded(v2)), np.real(rhs), tol)
            if want("covariance_anomaly"):
                reps += reports("covariance_anomaly", x, np.real(w6 * inv.anomaly_from(st2, v2)), np.real(A), tol)
            if want("covariance_eren"):
                reps += reports("covariance_eren", x, np.real(w6 * inv.eren_from(v2)), np.real(E), tol)
        if want("compactified_current"):
            lhs, rhs = _compactified_sides(e.connection, e.metric, sigma, x)
            reps += reports("compactified_current", x, lhs, rhs, tol)
        if want("weyl_divergence"):
            reps += reports("weyl_divergence", x, *_weyl_divergence_sides(st.geo), tol)
        if want("riemann"):
            reps += reports("riemann", x, *_riemann_sides(st.geo), tol)
        out += _tag(reps, case)
    return out


# the Maxwell ball --------------------------------------------------------------------------------

def _random_log_factor(rng) -> SmoothField:
    w = M.random_conformal_factor(rng, "exp f")
    return w.map(inv.jets.log, name="f")


def maxwell_suite(cfg: SuiteConfig = SuiteConfig(), only: Optional[set] = None,
                  phi: str = "12") -> list:
    """Yang-Mills specializations on the hyperbolic ball with the Maxwell solution."""
    tol = cfg.tol(DEFAULT_TOL)
    stol = cfg.tol(SCHRODINGER_TOL)
    want = (lambda name: True) if not only else (lambda name: name in only)
    mc = M.MaxwellConfig.from_spec(phi)
    c = M.maxwell_solution(mc)
    gp, sigma = M.hyperbolic_ball()
    delta = M.euclidean()
    rng = np.random.default_rng(cfg.seed + 1)
    out = []
    for i in range(cfg.size):
        x = M.random_points(rng, cfg.points)
        case = f"maxwell{i}"
        f = _random_log_factor(rng)
        reps = []
        if want("ym_equation"):
            st = inv.state(c, gp, x, 2, 2)
            scale = np.max(np.abs(st.nabla_F.value).reshape(len(x), -1), axis=1)
            reps += reports("ym_equation", x, st.j.value, np.zeros_like(st.j.value), tol, scale)
        if want("compactified_current_plus"):
            lhs, rhs = _compactified_sides(c, delta, sigma, x, gp)
            scale = np.max(np.abs(gauge_state(c, gp, x, 2).nabla_F.value).reshape(len(x), -1), axis=1)
            reps += reports("compactified_current_plus", x, lhs, rhs, tol, scale)
        if want("q_fsq"):
            q = inv.q_curvature(c, gp, x)
            reps += reports("q_fsq", x, q, M.maxwell_fsq_gplus(mc, x), tol)
        if want("q_shift_einstein"):
            reps += reports("q_shift_einstein", x, *inv.q_shift_einstein_sides(c, gp, f, x), tol)
        if want("schrodinger_annihilation"):
            sa, fn = inv.schrodinger_on_norm(c, delta, sigma, x)
            reps += reports("schrodinger_annihilation", x, sa, np.zeros_like(sa), stol, fn)
        if want("schrodinger_forms"):
            st = inv.state(c, gp, x)
            fnorm = inv.norm_jet(st.F_sq)
            fj = f.jet(x, 2)
            sa, cat = inv.schrodinger_forms(st.geo, fnorm, fj)
            reps += reports("schrodinger_forms", x, np.real(sa), np.real(cat), stol, np.abs(fj.value))
        if want("potential_two_path"):
            reps += reports("potential_two_path", x, inv.potential_v(c, delta, sigma, x),
                            inv.potential_v_direct(c, delta, sigma, x), tol)
        out += _tag(reps, case)
    return out


# tractor suite --------------------------------------------------------------------------------

def _tractor_blocks(g, x, tol):
    geo, st = M.tractor_state(g, x)
    closed = M.tractor_curvature_closed_form(geo)
    return reports("tractor_curvature_blocks", x, st.F.value, closed, tol, np.max(np.abs(closed), initial=0.0))


def _tractor_oracle(g, h, x, tol):
    ga = g.geometry(x, 5)
    ha = ga if h is None else h.geometry(x, 3)
    st = inv.GaugeState(ha, M.tractor_from_geometry(ga, 3))
    jo = M.tractor_current_closed_form(ga, None if h is None else ha)
    scale = np.max(np.abs(st.nabla_F.value).reshape(len(x), -1), axis=1)
    return reports("tractor_current_oracle", x, st.j.value, jo, tol, scale)


def ads_suite(cfg: SuiteConfig = SuiteConfig(), m_param: float = 0.1) -> list:
    """Einstein property and the tractor Yang-Mills property on the AdS-Schwarzschild chart."""
    tol = cfg.tol(TRACTOR_TOL)
    etol = cfg.tol(DEFAULT_TOL)
    gp = M.ads_schwarzschild(m_param)
    sigma = M.ads_sigma()
    gc = conformal_rescale(gp, sigma)
    x = M.ads_points(cfg.points, cfg.seed)
    out = []
    geo_p = gp.geometry(x, 3)
    g = geo_p.g.value
    out += reports("ads_einstein", x, geo_p.Ric.value, -(DIM - 1) * g, etol)
    geo_c = gc.geometry(x, 5)
    st = inv.GaugeState(geo_p, M.tractor_from_geometry(geo_c, 3))
    j = st.j.value
    scale = np.max(np.abs(st.nabla_F.value).reshape(len(x), -1), axis=1)
    out += reports("ads_tractor_yang_mills", x, j, np.zeros_like(j), tol, scale)
    jo = M.tractor_current_closed_form(geo_c, geo_p)
    out += reports("ads_current_oracle", x, j, jo, tol, scale)
    q = np.real(inv.q_expanded(st.values()))
    out += reports("ads_q_fsq", x, q, np.real(st.F_sq.value), etol)
    for r in M.tractor_trace_identities(gc, x):
        if r.name.startswith("weyl_energy"):
            out.append(inv.InvariantReport(r.point, r.name, r.lhs, r.rhs, r.residual, r.tolerance, "ads"))
    return _tag(out, "ads")


def tractor_suite(cfg: SuiteConfig = SuiteConfig(), only: Optional[set] = None) -> list:
    """Tractor curvature, current and trace identities on random metrics, flat space and AdS."""
    tol = cfg.tol(TRACTOR_TOL)
    ctol = cfg.tol(DEFAULT_TOL)
    rng = np.random.default_rng(cfg.seed + 2)
    out = []
    cases = [("flat", M.euclidean(), None)]
    n_metrics = max(1, cfg.size // 6)
    for i in range(n_metrics):
        cases.append((f"tractor{i}", M.random_metric(rng, name=f"g{i}"), M.random_metric(rng, name=f"h{i}")))
    for case, g, h in cases:
        x = M.random_points(rng, cfg.points)
        reps = []
        reps += _tractor_blocks(g, x, ctol)
        reps += _tractor_oracle(g, None, x, ctol)
        if h is not None:
            reps += _tractor_oracle(g, h, x, ctol)
        for r in M.tractor_trace_identities(g, x):
            rt = tol if r.name.startswith(("tractor_trace", "weyl_energy")) else ctol
            reps.append(inv.InvariantReport(r.point, r.name, r.lhs, r.rhs, r.residual, rt))
        out += _tag(reps, case)
    out += ads_suite(cfg)
    if only:
        out = [r for r in out if r.name in only]
    return out


VERIFY_SUITES: dict[str, Callable] = {
    "catalog": catalog_suite,
    "maxwell": maxwell_suite,
}


def run_verify(cfg: SuiteConfig = SuiteConfig(), only: Optional[set] = None) -> list:
    out = []
    for fn in VERIFY_SUITES.values():
        out += fn(cfg, only)
    return out


def counts_toward_status(r: inv.InvariantReport) -> bool:
    return r.name not in DOCUMENTED_MISMATCHES


def all_passed(records) -> bool:
    return all(r.passed for r in records if counts_toward_status(r))


def summarize(records) -> list[dict]:
    """Per-identity count, worst residual and pass flag, in first-seen order."""
    rows: dict[str, dict] = {}
    for r in records:
        row = rows.setdefault(r.name, {"identity": r.name, "count": 0, "max_residual": 0.0, "tolerance": r.tolerance,
                                       "pass": True, "counted": counts_toward_status(r)})
        row["count"] += 1
        row["max_residual"] = max(row["max_residual"], r.residual)
        row["pass"] = row["pass"] and r.passed
    return list(rows.values())
