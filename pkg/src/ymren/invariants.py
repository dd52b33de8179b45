"""Scalar invariants of a connection on a six-manifold and the identities relating them.

Every function accepts a single :class:`~ymren.fields.ChartPoint` or an
array of points of shape (N, 6) and evaluates in one batched pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import jets
from .errors import FitError, ToleranceError, ZeroCurvatureError
from .fields import SmoothField, as_coords
from .gauge import ConnectionField, GaugeState, GaugeValues, gauge_state, q2_jet, trace
from .geometry import DIM, LocalGeometry, MetricField, conformal_rescale, defining_jets
from .jets import Jet, einsum
from .tensor import alternate

RESIDUAL_FLOOR = 1e-12
ZERO_F_FLOOR = 1e-300


@dataclass(frozen=True)
class InvariantReport:
    point: tuple
    name: str
    lhs: complex
    rhs: complex
    residual: float
    tolerance: float
    case: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.residual < self.tolerance)

    def record(self) -> dict:
        return {
            "identity": self.name,
            "case": self.case,
            "point": list(self.point),
            "lhs": _num(self.lhs),
            "rhs": _num(self.rhs),
            "residual": self.residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


def _num(z):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def relative_residual(lhs, rhs, scale=0.0, floor: float = RESIDUAL_FLOOR) -> np.ndarray:
    """|lhs - rhs| / max(|lhs|, |rhs|, scale, floor), elementwise over leading axes.

    Array-valued sides (vectors, matrices) are compared in the max norm over
    their trailing axes; pass ``scale`` when both sides are expected to vanish.
    """
    lhs, rhs = np.asarray(lhs), np.asarray(rhs)
    nd = max(lhs.ndim, rhs.ndim)
    extra = tuple(range(1, nd)) if nd > 1 else ()

    def mag(a):
        a = np.abs(a)
        return np.max(a, axis=extra) if extra and a.ndim == nd else a

    diff = mag(lhs - rhs)
    denom = np.maximum(np.maximum(mag(lhs), mag(rhs)), np.maximum(np.asarray(scale), floor))
    return diff / denom


def reports(name: str, coords: np.ndarray, lhs, rhs, tolerance: float, scale=0.0, case: str = "") -> list[InvariantReport]:
    coords = np.atleast_2d(coords)
    res = np.atleast_1d(relative_residual(lhs, rhs, scale))
    lhs, rhs = np.asarray(lhs), np.asarray(rhs)
    out = []
    for i, x in enumerate(coords):
        li = lhs[i] if lhs.ndim else lhs
        ri = rhs[i] if rhs.ndim else rhs
        if np.ndim(li):
            li, ri = np.max(np.abs(li)), np.max(np.abs(ri))
        out.append(InvariantReport(tuple(float(v) for v in x), name, complex(li), complex(ri), float(res[i]),
                                   tolerance, case))
    return out


def _coords(p) -> np.ndarray:
    return as_coords(p)


def _real(z):
    z = np.asarray(z)
    return z.real if np.iscomplexobj(z) else z


# building blocks -----------------------------------------------------------------

def state(c: ConnectionField, m: MetricField, p, conn_order: int = 3, metric_order: int = 3) -> GaugeState:
    return gauge_state(c, m, _coords(p), conn_order, metric_order)


def laplacian_tr_FF(st: GaugeState) -> np.ndarray:
    """Delta Tr(F^ab F_ab), differentiating the traced scalar as a whole."""
    return st.geo.laplacian(st.tr_FF).value


def div_F_j(st: GaugeState) -> np.ndarray:
    """nabla_a Tr(F^ab j_b)."""
    j = st.j
    o = min(st.F_up.order, j.order)
    S = einsum("...abrs,...bsr->...a", st.F_up.truncate(o), j.truncate(o))
    return st.geo.divergence(S).value


def q_expanded(v: GaugeValues) -> np.ndarray:
    return -v.Fdj + 4 * v.FPF + v.J * v.FF


def q_via_q2(st: GaugeState) -> np.ndarray:
    q2 = q2_jet(st.geo, st.F, st.A)
    return trace(st.F_up.value, q2, "ab,ab->")


def anomaly_from(st: GaugeState, v: GaugeValues) -> np.ndarray:
    return -0.25 * laplacian_tr_FF(st) - v.jj - 2 * v.Fdj + 4 * v.FPF + v.J * v.FF


def eren_from(v: GaugeValues) -> np.ndarray:
    return -v.jj - 0.5 * v.dFdF + 6 * v.FPF - 3 * v.Fdj + v.FWF + 2 * v.FFF


# public invariants --------------------------------------------------------------------

def q_curvature_forms(c: ConnectionField, m: MetricField, p) -> tuple[np.ndarray, np.ndarray]:
    """Q computed as Tr(F^ab Q2 F_ab) and from its expanded form."""
    st = state(c, m, p)
    return _real(q_via_q2(st)), _real(q_expanded(st.values()))


def q_curvature(c: ConnectionField, m: MetricField, p, tol: float = 1e-8) -> np.ndarray:
    """Branson-Gover Q-curvature; raises ToleranceError if its two forms disagree."""
    a, b = q_curvature_forms(c, m, p)
    scale = np.maximum(np.abs(a), np.abs(b))
    if np.any(np.abs(a - b) > tol * np.maximum(scale, 1.0)):
        raise ToleranceError("the two forms of the Q-curvature disagree")
    return b


def anomaly_integrand(c: ConnectionField, m: MetricField, p) -> np.ndarray:
    st = state(c, m, p)
    return _real(anomaly_from(st, st.values()))


def eren_integrand(c: ConnectionField, m: MetricField, p) -> np.ndarray:
    st = state(c, m, p, 3, 2)
    return _real(eren_from(st.values()))


def weitzenboeck_sides(st: GaugeState) -> tuple[np.ndarray, np.ndarray]:
    """Traced Weitzenboeck identity: Tr(FWF + 2FFF) and its six-term right side."""
    v = st.values()
    lhs = v.FWF + 2 * v.FFF
    rhs = -0.25 * laplacian_tr_FF(st) + 0.5 * v.dFdF + v.Fdj - 2 * v.FPF + v.J * v.FF
    return _real(lhs), _real(rhs)


def weitzenboeck_residual(c: ConnectionField, m: MetricField, p) -> np.ndarray:
    lhs, rhs = weitzenboeck_sides(state(c, m, p))
    return lhs - rhs


def anomaly_divergence_sides(st: GaugeState) -> tuple[np.ndarray, np.ndarray]:
    """A and Q + Tr(-1/4 Delta(F^ab F_ab) - nabla_a(F^ab j_b))."""
    v = st.values()
    lap = laplacian_tr_FF(st)
    lhs = -0.25 * lap - v.jj - 2 * v.Fdj + 4 * v.FPF + v.J * v.FF
    rhs = q_expanded(v) - 0.25 * lap - div_F_j(st)
    return _real(lhs), _real(rhs)


def shift_term(st: GaugeState, log_omega: Jet) -> np.ndarray:
    """Tr F^ab nabla^c nabla_[c (F_ab] log Omega)."""
    F = st.F
    o = min(F.order, log_omega.order)
    Y = F.truncate(o) * log_omega.truncate(o)[..., None, None, None, None]
    Z = st.geo.nabla(Y, "ddrc", st.A)  # [c, a, b, r, s]
    Z = Jet(alternate(Z.c, [-6, -5, -4]), Z.order)
    dZ = st.geo.nabla(Z, "dddrc", st.A)  # [e, c, a, b, r, s]
    U = np.einsum("...ec,...ecabrs->...abrs", st.geo.ginv.value, dZ.value)
    return trace(st.F_up.value, U, "ab,ab->")


def q_shift_sides(c: ConnectionField, m: MetricField, omega: SmoothField, p) -> tuple[np.ndarray, np.ndarray]:
    """Omega^6 Q[Omega^2 g] and Q[g] - 3 Tr F^ab nabla^c nabla_[c (F_ab] log Omega)."""
    x = _coords(p)
    st = state(c, m, x)
    st2 = state(c, conformal_rescale(m, omega), x)
    w = omega.jet(x, 3)
    lhs = w.value**6 * q_expanded(st2.values())
    rhs = q_expanded(st.values()) - 3 * shift_term(st, jets.log(w))
    return _real(lhs), _real(rhs)


def q_shift_residual(c: ConnectionField, m: MetricField, omega: SmoothField, p) -> np.ndarray:
    lhs, rhs = q_shift_sides(c, m, omega, p)
    return lhs - rhs


def covariance_sides(fn: Callable, c: ConnectionField, m: MetricField, omega: SmoothField, p):
    """(Omega^6 I[Omega^2 g], I[g]) for a pointwise invariant I."""
    x = _coords(p)
    w = omega.jet(x, 0).value
    return w**6 * fn(c, conformal_rescale(m, omega), x), fn(c, m, x)


def q_shift_einstein_sides(c: ConnectionField, m_plus: MetricField, f: SmoothField, p) -> tuple[np.ndarray, np.ndarray]:
    """e^{6f} Q[e^{2f} g_+] and its four-term expression in g_+."""
    x = _coords(p)
    fj = f.jet(x, 3)
    omega = f.map(jets.exp, name="exp f")
    st2 = state(c, conformal_rescale(m_plus, omega), x)
    lhs = np.exp(6 * fj.value) * q_expanded(st2.values())
    st = state(c, m_plus, x)
    geo = st.geo
    fsq = st.F_sq  # order 2
    df = fj.grad()
    lap_f = geo.laplacian(fj).value
    dfsq = fsq.grad().value
    gi = geo.ginv.value
    grad_term = np.einsum("...ab,...a,...b->...", gi, dfsq, df.value)
    o = st.F_up.order  # 2
    Z = einsum("...abrs,...casr->...cb", st.F_up, st.F.truncate(o))  # Tr F^ab F_ca
    Z = einsum("...cb,...b->...c", Z.truncate(1), df.truncate(1))
    Zu = einsum("...cd,...d->...c", geo.ginv.truncate(1), Z)
    div = geo.divergence(Zu).value
    rhs = fsq.value + fsq.value * lap_f + grad_term - 2 * div
    return _real(lhs), _real(rhs)


# Schroedinger operator and potential ----------------------------------------------------

def _plus_metric(m_compact: MetricField, sigma: SmoothField) -> MetricField:
    return conformal_rescale(m_compact, sigma.map(lambda s: 1 / s, name="1/sigma"))


def norm_jet(fsq: Jet) -> Jet:
    v = np.real(fsq.value)
    # |F|^2 is a positive form in F, so any non-positive value means F = 0 up to rounding
    if not np.all(v > ZERO_F_FLOOR):
        raise ZeroCurvatureError("|F| vanishes at an evaluation point")
    return jets.sqrt(fsq.real if np.iscomplexobj(fsq.c) else fsq)


def schrodinger_forms(geo_plus: LocalGeometry, fnorm: Jet, f: Jet) -> tuple[np.ndarray, np.ndarray]:
    """(1/|F|) div(|F|^2 grad(f/|F|)) and Delta f - f Delta|F| / |F|."""
    u = f.truncate(2) / fnorm.truncate(2)
    du = u.grad()
    w = einsum("...ab,...b->...a", geo_plus.ginv.truncate(1), du) * (fnorm.truncate(1) ** 2)[..., None]
    sa = geo_plus.divergence(w).value / fnorm.value
    cat = geo_plus.laplacian(f).value - f.value * geo_plus.laplacian(fnorm).value / fnorm.value
    return sa, cat


def schrodinger_apply(c: ConnectionField, m_compact: MetricField, sigma: SmoothField, f: SmoothField, p,
                      tol: float = 1e-9) -> np.ndarray:
    """Modified Laplacian (1/|F|) nabla_a g_+^ab |F|^2 nabla_b (f/|F|) in the interior metric."""
    x = _coords(p)
    st = state(c, _plus_metric(m_compact, sigma), x)
    fnorm = norm_jet(st.F_sq)
    sa, cat = schrodinger_forms(st.geo, fnorm, f.jet(x, 2))
    scale = np.maximum(np.maximum(np.abs(sa), np.abs(cat)), np.abs(f.jet(x, 0).value))
    if np.any(np.abs(sa - cat) > tol * np.maximum(scale, 1.0)):
        raise ToleranceError("self-adjoint and potential forms of the operator disagree")
    return _real(sa)


def schrodinger_on_norm(c: ConnectionField, m_compact: MetricField, sigma: SmoothField, p) -> tuple[np.ndarray, np.ndarray]:
    """The operator applied to |F|_{g_+} itself, returned with |F|_{g_+} for scaling."""
    x = _coords(p)
    st = state(c, _plus_metric(m_compact, sigma), x)
    fnorm = norm_jet(st.F_sq)
    sa, _ = schrodinger_forms(st.geo, fnorm, fnorm)
    return _real(sa), _real(fnorm.value)


def potential_v(c: ConnectionField, m_compact: MetricField, sigma: SmoothField, p) -> np.ndarray:
    """V = Delta_{g_+}|F|_{g_+} / |F|_{g_+} + 2(d-3) via its form smooth up to the boundary.

    V = (sigma/Phi) (sigma (Delta^g - 4(d-3)/d J) Phi - (d-6)(nabla_n + (2/d) div n) Phi)
    with Phi = |F|_g and n = d sigma, all in the compactified metric.
    """
    x = _coords(p)
    d = DIM
    st = state(c, m_compact, x, 3, 3)
    geo = st.geo
    phi = norm_jet(st.F_sq)
    s = sigma.jet(x, 3)
    n, _, div_n, _ = defining_jets(geo, s)
    lap = geo.laplacian(phi).value
    dphi = phi.grad().value
    n_up = np.einsum("...ab,...b->...a", geo.ginv.value, n.value)
    nphi = np.einsum("...a,...a->...", n_up, dphi)
    sv, pv = s.value, phi.value
    J = geo.J.value
    val = (sv / pv) * (sv * (lap - 4 * (d - 3) / d * J * pv) - (d - 6) * (nphi + 2 / d * div_n.value * pv))
    return _real(val)


def laplace_ratio(c: ConnectionField, m_compact: MetricField, sigma: SmoothField, p) -> np.ndarray:
    """Delta_{g_+}|F|_{g_+} / |F|_{g_+} evaluated directly in the interior metric."""
    x = _coords(p)
    st = state(c, _plus_metric(m_compact, sigma), x)
    fnorm = norm_jet(st.F_sq)
    return _real(st.geo.laplacian(fnorm).value / fnorm.value)


def potential_v_direct(c: ConnectionField, m_compact: MetricField, sigma: SmoothField, p) -> np.ndarray:
    return laplace_ratio(c, m_compact, sigma, p) + 2 * (DIM - 3)


# boundary asymptotics ------------------------------------------------------------------

def ray_points(direction, sigmas) -> np.ndarray:
    """Points on the ball ray through ``direction`` where sigma = (1 - r^2)/2 takes the given values."""
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    r = np.sqrt(1 - 2 * np.asarray(sigmas, dtype=float))
    return r[:, None] * u


def asym_residuals(c: ConnectionField, m_compact: MetricField, sigma: SmoothField, points,
                   G: Optional[SmoothField] = None, K: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """(Delta^{g_+,A} f_asym + |F|_{g_+}) / |F|_{g_+} and sigma at the points.

    f_asym = |F|_{g_+} ((1 + K sigma) log sigma + G sigma) with constant K.
    """
    x = _coords(points)
    st = state(c, _plus_metric(m_compact, sigma), x)
    fnorm = norm_jet(st.F_sq)
    s = sigma.jet(x, 2)
    psi = (1 + K * s) * jets.log(s)
    if G is not None:
        psi = psi + G.jet(x, 2) * s
    f = fnorm.truncate(2) * psi
    sa, _ = schrodinger_forms(st.geo, fnorm, f)
    return _real((sa + fnorm.value) / fnorm.value), _real(s.value)


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    log_coef: float
    coef: float
    sigmas: np.ndarray
    residuals: np.ndarray
    rms: float


def fit_decay(sigmas, values, with_log: bool = True, bounds=(0.0, 4.0)) -> DecayFit:
    """Fit values ~ sigma^p (a log sigma + b) by variable projection over p."""
    s = np.asarray(sigmas, dtype=float)
    y = np.asarray(values, dtype=float)
    if len(s) < 3:
        raise FitError("need at least three samples to fit a decay order")

    def solve(p):
        cols = [s**p * np.log(s), s**p] if with_log else [s**p]
        B = np.stack(cols, 1) / np.abs(y)[:, None]
        coef, *_ = np.linalg.lstsq(B, y / np.abs(y), rcond=None)
        return coef, B @ coef - np.sign(y)

    def cost(p):
        return float(np.sum(solve(p)[1] ** 2))

    grid = np.linspace(*bounds, 81)
    p0 = grid[int(np.argmin([cost(p) for p in grid]))]
    lo, hi = max(bounds[0], p0 - 0.05), min(bounds[1], p0 + 0.05)
    res = minimize_scalar(cost, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    coef, r = solve(res.x)
    a, b = (coef if with_log else (0.0, coef[0]))
    return DecayFit(float(res.x), float(a), float(b), s, y, float(np.sqrt(np.mean(r**2))))


ASYM_KS = tuple(range(4, 15))


def asym_residual_order(c: ConnectionField, sigma: SmoothField, G_choice: Optional[SmoothField] = None,
                        ray=None, K: float = 0.0, m_compact: Optional[MetricField] = None,
                        ks: Sequence[int] = ASYM_KS) -> DecayFit:
    """Fitted decay exponent of the relative residual along the ray r = 1 - 2^-k."""
    from .models import euclidean

    m_compact = m_compact or euclidean()
    u = np.asarray(ray if ray is not None else DEFAULT_RAY, dtype=float)
    u = u / np.linalg.norm(u)
    r = 1 - 2.0 ** -np.asarray(ks, dtype=float)
    res, s = asym_residuals(c, m_compact, sigma, r[:, None] * u, G_choice, K)
    mono = np.diff(np.log(np.abs(res)))
    if np.sum(mono > 0) > 1:
        raise FitError("relative residual does not decrease monotonically toward the boundary")
    return fit_decay(s, res)


# a generic direction, away from the circles where |F| degenerates for the default two-forms
DEFAULT_RAY = (0.41, 0.23, -0.37, 0.52, 0.29, -0.53)

# one shell more than three halvings: the cubic term otherwise leaves ~4e-6 after extrapolation
NORMAL_SHELLS = (1e-2, 5e-3, 2.5e-3, 1.25e-3)


def richardson_to_zero(h, values) -> float:
    """Polynomial extrapolation to h = 0 through the given samples."""
    h = np.asarray(h, dtype=float)
    v = np.asarray(values, dtype=float)
    coef = np.polyfit(h, v, len(h) - 1)
    return float(coef[-1])


def boundary_normal_quantity(c: ConnectionField, m_compact: MetricField, sigma: SmoothField, points) -> np.ndarray:
    """(nabla_nhat - 4 rho) |F|^2_g; at the boundary -rho is the mean curvature."""
    x = _coords(points)
    st = state(c, m_compact, x, 2, 3)
    geo = st.geo
    fsq = st.F_sq
    s = sigma.jet(x, 3)
    n, n_sq, _, rho = defining_jets(geo, s)
    n_up = np.einsum("...ab,...b->...a", geo.ginv.value, n.value)
    dn = np.einsum("...a,...a->...", n_up, fsq.grad().value) / np.sqrt(n_sq.value)
    return _real(dn - 4 * rho.value * fsq.value)


def boundary_normal_check(c: ConnectionField, m_compact: MetricField, sigma: SmoothField, boundary_point,
                        sigmas: Sequence[float] = NORMAL_SHELLS) -> float:
    """((nabla_nhat + 4H)|F|^2_g) at a boundary point, extrapolated from interior shells."""
    pts = ray_points(boundary_point, sigmas)
    return richardson_to_zero(sigmas, boundary_normal_quantity(c, m_compact, sigma, pts))
