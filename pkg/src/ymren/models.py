"""Concrete metrics, connections and closed-form oracles.

* the hyperbolic ball ``g_+ = delta / sigma^2`` with ``sigma = (1 - r^2)/2``;
* a Euclidean AdS-Schwarzschild chart (Einstein with nonzero Weyl tensor);
* the Maxwell solution on the hyperbolic ball built from a parallel two-form;
* the tractor connection of a metric and the closed forms of its curvature,
  gradient and current;
* a seeded catalog of random metrics, connections and conformal factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import jets
from .errors import DomainError
from .fields import SmoothField
from .gauge import ConnectionField, GaugeState
from .geometry import DIM, LocalGeometry, MetricField, check_metric
from .jets import Jet, einsum

TRACTOR_DIM = DIM + 2
SPHERE_VOLUME = math.pi**3  # Vol(S^5)
BALL_VOLUME = math.pi**3 / 6  # Vol(B^6)


def _eye(X: Jet, k: int = DIM) -> Jet:
    return Jet.constant(np.broadcast_to(np.eye(k), X.shape[:-1] + (k, k)), X.order, X.dtype)


def r_squared(X: Jet) -> Jet:
    return (X * X).sum(-1)


def sigma_expr(X: Jet) -> Jet:
    return (1 - r_squared(X)) / 2


def open_ball(x: np.ndarray) -> np.ndarray:
    return np.sum(np.asarray(x) ** 2, axis=-1) < 1


def closed_ball(x: np.ndarray) -> np.ndarray:
    return np.sum(np.asarray(x) ** 2, axis=-1) <= 1 + 1e-12


# metrics -----------------------------------------------------------------------

def euclidean() -> MetricField:
    return MetricField.expr(lambda X: _eye(X), "delta")


def ball_sigma() -> SmoothField:
    return SmoothField.expr(sigma_expr, (), "sigma", closed_ball)


def hyperbolic_ball() -> tuple[MetricField, SmoothField]:
    """(g_+, sigma) on the open unit ball."""
    g = MetricField.expr(lambda X: _eye(X) * (sigma_expr(X) ** -2)[..., None, None], "g_plus", open_ball)
    return g, ball_sigma()


AdS_R_RANGE = (1.5, 3.0)
AdS_POLE_MARGIN = 0.2


def ads_domain(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    r = x[..., 1]
    th = x[..., 2:5]
    ok = (r >= AdS_R_RANGE[0] - 0.05) & (r <= AdS_R_RANGE[1] + 0.05)
    return ok & np.all((th > AdS_POLE_MARGIN) & (th < math.pi - AdS_POLE_MARGIN), axis=-1)


def ads_potential(r, m_param: float):
    return 1 + r * r - m_param * r**-3


def ads_schwarzschild(m_param: float = 0.1) -> MetricField:
    """Euclidean AdS-Schwarzschild in coordinates (t, r, theta1..theta4)."""
    if m_param < 0:
        raise DomainError("mass parameter must be nonnegative")

    def metric(X):
        r = X[..., 1]
        V = ads_potential(r, m_param)
        s1, s2, s3 = (jets.sin(X[..., i]) for i in (2, 3, 4))
        r2 = r * r
        w = [s1 * s1, s1 * s1 * s2 * s2]
        w.append(w[1] * s3 * s3)
        diag = [V, 1 / V, r2, r2 * w[0], r2 * w[1], r2 * w[2]]
        return jets.stack(diag, -1)[..., None] * _eye(X)

    return MetricField.expr(metric, f"ads_schwarzschild(m={m_param})", ads_domain)


def ads_sigma() -> SmoothField:
    return SmoothField.expr(lambda X: 1 / X[..., 1], (), "1/r", ads_domain)


def ads_points(n: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    pts = np.empty((n, DIM))
    pts[:, 0] = rng.uniform(-1, 1, n)
    pts[:, 1] = rng.uniform(*AdS_R_RANGE, n)
    pts[:, 2:5] = rng.uniform(0.4, math.pi - 0.4, (n, 3))
    pts[:, 5] = rng.uniform(0, 2 * math.pi, n)
    return pts


# Maxwell on the hyperbolic ball ---------------------------------------------------

def parse_phi(spec: str) -> np.ndarray:
    """``"12"`` -> dx1^dx2, ``"12,34"`` -> dx1^dx2 + dx3^dx4."""
    phi = np.zeros((DIM, DIM))
    for item in str(spec).split(","):
        item = item.strip()
        if len(item) != 2 or not item.isdigit():
            raise ValueError(f"bad two-form spec {item!r}; expected digit pairs like '12'")
        a, b = int(item[0]) - 1, int(item[1]) - 1
        if not (0 <= a < DIM and 0 <= b < DIM) or a == b:
            raise ValueError(f"bad index pair {item!r}")
        phi[a, b] += 1
        phi[b, a] -= 1
    return phi


@dataclass(frozen=True)
class MaxwellConfig:
    """A constant (parallel) two-form phi on the ball."""

    phi: np.ndarray = field(default_factory=lambda: parse_phi("12"))

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        if phi.shape != (DIM, DIM) or not np.allclose(phi, -phi.T):
            raise ValueError("phi must be an antisymmetric 6x6 matrix")
        if self.norm_sq <= 0:
            raise ValueError("phi must be nonzero")
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_spec(cls, spec: str) -> "MaxwellConfig":
        return cls(parse_phi(spec))

    @property
    def norm_sq(self) -> float:
        """|phi|^2 = phi_ab phi^ab."""
        return float(np.sum(np.asarray(self.phi) ** 2))


def hypergeometric_residual(f, df, ddf, z):
    """(1-z) z f'' + (4-2z) f' + 2 f."""
    return (1 - z) * z * ddf + (4 - 2 * z) * df + 2 * f


def maxwell_profile(z):
    """The regular solution f(z) = 2 - z of the radial equation."""
    return 2 - z


def maxwell_solution(cfg: Optional[MaxwellConfig] = None) -> ConnectionField:
    """u(1) connection A = -i B with B_a = -1/2 f(r^2) phi_ba n^b, n = d sigma = -x."""
    cfg = cfg or MaxwellConfig()
    phi = cfg.phi

    def conn(X):
        f = maxwell_profile(r_squared(X))
        xphi = einsum("...b,ba->...a", X, phi)  # x^b phi_ba = -n^b phi_ba
        B = 0.5 * f[..., None] * xphi
        return (-1j * B)[..., None, None]

    return ConnectionField.expr(conn, 1, "maxwell", closed_ball)


def maxwell_curvature_closed_form(cfg: MaxwellConfig, x) -> np.ndarray:
    """i F_ab = (1 + 2 sigma) phi_ab - n_a phi_nb + n_b phi_na, returned as F (shape [..., 6, 6])."""
    x = np.asarray(x, dtype=float)
    phi = cfg.phi
    n = -x
    s = (1 - np.sum(x * x, -1)) / 2
    phi_n = np.einsum("...a,ab->...b", n, phi)  # phi_nb
    iF = (1 + 2 * s)[..., None, None] * phi - n[..., :, None] * phi_n[..., None, :] + n[..., None, :] * phi_n[..., :, None]
    return -1j * iF


def phi_nn(cfg: MaxwellConfig, x) -> np.ndarray:
    """phi^na phi_na with n = -x."""
    pn = np.einsum("...a,ab->...b", -np.asarray(x, dtype=float), cfg.phi)
    return np.sum(pn * pn, -1)


def maxwell_fsq_delta(cfg: MaxwellConfig, x) -> np.ndarray:
    s = (1 - np.sum(np.asarray(x) ** 2, -1)) / 2
    return (1 + 2 * s) ** 2 * cfg.norm_sq - 2 * (1 + 6 * s) * phi_nn(cfg, x)


def maxwell_fsq_gplus(cfg: MaxwellConfig, p) -> np.ndarray:
    """|F|^2_{g_+} = sigma^4 [(1+2 sigma)^2 |phi|^2 - 2 (1 + 6 sigma) phi^na phi_na]."""
    x = np.asarray(getattr(p, "array", p), dtype=float)
    s = (1 - np.sum(x * x, -1)) / 2
    return s**4 * maxwell_fsq_delta(cfg, x)


def maxwell_current_closed_form(cfg: MaxwellConfig, x) -> np.ndarray:
    """j_a in the flat metric: i j_a = 8 phi_na."""
    pn = np.einsum("...a,ab->...b", -np.asarray(x, dtype=float), cfg.phi)
    return -1j * 8 * pn


def maxwell_grad_current_closed_form(cfg: MaxwellConfig, x) -> np.ndarray:
    """i nabla_a j_b = -8 phi_ab in the flat metric."""
    x = np.asarray(x, dtype=float)
    return np.broadcast_to(-1j * -8 * cfg.phi, x.shape[:-1] + (DIM, DIM))


def maxwell_grad_curvature_closed_form(cfg: MaxwellConfig, x) -> np.ndarray:
    """i nabla_c F_ab = 2 n_c phi_ab + delta_ca phi_nb - delta_cb phi_na + n_a phi_cb - n_b phi_ca."""
    x = np.asarray(x, dtype=float)
    n = -x
    phi = cfg.phi
    pn = np.einsum("...a,ab->...b", n, phi)
    I = np.eye(DIM)
    out = (2 * n[..., :, None, None] * phi
           + I[:, :, None] * pn[..., None, None, :]
           - I[:, None, :] * pn[..., None, :, None]
           + n[..., None, :, None] * phi[:, None, :]
           - n[..., None, None, :] * phi[:, :, None])
    return -1j * out


def maxwell_eren_closed_form(cfg: MaxwellConfig, x) -> np.ndarray:
    """Renormalized-energy integrand in the flat metric: -(21 + 54 sigma)|phi|^2 + 126 phi^na phi_na."""
    s = (1 - np.sum(np.asarray(x) ** 2, -1)) / 2
    return -(21 + 54 * s) * cfg.norm_sq + 126 * phi_nn(cfg, x)


def cutoff_radius(eps):
    """Euclidean radius of the cut-off ball rho >= eps, rho = (1-r)/(1+r)."""
    return (1 - eps) / (1 + eps)


def maxwell_regulated_energy_closed_form(cfg: MaxwellConfig, eps) -> float:
    eps = np.asarray(eps, dtype=float)
    if np.any((eps <= 0) | (eps >= 1)):
        raise DomainError("cut-off parameter must lie in (0, 1)")
    vol, n2 = SPHERE_VOLUME, cfg.norm_sq
    sphere = vol * n2 / 6
    first = (3 + eps) * (1 - eps) ** 6 * (1 + 3 * eps) / (24 * (1 + eps) ** 6 * eps) * vol * n2
    second = (1 - eps) ** 8 / (4 * (1 + eps) ** 6 * eps) * sphere
    return first - second


def maxwell_renormalized_energy(cfg: MaxwellConfig) -> float:
    """-1/2 Vol(S^5) |phi|^2."""
    return -0.5 * SPHERE_VOLUME * cfg.norm_sq


def maxwell_divergent_coefficient(cfg: MaxwellConfig) -> float:
    """Coefficient a of 1/eps in the regulated energy: Vol(S^5)|phi|^2 / 12."""
    return SPHERE_VOLUME * cfg.norm_sq / 12


# rho (normal-form) coordinate ---------------------------------------------------------

def rho_of_r(r):
    return (1 - r) / (1 + r)


def r_of_rho(rho):
    return (1 - rho) / (1 + rho)


def normal_form_h(rho):
    """h(rho) = (rho r / sigma)^2 of g_+ = (d rho^2 + h ds^2) / rho^2."""
    r = r_of_rho(rho)
    s = (1 - r * r) / 2
    return (rho * r / s) ** 2


# tractor connection ------------------------------------------------------------------

def tractor_from_geometry(geo: LocalGeometry, order: int) -> Jet:
    """Tractor connection one-form in the splitting of the metric, shape [a, 8, 8].

    Fiber order (v+, v^1..v^6, v-).  Needs a metric jet of order ``order + 2``.
    """
    o = order
    g = geo.g.truncate(o)
    G = geo.Gamma.truncate(o)  # [c, a, d]
    P = geo.P.truncate(o)
    Pm = einsum("...cb,...ba->...ac", geo.ginv.truncate(o), P)  # [a, c] = P^c_a
    batch = g.shape[:-2]
    c = np.zeros(batch + (DIM, TRACTOR_DIM, TRACTOR_DIM, jets.ncoef(o)), dtype=np.result_type(g.dtype, float))
    c[..., :, 0, 1:7, :] = -g.c
    c[..., :, 1:7, 0, :] = Pm.c
    c[..., :, 1:7, 1:7, :] = np.moveaxis(G.c, -4, -3)  # [a, c, d] = Gamma^c_ad
    for a in range(DIM):
        c[..., a, 1 + a, 7, 0] = 1.0
    c[..., :, 7, 1:7, :] = -P.c
    return Jet(c, o)


def tractor_connection(g: MetricField) -> ConnectionField:
    """The tractor connection of the conformal class of ``g``, realized in the g-splitting."""

    def evaluator(coords, order, dtype=float):
        geo = LocalGeometry(g.field._evaluator(coords, order + 2, dtype))
        return tractor_from_geometry(geo, order)

    fld = SmoothField(evaluator, (DIM, TRACTOR_DIM, TRACTOR_DIM), f"tractor[{g.name}]", g.domain, "drc",
                      g.field.extended)
    return ConnectionField(fld, fld.name)


def tractor_curvature_closed_form(geo: LocalGeometry) -> np.ndarray:
    """Blocks (0, 0, 0; C_ab^c, W_ab^c_d, 0; 0, -C_abd, 0) as values [a, b, 8, 8]."""
    gi = geo.ginv.value
    C = geo.C.value
    W = geo.W.value
    batch = C.shape[:-3]
    F = np.zeros(batch + (DIM, DIM, TRACTOR_DIM, TRACTOR_DIM), dtype=float)
    F[..., 1:7, 0] = np.einsum("...ce,...abe->...abc", gi, C)
    F[..., 1:7, 1:7] = np.einsum("...ce,...abed->...abcd", gi, W)
    F[..., 7, 1:7] = -C
    return F


def _k_term(K: np.ndarray, T: np.ndarray, rest: int) -> np.ndarray:
    """-2 K_e[a^f T_|f|b...] for K stored as [f, e, a]; output [e, a, b, ...]."""
    tail = "cdgh"[:rest]
    t = np.einsum(f"...fea,...fb{tail}->...eab{tail}", K, T)
    return -(t - np.swapaxes(t, -rest - 2, -rest - 1))


def tractor_grad_curvature_closed_form(geo: LocalGeometry, h_geo: Optional[LocalGeometry] = None) -> np.ndarray:
    """nabla^{h,A}_e F_ab of the tractor curvature, values [e, a, b, 8, 8].

    ``h_geo`` is the geometry of the metric coupled to the form indices; by
    default h = g and the contorsion K = nabla^h - nabla^g vanishes.  Needs a
    metric jet of order >= 4.
    """
    gi = geo.ginv.value
    g = geo.g.value
    P = geo.P.value
    C = geo.C.value
    W = geo.W.value
    dC = geo.nabla(geo.C, "ddd").value  # [e, a, b, c]
    dW = geo.nabla(geo.W.truncate(geo.order - 3), "dddd").value  # [e, a, b, c, d]
    if h_geo is None:
        K = np.zeros(g.shape[:-2] + (DIM, DIM, DIM))
    else:
        K = h_geo.Gamma.value - geo.Gamma.value  # [f, e, a] = K_ea^f
    Pm = np.einsum("...ef,...fc->...ec", P, gi)  # P_e^c
    Cu = np.einsum("...cx,...abx->...abc", gi, C)  # C_ab^c
    Wu = np.einsum("...cx,...abxd->...abcd", gi, W)  # W_ab^c_d
    dCu = np.einsum("...cx,...eabx->...eabc", gi, dC)
    dWu = np.einsum("...cx,...eabxd->...eabcd", gi, dW)
    I = np.broadcast_to(np.eye(DIM), g.shape)
    out = np.zeros(g.shape[:-2] + (DIM, DIM, DIM, TRACTOR_DIM, TRACTOR_DIM), dtype=float)
    out[..., 0, 0] = -np.einsum("...abe->...eab", C)
    out[..., 0, 1:7] = -np.einsum("...abed->...eabd", W)
    out[..., 1:7, 0] = dCu + _k_term(K, Cu, 1) - np.einsum("...ef,...abcf->...eabc", Pm, Wu)
    out[..., 1:7, 1:7] = (dWu + _k_term(K, Wu, 2) - np.einsum("...ec,...abd->...eabcd", I, C)
                          + np.einsum("...abc,...ed->...eabcd", Cu, g))
    out[..., 1:7, 7] = -np.einsum("...abce->...eabc", Wu)
    out[..., 7, 1:7] = -dC - _k_term(K, C, 1) - np.einsum("...ef,...abfd->...eabd", P, Wu)
    out[..., 7, 7] = np.einsum("...abe->...eab", C)
    return out


def tractor_current_closed_form(geo: LocalGeometry, h_geo: Optional[LocalGeometry] = None) -> np.ndarray:
    """j[A([g]), h]_b = h^ae nabla^{h,A}_e F_ab, values [b, 8, 8]."""
    hi = (h_geo or geo).ginv.value
    dF = tractor_grad_curvature_closed_form(geo, h_geo)
    return np.einsum("...ae,...eabrs->...brs", hi, dF)


@dataclass(frozen=True)
class WeylScalars:
    """Weyl and Cotton contractions entering the tractor energy, values over the batch."""

    CC: np.ndarray  # C_abc C^abc
    WdC: np.ndarray  # W^abcd nabla_d C_abc
    dWdW: np.ndarray  # (nabla^e W^abcd) nabla_e W_abcd
    WPW: np.ndarray  # W^abce P_ef W_abc^f
    W3a: np.ndarray  # W^abef W_abcd W^cd_ef
    W3b: np.ndarray  # W^abcd W_aecf W_b^e_d^f
    WW: np.ndarray  # W_abcd W^abcd


def weyl_scalars(geo: LocalGeometry) -> WeylScalars:
    """Needs a metric jet of order >= 4."""
    gi = geo.ginv.value
    C, W, P = geo.C.value, geo.W.value, geo.P.value
    dC = geo.nabla(geo.C, "ddd").value  # [d, a, b, c]
    dW = geo.nabla(geo.W.truncate(geo.order - 3), "dddd").value
    Cu = np.einsum("...ax,...by,...cz,...xyz->...abc", gi, gi, gi, C, optimize=True)
    Wu = np.einsum("...ax,...by,...cz,...dw,...xyzw->...abcd", gi, gi, gi, gi, W, optimize=True)
    dWu = np.einsum("...ef,...ax,...by,...cz,...dw,...fxyzw->...eabcd", gi, gi, gi, gi, gi, dW, optimize=True)
    W_cd_ef = np.einsum("...cx,...dy,...xyef->...cdef", gi, gi, W)
    W_b_e_d_f = np.einsum("...ey,...fz,...bydz->...bedf", gi, gi, W)
    return WeylScalars(
        CC=np.einsum("...abc,...abc->...", Cu, C),
        WdC=np.einsum("...abcd,...dabc->...", Wu, dC),
        dWdW=np.einsum("...eabcd,...eabcd->...", dWu, dW),
        WPW=np.einsum("...abce,...ef,...abcf->...", Wu, P, np.einsum("...fx,...abcx->...abcf", gi, W)),
        W3a=np.einsum("...abef,...abcd,...cdef->...", Wu, W, W_cd_ef),
        W3b=np.einsum("...abcd,...aecf,...bedf->...", Wu, W, W_b_e_d_f),
        WW=np.einsum("...abcd,...abcd->...", Wu, W),
    )


def weyl_energy_rhs(w: WeylScalars) -> np.ndarray:
    """Six-term Weyl and Cotton integrand of the renormalized Weyl energy."""
    return -0.5 * w.dWdW + 8 * w.WdC - 8 * w.CC - 8 * w.WPW + 0.5 * w.W3a + 2 * w.W3b


def tractor_state(g: MetricField, coords) -> tuple[LocalGeometry, GaugeState]:
    """Geometry of ``g`` (order 5) and the tractor connection coupled to g (connection order 3)."""
    geo = g.geometry(coords, 5)
    return geo, GaugeState(geo, tractor_from_geometry(geo, 3))


def tractor_trace_identities(g: MetricField, p, d: int = DIM) -> list:
    """Trace identities of the tractor connection at the given points, as InvariantReports.

    Besides the three trace identities this reports |F|^2 = W.W, the literal
    Weyl-energy integrand equality 1/4 E_ren = RHS and the signed variant
    -E_ren = RHS, which is the relation that actually holds pointwise.
    """
    from .invariants import eren_from, reports

    x = np.atleast_2d(np.asarray(getattr(p, "array", p), dtype=float))
    geo, st = tractor_state(g, x)
    v = st.values()
    w = weyl_scalars(geo)
    eren = np.real(eren_from(v))
    rhs = weyl_energy_rhs(w)
    out = []
    out += reports("tractor_trace_jj", x, np.real(v.jj), -(d - 4) ** 2 * w.CC, 1e-7)
    out += reports("tractor_trace_Fdj", x, np.real(v.Fdj), -(d - 4) * (w.CC - w.WdC), 1e-7)
    out += reports("tractor_trace_dFdF", x, np.real(v.dFdF),
                   -w.dWdW + 2 * (d - 4) * w.CC + 4 * w.WdC - 4 * w.WPW, 1e-7)
    out += reports("tractor_fsq_weyl", x, np.real(st.F_sq.value), w.WW, 1e-8)
    out += reports("weyl_energy_literal", x, 0.25 * eren, rhs, 1e-7)
    out += reports("weyl_energy_signed", x, -eren, rhs, 1e-7)
    return out


# random catalog --------------------------------------------------------------------------

PERTURBATION = 0.05
SAMPLE_RADIUS = 0.8


def random_points(rng: np.random.Generator, n: int, radius: float = SAMPLE_RADIUS) -> np.ndarray:
    v = rng.normal(size=(n, DIM))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = radius * rng.uniform(0, 1, n) ** (1 / DIM)
    return v * r[:, None]


def random_metric(rng: np.random.Generator, amplitude: float = PERTURBATION, name: str = "random") -> MetricField:
    """delta + amplitude * S(x) with S symmetric, built from cubic polynomials and a sine."""
    M0 = rng.normal(size=(DIM, DIM))
    M1 = rng.normal(size=(DIM, DIM, DIM))
    M2 = rng.normal(size=(DIM, DIM, DIM, DIM)) / 2
    k = rng.normal(size=DIM)
    th = rng.uniform(0, 2 * math.pi)
    M3 = rng.normal(size=(DIM, DIM))
    w = rng.normal(size=DIM) / 2
    M4 = rng.normal(size=(DIM, DIM))

    def metric(X):
        lin = einsum("...i,abi->...ab", X, M1)
        quad = einsum("...i,...j->...ij", X, X)
        quad = einsum("...ij,abij->...ab", quad, M2)
        s = jets.sin(einsum("...i,i->...", X, k) + th)
        cub = einsum("...i,i->...", X, w) ** 3
        S = lin + quad + s[..., None, None] * M3 + cub[..., None, None] * M4 + M0
        S = 0.5 * (S + S.swapaxes(-1, -2))
        return _eye(X) + amplitude * S

    return MetricField.expr(metric, name)


def _anti_hermitian(rng, k, shape=()):
    z = rng.normal(size=shape + (k, k)) + 1j * rng.normal(size=shape + (k, k))
    return 0.5 * (z - np.conj(np.swapaxes(z, -1, -2)))


def random_connection(rng: np.random.Generator, k: int, amplitude: float = 0.5, name: str = "random") -> ConnectionField:
    """Anti-Hermitian k x k one-form with polynomial and trigonometric entries."""
    B0 = _anti_hermitian(rng, k, (DIM,))
    B1 = _anti_hermitian(rng, k, (DIM, DIM))
    B2 = _anti_hermitian(rng, k, (DIM,))
    B3 = _anti_hermitian(rng, k, (DIM,))
    kv = rng.normal(size=DIM)
    th = rng.uniform(0, 2 * math.pi)
    w = rng.normal(size=DIM) / 2

    def conn(X):
        lin = einsum("...i,airs->...ars", X, B1)
        s = jets.sin(einsum("...i,i->...", X, kv) + th)
        q = einsum("...i,i->...", X, w) ** 2
        out = lin + s[..., None, None, None] * B2 + q[..., None, None, None] * B3 + B0
        return amplitude * out

    return ConnectionField.expr(conn, k, name)


def random_conformal_factor(rng: np.random.Generator, name: str = "Omega") -> SmoothField:
    """exp of a bounded trigonometric field."""
    k1, k2 = rng.normal(size=DIM), rng.normal(size=DIM)
    t1, t2 = rng.uniform(0, 2 * math.pi, 2)
    a1, a2 = rng.uniform(0.1, 0.3, 2)
    return SmoothField.expr(lambda X: jets.exp(a1 * jets.sin(einsum("...i,i->...", X, k1) + t1)
                                               + a2 * jets.cos(einsum("...i,i->...", X, k2) + t2)),
                            (), name)


@dataclass
class CatalogEntry:
    metric: MetricField
    connection: ConnectionField
    omega: SmoothField
    points: np.ndarray
    label: str


def random_catalog(seed: int = 0, size: int = 20, points_per_entry: int = 5) -> list[CatalogEntry]:
    """Seeded random (metric, connection, Omega, points) cases; fiber dims cycle through 1, 2, 3."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(size):
        k = 1 + i % 3
        m = random_metric(rng, name=f"g{i}")
        c = random_connection(rng, k, name=f"A{i}")
        w = random_conformal_factor(rng, name=f"Omega{i}")
        pts = random_points(rng, points_per_entry)
        check_metric(m.jet(pts, 0).value)
        out.append(CatalogEntry(m, c, w, pts, f"case{i}(k={k})"))
    return out
