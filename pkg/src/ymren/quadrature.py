"""Product quadrature on balls and on S^5, and finite-part extraction of divergent energies.

Points on S^5 use hyperspherical angles: polar angles theta_1..theta_4 with
weights sin^4, sin^3, sin^2, sin^1 and an azimuth on [0, 2 pi).  Each polar
factor is integrated exactly in cos(theta) by Gauss-Jacobi nodes with the
matching (1 - t^2)^((k-1)/2) weight; the azimuth uses the trapezoid rule.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .errors import FitError, ToleranceError
from .fields import SmoothField
from .gauge import ConnectionField, gauge_state
from .geometry import DIM, MetricField
from .models import cutoff_radius

REFINE_TOL = 1e-6
CHUNK = 4096
WORKERS = min(8, os.cpu_count() or 1)

# finite-part fit grid: small enough that the truncated Laurent model is accurate
DEFAULT_EPS_GRID = tuple(np.round(np.arange(1, 11) * 1e-3, 6))
DEFAULT_N_POLY = 5
TABLE_EPS_GRID = tuple(np.round(np.arange(1, 11) * 0.02, 6))


@dataclass(frozen=True)
class QuadratureSpec:
    """Radial geometric panels toward the outer radius and a product rule on S^5."""

    radial_panels: int = 12
    panel_ratio: float = 0.5
    radial_order: int = 32
    sphere_orders: tuple = (3, 3, 3, 3, 6)
    mc_samples: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.radial_panels < 1:
            raise ValueError("radial_panels must be positive")
        if not 0 < self.panel_ratio < 1:
            raise ValueError("panel_ratio must lie in (0, 1)")
        if self.radial_order < 2 or len(self.sphere_orders) != DIM - 1 or min(self.sphere_orders) < 2:
            raise ValueError("quadrature orders must all be at least 2 and sphere_orders needs 5 entries")
        object.__setattr__(self, "sphere_orders", tuple(int(n) for n in self.sphere_orders))

    def refined(self) -> "QuadratureSpec":
        """Twice the radial panels and sphere orders."""
        return replace(self, radial_panels=2 * self.radial_panels,
                       sphere_orders=tuple(2 * n for n in self.sphere_orders))


# rules ------------------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _polar_rule(n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes t = cos(theta) and weights for int_0^pi g(theta) sin^k(theta) d theta."""
    a = (k - 1) / 2
    if a == 0:
        return roots_legendre(n)
    return roots_jacobi(n, a, a)


@lru_cache(maxsize=None)
def _sphere_rule_cached(orders: tuple) -> tuple[np.ndarray, np.ndarray]:
    *polar, naz = orders
    comps = []
    for k, n in zip((4, 3, 2, 1), polar):
        comps.append(_polar_rule(n, k))
    phi = 2 * np.pi * np.arange(naz) / naz
    grids = np.meshgrid(*[c[0] for c in comps], phi, indexing="ij")
    wgrids = np.meshgrid(*[c[1] for c in comps], np.full(naz, 2 * np.pi / naz), indexing="ij")
    t = [g.ravel() for g in grids[:4]]
    ph = grids[4].ravel()
    s = [np.sqrt(1 - ti**2) for ti in t]
    x = np.empty((t[0].size, DIM))
    x[:, 0] = t[0]
    x[:, 1] = s[0] * t[1]
    x[:, 2] = s[0] * s[1] * t[2]
    x[:, 3] = s[0] * s[1] * s[2] * t[3]
    x[:, 4] = s[0] * s[1] * s[2] * s[3] * np.cos(ph)
    x[:, 5] = s[0] * s[1] * s[2] * s[3] * np.sin(ph)
    w = np.prod([g.ravel() for g in wgrids], axis=0)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def sphere_rule(orders: Sequence[int] = QuadratureSpec.sphere_orders) -> tuple[np.ndarray, np.ndarray]:
    """Unit vectors on S^5 and weights summing to Vol(S^5) = pi^3."""
    return _sphere_rule_cached(tuple(int(n) for n in orders))


def radial_rule(r_max: float, spec: QuadratureSpec, r_min: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre on geometric panels accumulating toward ``r_max``."""
    q = spec.panel_ratio
    L = r_max - r_min
    # panel edges r_max - L q^k, k = 0..n-1, then r_max
    edges = np.concatenate([r_max - L * q ** np.arange(spec.radial_panels), [r_max]])
    t, w = roots_legendre(spec.radial_order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (b - a) * t + 0.5 * (a + b)
    weights = 0.5 * (b - a) * w
    return nodes.ravel(), weights.ravel()


def _chunked(fn: Callable[[np.ndarray], np.ndarray], pts: np.ndarray) -> np.ndarray:
    """Evaluate ``fn`` over chunks in a thread pool; results keep their input order."""
    chunks = [pts[i:i + CHUNK] for i in range(0, len(pts), CHUNK)]
    if len(chunks) == 1:
        return np.asarray(fn(chunks[0]))
    with ThreadPoolExecutor(max_workers=WORKERS) as pool:
        return np.concatenate([np.asarray(v) for v in pool.map(fn, chunks)])


# sphere integrals ---------------------------------------------------------------------------

def sphere_integral(fn: Callable[[np.ndarray], np.ndarray], spec: QuadratureSpec = QuadratureSpec(),
                    mc_tol: float = 5.0) -> float:
    """int_{S^5} fn dVol for ``fn`` mapping unit vectors (N, 6) to values (N,).

    With ``spec.mc_samples`` set, a seeded Monte Carlo estimate is also formed and a
    ToleranceError raised when the two differ by more than ``mc_tol`` standard errors.
    """
    x, w = sphere_rule(spec.sphere_orders)
    val = float(np.real(np.sum(w * _chunked(fn, x))))
    if spec.mc_samples:
        rng = np.random.default_rng(spec.seed)
        y = rng.normal(size=(spec.mc_samples, DIM))
        y /= np.linalg.norm(y, axis=1, keepdims=True)
        f = np.real(_chunked(fn, y)) * math.pi**3
        se = f.std(ddof=1) / math.sqrt(len(f))
        if abs(f.mean() - val) > mc_tol * se + 1e-12 * max(1.0, abs(val)):
            raise ToleranceError(f"Monte Carlo sphere estimate {f.mean():.6g} disagrees with product rule {val:.6g}")
    return val


def ball_integral(fn: Callable[[np.ndarray], np.ndarray], r_max: float, spec: QuadratureSpec) -> float:
    """int_{|x| < r_max} fn dx in polar form r^5 dr dVol(S^5)."""
    r, wr = radial_rule(r_max, spec)
    x, ws = sphere_rule(spec.sphere_orders)
    pts = (r[:, None, None] * x[None]).reshape(-1, DIM)
    wts = ((wr * r**5)[:, None] * ws[None]).ravel()
    return float(np.real(np.sum(wts * _chunked(fn, pts))))


# energies ------------------------------------------------------------------------------------

def energy_density(c: ConnectionField, m: MetricField) -> Callable[[np.ndarray], np.ndarray]:
    """x -> |F|^2_g sqrt(det g), the coordinate density of the energy."""

    def fn(x):
        st = gauge_state(c, m, x, 1, 0)
        return np.real(st.F_sq.value) * st.geo.vol_density()

    return fn


def _check_eps(eps: float) -> None:
    if not 0 < eps <= 0.3:
        raise ValueError(f"cut-off parameter must lie in (0, 0.3], got {eps}")


def _panels_for(eps: float, spec: QuadratureSpec) -> QuadratureSpec:
    # the integrand varies on the scale 1 - r_max near the cut-off; make the last panel finer than that
    r_max = cutoff_radius(eps)
    need = math.ceil(math.log((1 - r_max) / (8 * r_max)) / math.log(spec.panel_ratio))
    return replace(spec, radial_panels=max(spec.radial_panels, need))


def regulated_energy(c: ConnectionField, eps: float, spec: QuadratureSpec = QuadratureSpec(),
                     model: Optional[MetricField] = None, check: bool = True) -> float:
    """1/4 int_{B_eps} |F|^2_{g+} dVol(g+) over the ball of radius (1 - eps)/(1 + eps).

    ``model`` is the interior metric on the ball chart (default: hyperbolic).
    The value is compared with a run at radial_order + 8 and a ToleranceError
    raised if they differ by more than 1e-6 relative.
    """
    from .models import hyperbolic_ball

    _check_eps(eps)
    m = model if model is not None else hyperbolic_ball()[0]
    spec = _panels_for(eps, spec)
    fn = energy_density(c, m)
    val = 0.25 * ball_integral(fn, cutoff_radius(eps), spec)
    if check:
        ref = 0.25 * ball_integral(fn, cutoff_radius(eps), replace(spec, radial_order=spec.radial_order + 8))
        if abs(ref - val) > REFINE_TOL * abs(ref):
            raise ToleranceError(f"regulated energy not converged: {val!r} vs refined {ref!r}")
    return val


def bulk_invariant_integral(integrand: Callable[[np.ndarray], np.ndarray], m: MetricField,
                            spec: QuadratureSpec = QuadratureSpec(radial_panels=1, radial_order=8),
                            r_max: float = 1.0) -> float:
    """1/4 int dVol(g) integrand over the closed ball |x| <= r_max."""

    def fn(x):
        return np.real(integrand(x)) * m.geometry(x, 0).vol_density()

    return 0.25 * ball_integral(fn, r_max, spec)


# finite part ------------------------------------------------------------------------------------

@dataclass(frozen=True)
class RenormFit:
    """Fit of E_eps = a/eps + b + c_1 eps + ... (+ L log eps when ``log_coef`` is set)."""

    eps_grid: tuple
    values: tuple
    a: float
    b: float
    poly: tuple
    rms_residual: float
    log_coef: Optional[float] = None

    @property
    def coefficients(self) -> tuple:
        return (self.a, self.b) + self.poly

    def predict(self, eps) -> np.ndarray:
        e = np.asarray(eps, dtype=float)
        out = self.a / e + self.b + sum(ck * e ** (k + 1) for k, ck in enumerate(self.poly))
        if self.log_coef is not None:
            out = out + self.log_coef * np.log(e)
        return out


def extract_finite_part(eps, values, n_poly: int = DEFAULT_N_POLY, with_log: bool = False) -> RenormFit:
    """Least-squares fit of eps E_eps = a + b eps + c_1 eps^2 + ... and return b as the finite part.

    ``n_poly`` counts b and the higher powers (3 gives a/eps + b + c eps + d eps^2).
    """
    e = np.asarray(eps, dtype=float)
    y = np.asarray(values, dtype=float)
    if e.ndim != 1 or e.shape != y.shape:
        raise FitError("eps and values must be one-dimensional and of equal length")
    if len(e) < 4:
        raise FitError("need at least four cut-off samples")
    if np.any(e <= 0):
        raise FitError("cut-off parameters must be positive")
    cols = [np.ones_like(e)] + [e ** (k + 1) for k in range(n_poly)]
    if with_log:
        cols.append(e * np.log(e))
    B = np.stack(cols, 1)
    scale = np.max(np.abs(B), axis=0)
    Bs = B / scale
    if len(e) < B.shape[1] or np.linalg.matrix_rank(Bs) < B.shape[1]:
        raise FitError("finite-part fit is rank deficient")
    coef, *_ = np.linalg.lstsq(Bs, e * y, rcond=None)
    coef = coef / scale
    resid = (Bs @ (coef * scale) - e * y) / e
    a, b = float(coef[0]), float(coef[1])
    poly = tuple(float(v) for v in coef[2:1 + n_poly])
    log_coef = float(coef[-1]) if with_log else None
    return RenormFit(tuple(map(float, e)), tuple(map(float, y)), a, b, poly,
                     float(np.sqrt(np.mean(resid**2))), log_coef)


def log_refit(fit: RenormFit, n_poly: Optional[int] = None) -> RenormFit:
    """Refit the same samples with an additional log(eps) term."""
    n = len(fit.poly) + 1 if n_poly is None else n_poly
    return extract_finite_part(fit.eps_grid, fit.values, n, with_log=True)


# the Maxwell ball ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyRoutes:
    regulated: RenormFit
    closed_form_bulk: float
    generic_bulk: float
    conformal_bulk: float
    exact: float
    samples: tuple = field(default=())

    def relative_errors(self) -> dict:
        ex = self.exact
        return {
            "regulated_fit": abs(self.regulated.b - ex) / abs(ex),
            "closed_form_bulk": abs(self.closed_form_bulk - ex) / abs(ex),
            "generic_bulk": abs(self.generic_bulk - ex) / abs(ex),
            "conformal_bulk": abs(self.conformal_bulk - ex) / abs(ex),
        }


def bulk_spec() -> QuadratureSpec:
    # the Maxwell integrands are polynomials of degree <= 6 in x, so a short rule is exact
    return QuadratureSpec(radial_panels=1, radial_order=8)


def maxwell_energy_routes(cfg=None, eps_grid: Sequence[float] = DEFAULT_EPS_GRID,
                          spec: QuadratureSpec = QuadratureSpec(), n_poly: int = DEFAULT_N_POLY,
                          omega: Optional[SmoothField] = None) -> EnergyRoutes:
    """Renormalized energy of the Maxwell ball by regulated fit and by bulk integrals."""
    from . import invariants, models
    from .geometry import conformal_rescale

    cfg = cfg or models.MaxwellConfig()
    c = models.maxwell_solution(cfg)
    delta = models.euclidean()
    samples = tuple(regulated_energy(c, e, spec) for e in eps_grid)
    fit = extract_finite_part(eps_grid, samples, n_poly)
    bs = bulk_spec()
    closed = bulk_invariant_integral(lambda x: models.maxwell_eren_closed_form(cfg, x), delta, bs)
    generic = bulk_invariant_integral(lambda x: invariants.eren_integrand(c, delta, x), delta, bs)
    if omega is None:
        omega = models.random_conformal_factor(np.random.default_rng(spec.seed))
    m_om = conformal_rescale(delta, omega)
    # E[Omega^2 delta] dVol equals E[delta] dx pointwise, so the density stays polynomial and the
    # short rule is exact; any failure of covariance would show up as a route mismatch
    conformal = bulk_invariant_integral(lambda x: invariants.eren_integrand(c, m_om, x), m_om, bs)
    return EnergyRoutes(fit, closed, generic, conformal, models.maxwell_renormalized_energy(cfg), samples)
