"""Riemannian data of a metric from its jet, in the curvature conventions used throughout.

Conventions (d = 6):

* ``[nabla_a, nabla_b] v^c = R_ab^c_d v^d`` and ``Ric_ab = -R_ac^c_b``;
* ``Ric = (d-2) P + g J``;
* ``R_abcd = W_abcd + g_ac P_bd - g_bc P_ad + g_bd P_ac - g_ad P_bc``;
* ``C_abc = nabla_a P_bc - nabla_b P_ac``.

:class:`LocalGeometry` works on (batched) jets and is the workhorse for every
higher layer.  The public point functions wrap it and return plain arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from . import jets
from .errors import DomainError, OrderError, SingularMetricError, SlotError
from .fields import ChartPoint, SmoothField, as_coords
from .jets import Jet, einsum
from .tensor import PointTensor

DIM = 6

# einsum letters available to tensor slots (a, e, x, y, z are reserved)
_SLOT_LETTERS = "bcdfghijklmnopqstuvw"


class MetricField:
    """A symmetric positive-definite (0,2) field on a chart."""

    def __init__(self, field: SmoothField, name: str = ""):
        if field.shape != (DIM, DIM):
            raise ValueError(f"metric field must have shape (6, 6), got {field.shape}")
        self.field = field
        self.name = name or field.name

    def __repr__(self) -> str:
        return f"MetricField({self.name})"

    @classmethod
    def expr(cls, fn, name: str = "", domain=None) -> "MetricField":
        return cls(SmoothField.expr(fn, (DIM, DIM), name, domain, "dd"), name)

    @property
    def domain(self):
        return self.field.domain

    def jet(self, coords, order: int) -> Jet:
        g = self.field.jet(coords, order)
        check_metric(g.value)
        return g

    def geometry(self, coords, order: int) -> "LocalGeometry":
        return LocalGeometry(self.jet(coords, order))

    def __call__(self, p) -> np.ndarray:
        return self.jet(as_coords(p), 0).value


def check_metric(g: np.ndarray) -> None:
    g = np.asarray(g)
    if not np.allclose(g, np.swapaxes(g, -1, -2), rtol=1e-12, atol=1e-12):
        raise SingularMetricError("metric is not symmetric")
    try:
        np.linalg.cholesky(g.real)
    except np.linalg.LinAlgError as exc:
        raise SingularMetricError("metric is not positive definite") from exc


class LocalGeometry:
    """Levi-Civita data computed from a metric jet of order ``n``.

    Attribute orders: Gamma ``n-1``, Riemann/Ricci/P/J/W ``n-2``, Cotton ``n-3``.
    Tensor axes follow the index order in the attribute name, e.g.
    ``Gamma[c, a, b] = Gamma^c_ab`` and ``R[a, b, c, d] = R_ab^c_d``.
    """

    dim = DIM

    def __init__(self, g: Jet):
        self.g = g
        self.order = g.order

    def _need(self, k: int, what: str) -> None:
        if self.order < k:
            raise OrderError(f"{what} needs a metric jet of order >= {k}, have {self.order}")

    @cached_property
    def ginv(self) -> Jet:
        return jets.inv(self.g)

    @cached_property
    def Gamma(self) -> Jet:
        self._need(1, "Christoffel symbols")
        dg = self.g.grad()  # [a, b, e] = d_e g_ab
        t = dg.swapaxes(-1, -2) + dg - dg.moveaxis(-1, -3)
        return 0.5 * einsum("...cd,...dab->...cab", self.ginv.truncate(self.order - 1), t)

    @cached_property
    def dGamma(self) -> Jet:
        self._need(2, "derivative of Christoffel symbols")
        return self.Gamma.grad()  # [c, a, b, e] = d_e Gamma^c_ab

    @cached_property
    def R(self) -> Jet:
        """R_ab^c_d."""
        G = self.Gamma.truncate(self.order - 2)
        lin = einsum("...cbda->...abcd", self.dGamma)
        quad = einsum("...cae,...ebd->...abcd", G, G)
        full = lin + quad
        return full - full.swapaxes(-4, -3)

    @cached_property
    def Rdown(self) -> Jet:
        """R_abcd = g_ce R_ab^e_d."""
        return einsum("...ce,...abed->...abcd", self.g.truncate(self.order - 2), self.R)

    @cached_property
    def Ric(self) -> Jet:
        return einsum("...cbcd->...bd", self.R)

    @cached_property
    def scalar(self) -> Jet:
        return einsum("...ab,...ab->...", self.ginv.truncate(self.order - 2), self.Ric)

    @cached_property
    def J(self) -> Jet:
        return self.scalar / (2 * (self.dim - 1))

    @cached_property
    def P(self) -> Jet:
        g = self.g.truncate(self.order - 2)
        return (self.Ric - g * self.J[..., None, None]) / (self.dim - 2)

    @cached_property
    def P_mixed(self) -> Jet:
        """P_a^c with the derivative-free index first: [a, c]."""
        return einsum("...ad,...dc->...ac", self.P, self.ginv.truncate(self.order - 2))

    @cached_property
    def W(self) -> Jet:
        """Weyl tensor with all indices down."""
        g = self.g.truncate(self.order - 2)
        P = self.P
        k = einsum("...ac,...bd->...abcd", g, P)  # g_ac P_bd
        l = einsum("...ac,...bd->...abcd", P, g)  # P_ac g_bd
        kul = k - k.swapaxes(-4, -3) + l - l.swapaxes(-4, -3)
        return self.Rdown - kul

    @cached_property
    def C(self) -> Jet:
        self._need(3, "Cotton tensor")
        dP = self.nabla(self.P, "dd")
        return dP - dP.swapaxes(-3, -2)

    def raise_first(self, T: Jet, rank: int) -> Jet:
        """Raise the first of ``rank`` tensor slots."""
        spec = _SLOT_LETTERS[:rank]
        o = min(T.order, self.order)
        return einsum(f"...x{spec[0]},...{spec}->...x{spec[1:]}", self.ginv.truncate(o), T.truncate(o))

    def nabla(self, T: Jet, valence: str, A: Optional[Jet] = None) -> Jet:
        """Covariant derivative with the derivative index placed first.

        ``valence`` describes the tensor axes of ``T``: ``u``/``d`` spacetime
        slots, ``r``/``c`` fiber row/column and ``v`` a fiber vector.  Fiber
        slots are coupled to the connection ``A`` (shape [a, r, s]).
        """
        rank = len(valence)
        if T.order < 1:
            raise OrderError("tensor jet has no derivatives left")
        d = T.grad().moveaxis(-1, -(rank + 1))
        o = min(d.order, self.order - 1)
        d = d.truncate(o)
        G = self.Gamma.truncate(o)
        Tt = T.truncate(o)
        letters = _SLOT_LETTERS[:rank]
        for i, ch in enumerate(valence):
            if ch in "ud":
                src = letters[:i] + "e" + letters[i + 1:]
                if ch == "u":
                    d = d + einsum(f"...{letters[i]}ae,...{src}->...a{letters}", G, Tt)
                else:
                    d = d - einsum(f"...ea{letters[i]},...{src}->...a{letters}", G, Tt)
            elif ch in "rcv":
                if A is None:
                    continue
                Ao = A.truncate(o) if isinstance(A, Jet) else A
                src = letters[:i] + "e" + letters[i + 1:]
                if ch in "rv":
                    d = d + einsum(f"...a{letters[i]}e,...{src}->...a{letters}", Ao, Tt)
                else:
                    d = d - einsum(f"...{src},...ae{letters[i]}->...a{letters}", Tt, Ao)
            else:
                raise SlotError(f"unknown slot kind {ch!r}")
        return d

    def laplacian(self, f: Jet) -> Jet:
        """Scalar Laplacian g^ab (d_a d_b f - Gamma^c_ab d_c f)."""
        if f.order < 2:
            raise OrderError("Laplacian needs a jet of order >= 2")
        df = f.grad()
        ddf = df.grad()
        o = min(ddf.order, self.order - 1)
        hess = ddf.truncate(o) - einsum("...cab,...c->...ab", self.Gamma.truncate(o), df.truncate(o))
        return einsum("...ab,...ab->...", self.ginv.truncate(o), hess)

    def divergence(self, v: Jet) -> Jet:
        """nabla_a v^a for a vector jet."""
        dv = v.grad()
        o = min(dv.order, self.order - 1)
        return einsum("...aa->...", dv.truncate(o)) + einsum("...aac,...c->...", self.Gamma.truncate(o), v.truncate(o))

    def vol_density(self) -> np.ndarray:
        return np.sqrt(np.linalg.det(self.g.value.real))


@dataclass(frozen=True)
class GeometryJet:
    """Riemannian data of a metric at one point (plain arrays)."""

    at: ChartPoint
    g: np.ndarray
    g_inv: np.ndarray
    Gamma: np.ndarray
    dGamma: np.ndarray
    Riemann: np.ndarray
    Ricci: np.ndarray
    P: np.ndarray
    J: float
    W: np.ndarray
    C: np.ndarray
    vol_density: float


def _point(p) -> ChartPoint:
    return p if isinstance(p, ChartPoint) else ChartPoint(tuple(np.asarray(p, dtype=float)))


def geometry_jet(m: MetricField, p) -> GeometryJet:
    """All curvature data of ``m`` at ``p`` (uses the metric jet to order 3)."""
    p = _point(p)
    geo = m.geometry(p.array, 3)
    return GeometryJet(
        at=p,
        g=geo.g.value,
        g_inv=geo.ginv.value,
        Gamma=geo.Gamma.value,
        dGamma=geo.dGamma.value,
        Riemann=geo.R.value,
        Ricci=geo.Ric.value,
        P=geo.P.value,
        J=float(geo.J.value),
        W=geo.W.value,
        C=geo.C.value,
        vol_density=float(geo.vol_density()),
    )


def covariant_derivative(m: MetricField, t: SmoothField, p, valence: Optional[str] = None,
                         connection=None, order: int = 1) -> PointTensor:
    """Levi-Civita (optionally gauge-coupled) derivative of a tensor field at ``p``.

    ``order`` is the number of derivatives taken; the total derivative order
    on the field may not exceed 3.
    """
    valence = valence if valence is not None else t.valence
    if len(valence) != len(t.shape):
        raise SlotError(f"valence {valence!r} does not match field shape {t.shape}")
    if order < 1 or order > 3:
        raise OrderError("covariant_derivative takes between 1 and 3 derivatives")
    x = _point(p).array
    T = t.jet(x, order)
    geo = m.geometry(x, order)
    A = connection.jet(x, order) if connection is not None else None
    val = valence
    for _ in range(order):
        T = geo.nabla(T, val, A)
        val = "d" + val
    return PointTensor(T.value, val.replace("v", "r"))


def conformal_rescale(m: MetricField, omega: SmoothField) -> MetricField:
    """The metric Omega^2 g with exactly composed jets."""

    def evaluator(coords, order, dtype=float):
        w = omega._evaluator(coords, order, dtype)
        if np.any(np.asarray(w.value).real <= 0):
            raise DomainError("conformal factor must be positive")
        return m.field._evaluator(coords, order, dtype) * (w * w)[..., None, None]

    def domain(x):
        ok = np.ones(x.shape[:-1], dtype=bool)
        for f in (m.field, omega):
            if f.domain is not None:
                ok &= f.domain(x)
        return ok

    fld = SmoothField(evaluator, (DIM, DIM), f"{omega.name}^2*{m.name}", domain, "dd",
                      m.field.extended and omega.extended)
    return MetricField(fld, fld.name)


def scalar_laplacian(m: MetricField, f: SmoothField, p) -> float:
    x = _point(p).array
    geo = m.geometry(x, 1)
    return float(np.real_if_close(geo.laplacian(f.jet(x, 2)).value))


@dataclass(frozen=True)
class DefiningData:
    n: np.ndarray
    n_sq: float
    rho: float
    H: float
    div_n: float


def defining_jets(geo: LocalGeometry, s: Jet):
    """n = d sigma, |n|^2, div n and rho = -(div n + sigma J)/d as jets."""
    n = s.grad()
    o = min(n.order, geo.order)
    n_up = einsum("...ab,...b->...a", geo.ginv.truncate(o), n.truncate(o))
    n_sq = einsum("...a,...a->...", n_up, n.truncate(o))
    div_n = geo.divergence(n_up)
    o2 = div_n.order
    rho = -(div_n + s.truncate(o2) * geo.J.truncate(o2)) / DIM
    return n, n_sq, div_n, rho


def pe_defining_data(m_compact: MetricField, sigma: SmoothField, p) -> DefiningData:
    """Normal data of a defining function in a compactified metric.

    Returns n = d sigma, |n|^2_g, rho = -(div n + sigma J)/d and H = -rho
    (the boundary value of -rho is the mean curvature for n = d sigma).
    """
    x = _point(p).array
    geo = m_compact.geometry(x, 2)
    s = sigma.jet(x, 2)
    n, n_sq, div_n, rho = defining_jets(geo, s)
    r = float(np.real(rho.value))
    return DefiningData(n=n.value, n_sq=float(np.real(n_sq.value)), rho=r, H=-r, div_n=float(np.real(div_n.value)))
