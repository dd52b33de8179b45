"""Bundle connections: curvature, Yang-Mills current and the Q2 operator.

A connection is an endomorphism-valued one-form ``A_a`` (complex k x k
matrices), acting as ``nabla_a v = d_a v + A_a v``.  Then
``F_ab = d_a A_b - d_b A_a + [A_a, A_b]`` and ``j_a = g^bc nabla_b F_ca``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import NotClosedError
from .fields import ChartPoint, SmoothField
from .geometry import DIM, LocalGeometry, MetricField, _point
from .jets import Jet, einsum
from .tensor import PointTensor, alternate

CLOSED_TOL = 1e-8


class ConnectionField:
    """Endomorphism-valued one-form with components of shape (6, k, k)."""

    def __init__(self, field: SmoothField, name: str = ""):
        if len(field.shape) != 3 or field.shape[0] != DIM or field.shape[1] != field.shape[2]:
            raise ValueError(f"connection field must have shape (6, k, k), got {field.shape}")
        self.field = field
        self.fiber_dim = field.shape[1]
        self.name = name or field.name

    def __repr__(self) -> str:
        return f"ConnectionField({self.name}, k={self.fiber_dim})"

    @classmethod
    def expr(cls, fn, fiber_dim: int, name: str = "", domain=None) -> "ConnectionField":
        return cls(SmoothField.expr(fn, (DIM, fiber_dim, fiber_dim), name, domain, "drc"), name)

    @property
    def domain(self):
        return self.field.domain

    def jet(self, coords, order: int) -> Jet:
        return self.field.jet(coords, order)


def trace(x: np.ndarray, y: np.ndarray, spec: str) -> np.ndarray:
    """Tr of the fiber product of two endomorphism-valued arrays.

    ``spec`` gives the spacetime subscripts, e.g. ``"ab,ab->"``.
    """
    lhs, out = spec.split("->")
    sx, sy = lhs.split(",")
    return np.einsum(f"...{sx}ij,...{sy}ji->...{out}", x, y)


def curvature_jet(A: Jet) -> Jet:
    """F_ab from the connection jet (order drops by one)."""
    dA = A.grad()  # [b, r, s, a] = d_a A_b
    D = einsum("...brsa->...abrs", dA)
    Ao = A.truncate(D.order)
    comm = einsum("...arx,...bxs->...abrs", Ao, Ao)
    return D - D.swapaxes(-4, -3) + comm - comm.swapaxes(-4, -3)


class GaugeState:
    """Connection data coupled to a metric, from jets of the metric and connection."""

    def __init__(self, geo: LocalGeometry, A: Jet):
        self.geo = geo
        self.A = A

    @cached_property
    def F(self) -> Jet:
        return curvature_jet(self.A)

    @cached_property
    def nabla_F(self) -> Jet:
        """nabla_c F_ab stored as [c, a, b, r, s]."""
        return self.geo.nabla(self.F, "ddrc", self.A)

    @cached_property
    def j(self) -> Jet:
        dF = self.nabla_F
        return einsum("...bc,...bcars->...ars", self.geo.ginv.truncate(dF.order), dF)

    @cached_property
    def nabla_j(self) -> Jet:
        """nabla_a j_b stored as [a, b, r, s]."""
        return self.geo.nabla(self.j, "drc", self.A)

    @cached_property
    def F_up(self) -> Jet:
        o = min(self.F.order, self.geo.order)
        gi = self.geo.ginv.truncate(o)
        half = einsum("...ac,...cbrs->...abrs", gi, self.F.truncate(o))
        return einsum("...bd,...adrs->...abrs", gi, half)

    @cached_property
    def tr_FF(self) -> Jet:
        """Tr(F^ab F_ab) as a jet."""
        o = self.F_up.order
        return einsum("...abrs,...absr->...", self.F_up, self.F.truncate(o))

    @cached_property
    def F_sq(self) -> Jet:
        """|F|^2 = -Tr(F^ab F_ab)."""
        return -self.tr_FF

    # pointwise values --------------------------------------------------------
    def values(self) -> "GaugeValues":
        return GaugeValues(self)


class GaugeValues:
    """Order-0 values of a :class:`GaugeState` and the scalar contractions built from them."""

    def __init__(self, st: GaugeState):
        geo = st.geo
        self.g = geo.g.value
        self.ginv = geo.ginv.value
        self.F = st.F.value
        self.Fu = np.einsum("...ac,...bd,...cdrs->...abrs", self.ginv, self.ginv, self.F)
        self.st = st

    @cached_property
    def dF(self):
        return self.st.nabla_F.value

    @cached_property
    def j(self):
        return self.st.j.value

    @cached_property
    def dj(self):
        return self.st.nabla_j.value

    @cached_property
    def P(self):
        return self.st.geo.P.value

    @cached_property
    def J(self):
        return self.st.geo.J.value

    @cached_property
    def W(self):
        return self.st.geo.W.value

    # traces used by the invariants
    @cached_property
    def FF(self):
        """Tr F^ab F_ab."""
        return trace(self.Fu, self.F, "ab,ab->")

    @cached_property
    def jj(self):
        ju = np.einsum("...ab,...brs->...ars", self.ginv, self.j)
        return trace(ju, self.j, "a,a->")

    @cached_property
    def Fdj(self):
        """Tr F^ab nabla_a j_b."""
        return trace(self.Fu, self.dj, "ab,ab->")

    @cached_property
    def FPF(self):
        """Tr F^ab P_a^c F_bc."""
        Pm = np.einsum("...ad,...dc->...ac", self.P, self.ginv)
        PF = np.einsum("...ac,...bcrs->...abrs", Pm, self.F)
        return trace(self.Fu, PF, "ab,ab->")

    @cached_property
    def dFdF(self):
        """Tr (nabla^c F^ab) nabla_c F_ab."""
        dFu = np.einsum("...ce,...ax,...by,...exyrs->...cabrs", self.ginv, self.ginv, self.ginv, self.dF,
                        optimize=True)
        return trace(dFu, self.dF, "cab,cab->")

    @cached_property
    def FWF(self):
        """Tr F^ab W^c_ab^d F_dc = Tr F^ab W_eabf F^fe."""
        WF = np.einsum("...eabf,...fers->...abrs", self.W, self.Fu)
        return trace(self.Fu, WF, "ab,ab->")

    @cached_property
    def FFF(self):
        """Tr F^ab F^c_a F_bc."""
        Fm = np.einsum("...cd,...dars->...cars", self.ginv, self.F)  # F^c_a
        prod = np.einsum("...carx,...bcxs->...abrs", Fm, self.F)  # F^c_a F_bc
        return trace(self.Fu, prod, "ab,ab->")


def gauge_state(conn: ConnectionField, m: MetricField, coords, conn_order: int = 3,
                metric_order: Optional[int] = None) -> GaugeState:
    metric_order = conn_order if metric_order is None else metric_order
    geo = m.geometry(coords, metric_order)
    return GaugeState(geo, conn.jet(coords, conn_order))


@dataclass(frozen=True)
class GaugeJet:
    """Connection data coupled to a metric at one point."""

    at: ChartPoint
    A: np.ndarray
    F: np.ndarray
    nabla_F: np.ndarray
    j: np.ndarray
    nabla_j: np.ndarray
    F_sq: float


def gauge_jet(c: ConnectionField, m: MetricField, p) -> GaugeJet:
    p = _point(p)
    st = gauge_state(c, m, p.array, 3)
    return GaugeJet(p, st.A.value, st.F.value, st.nabla_F.value, st.j.value, st.nabla_j.value,
                    float(np.real(st.F_sq.value)))


def curvature(c: ConnectionField, p) -> PointTensor:
    x = _point(p).array
    return PointTensor(curvature_jet(c.jet(x, 1)).value, "ddrc")


def current(c: ConnectionField, m: MetricField, p) -> PointTensor:
    x = _point(p).array
    return PointTensor(gauge_state(c, m, x, 2).j.value, "drc")


def coupled_grad_current(c: ConnectionField, m: MetricField, p) -> PointTensor:
    x = _point(p).array
    return PointTensor(gauge_state(c, m, x, 3).nabla_j.value, "ddrc")


def compactified_current_rhs(st: GaugeState, s: Jet):
    """Right-hand side sigma (sigma g^bc nabla_b F_ca - (d-4) n^b F_ba) in the compactified metric."""
    j = st.j
    o = j.order
    n = s.grad().truncate(o)
    n_up = einsum("...ab,...b->...a", st.geo.ginv.truncate(o), n)
    nF = einsum("...b,...bars->...ars", n_up, st.F.truncate(o))
    sv = s.truncate(o)
    return sv[..., None, None, None] * (sv[..., None, None, None] * j - (DIM - 4) * nF)


def compactified_current_residual(c: ConnectionField, sigma: SmoothField, m_compact: MetricField, p,
                                  m_plus: Optional[MetricField] = None) -> np.ndarray:
    """j[A, g_+] minus its expression through the compactified metric g = sigma^2 g_+.

    ``m_plus`` defaults to sigma^-2 g; pass the interior metric explicitly to
    test the identity against an independently constructed g_+.
    """
    from .geometry import conformal_rescale

    x = _point(p).array
    if m_plus is None:
        m_plus = conformal_rescale(m_compact, sigma.map(lambda s: 1 / s, name="1/sigma"))
    lhs = gauge_state(c, m_plus, x, 2).j.value
    st = gauge_state(c, m_compact, x, 2)
    rhs = compactified_current_rhs(st, sigma.jet(x, 2)).value
    return lhs - rhs


def bianchi_residual(geo: LocalGeometry, X: Jet, A: Jet) -> np.ndarray:
    """nabla_[a X_bc] (unit weight) as values."""
    dX = geo.nabla(X, "ddrc", A).value
    return alternate(dX, [-5, -4, -3])


def q2_jet(geo: LocalGeometry, X: Jet, A: Jet) -> np.ndarray:
    """Values of Q2 X_ab = nabla_[a nabla^c X_b]c + 4 P_[a^c X_b]c + J X_ab."""
    dX = geo.nabla(X, "ddrc", A)  # [c, b, e, r, s] = nabla_c X_be
    div = einsum("...ce,...cbers->...brs", geo.ginv.truncate(dX.order), dX)  # nabla^c X_bc
    ddiv = geo.nabla(div, "drc", A).value  # nabla_a (nabla^c X_bc)
    Pm = np.einsum("...ad,...dc->...ac", geo.P.value, geo.ginv.value)
    PX = np.einsum("...ac,...bcrs->...abrs", Pm, X.value)
    t = ddiv + 4 * PX
    return 0.5 * (t - np.swapaxes(t, -4, -3)) + geo.J.value[..., None, None, None, None] * X.value


def q2_apply(X: SmoothField, m: MetricField, p, connection: Optional[ConnectionField] = None,
             tol: float = CLOSED_TOL) -> PointTensor:
    """Apply Q2 to a closed endomorphism-valued two-form field at ``p``.

    ``connection`` supplies the coupling on the fiber indices (omit for a
    scalar-valued or trivially coupled form).
    """
    x = _point(p).array
    geo = m.geometry(x, 3)
    Xj = X.jet(x, 2)
    k = Xj.shape[-1]
    if connection is not None:
        A = connection.jet(x, 2)
    else:
        A = Jet.zeros(Xj.shape[:-4] + (DIM, k, k), 2, Xj.dtype)
    res = bianchi_residual(geo, Xj, A)
    if np.max(np.abs(res), initial=0.0) > tol:
        raise NotClosedError(f"two-form is not closed: Bianchi residual {np.max(np.abs(res)):.3e}")
    return PointTensor(q2_jet(geo, Xj, A), "ddrc")
