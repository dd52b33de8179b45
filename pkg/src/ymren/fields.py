"""Chart points, smooth fields and their exact jets, plus a finite-difference oracle."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import jets
from .errors import DomainError, OrderError
from .jets import Jet

MAX_PUBLIC_ORDER = 3

CHART_DIMS = {"ball": 6, "cartesian": 6, "ads": 6, "sphere5": 5}


@dataclass(frozen=True)
class ChartPoint:
    coords: tuple
    chart: str = "ball"

    def __post_init__(self):
        coords = tuple(float(x) for x in np.asarray(self.coords, dtype=float).ravel())
        object.__setattr__(self, "coords", coords)
        dim = CHART_DIMS.get(self.chart, 6)
        if len(coords) != dim:
            raise ValueError(f"chart {self.chart!r} has dimension {dim}, got {len(coords)} coordinates")

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords)


def as_coords(p) -> np.ndarray:
    """Coordinates of a ChartPoint, or an array of points of shape (..., 6)."""
    if isinstance(p, ChartPoint):
        return p.array
    return np.asarray(p, dtype=float)


Evaluator = Callable[[np.ndarray, int, object], Jet]


class SmoothField:
    """A smooth map on a chart that can report its jet at any point.

    ``evaluator(coords, order, dtype)`` returns a :class:`Jet` of tensor shape
    ``shape`` (after any batch axes of ``coords``).  Most fields are built with
    :meth:`expr`, which propagates coordinate jets through a formula.
    """

    def __init__(self, evaluator: Evaluator, shape=(), name: str = "", domain=None,
                 valence: str = "", extended: bool = False):
        self._evaluator = evaluator
        self.shape = tuple(shape)
        self.name = name
        self.domain = domain
        self.valence = valence
        self.extended = extended

    def __repr__(self) -> str:
        return f"SmoothField({self.name or '?'}, shape={self.shape})"

    @classmethod
    def expr(cls, fn: Callable[[Jet], Jet], shape=(), name: str = "", domain=None, valence: str = "") -> "SmoothField":
        """Field given by a formula in the coordinate jet ``X`` (use ``X[..., i]``)."""

        def evaluator(coords, order, dtype=float):
            out = fn(jets.variables(coords, order, dtype))
            if not isinstance(out, Jet):
                out = Jet.constant(np.broadcast_to(out, coords.shape[:-1] + shape), order)
            return out

        return cls(evaluator, shape, name, domain, valence, extended=True)

    @classmethod
    def constant(cls, value, name: str = "const") -> "SmoothField":
        value = np.asarray(value)

        def evaluator(coords, order, dtype=float):
            return Jet.constant(np.broadcast_to(value, coords.shape[:-1] + value.shape).astype(np.result_type(value, dtype)), order)

        return cls(evaluator, value.shape, name, extended=True)

    def check_domain(self, coords: np.ndarray) -> None:
        if self.domain is not None and not np.all(self.domain(np.asarray(coords, dtype=float))):
            raise DomainError(f"point outside the domain of field {self.name or '?'}")

    def jet(self, p, order: int, dtype=float) -> Jet:
        if order > jets.MAX_ORDER:
            raise OrderError(f"order {order} exceeds engine maximum {jets.MAX_ORDER}")
        coords = as_coords(p)
        self.check_domain(coords)
        return self._evaluator(coords.astype(dtype), order, dtype)

    def __call__(self, p) -> np.ndarray:
        return self.jet(p, 0).value

    # composition -----------------------------------------------------------
    def map(self, fn: Callable[[Jet], Jet], shape=None, name: str = "") -> "SmoothField":
        parent = self

        def evaluator(coords, order, dtype=float):
            return fn(parent._evaluator(coords, order, dtype))

        return SmoothField(evaluator, self.shape if shape is None else shape, name or self.name, self.domain,
                           self.valence, self.extended)

    def _binary(self, other, op) -> "SmoothField":
        if not isinstance(other, SmoothField):
            return self.map(lambda j: op(j, other))
        a, b = self, other

        def evaluator(coords, order, dtype=float):
            return op(a._evaluator(coords, order, dtype), b._evaluator(coords, order, dtype))

        def domain(x):
            ok = np.ones(x.shape[:-1], dtype=bool)
            for f in (a, b):
                if f.domain is not None:
                    ok &= f.domain(x)
            return ok

        shape = np.broadcast_shapes(a.shape, b.shape)
        return SmoothField(evaluator, shape, f"({a.name}.{b.name})", domain, extended=a.extended and b.extended)

    def __mul__(self, other):
        return self._binary(other, lambda x, y: x * y)

    __rmul__ = __mul__

    def __add__(self, other):
        return self._binary(other, lambda x, y: x + y)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda x, y: x - y)

    def __truediv__(self, other):
        return self._binary(other, lambda x, y: x / y)


@dataclass(frozen=True)
class Jet3:
    """Value and symmetric partial-derivative arrays (derivative axes last)."""

    value: np.ndarray
    partials1: Optional[np.ndarray] = None
    partials2: Optional[np.ndarray] = None
    partials3: Optional[np.ndarray] = None

    def partial(self, *multi_index: int):
        arr = [self.value, self.partials1, self.partials2, self.partials3][len(multi_index)]
        if arr is None:
            raise OrderError(f"partials of order {len(multi_index)} were not requested")
        return arr[(Ellipsis,) + tuple(multi_index)]


def evaluate_jet(f: SmoothField, p, order: int = 3) -> Jet3:
    """Exact value and partials of ``f`` at ``p`` up to ``order`` (at most 3)."""
    if not 0 <= order <= MAX_PUBLIC_ORDER:
        raise OrderError(f"evaluate_jet supports orders 0..{MAX_PUBLIC_ORDER}, got {order}")
    j = f.jet(p, order)
    parts = [jets.partials(j, k) if k <= order else None for k in range(1, 4)]
    return Jet3(j.value, *parts)


# finite differences --------------------------------------------------------------

_STENCILS = {
    1: {-1: -0.5, 1: 0.5},
    2: {-1: 1.0, 0: -2.0, 1: 1.0},
    3: {-2: -0.5, -1: 1.0, 1: -1.0, 2: 0.5},
}
# third differences are rounding-dominated at the base step
_STEP_SCALE = {1: 1.0, 2: 10.0, 3: 20.0}


def _stencil(exponent, h):
    axes = [(v, k) for v, k in enumerate(exponent) if k]
    offsets, weights = [], []
    for combo in itertools.product(*[list(_STENCILS[k].items()) for _, k in axes]):
        off = np.zeros(jets.NVARS)
        w = 1.0
        for (v, k), (s, c) in zip(axes, combo):
            off[v] = s * h
            w *= c / h**k
        offsets.append(off)
        weights.append(w)
    return np.array(offsets), np.array(weights)


def fd_oracle(f: SmoothField, p, multi_index, component=(), step: float = 1e-4):
    """Central finite-difference estimate of a partial of ``f`` at ``p``.

    ``multi_index`` lists differentiation variables, e.g. ``(0, 1)`` for
    d^2/dx0 dx1.  The step is ``step`` for first partials and scaled up for
    higher ones; the estimate is Richardson-refined once (h and h/2).
    Expression fields are evaluated in extended precision.  Test use only.
    """
    multi_index = tuple(multi_index)
    k = len(multi_index)
    if k > MAX_PUBLIC_ORDER:
        raise OrderError("fd_oracle supports up to third partials")
    x0 = as_coords(p).astype(float)
    if k == 0:
        return f.jet(x0, 0).value[tuple(component)]
    exponent = jets.multi_index_to_exponent(multi_index)
    dtype = np.longdouble if f.extended else float
    h = step * _STEP_SCALE[k]

    def estimate(h):
        offs, w = _stencil(exponent, h)
        pts = np.asarray(x0, dtype=dtype) + offs.astype(dtype)
        f.check_domain(pts.astype(float))
        vals = f._evaluator(pts, 0, dtype).value
        vals = vals[(slice(None),) + tuple(component)]
        return np.tensordot(w.astype(dtype), vals, axes=(0, 0))

    coarse, fine = estimate(h), estimate(h / 2)
    res = (4 * fine - coarse) / 3
    return np.asarray(res).astype(complex if np.iscomplexobj(res) else float)[()]
