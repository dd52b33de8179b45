"""Truncated multivariate Taylor arithmetic in six variables.

A :class:`Jet` stores the Taylor coefficients of a (tensor-valued) smooth
function about a point, truncated at a fixed total degree.  The coefficient
axis is always the last array axis; tensor axes come before it and any batch
axes lead.  Library code therefore writes einsum subscripts with a leading
``...`` and addresses tensor axes by negative index.

Coefficients are ordered by total degree, so the jet of order ``m`` is a
prefix of the jet of order ``n > m`` and truncation is a slice.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, OrderError

NVARS = 6
MAX_ORDER = 6

_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


@lru_cache(maxsize=None)
def monomials(order: int) -> np.ndarray:
    """Exponent vectors of all monomials of degree <= order, graded order."""
    rows = []
    for deg in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(NVARS), deg):
            e = [0] * NVARS
            for v in combo:
                e[v] += 1
            rows.append(e)
    out = np.array(rows, dtype=np.int64)
    out.setflags(write=False)
    return out


def ncoef(order: int) -> int:
    return math.comb(order + NVARS, NVARS)


def _codes(exps: np.ndarray, order: int) -> np.ndarray:
    base = (order + 1) ** np.arange(NVARS, dtype=np.int64)
    return exps @ base


@lru_cache(maxsize=None)
def _lookup(order: int) -> dict[int, int]:
    return {int(k): i for i, k in enumerate(_codes(monomials(order), order))}


@lru_cache(maxsize=None)
def _product_table(order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    exps = monomials(order)
    deg = exps.sum(axis=1)
    ii, jj = np.nonzero(deg[:, None] + deg[None, :] <= order)
    look = _lookup(order)
    kk = np.array([look[int(c)] for c in _codes(exps[ii] + exps[jj], order)], dtype=np.int64)
    perm = np.argsort(kk, kind="stable")
    ii, jj, kk = ii[perm], jj[perm], kk[perm]
    starts = np.searchsorted(kk, np.arange(len(exps)))
    return ii, jj, starts


@lru_cache(maxsize=None)
def _deriv_table(order: int, var: int) -> tuple[np.ndarray, np.ndarray]:
    low = monomials(order - 1)
    shifted = low.copy()
    shifted[:, var] += 1
    look = _lookup(order)
    src = np.array([look[int(c)] for c in _codes(shifted, order)], dtype=np.int64)
    return src, (low[:, var] + 1).astype(float)


def _result_dtype(*items) -> np.dtype:
    return np.result_type(*[i.c.dtype if isinstance(i, Jet) else np.asarray(i).dtype for i in items])


class Jet:
    """Taylor coefficients of a tensor-valued field about a point (or batch)."""

    __slots__ = ("c", "order")
    __array_ufunc__ = None

    def __init__(self, c, order: int):
        c = np.asarray(c)
        if c.shape[-1] != ncoef(order):
            raise ValueError(f"coefficient axis has length {c.shape[-1]}, order {order} needs {ncoef(order)}")
        self.c = c
        self.order = order

    # construction -------------------------------------------------------
    @classmethod
    def constant(cls, value, order: int, dtype=None) -> "Jet":
        value = np.asarray(value, dtype=dtype)
        c = np.zeros(value.shape + (ncoef(order),), dtype=value.dtype)
        c[..., 0] = value
        return cls(c, order)

    @classmethod
    def zeros(cls, shape, order: int, dtype=float) -> "Jet":
        return cls(np.zeros(tuple(shape) + (ncoef(order),), dtype=dtype), order)

    # basic properties ---------------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return self.c.shape[:-1]

    @property
    def dtype(self):
        return self.c.dtype

    @property
    def value(self) -> np.ndarray:
        return self.c[..., 0]

    def __repr__(self) -> str:
        return f"Jet(shape={self.shape}, order={self.order}, dtype={self.dtype})"

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise OrderError(f"cannot raise jet order {self.order} to {order}")
        if order == self.order:
            return self
        return Jet(self.c[..., : ncoef(order)], order)

    def astype(self, dtype) -> "Jet":
        return Jet(self.c.astype(dtype), self.order)

    # indexing and axis manipulation ---------------------------------------
    def __getitem__(self, idx) -> "Jet":
        if not isinstance(idx, tuple):
            idx = (idx,)
        if Ellipsis not in idx:
            idx = idx + (Ellipsis,)
        return Jet(self.c[idx + (slice(None),)], self.order)

    @staticmethod
    def _ax(axis: int) -> int:
        return axis - 1 if axis < 0 else axis

    def moveaxis(self, src, dst) -> "Jet":
        if isinstance(src, int):
            src, dst = [src], [dst]
        return Jet(np.moveaxis(self.c, [self._ax(a) for a in src], [self._ax(a) for a in dst]), self.order)

    def swapaxes(self, a: int, b: int) -> "Jet":
        return Jet(np.swapaxes(self.c, self._ax(a), self._ax(b)), self.order)

    def sum(self, axis) -> "Jet":
        if isinstance(axis, int):
            axis = (axis,)
        return Jet(self.c.sum(axis=tuple(self._ax(a) for a in axis)), self.order)

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return Jet(self.c.reshape(tuple(shape) + (self.c.shape[-1],)), self.order)

    def conj(self) -> "Jet":
        return Jet(np.conj(self.c), self.order)

    @property
    def real(self) -> "Jet":
        return Jet(self.c.real, self.order)

    @property
    def imag(self) -> "Jet":
        return Jet(self.c.imag, self.order)

    # differentiation ----------------------------------------------------
    def partial(self, var: int) -> "Jet":
        if self.order == 0:
            raise OrderError("jet of order 0 has no derivatives left")
        src, fac = _deriv_table(self.order, var)
        return Jet(self.c[..., src] * fac.astype(self.c.real.dtype), self.order - 1)

    def grad(self) -> "Jet":
        """All first partials; the new derivative axis is the last tensor axis."""
        if self.order == 0:
            raise OrderError("jet of order 0 has no derivatives left")
        parts = [self.partial(v).c for v in range(NVARS)]
        return Jet(np.stack(parts, axis=-2), self.order - 1)

    # arithmetic ---------------------------------------------------------
    def _with_constant(self, other, sign=1) -> "Jet":
        arr = np.asarray(other)
        dtype = np.result_type(self.c.dtype, arr.dtype)
        shape = np.broadcast_shapes(self.shape, arr.shape)
        c = np.array(np.broadcast_to(self.c, shape + (self.c.shape[-1],)), dtype=dtype)
        c[..., 0] += sign * arr
        return Jet(c, self.order)

    def __add__(self, other):
        if isinstance(other, Jet):
            o = min(self.order, other.order)
            return Jet(self.truncate(o).c + other.truncate(o).c, o)
        return self._with_constant(other)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.order)

    def __sub__(self, other):
        if isinstance(other, Jet):
            o = min(self.order, other.order)
            return Jet(self.truncate(o).c - other.truncate(o).c, o)
        return self._with_constant(other, -1)

    def __rsub__(self, other):
        return (-self)._with_constant(other)

    def __mul__(self, other):
        if isinstance(other, Jet):
            return _mul(self, other)
        arr = np.asarray(other)
        return Jet(self.c * arr[..., None], self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return _mul(self, reciprocal(other))
        arr = np.asarray(other)
        return Jet(self.c / arr[..., None], self.order)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)):
            if p == 0:
                return Jet.constant(np.ones(self.shape, dtype=self.dtype), self.order)
            if p < 0:
                return reciprocal(self) ** (-p)
            out, base = None, self
            while p:
                if p & 1:
                    out = base if out is None else _mul(out, base)
                p >>= 1
                if p:
                    base = _mul(base, base)
            return out
        return power(self, p)


def _mul(a: Jet, b: Jet) -> Jet:
    o = min(a.order, b.order)
    n = ncoef(o)
    ac, bc = a.c[..., :n], b.c[..., :n]
    if o == 0:
        return Jet(ac * bc, 0)
    ii, jj, starts = _product_table(o)
    return Jet(np.add.reduceat(ac[..., ii] * bc[..., jj], starts, axis=-1), o)


def as_jet(x, order: int) -> Jet:
    return x if isinstance(x, Jet) else Jet.constant(x, order)


def variables(coords, order: int, dtype=float) -> Jet:
    """Coordinate functions x^i expanded about ``coords`` (shape (..., 6))."""
    coords = np.asarray(coords, dtype=dtype)
    if coords.shape[-1] != NVARS:
        raise ValueError(f"expected {NVARS} coordinates, got shape {coords.shape}")
    c = np.zeros(coords.shape + (ncoef(order),), dtype=dtype)
    c[..., 0] = coords
    if order > 0:
        for i in range(NVARS):
            c[..., i, 1 + i] = 1
    return Jet(c, order)


# einsum ----------------------------------------------------------------

def einsum(spec: str, *operands) -> Jet | np.ndarray:
    """np.einsum over jets and constant arrays (at most two jets).

    Every subscript must begin with ``...`` when batch axes are present.
    """
    lhs, out = spec.replace(" ", "").split("->")
    subs = lhs.split(",")
    if len(subs) != len(operands):
        raise ValueError("subscript/operand count mismatch")
    jet_pos = [i for i, o in enumerate(operands) if isinstance(o, Jet)]
    if not jet_pos:
        return np.einsum(spec, *operands)
    if len(jet_pos) > 2:
        raise ValueError("einsum supports at most two jet operands")
    free = [ch for ch in _LETTERS if ch not in spec][0]
    arrays = [np.asarray(o) if not isinstance(o, Jet) else None for o in operands]
    subs = list(subs)
    opt = len(operands) > 2
    if len(jet_pos) == 1:
        k = jet_pos[0]
        arrays[k] = operands[k].c
        subs[k] += free
        res = np.einsum(",".join(subs) + "->" + out + free, *arrays, optimize=opt)
        return Jet(res, operands[k].order)
    a, b = (operands[k] for k in jet_pos)
    o = min(a.order, b.order)
    n = ncoef(o)
    for k in jet_pos:
        subs[k] += free
    if o == 0:
        arrays[jet_pos[0]] = a.c[..., :n]
        arrays[jet_pos[1]] = b.c[..., :n]
        return Jet(np.einsum(",".join(subs) + "->" + out + free, *arrays, optimize=opt), 0)
    ii, jj, starts = _product_table(o)
    arrays[jet_pos[0]] = a.c[..., ii]
    arrays[jet_pos[1]] = b.c[..., jj]
    res = np.einsum(",".join(subs) + "->" + out + free, *arrays, optimize=opt)
    return Jet(np.add.reduceat(res, starts, axis=-1), o)


def stack(items: Sequence, axis: int = -1) -> Jet:
    """Stack jets/constants along a new tensor axis (negative axes count tensor axes)."""
    orders = [i.order for i in items if isinstance(i, Jet)]
    if not orders:
        raise ValueError("stack needs at least one jet")
    o = min(orders)
    dtype = _result_dtype(*items)
    cs = [as_jet(i, o).truncate(o).c.astype(dtype, copy=False) for i in items]
    shape = np.broadcast_shapes(*[c.shape for c in cs])
    cs = [np.broadcast_to(c, shape) for c in cs]
    return Jet(np.stack(cs, axis=Jet._ax(axis)), o)


def zeros_like(j: Jet) -> Jet:
    return Jet(np.zeros_like(j.c), j.order)


# elementary functions -----------------------------------------------------

def _compose(a: Jet, taylor: list[np.ndarray]) -> Jet:
    """f(a) given the Taylor coefficients f^(k)(a0)/k! at the constant term."""
    n = a.order
    if n == 0:
        return Jet(np.asarray(taylor[0])[..., None], 0)
    hc = a.c.copy()
    hc[..., 0] = 0
    h = Jet(hc, n)
    res = Jet.constant(taylor[n], n) * h
    for k in range(n - 1, 0, -1):
        res = _mul(res._with_constant(taylor[k]), h)
    return res._with_constant(taylor[0])


def _check_positive(a0: np.ndarray, what: str) -> None:
    if np.iscomplexobj(a0):
        return
    if np.any(a0 <= 0):
        raise DomainError(f"{what} requires a positive argument, got min {np.min(a0)!r}")


def exp(a: Jet) -> Jet:
    e0 = np.exp(a.value)
    return _compose(a, [e0 / math.factorial(k) for k in range(a.order + 1)])


def log(a: Jet) -> Jet:
    a0 = a.value
    _check_positive(a0, "log")
    t = [np.log(a0)] + [(-1) ** (k + 1) / (k * a0**k) for k in range(1, a.order + 1)]
    return _compose(a, t)


def sin(a: Jet) -> Jet:
    s, c = np.sin(a.value), np.cos(a.value)
    cyc = [s, c, -s, -c]
    return _compose(a, [cyc[k % 4] / math.factorial(k) for k in range(a.order + 1)])


def cos(a: Jet) -> Jet:
    s, c = np.sin(a.value), np.cos(a.value)
    cyc = [c, -s, -c, s]
    return _compose(a, [cyc[k % 4] / math.factorial(k) for k in range(a.order + 1)])


def power(a: Jet, p: float) -> Jet:
    a0 = a.value
    if float(p) != int(p):
        _check_positive(a0, "non-integer power")
    elif p < 0 and np.any(a0 == 0):
        raise DomainError("negative power of a vanishing argument")
    t = []
    coef = 1.0
    for k in range(a.order + 1):
        t.append(coef * a0 ** (p - k))
        coef *= (p - k) / (k + 1)
    return _compose(a, t)


def sqrt(a: Jet) -> Jet:
    return power(a, 0.5)


def reciprocal(a: Jet) -> Jet:
    return power(a, -1)


def inv(m: Jet) -> Jet:
    """Matrix inverse over the last two tensor axes via a Neumann series."""
    x0 = np.linalg.inv(m.value)
    hc = m.c.copy()
    hc[..., 0] = 0
    step = einsum("...ij,...jk->...ik", -x0, Jet(hc, m.order))
    term = Jet.constant(x0, m.order)
    out = term
    for _ in range(m.order):
        term = einsum("...ij,...jk->...ik", step, term)
        out = out + term
    return out


# partial derivative extraction ------------------------------------------------

def partials(j: Jet, k: int) -> np.ndarray:
    """Array of all k-th partials at the expansion point, derivative axes last."""
    if k > j.order:
        raise OrderError(f"jet of order {j.order} has no partials of order {k}")
    out = np.zeros(j.shape + (NVARS,) * k, dtype=j.dtype)
    look = _lookup(j.order)
    codes_base = (j.order + 1) ** np.arange(NVARS, dtype=np.int64)
    for combo in itertools.combinations_with_replacement(range(NVARS), k):
        e = np.zeros(NVARS, dtype=np.int64)
        for v in combo:
            e[v] += 1
        idx = look[int(e @ codes_base)]
        fac = math.prod(math.factorial(int(x)) for x in e)
        val = j.c[..., idx] * fac
        for perm in set(itertools.permutations(combo)):
            out[(Ellipsis,) + perm] = val
    return out


def multi_index_to_exponent(multi_index: Iterable[int]) -> tuple[int, ...]:
    e = [0] * NVARS
    for v in multi_index:
        e[v] += 1
    return tuple(e)
