"""Dense component tensors at a point with index bookkeeping.

Valence strings use one character per axis: ``u``/``d`` for an upper/lower
spacetime index, ``r``/``c`` for the row/column index of an endomorphism
fiber.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import SlotError

SPACETIME = "ud"
FIBER = "rc"


def _perm_sign(perm) -> int:
    sign, seen = 1, list(perm)
    for i in range(len(seen)):
        while seen[i] != i:
            j = seen[i]
            seen[i], seen[j] = seen[j], seen[i]
            sign = -sign
    return sign


@dataclass(frozen=True)
class PointTensor:
    components: np.ndarray
    valence: str

    def __post_init__(self):
        comp = np.asarray(self.components)
        object.__setattr__(self, "components", comp)
        if comp.ndim != len(self.valence):
            raise SlotError(f"valence {self.valence!r} does not match array rank {comp.ndim}")
        if any(ch not in SPACETIME + FIBER for ch in self.valence):
            raise SlotError(f"unknown slot kind in {self.valence!r}")
        fib = {comp.shape[i] for i, ch in enumerate(self.valence) if ch in FIBER}
        if len(fib) > 1:
            raise SlotError("fiber slots have inconsistent dimensions")

    @property
    def rank(self) -> int:
        return len(self.valence)

    def __add__(self, other: "PointTensor") -> "PointTensor":
        if other.valence != self.valence:
            raise SlotError("cannot add tensors of different valence")
        return PointTensor(self.components + other.components, self.valence)

    def __sub__(self, other: "PointTensor") -> "PointTensor":
        if other.valence != self.valence:
            raise SlotError("cannot subtract tensors of different valence")
        return PointTensor(self.components - other.components, self.valence)

    def __mul__(self, s) -> "PointTensor":
        return PointTensor(self.components * s, self.valence)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.components) ** 2)))


def _check_slot(t: PointTensor, i: int) -> None:
    if not 0 <= i < t.rank:
        raise SlotError(f"slot {i} out of range for valence {t.valence!r}")


def contract(t: PointTensor, i: int, j: int) -> PointTensor:
    """Sum over a pair of slots: one up and one down, or a fiber row with a column."""
    _check_slot(t, i)
    _check_slot(t, j)
    pair = {t.valence[i], t.valence[j]}
    if i == j or pair not in ({"u", "d"}, {"r", "c"}):
        raise SlotError(f"cannot contract slots {i} ({t.valence[i]}) and {j} ({t.valence[j]})")
    comp = np.trace(t.components, axis1=i, axis2=j)
    val = "".join(ch for k, ch in enumerate(t.valence) if k not in (i, j))
    return PointTensor(comp, val)


def raise_lower(t: PointTensor, slot: int, metric_or_inverse: np.ndarray) -> PointTensor:
    """Flip the position of a spacetime slot.

    Lowering an ``u`` slot contracts with the metric; raising a ``d`` slot
    contracts with the inverse metric.  The caller passes whichever applies.
    """
    _check_slot(t, slot)
    ch = t.valence[slot]
    if ch not in SPACETIME:
        raise SlotError(f"slot {slot} is not a spacetime index")
    m = np.asarray(metric_or_inverse)
    comp = np.moveaxis(np.tensordot(m, t.components, axes=(1, slot)), 0, slot)
    new = "d" if ch == "u" else "u"
    return PointTensor(comp, t.valence[:slot] + new + t.valence[slot + 1:])


def antisymmetrize(t: PointTensor, slots) -> PointTensor:
    """Unit-weight alternation over the given slots."""
    slots = list(slots)
    for s in slots:
        _check_slot(t, s)
    kinds = {t.valence[s] for s in slots}
    if len(kinds) != 1 or len(set(slots)) != len(slots):
        raise SlotError("antisymmetrized slots must be distinct and of the same kind and position")
    return PointTensor(alternate(t.components, slots), t.valence)


def alternate(arr: np.ndarray, slots) -> np.ndarray:
    """Unit-weight alternation of an ndarray over the given axes."""
    slots = list(slots)
    out = np.zeros_like(arr)
    base = list(range(arr.ndim))
    for perm in itertools.permutations(range(len(slots))):
        axes = base.copy()
        for k, p in enumerate(perm):
            axes[slots[k]] = slots[p]
        out = out + _perm_sign(perm) * np.transpose(arr, axes)
    return out / math.factorial(len(slots))


def endo_trace(t: PointTensor) -> PointTensor:
    """Matrix trace over the single fiber row/column pair."""
    rows = [i for i, ch in enumerate(t.valence) if ch == "r"]
    cols = [i for i, ch in enumerate(t.valence) if ch == "c"]
    if len(rows) != 1 or len(cols) != 1:
        raise SlotError("endo_trace needs exactly one fiber row and one fiber column slot")
    return contract(t, rows[0], cols[0])


def endo_product(x: PointTensor, y: PointTensor) -> PointTensor:
    """Tensor product with the fiber matrices composed (row of x, column of y)."""
    if x.valence[-2:] != "rc" or y.valence[-2:] != "rc":
        raise SlotError("endo_product needs trailing fiber row/column slots on both factors")
    nx, ny = x.rank - 2, y.rank - 2
    comp = np.einsum("...ij,...jk->...ik",
                     x.components.reshape(x.components.shape[:nx] + (1,) * ny + x.components.shape[nx:]),
                     y.components.reshape((1,) * nx + y.components.shape))
    return PointTensor(comp, x.valence[:-2] + y.valence[:-2] + "rc")


def fsq_norm(F: PointTensor, g_inv: np.ndarray) -> float:
    """|F|^2 = -Tr(g^ac g^bd F_ab F_cd) for an endomorphism-valued two-form."""
    if F.valence != "ddrc":
        raise SlotError("expected an endomorphism-valued two-form with valence 'ddrc'")
    val = -np.einsum("ac,bd,abij,cdji->", g_inv, g_inv, F.components, F.components)
    return complex(val)
