import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ymren.errors import SlotError
from ymren.tensor import (PointTensor, alternate, antisymmetrize, contract, endo_product, endo_trace, fsq_norm,
                          raise_lower)

seeds = st.integers(0, 2**31 - 1)


def spd(rng, n=6):
    a = rng.normal(size=(n, n))
    return a @ a.T + n * np.eye(n)


def two_form(rng, k):
    z = rng.normal(size=(6, 6, k, k)) + 1j * rng.normal(size=(6, 6, k, k))
    z = 0.5 * (z - np.conj(np.swapaxes(z, -1, -2)))
    return z - np.swapaxes(z, 0, 1)


def test_valence_must_match_rank():
    with pytest.raises(SlotError):
        PointTensor(np.zeros((6, 6)), "d")
    with pytest.raises(SlotError):
        PointTensor(np.zeros((6, 6)), "dx")
    with pytest.raises(SlotError):
        PointTensor(np.zeros((6, 2, 3)), "drc")


def test_contract_mixed_slots_is_trace(rng):
    a = rng.normal(size=(6, 6))
    assert contract(PointTensor(a, "ud"), 0, 1).components == pytest.approx(np.trace(a))


@pytest.mark.parametrize("valence,i,j", [("dd", 0, 1), ("uu", 0, 1), ("ud", 0, 0), ("dr", 0, 1), ("ud", 0, 5)])
def test_contract_rejects_bad_pairs(valence, i, j):
    with pytest.raises(SlotError):
        contract(PointTensor(np.zeros((6, 6)), valence), i, j)


@given(seeds)
def test_raise_then_lower_roundtrip(seed):
    rng = np.random.default_rng(seed)
    g = spd(rng)
    t = PointTensor(rng.normal(size=(6, 6, 6)), "ddu")
    up = raise_lower(t, 1, np.linalg.inv(g))
    assert up.valence == "duu"
    back = raise_lower(up, 1, g)
    np.testing.assert_allclose(back.components, t.components, atol=1e-12)


def test_raise_lower_rejects_fiber_slot():
    with pytest.raises(SlotError):
        raise_lower(PointTensor(np.zeros((6, 2, 2)), "drc"), 1, np.eye(6))


@given(seeds)
def test_antisymmetrize_is_idempotent_and_alternating(seed):
    rng = np.random.default_rng(seed)
    t = PointTensor(rng.normal(size=(6, 6, 6)), "ddd")
    a = antisymmetrize(t, [0, 1, 2])
    np.testing.assert_allclose(antisymmetrize(a, [0, 1, 2]).components, a.components, atol=1e-12)
    np.testing.assert_allclose(a.components, -np.swapaxes(a.components, 0, 2), atol=1e-12)


def test_alternate_two_slots():
    x = np.arange(36.0).reshape(6, 6)
    np.testing.assert_allclose(alternate(x, [0, 1]), 0.5 * (x - x.T))


def test_antisymmetrize_rejects_mixed_positions():
    with pytest.raises(SlotError):
        antisymmetrize(PointTensor(np.zeros((6, 6)), "ud"), [0, 1])


def test_endo_trace_and_product(rng):
    x = PointTensor(rng.normal(size=(6, 3, 3)), "drc")
    y = PointTensor(rng.normal(size=(6, 3, 3)), "drc")
    xy = endo_product(x, y)
    assert xy.valence == "ddrc"
    np.testing.assert_allclose(xy.components[2, 4], x.components[2] @ y.components[4])
    tr = endo_trace(xy)
    np.testing.assert_allclose(tr.components[1, 5], np.trace(x.components[1] @ y.components[5]))
    with pytest.raises(SlotError):
        endo_trace(PointTensor(np.zeros((6, 6)), "dd"))


@given(seeds, st.integers(1, 3))
def test_fsq_norm_nonnegative_for_anti_hermitian(seed, k):
    rng = np.random.default_rng(seed)
    F = PointTensor(two_form(rng, k), "ddrc")
    val = fsq_norm(F, np.linalg.inv(spd(rng)))
    assert abs(val.imag) < 1e-10 * max(1.0, abs(val))
    assert val.real >= 0


def test_fsq_norm_abelian_flat():
    phi = np.zeros((6, 6))
    phi[0, 1], phi[1, 0] = 1.0, -1.0
    F = PointTensor((-1j * phi)[..., None, None], "ddrc")
    # |F|^2 = phi_ab phi^ab
    assert fsq_norm(F, np.eye(6)) == pytest.approx(2.0)
    with pytest.raises(SlotError):
        fsq_norm(PointTensor(phi, "dd"), np.eye(6))


def test_tensor_arithmetic_checks_valence():
    a = PointTensor(np.ones((6,)), "d")
    assert (a + a).components == pytest.approx(2 * np.ones(6))
    assert (3 * a - a).norm() == pytest.approx(2 * np.sqrt(6))
    with pytest.raises(SlotError):
        a + PointTensor(np.ones((6,)), "u")
