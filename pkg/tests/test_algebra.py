import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from banach_reduce.algebra import (AlgebraElement, AlgebraInstance, TupleOverA,
                                   log_element, make_instance)
from banach_reduce.errors import (LogObstruction, NonPositiveValue,
                                  NotInvertible, NotInvertibleTuple,
                                  OwnerMismatch)
from banach_reduce.raster import RasterDomain

M = 7
PROD_C = make_instance("product", "C", M)
PROD_R = make_instance("product", "R", M)


def cvec(draw=None):
    return st.lists(
        st.tuples(st.floats(-10, 10, allow_nan=False),
                  st.floats(-10, 10, allow_nan=False)).map(lambda t: complex(*t)),
        min_size=M, max_size=M).map(np.array)


def test_instance_basics():
    assert PROD_C.npoints == M
    assert PROD_C.unit().sup_norm == 1.0
    circ = make_instance("circle", "C", 64)
    assert circ.npoints == 64
    assert np.allclose(circ.coordinate().values, np.exp(1j * circ.points()))
    with pytest.raises(ValueError):
        make_instance("circle", "C", 4)
    with pytest.raises(ValueError):
        make_instance("product", "R", 0)


def test_grid_instance_from_mask():
    dom = RasterDomain.annulus(1.0, 2.0, 1 / 64)
    inst = make_instance("grid", "C", dom)
    assert inst.npoints == dom.npoints
    z = inst.coordinate()
    r = np.abs(z.values)
    assert r.min() >= 1.0 - 1 / 64
    assert r.max() <= 2.0 + 1 / 64


@given(cvec(), cvec(), cvec())
@settings(max_examples=200, deadline=None)
def test_ring_laws(a, b, c):
    ea, eb, ec = PROD_C.element(a), PROD_C.element(b), PROD_C.element(c)
    assert ((ea * eb) * ec).allclose(ea * (eb * ec), 1e-9)
    assert (ea * eb).allclose(eb * ea, 1e-12)
    assert (ea * (eb + ec)).allclose(ea * eb + ea * ec, 1e-9)


@given(cvec(), cvec())
@settings(max_examples=200, deadline=None)
def test_norm_laws(a, b):
    ea, eb = PROD_C.element(a), PROD_C.element(b)
    assert (ea * eb).sup_norm <= ea.sup_norm * eb.sup_norm + 1e-9
    assert (ea + eb).sup_norm <= ea.sup_norm + eb.sup_norm + 1e-9


def test_invert():
    assert PROD_C.unit().invert().allclose(PROD_C.unit(), 0)
    e = PROD_R.element([1, 2, 4, 1, 1, 1, 1])
    assert np.allclose(e.invert().values[:3], [1, 0.5, 0.25])
    with pytest.raises(NotInvertible):
        PROD_C.zero().invert()
    r = e.invert() * e
    assert r.allclose(PROD_R.unit(), 1e-12)


def test_owner_mismatch():
    other = make_instance("product", "C", M)
    # same shape but distinct product instances compare equal by descriptor
    assert PROD_C.same_as(other)
    circ = make_instance("circle", "C", 64)
    with pytest.raises(OwnerMismatch):
        PROD_C.unit() + circ.unit()


def test_exp_log_product():
    e = PROD_R.element([1.0, np.e, 2.0, 1, 1, 1, 1])
    le = log_element(e)
    assert np.allclose(le.values[:2], [0.0, 1.0])
    assert le.exp().allclose(e, 1e-12)
    with pytest.raises(NonPositiveValue):
        log_element(PROD_R.element([-1.0] * M))
    ec = PROD_C.element(np.exp(1j * np.linspace(0, 1, M)))
    assert log_element(ec).exp().allclose(ec, 1e-12)


def test_circle_log_winding_obstruction():
    circ = make_instance("circle", "C", 1024)
    z = circ.coordinate()
    with pytest.raises(LogObstruction) as ei:
        log_element(z)
    assert ei.value.windings == [(0, 1)]
    shifted = z + 2.0
    assert log_element(shifted).exp().allclose(shifted, 1e-9)


def test_tuple_min_modulus_and_rejection():
    f = TupleOverA([PROD_C.element([1] * M), PROD_C.element([0] * M)])
    assert f.min_modulus() == 1.0
    bad = TupleOverA([PROD_C.zero(), PROD_C.zero()])
    with pytest.raises(NotInvertibleTuple):
        bad.require_invertible()


def test_min_modulus_annulus_pair():
    # joint modulus sqrt(|z|^2 + (|z|-1.5)^2) minimized on the annulus 1<=|z|<=2
    dom = RasterDomain.annulus(1.0, 2.0, 1 / 128)
    inst = make_instance("grid", "C", dom)
    z = inst.coordinate()
    g = inst.from_function(lambda p: np.abs(p) - 1.5)
    mm = TupleOverA([z, g]).min_modulus()
    assert abs(mm - np.sqrt(1.25)) < 0.02


def test_element_serialization_roundtrip():
    e = PROD_C.element(np.arange(M) + 1j)
    doc = e.to_json()
    back = AlgebraElement.from_json(doc)
    assert back.allclose(e, 0)
    circ = make_instance("circle", "R", 32)
    e2 = circ.element(np.arange(32, dtype=float))
    assert AlgebraElement.from_json(e2.to_json()).allclose(e2, 0)


def test_restrict_and_grid_values():
    dom = RasterDomain.disk(1.0, 1 / 32)
    inst = make_instance("grid", "C", dom)
    z = inst.coordinate()
    sub = dom.with_mask(dom.mask & (np.abs(dom.centers()) <= 0.5))
    zr = z.restrict(sub)
    assert zr.owner.npoints == sub.npoints
    assert np.max(np.abs(zr.values)) <= 0.5 + 1 / 32
