import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from urel_euler.errors import InvalidStateError, StateSpaceError
from urel_euler.state import (
    ConservedPair,
    PrimitiveState,
    RadialField,
    conserved_arrays,
    flux_c,
    four_velocity,
    pressure_arrays,
    to_conserved,
    to_primitive,
    velocity,
)

pressures = st.floats(1e-6, 1e6)
four_vels = st.floats(-50.0, 50.0)


def test_rest_state():
    c = to_conserved(PrimitiveState(1.0, 0.0))
    assert (c.a, c.b) == (3.0, 0.0)
    back = to_primitive(c)
    assert back.p == 1.0 and back.u == 0.0


def test_unit_four_velocity():
    c = to_conserved(PrimitiveState(1.0, 1.0))
    assert c.a == pytest.approx(7.0, rel=1e-15)
    assert c.b == pytest.approx(4.0 * math.sqrt(2.0), rel=1e-15)
    assert flux_c(c) == pytest.approx(5.0, rel=1e-14)


@pytest.mark.parametrize("p", [0.0, -1.0, float("nan")])
def test_to_conserved_rejects_bad_pressure(p):
    with pytest.raises(InvalidStateError):
        to_conserved(PrimitiveState(p, 0.3))


@pytest.mark.parametrize("a,b", [(1.0, 1.0), (1.0, -1.5), (0.0, 0.0), (-1.0, 0.0)])
def test_to_primitive_rejects_outside_cone(a, b):
    with pytest.raises(StateSpaceError):
        to_primitive(ConservedPair(a, b))


@given(pressures, four_vels)
def test_round_trip(p, u):
    back = to_primitive(to_conserved(PrimitiveState(p, u)))
    assert back.p == pytest.approx(p, rel=1e-10)
    assert back.u == pytest.approx(u, rel=1e-10, abs=1e-12)


@given(pressures, four_vels)
def test_conserved_pair_invariant_and_flux(p, u):
    c = to_conserved(PrimitiveState(p, u))
    assert abs(c.b) < c.a
    # c(a, b) equals p (1 + 4u^2)
    assert flux_c(c) == pytest.approx(p * (1.0 + 4.0 * u * u), rel=1e-9)


def test_pressure_formula_is_cancellation_free():
    # b close to a: the textbook form loses all digits, the rationalised one does not
    u = 1e4
    a, b = conserved_arrays(2.0, u)
    assert pressure_arrays(a, b) == pytest.approx(2.0, rel=1e-8)


@given(st.floats(-0.999999, 0.999999))
def test_velocity_maps_are_inverse(v):
    assert velocity(four_velocity(v)) == pytest.approx(v, abs=1e-12)


def test_velocity_arrays():
    u = np.array([-1.0, 0.0, 1.0])
    np.testing.assert_allclose(velocity(u), [-1 / math.sqrt(2), 0.0, 1 / math.sqrt(2)])
    with pytest.raises(InvalidStateError):
        four_velocity(np.array([0.5, 1.0]))


def test_radial_field_validation():
    f = RadialField([0.1, 0.2], [3.0, 7.0], [0.0, 4.0 * math.sqrt(2)], time=0.5)
    p, v = f.primitive()
    np.testing.assert_allclose(p, [1.0, 1.0])
    np.testing.assert_allclose(v, [0.0, 1 / math.sqrt(2)])
    with pytest.raises(StateSpaceError):
        RadialField([0.1], [1.0], [1.0])
    with pytest.raises(ValueError):
        RadialField([0.2, 0.1], [3.0, 3.0], [0.0, 0.0])
