import math

import numpy as np
import pytest

from urel_euler.eigen import conserved_from_primitive, normal_flux
from urel_euler.errors import InvalidInitialDataError
from urel_euler.euler2d import (
    CartesianGrid2D,
    FieldState2D,
    init_radial,
    llf_flux,
    max_speed,
    primitives,
    radial_profile,
    radial_spread,
    run,
    step,
    total_conserved,
)

V = 1 / math.sqrt(2)


def const(c):
    return lambda r: np.full_like(r, c)


def disc(inside, outside):
    return lambda r: np.where(r <= 1, inside, outside)


def test_grid_validation():
    with pytest.raises(ValueError):
        CartesianGrid2D(0, 1, 0, 1, 3, 8)
    g = CartesianGrid2D.square(2.0, 8)
    assert g.dx == g.dy == 0.5


def test_init_inflow_has_unit_inward_four_velocity():
    g = CartesianGrid2D.square(2.0, 16)
    st = init_radial(g, const(1.0), const(-V))
    p, ux, uy = primitives(st)
    X, Y = g.centers()
    np.testing.assert_allclose(p, 1.0, rtol=1e-12)
    np.testing.assert_allclose(np.hypot(ux, uy), 1.0, rtol=1e-12)
    np.testing.assert_allclose(ux * X + uy * Y, -np.hypot(X, Y), rtol=1e-12)


def test_init_origin_cell_at_rest():
    g = CartesianGrid2D.square(2.0, 5)
    st = init_radial(g, const(1.0), const(-V))
    assert st.w[0, 2, 2] == 0.0 and st.w[1, 2, 2] == 0.0


def test_init_bubble_and_rest():
    g = CartesianGrid2D.square(6.0, 24)
    st = init_radial(g, disc(1.0, 0.1), const(0.0))
    X, Y = g.centers()
    r = np.hypot(X, Y)
    np.testing.assert_allclose(st.w[2], np.where(r <= 1, 3.0, 0.3))
    assert np.all(st.w[:2] == 0.0)


def test_init_four_velocity_kind():
    g = CartesianGrid2D.square(1.0, 8)
    st = init_radial(g, const(1.0), const(1.0), kind="u")
    _, ux, uy = primitives(st)
    np.testing.assert_allclose(np.hypot(ux, uy), 1.0)


def test_init_rejects_invalid():
    g = CartesianGrid2D.square(1.0, 8)
    with pytest.raises(InvalidInitialDataError):
        init_radial(g, const(-1.0), const(0.0))
    with pytest.raises(InvalidInitialDataError):
        init_radial(g, const(1.0), const(1.0))


def test_llf_consistency_and_rest_speed():
    w = np.array([0.0, 0.0, 3.0])
    n = np.array([0.6, 0.8])
    np.testing.assert_allclose(llf_flux(w, w, n), [0.6, 0.8, 0.0], atol=1e-15)
    w2 = conserved_from_primitive(0.7, [0.3, -1.2])
    np.testing.assert_allclose(llf_flux(w2, w2, n), normal_flux(w2, n), rtol=1e-14)
    st = FieldState2D(CartesianGrid2D.square(1.0, 4), np.tile(w[:, None, None], (1, 4, 4)))
    assert max_speed(st) == pytest.approx(1 / math.sqrt(3), rel=1e-15)


def test_llf_bubble_states():
    # states either side of the bubble edge, both at rest
    wl = np.array([0.0, 0.0, 3.0])
    wr = np.array([0.0, 0.0, 0.3])
    f = llf_flux(wl, wr, np.array([1.0, 0.0]))
    s = 1 / math.sqrt(3)
    np.testing.assert_allclose(f, [0.5 * (1.0 + 0.1), 0.0, -0.5 * s * (0.3 - 3.0)], rtol=1e-14)


def test_kernel_flux_matches_reference_flux():
    from urel_euler.euler2d import _face

    out = np.empty(3)
    wl = conserved_from_primitive(0.8, [0.4, -0.3])
    wr = conserved_from_primitive(1.9, [-1.1, 0.7])
    _face(0.8, 0.4, -0.3, 1.9, -1.1, 0.7, out)
    np.testing.assert_allclose(out, llf_flux(wl, wr, np.array([1.0, 0.0])), rtol=1e-13)


@pytest.mark.parametrize("order", [1, 2])
def test_rest_state_is_preserved(order):
    g = CartesianGrid2D.square(1.0, 8)
    st = init_radial(g, const(2.0), const(0.0))
    nxt = step(st, order=order)
    assert nxt.t > 0
    np.testing.assert_array_equal(nxt.w, st.w)


@pytest.mark.parametrize("order", [1, 2])
def test_periodic_box_conserves(order):
    g = CartesianGrid2D.square(3.0, 32)
    st = init_radial(g, disc(1.0, 0.1), lambda r: 0.3 * np.sin(r))
    before = total_conserved(st)
    st = run(st, 0.5, order=order, bc="periodic")
    after = total_conserved(st)
    np.testing.assert_allclose(after, before, rtol=0, atol=1e-12 * np.abs(before[2]))
    assert st.floor_events == 0


@pytest.mark.parametrize("bc", ["outflow", "reflective"])
def test_boundary_flux_bookkeeping(bc):
    g = CartesianGrid2D.square(1.5, 24)
    st = init_radial(g, disc(1.0, 0.1), const(0.0))
    before = total_conserved(st)
    st = run(st, 1.0, order=2, bc=bc)
    np.testing.assert_allclose(total_conserved(st) + st.flux_out, before, atol=1e-12 * before[2])
    if bc == "reflective":
        # no energy crosses a reflecting wall
        assert abs(st.flux_out[2]) <= 1e-12 * before[2]


def test_single_step_interior_energy():
    g = CartesianGrid2D.square(6.0, 64)
    st = init_radial(g, disc(1.0, 0.1), const(0.0))
    nxt = step(st)
    assert total_conserved(nxt)[2] == pytest.approx(total_conserved(st)[2], rel=1e-14)


@pytest.mark.parametrize("order", [1, 2])
def test_transpose_symmetry(order):
    g = CartesianGrid2D.square(6.0, 40)
    st = init_radial(g, disc(0.1, 1.0), const(0.0))
    for _ in range(10):
        st = step(st, order=order)
    np.testing.assert_allclose(st.w[2], st.w[2].T, rtol=0, atol=1e-12)
    np.testing.assert_allclose(st.w[0], st.w[1].T, rtol=0, atol=1e-12)
    # mirror symmetry x -> -x
    np.testing.assert_allclose(st.w[2], st.w[2][:, ::-1], atol=1e-12)


def test_radial_profile_rest_and_single_bin():
    g = CartesianGrid2D.square(1.0, 16)
    st = init_radial(g, const(1.5), const(0.0))
    r, p, v = radial_profile(st, 5)
    np.testing.assert_allclose(p, 1.5)
    np.testing.assert_allclose(v, 0.0)
    r, p, v = radial_profile(st, 1)
    assert p.shape == (1,) and p[0] == pytest.approx(1.5)


def test_radial_profile_inflow_velocity():
    g = CartesianGrid2D.square(2.0, 32)
    st = init_radial(g, const(1.0), const(-V))
    r, p, v = radial_profile(st, 10, 1.5)
    np.testing.assert_allclose(v[1:], -V, rtol=1e-12)


def test_inflow_plateau_forms():
    g = CartesianGrid2D.square(2.0, 96)
    st = run(init_radial(g, const(1.0), const(-V)), 1.0, order=2)
    r, p, v = radial_profile(st, 40, 2.0)
    plateau = (r > 0.1) & (r < 0.3)
    assert np.all(np.abs(p[plateau] / 15.75505 - 1) < 0.1)
    assert st.floor_events == 0


def test_radial_symmetry_improves_with_resolution():
    # smooth data and bins of one cell width, so in-bin spread measures asymmetry
    spreads = []
    for n in (32, 64, 128):
        g = CartesianGrid2D.square(3.0, n)
        st = run(init_radial(g, lambda r: 1 + np.exp(-4 * r * r), const(0.0)), 0.5, order=2)
        spreads.append(radial_spread(st, n // 2, 3.0))
    assert spreads[2] < spreads[1]
    assert spreads[1] < spreads[0]


def test_step_validates_arguments():
    st = init_radial(CartesianGrid2D.square(1.0, 8), const(1.0), const(0.0))
    with pytest.raises(ValueError):
        step(st, cfl=1.5)
    with pytest.raises(ValueError):
        step(st, order=3)
    with pytest.raises(ValueError):
        step(st, bc="open")
