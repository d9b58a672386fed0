import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from urel_euler.errors import (
    CFLViolationError,
    GridGeometryError,
    InvalidInitialDataError,
    StateSpaceError,
)
from urel_euler.radial import (
    advance_level,
    build_grid,
    detect_shocks,
    euler_update,
    initialize,
    reflect_boundary,
    run,
    weight_coefficients,
)
from urel_euler.selfsim import entropy_check
from urel_euler.state import ConservedPair, conserved_arrays, flux_c_arrays

# 50-digit evaluation of the closed-form two-dimensional update, frozen
GOLDEN_A = 4.375
GOLDEN_B = -0.069480283940634813906029287635263802337793519905114


def closed_form_update_2d(am, bm, ap, bp, xbar, dx, lam):
    """Direct transcription of the closed-form d=2 update (independent check)."""
    q = dx / (2 * xbar)
    cm = flux_c_arrays(am, bm)
    cp = flux_c_arrays(ap, bp)
    a = 0.5 * (am + bm / lam) * (1 - q) + 0.5 * (ap - bp / lam) * (1 + q)
    eta = q / (3 * lam)
    xi = 0.5 * (bm + cm / lam) * (1 - q) + 0.5 * (bp - cp / lam) * (1 + q) - a * eta
    b = (xi + eta * math.sqrt(4 * a * a * (1 + 3 * eta * eta) - 3 * xi * xi)) / (1 + 3 * eta * eta)
    return a, b


states = st.tuples(st.floats(-8.0, 8.0), st.floats(-0.999, 0.999)).map(
    lambda t: (math.exp(t[0]), math.exp(t[0]) * t[1])
)


@pytest.mark.parametrize(
    "t_star,x_star,N,dt,M,dx",
    [(1.0, 2.0, 5000, 1e-4, 10000, 2e-4), (6.0, 6.0, 5000, 6e-4, 5000, 1.2e-3)],
)
def test_build_grid_examples(t_star, x_star, N, dt, M, dx):
    g = build_grid(t_star, x_star, N)
    assert g.M == M
    assert g.dt == pytest.approx(dt, rel=1e-14)
    assert g.dx == pytest.approx(dx, rel=1e-14)
    assert g.lam == pytest.approx(1.0, rel=1e-14)


def test_build_grid_cfl_violation():
    with pytest.raises(CFLViolationError):
        build_grid(2.0, 1.0, 1)


def test_build_grid_floor_gives_lambda_above_one():
    g = build_grid(1.0, 0.7, 7)
    assert g.M == 4 and g.lam > 1.0


@pytest.mark.parametrize("bad", [(0.0, 1.0, 3), (1.0, -1.0, 3), (1.0, 1.0, 0), (1.0, 1.0, 2.5)])
def test_build_grid_rejects_bad_arguments(bad):
    with pytest.raises(ValueError):
        build_grid(*bad)


def test_euler_update_golden():
    a, b = euler_update(4.0, 1.0, 3.0, -1.0, 1.0, 0.5, 1.0)
    assert a == GOLDEN_A
    assert b == pytest.approx(GOLDEN_B, rel=1e-14)
    assert abs(b) < a


@pytest.mark.parametrize("p", [1e-3, 1.0, 7.25, 1e3])
@pytest.mark.parametrize("xbar", [0.25, 1.0, 123.0])
@pytest.mark.parametrize("d", [2, 3])
def test_euler_update_stationary_exact(p, xbar, d):
    a, b = euler_update(3 * p, 0.0, 3 * p, 0.0, xbar, 0.5, 1.0, d=d)
    assert (a, b) == (3 * p, 0.0)


def test_euler_update_boundary_case():
    assert euler_update(5.0, 2.0, 3.0, 0.0, 0.0, 0.5, 1.0) == (3.0, 0.0)
    assert euler_update(5.0, 2.0, 3.0, 1.0, 0.0, 0.5, 2.0) == (2.5, 0.0)


def test_euler_update_errors():
    with pytest.raises(StateSpaceError):
        euler_update(1.0, 1.0, 3.0, 0.0, 1.0, 0.5, 1.0)
    with pytest.raises(GridGeometryError):
        euler_update(3.0, 0.0, 3.0, 0.0, 0.2, 0.5, 1.0)
    with pytest.raises(CFLViolationError):
        euler_update(3.0, 0.0, 3.0, 0.0, 1.0, 0.5, 0.9)


@given(states, states, st.floats(0.5, 1.0), st.floats(1.0, 4.0))
def test_reproduces_closed_form_2d(sm, sp, q, lam):
    dx = 1.0
    xbar = dx / (2 * q)
    ref = closed_form_update_2d(*sm, *sp, xbar, dx, lam)
    got = euler_update(*sm, *sp, xbar, dx, lam)
    scale = max(sm[0], sp[0])
    assert got[0] == pytest.approx(ref[0], rel=1e-13)
    assert abs(got[1] - ref[1]) <= 1e-13 * scale


@pytest.mark.parametrize("d", [1, 2, 3])
@given(sm=states, sp=states, q=st.floats(1e-6, 1.0), lam=st.floats(1.0, 10.0))
def test_update_stays_admissible(d, sm, sp, q, lam):
    a, b = euler_update(*sm, *sp, 1.0 / (2 * q), 1.0, lam, d=d)
    assert abs(b) < a


def test_weight_coefficients_d3_limits():
    # far from the axis delta ~ (d-1) dx / (4 xbar)
    delta, kappa = weight_coefficients(3, np.array([1e6]), 1.0, 1.0)
    assert delta[0] == pytest.approx(0.5e-6, rel=1e-5)
    # eta = kappa/3 stays below 1/3 on the whole admissible range
    delta, kappa = weight_coefficients(3, np.linspace(0.5, 50, 200), 1.0, 1.0)
    assert np.all(kappa / 3 < 1 / 3)
    d2, _ = weight_coefficients(2, 0.5, 1.0, 1.0)
    assert d2 == 0.5


@given(states, st.floats(1.0, 100.0))
def test_chord_bounds(s, lam):
    a, b = s
    c = flux_c_arrays(a, b)
    assert -(a + b / lam) < b + c / lam < a + b / lam
    assert -(a - b / lam) < b - c / lam < a - b / lam


@given(st.floats(1e-3, 1e3), st.floats(1e-6, 1 / 3), st.floats(1e-9, 1.0 - 1e-9))
def test_quadratic_root_bound(a, eta, frac):
    lo, hi = -a * (1 + eta), a * (1 - eta)
    xi = lo + frac * (hi - lo)
    assume(lo < xi < hi)
    disc = 4 * a * a * (1 + 3 * eta * eta) - 3 * xi * xi
    assert disc > 0
    assert abs((xi + eta * math.sqrt(disc)) / (1 + 3 * eta * eta)) < a


def test_reflect_boundary():
    assert reflect_boundary(ConservedPair(3.0, 0.5)) == (3.0, -0.5)
    assert reflect_boundary((3.0, 0.0)) == (3.0, -0.0)
    assert reflect_boundary(reflect_boundary((3.0, 0.5))) == (3.0, 0.5)
    with pytest.raises(StateSpaceError):
        reflect_boundary((1.0, 2.0))


def test_initialize_rest():
    g = build_grid(1.0, 1.0, 10)
    lv = initialize(g, lambda x: np.ones_like(x), lambda x: np.zeros_like(x))
    assert lv.a.size == g.M + g.N
    assert np.all(lv.a == 3.0) and np.all(lv.b == 0.0)
    np.testing.assert_allclose(lv.x, (np.arange(g.M + g.N) + 0.5) * g.dx)


def test_initialize_bubble_jump_at_midpoint():
    g = build_grid(6.0, 6.0, 50)
    lv = initialize(g, lambda x: np.where(x <= 1, 1.0, 0.1), lambda x: np.zeros_like(x))
    inside = lv.x <= 1
    assert np.all(lv.a[inside] == 3.0)
    np.testing.assert_allclose(lv.a[~inside], 0.3)


def test_initialize_four_velocity_profile():
    g = build_grid(6.0, 5.0, 100)
    lv = initialize(g, lambda x: np.ones_like(x), u0=lambda x: np.where(x < 1, np.sin(2 * np.pi * x), 0.0))
    s = np.sin(2 * np.pi * lv.x)
    inner = lv.x < 1
    np.testing.assert_allclose(lv.b[inner], 4 * s[inner] * np.sqrt(1 + s[inner] ** 2), rtol=1e-14, atol=1e-15)
    assert np.all(lv.b[~inner] == 0.0)


@pytest.mark.parametrize(
    "p0,v0",
    [(lambda x: np.zeros_like(x), lambda x: np.zeros_like(x)), (lambda x: np.ones_like(x), lambda x: np.ones_like(x))],
)
def test_initialize_rejects_invalid(p0, v0):
    with pytest.raises(InvalidInitialDataError):
        initialize(build_grid(1.0, 1.0, 5), p0, v0)


def test_initialize_needs_one_velocity():
    g = build_grid(1.0, 1.0, 5)
    with pytest.raises(ValueError):
        initialize(g, lambda x: np.ones_like(x))


def test_advance_level_counts_and_interleaving():
    g = build_grid(1.0, 1.0, 6)
    lv = initialize(g, lambda x: 1 + x, lambda x: 0.3 * np.sin(x))
    for n in range(1, 2 * g.N + 1):
        nxt = advance_level(g, lv)
        assert nxt.n == n + 1
        assert nxt.a.size == g.M + g.N - n // 2 == g.level_size(n + 1)
        if n % 2 == 1:
            # nodes of the new level lie between consecutive midpoints
            assert nxt.x[0] == 0.0
            np.testing.assert_allclose(nxt.x[1:], 0.5 * (lv.x[:-1] + lv.x[1:]))
        else:
            np.testing.assert_allclose(nxt.x, 0.5 * (lv.x[:-1] + lv.x[1:]))
        assert nxt.is_admissible()
        lv = nxt
    assert lv.a.size == g.M


def test_advance_level_rejects_final_level():
    g = build_grid(1.0, 1.0, 2)
    lv = run(g, lambda x: np.ones_like(x), lambda x: np.zeros_like(x)).final
    with pytest.raises(ValueError):
        advance_level(g, lv)


@pytest.mark.parametrize("d", [2, 3])
def test_rest_state_bit_exact(d):
    g = build_grid(1.0, 1.0, 50, d=d)
    rec = run(g, lambda x: np.full_like(x, 2.5), lambda x: np.zeros_like(x), record_stride=1)
    assert len(rec.levels) == 2 * g.N + 1
    for lv in rec.levels:
        assert np.all(lv.a == 7.5) and np.all(lv.b == 0.0)


def test_record_stride_thinning():
    g = build_grid(1.0, 1.0, 10)
    rec = run(g, lambda x: np.ones_like(x), lambda x: np.zeros_like(x), record_stride=2 * g.N)
    assert [lv.n for lv in rec.levels] == [1, 2 * g.N + 1]
    rec = run(g, lambda x: np.ones_like(x), lambda x: np.zeros_like(x), record_stride=3)
    assert [lv.n for lv in rec.levels] == [1, 4, 7, 10, 13, 16, 19, 21]
    assert rec.axis_t.size == 2 * g.N + 1


def test_matches_numpy_reference_kernel():
    # the compiled level kernel and the vectorised update agree bit for bit
    from urel_euler.radial import _advance_arrays, euler_update_arrays

    g = build_grid(1.0, 1.0, 40)
    lv = initialize(g, lambda x: 1 + np.cos(3 * x) ** 2, lambda x: 0.6 * np.sin(5 * x))
    a, b = _advance_arrays(g, 2, lv.a, lv.b)
    delta, kappa = g._midpoint_coefficients
    ra, rb = euler_update_arrays(lv.a[:-1], lv.b[:-1], lv.a[1:], lv.b[1:], delta[: a.size], kappa[: a.size], g.lam)
    np.testing.assert_allclose(a, ra, rtol=1e-15)
    np.testing.assert_allclose(b, rb, rtol=1e-14, atol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_random_piecewise_data_stays_admissible(seed):
    rng = np.random.default_rng(seed)
    cuts = np.sort(rng.uniform(0, 1, 4))
    p = np.exp(rng.uniform(np.log(1e-3), np.log(1e3), 5))
    v = rng.uniform(-0.99, 0.99, 5)
    for d in (2, 3):
        g = build_grid(1.0, 1.0, 100, d=d)
        rec = run(g, lambda x: p[np.searchsorted(cuts, x)], lambda x: v[np.searchsorted(cuts, x)], record_stride=1)
        assert all(lv.is_admissible() for lv in rec.levels)


def test_detect_shocks_single_jump():
    x = np.linspace(0, 1, 101)
    v = np.where(x < 0.505, 0.0, -0.4) + 1e-4 * x
    shocks = detect_shocks(x, v)
    assert len(shocks) == 1
    assert shocks[0].position == pytest.approx(0.505)
    assert shocks[0].jump == pytest.approx(-0.4, abs=1e-3)


def test_detect_shocks_smooth_profile_has_none_or_weak():
    x = np.linspace(0, 1, 200)
    assert detect_shocks(x, np.sin(x)) == []


def test_inflow_shock_satisfies_entropy_condition():
    g = build_grid(1.0, 2.0, 1000)
    lv = run(g, lambda x: np.ones_like(x), lambda x: np.full_like(x, -1 / math.sqrt(2))).final
    p, v = lv.primitive()
    s = detect_shocks(lv.x, v)[0]
    assert s.position == pytest.approx(0.455, abs=3 * g.dx)
    i, j = s.left_index, s.right_index
    u = v / np.sqrt(1 - v * v)
    assert entropy_check(p[i], u[i], p[j], u[j])
