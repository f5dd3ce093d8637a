import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hjlab.errors import InputError, NumericError, SearchRadiusError
from hjlab.grid import GridSpec
from hjlab.hamiltonian import ConvexityModuli, LagrangianView, power_norm, quartic2d
from hjlab.hopflax import (
    InitialDatum,
    cone_datum,
    constant_datum,
    dynamic_programming_check,
    epsilon_n,
    functional_identity_check,
    hopf_lax_points,
    hopf_lax_value,
    lattice_approximant,
    lattice_error_bound,
    linear_datum,
    random_piecewise_linear,
    semiconvex_datum,
    semigroup_check,
    solve,
)

QUAD1 = LagrangianView(power_norm(1, 1))
QUAD2 = LagrangianView(power_norm(1, 2))


def fan_u(x):
    x = np.abs(x)
    return np.where(x <= 2, x ** 2 / 4, x - 1)


def fan_b(x):
    return np.clip(x, -2, 2)


def brute_1d(datum, view, t, xs, lo=-12, hi=12, n=2_400_001):
    y = np.linspace(lo, hi, n)
    u0 = datum(y[:, None])
    return np.array([np.min(u0 + t * view.L(((x - y) / t)[:, None])) for x in xs])


def test_constant_datum():
    v, y = hopf_lax_value(constant_datum(2.5, 2), QUAD2, 0.7, [0.3, -1.0])
    assert v == 2.5 and np.allclose(y, [0.3, -1.0])


@settings(max_examples=15, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.1, 2), st.floats(-1, 1), st.floats(-1, 1))
def test_linear_closed_form(a1, a2, t, x1, x2):
    a = np.array([a1, a2])
    val, y = hopf_lax_value(linear_datum(a), QUAD2, t, [x1, x2])
    assert val == pytest.approx(a @ [x1, x2] - t * a @ a, abs=1e-9)
    assert np.allclose((np.array([x1, x2]) - y) / t, 2 * a, atol=1e-6)


def test_linear_brute_force_scan():
    datum = linear_datum([0.7])
    xs = np.array([-0.5, 0.1, 0.9])
    vals, _ = hopf_lax_points(datum, QUAD1, 1.0, xs[:, None])
    assert np.allclose(vals, brute_1d(datum, QUAD1, 1.0, xs), atol=1e-8)


def test_fan_point():
    v, y = hopf_lax_value(cone_datum(1), QUAD1, 1.0, [1.0])
    assert v == pytest.approx(0.25, abs=1e-12) and y == pytest.approx([0.0], abs=1e-7)


def test_fan_fields():
    spec = GridSpec.box([-3], [3], [601])
    res = solve(cone_datum(1), QUAD1, 1.0, spec)
    x = spec.points()[:, 0]
    assert np.max(np.abs(res.u.flat() - fan_u(x))) <= 1e-9
    assert np.max(np.abs(res.b.flat()[:, 0] - fan_b(x))) <= 1e-6


def test_zero_datum_fields():
    res = solve(constant_datum(0.0, 2), QUAD2, 1.0, GridSpec.box([-1, -1], [1, 1], 11))
    assert not np.any(res.u.values) and not np.any(res.b.vectors)


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10_000))
def test_random_pl_matches_brute_force(seed):
    datum = random_piecewise_linear(seed, 1)
    xs = np.linspace(-1, 1, 7)
    vals, Y = hopf_lax_points(datum, QUAD1, 1.0, xs[:, None])
    ref = brute_1d(datum, QUAD1, 1.0, xs)
    # the brute grid (step 1e-5) can only overshoot the true minimum
    assert np.all(vals <= ref + 1e-12) and np.all(ref - vals <= 1e-5)
    # minimizers respect the speed bound
    assert np.all(np.abs(xs - Y[:, 0]) <= ConvexityModuli(QUAD1).Lambda_M(1.0) * 1.1)


def test_grid_solve_picks_global_basin():
    # two basins tie to within the coarse-scan error at this node
    spec = GridSpec.box([-1], [1], 81)
    datum = random_piecewise_linear(0, 1)
    res = solve(datum, QUAD1, 1.0, spec)
    x = spec.points()[51:52, 0]
    ref = brute_1d(datum, QUAD1, 1.0, x)
    assert res.u.flat()[51] <= ref[0] + 1e-12 and ref[0] - res.u.flat()[51] <= 1e-5


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_no_point_beats_by_another_minimizer(seed):
    """u(x_i) <= u0(y_j) + t L((x_i - y_j)/t) for every pair of grid points."""
    spec = GridSpec.box([-1], [1], 81)
    datum = random_piecewise_linear(seed, 1)
    res = solve(datum, QUAD1, 1.0, spec)
    X = spec.points()[:, 0]
    Y = res.minimizers.reshape(-1)
    F = datum(Y[:, None])[None, :] + QUAD1.L((X[:, None] - Y[None, :]).reshape(-1, 1)).reshape(81, 81)
    assert np.all(res.u.flat() <= F.min(axis=1) + 1e-12)


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10_000))
def test_numba_and_numpy_solutions_agree(seed):
    from hjlab import _accel

    datum = random_piecewise_linear(seed, 2)
    X = np.random.default_rng(seed).uniform(-1, 1, (12, 2))
    prev = _accel.use_numba()
    try:
        _accel.set_numba(True)
        a, ya = hopf_lax_points(datum, QUAD2, 1.0, X)
        _accel.set_numba(False)
        b, yb = hopf_lax_points(datum, QUAD2, 1.0, X)
    finally:
        _accel.set_numba(prev)
    assert np.allclose(a, b, atol=1e-12) and np.allclose(ya, yb, atol=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_solution_is_lipschitz_and_ordered(seed):
    """S_t preserves the Lipschitz constant and is monotone in the datum."""
    d = random_piecewise_linear(seed, 1)
    spec = GridSpec.box([-1], [1], 81)
    u = solve(d, QUAD1, 1.0, spec).u
    assert u.lipschitz_estimate() <= 1 + 1e-6
    shifted = InitialDatum(lambda Y: d(Y) + 0.3, d.M, d.m + 0.3, 1)
    assert np.allclose(solve(shifted, QUAD1, 1.0, spec).u.values, u.values + 0.3, atol=1e-9)


def test_speed_bound_and_consistency():
    res = solve(semiconvex_datum([0.2], 0.5), QUAD1, 1.0, GridSpec.box([-1], [1], 101))
    assert res.speed_excess() <= 0
    assert np.max(res.consistency()[res.regular_mask()]) <= 0.05


def test_semigroup_and_identity():
    spec = GridSpec.box([-1], [1], 201)
    h = float(spec.h[0])
    assert semigroup_check(cone_datum(1), QUAD1, 0.5, 0.5, spec) <= 5 * h
    assert semigroup_check(linear_datum([0.4]), QUAD1, 0.5, 0.5, spec) <= 1e-8
    assert semigroup_check(constant_datum(1.0, 1), QUAD1, 0.5, 0.5, spec) == 0
    assert functional_identity_check(cone_datum(1), QUAD1, 0.0, 1.0, spec) == 0


def test_dynamic_programming():
    assert dynamic_programming_check(cone_datum(1), QUAD1, 0.5, 1.0, [1.0])
    assert dynamic_programming_check(linear_datum([0.3, -0.2]), QUAD2, 0.4, 1.0, [0.1, 0.2])
    assert dynamic_programming_check(constant_datum(0.0, 1), QUAD1, 0.4, 1.0, [0.1])


def test_preconditions():
    with pytest.raises(InputError):
        hopf_lax_value(cone_datum(1), QUAD1, 0.0, [0.0])
    with pytest.raises(InputError):
        solve(cone_datum(2), QUAD1, 1.0, GridSpec.box([-1], [1], 5))
    with pytest.raises(InputError):
        semigroup_check(cone_datum(1), QUAD1, 0.0, 0.5, GridSpec.box([-1], [1], 5))


def test_search_radius_error_on_understated_constant():
    # datum is 3-Lipschitz but declares M = 1: minimizers escape the ball
    bad = InitialDatum(lambda Y: 3 * Y[:, 0], 1.0, 0.0, 1)
    with pytest.raises(SearchRadiusError):
        hopf_lax_value(bad, QUAD1, 1.0, [0.0])


def test_epsilon_n():
    assert epsilon_n(1, 1.0, 1.0, QUAD1) == pytest.approx(9 / 64, rel=1e-9)
    for view in (QUAD1, LagrangianView(power_norm(2, 1)), QUAD2):
        e = [epsilon_n(n, 1.0, 1.0, view) for n in range(1, 11)]
        assert all(b < a for a, b in zip(e, e[1:]))
        assert e[-1] < 1e-3


def test_lattice_approximant_zero_datum():
    spec = GridSpec.box([-1], [1], 41)
    u, b, info = lattice_approximant(constant_datum(0.0, 1), QUAD1, 1.0, 5, spec)
    # u_n(t, x) = t L((x - y)/t) at the nearest node, so at most L(spacing / 2)
    half = info["spacing"] / 2
    assert np.all(u.values >= 0) and np.all(u.values <= QUAD1.L(np.array([half])) + 1e-15)
    assert np.max(np.abs(b.flat())) <= half + 1e-12


@pytest.mark.parametrize("n", [4, 6, 8, 10])
def test_lattice_error_within_bound(n):
    spec = GridSpec.box([-3], [3], 121)
    u, b, info = lattice_approximant(cone_datum(1), QUAD1, 1.0, n, spec)
    x = spec.points()
    err = np.abs(u.flat() - fan_u(x[:, 0]))
    assert np.all(err <= lattice_error_bound(n, 1.0, cone_datum(1), QUAD1, x))
    assert np.max(np.linalg.norm(b.flat(), axis=1)) <= info["Lambda_M"]


def test_quartic_solve_runs():
    res = solve(random_piecewise_linear(1, 2), LagrangianView(quartic2d()), 1.0, GridSpec.box([-1, -1], [1, 1], 11))
    assert res.speed_excess() <= 0


def test_numeric_error_type():
    assert issubclass(SearchRadiusError, NumericError)
