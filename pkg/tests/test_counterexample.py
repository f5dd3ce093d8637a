import numpy as np
import pytest

from hjlab.counterexample import (
    LatticeDatumSpec,
    blowup_exponent,
    build_datum,
    curve_length,
    envelope,
    gamma_curve,
    legendre_discrepancy,
    solve_and_measure,
)
from hjlab.errors import InputError, RangeError
from hjlab.hopflax import hopf_lax_points


@pytest.fixture(scope="module")
def coarse():
    spec = LatticeDatumSpec(0.04, 0.25)
    return spec, build_datum(spec)


def test_gamma_curve_endpoints():
    d = 0.01
    qbar = (d, d ** (2 / 3))
    assert gamma_curve(qbar, 0.0) == pytest.approx(d ** (2 / 3), rel=1e-12)
    assert gamma_curve(qbar, d) == pytest.approx(0.0, abs=1e-15)
    assert curve_length(qbar) > d ** (2 / 3)
    with pytest.raises(InputError):
        gamma_curve((d, 0.0), 0.0)


def test_gamma_curve_is_equal_cost_set():
    d = 0.02
    qbar = np.array([d, d ** (2 / 3)])
    s = np.linspace(0, d, 11)
    q = np.stack([s, gamma_curve(qbar, s)], axis=1)
    cost = lambda Q: np.abs(Q[:, 0]) ** (4 / 3) + Q[:, 1] ** 2  # noqa: E731
    assert np.allclose(cost(q), cost(q - qbar), atol=1e-14)


def test_spec_validation():
    with pytest.raises(InputError):
        LatticeDatumSpec(0.3, 0.25)
    with pytest.raises(InputError):
        LatticeDatumSpec(0.01, 0.25, "other")
    s = LatticeDatumSpec(0.01, 0.25)
    # integer number of grid steps per lattice pitch
    ratio = s.pitch / s.spacing
    assert np.allclose(ratio, np.round(ratio))


def test_envelope_vanishes_at_sites():
    spec = LatticeDatumSpec(0.02, 0.25)
    sites = np.array([[0, 0], [2, 0], [1, 1], [-3, 5]]) * spec.pitch
    assert np.allclose(envelope(spec, sites), 0)
    assert np.all(envelope(spec, np.random.default_rng(0).uniform(-0.2, 0.2, (100, 2))) >= 0)


def test_datum_at_sites_and_support(coarse):
    spec, lat = coarse
    sites = np.array([[0, 0], [2, 0], [1, 1], [-1, -1], [2, 2]]) * spec.pitch
    v = lat.datum(sites)
    assert np.all(v >= -1e-15)
    assert np.allclose(v, 0, atol=1e-12)  # the sup is attained at x = y_i
    out = np.array([[0.6, 0.0], [-0.51, 0.3], [0.2, 0.7], [2.0, -2.0]])
    assert np.all(lat.datum(out) == 0)


def test_datum_lipschitz_audit():
    spec = LatticeDatumSpec(0.01, 0.25)
    lat = build_datum(spec)
    audit = lat.datum.audit((-0.6, -0.6), (0.6, 0.6))
    assert audit["lipschitz_quotient"] <= lat.M_delta * (1 + 1e-3)
    assert audit["bound_ok"]


def test_slope_vanishes_at_sites(coarse):
    spec, lat = coarse
    sites = np.array([[0, 0], [2, 0], [1, 1], [-1, 1]]) * spec.pitch
    _, Y = hopf_lax_points(lat.datum, spec.view(), 1.0, sites, coarse_step=spec.spacing, anchor=np.zeros(2),
                           refine=False)
    assert np.allclose(Y, sites, atol=1e-12)


def test_measurement_coarse(coarse):
    spec, lat = coarse
    m = solve_and_measure(spec, lattice=lat)
    assert m.cell_identity >= 0.9
    assert m.tv_b > m.tv_b_jump > 0
    assert m.meta["value_error"] < 1e-3


def test_conjugate_variant_precondition():
    with pytest.raises(RangeError):
        build_datum(LatticeDatumSpec(0.04, 0.25, "conjugate"))
    m = solve_and_measure(LatticeDatumSpec(0.04, 0.5, "conjugate"))
    assert m.cell_identity >= 0.9


def test_grid_resolution_precondition(coarse):
    from hjlab.grid import GridSpec

    spec, lat = coarse
    with pytest.raises(InputError):
        solve_and_measure(spec, GridSpec.box([-0.25, -0.25], [0.25, 0.25], 11), lat)


def test_blowup_arguments():
    with pytest.raises(InputError):
        blowup_exponent(0.25, [0.04, 0.02, 0.01])
    with pytest.raises(InputError):
        blowup_exponent(0.25, [0.01, 0.02, 0.04, 0.08])


def test_legendre_discrepancy():
    out = legendre_discrepancy()
    assert out["conjugate_error"] < 1e-7
    assert out["stated_error"] > 1.0
