import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from tcts import closed_form as cf
from tcts import fock
from tcts.core import OscillatorConfig, make_spec, temperature_from_theta, theta_from_temperature
from tcts.io import dumps

coord = st.floats(-2.5, 2.5)
angles = st.floats(0.0, 1.2)
times = st.floats(-10.0, 10.0)
positive = st.floats(0.2, 5.0)


@st.composite
def specs(draw, max_amp=2.0):
    re = draw(st.floats(-max_amp, max_amp))
    im = draw(st.floats(-max_amp, max_amp))
    return make_spec(complex(re, im), draw(angles), draw(angles))


@given(specs(), coord, coord, times)
def test_density_matrix_hermitian(spec, xp, x, t):
    a = cf.density_matrix_element(xp, x, t, spec)
    b = cf.density_matrix_element(x, xp, t, spec)
    assert abs(a - b.conjugate()) <= 1e-14 * max(1.0, abs(a))


@given(specs(), coord, times)
def test_diagonal_is_position_density(spec, x, t):
    d = cf.density_matrix_element(x, x, t, spec)
    assert d.real == pytest.approx(cf.position_density(x, t, spec), rel=1e-12, abs=1e-300)
    assert abs(d.imag) <= 1e-14 * max(abs(d), 1e-300)


@given(specs(), coord, coord, times)
def test_density_matrix_bounded_by_diagonals(spec, xp, x, t):
    # |rho(x', x)|^2 <= rho(x, x) rho(x', x') for a positive operator
    off = abs(cf.density_matrix_element(xp, x, t, spec)) ** 2
    assert off <= cf.position_density(x, t, spec) * cf.position_density(xp, t, spec) * (1 + 1e-12) + 1e-300


@given(specs(), times)
def test_uncertainty_bound_and_purity(spec, t):
    r = cf.moments_report(t, spec)
    assert r.uncertainty_product >= 0.5 - 1e-15
    assert 0 < r.purity <= 1
    assert r.purity == pytest.approx(0.5 / r.uncertainty_product, rel=1e-14)
    assert r.n_var >= r.n_mean * (1 - 1e-12) - 1e-15


@given(specs(), times, times)
def test_time_independence(spec, t0, t1):
    a, b = cf.moments_report(t0, spec), cf.moments_report(t1, spec)
    for name in ("x_var", "p_var", "n_mean", "n_var", "purity", "uncertainty_product"):
        assert getattr(a, name) == getattr(b, name)


@given(specs(), times)
def test_phase_space_circle(spec, t):
    # (<x>/sqrt2)^2 + (<p>/sqrt2)^2 = e^{2 theta2} |alpha|^2 in natural units
    x, _ = cf.position_moments(t, spec)
    p, _ = cf.momentum_moments(t, spec)
    r2 = math.exp(2 * spec.theta2) * abs(spec.alpha) ** 2
    assert (x * x + p * p) / 2 == pytest.approx(r2, rel=1e-12, abs=1e-14)


@given(specs(), times)
def test_mean_amplification(spec, t):
    base = spec.replace(theta1=0.0, theta2=0.0)
    g = math.exp(spec.theta2)
    assert cf.position_moments(t, spec)[0] == pytest.approx(g * cf.position_moments(t, base)[0], rel=1e-12, abs=1e-14)
    assert cf.momentum_moments(t, spec)[0] == pytest.approx(g * cf.momentum_moments(t, base)[0], rel=1e-12, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(specs())
def test_number_distribution_normalised(spec):
    mean, var = cf.number_moments(spec)
    p = cf.number_distribution(np.arange(int(mean + 40 * math.sqrt(var) + 60)), spec)
    assert np.all(p >= 0)
    assert p.sum() == pytest.approx(1.0, abs=1e-10)


@given(specs(), angles)
def test_only_total_angle_matters_for_widths(spec, shift):
    th1, th2 = spec.theta1, spec.theta2
    moved = spec.replace(theta1=th1 + shift, theta2=th2)
    other = spec.replace(theta1=th1, theta2=th2 + shift)
    # widths depend on Theta alone; means also feel theta2
    assert cf.position_moments(0, moved)[1] == pytest.approx(cf.position_moments(0, other)[1], rel=1e-13)
    assert cf.purity(moved) == pytest.approx(cf.purity(other), rel=1e-13)


@given(specs(), times, positive, positive, positive)
def test_unit_rescaling(spec, t, mass, omega, hbar):
    osc = OscillatorConfig.custom(mass, omega, hbar)
    s = spec.replace(osc=osc)
    a, b = cf.moments_report(t, s), cf.moments_report(omega * t, spec)
    lx, lp = math.sqrt(hbar / (mass * omega)), math.sqrt(mass * hbar * omega)
    assert a.x_mean == pytest.approx(lx * b.x_mean, rel=1e-12, abs=1e-12 * lx)
    assert a.p_mean == pytest.approx(lp * b.p_mean, rel=1e-12, abs=1e-12 * lp)
    assert a.x_var == pytest.approx(lx**2 * b.x_var, rel=1e-12)
    assert a.p_var == pytest.approx(lp**2 * b.p_var, rel=1e-12)
    assert (a.n_mean, a.n_var, a.purity) == pytest.approx((b.n_mean, b.n_var, b.purity), rel=1e-14)
    x = 0.7 * lx
    assert cf.position_density(x, t, s) == pytest.approx(cf.position_density(0.7, omega * t, spec) / lx, rel=1e-11)


@given(st.floats(1e-4, 4.0))
def test_theta_temperature_round_trip(theta):
    assert theta_from_temperature(temperature_from_theta(theta, OscillatorConfig()), OscillatorConfig()) == \
        pytest.approx(theta, rel=1e-11)


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(specs(max_amp=1.0), st.floats(0.0, 7.0))
def test_oracle_agrees_on_random_points(spec, t):
    spec = spec.replace(theta1=min(spec.theta1, 0.6), theta2=min(spec.theta2, 0.4))
    state = fock.build_state_auto(spec)
    rho = fock.reduced_density(fock.evolve(state, t))
    r = rho.matrix
    assert np.max(np.abs(r - r.conj().T)) < 1e-12
    assert np.linalg.eigvalsh(r).min() > -1e-10
    got = fock.oracle_observables(rho, t=t).as_dict()
    exp = cf.moments_report(t, spec).as_dict()
    for key in exp:
        assert got[key] == pytest.approx(exp[key], rel=1e-8, abs=1e-9), key


@given(specs(), times)
def test_serialisation_is_deterministic(spec, t):
    d = cf.moments_report(t, spec).as_dict()
    assert dumps(d) == dumps(dict(d))
