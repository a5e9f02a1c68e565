import math

import numpy as np
import pytest
from scipy.sparse.linalg import expm_multiply
import scipy.sparse as sp

from tcts import closed_form as cf
from tcts import fock
from tcts.core import OscillatorConfig, ValidationError, make_spec
from tcts.fock import CutoffTooSmallError

TH_HALF = math.atanh(0.5)
TH_THIRD = math.asinh(math.sqrt(1.0 / 3.0))
BOX = make_spec(1 + 0.5j, 0.5493, 0.3)


def physical_number(state):
    rho = fock.reduced_density(state).matrix
    return float(np.diag(rho).real @ np.arange(state.cutoff))


def test_ladder_matrices():
    a, ad = fock.ladder_matrices(10)
    vac = np.zeros(10)
    vac[0] = 1
    assert np.all(a @ vac == 0)
    e3 = np.eye(10)[3]
    np.testing.assert_allclose((ad @ a) @ e3, 3 * e3)
    comm = (a @ ad - ad @ a).toarray()
    np.testing.assert_allclose(comm[:-1, :-1], np.eye(9), atol=1e-15)
    assert comm[-1, -1] == pytest.approx(-9.0)
    assert (ad - a.conj().T).nnz == 0
    with pytest.raises(ValidationError):
        fock.ladder_matrices(1)


def test_zero_displacement_is_bitwise_identity():
    s = fock.apply_thermal(0.4, fock.vacuum(16))
    assert fock.apply_displacement(0, s) is s
    assert fock.apply_thermal(0.0, s) is s
    assert fock.evolve(s, 0.0) is s


def test_displacement_poisson():
    s = fock.apply_displacement(1.0, fock.vacuum(32))
    assert s.norm2 == pytest.approx(1.0, abs=1e-12)
    p = np.abs(s.amplitudes[:, 0]) ** 2
    assert p[0] == pytest.approx(math.exp(-1), abs=1e-12)
    n = np.arange(20)
    np.testing.assert_allclose(p[:20], [math.exp(-1) / math.factorial(k) for k in n], atol=1e-13)
    assert physical_number(s) == pytest.approx(1.0, abs=1e-11)


def test_displacement_tilde_uses_conjugate():
    alpha = 0.7 - 0.4j
    s = fock.apply_displacement(alpha, fock.vacuum(32), "tilde")
    amps = s.amplitudes[0, :]
    # coherent state with amplitude conj(alpha) on the tilde mode
    expected = [math.exp(-abs(alpha) ** 2 / 2) * np.conj(alpha) ** k / math.sqrt(math.factorial(k)) for k in range(15)]
    np.testing.assert_allclose(amps[:15], expected, atol=1e-13)
    with pytest.raises(ValueError):
        fock.apply_displacement(1.0, s, "other")


def test_displacement_inverse():
    s = fock.apply_displacement(1.3 + 0.4j, fock.vacuum(48))
    back = fock.apply_displacement(-(1.3 + 0.4j), s)
    np.testing.assert_allclose(back.amplitudes, fock.vacuum(48).amplitudes, atol=1e-12)


def test_displacement_matches_scipy_expm_multiply():
    N, alpha = 40, 0.9 + 0.6j
    a, ad = fock.ladder_matrices(N)
    G = sp.csr_matrix(alpha * ad - np.conj(alpha) * a)
    v = np.zeros(N, dtype=complex)
    v[0] = 1
    ref = expm_multiply(G, v)
    ours = fock.apply_displacement(alpha, fock.vacuum(N)).amplitudes[:, 0]
    np.testing.assert_allclose(ours, ref, atol=1e-13)


def test_thermal_vacuum_amplitudes():
    s = fock.apply_thermal(0.5, fock.vacuum(40))
    c = s.amplitudes
    n = np.arange(11)
    np.testing.assert_allclose(np.diag(c)[:11], np.tanh(0.5) ** n / np.cosh(0.5), atol=1e-12)
    off = c - np.diag(np.diag(c))
    assert np.max(np.abs(off)) < 1e-14


def test_thermal_vacuum_occupancy():
    s = fock.apply_thermal(TH_HALF, fock.vacuum(40))
    assert physical_number(s) == pytest.approx(1.0 / 3.0, abs=1e-10)


def test_thermal_rejects_negative():
    with pytest.raises(ValidationError):
        fock.apply_thermal(-0.1, fock.vacuum(16))


def test_bogoliubov_composition():
    N = 64
    two = fock.apply_thermal(0.3, fock.apply_thermal(0.5493, fock.vacuum(N)))
    one = fock.apply_thermal(0.8493, fock.vacuum(N))
    assert np.max(np.abs(two.amplitudes - one.amplitudes)) < 1e-10


def test_build_state_coherent_product():
    alpha = 1 + 0.5j
    s = fock.build_state(make_spec(alpha, 0, 0), 32)
    c = s.amplitudes
    k = np.arange(32)
    from_gamma = np.exp(-abs(alpha) ** 2 / 2 - 0.5 * np.array([math.lgamma(j + 1) for j in k]))
    phys = from_gamma * alpha**k
    tilde = from_gamma * np.conj(alpha) ** k
    np.testing.assert_allclose(c, np.outer(phys, tilde), atol=1e-12)
    assert physical_number(s) == pytest.approx(1.25, abs=1e-10)


def test_build_state_thermal_occupancy():
    s = fock.build_state(make_spec(0, 0.5493, 0.3), 64)
    assert physical_number(s) == pytest.approx(math.sinh(0.8493) ** 2, abs=1e-9)


def test_mean_amplitude_amplified_by_second_stage():
    s = fock.build_state(BOX, 64)
    a, _ = fock.ladder_matrices(64)
    rho = fock.reduced_density(s).matrix
    mean_a = np.trace(rho @ a.toarray())
    assert mean_a == pytest.approx((1 + 0.5j) * math.exp(0.3), abs=1e-9)


def test_norm_preserved_over_pipeline():
    s = fock.build_state(BOX, 64)
    assert s.norm2 == pytest.approx(1.0, abs=1e-12)
    assert s.tail_mass < 1e-10


def test_evolution_full_period_is_identity():
    s = fock.build_state(BOX, 64)
    back = fock.evolve(s, 2 * math.pi)
    np.testing.assert_allclose(back.amplitudes, s.amplitudes, atol=1e-14)
    osc = OscillatorConfig.custom(1.0, 2.5, 1.0)
    back = fock.evolve(s, 2 * math.pi / 2.5, osc)
    np.testing.assert_allclose(back.amplitudes, s.amplitudes, atol=1e-13)


def test_evolved_mean_position_trajectory():
    s = fock.build_state(BOX, 64)
    for t in np.linspace(0, 2 * math.pi, 8):
        rho = fock.reduced_density(fock.evolve(s, t))
        x_mean = fock.oracle_observables(rho, t=t).x_mean
        expected = math.sqrt(0.5) * math.exp(0.3) * 2 * ((1 + 0.5j) * np.exp(-1j * t)).real
        assert x_mean == pytest.approx(expected, abs=1e-9)


def test_evolution_keeps_diagonal_and_rotates_coherences():
    s = fock.build_state(BOX, 64)
    r0 = fock.reduced_density(s).matrix
    t = 0.7
    rt = fock.reduced_density(fock.evolve(s, t)).matrix
    np.testing.assert_allclose(np.diag(rt), np.diag(r0), atol=1e-15)
    m = np.arange(64)
    np.testing.assert_allclose(rt, r0 * np.exp(-1j * t * (m[:, None] - m[None, :])), atol=1e-13)


def test_reduced_density_health():
    s = fock.build_state(make_spec(2j, 0.5493061, 0.3), 72)
    rho = fock.reduced_density(s)
    r = rho.matrix
    assert np.max(np.abs(r - r.conj().T)) < 1e-12
    assert np.linalg.eigvalsh(r).min() > -1e-10
    assert rho.trace == pytest.approx(1.0 - 0.0, abs=1e-10)


def test_pure_state_reduced_density():
    r = fock.reduced_density(fock.build_state(make_spec(1 + 0.5j, 0, 0), 32)).matrix
    np.testing.assert_allclose(r @ r, r, atol=1e-12)
    assert fock.oracle_observables(fock.ReducedDensity(32, r)).purity == pytest.approx(1.0, abs=1e-12)


def test_thermal_purity():
    rho = fock.reduced_density(fock.build_state(make_spec(0, TH_THIRD, 0), 64))
    assert fock.oracle_observables(rho).purity == pytest.approx(0.6, abs=1e-9)


def test_reduced_diagonal_matches_number_distribution():
    rho = fock.reduced_density(fock.build_state(BOX, 64)).matrix
    n = np.arange(61)
    np.testing.assert_allclose(np.diag(rho).real[:61], cf.number_distribution(n, BOX), atol=1e-9)


def test_oracle_observables_vacuum_and_coherent():
    vac = fock.reduced_density(fock.vacuum(16))
    r = fock.oracle_observables(vac)
    assert r.x_var == pytest.approx(0.5) and r.p_var == pytest.approx(0.5) and r.n_mean == 0
    coh = fock.reduced_density(fock.build_state(make_spec(1, 0, 0), 32))
    r = fock.oracle_observables(coh)
    assert r.x_mean == pytest.approx(math.sqrt(2), abs=1e-10)
    assert r.n_var == pytest.approx(1.0, abs=1e-10)


def test_oracle_matches_closed_form_report():
    rho = fock.reduced_density(fock.evolve(fock.build_state(BOX, 64), 0.7))
    got = fock.oracle_observables(rho, t=0.7).as_dict()
    exp = cf.moments_report(0.7, BOX).as_dict()
    for key, val in exp.items():
        assert got[key] == pytest.approx(val, rel=1e-8, abs=1e-12), key


def test_oracle_densities_vacuum():
    vac = fock.reduced_density(fock.vacuum(16))
    assert fock.oracle_position_density(vac, 0.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-14)
    assert fock.oracle_momentum_density(vac, 0.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-14)
    assert fock.oracle_density_element(vac, 0.0, 0.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-14)


def test_oracle_densities_match_closed_forms():
    t = 0.7
    rho = fock.reduced_density(fock.evolve(fock.build_state(BOX, 64), t))
    mx, vx = cf.position_moments(t, BOX)
    mp, vp = cf.momentum_moments(t, BOX)
    xs = mx + math.sqrt(vx) * np.linspace(-4, 4, 11)
    ps = mp + math.sqrt(vp) * np.linspace(-4, 4, 11)
    np.testing.assert_allclose(fock.oracle_position_density(rho, xs), cf.position_density(xs, t, BOX), atol=1e-8)
    np.testing.assert_allclose(fock.oracle_momentum_density(rho, ps), cf.momentum_density(ps, t, BOX), atol=1e-8)
    g = mx + math.sqrt(vx) * np.array([-1.0, 0.0, 1.0])
    XP, X = np.meshgrid(g, g, indexing="ij")
    np.testing.assert_allclose(fock.oracle_density_element(rho, XP, X), cf.density_matrix_element(XP, X, t, BOX),
                               atol=1e-8)


def test_choose_cutoff_floor():
    assert fock.choose_cutoff(make_spec(0, 0, 0)) == 16


def test_choose_cutoff_validated_by_tail():
    for spec, eps in ((BOX, 1e-10), (make_spec(2j, 0.6, 0.6), 1e-12)):
        N = fock.choose_cutoff(spec, eps)
        s = fock.build_state(spec, N, eps)
        assert s.tail_mass < eps


def test_choose_cutoff_errors():
    with pytest.raises(ValidationError):
        fock.choose_cutoff(BOX, 0.0)
    with pytest.raises(ValidationError) as exc:
        fock.choose_cutoff(make_spec(20, 1.5, 1.0))
    assert exc.value.field == "cutoff"


def test_cutoff_too_small_carries_suggestion():
    spec = make_spec(2j, 0.5493061, 0.3)
    with pytest.raises(CutoffTooSmallError) as exc:
        fock.build_state(spec, 24)
    assert exc.value.suggested > 24
    assert exc.value.field == "cutoff"
    s = fock.build_state(spec, exc.value.suggested + 16)
    assert s.tail_mass < 1e-10
    with pytest.raises(CutoffTooSmallError):
        fock.build_state(spec, 4)
    with pytest.raises(ValidationError):
        fock.build_state(spec, 300)


def test_build_state_auto_grows():
    spec = make_spec(2j, 0.5493061, 0.3)
    s = fock.build_state_auto(spec, N=24)
    assert s.cutoff > 24 and s.tail_mass < 1e-10


def test_doubling_cutoff_changes_little():
    small = fock.build_state(BOX, 64)
    big = fock.build_state(BOX, 128)
    a = fock.oracle_observables(fock.reduced_density(small)).as_dict()
    b = fock.oracle_observables(fock.reduced_density(big)).as_dict()
    bound = 10 * max(small.tail_mass, 1e-15) + 1e-12
    for key in a:
        assert abs(a[key] - b[key]) / max(1.0, abs(b[key])) <= bound * 100, key
