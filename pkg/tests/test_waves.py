import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from benneylab.elliptic import complete_KE
from benneylab.grid import GridSpec
from benneylab.waves import (
    AdmissibilityError,
    PeriodicityError,
    check_q_periodic,
    critical_sigma,
    fundamental_period,
    make_wave,
    modulated_travelling_state,
    normalized_moments,
    ode_residual,
    period_of_modulus,
    profile_values,
    sample_profile,
    solve_period_constraint,
    wave_from_sigma,
    write_profile_csv,
)

TWO_PI = 2.0 * np.pi


def test_admissibility_messages():
    with pytest.raises(AdmissibilityError, match="1-beta\\*c>0"):
        make_wave(-3.0, 1.0, 1.0, TWO_PI)
    with pytest.raises(AdmissibilityError, match="2\\*pi\\^2/L\\^2"):
        make_wave(-0.5, 1.0, 0.0, TWO_PI)
    with pytest.raises(AdmissibilityError, match="c>0"):
        make_wave(-3.0, -1.0, 0.0, TWO_PI)
    with pytest.raises(AdmissibilityError):
        solve_period_constraint(TWO_PI, 0.4)


def test_critical_sigma():
    assert critical_sigma(TWO_PI) == pytest.approx(0.5)


@pytest.mark.parametrize("L,sigma", [(TWO_PI, 0.51), (TWO_PI, 1.5), (4.0, 3.7), (10.0, 2.0), (TWO_PI, 50.0)])
def test_period_constraint_solved(L, sigma):
    eta1, eta2, m = solve_period_constraint(L, sigma)
    assert eta1**2 + eta2**2 == pytest.approx(2 * sigma, rel=1e-13)
    p = wave_from_sigma(sigma, 1.0, 0.0, L)
    assert eta2 / eta1 == pytest.approx(np.sqrt(p.kappa2c), rel=1e-10)
    T = period_of_modulus(p.kappa2, sigma, mc=p.kappa2c)
    assert T == pytest.approx(L, rel=1e-12)


def test_period_constraint_matches_quadrature():
    # independent period from the first-order ODE: T = 2 int_{eta2}^{eta1} dpsi / psi'
    p = wave_from_sigma(1.2, 1.0, 0.0, TWO_PI)
    e1, e2 = p.eta1, p.eta2

    def integrand(th):
        # psi^2 = e1^2 cos^2 th + e2^2 sin^2 th removes the endpoint singularities
        psi = np.sqrt(e1**2 * np.cos(th) ** 2 + e2**2 * np.sin(th) ** 2)
        return np.sqrt(2.0) / psi

    T = 2 * integrate.quad(integrand, 0, np.pi / 2, epsabs=0, epsrel=1e-13)[0]
    assert T == pytest.approx(TWO_PI, rel=1e-11)


def test_residuals_small(wave_q1):
    prof = sample_profile(wave_q1, GridSpec(TWO_PI, 512))
    r1, r2 = ode_residual(prof, wave_q1)
    assert r1 < 1e-8 and r2 < 1e-8


def test_residual_converges_spectrally_when_underresolved():
    # a steep wave: the residual drops by orders of magnitude per doubling
    p = wave_from_sigma(50.0, 1.0, 0.0, TWO_PI)
    r = [ode_residual(sample_profile(p, GridSpec(TWO_PI, n)), p)[0] for n in (64, 128, 256)]
    assert r[1] < 1e-2 * r[0] and r[2] < 1e-4 * r[1]


def test_profile_shape(wave_moderate):
    p = wave_moderate
    phi, n = profile_values(p, np.array([0.0, p.L / 2]))
    A = p.amplitude_factor
    assert phi[0] == pytest.approx(A * p.eta1, rel=1e-14)
    assert phi[1] == pytest.approx(A * p.eta2, rel=1e-8)
    assert np.allclose(n, -phi**2 / p.c, rtol=1e-14)


def test_fundamental_period(wave_q1):
    assert fundamental_period(wave_q1) == pytest.approx(TWO_PI, rel=1e-10)


def test_kappa_strictly_increasing():
    for L in (TWO_PI, 10.0):
        sig = critical_sigma(L) * np.linspace(1.01, 20, 40)
        k2 = [solve_period_constraint(L, s)[2] for s in sig]
        kc = [wave_from_sigma(s, 1.0, 0.0, L).kappa2c for s in sig]
        assert np.all(np.diff(k2) >= 0)
        assert np.all(np.diff(kc) < 0)


def test_moments_against_quadrature(wave_moderate):
    p = wave_moderate
    m2, m4 = normalized_moments(p)
    f2 = integrate.quad(lambda x: (profile_values(p, x)[0] / p.amplitude_factor) ** 2, 0, p.L,
                        epsabs=0, epsrel=1e-13, limit=200)[0]
    f4 = integrate.quad(lambda x: (profile_values(p, x)[0] / p.amplitude_factor) ** 4, 0, p.L,
                        epsabs=0, epsrel=1e-13, limit=200)[0]
    assert m2 == pytest.approx(f2, rel=1e-10)
    assert m4 == pytest.approx(f4, rel=1e-10)
    K, E = complete_KE(p.kappa2)
    assert m2 == pytest.approx(8 * K * E / p.L, rel=1e-14)


def test_q_periodicity(wave_q1):
    assert check_q_periodic(wave_q1) == 1
    with pytest.raises(PeriodicityError):
        check_q_periodic(make_wave(-3.0, 1.3, 0.0, TWO_PI))


def test_modulated_state_is_travelling(wave_q1):
    g = GridSpec(TWO_PI, 128)
    s0 = modulated_travelling_state(wave_q1, 0.0, g)
    s1 = modulated_travelling_state(wave_q1, wave_q1.temporal_period, g)
    # after one temporal period the profile is back, up to the phase exp(-i omega L/c)
    phase = np.exp(-1j * wave_q1.omega * wave_q1.temporal_period)
    assert np.allclose(s1.u, phase * s0.u, atol=1e-12)
    assert np.allclose(s1.v, s0.v, atol=1e-12)


def test_grid_mismatch_rejected(wave_q1):
    with pytest.raises(ValueError):
        sample_profile(wave_q1, GridSpec(5.0, 64))


def test_csv_writer(tmp_path):
    path = tmp_path / "p.csv"
    write_profile_csv(path, [0.0, 0.5], [1.0, 2.0], name="phi")
    assert path.read_text() == "xi,phi\n0.0,1.0\n0.5,2.0\n"


@settings(max_examples=30, deadline=None)
@given(L=st.floats(2.0, 30.0), ratio=st.floats(1.001, 30.0), c=st.floats(0.1, 3.0),
       bc=st.floats(-2.0, 0.9))
def test_construction_property(L, ratio, c, bc):
    sigma = ratio * critical_sigma(L)
    p = wave_from_sigma(sigma, c, bc / c, L)
    assert 0.0 < p.kappa2 < 1.0 or p.kappa2c > 0
    assert p.eta1 > p.eta2 >= 0.0
    assert period_of_modulus(p.kappa2, sigma, mc=p.kappa2c) == pytest.approx(L, rel=1e-11)
