import json

import numpy as np
import pytest

from benneylab.criterion import (
    B_functional,
    V_closed,
    V_from_sigma_identity,
    V_printed,
    charges,
    charges_closed_form,
    d_gradient_fd,
    d_hessian,
    d_hessian_formula,
    d_value,
    dV_dk,
    dV_dk_printed,
    kappa_prime,
    kappa_ratio,
    report_to_json,
    sweep,
    theorem_condition,
    verdict,
    write_sweep_csv,
)
from benneylab.elliptic import complete_KE
from benneylab.grid import GridSpec
from benneylab.waves import make_wave, modulated_travelling_state, normalized_moments

TWO_PI = 2.0 * np.pi
SAMPLES = [(-3.0, 1.0, 0.0), (-2.5, 2.0, 0.0), (-3.0, 1.0, -0.5), (-2.0, 1.5, 0.1), (-5.0, 0.7, 0.3)]


@pytest.mark.parametrize("omega,c,beta", SAMPLES)
def test_charges_match_closed_forms(omega, c, beta):
    p = make_wave(omega, c, beta, TWO_PI)
    q = charges(p)
    qc = charges_closed_form(p)
    assert q.Q2 == pytest.approx(qc.Q2, rel=1e-8)
    assert q.Q1 == pytest.approx(qc.Q1, rel=1e-8)
    assert q.Q2 > 0


def test_imaginary_part_identity(wave_q1):
    # Im int u_x conj(u) = (c/2) int phi^2 for u = exp(icx/2) phi
    g = GridSpec(TWO_PI, 256)
    s = modulated_travelling_state(wave_q1, 0.0, g)
    lhs = g.integrate(np.imag(g.derivative(s.u) * np.conj(s.u)))
    rhs = 0.5 * wave_q1.c * g.integrate(np.abs(s.u) ** 2)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_Q1_beta_zero_formula(wave_moderate):
    p = wave_moderate
    g = GridSpec(p.L, 256)
    from benneylab.waves import profile_values

    phi, _ = profile_values(p, g.x)
    expected = -g.integrate(phi**4) / (4 * p.c**2) + p.c / 4 * g.integrate(phi**2)
    assert charges(p).Q1 == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("omega,c,beta", SAMPLES)
def test_gradient_identities(omega, c, beta):
    p = make_wave(omega, c, beta, TWO_PI)
    q = charges(p)
    dw, dc = d_gradient_fd(omega, c, beta, TWO_PI)
    assert dw == pytest.approx(-q.Q2, rel=1e-5)
    assert dc == pytest.approx(-q.Q1, rel=1e-5)


def test_full_energy_weight_breaks_gradient_identities():
    # the identities need the Hamiltonian E2/2, not E2
    q = charges(make_wave(-3.0, 1.0, 0.0, TWO_PI))
    dw, _ = d_gradient_fd(-3.0, 1.0, 0.0, TWO_PI, energy_weight=1.0)
    assert abs(dw + q.Q2) > 0.1 * q.Q2


def test_d_value_grid_independent():
    a = d_value(-2.5, 2.0, -0.5, TWO_PI, n_modes=256)
    b = d_value(-2.5, 2.0, -0.5, TWO_PI, n_modes=512)
    assert abs(a - b) < 1e-10


def test_moment_V_variants():
    p = make_wave(-3.0, 1.0, 0.0, TWO_PI)
    m = p.kappa2
    _, m4 = normalized_moments(p)
    assert 64 * V_closed(m) / p.L**3 == pytest.approx(m4, rel=1e-12)
    assert V_from_sigma_identity(m, p.sigma, p.L) == pytest.approx(V_closed(m), rel=1e-10)
    assert abs(V_printed(m, p.L) / V_closed(m) - 1) > 0.5


@pytest.mark.parametrize("k", [0.3, 0.7, 0.95])
def test_dV_dk(k):
    h = 1e-6
    fd = (V_closed((k + h) ** 2) - V_closed((k - h) ** 2)) / (2 * h)
    assert dV_dk(k) == pytest.approx(fd, rel=1e-7)
    assert abs(dV_dk_printed(k) / fd - 1) > 1e-3


def test_kappa_prime_positive_across_sweep():
    for sigma in np.linspace(0.55, 20, 25):
        assert kappa_prime(sigma, TWO_PI) > 0


@pytest.mark.parametrize("omega,c,beta", SAMPLES)
def test_hessian_formula_matches_finite_differences(omega, c, beta):
    rep = d_hessian(omega, c, beta, TWO_PI)
    assert rep.hessian_rel_dev < 1e-3
    assert rep.det_d == pytest.approx(rep.det_d_fd, rel=1e-3)
    assert rep.d_wc == pytest.approx(rep.d_cw, rel=1e-6)


def test_hessian_symmetry_from_charges():
    # d_wc = -dQ2/dc and d_cw = -dQ1/dw computed independently from the charges
    omega, c, beta = -2.0, 1.5, 0.1
    h = 1e-5

    def Q(w, cc):
        return charges(make_wave(w, cc, beta, TWO_PI))

    dQ2_dc = (Q(omega, c + h * c).Q2 - Q(omega, c - h * c).Q2) / (2 * h * c)
    dQ1_dw = (Q(omega + h * abs(omega), c).Q1 - Q(omega - h * abs(omega), c).Q1) / (2 * h * abs(omega))
    assert dQ2_dc == pytest.approx(dQ1_dw, rel=1e-6)


def test_printed_dV_spoils_mixed_entry():
    p = make_wave(-2.5, 2.0, 0.0, TWO_PI)
    good = d_hessian_formula(p)
    bad = d_hessian_formula(p, dV=dV_dk_printed)
    assert good[1] == pytest.approx(good[2], rel=1e-6)
    assert abs(bad[2] - bad[1]) > 1e-3 * abs(bad[1])


def test_beta_zero_sample_det_negative():
    rep = d_hessian(-3.0, 1.0, 0.0, TWO_PI, with_fd=False)
    assert rep.det_d < 0
    assert rep.B_value < 0


def test_d_ww_positive_when_factors_positive():
    for sigma in np.linspace(0.6, 10, 12):
        p = make_wave(-sigma - 0.25, 1.0, 0.0, TWO_PI)
        m, k = p.kappa2, p.kappa
        K, E = complete_KE(m)
        Kp = (E - (1 - m) * K) / (k * (1 - m))
        Ep = (E - K) / k
        kp = kappa_prime(p.sigma, TWO_PI)
        if kp > 0 and Kp * E + K * Ep > 0:
            assert d_hessian_formula(p, kp)[0] > 0


def test_B_sign_in_theorem_regimes():
    rng = np.random.default_rng(5)
    n_b = 0
    for i in range(60):
        c = rng.uniform(0.3, 2.5)
        sigma = rng.uniform(0.6, 12)
        if i % 3 == 0:
            beta = 0.0
        elif i % 3 == 1:
            beta = -rng.uniform(0.05, 2)
        else:
            # largest beta allowed by regime (b), then a random fraction of it
            hi = 0.99 / c
            while 8 * hi * sigma - 3 * c * (1 - hi * c) ** 2 > 0:
                hi *= 0.9
            beta = rng.uniform(0.05, 1.0) * hi
        assert theorem_condition(beta, sigma, c) in ("a", "b")
        n_b += theorem_condition(beta, sigma, c) == "b"
        p = make_wave(-sigma - c * c / 4, c, beta, TWO_PI)
        assert B_functional(c, p.omega, p.kappa2, beta) < 0
        assert d_hessian(p.omega, c, beta, TWO_PI, with_fd=False).det_d < 0
    assert n_b == 20


def test_kappa_ratio():
    r = kappa_ratio(np.linspace(0.01, 0.99, 99))
    assert np.all(r > 0) and np.all(r < 0.5)


def test_theorem_condition():
    assert theorem_condition(0.0, 1.0, 1.0) == "a"
    assert theorem_condition(-0.3, 1.0, 1.0) == "a"
    assert theorem_condition(0.05, 1.0, 1.0) == "b"
    assert theorem_condition(0.5, 5.0, 1.0) == "none"


def test_verdicts():
    rep = verdict(-2.5, 2.0, -0.5, TWO_PI, truncation=32)
    assert rep.verdict == "stable-by-theorem"
    assert rep.n_H == 1 and rep.p_d == 1 and rep.kappa_prime > 0
    rep = verdict(-4.0, 1.0, 0.3, TWO_PI, truncation=32)
    assert rep.condition == "none" and rep.verdict == "inconclusive"
    # det < 0 forces exactly one positive eigenvalue
    assert rep.det_d_fd < 0 and rep.p_d == 1


def test_sweep_outputs(tmp_path):
    pts = [(-2.5, 2.0, 0.0), (-3.0, 1.0, -0.5)]
    reps = sweep(pts, TWO_PI, threads=2, truncation=24)
    assert [r.verdict for r in reps] == ["stable-by-theorem"] * 2
    write_sweep_csv(tmp_path / "s.csv", reps)
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "omega,c,beta,kappa2,det_d_formula,det_d_fd,B,verdict"
    assert len(lines) == 3
    rec = report_to_json(reps[0], tmp_path / "r.json")
    assert json.loads((tmp_path / "r.json").read_text())["verdict"] == rec["verdict"]
