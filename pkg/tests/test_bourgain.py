import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from benneylab.bourgain import (
    DTAU,
    NormRequest,
    SymbolGrid,
    TruncationWarning,
    check_dispersion,
    conjugate,
    derivative,
    dispersion_u2,
    dispersion_uv,
    fit_slope,
    hr_distance2,
    illposedness_experiment,
    indicator_symbol,
    necessity_sweep_derivative,
    necessity_sweep_uv,
    norm,
    product,
    report_to_json,
    solver_crosscheck,
    wellposed_region,
    write_sweep_csv,
)

SMALL_N = (16, 32, 64, 128, 256)


def _cell(n, tau, value=1.0, n_max=8):
    g = SymbolGrid.for_modes(n_max)
    g.add(n, int(round(tau / g.dtau)), [value])
    return g


def test_zero_symbol_has_zero_norm():
    g = SymbolGrid.for_modes(8)
    for flavor in ("X_sb", "Hb_Hs", "X_mod", "Y_mod"):
        assert norm(g, NormRequest(1.0, 0.6, flavor)) == 0.0


def test_one_cell_norms_by_hand():
    # one cell of height 1 at (n, tau): weight (1+|n|)^r (1+|modulation|)^b sqrt(dtau)
    g = _cell(3, 0.0)
    assert norm(g, NormRequest(0.7, 0.6, "X_sb")) == pytest.approx(4**0.7 * 10**0.6 * 0.5, rel=1e-14)
    assert norm(g, NormRequest(0.7, 0.6, "Hb_Hs")) == pytest.approx(4**0.7 * 0.5, rel=1e-14)
    # modified flavors: b = 1/2 plus the l^2 L^1 term (1+|n|)^r * dtau
    assert norm(g, NormRequest(0.7, 0.9, "X_mod")) == pytest.approx(
        4**0.7 * 10**0.5 * 0.5 + 4**0.7 * 0.25, rel=1e-14
    )
    assert norm(g, NormRequest(0.7, 0.9, "Y_mod")) == pytest.approx(
        4**0.7 * 0.5 + 4**0.7 * 0.25, rel=1e-14
    )


@settings(max_examples=30, deadline=None)
@given(
    lam=st.floats(0.01, 100.0),
    r=st.floats(-1.0, 2.0),
    b=st.floats(0.0, 1.0),
    flavor=st.sampled_from(["X_sb", "Hb_Hs", "X_mod", "Y_mod"]),
)
def test_norm_homogeneous(lam, r, b, flavor):
    g = SymbolGrid.for_modes(6)
    indicator_symbol(g, 4, "X", 1.0)
    indicator_symbol(g, -2, "H", 0.5)
    req = NormRequest(r, b, flavor)
    assert norm(g.scaled(lam), req) == pytest.approx(lam * norm(g, req), rel=1e-12)


def test_norm_monotone_in_r_and_b():
    g = SymbolGrid.for_modes(6)
    indicator_symbol(g, 5, "H", 1.0)
    rs = [norm(g, NormRequest(r, 0.5)) for r in (-1, 0, 0.5, 1, 2)]
    bs = [norm(g, NormRequest(1.0, b)) for b in (0, 0.25, 0.5, 1)]
    assert np.all(np.diff(rs) > 0) and np.all(np.diff(bs) > 0)


def test_indicator_support():
    g = SymbolGrid.for_modes(4)
    indicator_symbol(g, 3, "X", 1.0)
    (n, tau, v), = list(g.items())
    assert n == 3 and tau[0] == -10.0 and tau[-1] == -8.0 and tau.size == 9
    assert np.all(v == 1)
    with pytest.raises(ValueError):
        indicator_symbol(g, 1, "Y")


def test_product_of_cells_and_mass():
    f = _cell(2, -4.0, 2.0)
    g = _cell(-5, 1.0, 3.0)
    p = product(f, g)
    (n, tau, v), = list(p.items())
    assert n == -3 and tau[0] == -3.0 and v[0] == pytest.approx(6.0 * DTAU)
    # total mass of a convolution is the product of masses
    a = SymbolGrid.for_modes(4)
    indicator_symbol(a, 1, "X")
    indicator_symbol(a, -2, "H", 0.5)
    b = SymbolGrid.for_modes(4)
    indicator_symbol(b, 3, "H")

    def mass(s):
        return sum(v.sum() for _, _, v in s.items()) * DTAU

    assert mass(product(a, b)) == pytest.approx(mass(a) * mass(b), rel=1e-14)


def test_conjugate_and_derivative_symbols():
    f = SymbolGrid.for_modes(4)
    f.add(2, -17, np.array([1 + 2j, 3j, 1.0]))
    c = conjugate(f)
    (n, tau, v), = list(c.items())
    assert n == -2 and np.allclose(tau, [3.75, 4.0, 4.25]) and np.allclose(v, [1.0, -3j, 1 - 2j])
    assert norm(conjugate(c), NormRequest(0.3)) == norm(f, NormRequest(0.3))
    d = derivative(f)
    assert np.allclose(d.strips[2][1], 2j * f.strips[2][1])
    # X^{s,b} norm of the derivative of a single-mode symbol scales by |n|
    assert norm(d, NormRequest(0.0)) == pytest.approx(2 * norm(f, NormRequest(0.0)))


def test_dense_matches_sparse():
    g = SymbolGrid(3, 12.0)
    indicator_symbol(g, 2, "X")
    ns, taus, dense = g.to_dense()
    assert dense.sum() == 9 and dense[ns == 2][0][taus == -4.0] == 1


def test_truncation_warning():
    g = SymbolGrid(2, 5.0)
    g.add(1, 19, [1.0, 1.0])
    with pytest.warns(TruncationWarning, match="enlarge tau_max"):
        norm(g, NormRequest(0.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        norm(_cell(1, 0.0), NormRequest(0.0))


def test_grid_validation():
    with pytest.raises(ValueError, match="outside"):
        SymbolGrid(2, 5.0, strips={3: (0, np.ones(1))})
    with pytest.raises(ValueError, match="flavor"):
        NormRequest(0.0, 0.5, "Z")


@settings(max_examples=50, deadline=None)
@given(
    n=st.integers(-300, 300),
    n1=st.integers(-300, 300),
    tau=st.floats(-1e5, 1e5),
    tau1=st.floats(-1e5, 1e5),
)
def test_dispersion_identities(n, n1, tau, tau1):
    for which in ("uv", "u2"):
        check_dispersion(which, n, n1, tau, tau1)
    assert dispersion_uv(n, n1, tau, tau1)[1] == n * n - n1 * n1
    assert dispersion_u2(n, n1, tau, tau1)[1] == n1 * n1 - (n - n1) ** 2


def test_check_dispersion_raises():
    with pytest.raises(AssertionError):
        check_dispersion("uv", 3, 1, np.nan, 0.0)


def test_fit_slope_exact_power():
    N = np.array([16, 32, 64, 128, 256])
    assert fit_slope(N, 3.0 * N**1.7) == pytest.approx(1.7, abs=1e-12)


@pytest.mark.parametrize("r,s", [(1.0, 0.0), (0.0, 0.0), (0.5, 0.0), (1.5, 0.3), (0.75, 2 * 0.75 - 1)])
def test_uv_slopes(r, s):
    for res in necessity_sweep_uv(SMALL_N, r, s):
        assert res.max_deviation < 0.02, (res.pair, res.slopes, res.targets)


@pytest.mark.parametrize("r,s", [(1.0, 0.0), (0.0, 0.0), (1.2, 0.7), (0.5, -0.5)])
def test_derivative_slopes(r, s):
    for res in necessity_sweep_derivative(SMALL_N, r, s):
        assert res.max_deviation < 0.02, (res.pair, res.slopes, res.targets)


def test_sweep_targets_and_threads():
    a = necessity_sweep_uv(SMALL_N, 1.3, 0.2)
    b = necessity_sweep_uv(SMALL_N, 1.3, 0.2, threads=3)
    assert np.allclose([x.targets for x in a], [(1.3, 1.3, 0.2), (0.3, 0.0, 0.2)])
    assert a[0].norm_product == b[0].norm_product
    d = necessity_sweep_derivative(SMALL_N, 1.3, 0.2)
    assert np.allclose([x.targets for x in d], [(1.2, 1.3, 1.3), (0.2, 0.0, 1.3)])


def test_sweep_csv(tmp_path):
    res = necessity_sweep_uv(SMALL_N, 1.0, 0.0)[0]
    write_sweep_csv(tmp_path / "s.csv", res)
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "N,norm_product,norm_u,norm_v,fitted_slope"
    assert len(lines) == len(SMALL_N) + 1
    assert json.loads(json.dumps(res.to_dict()))["pair"] == 1


@pytest.mark.parametrize(
    "r,s,expected",
    [(1.0, 0.0, "in_W"), (0.5, 0.0, "in_W"), (-0.1, 3.0, "illposed_zone"), (1.0, 1.5, "outside_W"),
     (0.4, 0.0, "outside_W"), (2.0, 1.0, "in_W"), (2.0, 0.5, "outside_W")],
)
def test_wellposed_region(r, s, expected):
    assert wellposed_region(r, s) == expected


def test_illposed_equal_amplitudes_give_zero_distance():
    rep = illposedness_experiment(alpha1=1.0, alpha2=1.0, N=32)
    assert rep.initial_u_dist2 == 0 and rep.initial_v_dist2 == 0 and rep.final_u_dist2 == 0


def test_illposed_separation_and_decay():
    reps = [illposedness_experiment(N=N) for N in (16, 32, 64, 128, 256)]
    assert all(r.separated for r in reps)
    init = [r.initial_u_dist2 + r.initial_v_dist2 for r in reps]
    assert np.all(np.diff(init) < 0) and init[-1] < 1e-2
    t = [r.t_star for r in reps]
    assert np.all(np.diff(t) < 0)
    # H^r norm of u0 is alpha by construction
    r0 = reps[0]
    assert r0.a1**2 * (1 + r0.N**2) ** r0.r == pytest.approx(r0.alpha1**2)


@pytest.mark.parametrize(
    "kw,match",
    [({"r": 0.1}, "r < 0"), ({"nu": -0.1}, "nu > 0"), ({"nu": 0.6}, "nu \\+ r < 0"),
     ({"beta": 0.0}, "beta != 0"), ({"delta": 0.0}, "delta > 0"), ({"N": 0}, "N >= 1"),
     ({"delta": 50.0, "N": 2}, "alpha2\\^2 >= 0")],
)
def test_illposed_preconditions(kw, match):
    with pytest.raises(ValueError, match=match):
        illposedness_experiment(**kw)


def test_hr_distance2():
    x = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    assert hr_distance2(2 * np.exp(5j * x), np.zeros(64), -0.5) == pytest.approx(4 / np.sqrt(26))


def test_solver_crosscheck(tmp_path):
    rep = solver_crosscheck(illposedness_experiment(N=16), n_modes=64, dt=2e-4)
    assert rep.solver_abs_error < 1e-6
    with pytest.raises(ValueError, match="resolved"):
        solver_crosscheck(illposedness_experiment(N=32), n_modes=64)
    rec = report_to_json(rep, tmp_path / "r.json")
    assert json.loads((tmp_path / "r.json").read_text())["N"] == rec["N"] == 16
