"""Dnoidal periodic travelling waves of the Benney system.

A travelling wave

    u(x, t) = exp(-i w t) exp(i c (x - c t) / 2) phi(x - c t),
    v(x, t) = n(x - c t)

reduces the system to ``phi'' + (w + c^2/4) phi = (beta - 1/c) phi^3`` with
``n = -phi^2 / c``.  Writing ``phi = sqrt(c / (1 - beta c)) * psi`` gives
``psi'' - sigma psi + psi^3 = 0`` with ``sigma = -w - c^2/4``, solved by
``psi = eta1 dn(eta1 xi / sqrt(2); k)``.  The modulus is fixed by demanding
that the fundamental period ``2 sqrt(2) K(k) / eta1`` equals ``L``.
"""

import csv
from dataclasses import asdict, dataclass

import numpy as np

from .elliptic import complete_K, complete_KE, jacobi
from .grid import GridSpec, State

__all__ = [
    "AdmissibilityError",
    "ConvergenceError",
    "PeriodicityError",
    "WaveParams",
    "WaveProfile",
    "critical_sigma",
    "solve_period_constraint",
    "make_wave",
    "wave_from_sigma",
    "sample_profile",
    "ode_residual",
    "modulated_travelling_state",
    "fundamental_period",
    "period_of_modulus",
    "write_profile_csv",
]


class AdmissibilityError(ValueError):
    """Parameters outside the admissible region of the dnoidal family."""


class ConvergenceError(RuntimeError):
    pass


class PeriodicityError(ValueError):
    """The modulated wave is not L-periodic (no integer q with 4 pi q / c = L)."""


def critical_sigma(L):
    """Lower edge ``2 pi^2 / L^2`` of the admissible sigma range."""
    return 2.0 * np.pi**2 / L**2


@dataclass(frozen=True)
class WaveParams:
    omega: float
    c: float
    beta: float
    L: float
    sigma: float
    kappa2: float
    eta1: float
    eta2: float
    kappa2c: float = None

    def __post_init__(self):
        if self.kappa2c is None:
            object.__setattr__(self, "kappa2c", 1.0 - self.kappa2)

    @property
    def kappa(self):
        return float(np.sqrt(self.kappa2))

    @property
    def amplitude_factor(self):
        """``sqrt(c / (1 - beta c))`` relating phi to the normalised profile."""
        return float(np.sqrt(self.c / (1.0 - self.beta * self.c)))

    @property
    def q(self):
        """``c L / (4 pi)``; an integer when the modulated wave is L-periodic."""
        return self.c * self.L / (4.0 * np.pi)

    @property
    def temporal_period(self):
        """Time ``L / c`` after which the profile has travelled one period."""
        return self.L / self.c

    def to_dict(self):
        return asdict(self)


@dataclass
class WaveProfile:
    phi: np.ndarray
    n: np.ndarray
    grid: GridSpec


def period_of_modulus(m, sigma, mc=None):
    """Fundamental period of ``eta1 dn(eta1 xi / sqrt 2; m)`` at fixed sigma.

    Uses ``eta1^2 = 2 sigma / (2 - m)``, which follows from
    ``eta1^2 + eta2^2 = 2 sigma`` and ``m = 1 - eta2^2 / eta1^2``.
    """
    if mc is None:
        mc = 1.0 - m
    K, _ = complete_KE(1.0 - mc, mc=mc)
    return 2.0 * K * np.sqrt(1.0 + mc) / np.sqrt(sigma)


def _period_slope_mc(mc, sigma):
    """Period and its derivative with respect to the complementary parameter."""
    m = 1.0 - mc
    K, E = complete_KE(m, mc=mc)
    s = np.sqrt(1.0 + mc)
    T = 2.0 * K * s / np.sqrt(sigma)
    dK_dm = np.pi / 8.0 if m == 0.0 else (E - mc * K) / (2.0 * m * mc)
    dT_dm = 2.0 / np.sqrt(sigma) * (dK_dm * s - K / (2.0 * s))
    return T, -dT_dm


def solve_period_constraint(L, sigma, tol=1e-13):
    """Solve ``2 sqrt(2) K(k) / eta1 = L`` for the dnoidal wave at fixed sigma.

    The period is monotone in ``m = k^2`` on ``(0, 1)``.  The root is
    bracketed and bisected in the complementary parameter ``1 - m`` (so
    steep waves with ``m`` indistinguishable from 1 in double precision
    are still resolved) down to ``tol`` and then polished by Newton.

    Returns
    -------
    eta1, eta2, kappa2 : float

    Raises
    ------
    AdmissibilityError
        If ``sigma <= 2 pi^2 / L^2``.
    ConvergenceError
        If no bracket is found (``1 - m`` below 1e-300).
    """
    eta1, eta2, m, _ = _solve_period(L, sigma, tol)
    return eta1, eta2, m


def _solve_period(L, sigma, tol=1e-13):
    L = float(L)
    sigma = float(sigma)
    if not L > 0:
        raise AdmissibilityError(f"period L must be positive, got {L}")
    sc = critical_sigma(L)
    if not sigma > sc:
        raise AdmissibilityError(
            f"sigma = {sigma!r} must exceed 2*pi^2/L^2 = {sc!r} (sigma > 2pi^2/L^2)"
        )

    # bracket in mc = 1 - m: T(mc=1) < L, T decreases in mc
    hi = 1.0
    lo = None
    for j in range(1, 301):
        cand = 10.0 ** (-j)
        if period_of_modulus(None, sigma, mc=cand) > L:
            lo = cand
            break
        hi = cand
    if lo is None:
        raise ConvergenceError(
            f"period constraint not bracketed for L={L}, sigma={sigma}; wave too steep"
        )

    while hi - lo > tol * hi:
        mid = np.sqrt(lo * hi) if hi > 4.0 * lo else 0.5 * (lo + hi)
        if period_of_modulus(None, sigma, mc=mid) > L:
            lo = mid
        else:
            hi = mid

    mc = 0.5 * (lo + hi)
    for _ in range(4):
        T, dT = _period_slope_mc(mc, sigma)
        if not dT < 0:
            break
        step = (T - L) / dT
        mc_new = mc - step
        if not (0.0 < mc_new <= 1.0) or abs(step) > 10 * tol * mc:
            break
        if abs(period_of_modulus(None, sigma, mc=mc_new) - L) > abs(T - L):
            break
        mc = mc_new

    m = 1.0 - mc
    eta1 = float(np.sqrt(2.0 * sigma / (1.0 + mc)))
    eta2 = float(eta1 * np.sqrt(mc))
    return eta1, eta2, float(m), float(mc)


def make_wave(omega, c, beta, L):
    """Build the dnoidal wave parameters for ``(omega, c, beta, L)``.

    Raises AdmissibilityError naming the violated inequality.
    """
    omega, c, beta, L = float(omega), float(c), float(beta), float(L)
    if not L > 0:
        raise AdmissibilityError(f"period must satisfy L>0, got L={L}")
    if not c > 0:
        raise AdmissibilityError(f"speed must satisfy c>0, got c={c}")
    if not 1.0 - beta * c > 0:
        raise AdmissibilityError(
            f"admissibility requires 1-beta*c>0 (1−βc>0), got 1-beta*c={1.0 - beta * c!r}"
        )
    sigma = -omega - c * c / 4.0
    sc = critical_sigma(L)
    if not sigma > sc:
        raise AdmissibilityError(
            f"admissibility requires -omega-c^2/4 > 2*pi^2/L^2, got {sigma!r} <= {sc!r}"
        )
    eta1, eta2, m, mc = _solve_period(L, sigma)
    return WaveParams(omega, c, beta, L, sigma, m, eta1, eta2, mc)


def wave_from_sigma(sigma, c, beta, L):
    """Same as make_wave, parametrised by ``sigma = -omega - c^2/4``."""
    return make_wave(-float(sigma) - float(c) ** 2 / 4.0, c, beta, L)


def profile_values(params, xi):
    """``(phi, n)`` evaluated at arbitrary points ``xi``."""
    arg = params.eta1 * np.asarray(xi, dtype=float) / np.sqrt(2.0)
    _, _, dn = jacobi(arg, params.kappa2, mc=params.kappa2c)
    phi = params.amplitude_factor * params.eta1 * dn
    n = -(params.eta1**2) / (1.0 - params.beta * params.c) * dn * dn
    return phi, n


def sample_profile(params, grid):
    """Sample ``phi`` and ``n`` on the grid points ``xi_j = j L / N``."""
    if not np.isclose(grid.L, params.L, rtol=1e-12, atol=0.0):
        raise ValueError(f"grid period {grid.L} does not match wave period {params.L}")
    phi, n = profile_values(params, grid.x)
    return WaveProfile(phi, n, grid)


def ode_residual(profile, params):
    """Sup-norm residuals of the profile ODE and of its first integral.

    Returns
    -------
    r1 : float
        ``max |phi'' + (w + c^2/4) phi - (beta - 1/c) phi^3|``.
    r2 : float
        ``max |psi'^2 - (eta1^2 - psi^2)(psi^2 - eta2^2) / 2|`` for the
        normalised profile ``psi = phi / sqrt(c / (1 - beta c))``.
    """
    g = profile.grid
    phi = profile.phi
    p = params
    d2 = g.derivative(phi, order=2)
    res1 = d2 + (p.omega + p.c**2 / 4.0) * phi - (p.beta - 1.0 / p.c) * phi**3
    psi = phi / p.amplitude_factor
    d1 = g.derivative(psi)
    res2 = d1**2 - 0.5 * (p.eta1**2 - psi**2) * (psi**2 - p.eta2**2)
    return float(np.max(np.abs(res1))), float(np.max(np.abs(res2)))


def check_q_periodic(params, tol=1e-9):
    q = params.q
    qi = round(q)
    if qi < 1 or abs(q - qi) > tol:
        raise PeriodicityError(
            f"modulated wave needs 4*pi*q/c = L for a positive integer q; "
            f"c*L/(4*pi) = {q!r}"
        )
    return int(qi)


def modulated_travelling_state(params, t, grid):
    """Exact travelling-wave solution sampled at time ``t``.

    Requires ``c L / (4 pi)`` to be a positive integer so that the carrier
    ``exp(i c x / 2)`` is L-periodic.
    """
    check_q_periodic(params)
    if not np.isclose(grid.L, params.L, rtol=1e-12, atol=0.0):
        raise ValueError(f"grid period {grid.L} does not match wave period {params.L}")
    xi = grid.x - params.c * t
    phi, n = profile_values(params, xi)
    u = np.exp(-1j * params.omega * t) * np.exp(0.5j * params.c * xi) * phi
    return State(u, n, grid, t=float(t))


def fundamental_period(params, points_per_period=256, n_periods=4):
    """Fundamental period of phi detected from its autocorrelation.

    phi is sampled over a window of ``n_periods * L`` and its circular
    autocorrelation computed by FFT.  The highest peak at a lag in
    ``(0, n_periods L / 2]`` (ties go to the shortest lag) is refined by a
    parabola through its neighbours.  A true period of ``L/2`` or ``2L``
    shows up as a peak at that lag instead.
    """
    npts = points_per_period * n_periods
    dx = params.L / points_per_period
    phi, _ = profile_values(params, np.arange(npts) * dx)
    f = phi - phi.mean()
    F = np.fft.rfft(f)
    ac = np.fft.irfft(F * np.conj(F), n=npts)
    ac = ac / ac[0]
    half = npts // 2
    lags = np.arange(1, half + 1)
    vals = ac[1 : half + 1]
    # local maxima only; the lag-0 peak shoulder is excluded
    is_peak = (vals >= ac[lags - 1]) & (vals >= ac[(lags + 1) % npts])
    cand = lags[is_peak & (vals > vals.max() - 1e-9)]
    if cand.size == 0:
        raise ConvergenceError("no autocorrelation peak found")
    j = int(cand.min())
    a, b, cc = ac[j - 1], ac[j], ac[(j + 1) % npts]
    denom = a - 2.0 * b + cc
    shift = 0.5 * (a - cc) / denom if denom != 0 else 0.0
    return (j + shift) * dx


def write_profile_csv(path, xi, values, name="value"):
    """Two-column CSV ``xi,<name>``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["xi", name])
        for a, b in zip(xi, values):
            w.writerow([repr(float(a)), repr(float(b))])


def normalized_moments(params):
    """Closed forms ``int_0^L psi^2`` and ``int_0^L psi^4`` of the normalised profile."""
    m = params.kappa2
    K, E = complete_KE(m)
    L = params.L
    m2 = 8.0 * K * E / L
    m4 = 64.0 / (3.0 * L**3) * K**3 * (2.0 * (2.0 - m) * E - (1.0 - m) * K)
    return m2, m4

