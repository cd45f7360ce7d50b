"""Stability quantities for the dnoidal family: charges, d(omega, c), d'' and the verdict.

The wave is ``Phi = (exp(i c x / 2) phi, n)`` with ``phi = sqrt(c/(1-beta c)) psi``,
``psi = eta1 dn(eta1 x / sqrt(2); k)`` and ``n = -phi^2 / c``.  With
``sigma = -omega - c^2/4`` fixed by ``(omega, c)`` and the period ``L`` held
fixed, the modulus ``k`` is a function of ``sigma`` alone.

Everything is available two ways: by spectral quadrature of the sampled
profile (the reference) and from closed forms in ``K(k)``, ``E(k)``.
"""

import csv
import json
from dataclasses import asdict, dataclass

import numpy as np

from .elliptic import complete_KE, jacobi
from .grid import GridSpec
from .waves import make_wave, solve_period_constraint

__all__ = [
    "ChargeValues",
    "StabilityReport",
    "ENERGY_WEIGHT",
    "charges",
    "charges_closed_form",
    "d_value",
    "d_gradient_fd",
    "kappa_prime",
    "V_closed",
    "V_printed",
    "V_from_sigma_identity",
    "dV_dk",
    "dV_dk_printed",
    "d_hessian_formula",
    "d_hessian_fd",
    "d_hessian",
    "B_functional",
    "kappa_ratio",
    "theorem_condition",
    "verdict",
    "sweep",
    "write_sweep_csv",
    "report_to_json",
]

# weight of the E2 integral in d = w E2 - c Q1 - omega Q2.  The Hamiltonian
# whose gradient pairs with J = diag(-i, 2 d/dx) and the charges Q1, Q2 is
# E2 / 2, so only w = 1/2 makes d_omega = -Q2 and d_c = -Q1 hold exactly.
ENERGY_WEIGHT = 0.5


@dataclass(frozen=True)
class ChargeValues:
    Q1: float
    Q2: float
    E: float


@dataclass
class StabilityReport:
    omega: float
    c: float
    beta: float
    L: float
    sigma: float
    kappa2: float
    d_ww: float
    d_wc: float
    d_cw: float
    d_cc: float
    det_d: float
    B_value: float
    kappa_prime: float
    n_H: int = -1
    p_d: int = -1
    verdict: str = "inconclusive"
    condition: str = "none"
    fd_hessian: tuple = ()
    det_d_fd: float = float("nan")
    hessian_rel_dev: float = float("nan")

    def to_dict(self):
        d = asdict(self)
        d["fd_hessian"] = [float(x) for x in self.fd_hessian]
        return d


def _profile_and_slope(params, n_modes):
    """``phi``, ``phi'`` and ``n`` on a grid of one period."""
    g = GridSpec(params.L, n_modes)
    x = g.x
    s = params.eta1 / np.sqrt(2.0)
    sn, cn, dn = jacobi(s * x, params.kappa2, mc=params.kappa2c)
    A = params.amplitude_factor * params.eta1
    phi = A * dn
    dphi = -A * params.kappa2 * sn * cn * s
    n = -phi * phi / params.c
    return g, phi, dphi, n


def charges(params, n_modes=256):
    """``Q1``, ``Q2`` and ``E2`` of the wave by spectral quadrature over one period.

    Only ``|u|`` and ``u_x conj(u)`` enter, so the carrier ``exp(i c x/2)``
    is handled analytically and no q-periodicity is needed.
    """
    g, phi, dphi, n = _profile_and_slope(params, n_modes)
    c, beta = params.c, params.beta
    p2 = phi * phi
    # u = e^{icx/2} phi: |u_x|^2 = phi'^2 + c^2/4 phi^2, Im(u_x conj u) = c/2 phi^2
    Q2 = 0.5 * g.integrate(p2)
    Q1 = -0.25 * g.integrate(n * n) + 0.25 * c * g.integrate(p2)
    E2 = g.integrate(n * p2 + dphi * dphi + 0.25 * c * c * p2 + 0.5 * beta * p2 * p2)
    return ChargeValues(float(Q1), float(Q2), float(E2))


def V_closed(m):
    """``V(k)`` with ``int psi^4 = 64 V / L^3``: ``(m-1)K^4/3 + (2/3)(2-m)K^3 E``."""
    K, E = complete_KE(m)
    return (m - 1.0) * K**4 / 3.0 + 2.0 / 3.0 * (2.0 - m) * K**3 * E


def V_printed(m, L):
    """The variant ``(m-1)K^4/3 + (2/L)(2-m)K^2 E`` (not the fourth moment; kept for comparison)."""
    K, E = complete_KE(m)
    return (m - 1.0) * K**4 / 3.0 + 2.0 / L * (2.0 - m) * K**2 * E


def V_from_sigma_identity(m, sigma, L):
    """``L^2 [sigma (m-1) K^2 / (12 (2-m)) + sigma K E / 6]``."""
    K, E = complete_KE(m)
    return L**2 * (sigma * (m - 1.0) * K**2 / (12.0 * (2.0 - m)) + sigma * K * E / 6.0)


def dV_dk(k):
    """Derivative of V_closed with respect to the modulus ``k``."""
    m = k * k
    K, E = complete_KE(m)
    Kp = (E - (1.0 - m) * K) / (k * (1.0 - m))
    Ep = (E - K) / k
    return (
        2.0 * k * K**4 / 3.0
        + 4.0 / 3.0 * (m - 1.0) * K**3 * Kp
        - 4.0 / 3.0 * k * K**3 * E
        + 2.0 / 3.0 * (2.0 - m) * (3.0 * K**2 * Kp * E + K**3 * Ep)
    )


def dV_dk_printed(k):
    """``2 K^2 E / (k (1-m)) [(2-m) E - (1-m) K]``."""
    m = k * k
    K, E = complete_KE(m)
    return 2.0 * K**2 * E / (k * (1.0 - m)) * ((2.0 - m) * E - (1.0 - m) * K)


def charges_closed_form(params):
    """Closed forms of ``Q1``, ``Q2`` from ``int psi^2 = 8KE/L`` and ``int psi^4 = 64V/L^3``."""
    m, L, c, beta = params.kappa2, params.L, params.c, params.beta
    K, E = complete_KE(m)
    I2 = 8.0 * K * E / L
    I4 = 64.0 * V_closed(m) / L**3
    a = 1.0 - beta * c
    Q2 = c / (2.0 * a) * I2
    Q1 = -I4 / (4.0 * a * a) + c * c / (4.0 * a) * I2
    return ChargeValues(float(Q1), float(Q2), float("nan"))


def d_value(omega, c, beta, L, n_modes=256, energy_weight=ENERGY_WEIGHT):
    """``d(omega, c) = w E2 - c Q1 - omega Q2`` evaluated on the dnoidal wave.

    ``energy_weight`` defaults to 1/2, the normalisation of the Hamiltonian
    for which ``grad d = (-Q2, -Q1)``.
    """
    p = make_wave(omega, c, beta, L)
    q = charges(p, n_modes)
    return energy_weight * q.E - c * q.Q1 - omega * q.Q2


def _rel_step(x, rel):
    return rel * max(abs(x), 1.0)


def d_gradient_fd(omega, c, beta, L, rel=1e-5, **kw):
    """Central differences ``(d_omega, d_c)``."""
    hw, hc = _rel_step(omega, rel), _rel_step(c, rel)
    dw = (d_value(omega + hw, c, beta, L, **kw) - d_value(omega - hw, c, beta, L, **kw)) / (2 * hw)
    dc = (d_value(omega, c + hc, beta, L, **kw) - d_value(omega, c - hc, beta, L, **kw)) / (2 * hc)
    return dw, dc


def kappa_prime(sigma, L, rel=1e-5):
    """``dk/dsigma`` by a central difference through the period constraint."""
    h = rel * sigma
    kp = np.sqrt(solve_period_constraint(L, sigma + h)[2])
    km = np.sqrt(solve_period_constraint(L, sigma - h)[2])
    return (kp - km) / (2.0 * h)


def d_hessian_formula(params, kp=None, V=V_closed, dV=dV_dk):
    """``(d_ww, d_wc, d_cw, d_cc)`` from the closed forms.

    ``V`` and ``dV`` select the moment function and its ``k``-derivative;
    the defaults are the ones consistent with the fourth moment.
    """
    m, L, c, beta, sigma = params.kappa2, params.L, params.c, params.beta, params.sigma
    k = np.sqrt(m)
    if kp is None:
        kp = kappa_prime(sigma, L)
    K, E = complete_KE(m)
    Kp = (E - (1.0 - m) * K) / (k * (1.0 - m))
    Ep = (E - K) / k
    a = 1.0 - beta * c
    Vv = V(m)
    Vp = dV(k)
    d_ww = 4.0 * c / (L * a) * (Kp * E + K * Ep) * kp
    d_wc = -4.0 / (L * a * a) * K * E + 0.5 * c * d_ww
    d_cw = -16.0 / (L**3 * a * a) * Vp * kp + 0.5 * c * d_ww
    d_cc = (
        32.0 * beta / (L**3 * a**3) * Vv
        - 8.0 * c / (L**3 * a * a) * Vp * kp
        - 2.0 * c * (2.0 - beta * c) / (L * a * a) * K * E
        + 0.25 * c * c * d_ww
    )
    return d_ww, d_wc, d_cw, d_cc


def d_hessian_fd(omega, c, beta, L, rel=1e-4, **kw):
    """Five-point central-difference Hessian ``(d_ww, d_wc, d_cw, d_cc)`` of d_value.

    The mixed entry uses the 4x4 tensor stencil, so ``d_wc == d_cw`` by construction.
    """
    hw, hc = _rel_step(omega, rel), _rel_step(c, rel)
    w5 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
    off = np.arange(-2, 3)

    def f(i, j):
        return d_value(omega + i * hw, c + j * hc, beta, L, **kw)

    d_ww = sum(w * f(i, 0) for w, i in zip(w5, off)) / hw**2
    d_cc = sum(w * f(0, j) for w, j in zip(w5, off)) / hc**2
    g1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
    mix = 0.0
    for wi, i in zip(g1, off):
        if wi == 0.0:
            continue
        for wj, j in zip(g1, off):
            if wj == 0.0:
                continue
            mix += wi * wj * f(i, j)
    mix /= hw * hc
    return float(d_ww), float(mix), float(mix), float(d_cc)


def d_hessian(omega, c, beta, L, with_fd=True, n_modes=256):
    """Closed-form d'' plus (optionally) the finite-difference oracle and their deviation."""
    p = make_wave(omega, c, beta, L)
    kp = kappa_prime(p.sigma, L)
    d_ww, d_wc, d_cw, d_cc = d_hessian_formula(p, kp)
    rep = StabilityReport(
        omega=p.omega, c=p.c, beta=p.beta, L=p.L, sigma=p.sigma, kappa2=p.kappa2,
        d_ww=float(d_ww), d_wc=float(d_wc), d_cw=float(d_cw), d_cc=float(d_cc),
        det_d=float(d_cc * d_ww - d_cw * d_wc),
        B_value=float(B_functional(c, omega, p.kappa2, beta)),
        kappa_prime=float(kp),
    )
    if with_fd:
        H = d_hessian_fd(omega, c, beta, L, n_modes=n_modes)
        rep.fd_hessian = H
        rep.det_d_fd = float(H[3] * H[0] - H[2] * H[1])
        a = np.array([d_ww, d_wc, d_cw, d_cc])
        b = np.array(H)
        rep.hessian_rel_dev = float(np.max(np.abs(a - b)) / np.max(np.abs(b)))
    return rep


def B_functional(c, omega, kappa2, beta):
    """Sign functional B(c, omega, k, beta) whose sign is claimed to be that of det d''."""
    m = float(kappa2)
    k = np.sqrt(m)
    sigma = -omega - c * c / 4.0
    K, E = complete_KE(m)
    first = -8.0 * sigma / (2.0 - m) * ((2.0 - m) * E**3 - 2.0 * (1.0 - m) * K * E**2)
    bracket = (
        8.0 * beta * sigma * c * (m - 1.0) / (3.0 * (2.0 - m)) * K
        + c * (16.0 * beta * sigma - 6.0 * c * (1.0 - beta * c) ** 2) / 3.0 * E
    )
    tail = E**2 / (k * (1.0 - m)) - K**2 / k
    return float(first + bracket * tail)


def kappa_ratio(kappa2):
    """``(1-m) K / ((2-m) E)``, which lies strictly between 0 and 1/2 on (0, 1)."""
    m = np.asarray(kappa2, dtype=float)
    K, E = complete_KE(m)
    return (1.0 - m) * K / ((2.0 - m) * E)


def theorem_condition(beta, sigma, c):
    """``'a'`` for beta <= 0, ``'b'`` for beta > 0 with 8 beta sigma - 3c(1-beta c)^2 <= 0, else ``'none'``."""
    if beta <= 0.0:
        return "a"
    if 8.0 * beta * sigma - 3.0 * c * (1.0 - beta * c) ** 2 <= 0.0:
        return "b"
    return "none"


def verdict(omega, c, beta, L, truncation=64, n_modes=256):
    """Full report: d'' both ways, ``n_H`` from the L1 spectrum, ``p_d`` and the verdict.

    The finite-difference Hessian is the one used for ``p_d``; the theorem
    gives no converse, so failing conditions yield ``inconclusive``.
    """
    from .hill import HillOperatorSpec, spectrum

    rep = d_hessian(omega, c, beta, L, with_fd=True, n_modes=n_modes)
    p = make_wave(omega, c, beta, L)
    sp = spectrum(HillOperatorSpec("L1", p, truncation), n_eigs=8)
    rep.n_H = sp.n_negative
    H = np.array(rep.fd_hessian).reshape(2, 2)
    ev = np.linalg.eigvalsh(0.5 * (H + H.T))
    rep.p_d = int(np.sum(ev > 0.0))
    rep.condition = theorem_condition(beta, p.sigma, c)
    ok = rep.condition != "none" and rep.det_d_fd < 0.0 and rep.n_H == 1 and rep.p_d == 1
    rep.verdict = "stable-by-theorem" if ok else "inconclusive"
    return rep


SWEEP_COLUMNS = ("omega", "c", "beta", "kappa2", "det_d_formula", "det_d_fd", "B", "verdict")


def sweep(points, L, threads=1, truncation=64):
    """Verdicts for a list of ``(omega, c, beta)``, optionally on worker threads."""
    points = list(points)

    def one(pt):
        return verdict(pt[0], pt[1], pt[2], L, truncation=truncation)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(one, points))
    return [one(pt) for pt in points]


def write_sweep_csv(path, reports):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in reports:
            w.writerow([repr(r.omega), repr(r.c), repr(r.beta), repr(r.kappa2),
                        repr(r.det_d), repr(r.det_d_fd), repr(r.B_value), r.verdict])


def report_to_json(report, path=None):
    rec = report.to_dict()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(json.dumps(rec, indent=2, sort_keys=True) + "\n")
    return rec
