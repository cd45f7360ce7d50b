"""Pseudospectral time stepping for the periodic Benney system

    i u_t + u_xx = u v + beta |u|^2 u,
    v_t = (|u|^2)_x,

with conservation diagnostics and distance to the travelling-wave orbit.

The Schrodinger part ``i u_t + u_xx = 0`` is integrated exactly through an
integrating factor ``exp(-i k^2 t)`` on each Fourier mode; the coupling
terms are advanced with classical RK4.  Products are dealiased with the
2/3 rule.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .grid import GridSpec, State
from .waves import modulated_travelling_state

__all__ = [
    "GridSpec",
    "State",
    "BlowUpError",
    "ConservedTriple",
    "Trajectory",
    "step",
    "evolve",
    "default_dt",
    "conserved",
    "h1_l2_norm",
    "orbit_distance",
    "OrbitFit",
    "fit_orbit",
    "travelling_wave_state",
    "plane_wave_state",
    "plane_wave_exact",
    "random_perturbation",
    "stability_experiment",
    "write_trajectory_csv",
]

BLOWUP_LIMIT = 1e12


class BlowUpError(FloatingPointError):
    """Raised when a field leaves the representable range during stepping."""


@dataclass(frozen=True)
class ConservedTriple:
    E1: float
    E2: float
    E3: float

    def as_tuple(self):
        return (self.E1, self.E2, self.E3)


class _Stepper:
    """Precomputed propagators for one (grid, dt, beta) combination."""

    def __init__(self, grid, dt, beta):
        self.grid = grid
        self.dt = float(dt)
        self.beta = float(beta)
        k = grid.k
        self.half = np.exp(-1j * k**2 * (0.5 * self.dt))
        self.full = self.half * self.half
        self.mask = grid.dealias_mask()
        self.ik_r = 1j * grid.rk * grid.dealias_rmask()
        self.n = grid.n_modes

    def rhs(self, uh, vh):
        u = np.fft.ifft(uh)
        v = np.fft.irfft(vh, n=self.n)
        a2 = u.real**2 + u.imag**2
        nu = -1j * self.mask * np.fft.fft(u * (v + self.beta * a2))
        nv = self.ik_r * np.fft.rfft(a2)
        return nu, nv

    def __call__(self, uh, vh):
        h = self.dt
        E2, E = self.half, self.full
        au, av = self.rhs(uh, vh)
        bu, bv = self.rhs(E2 * (uh + 0.5 * h * au), vh + 0.5 * h * av)
        cu, cv = self.rhs(E2 * uh + 0.5 * h * bu, vh + 0.5 * h * bv)
        du, dv = self.rhs(E * uh + h * E2 * cu, vh + h * cv)
        uh_new = E * uh + (h / 6.0) * (E * au + 2.0 * E2 * (bu + cu) + du)
        vh_new = vh + (h / 6.0) * (av + 2.0 * (bv + cv) + dv)
        return uh_new, vh_new


def _check_finite(uh, vh, t):
    n = uh.size
    umax = np.max(np.abs(uh)) / n if n else 0.0
    vmax = np.max(np.abs(vh)) / n if n else 0.0
    if not (np.isfinite(umax) and np.isfinite(vmax)) or max(umax, vmax) > BLOWUP_LIMIT:
        raise BlowUpError(f"field norm exceeded {BLOWUP_LIMIT:g} at t={t:.6g}; reduce dt")


def step(state, dt, beta):
    """Advance ``state`` by one integrating-factor RK4 step of size ``dt``.

    Raises BlowUpError if a Fourier amplitude exceeds 1e12.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    stepper = _Stepper(state.grid, dt, beta)
    uh = np.fft.fft(state.u)
    vh = np.fft.rfft(state.v)
    uh, vh = stepper(uh, vh)
    _check_finite(uh, vh, state.t + dt)
    return State(np.fft.ifft(uh), np.fft.irfft(vh, n=state.grid.n_modes), state.grid, state.t + dt)


def default_dt(state, beta, safety=0.1):
    """Step size from the nonlinear time scales of the coupling terms.

    The integrating factor removes the ``k^2`` stiffness, so the limit is set
    by the fastest coupling frequency: the local phase rate ``|v| + |beta||u|^2``
    and the transport rate ``k_max |u|`` of ``v_t = (|u|^2)_x``.
    """
    g = state.grid
    amp = float(np.max(np.abs(state.u), initial=0.0))
    vmax = float(np.max(np.abs(state.v), initial=0.0))
    kmax = 2.0 * np.pi / g.L * (g.n_modes / 3.0)
    rate = vmax + abs(beta) * amp**2 + kmax * amp + 1.0
    return safety / rate


@dataclass
class Trajectory:
    """Samples recorded by ``evolve``."""

    times: list = field(default_factory=list)
    records: list = field(default_factory=list)
    final: State = None
    dt: float = None
    steps: int = 0

    def column(self, name):
        return np.array([r[name] for r in self.records])


def evolve(state, T, dt, beta, observers=None, stride=1):
    """Integrate to time ``state.t + T`` with a fixed step.

    The step is shrunk to ``T / ceil(T / dt)`` so the final time is hit
    exactly.  Each observer is a callable ``f(state) -> dict`` evaluated on
    the initial state, every ``stride`` steps, and on the final state; the
    merged dicts are stored in ``Trajectory.records``.
    """
    observers = list(observers or [])
    traj = Trajectory()

    def observe(s):
        rec = {"t": s.t}
        for obs in observers:
            rec.update(obs(s))
        traj.times.append(s.t)
        traj.records.append(rec)

    observe(state)
    if T <= 0:
        traj.final = state
        traj.dt = 0.0
        return traj
    nsteps = int(np.ceil(T / dt - 1e-12))
    h = T / nsteps
    stepper = _Stepper(state.grid, h, beta)
    uh = np.fft.fft(state.u)
    vh = np.fft.rfft(state.v)
    n = state.grid.n_modes
    t0 = state.t
    cur = state
    for j in range(1, nsteps + 1):
        uh, vh = stepper(uh, vh)
        _check_finite(uh, vh, t0 + j * h)
        if j % stride == 0 or j == nsteps:
            cur = State(np.fft.ifft(uh), np.fft.irfft(vh, n=n), state.grid, t0 + j * h)
            if observers:
                observe(cur)
            else:
                traj.times.append(cur.t)
                traj.records.append({"t": cur.t})
    traj.final = cur
    traj.dt = h
    traj.steps = nsteps
    return traj


def conserved(state, beta):
    """Conserved integrals over one period ``[0, L]``.

    ``E1 = int |u|^2``, ``E2 = int v|u|^2 + |u_x|^2 + beta/2 |u|^4``,
    ``E3 = int v^2 + 2 Im(u conj(u_x))``.
    """
    g = state.grid
    u, v = state.u, state.v
    ux = g.derivative(u)
    a2 = np.abs(u) ** 2
    E1 = g.integrate(a2)
    E2 = g.integrate(v * a2 + np.abs(ux) ** 2 + 0.5 * beta * a2**2)
    E3 = g.integrate(v**2 + 2.0 * np.imag(u * np.conj(ux)))
    return ConservedTriple(float(E1), float(E2), float(E3))


# ----------------------------------------------------------------------------
# norms and the travelling-wave orbit


def _coeffs(f):
    return np.fft.fft(f) / f.size


def h1_l2_norm(u, v, grid):
    """``sqrt(||u||_{H^1}^2 + ||v||_{L^2}^2)`` with Fourier weights ``1 + k^2``."""
    w = 1.0 + grid.k**2
    uh = _coeffs(np.asarray(u, dtype=complex))
    vh = _coeffs(np.asarray(v, dtype=float))
    val = grid.L * (np.sum(w * np.abs(uh) ** 2) + np.sum(np.abs(vh) ** 2))
    return float(np.sqrt(val))


def travelling_wave_state(params, grid):
    """``(Phi, Psi) = (exp(i c xi / 2) phi, n)`` at ``t = 0``."""
    return modulated_travelling_state(params, 0.0, grid)


@dataclass
class OrbitFit:
    distance: float
    theta: float
    shift: float


def fit_orbit(state, params, oversample=8, newton_iters=8):
    """Closest point of the orbit ``{(e^{i theta} Phi(.+r), Psi(.+r))}`` to ``state``.

    For fixed ``r`` the optimal phase is the argument of the H^1 inner
    product of ``u`` with ``Phi(.+r)``; what remains is to maximise
    ``|A(r)| + B(r)`` where ``A`` and ``B`` are the u- and v-correlations.
    Both are trigonometric polynomials in ``r``: a coarse scan on an
    oversampled shift grid is followed by Newton's method on the derivative.
    The distance is then evaluated directly from the coefficient differences.
    """
    g = state.grid
    if not np.isclose(g.L, params.L, rtol=1e-12, atol=0.0):
        raise ValueError(f"state period {g.L} does not match wave period {params.L}")
    ref = travelling_wave_state(params, g)
    k = g.k
    w = 1.0 + k**2
    uh, vh = _coeffs(state.u), _coeffs(state.v)
    Ph, Qh = _coeffs(ref.u), _coeffs(ref.v)
    a = g.L * w * uh * np.conj(Ph)
    b = g.L * vh * np.conj(Qh)

    def corr(r, order=0):
        e = np.exp(-1j * k * r) * (-1j * k) ** order
        return np.sum(a * e), np.sum(b * e).real

    # coarse scan: A(r_j) for r_j = j L / M via an inverse FFT of zero-padded a
    n = g.n_modes
    M = n * oversample
    idx = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    pa = np.zeros(M, dtype=complex)
    pb = np.zeros(M, dtype=complex)
    pa[idx % M] = a
    pb[idx % M] = b
    # sum_n a_n exp(-i 2 pi n j / M) is a forward FFT
    Ar = np.fft.fft(pa)
    Br = np.fft.fft(pb).real
    score = np.abs(Ar) + Br
    j = int(np.argmax(score))
    r = j * g.L / M

    h = g.L / M
    for _ in range(newton_iters):
        A0, B0 = corr(r)
        A1, B1 = corr(r, 1)
        A2, B2 = corr(r, 2)
        mod = abs(A0)
        if mod == 0.0:
            break
        # F = |A| + B, F' = Re(conj(A) A')/|A| + B'
        re1 = (np.conj(A0) * A1).real
        f1 = re1 / mod + B1
        f2 = ((np.conj(A1) * A1).real + (np.conj(A0) * A2).real) / mod - re1**2 / mod**3 + B2
        if f2 >= 0:
            break
        dr = -f1 / f2
        if abs(dr) > h:
            dr = np.sign(dr) * h
        r = r + dr
        if abs(dr) < 1e-15 * g.L:
            break
    r = r % g.L
    A0, _ = corr(r)
    theta = float(np.angle(A0)) % (2.0 * np.pi) if abs(A0) > 0 else 0.0

    ph = np.exp(1j * k * r)
    du = uh - np.exp(1j * theta) * Ph * ph
    dv = vh - Qh * ph
    dist2 = g.L * (np.sum(w * np.abs(du) ** 2) + np.sum(np.abs(dv) ** 2))
    return OrbitFit(float(np.sqrt(dist2)), theta, float(r))


def orbit_distance(state, params):
    """H^1 x L^2 distance from ``state`` to the travelling-wave orbit."""
    return fit_orbit(state, params).distance


# ----------------------------------------------------------------------------
# exact families and experiments


def plane_wave_state(grid, a, N, gamma, t=0.0, beta=0.0):
    """Plane wave ``u = a exp(i k_N x)``, ``v = gamma a^2`` (exact solution family)."""
    u, v = plane_wave_exact(grid, a, N, gamma, t, beta)
    return State(u, v, grid, t=t)


def plane_wave_exact(grid, a, N, gamma, t, beta):
    """Closed form ``a exp(i k x) exp(-i t (k^2 + (gamma + beta) a^2))``, ``v = gamma a^2``.

    ``k = 2 pi N / L``; on ``L = 2 pi`` this is the integer wavenumber ``N``.
    """
    kN = 2.0 * np.pi * N / grid.L
    u = a * np.exp(1j * kN * grid.x) * np.exp(-1j * t * (kN**2 + (gamma + beta) * a * a))
    v = np.full(grid.n_modes, gamma * a * a)
    return u, v


def random_perturbation(grid, epsilon, seed, max_mode=8):
    """Smooth random ``(du, dv)`` with ``||(du, dv)||_{H^1 x L^2} = epsilon``.

    Only Fourier modes ``|n| <= max_mode`` are excited.
    """
    rng = np.random.default_rng(seed)
    n = grid.n_modes
    idx = np.fft.fftfreq(n, d=1.0 / n)
    low = np.abs(idx) <= max_mode
    uh = np.zeros(n, dtype=complex)
    uh[low] = rng.standard_normal(low.sum()) + 1j * rng.standard_normal(low.sum())
    vh = np.zeros(n, dtype=complex)
    vh[low] = rng.standard_normal(low.sum()) + 1j * rng.standard_normal(low.sum())
    du = np.fft.ifft(uh) * n
    dv = (np.fft.ifft(vh) * n).real
    scale = epsilon / h1_l2_norm(du, dv, grid)
    return du * scale, dv * scale


def stability_experiment(params, grid, epsilon=0.0, seed=0, periods=5.0, dt=None,
                         samples_per_period=20, max_mode=8):
    """Evolve a perturbed travelling wave and track its distance to the orbit.

    Returns the Trajectory; each record holds ``t``, ``orbit_dist`` and the
    drifts ``E1_drift``, ``E2_drift``, ``E3_drift`` relative to ``t = 0``.
    """
    beta = params.beta
    base = travelling_wave_state(params, grid)
    u, v = base.u, base.v
    if epsilon > 0:
        du, dv = random_perturbation(grid, epsilon, seed, max_mode=max_mode)
        u, v = u + du, v + dv
    s0 = State(u, v, grid)
    if dt is None:
        dt = default_dt(s0, beta)
    T = periods * params.temporal_period
    nsteps = int(np.ceil(T / dt - 1e-12))
    stride = max(1, nsteps // max(1, int(round(samples_per_period * periods))))
    c0 = conserved(s0, beta)

    def obs(s):
        c = conserved(s, beta)
        return {
            "E1": c.E1,
            "E2": c.E2,
            "E3": c.E3,
            "orbit_dist": orbit_distance(s, params),
            "E1_drift": c.E1 - c0.E1,
            "E2_drift": c.E2 - c0.E2,
            "E3_drift": c.E3 - c0.E3,
        }

    return evolve(s0, T, dt, beta, observers=[obs], stride=stride)


TRAJECTORY_COLUMNS = ("t", "E1", "E2", "E3", "orbit_dist")


def write_trajectory_csv(path, traj, columns=TRAJECTORY_COLUMNS):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for rec in traj.records:
            w.writerow([repr(float(rec.get(c, float("nan")))) for c in columns])


def conserved_observer(beta):
    def obs(s):
        c = conserved(s, beta)
        return {"E1": c.E1, "E2": c.E2, "E3": c.E3}

    return obs


def orbit_observer(params):
    return lambda s: {"orbit_dist": orbit_distance(s, params)}

