"""Discrete Bourgain-space norms, necessity sweeps and the ill-posedness experiment.

Space-time Fourier symbols ``f(n, tau)`` live on a uniform tau lattice
``tau_i = i * dtau``.  The counterexample symbols are supported on a few
frequencies and a short tau window, so a symbol is stored sparsely as one
contiguous strip of lattice values per active ``n``.  Products of functions
become convolutions of symbols, evaluated strip by strip.

Weights use ``<n> = 1 + |n|``; the X-type modulation weight is
``1 + |tau + n^2|`` (distance to the curve ``tau = -n^2``) and the H-type
one is ``1 + |tau|``.
"""

import csv
import json
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

__all__ = [
    "SymbolGrid",
    "NormRequest",
    "TruncationWarning",
    "FLAVORS",
    "DTAU",
    "norm",
    "indicator_symbol",
    "product",
    "conjugate",
    "derivative",
    "dispersion_uv",
    "dispersion_u2",
    "check_dispersion",
    "fit_slope",
    "SweepResult",
    "necessity_sweep_uv",
    "necessity_sweep_derivative",
    "write_sweep_csv",
    "wellposed_region",
    "IllposednessReport",
    "illposedness_experiment",
    "solver_crosscheck",
]

DTAU = 0.25
FLAVORS = ("X_sb", "Hb_Hs", "X_mod", "Y_mod")
DEFAULT_N_LIST = tuple(2**j for j in range(4, 11))


class TruncationWarning(UserWarning):
    pass


@dataclass
class SymbolGrid:
    """Sparse symbol on ``{-n_max..n_max} x {|tau| <= tau_max}``, lattice spacing ``dtau``.

    ``strips`` maps ``n`` to ``(i0, values)``: ``values[j]`` sits at
    ``tau = (i0 + j) * dtau``.
    """

    n_max: int
    tau_max: float
    dtau: float = DTAU
    strips: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.dtau > 0:
            raise ValueError(f"dtau must be positive, got {self.dtau}")
        for n, (_, vals) in self.strips.items():
            if abs(n) > self.n_max:
                raise ValueError(f"mode {n} outside |n| <= {self.n_max}")
            if not np.all(np.isfinite(vals)):
                raise ValueError("symbol values must be finite")

    @classmethod
    def for_modes(cls, n_max, dtau=DTAU, pad=64.0):
        """Empty grid sized so that the parabola ``tau = -n^2`` stays inside."""
        return cls(int(n_max), float(n_max) ** 2 + pad, dtau)

    def copy_empty(self):
        return SymbolGrid(self.n_max, self.tau_max, self.dtau)

    def add(self, n, i0, values):
        """Accumulate a strip at mode ``n`` starting at lattice index ``i0``."""
        values = np.asarray(values, dtype=complex)
        if n not in self.strips:
            self.strips[n] = (int(i0), values.copy())
            return
        j0, old = self.strips[n]
        lo = min(j0, i0)
        hi = max(j0 + old.size, i0 + values.size)
        buf = np.zeros(hi - lo, dtype=complex)
        buf[j0 - lo:j0 - lo + old.size] += old
        buf[i0 - lo:i0 - lo + values.size] += values
        self.strips[n] = (lo, buf)

    def scaled(self, factor):
        out = self.copy_empty()
        for n, (i0, v) in self.strips.items():
            out.strips[n] = (i0, factor * v)
        return out

    def items(self):
        """Yield ``(n, tau_array, values)`` per strip."""
        for n in sorted(self.strips):
            i0, v = self.strips[n]
            yield n, (i0 + np.arange(v.size)) * self.dtau, v

    def to_dense(self):
        """Dense ``(n_axis, tau_axis, values)``; only for small grids."""
        nt = int(round(self.tau_max / self.dtau))
        taus = np.arange(-nt, nt + 1) * self.dtau
        ns = np.arange(-self.n_max, self.n_max + 1)
        out = np.zeros((ns.size, taus.size), dtype=complex)
        for n, (i0, v) in self.strips.items():
            idx = i0 + nt + np.arange(v.size)
            keep = (idx >= 0) & (idx < taus.size)
            out[n + self.n_max, idx[keep]] = v[keep]
        return ns, taus, out


@dataclass(frozen=True)
class NormRequest:
    """Sobolev index ``r_or_s``, modulation index ``b`` and the norm ``flavor``.

    ``X_sb`` and ``Hb_Hs`` are the plain weighted L^2 norms; ``X_mod`` and
    ``Y_mod`` are their ``b = 1/2`` versions plus the ``l^2_n L^1_tau`` term.
    """

    r_or_s: float
    b: float = 0.5
    flavor: str = "X_sb"

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValueError(f"flavor must be one of {FLAVORS}, got {self.flavor!r}")


def _modulation(n, tau, flavor):
    if flavor in ("X_sb", "X_mod"):
        return 1.0 + np.abs(tau + n * n)
    return 1.0 + np.abs(tau)


def _check_truncation(grid):
    total = 0.0
    edge = 0.0
    for _, tau, v in grid.items():
        a = np.abs(v) ** 2
        total += a.sum()
        edge += a[np.abs(tau) >= grid.tau_max - grid.dtau].sum()
        edge += a[np.abs(tau) > grid.tau_max].sum()
    if total > 0 and edge >= 1e-6 * total:
        warnings.warn(
            f"symbol mass fraction {edge / total:.3g} sits in the outermost tau cells "
            f"(|tau| >= {grid.tau_max - grid.dtau}); enlarge tau_max",
            TruncationWarning,
            stacklevel=3,
        )


def norm(grid, req):
    """Discrete norm: l^2 in ``n``, Riemann sum in ``tau`` of the weighted ``|f|^2``."""
    _check_truncation(grid)
    b = 0.5 if req.flavor in ("X_mod", "Y_mod") else req.b
    sq = 0.0
    l1 = 0.0
    for n, tau, v in grid.items():
        wn = (1.0 + abs(n)) ** req.r_or_s
        w = _modulation(n, tau, req.flavor) ** (2.0 * b)
        sq += wn * wn * np.sum(w * np.abs(v) ** 2) * grid.dtau
        if req.flavor in ("X_mod", "Y_mod"):
            l1 += (wn * np.sum(np.abs(v)) * grid.dtau) ** 2
    out = np.sqrt(sq)
    if req.flavor in ("X_mod", "Y_mod"):
        out += np.sqrt(l1)
    return float(out)


def indicator_symbol(grid, n, curve, halfwidth=1.0):
    """Add ``chi_{[-h, h]}(tau - tau_c)`` at mode ``n``.

    ``curve='X'`` centres the window on ``tau_c = -n^2`` and ``curve='H'`` on 0.
    """
    if curve not in ("X", "H"):
        raise ValueError(f"curve must be 'X' or 'H', got {curve!r}")
    centre = -float(n) ** 2 if curve == "X" else 0.0
    lo = int(np.ceil((centre - halfwidth) / grid.dtau - 1e-9))
    hi = int(np.floor((centre + halfwidth) / grid.dtau + 1e-9))
    grid.add(int(n), lo, np.ones(hi - lo + 1))
    return grid


def product(f, g):
    """Symbol of the pointwise product: discrete convolution in ``n`` and ``tau``."""
    if abs(f.dtau - g.dtau) > 0:
        raise ValueError("symbols must share the tau lattice")
    out = SymbolGrid(f.n_max + g.n_max, f.tau_max + g.tau_max, f.dtau)
    for n1, (i1, a) in f.strips.items():
        for n2, (i2, b) in g.strips.items():
            out.add(n1 + n2, i1 + i2, np.convolve(a, b) * f.dtau)
    return out


def conjugate(f):
    """Symbol of ``conj(f)``: ``conj(f(-n, -tau))``."""
    out = f.copy_empty()
    for n, (i0, v) in f.strips.items():
        out.strips[-n] = (-(i0 + v.size - 1), np.conj(v[::-1]))
    return out


def derivative(f):
    """Symbol of ``d/dx f``: multiply by ``i n``."""
    out = f.copy_empty()
    for n, (i0, v) in f.strips.items():
        out.strips[n] = (i0, 1j * n * v)
    return out


def dispersion_uv(n, n1, tau, tau1):
    """Both sides of ``(tau + n^2) - (tau1 + n1^2) - tau2 = n^2 - n1^2``, ``tau2 = tau - tau1``."""
    tau2 = tau - tau1
    return (tau + n * n) - (tau1 + n1 * n1) - tau2, n * n - n1 * n1


def dispersion_u2(n, n1, tau, tau1):
    """Both sides of ``(tau1 + n1^2) + (tau2 - n2^2) - tau = n1^2 - n2^2``, ``n2 = n - n1``."""
    tau2 = tau - tau1
    n2 = n - n1
    return (tau1 + n1 * n1) + (tau2 - n2 * n2) - tau, n1 * n1 - n2 * n2


def check_dispersion(which, n, n1, tau, tau1, tol=1e-9):
    lhs, rhs = (dispersion_uv if which == "uv" else dispersion_u2)(n, n1, tau, tau1)
    if not abs(lhs - rhs) <= tol * max(1.0, abs(rhs)):
        raise AssertionError(f"dispersion identity {which} fails: {lhs} != {rhs}")
    return rhs


def fit_slope(N, values, last=4):
    """Least-squares slope of ``log values`` against ``log N`` over the largest ``last`` points."""
    N = np.asarray(N, dtype=float)
    y = np.asarray(values, dtype=float)
    order = np.argsort(N)[-last:]
    return float(np.polyfit(np.log(N[order]), np.log(y[order]), 1)[0])


@dataclass
class SweepResult:
    """Norm sequences for one counterexample pair and their fitted log-log slopes.

    ``slopes`` is ``(product, first factor, second factor)``; ``targets`` holds
    the exponents predicted by the hand calculation.
    """

    kind: str
    pair: int
    N: list
    norm_product: list
    norm_u: list
    norm_v: list
    slopes: tuple
    targets: tuple
    modes: tuple

    @property
    def max_deviation(self):
        return float(np.max(np.abs(np.subtract(self.slopes, self.targets))))

    def to_dict(self):
        return asdict(self)


def _run_pairs(N_list, build, threads):
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(build, N_list))
    return [build(N) for N in N_list]


def necessity_sweep_uv(N_list=DEFAULT_N_LIST, r=1.0, s=0.0, b1=0.6, b2=0.6, threads=1):
    """Scaling of ``||u v||_{X^{r,-1/2}}``, ``||u||_{X^{r,b1}}``, ``||v||_{H^{b2} H^s}``.

    Pair 1 puts ``u`` on ``(N, tau ~ -N^2)`` and ``v`` on ``(-2N, tau ~ 0)``:
    the product lands at ``n = -N`` on its own curve, slopes ``(r, r, s)``.
    Pair 2 puts ``u`` at ``n = 0`` and ``v`` at ``n = N``: the product sits at
    ``n = N`` a distance ``N^2`` off the curve, slopes ``(r - 1, 0, s)``.

    Returns ``[pair1, pair2]`` as SweepResult.
    """
    N_list = [int(N) for N in N_list]
    layouts = {1: (lambda N: N, lambda N: -2 * N), 2: (lambda N: 0, lambda N: N)}
    targets = {1: (r, r, s), 2: (r - 1.0, 0.0, s)}
    out = []
    for pair, (nu_f, nv_f) in layouts.items():

        def build(N, nu_f=nu_f, nv_f=nv_f):
            nu, nv = nu_f(N), nv_f(N)
            nmax = 2 * N + 1
            u = indicator_symbol(SymbolGrid.for_modes(nmax), nu, "X")
            v = indicator_symbol(SymbolGrid.for_modes(nmax), nv, "H")
            # modulation of the product at the support centres
            check_dispersion("uv", nu + nv, nu, -float(nu) ** 2, -float(nu) ** 2)
            uv = product(u, v)
            return (
                norm(uv, NormRequest(r, -0.5, "X_sb")),
                norm(u, NormRequest(r, b1, "X_sb")),
                norm(v, NormRequest(s, b2, "Hb_Hs")),
            )

        rows = _run_pairs(N_list, build, threads)
        P, U, V = (list(col) for col in zip(*rows))
        slopes = (fit_slope(N_list, P), fit_slope(N_list, U), fit_slope(N_list, V))
        modes = ("u@N", "v@-2N") if pair == 1 else ("u@0", "v@N")
        out.append(SweepResult("uv", pair, N_list, P, U, V, slopes, targets[pair], modes))
    return out


def necessity_sweep_derivative(N_list=DEFAULT_N_LIST, r=1.0, s=0.0, b1=0.6, b2=0.6, threads=1):
    """Scaling of ``||d_x(u conj w)||_{H^{-1/2} H^s}``, ``||u||_{X^{r,b1}}``, ``||w||_{X^{r,b2}}``.

    Pair 1: ``u`` at ``n = N``, ``w`` at ``n = -N`` (slopes ``(s + 1, r, r)``).
    Pair 2: ``u`` at ``n = 0``, ``w`` at ``n = N`` (slopes ``(s, 0, r)``).
    """
    N_list = [int(N) for N in N_list]
    layouts = {1: (lambda N: N, lambda N: -N), 2: (lambda N: 0, lambda N: N)}
    targets = {1: (s + 1.0, r, r), 2: (s, 0.0, r)}
    out = []
    for pair, (nu_f, nw_f) in layouts.items():

        def build(N, nu_f=nu_f, nw_f=nw_f):
            nu, nw = nu_f(N), nw_f(N)
            nmax = 2 * N + 1
            u = indicator_symbol(SymbolGrid.for_modes(nmax), nu, "X")
            w = indicator_symbol(SymbolGrid.for_modes(nmax), nw, "X")
            # conj(w) sits at (-nw, +nw^2); the product at n = nu - nw
            n = nu - nw
            check_dispersion("u2", n, nu, -float(nu) ** 2 + float(nw) ** 2, -float(nu) ** 2)
            f = derivative(product(u, conjugate(w)))
            return (
                norm(f, NormRequest(s, -0.5, "Hb_Hs")),
                norm(u, NormRequest(r, b1, "X_sb")),
                norm(w, NormRequest(r, b2, "X_sb")),
            )

        rows = _run_pairs(N_list, build, threads)
        P, U, W = (list(col) for col in zip(*rows))
        slopes = (fit_slope(N_list, P), fit_slope(N_list, U), fit_slope(N_list, W))
        modes = ("u@N", "w@-N") if pair == 1 else ("u@0", "w@N")
        out.append(SweepResult("derivative", pair, N_list, P, U, W, slopes, targets[pair], modes))
    return out


SWEEP_COLUMNS = ("N", "norm_product", "norm_u", "norm_v", "fitted_slope")


def write_sweep_csv(path, result):
    """One row per N; ``fitted_slope`` is the product-norm slope of the whole sweep."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for N, p, u, v in zip(result.N, result.norm_product, result.norm_u, result.norm_v):
            w.writerow([N, repr(float(p)), repr(float(u)), repr(float(v)), repr(result.slopes[0])])


def wellposed_region(r, s):
    """Classify ``(r, s)``: ``'illposed_zone'`` for r < 0, ``'in_W'`` when
    ``max(0, r-1) <= s <= min(r, 2r-1)``, otherwise ``'outside_W'``."""
    if r < 0:
        return "illposed_zone"
    if max(0.0, r - 1.0) <= s <= min(r, 2.0 * r - 1.0):
        return "in_W"
    return "outside_W"


# ----------------------------------------------------------------------------
# ill-posedness


@dataclass
class IllposednessReport:
    r: float
    nu: float
    N: int
    beta: float
    gamma: float
    delta: float
    alpha1: float
    alpha2: float
    a1: float
    a2: float
    t_star: float
    phase: float
    initial_u_dist2: float
    initial_v_dist2: float
    final_u_dist2: float
    lower_bound: float
    separated: bool
    solver_final_u_dist2: float = float("nan")
    solver_abs_error: float = float("nan")

    def to_dict(self):
        return asdict(self)


def _weight(N):
    return 1.0 + float(N) ** 2


def illposedness_experiment(r=-0.5, nu=0.25, delta=1.0, alpha1=1.0, alpha2=None, N=16,
                            beta=1.0, gamma_sign=1.0, bound_constant=0.5):
    """Closed-form plane-wave pair showing loss of uniform continuity for ``r < 0``.

    The data ``u0 = a exp(iNx)``, ``v0 = gamma a^2`` with
    ``a = alpha (1+N^2)^(-r/2)`` and ``|gamma| = (1+N^2)^r`` have H^r norm
    ``|alpha|``.  Unless ``alpha2`` is given it is fixed by
    ``beta (alpha1^2 - alpha2^2)(1+N^2)^(-r) = delta (1+N^2)^nu``; at
    ``t* = (pi/2) / delta * (1+N^2)^(-nu)`` the phase gap is close to pi/2, so
    ``||u1 - u2||_{H^r}^2 = |alpha1 - alpha2 e^{i phase}|^2`` is compared with
    ``bound_constant * (alpha1^2 + alpha2^2)``.

    Raises ValueError naming the first violated precondition.
    """
    if not r < 0:
        raise ValueError(f"precondition r < 0 violated: r = {r}")
    if not nu > 0:
        raise ValueError(f"precondition nu > 0 violated: nu = {nu}")
    if not nu + r < 0:
        raise ValueError(f"precondition nu + r < 0 violated: nu + r = {nu + r}")
    if beta == 0:
        raise ValueError("precondition beta != 0 violated")
    if not delta > 0:
        raise ValueError(f"precondition delta > 0 violated: delta = {delta}")
    if int(N) < 1:
        raise ValueError(f"precondition N >= 1 violated: N = {N}")
    N = int(N)
    W = _weight(N)
    if alpha2 is None:
        a2sq = alpha1**2 - delta * W ** (nu + r) / beta
        if a2sq < 0:
            raise ValueError(
                f"precondition alpha2^2 >= 0 violated: alpha1^2 - delta (1+N^2)^(nu+r) / beta = {a2sq}"
            )
        alpha2 = float(np.sqrt(a2sq))
    gamma = gamma_sign * W**r
    a1 = alpha1 * W ** (-r / 2.0)
    a2 = alpha2 * W ** (-r / 2.0)
    t_star = 0.5 * np.pi / delta * W ** (-nu)
    phase = t_star * (gamma + beta) * (alpha1**2 - alpha2**2) * W ** (-r)
    init_u = (alpha1 - alpha2) ** 2
    init_v = (gamma * (a1**2 - a2**2)) ** 2
    final_u = abs(alpha1 - alpha2 * np.exp(1j * phase)) ** 2
    bound = bound_constant * (alpha1**2 + alpha2**2)
    return IllposednessReport(
        r=r, nu=nu, N=N, beta=beta, gamma=float(gamma), delta=delta,
        alpha1=float(alpha1), alpha2=float(alpha2), a1=float(a1), a2=float(a2),
        t_star=float(t_star), phase=float(phase),
        initial_u_dist2=float(init_u), initial_v_dist2=float(init_v),
        final_u_dist2=float(final_u), lower_bound=float(bound),
        separated=bool(final_u >= bound),
    )


def hr_distance2(u1, u2, r):
    """``sum (1+n^2)^r |u1_n - u2_n|^2`` for samples on ``[0, 2 pi)``."""
    n = u1.size
    d = np.fft.fft(u1 - u2) / n
    k = np.fft.fftfreq(n, d=1.0 / n)
    return float(np.sum((1.0 + k * k) ** r * np.abs(d) ** 2))


def solver_crosscheck(report, n_modes=64, dt=2e-4):
    """Evolve both plane waves with the spectral solver to ``t*`` on ``[0, 2 pi)``.

    Fills ``solver_final_u_dist2`` and ``solver_abs_error`` in place.
    """
    from .dynamics import GridSpec, evolve, plane_wave_state

    if report.N >= n_modes / 3.0:
        raise ValueError(f"N = {report.N} is not resolved by {n_modes} modes after dealiasing")
    g = GridSpec(2.0 * np.pi, n_modes)
    out = []
    for a in (report.a1, report.a2):
        s0 = plane_wave_state(g, a, report.N, report.gamma, beta=report.beta)
        out.append(evolve(s0, report.t_star, dt, report.beta).final.u)
    d2 = hr_distance2(out[0], out[1], report.r)
    report.solver_final_u_dist2 = d2
    report.solver_abs_error = abs(d2 - report.final_u_dist2)
    return report


def report_to_json(obj, path=None):
    rec = obj.to_dict()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(json.dumps(rec, indent=2, sort_keys=True) + "\n")
    return rec
