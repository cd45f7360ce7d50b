"""Periodic spectra of the linearised operators around a dnoidal wave.

    L1 = -d^2/dx^2 - (c^2/4 + w) + 3 (beta - 1/c) phi^2
    L2 = -d^2/dx^2 - (c^2/4 + w) +   (beta - 1/c) phi^2

are discretised in the Fourier basis ``exp(i k_n x)``, ``|n| <= M``, of
L-periodic functions.  The potentials are built from the analytic dn^2
profile, so the only discretisation error is the truncation at ``M``.

With ``psi(y) = f(sqrt(2) y / eta1)`` the L1 eigenproblem becomes the Lame
equation ``psi'' + (rho - 6 k^2 sn^2 y) psi = 0`` with
``rho = 6 - 2 (sigma - lambda) / eta1^2``, whose three lowest periodic
eigenvalues are known in closed form.
"""

import json
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .waves import profile_values

__all__ = [
    "HillOperatorSpec",
    "HillSpectrum",
    "LameTriple",
    "potential_coefficients",
    "assemble",
    "spectrum",
    "lame_closed_form",
    "lambda_from_rho",
    "lame_eigenvalues_L1",
    "apply_operator",
    "oscillation_pattern_ok",
    "spectrum_to_json",
]

OPERATORS = ("L1", "L2")


@dataclass(frozen=True)
class HillOperatorSpec:
    which: str
    params: object
    truncation: int = 64
    shift: float = 0.0

    def __post_init__(self):
        if self.which not in OPERATORS:
            raise ValueError(f"which must be one of {OPERATORS}, got {self.which!r}")
        if int(self.truncation) < 16:
            raise ValueError(f"truncation M must be >= 16, got {self.truncation}")

    @property
    def size(self):
        return 2 * int(self.truncation) + 1

    @property
    def wavenumbers(self):
        n = np.arange(-self.truncation, self.truncation + 1)
        return 2.0 * np.pi * n / self.params.L


@dataclass
class HillSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    n_negative: int
    kernel_dim_numeric: int
    kernel_tol: float
    spec: HillOperatorSpec


@dataclass(frozen=True)
class LameTriple:
    rho0: float
    rho1: float
    rho2: float

    def as_array(self):
        return np.array([self.rho0, self.rho1, self.rho2])


def _coupling(which, p):
    g = p.beta - 1.0 / p.c
    return 3.0 * g if which == "L1" else g


def potential_coefficients(spec, n_quad=None):
    """Fourier coefficients ``V_j``, ``|j| <= 2M``, of the potential term.

    Returned in natural order (index ``j + 2M``).  The potential is sampled
    on a fine grid and transformed, which is exact up to aliasing of modes
    beyond the quadrature size.
    """
    M = int(spec.truncation)
    p = spec.params
    if n_quad is None:
        n_quad = max(1024, 8 * M)
    x = np.arange(n_quad) * p.L / n_quad
    phi, _ = profile_values(p, x + spec.shift)
    V = _coupling(spec.which, p) * phi**2
    Vh = np.fft.fft(V) / n_quad
    j = np.arange(-2 * M, 2 * M + 1)
    return Vh[j % n_quad]


def assemble(spec, potential=True):
    """Matrix of the operator in the basis ``exp(i k_n x)``, ``n = -M..M``.

    For the unshifted (even) profile the matrix is real symmetric; a
    nonzero ``spec.shift`` yields the unitarily equivalent Hermitian matrix.
    ``potential=False`` drops the phi^2 term (free operator).
    """
    M = int(spec.truncation)
    p = spec.params
    k = spec.wavenumbers
    A = np.diag(k**2 - (p.c**2 / 4.0 + p.omega)).astype(complex)
    if potential:
        Vh = potential_coefficients(spec)
        idx = np.arange(-M, M + 1)
        # A_mn = V_{m-n}
        A = A + Vh[(idx[:, None] - idx[None, :]) + 2 * M]
    if spec.shift == 0.0:
        A = A.real
        A = 0.5 * (A + A.T)
    else:
        A = 0.5 * (A + A.conj().T)
    return A


def spectrum(spec, n_eigs=None, kernel_tol=None):
    """Lowest ``n_eigs`` periodic eigenvalues and Fourier-coefficient eigenvectors."""
    A = assemble(spec)
    size = A.shape[0]
    if n_eigs is None:
        n_eigs = size
    if not 1 <= n_eigs <= size:
        raise ValueError(f"n_eigs must be in [1, {size}], got {n_eigs}")
    try:
        w, V = linalg.eigh(A, subset_by_index=[0, n_eigs - 1])
    except linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise RuntimeError(f"eigensolver failed: {exc}") from exc
    if kernel_tol is None:
        radius = float(np.max(np.abs(np.diag(A)))) + float(np.max(np.abs(A - np.diag(np.diag(A)))))
        kernel_tol = 1e-7 * radius
    n_neg = int(np.sum(w < -kernel_tol))
    n_ker = int(np.sum(np.abs(w) <= kernel_tol))
    return HillSpectrum(w, V, n_neg, n_ker, kernel_tol, spec)


def lame_closed_form(m):
    """The three lowest 2K-periodic eigenvalues of ``psi'' + (rho - 6 m sn^2) psi = 0``."""
    m = float(m)
    if not 0.0 < m < 1.0:
        raise ValueError(f"Lame closed form needs 0 < m < 1, got {m}")
    r = np.sqrt(1.0 - m + m * m)
    return LameTriple(2.0 * (1.0 + m - r), 4.0 + m, 2.0 * (1.0 + m + r))


def lambda_from_rho(rho, params):
    """L1 eigenvalue ``sigma - (eta1^2 / 2)(6 - rho)`` matching Lame eigenvalue ``rho``."""
    return params.sigma - 0.5 * params.eta1**2 * (6.0 - rho)


def lame_eigenvalues_L1(params):
    """``lambda(rho_0), lambda(rho_1), lambda(rho_2)`` for the wave's modulus."""
    t = lame_closed_form(params.kappa2)
    return np.array([lambda_from_rho(r, params) for r in t.as_array()])


def apply_operator(spec, f):
    """Apply the operator to a grid function sampled at ``x_j = j L / N`` (spectrally)."""
    p = spec.params
    N = f.size
    x = np.arange(N) * p.L / N
    phi, _ = profile_values(p, x + spec.shift)
    k = 2.0 * np.pi / p.L * np.fft.fftfreq(N, d=1.0 / N)
    fxx = np.fft.ifft(-(k**2) * np.fft.fft(f))
    if np.isrealobj(f):
        fxx = fxx.real
    return -fxx - (p.c**2 / 4.0 + p.omega) * f + _coupling(spec.which, p) * phi**2 * f


def oscillation_pattern_ok(eigs, rel_tol=1e-8):
    """Check ``l0 < l1 <= l2 < l3 <= l4 < ...`` on the given sorted eigenvalues.

    Strictness is tested with a tolerance relative to the spread of the
    eigenvalues, since degenerate pairs coincide only to rounding.
    """
    eigs = np.asarray(eigs)
    tol = rel_tol * max(1.0, float(np.max(np.abs(eigs))))
    for i in range(len(eigs) - 1):
        gap = eigs[i + 1] - eigs[i]
        if gap < -tol:
            return False
        # strict steps at i = 0, 2, 4, ...
        if i % 2 == 0 and gap <= tol:
            return False
    return True


def coefficient_vector(f, M):
    """Fourier coefficients of a grid sample in natural order ``n = -M..M``."""
    N = f.size
    fh = np.fft.fft(f) / N
    n = np.arange(-M, M + 1)
    return fh[n % N]


def spectrum_to_json(spec_result, path=None):
    s = spec_result
    rec = {
        "params": s.spec.params.to_dict(),
        "operator": s.spec.which,
        "M": int(s.spec.truncation),
        "eigenvalues": [float(x) for x in s.eigenvalues],
        "n_negative": s.n_negative,
        "kernel_dim": s.kernel_dim_numeric,
        "kernel_tol": s.kernel_tol,
    }
    text = json.dumps(rec, indent=2, sort_keys=True)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return rec
