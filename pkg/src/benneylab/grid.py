"""Periodic grid and field containers shared by the wave and dynamics code."""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on the torus ``[0, L)`` with ``n_modes`` points."""

    L: float
    n_modes: int

    def __post_init__(self):
        if not (self.L > 0 and np.isfinite(self.L)):
            raise ValueError(f"grid period L must be positive, got {self.L}")
        n = int(self.n_modes)
        if n < 8 or n & (n - 1):
            raise ValueError(f"n_modes must be a power of two >= 8, got {self.n_modes}")
        object.__setattr__(self, "n_modes", n)

    @property
    def dx(self):
        return self.L / self.n_modes

    @property
    def x(self):
        return np.arange(self.n_modes) * self.dx

    @property
    def k(self):
        """Angular wavenumbers ``2 pi n / L`` in numpy FFT order."""
        return 2.0 * np.pi / self.L * np.fft.fftfreq(self.n_modes, d=1.0 / self.n_modes)

    @property
    def rk(self):
        """Wavenumbers matching ``np.fft.rfft`` output."""
        return 2.0 * np.pi / self.L * np.arange(self.n_modes // 2 + 1)

    def dealias_mask(self):
        """2/3-rule mask on the full FFT layout."""
        n = np.abs(np.fft.fftfreq(self.n_modes, d=1.0 / self.n_modes))
        return n < self.n_modes / 3.0

    def dealias_rmask(self):
        return np.arange(self.n_modes // 2 + 1) < self.n_modes / 3.0

    def derivative(self, f, order=1):
        """Spectral derivative of a periodic sample."""
        fh = np.fft.fft(f)
        ik = 1j * self.k
        if self.n_modes % 2 == 0 and order % 2 == 1:
            ik[self.n_modes // 2] = 0.0
        d = np.fft.ifft(ik**order * fh)
        return d.real if np.isrealobj(f) else d

    def integrate(self, f):
        """Trapezoid rule on the periodic grid (spectrally accurate)."""
        return np.sum(f) * self.dx

    def to_dict(self):
        return {"L": self.L, "n_modes": self.n_modes}


@dataclass
class State:
    """One time slice: complex short wave ``u``, real long wave ``v``."""

    u: np.ndarray
    v: np.ndarray
    grid: GridSpec
    t: float = 0.0
    meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=complex)
        v = np.asarray(self.v)
        if np.iscomplexobj(v):
            if np.max(np.abs(v.imag), initial=0.0) > 0.0:
                raise ValueError("long wave v must be real")
            v = v.real
        self.v = np.asarray(v, dtype=float)
        n = self.grid.n_modes
        if self.u.shape != (n,) or self.v.shape != (n,):
            raise ValueError(
                f"fields must have shape ({n},), got u{self.u.shape} v{self.v.shape}"
            )

    def copy(self):
        return State(self.u.copy(), self.v.copy(), self.grid, self.t)
