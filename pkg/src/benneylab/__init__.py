"""Numerical laboratory for the periodic Benney system.

    i u_t + u_xx = u v + beta |u|^2 u,    v_t = (|u|^2)_x

Submodules: ``elliptic`` (K, E, sn/cn/dn), ``waves`` (dnoidal travelling
waves), ``dynamics`` (spectral time stepping and orbit distance), ``hill``
(linearised spectra), ``criterion`` (stability quantities), ``bourgain``
(space-time norms and ill-posedness), ``plotting`` and ``cli``.
"""

from .elliptic import complete_E, complete_K, complete_KE, jacobi
from .grid import GridSpec, State
from .waves import AdmissibilityError, WaveParams, make_wave, wave_from_sigma

__version__ = "0.1.0"

__all__ = [
    "complete_E",
    "complete_K",
    "complete_KE",
    "jacobi",
    "GridSpec",
    "State",
    "AdmissibilityError",
    "WaveParams",
    "make_wave",
    "wave_from_sigma",
]
