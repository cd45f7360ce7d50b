"""Complete elliptic integrals and Jacobi elliptic functions.

Everything is parametrised by the squared modulus ``m = k**2``.  K and E
come from the arithmetic-geometric mean; sn, cn, dn from the descending
Landen transformation seeded by the same AGM sequence.
"""

import numpy as np

__all__ = [
    "EllipticDomainError",
    "complete_K",
    "complete_E",
    "complete_KE",
    "dK_dk",
    "dE_dk",
    "jacobi",
    "JacobiTriple",
]

# switch to circular / hyperbolic closed forms this close to the endpoints
DEGENERATE_TOL = 1e-12
AGM_TOL = 1e-15
_MAX_ITER = 64


class EllipticDomainError(ValueError):
    pass


def _agm_sequence(m, mc=None):
    """AGM sequence (a_n, b_n, c_n) started at (1, sqrt(1-m), sqrt(m)).

    Works elementwise on arrays; iteration stops once every c_n is below
    AGM_TOL (relative to a_n).  ``mc`` overrides ``1 - m`` when the caller
    knows the complementary parameter more accurately.
    """
    a = np.ones_like(m)
    b = np.sqrt(1.0 - m if mc is None else mc)
    c = np.sqrt(m)
    seq = [(a, b, c)]
    for _ in range(_MAX_ITER):
        if np.all(np.abs(c) <= AGM_TOL * a):
            break
        a, b, c = 0.5 * (a + b), np.sqrt(a * b), 0.5 * (a - b)
        seq.append((a, b, c))
    return seq


def _check_m(m, upper_open):
    m = np.asarray(m, dtype=float)
    if np.any(~np.isfinite(m)) or np.any(m < 0.0):
        raise EllipticDomainError(f"modulus m must lie in [0, 1], got {m}")
    if upper_open and np.any(m >= 1.0):
        raise EllipticDomainError(f"K(m) requires m < 1, got {m}")
    if not upper_open and np.any(m > 1.0):
        raise EllipticDomainError(f"modulus m must lie in [0, 1], got {m}")
    return m


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def complete_KE(m, mc=None):
    """Return ``(K(m), E(m))`` for ``0 <= m < 1`` from one AGM run.

    Pass ``mc = 1 - m`` explicitly to keep full relative accuracy very
    close to ``m = 1``; ``m`` is then ignored.
    """
    if mc is not None:
        mc = np.asarray(mc, dtype=float)
        if np.any(~(mc > 0.0)) or np.any(mc > 1.0):
            raise EllipticDomainError(f"complementary parameter must lie in (0, 1], got {mc}")
        m = 1.0 - mc
    m = _check_m(m, upper_open=mc is None)
    seq = _agm_sequence(m, mc)
    a_n = seq[-1][0]
    K = np.pi / (2.0 * a_n)
    # E = K (1 - sum_n 2^(n-1) c_n^2)
    s = 0.5 * m
    for n, (_, _, c) in enumerate(seq[1:], start=1):
        s = s + 2.0 ** (n - 1) * c * c
    E = K * (1.0 - s)
    return _scalar_or_array(K), _scalar_or_array(E)


def complete_K(m):
    """Complete elliptic integral of the first kind, ``int_0^1 dt / sqrt((1-t^2)(1-m t^2))``.

    Raises EllipticDomainError outside ``0 <= m < 1``.
    """
    return complete_KE(m)[0]


def complete_E(m):
    """Complete elliptic integral of the second kind, ``E(1) = 1``."""
    m = _check_m(m, upper_open=False)
    if m.ndim == 0:
        return 1.0 if m == 1.0 else complete_KE(m)[1]
    out = np.ones_like(m)
    inner = m < 1.0
    if np.any(inner):
        out[inner] = complete_KE(m[inner])[1]
    return out


def dK_dk(k):
    """dK/dk with respect to the modulus k (not m = k^2)."""
    m = k * k
    K, E = complete_KE(m)
    return (E - (1.0 - m) * K) / (k * (1.0 - m))


def dE_dk(k):
    """dE/dk with respect to the modulus k."""
    K, E = complete_KE(k * k)
    return (E - K) / k


class JacobiTriple(tuple):
    """``(sn, cn, dn)`` with attribute access."""

    __slots__ = ()

    def __new__(cls, sn, cn, dn):
        return super().__new__(cls, (sn, cn, dn))

    sn = property(lambda self: self[0])
    cn = property(lambda self: self[1])
    dn = property(lambda self: self[2])


def jacobi(x, m, mc=None):
    """Jacobi elliptic functions sn, cn, dn of argument ``x`` and parameter ``m``.

    ``x`` and ``m`` broadcast against each other.  Near ``m = 0`` the
    circular limit is returned directly; the hyperbolic limit is used at
    ``m = 1`` and wherever ``1 - m < 1e-12`` leaves it accurate at ``x``
    (away from the quarter period the sech form drifts by ``O((1-m) e^{2|x|})``).
    A scalar ``mc = 1 - m`` may be passed for accuracy near ``m = 1``.

    Returns
    -------
    JacobiTriple
        ``(sn, cn, dn)``; scalars in, floats out.
    """
    x = np.asarray(x, dtype=float)
    m = _check_m(m, upper_open=False)
    if np.any(~np.isfinite(x)):
        raise ValueError("x must be finite")
    if mc is None:
        mc = 1.0 - m
    else:
        mc = np.asarray(mc, dtype=float)
        m = 1.0 - mc
    x, m, mc = np.broadcast_arrays(x, m, mc)
    sn = np.empty(x.shape)
    cn = np.empty(x.shape)
    dn = np.empty(x.shape)

    low = m < DEGENERATE_TOL
    # first-order correction to the sech form is (mc/4)(sinh x cosh x + x) tanh x sech x
    ax = np.minimum(np.abs(x), 350.0)
    high = (mc == 0.0) | (
        (mc < DEGENERATE_TOL) & (0.25 * mc * (np.sinh(ax) * np.cosh(ax) + ax) < 1e-14)
    )
    mid = ~(low | high)

    if np.any(low):
        xl = x[low]
        sn[low], cn[low], dn[low] = np.sin(xl), np.cos(xl), 1.0
    if np.any(high):
        xh = x[high]
        sech = 1.0 / np.cosh(xh)
        sn[high], cn[high], dn[high] = np.tanh(xh), sech, sech
    if np.any(mid):
        sn[mid], cn[mid], dn[mid] = _landen(x[mid], m[mid], mc[mid])

    if sn.ndim == 0:
        return JacobiTriple(float(sn), float(cn), float(dn))
    return JacobiTriple(sn, cn, dn)


def _landen(x, m, mc):
    seq = _agm_sequence(m, mc)
    n_last = len(seq) - 1
    a_n = seq[-1][0]
    phi = (2.0 ** n_last) * a_n * x
    for n in range(n_last, 0, -1):
        a, _, c = seq[n]
        phi = 0.5 * (phi + np.arcsin(np.clip(c / a * np.sin(phi), -1.0, 1.0)))
    sn = np.sin(phi)
    cn = np.cos(phi)
    # dn^2 = cn^2 + (1-m) sn^2 has no cancellation; the textbook ratio
    # cn / cos(phi_1 - phi_0) loses digits where cn is tiny
    dn = np.sqrt(cn * cn + mc * sn * sn)
    return sn, cn, dn
