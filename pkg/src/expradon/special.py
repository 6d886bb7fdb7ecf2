"""Classical and exponential Chebyshev functions, the attenuation path
integral a(s, r, eta), and the orthogonality integral.

Notation: sigma = s^2 - r^2. The exterior region is |s| >= r with
u = sqrt(sigma) >= 0; the interior region is |s| < r with w = sqrt(-sigma)
and phi = arccos(s/r).

Both exponential Chebyshev functions are built from
``F(v) = exp(i*mu*v) * ((s + v)/r)**n``: T~_n is its even part in v and
U~_{n-1} is ``r/v`` times its odd part. Both are therefore entire in sigma,
and near sigma = 0 they are evaluated from the Taylor coefficients of F.
"""

from __future__ import annotations

import enum
import math
import warnings
from functools import lru_cache

import numpy as np

from .errors import AccuracyError, DomainError, UnsupportedAttenuationError
from .grids import ConstantAttenuation, RadialAttenuation

__all__ = [
    "BranchConvention",
    "sgn",
    "cheb_T_classical",
    "cheb_U_classical",
    "atten_path_a",
    "effective_mu",
    "ert_cheb_T",
    "ert_cheb_U",
    "ert_cheb_TU",
    "orthogonality_integral",
    "gauss_legendre",
]

DEGENERACY_EPS = 1e-6
_LOG_SWITCH = 500.0


class BranchConvention(enum.Enum):
    """Interior-region pairing of exponential and phase factors.

    ``C1``: 1/2 [e^{mu w} e^{i n phi} + e^{-mu w} e^{-i n phi}] (the pairing
    produced by the line integral with weight e^{t mu}).
    ``C2``: the same with mu -> -mu, which is what the branch-free closed
    forms give when continued into |s| < r.
    The two agree for |s| >= r.
    """

    C1 = "C1"
    C2 = "C2"

    @classmethod
    def coerce(cls, value) -> "BranchConvention":
        if isinstance(value, cls):
            return value
        return cls(str(value).upper())


def sgn(n):
    """+1 for n >= 0 and -1 for n < 0 (so sgn(-1) = -1)."""
    n = np.asarray(n)
    out = np.where(n >= 0, 1, -1)
    return int(out) if out.ndim == 0 else out


@lru_cache(maxsize=None)
def gauss_legendre(n: int):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


# --------------------------------------------------------------------------
# classical Chebyshev polynomials
# --------------------------------------------------------------------------


def _cheb_recurrence(m, x, first):
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if m == 0:
        return p_prev
    p = first * x
    for _ in range(m - 1):
        p_prev, p = p, 2.0 * x * p - p_prev
    return p


def cheb_T_classical(m: int, x):
    """Chebyshev polynomial T_m(x) for integer m >= 0 and real x."""
    m = int(m)
    if m < 0:
        raise DomainError("cheb_T_classical needs m >= 0")
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.empty_like(x)
    inner = ax <= 1.0
    out[inner] = np.cos(m * np.arccos(x[inner]))
    outer = ~inner
    if np.any(outer):
        sign = np.where(x[outer] < 0, (-1.0) ** m, 1.0)
        out[outer] = sign * np.cosh(m * np.arccosh(ax[outer]))
    # the angle forms lose accuracy near |x| = 1, where the recurrence is benign
    near = np.abs(ax - 1.0) < 1e-2
    if np.any(near):
        out[near] = _cheb_recurrence(m, x[near], 1.0)
    return out if out.ndim else float(out)


def cheb_U_classical(m: int, x):
    """Chebyshev polynomial of the second kind U_m(x), m >= -1 (U_{-1} = 0)."""
    m = int(m)
    if m < -1:
        raise DomainError("cheb_U_classical needs m >= -1")
    x = np.asarray(x, dtype=float)
    if m == -1:
        out = np.zeros_like(x)
        return out if out.ndim else 0.0
    ax = np.abs(x)
    out = np.empty_like(x)
    inner = ax < 1.0
    phi = np.arccos(x[inner])
    out[inner] = np.sin((m + 1) * phi) / np.sin(phi)
    outer = ax > 1.0
    if np.any(outer):
        psi = np.arccosh(ax[outer])
        sign = np.where(x[outer] < 0, (-1.0) ** m, 1.0)
        out[outer] = sign * np.sinh((m + 1) * psi) / np.sinh(psi)
    near = np.abs(ax - 1.0) < 1e-2
    if np.any(near):
        out[near] = _cheb_recurrence(m, x[near], 2.0)
    return out if out.ndim else float(out)


# --------------------------------------------------------------------------
# attenuation path integral
# --------------------------------------------------------------------------


def _tau_average(s, sigma, eta: RadialAttenuation, rtol=1e-10, n_start=32, n_max=1024):
    """A = int_0^1 eta(sqrt(s^2 - tau^2 sigma)) dtau, adaptively doubled."""
    s2, sigma = np.broadcast_arrays(np.asarray(s, dtype=float) ** 2, np.asarray(sigma, float))
    shape = s2.shape
    s2, sigma = s2.ravel(), sigma.ravel()

    def level(n):
        x, w = gauss_legendre(n)
        out = np.empty(s2.size, dtype=complex)
        step = max(1, (1 << 20) // n)
        for i in range(0, s2.size, step):
            rho2 = s2[i:i + step, None] - (x**2) * sigma[i:i + step, None]
            out[i:i + step] = eta(np.sqrt(np.maximum(rho2, 0.0))) @ w
        return out.reshape(shape)

    n = n_start
    prev = level(n)
    while True:
        n *= 2
        cur = level(n)
        scale = np.maximum(np.abs(cur), np.finfo(float).tiny)
        if np.all(np.abs(cur - prev) <= rtol * scale):
            return cur
        if n >= n_max:
            warnings.warn(
                f"path-integral quadrature stopped at {n} nodes; max relative change "
                f"{np.max(np.abs(cur - prev) / scale):.2e}",
                RuntimeWarning,
                stacklevel=3,
            )
            return cur
        prev = cur


def effective_mu(s, r, att):
    """Average attenuation along the path between radii |s| and r.

    For a constant model this is mu. For a radial profile it is
    int_0^1 eta(sqrt((1 - tau^2) s^2 + tau^2 r^2)) dtau, so that
    a(s, r, eta) = mu_eff * sqrt(r^2 - s^2) inside and i * mu_eff * sqrt(s^2 - r^2)
    outside.
    """
    s, r = np.broadcast_arrays(np.asarray(s, float), np.asarray(r, float))
    if isinstance(att, ConstantAttenuation):
        return np.full(s.shape, att.mu, dtype=complex)
    if isinstance(att, RadialAttenuation):
        return _tau_average(s, s * s - r * r, att)
    raise UnsupportedAttenuationError(f"unsupported attenuation {type(att).__name__}")


def atten_path_a(s, r, eta):
    """Path integral a(s, r, eta) of the attenuation profile."""
    s = np.asarray(s, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("atten_path_a needs r > 0")
    s, r = np.broadcast_arrays(s, r)
    sigma = s * s - r * r
    m = effective_mu(s, r, eta)
    inner = sigma <= 0
    out = np.where(
        inner,
        m * np.sqrt(np.maximum(-sigma, 0.0)),
        1j * m * np.sqrt(np.maximum(sigma, 0.0)),
    )
    return out if out.ndim else complex(out)


# --------------------------------------------------------------------------
# exponential Chebyshev functions
# --------------------------------------------------------------------------


def _log_real(a):
    """log of a nonzero real number as a complex value (i*pi for negatives)."""
    return np.log(np.abs(a)) + 1j * np.pi * (a < 0)


def _binom_general(n, k):
    out = np.ones_like(n, dtype=float)
    for i in range(k):
        out = out * (n - i) / (i + 1)
    return out


def _series_coeffs(n, s, r, mu, kmax=5):
    """Taylor coefficients c_k of exp(i mu v) ((s + v)/r)^n at v = 0."""
    base = np.power(s / r, n)
    coeffs = []
    for k in range(kmax + 1):
        c = np.zeros(np.shape(base), dtype=complex)
        for j in range(k + 1):
            c = c + (1j * mu) ** j / math.factorial(j) * _binom_general(n, k - j) * s ** (-(k - j))
        coeffs.append(c * base)
    return coeffs


def _ert_core(n, s, r, mu, conv):
    """Vectorised T~_n and U~_{n-1} for effective attenuation ``mu``."""
    conv = BranchConvention.coerce(conv)
    n, s, r, mu = np.broadcast_arrays(
        np.asarray(n, dtype=np.int64),
        np.asarray(s, dtype=float),
        np.asarray(r, dtype=float),
        np.asarray(mu, dtype=complex),
    )
    if np.any(r <= 0):
        raise DomainError("exponential Chebyshev functions need r > 0")
    nf = n.astype(float)
    sigma = s * s - r * r
    T = np.empty(s.shape, dtype=complex)
    U = np.empty(s.shape, dtype=complex)
    deg = np.abs(sigma) < DEGENERACY_EPS * r * r
    ext = (sigma >= 0) & ~deg
    inn = (sigma < 0) & ~deg

    if np.any(ext):
        se, re, me, ne = s[ext], r[ext], mu[ext], nf[ext]
        u = np.sqrt(sigma[ext])
        big = np.where(se >= 0, se + u, se - u) / re  # the factor of modulus >= 1
        small = 1.0 / big
        a_plus = np.where(se >= 0, big, small)
        a_minus = np.where(se >= 0, small, big)
        ni = n[ext]
        e_plus = np.exp(1j * me * u) * np.power(a_plus, ni)
        e_minus = np.exp(-1j * me * u) * np.power(a_minus, ni)
        # huge powers: combine exponent and power in log form so that a large
        # factor and a tiny one cannot overflow/underflow separately
        huge = np.abs(ne) * np.log(np.abs(big)) > _LOG_SWITCH
        if np.any(huge):
            mh, uh, nh = me[huge], u[huge], ne[huge]
            e_plus[huge] = np.exp(1j * mh * uh + nh * _log_real(a_plus[huge]))
            e_minus[huge] = np.exp(-1j * mh * uh + nh * _log_real(a_minus[huge]))
        T[ext] = 0.5 * (e_plus + e_minus)
        U[ext] = re / (2.0 * u) * (e_plus - e_minus)

    if np.any(inn):
        si, ri, mi, ni = s[inn], r[inn], mu[inn], nf[inn]
        if conv is BranchConvention.C2:
            mi = -mi
        w = np.sqrt(-sigma[inn])
        phi = np.arccos(np.clip(si / ri, -1.0, 1.0))
        e1 = np.exp(mi * w + 1j * ni * phi)
        e2 = np.exp(-mi * w - 1j * ni * phi)
        T[inn] = 0.5 * (e1 + e2)
        U[inn] = ri / (2j * w) * (e1 - e2)

    if np.any(deg):
        sd, rd, md, nd, sg = s[deg], r[deg], mu[deg], nf[deg], sigma[deg]
        if conv is BranchConvention.C1:
            # the truncated series is the branch-free form; C1 flips mu inside
            md = np.where(sg < 0, -md, md)
        c = _series_coeffs(nd, sd, rd, md)
        T[deg] = c[0] + c[2] * sg + c[4] * sg * sg
        U[deg] = rd * (c[1] + c[3] * sg + c[5] * sg * sg)
    return T, U


def _mu_for(att, s, r):
    if att is None:
        return np.zeros(np.broadcast(np.asarray(s), np.asarray(r)).shape, dtype=complex)
    if isinstance(att, (int, float, complex, np.number)):
        return np.asarray(complex(att))
    return effective_mu(s, r, att)


def _check_r(r):
    if np.any(np.asarray(r) <= 0):
        raise DomainError("exponential Chebyshev functions need r > 0")


def ert_cheb_TU(n, s, r, att, conv=BranchConvention.C1):
    """Return (T~_n(s, r), U~_{n-1}(s, r)) in one pass."""
    _check_r(r)
    T, U = _ert_core(n, s, r, _mu_for(att, s, r), conv)
    if T.ndim == 0:
        return complex(T), complex(U)
    return T, U


def ert_cheb_T(n, s, r, att, conv=BranchConvention.C1):
    """Exponential Chebyshev function of the first kind T~_n(s, r, mu).

    ``att`` may be a :class:`ConstantAttenuation`, a :class:`RadialAttenuation`
    or a plain complex number (taken as constant mu).
    """
    return ert_cheb_TU(n, s, r, att, conv)[0]


def ert_cheb_U(nm1, s, r, att, conv=BranchConvention.C1):
    """Exponential Chebyshev function of the second kind U~_{n-1}(s, r, mu).

    The first argument is the index n - 1.
    """
    return ert_cheb_TU(np.asarray(nm1) + 1, s, r, att, conv)[1]


# --------------------------------------------------------------------------
# orthogonality integral
# --------------------------------------------------------------------------


def orthogonality_integral(n, s, t, att, rtol=1e-12, n_start=32, n_max=4096):
    """int_s^t T~_n(t,r)/sqrt(t^2-r^2) * T~_n(s,r)/sqrt(r^2-s^2) * r dr.

    The integral is split at the midpoint; r = sqrt(s^2 + v^2) on the lower
    half and r = sqrt(t^2 - v^2) on the upper half cancel the two endpoint
    singularities exactly. The interior factor is taken in its branch-free
    form (convention C2).
    """
    s, t = float(s), float(t)
    if not 0 < s < t:
        raise DomainError("orthogonality_integral needs 0 < s < t")
    mid = 0.5 * (s + t)
    v_lo = math.sqrt(mid * mid - s * s)
    v_hi = math.sqrt(t * t - mid * mid)
    conv = BranchConvention.C2

    def level(k):
        x, w = gauss_legendre(k)
        v = v_lo * x
        r = np.sqrt(s * s + v * v)
        f_lo = (
            ert_cheb_T(n, t, r, att, conv) * ert_cheb_T(n, s, r, att, conv)
            / np.sqrt(t * t - r * r)
        )
        v = v_hi * x
        r = np.sqrt(t * t - v * v)
        f_hi = (
            ert_cheb_T(n, t, r, att, conv) * ert_cheb_T(n, s, r, att, conv)
            / np.sqrt(r * r - s * s)
        )
        value = v_lo * (f_lo @ w) + v_hi * (f_hi @ w)
        mass = v_lo * (np.abs(f_lo) @ w) + v_hi * (np.abs(f_hi) @ w)
        return value, mass

    # For large n the integrand is large and oscillatory near r = s, so the
    # attainable accuracy is relative to its L1 mass, not to the result.
    k = n_start
    prev, _ = level(k)
    while k < n_max:
        k *= 2
        cur, mass = level(k)
        change = abs(cur - prev)
        if change <= rtol * max(abs(cur), mass, 1e-300):
            return complex(cur)
        prev = cur
    raise AccuracyError(
        "orthogonality quadrature did not converge",
        {"nodes": k, "last_change": change, "mass": mass},
    )
