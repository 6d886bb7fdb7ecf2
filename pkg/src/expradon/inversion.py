"""Circular-harmonic inversion of exponential Radon data.

All inversions take the s-derivative p'_n (see :func:`derivative_s`) and
return a :class:`PolarImage` on the requested radial grid.

``conv`` names the interior convention the *data* were generated with.
Data from the line-integral model (``project_direct``, or
``project_harmonic`` with C1) are C1. Data generated with C2 behave like
C1 data at attenuation -mu, which is how they are handled.

Integration is done panel by panel on the detector cells, so each panel sees
one cubic piece of the interpolated p'_n. Inverse square-root endpoint
singularities are removed by s = +-sqrt(r^2 + u^2).
"""

from __future__ import annotations

import enum
import math
import warnings

import numpy as np

from .errors import (
    AccuracyError,
    ConditioningWarning,
    ConfigurationError,
    TruncationWarning,
    DegeneratePointError,
    DomainError,
    UnsupportedAttenuationError,
)
from .grids import (
    AngleGrid,
    ConstantAttenuation,
    HarmonicSinogram,
    PolarImage,
    RadialAttenuation,
    RadialGrid,
    interp_complex,
)
from .projector import evaluate_polar, synthesize_angular
from .special import (
    BranchConvention,
    _ert_core,
    _tau_average,
    cheb_U_classical,
    gauss_legendre,
    sgn,
)

__all__ = [
    "InversionMethod",
    "SeriesForm",
    "kernel_unified",
    "kernel_oracle",
    "series_kernel",
    "invert_unified",
    "invert_interior_series",
    "invert_exterior_series",
    "invert_cormack_exterior",
    "invert",
    "assemble_image",
]

_PANEL_NODES = 12


class InversionMethod(enum.Enum):
    UNIFIED = "unified"
    INTERIOR_SERIES = "interior"
    EXTERIOR_SERIES = "exterior"
    CORMACK_EXTERIOR = "cormack"

    @classmethod
    def coerce(cls, value) -> "InversionMethod":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


class SeriesForm(enum.Enum):
    """Which version of the series inversions to use.

    ``CORRECTED`` includes the residue of the order-|n| pole at z = 0 in the
    exterior part of the negative-sign kernel. ``PRINTED`` omits it and
    reproduces the formulas as usually stated, which are biased whenever
    mu != 0 or |n| >= 1 (see README).
    """

    CORRECTED = "corrected"
    PRINTED = "printed"

    @classmethod
    def coerce(cls, value) -> "SeriesForm":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


# --------------------------------------------------------------------------
# kernels
# --------------------------------------------------------------------------


def _data_mu(mu, conv):
    conv = BranchConvention.coerce(conv)
    mu = complex(mu)
    return mu if conv is BranchConvention.C1 else -mu


def _literal_U(n, s, r, mu):
    """Branch-free U~_{n-1}(s, r, mu) (equal to convention C2 inside)."""
    return _ert_core(n, s, r, mu, BranchConvention.C2)[1]


def _literal_T(n, s, r, mu):
    return _ert_core(n, s, r, mu, BranchConvention.C2)[0]


def _decaying_factor(n, s, r):
    """b_-^n for n >= 0 and b_+^n for n < 0; both have modulus <= 1."""
    u = np.sqrt(s * s - r * r)
    # b_- = 1/b_+ is the root inside the unit circle, and b_+^n = b_-^|n| for n < 0
    inner_root = r / (s + np.sign(s) * u)
    return inner_root ** np.abs(n), u


def _unified_exterior_over_u(n, s, r, nu):
    """u * K^_n(r, s) for |s| > r: -(sgn s / 2) e^{i sgn(n) nu sgn(s) u} b^n."""
    n = np.asarray(n)
    bn, u = _decaying_factor(n, s, r)
    phase = np.exp(1j * sgn(n) * nu * np.sign(s) * u)
    return -0.5 * np.sign(s) * phase * bn


def kernel_unified(n, r, s, mu, conv=BranchConvention.C1):
    """Unified inversion kernel K^_n(r, s, mu).

    Equal to (1/2r)[sgn(n) U~_{n-1}(s,r,-mu) - 1_{|s|>r} sgn(s) r/sqrt(s^2-r^2) T~_n(s,r,-mu)].
    Outside |s| <= r the two growing terms cancel analytically; the value is
    computed from the decaying residue form instead so no digits are lost.
    """
    r = float(r)
    if r <= 0:
        raise DomainError("kernel needs r > 0")
    nu = _data_mu(mu, conv)
    s = np.asarray(s, dtype=float)
    n_arr = np.asarray(n)
    if np.any(np.abs(s) == r):
        raise DegeneratePointError("kernel_unified is singular at |s| = r")
    out = np.empty(np.broadcast(n_arr, s).shape, dtype=complex)
    n_b, s_b = np.broadcast_arrays(n_arr, s)
    inner = np.abs(s_b) < r
    if np.any(inner):
        ni, si = n_b[inner], s_b[inner]
        out[inner] = sgn(ni) / (2 * r) * _literal_U(ni, si, r, -nu)
    if np.any(~inner):
        ne, se = n_b[~inner], s_b[~inner]
        u = np.sqrt(se * se - r * r)
        out[~inner] = _unified_exterior_over_u(ne, se, r, nu) / u
    return out if out.ndim else complex(out)


def series_kernel(n, s, r, mu, conv=BranchConvention.C1):
    """e^{-i sgn(n) mu s} sum_{k<|n|} (sgn(n) i mu r)^k / k! U_{|n|-k-1}(s/r)."""
    nu = _data_mu(mu, conv)
    n = int(n)
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape, dtype=complex)
    sg = sgn(n)
    for k in range(abs(n)):
        out = out + (sg * 1j * nu * r) ** k / math.factorial(k) * cheb_U_classical(abs(n) - k - 1, s / r)
    return np.exp(-1j * sg * nu * s) * out


def kernel_oracle(n, r, s, mu, sign="+", delta_seq=(0.04, 0.02, 0.01), rtol=1e-9):
    """Numerical value of K_n^{+-}(r, s, mu) from its contour integral.

    K^{+-} = (1/r) (1/2 pi i) oint exp[+-i mu (s - r z)] z^{+-n} / (z^2 - 2(s/r) z + 1) dz
    over |z| = 1 in the principal-value sense. For |s| < r both poles lie on
    the circle: the integral is taken on |z| = 1 - delta and 1 + delta,
    averaged, and Richardson-extrapolated in delta^2 over ``delta_seq``.
    Trapezoid sums are used throughout (geometric convergence on circles).
    """
    r, s = float(r), float(s)
    mu = complex(mu)
    if r <= 0:
        raise DomainError("kernel needs r > 0")
    if abs(s) == r:
        raise DegeneratePointError("kernel_oracle is singular at |s| = r")
    if sign not in ("+", "-", 1, -1):
        raise ConfigurationError("sign must be '+' or '-'")
    sg = 1 if sign in ("+", 1) else -1

    def circle(rho, dist):
        m = int(2 ** math.ceil(math.log2(max(1024, 80.0 / max(dist, 1e-6)))))
        z = rho * np.exp(2j * np.pi * np.arange(m) / m)
        g = np.exp(sg * 1j * mu * (s - r * z)) * z ** (sg * n) / (z * z - 2 * (s / r) * z + 1)
        return np.mean(g * z) / r

    if abs(s) > r:
        u = math.sqrt(s * s - r * r)
        inner_root = r / (abs(s) + u)
        return complex(circle(1.0, 1.0 - inner_root))

    deltas = sorted(delta_seq, reverse=True)
    vals = [0.5 * (circle(1 - d, d) + circle(1 + d, d)) for d in deltas]
    # Neville extrapolation to delta = 0 in the variable delta^2
    x = [d * d for d in deltas]
    table = [list(vals)]
    for level in range(1, len(vals)):
        prev = table[-1]
        table.append(
            [
                (x[i + level] * prev[i] - x[i] * prev[i + 1]) / (x[i + level] - x[i])
                for i in range(len(prev) - 1)
            ]
        )
    best = table[-1][0]
    spread = abs(table[-2][-1] - table[-2][0]) if len(table) > 1 else 0.0
    if spread > max(rtol * max(abs(best), 1.0), 1e-12) * 1e3:
        raise AccuracyError(
            "contour extrapolation did not settle",
            {"values": vals, "extrapolated": best, "spread": spread},
        )
    return complex(best)


# --------------------------------------------------------------------------
# quadrature rules aligned with the detector cells
# --------------------------------------------------------------------------


def _panels(edges, nq):
    x, w = gauss_legendre(nq)
    a, b = edges[:-1], edges[1:]
    keep = b > a
    a, b = a[keep], b[keep]
    nodes = (a[:, None] + (b - a)[:, None] * x).ravel()
    weights = ((b - a)[:, None] * w).ravel()
    return nodes, weights


def _interior_rule(det_nodes, r, nq=_PANEL_NODES):
    inside = det_nodes[(det_nodes > -r) & (det_nodes < r)]
    return _panels(np.concatenate([[-r], inside, [r]]), nq)


def _exterior_rule(det_nodes, r, upper, nq=_PANEL_NODES):
    """Nodes (s, u) and du-weights covering s in [r, upper] via s = sqrt(r^2 + u^2)."""
    if upper <= r:
        return np.empty(0), np.empty(0), np.empty(0)
    cut = det_nodes[(det_nodes > r) & (det_nodes < upper)]
    s_edges = np.concatenate([[r], cut, [upper]])
    u_edges = np.sqrt(np.maximum(s_edges**2 - r * r, 0.0))
    u, w = _panels(u_edges, nq)
    return np.sqrt(r * r + u * u), u, w


class _Data:
    """Interpolated p'_n with the harmonic axis first."""

    def __init__(self, hp: HarmonicSinogram, positive_only=False):
        nodes = np.asarray(hp.det.nodes)
        values = np.asarray(hp.values)
        if positive_only:
            # one-sided stencils: nothing at s <= 0 is ever read
            keep = nodes > 0
            nodes, values = nodes[keep], values[:, keep]
        if nodes.size < 4:
            raise ConfigurationError("detector grid too small to interpolate")
        self.nodes = nodes
        self.values = values
        self.n = hp.n_values

    def __call__(self, s):
        return interp_complex(self.nodes, self.values, s)


def _require_constant(att, what):
    if isinstance(att, RadialAttenuation):
        raise UnsupportedAttenuationError(f"{what} does not support radial attenuation")
    if att is None:
        return 0j
    if not isinstance(att, ConstantAttenuation):
        raise UnsupportedAttenuationError(f"{what} needs a constant attenuation")
    return att.mu


def _resolve_att(hp, att):
    return hp.att if att is None else att


def _finish(hp, grid, coeffs):
    return PolarImage(hp.n_min, hp.n_max, grid, coeffs)


# --------------------------------------------------------------------------
# inversions
# --------------------------------------------------------------------------


def invert_unified(hp: HarmonicSinogram, att=None, grid: RadialGrid = None,
                   conv=BranchConvention.C1) -> PolarImage:
    """Unified inversion: f_n(r) = (1/pi) int K^_n(r, s, mu) p'_n(s) ds.

    The kernel is bounded inside |s| < r and decays outside, so this is the
    best-conditioned of the four methods.
    """
    att = _resolve_att(hp, att)
    mu = _require_constant(att, "unified inversion")
    nu = _data_mu(mu, conv)
    grid = grid or RadialGrid.uniform(256)
    data = _Data(hp)
    n = data.n[:, None]
    S = hp.det.s_max
    out = np.zeros((n.size, grid.count), dtype=complex)
    for j, r in enumerate(grid.nodes):
        s_in, w_in = _interior_rule(data.nodes, r)
        k_in = sgn(n) / (2 * r) * _literal_U(n, s_in[None, :], r, -nu)
        total = (k_in * data(s_in)) @ w_in
        s_ex, u_ex, w_ex = _exterior_rule(data.nodes, r, S)
        for side in (1.0, -1.0):
            ss = side * s_ex
            k_ex = _unified_exterior_over_u(n, ss[None, :], r, nu) / s_ex[None, :]
            total = total + (k_ex * data(ss)) @ w_ex
        out[:, j] = total / np.pi
    return _finish(hp, grid, out)


def _exterior_T_term(data, n, r, nu, S):
    """int_{|s|>r} sgn(s) (r/sqrt(s^2-r^2)) T~_n(s, r, -nu) p'_n(s) ds."""
    s_ex, _, w_ex = _exterior_rule(data.nodes, r, S)
    total = 0
    for side in (1.0, -1.0):
        ss = side * s_ex
        k = side * (r / s_ex)[None, :] * _literal_T(n, ss[None, :], r, -nu)
        total = total + (k * data(ss)) @ w_ex
    return total


def _series_rows(n_vals, s, r, nu):
    return np.stack([series_kernel(int(k), s, r, nu) for k in n_vals])


def _series_exterior(data, n_vals, r, nu, S):
    s_ex, u_ex, w_ex = _exterior_rule(data.nodes, r, S)
    total = 0
    for side in (1.0, -1.0):
        ss = side * s_ex
        # ds = (u/|s|) du
        k = _series_rows(n_vals, ss, r, nu) * (u_ex / s_ex)[None, :]
        total = total + (k * data(ss)) @ w_ex
    return total


def invert_interior_series(hp: HarmonicSinogram, att=None, grid: RadialGrid = None,
                           conv=BranchConvention.C1, form=SeriesForm.CORRECTED) -> PolarImage:
    """Series inversion using the finite exponential-Chebyshev expansion.

    f_n(r) = (1/2 pi r)[int S_n(s) p'_n ds - int_{|s|>r} sgn(s) r/sqrt(s^2-r^2) T~_n(s,r,-mu) p'_n ds]
    with S_n the finite series of :func:`series_kernel`. The corrected form
    integrates S_n over the whole line; the printed form only over |s| < r.
    """
    att = _resolve_att(hp, att)
    mu = _require_constant(att, "series inversion")
    nu = _data_mu(mu, conv)
    form = SeriesForm.coerce(form)
    grid = grid or RadialGrid.uniform(256)
    data = _Data(hp)
    n = data.n[:, None]
    S = hp.det.s_max
    out = np.zeros((n.size, grid.count), dtype=complex)
    for j, r in enumerate(grid.nodes):
        s_in, w_in = _interior_rule(data.nodes, r)
        first = (_series_rows(data.n, s_in, r, nu) * data(s_in)) @ w_in
        if form is SeriesForm.CORRECTED:
            first = first + _series_exterior(data, data.n, r, nu, S)
        second = _exterior_T_term(data, n, r, nu, S)
        out[:, j] = (first - second) / (2 * np.pi * r)
    return _finish(hp, grid, out)


def invert_exterior_series(hp: HarmonicSinogram, att=None, grid: RadialGrid = None,
                           conv=BranchConvention.C1, form=SeriesForm.CORRECTED) -> PolarImage:
    """Series inversion from data on |s| > r only.

    Printed form: -(1/2 pi r) int_{|s|>r} [S_n(s) + sgn(s) r/sqrt(s^2-r^2) T~_n(s,r,-mu)] p'_n ds.
    Corrected form drops the S_n term (its full-line integral vanishes on
    consistent data). Both grow like (2|s|/r)^|n| and lose accuracy at small
    r and large |n|.
    """
    att = _resolve_att(hp, att)
    mu = _require_constant(att, "series inversion")
    nu = _data_mu(mu, conv)
    form = SeriesForm.coerce(form)
    if np.max(np.abs(hp.n_values)) > 12:
        warnings.warn(
            "exterior series inversion is poorly conditioned for |n| > 12",
            ConditioningWarning,
            stacklevel=2,
        )
    grid = grid or RadialGrid.uniform(256)
    data = _Data(hp)
    n = data.n[:, None]
    S = hp.det.s_max
    out = np.zeros((n.size, grid.count), dtype=complex)
    for j, r in enumerate(grid.nodes):
        total = _exterior_T_term(data, n, r, nu, S)
        if form is SeriesForm.PRINTED:
            total = total + _series_exterior(data, data.n, r, nu, S)
        out[:, j] = -total / (2 * np.pi * r)
    return _finish(hp, grid, out)


def _held_profile(eta: RadialAttenuation):
    """eta continued past its last node with that node's value.

    Forward data vanish for s > 1, so this only matters for the few samples
    that the finite-difference derivative smears across the support edge.
    Dropping them instead costs ~1e-3 near r = 0.
    """
    edge = float(eta.grid.nodes[-1])
    return lambda rho: eta(np.minimum(rho, edge))


def invert_cormack_exterior(hp: HarmonicSinogram, att=None, grid: RadialGrid = None,
                            conv=BranchConvention.C1) -> PolarImage:
    """Exterior inversion from one-sided data s > 0.

    f_n(r) = -(1/pi) int_r^{s_max} T~_n(t, r, -mu)/sqrt(t^2 - r^2) p'_n(t) dt.
    Only samples with s > 0 are read. The sign of mu here is the one that
    reproduces the data; with +mu the round trip fails for every mu != 0. Radial attenuation uses the path-averaged
    exponent of a(t, r, eta) with eta -> -eta, and eta is held at its outer
    value beyond its grid.
    """
    att = _resolve_att(hp, att)
    grid = grid or RadialGrid.uniform(256)
    data = _Data(hp, positive_only=True)
    n = data.n[:, None]
    S = hp.det.s_max
    if grid.nodes[-1] >= S:
        warnings.warn(
            "radial grid reaches s_max; the outer integrals are empty or truncated",
            TruncationWarning,
            stacklevel=2,
        )
    radial = isinstance(att, RadialAttenuation)
    if radial:
        sign = 1.0 if BranchConvention.coerce(conv) is BranchConvention.C1 else -1.0
        flipped = _held_profile(att.negated() if sign > 0 else att)
    else:
        nu = _data_mu(_require_constant(att, "exterior inversion"), conv)
    out = np.zeros((n.size, grid.count), dtype=complex)
    for j, r in enumerate(grid.nodes):
        t, u, w = _exterior_rule(data.nodes, r, S)
        if t.size == 0:
            continue
        if radial:
            m = _tau_average(t, t * t - r * r, flipped)[None, :]
        else:
            m = -nu
        T = _literal_T(n, t[None, :], r, m)
        # dt / sqrt(t^2 - r^2) = du / t
        out[:, j] = -((T / t[None, :]) * data(t)) @ w / np.pi
    return _finish(hp, grid, out)


_DISPATCH = {
    InversionMethod.UNIFIED: invert_unified,
    InversionMethod.INTERIOR_SERIES: invert_interior_series,
    InversionMethod.EXTERIOR_SERIES: invert_exterior_series,
    InversionMethod.CORMACK_EXTERIOR: invert_cormack_exterior,
}


def invert(hp: HarmonicSinogram, method="unified", att=None, grid=None,
           conv=BranchConvention.C1, **kw) -> PolarImage:
    """Dispatch to one of the four inversion formulas."""
    method = InversionMethod.coerce(method)
    att = _resolve_att(hp, att)
    if isinstance(att, RadialAttenuation) and method is not InversionMethod.CORMACK_EXTERIOR:
        raise UnsupportedAttenuationError(
            f"{method.value} inversion does not support radial attenuation"
        )
    return _DISPATCH[method](hp, att, grid, conv, **kw)


def assemble_image(img: PolarImage, ang: AngleGrid = None, n_pixels: int = None):
    """Fourier synthesis of a reconstruction.

    With ``ang`` returns (K, J) samples on the polar grid; with ``n_pixels``
    returns an (n_pixels, n_pixels) Cartesian image of [-1, 1]^2 (rows are y,
    increasing downwards is not applied: row 0 is y = -1).
    """
    if ang is not None:
        return synthesize_angular(img, ang)
    n_pixels = n_pixels or 128
    c = np.linspace(-1.0, 1.0, n_pixels)
    x, y = np.meshgrid(c, c)
    return evaluate_polar(img, x, y)
