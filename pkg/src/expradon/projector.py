"""Forward models: direct line integrals, the harmonic forward operator,
angular analysis/synthesis and the Fourier transform in s."""

from __future__ import annotations

import warnings

import math

import numpy as np

from .errors import AliasingError, AliasingWarning, ConfigurationError
from .grids import (
    AngleGrid,
    ConstantAttenuation,
    DetectorGrid,
    FourierSinogram,
    FrequencyGrid,
    HarmonicSinogram,
    PolarImage,
    RadialAttenuation,
    Sinogram,
    _check_att,
    interp_complex,
)
from .special import BranchConvention, _ert_core, effective_mu, gauss_legendre

__all__ = [
    "project_direct",
    "decompose_angular",
    "synthesize_angular",
    "evaluate_polar",
    "project_harmonic",
    "fourier_in_s",
    "signed_path_integral",
]

_MAX_BLOCK = 1 << 22  # complex samples evaluated per vectorised block


def signed_path_integral(s, t, att):
    """sgn(t) * a(s, sqrt(s^2 + t^2), eta), i.e. int_0^t eta(sqrt(s^2 + tau^2)) dtau.

    This is the exponent of the line-integral weight; it equals mu * t for a
    constant attenuation.
    """
    s, t = np.broadcast_arrays(np.asarray(s, float), np.asarray(t, float))
    if att is None:
        return np.zeros(s.shape, complex)
    if isinstance(att, ConstantAttenuation):
        return att.mu * t
    r = np.sqrt(s * s + t * t)
    # a(s, r) = |t| * mu_eff(s, r) inside the disk of radius r
    return t * effective_mu(s, np.maximum(r, 1e-300), att)


def _weight_table(s, att, n_table=2049, order=8):
    """Tabulate t -> exp(signed path integral) on [-L, L] for each detector.

    The exponent is odd in t, so only t >= 0 is integrated: an ``order``-point
    Gauss-Legendre rule per table cell, accumulated along the chord.
    """
    half = np.sqrt(np.maximum(1.0 - s * s, 0.0))
    frac = np.linspace(-1.0, 1.0, n_table)
    pos = frac[n_table // 2:]
    x, w = gauss_legendre(order)
    h = pos[1] - pos[0]
    tau = (pos[:-1, None] + h * x[None, :]) * half[:, None, None]  # (i, cell, node)
    vals = att(np.sqrt(s[:, None, None] ** 2 + tau * tau))
    cells = (vals @ w) * (h * half[:, None])
    expo = np.concatenate([np.zeros((s.size, 1), complex), np.cumsum(cells, axis=1)], axis=1)
    return frac, np.exp(np.concatenate([-expo[:, :0:-1], expo], axis=1))


def _table_lookup(grid, table, x):
    """Cubic lookup of row i of ``table`` at x[:, i, ...] (shared uniform grid)."""
    h = grid[1] - grid[0]
    pos = (x - grid[0]) / h
    k0 = np.clip(np.floor(pos).astype(np.int64) - 1, 0, grid.size - 4)
    xi = pos - k0
    rows = np.arange(table.shape[0]).reshape((1, -1) + (1,) * (x.ndim - 2))
    w = (
        -(xi - 1) * (xi - 2) * (xi - 3) / 6.0,
        xi * (xi - 2) * (xi - 3) / 2.0,
        -xi * (xi - 1) * (xi - 3) / 2.0,
        xi * (xi - 1) * (xi - 2) / 6.0,
    )
    return sum(w[m] * table[rows, k0 + m] for m in range(4))


def project_direct(obj, det: DetectorGrid, ang: AngleGrid, att=None, rtol=1e-9,
                   n_start=16, n_max=4096) -> Sinogram:
    """Brute-force ERT by Gauss-Legendre quadrature along every ray.

    ``obj`` is a callable ``f(x, y)`` supported in the closed unit disk. If it
    also provides ``ray_breakpoints(s, theta) -> (K, I, B)`` (positions along
    each ray where the field is not smooth), the chord is split there so that
    quadrature converges geometrically. The number of nodes per panel starts
    at ``n_start`` and doubles until the block of rays changes by less than
    ``rtol`` relative to its largest value.
    """
    _check_att(att)
    s = np.asarray(det.nodes)
    theta = ang.nodes
    values = np.zeros((ang.count, det.count), dtype=complex)
    live = np.abs(s) < 1.0
    s_live = s[live]
    half = np.sqrt(1.0 - s_live**2)
    radial = isinstance(att, RadialAttenuation)
    if radial:
        frac_tab, w_tab = _weight_table(s_live, att)

    has_bp = hasattr(obj, "ray_breakpoints")
    n_bp = obj.ray_breakpoints(s_live[:1], theta[:1]).shape[-1] if has_bp else 0
    n_panels = n_bp + 1
    step = max(1, _MAX_BLOCK // max(s_live.size * n_panels * n_start * 4, 1))

    for k0 in range(0, ang.count, step):
        th = theta[k0:k0 + step]
        c, sn = np.cos(th)[:, None], np.sin(th)[:, None]
        lo = np.broadcast_to(-half, (th.size, s_live.size))
        edges = [lo]
        if has_bp:
            bp = np.asarray(obj.ray_breakpoints(s_live, th), dtype=float)
            bp = np.where(np.isfinite(bp), bp, half[None, :, None])
            bp = np.clip(bp, -half[None, :, None], half[None, :, None])
            edges += list(np.moveaxis(np.sort(bp, axis=-1), -1, 0))
        edges.append(np.broadcast_to(half, (th.size, s_live.size)))
        edges = np.stack(edges, axis=-1)  # (k, i, panels + 1)
        a, b = edges[..., :-1], edges[..., 1:]

        def integrate(n):
            x, w = gauss_legendre(n)
            out = np.empty(a.shape[:2], dtype=complex)
            sub = max(1, _MAX_BLOCK // (s_live.size * n_panels * n))
            for j in range(0, th.size, sub):
                aj, bj = a[j:j + sub], b[j:j + sub]
                cj, sj = c[j:j + sub, ..., None, None], sn[j:j + sub, ..., None, None]
                t = aj[..., None] + (bj - aj)[..., None] * x  # (k, i, p, n)
                xs = s_live[None, :, None, None] * cj - t * sj
                ys = s_live[None, :, None, None] * sj + t * cj
                f = np.asarray(obj(xs, ys), dtype=complex)
                if radial:
                    f *= _table_lookup(frac_tab, w_tab, t / half[None, :, None, None])
                elif isinstance(att, ConstantAttenuation) and att.mu != 0:
                    f *= np.exp(att.mu * t)
                out[j:j + sub] = ((f @ w) * (bj - aj)).sum(axis=-1)
            return out

        n = n_start
        prev = cur = integrate(n)
        while n < n_max:
            n *= 2
            cur = integrate(n)
            scale = max(np.max(np.abs(cur)), 1e-300)
            if np.max(np.abs(cur - prev)) <= rtol * scale:
                break
            prev = cur
        values[k0:k0 + step, live] = cur
    return Sinogram(det, ang, att, values)


def _check_nrange(n_range):
    n_min, n_max = int(n_range[0]), int(n_range[1])
    if n_max < n_min:
        raise ConfigurationError("empty harmonic range")
    return n_min, n_max


def decompose_angular(sino: Sinogram, n_range, spectral_floor=1e-8) -> HarmonicSinogram:
    """p_n(s_i) = (1/K) sum_k p(s_i, theta_k) exp(-i n theta_k)."""
    n_min, n_max = _check_nrange(n_range)
    K = sino.ang.count
    if K < 2 * max(abs(n_min), abs(n_max)) + 2:
        raise AliasingError(
            f"{K} angles cannot resolve harmonics up to |n| = {max(abs(n_min), abs(n_max))}"
        )
    spec = np.fft.fft(np.asarray(sino.values), axis=0) / K
    peak = np.max(np.abs(spec))
    if peak > 0:
        band = np.abs(np.fft.fftfreq(K, 1.0 / K)) >= K // 2 - max(1, K // 16)
        tail = np.max(np.abs(spec[band]))
        if tail > spectral_floor * peak:
            warnings.warn(
                f"harmonics near |n| = K/2 = {K // 2} reach {tail / peak:.1e} of the peak; "
                "angular sampling may alias",
                AliasingWarning,
                stacklevel=2,
            )
    idx = np.arange(n_min, n_max + 1) % K
    return HarmonicSinogram(n_min, n_max, sino.det, sino.att, spec[idx])


def synthesize_angular(h, ang: AngleGrid):
    """Fourier synthesis sum_n c_n exp(i n theta_k).

    A HarmonicSinogram gives a Sinogram; a PolarImage gives field samples of
    shape (K, J) on the polar grid (phi_k, r_j).
    """
    n = h.n_values
    phase = np.exp(1j * np.outer(ang.nodes, n))  # (K, N)
    field = phase @ np.asarray(h.values)
    if isinstance(h, HarmonicSinogram):
        return Sinogram(h.det, ang, h.att, field)
    if isinstance(h, PolarImage):
        return field
    raise ConfigurationError(f"cannot synthesise {type(h).__name__}")


def evaluate_polar(img: PolarImage, x, y):
    """Evaluate sum_n f_n(r) exp(i n phi) at Cartesian points (0 for r > 1)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.hypot(x, y)
    phi = np.arctan2(y, x)
    prof = interp_complex(img.grid.nodes, img.coeffs, r)  # (N, ...)
    n = img.n_values.reshape((-1,) + (1,) * r.ndim)
    out = np.sum(prof * np.exp(1j * n * phi), axis=0)
    return np.where(r <= 1.0, out, 0.0)


def _profile_source(img, n_range):
    """(n_values, f(r) -> (N, R), panel breakpoints in r, n_min, n_max)."""
    if isinstance(img, PolarImage):
        if img.grid.count < 4 or not img.grid.is_uniform:
            raise ConfigurationError("project_harmonic needs a uniform radial grid with >= 4 nodes")
        nodes = np.asarray(img.grid.nodes)
        coeffs = np.asarray(img.coeffs)
        return img.n_values, (lambda r: interp_complex(nodes, coeffs, r)), nodes, img.n_min, img.n_max
    if hasattr(img, "harmonic_profiles"):
        if n_range is None:
            raise ConfigurationError("projecting a phantom needs n_range")
        n_min, n_max = _check_nrange(n_range)
        n_vals = np.arange(n_min, n_max + 1)
        breaks = np.asarray(img.singular_radii(), dtype=float)
        return n_vals, (lambda r: img.harmonic_profiles(r, n_vals)), breaks, n_min, n_max
    raise ConfigurationError(f"cannot project {type(img).__name__}")


def project_harmonic(img, att, det: DetectorGrid, conv=BranchConvention.C1,
                     n_range=None, rtol=1e-12, n_start=4, n_max=64) -> HarmonicSinogram:
    """Harmonic forward operator.

    p_n(s) = 2 int_0^{sqrt(1-s^2)} T~_n(s, sqrt(s^2+t^2)) f_n(sqrt(s^2+t^2)) dt.

    ``img`` is a PolarImage (f_n read by cubic interpolation) or a phantom
    with exact ``harmonic_profiles`` (then ``n_range`` is required). ``conv``
    is the interior pairing used for T~_n; C1 reproduces :func:`project_direct`.

    The t-axis is split where sqrt(s^2+t^2) crosses a radial node (or a
    singular radius of the phantom), so each panel sees a smooth integrand.
    Gauss-Legendre points per panel double from ``n_start`` until every
    harmonic changes by at most ``rtol`` of its own magnitude on that detector.
    """
    _check_att(att)
    conv = BranchConvention.coerce(conv)
    n_vals, profile, breaks, n_lo, n_hi = _profile_source(img, n_range)
    s_all = np.asarray(det.nodes)
    out = np.zeros((n_vals.size, det.count), dtype=complex)
    tiny = np.finfo(float).tiny

    def integrate(s, edges, nq):
        x, w = gauss_legendre(nq)
        a, b = edges[:-1], edges[1:]
        t = (a[:, None] + (b - a)[:, None] * x).ravel()
        wt = ((b - a)[:, None] * w).ravel()
        r = np.maximum(np.sqrt(s * s + t * t), 1e-300)
        mu = np.zeros(r.shape, complex) if att is None else effective_mu(s, r, att)
        T, _ = _ert_core(n_vals[:, None], s, r[None, :], mu[None, :], conv)
        return 2.0 * ((T * profile(r)) @ wt)

    for i, s in enumerate(s_all):
        if abs(s) >= 1.0:
            continue
        half = math.sqrt(1.0 - s * s)
        cross = np.sqrt(np.maximum(breaks**2 - s * s, 0.0))
        cross = cross[(cross > 0) & (cross < half)]
        edges = np.concatenate([[0.0], cross, [half]])
        nq = n_start
        prev = integrate(s, edges, nq)
        while True:
            nq *= 2
            cur = integrate(s, edges, nq)
            floor = np.finfo(float).eps * max(np.max(np.abs(cur)), tiny)
            if np.all(np.abs(cur - prev) <= rtol * np.maximum(np.abs(cur), floor)) or nq >= n_max:
                break
            prev = cur
        out[:, i] = cur
    return HarmonicSinogram(n_lo, n_hi, det, att, out)


def fourier_in_s(h: HarmonicSinogram, pad_factor: int = 4) -> FourierSinogram:
    """p~_n(omega) = sum_i p_n(s_i) exp(-i s_i omega) h_s on a zero-padded FFT grid.

    The frequency grid has spacing 2*pi/(L*h_s) with L = pad_factor * I and
    reaches the Nyquist frequency pi/h_s; the unpaired -Nyquist bin is dropped
    so the grid is symmetric about 0.
    """
    if pad_factor < 1:
        raise ConfigurationError("pad_factor must be >= 1")
    hs = h.det.spacing
    n_s = h.det.count
    L = int(pad_factor) * n_s
    if L % 2:
        L += 1
    spec = np.fft.fftshift(np.fft.fft(np.asarray(h.values), n=L, axis=-1), axes=-1)[..., 1:]
    grid = FrequencyGrid(L - 1, 2.0 * np.pi / (L * hs))
    phase = np.exp(-1j * h.det.nodes[0] * grid.nodes)
    return FourierSinogram(h.n_min, h.n_max, grid, h.att, spec * phase * hs)
