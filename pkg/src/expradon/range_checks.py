"""Numerical validators for necessary conditions on harmonic ERT data.

Every check returns a :class:`RangeReport` of scaled residuals: the raw
residual divided by the L1 mass of the integrand (floored so that zero data
gives zero, not 0/0). They are necessary conditions only; passing them does
not prove that data lie in the range of the transform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import ConfigurationError, UnsupportedAttenuationError
from .grids import (
    ConstantAttenuation,
    FourierSinogram,
    HarmonicSinogram,
    RadialAttenuation,
    interp_complex,
)
from .inversion import SeriesForm, _exterior_rule, _interior_rule, _literal_U, series_kernel
from .special import BranchConvention, sgn

__all__ = [
    "RangeEntry",
    "RangeReport",
    "DEFAULT_TOLERANCES",
    "check_evenness",
    "check_moments",
    "check_moments_derivative",
    "check_novikov_harmonic",
    "check_fourier_evenness",
]

DEFAULT_TOLERANCES = {
    "evenness": 1e-8,
    "moments": 1e-8,
    "moments_derivative": 1e-7,
    "novikov_harmonic": 1e-6,
    "fourier_evenness": 1e-3,
}

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class RangeEntry:
    check: str
    n: int
    param: object
    raw: float
    scale: float

    @property
    def scaled(self) -> float:
        return self.raw / self.scale if self.scale > 0 else 0.0

    def to_dict(self):
        param = list(self.param) if isinstance(self.param, tuple) else self.param
        return {
            "check": self.check,
            "n": self.n,
            "param": param,
            "raw": self.raw,
            "scale": self.scale,
            "scaled": self.scaled,
        }


@dataclass
class RangeReport:
    entries: List[RangeEntry] = field(default_factory=list)
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def __add__(self, other: "RangeReport") -> "RangeReport":
        tol = dict(self.tolerances)
        tol.update(other.tolerances)
        return RangeReport(self.entries + other.entries, tol)

    def checks(self):
        return sorted({e.check for e in self.entries})

    def max_scaled(self, check: Optional[str] = None) -> float:
        vals = [e.scaled for e in self.entries if check is None or e.check == check]
        return max(vals, default=0.0)

    def worst(self, check: Optional[str] = None) -> Optional[RangeEntry]:
        pool = [e for e in self.entries if check is None or e.check == check]
        return max(pool, key=lambda e: e.scaled, default=None)

    def failures(self):
        return [e for e in self.entries if e.scaled > self.tolerances.get(e.check, 0.0)]

    @property
    def passed(self) -> bool:
        return not self.failures()

    def to_dict(self):
        return {
            "passed": self.passed,
            "tolerances": self.tolerances,
            "summary": {c: self.max_scaled(c) for c in self.checks()},
            "entries": [e.to_dict() for e in self.entries],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _scale(l1, data_norm):
    return max(float(l1), _EPS * float(data_norm))


def _constant_mu(att, conv, what):
    if isinstance(att, RadialAttenuation):
        raise UnsupportedAttenuationError(f"{what} needs a constant attenuation")
    mu = att.mu if isinstance(att, ConstantAttenuation) else 0j
    return mu if BranchConvention.coerce(conv) is BranchConvention.C1 else -mu


# --------------------------------------------------------------------------


def check_evenness(h_plus: HarmonicSinogram, h_minus: HarmonicSinogram) -> RangeReport:
    """p_n(-s, mu) = (-1)^n p_n(s, -mu) on a symmetric detector grid."""
    if h_plus.det != h_minus.det or (h_plus.n_min, h_plus.n_max) != (h_minus.n_min, h_minus.n_max):
        raise ConfigurationError("evenness check needs identical grids")
    a, b = h_plus.att, h_minus.att
    if not (isinstance(a, ConstantAttenuation) and isinstance(b, ConstantAttenuation)):
        raise UnsupportedAttenuationError("evenness check needs constant attenuations")
    if abs(a.mu + b.mu) > 1e-14 * max(1.0, abs(a.mu)):
        raise ConfigurationError("evenness check needs attenuations mu and -mu")
    pv, mv = np.asarray(h_plus.values), np.asarray(h_minus.values)
    norm = max(np.max(np.abs(pv), initial=0.0), np.max(np.abs(mv), initial=0.0))
    entries = []
    for i, n in enumerate(h_plus.n_values):
        lhs = pv[i, ::-1]
        rhs = (-1.0) ** int(n) * mv[i]
        raw = float(np.max(np.abs(lhs - rhs), initial=0.0))
        scale = _scale(max(np.max(np.abs(lhs)), np.max(np.abs(rhs))), norm)
        entries.append(RangeEntry("evenness", int(n), None, raw, scale))
    return RangeReport(entries)


def _tail_trapezoid(nodes, values, weight, r):
    """Trapezoid rule of weight(s)*values over |s| >= r (last axis of values)."""
    h = nodes[1] - nodes[0]
    vals = weight(nodes) * values
    if r <= 0:
        inner = np.zeros(nodes.size, dtype=bool)
    else:
        inner = np.abs(nodes) < r
    w = np.full(nodes.size, h)
    w[inner] = 0.0
    total = (vals * w).sum(axis=-1)
    l1 = (np.abs(vals) * w).sum(axis=-1)
    if r > 0:
        # cells cut by +-r: trapezoid from the cut point to the first node outside
        for side in (1.0, -1.0):
            out = np.nonzero(side * nodes >= r)[0]
            if out.size == 0:
                continue
            k = out[0] if side > 0 else out[-1]
            cut = side * r
            v_cut = interp_complex(nodes, values, cut) * weight(cut)
            length = abs(nodes[k] - cut)
            # the node itself already carries h; replace with h/2 + trapezoid share
            total = total - 0.5 * h * vals[..., k] + 0.5 * length * (vals[..., k] + v_cut)
            l1 = l1 - 0.5 * h * np.abs(vals[..., k]) + 0.5 * length * (np.abs(vals[..., k]) + np.abs(v_cut))
    return total, l1


def _moment_entries(check, h, r_list, conv):
    mu = _constant_mu(h.att, conv, "moment check")
    nodes = np.asarray(h.det.nodes)
    values = np.asarray(h.values)
    norm = np.sum(np.abs(values)) * h.det.spacing
    entries = []
    for i, n in enumerate(h.n_values):
        n = int(n)
        if n == 0:
            continue
        for m in range(abs(n)):
            def wgt(s, m=m, n=n):
                return s**m * np.exp(-1j * sgn(n) * mu * s)

            for r in r_list:
                total, l1 = _tail_trapezoid(nodes, values[i], wgt, float(r))
                entries.append(RangeEntry(check, n, (m, float(r)), float(abs(total)), _scale(l1, norm)))
    return entries


def check_moments(h: HarmonicSinogram, r_list=(0.0,), conv=BranchConvention.C1) -> RangeReport:
    """int_{|s|>=r} s^m e^{-i sgn(n) mu s} p_n(s) ds = 0 for 0 <= m < |n|.

    ``param`` of each entry is (m, r). At r = 0 this holds for all forward
    data. For r > 0 it does not hold in general (see README); the check still
    reports the residual so the difference can be inspected.
    """
    if any(float(r) < 0 for r in r_list):
        raise ConfigurationError("moment radii must be >= 0")
    return RangeReport(_moment_entries("moments", h, r_list, conv))


def check_moments_derivative(hp: HarmonicSinogram, conv=BranchConvention.C1) -> RangeReport:
    """Same moments over the whole line, applied to p'_n."""
    return RangeReport(_moment_entries("moments_derivative", hp, (0.0,), conv))


def check_novikov_harmonic(hp: HarmonicSinogram, r_list=(0.3, 0.6, 0.9),
                           conv=BranchConvention.C1, form=SeriesForm.PRINTED) -> RangeReport:
    """Compare int U~_{n-1}(s, r, -mu) p'_n ds with the finite-series integral.

    With ``form="printed"`` the series side is integrated over [-r, r] only,
    which is the usual statement. With ``form="corrected"`` it is integrated
    over the whole line, and then both sides vanish on consistent data.
    """
    mu = _constant_mu(hp.att, conv, "harmonic Novikov check")
    form = SeriesForm.coerce(form)
    nodes = np.asarray(hp.det.nodes)
    values = np.asarray(hp.values)
    S = hp.det.s_max
    norm = np.sum(np.abs(values)) * hp.det.spacing
    entries = []
    for r in r_list:
        r = float(r)
        if not 0 < r:
            raise ConfigurationError("Novikov radii must be positive")
        s_in, w_in = _interior_rule(nodes, r)
        s_ex, u_ex, w_ex = _exterior_rule(nodes, r, S)
        jac = u_ex / s_ex if s_ex.size else s_ex
        s_all = np.concatenate([s_in, s_ex, -s_ex])
        w_all = np.concatenate([w_in, w_ex * jac, w_ex * jac])
        for i, n in enumerate(hp.n_values):
            n = int(n)
            p_all = interp_complex(nodes, values[i], s_all)
            lhs_f = _literal_U(n, s_all, r, -mu) * p_all
            ser = series_kernel(n, s_all, r, mu) * p_all
            if form is SeriesForm.PRINTED:
                ser = np.where(np.abs(s_all) < r, ser, 0)
            raw = abs(lhs_f @ w_all - ser @ w_all)
            l1 = np.abs(lhs_f) @ w_all + np.abs(ser) @ w_all
            entries.append(RangeEntry("novikov_harmonic", n, r, float(raw), _scale(l1, norm)))
    return RangeReport(entries)


def check_fourier_evenness(ft: FourierSinogram, mu=None, band=0.1, cut_fraction=0.75,
                           conv=BranchConvention.C1) -> RangeReport:
    """(mu + w)^n P_n(w) = (mu - w)^n P_n(-w) for |mu| + band < |w| < cut.

    ``cut`` is ``cut_fraction`` times the largest frequency on the grid. The
    residual is scaled by max (|mu| + |w|)^|n| |P_n| over the band. For n < 0
    the identity is used in its polynomial form
    (mu - w)^|n| P_n(w) = (mu + w)^|n| P_n(-w), so that the scale bounds both sides.
    """
    if mu is None:
        if not isinstance(ft.att, ConstantAttenuation):
            raise UnsupportedAttenuationError("Fourier evenness needs a constant attenuation")
        mu = ft.att.mu
    mu = complex(mu)
    if abs(mu.imag) > 0:
        raise UnsupportedAttenuationError("Fourier evenness holds for real attenuation only")
    mu = mu.real if BranchConvention.coerce(conv) is BranchConvention.C1 else -mu.real
    omega = np.asarray(ft.omega.nodes)
    values = np.asarray(ft.values)
    nyq = np.max(np.abs(omega))
    sel = (omega > abs(mu) + band) & (omega < cut_fraction * nyq)
    w = omega[sel]
    idx = np.nonzero(sel)[0]
    mirror = omega.size - 1 - idx  # symmetric grid: -omega[k] = omega[M-1-k]
    if not np.allclose(omega[mirror], -w, rtol=0, atol=1e-9 * nyq):
        raise ConfigurationError("Fourier evenness needs a symmetric frequency grid")
    entries = []
    for i, n in enumerate(ft.n_values):
        n = int(n)
        a, b = values[i, idx], values[i, mirror]
        if n >= 0:
            lhs, rhs = (mu + w) ** n * a, (mu - w) ** n * b
        else:
            # same identity multiplied through by (mu + w)^|n| (mu - w)^|n|
            lhs, rhs = (mu - w) ** -n * a, (mu + w) ** -n * b
        raw = float(np.max(np.abs(lhs - rhs), initial=0.0))
        scale = float(np.max((abs(mu) + np.abs(w)) ** abs(n) * np.maximum(np.abs(a), np.abs(b)), initial=0.0))
        entries.append(RangeEntry("fourier_evenness", n, (float(abs(mu) + band), float(cut_fraction * nyq)),
                                  raw, scale))
    return RangeReport(entries)
