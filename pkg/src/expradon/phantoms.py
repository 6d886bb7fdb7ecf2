"""Compactly supported polynomial phantoms with known circular harmonics."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Tuple, Union

import numpy as np

from .errors import ConfigurationError
from .grids import PolarImage, RadialGrid

__all__ = [
    "HarmonicBump",
    "OffCenterBump",
    "PhantomSpec",
    "eval_phantom_cartesian",
    "phantom_harmonics",
    "default_phantom",
]


def _complex(v) -> complex:
    if isinstance(v, dict):
        return complex(v["re"], v["im"])
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


@dataclass(frozen=True)
class HarmonicBump:
    """amplitude * r^|n| * (1 - r^2)^q * exp(i n phi) on the unit disk."""

    n: int
    q: int = 3
    amplitude: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "q", int(self.q))
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        if self.q < 3:
            raise ConfigurationError("bump exponent q must be >= 3")

    def profile(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= 1.0, self.amplitude * r ** abs(self.n) * (1.0 - r * r) ** self.q, 0.0)

    def field(self, x, y):
        r2 = x * x + y * y
        z = x + 1j * y if self.n >= 0 else x - 1j * y
        # (x +- iy)^|n| = r^|n| e^{i n phi}: a polynomial, smooth at the origin
        val = self.amplitude * z ** abs(self.n) * (1.0 - r2) ** self.q
        return np.where(r2 <= 1.0, val, 0.0)

    def to_dict(self):
        a = self.amplitude
        return {"type": "harmonic_bump", "n": self.n, "q": self.q, "amplitude": [a.real, a.imag]}


@dataclass(frozen=True)
class OffCenterBump:
    """amplitude * (1 - |x - c|^2 / rho^2)^q inside the disk |x - c| < rho."""

    center: Tuple[float, float] = (0.3, 0.0)
    radius: float = 0.4
    q: int = 3
    amplitude: complex = 1.0

    def __post_init__(self):
        c = (float(self.center[0]), float(self.center[1]))
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "q", int(self.q))
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        if self.q < 3:
            raise ConfigurationError("bump exponent q must be >= 3")
        if not self.radius > 0:
            raise ConfigurationError("bump radius must be positive")
        if np.hypot(*c) + self.radius >= 1.0:
            raise ConfigurationError("off-centre bump must lie strictly inside the unit disk")

    def field(self, x, y):
        d2 = ((x - self.center[0]) ** 2 + (y - self.center[1]) ** 2) / self.radius**2
        return np.where(d2 < 1.0, self.amplitude * np.abs(1.0 - d2) ** self.q, 0.0)

    def breakpoints(self, s, theta):
        """Entry/exit positions t of each ray (NaN when the ray misses)."""
        cx, cy = self.center
        c, sn = np.cos(theta)[:, None], np.sin(theta)[:, None]
        along = cx * c + cy * sn  # c . theta
        perp = -cx * sn + cy * c  # c . theta_perp
        disc = self.radius**2 - (s[None, :] - along) ** 2
        root = np.sqrt(np.where(disc > 0, disc, np.nan))
        return np.stack([perp - root, perp + root], axis=-1)

    def singular_radii(self):
        """Radii where the circle enters or leaves the bump (profiles are C^q there)."""
        cabs = float(np.hypot(*self.center))
        return tuple(x for x in (abs(self.radius - cabs), cabs + self.radius) if x > 0)

    def harmonics(self, r, n_values):
        """Exact f_n(r) = (1/2 pi) int field(r, phi) e^{-i n phi} dphi.

        On the circle |z| = r the bump is (A + B conj(c) w + B c / w)^q with
        w = e^{i phi}, A = 1 - (r^2 + |c|^2)/rho^2 and B = r/rho^2, restricted
        to the arc |phi - arg c| < alpha(r). Expanding the power gives a
        Laurent polynomial in w whose terms integrate in closed form.
        """
        r = np.asarray(r, dtype=float)
        n_values = np.asarray(n_values)
        c = complex(*self.center)
        rho2 = self.radius**2
        cabs = abs(c)
        with np.errstate(divide="ignore", invalid="ignore"):
            kappa = np.where(
                (r > 0) & (cabs > 0), (r * r + cabs * cabs - rho2) / (2 * r * cabs),
                np.where(r < self.radius - cabs, -np.inf, np.inf),
            )
        alpha = np.arccos(np.clip(kappa, -1.0, 1.0))  # 0 outside, pi fully inside
        A = 1.0 - (r * r + cabs * cabs) / rho2
        B = r / rho2
        q = self.q
        # coefficient of w^k, k = b - d, over a + b + d = q
        coef = {}
        for b in range(q + 1):
            for d in range(q + 1 - b):
                a = q - b - d
                mult = math.factorial(q) // (math.factorial(a) * math.factorial(b) * math.factorial(d))
                term = mult * A**a * (B * c.conjugate()) ** b * (B * c) ** d
                coef[b - d] = coef.get(b - d, 0) + term
        phic = math.atan2(c.imag, c.real)
        out = np.zeros((n_values.size, r.size), dtype=complex)
        for i, n in enumerate(n_values):
            acc = np.zeros(r.size, dtype=complex)
            for k, ck in coef.items():
                m = k - int(n)
                arc = alpha / np.pi if m == 0 else np.exp(1j * m * phic) * np.sin(m * alpha) / (np.pi * m)
                acc = acc + ck * arc
            out[i] = self.amplitude * acc
        return out

    def to_dict(self):
        a = self.amplitude
        return {
            "type": "off_center_bump",
            "center": list(self.center),
            "radius": self.radius,
            "q": self.q,
            "amplitude": [a.real, a.imag],
        }


Term = Union[HarmonicBump, OffCenterBump]


@dataclass(frozen=True)
class PhantomSpec:
    """Sum of bump terms. Callable as ``spec(x, y)``."""

    terms: Tuple[Term, ...] = field(default_factory=tuple)

    def __post_init__(self):
        terms = tuple(self.terms)
        for t in terms:
            if not isinstance(t, (HarmonicBump, OffCenterBump)):
                raise ConfigurationError(f"unknown phantom term {t!r}")
        object.__setattr__(self, "terms", terms)

    def __call__(self, x, y):
        return eval_phantom_cartesian(self, x, y)

    def ray_breakpoints(self, s, theta):
        s = np.asarray(s, dtype=float)
        theta = np.asarray(theta, dtype=float)
        parts = [t.breakpoints(s, theta) for t in self.terms if isinstance(t, OffCenterBump)]
        if not parts:
            return np.empty((theta.size, s.size, 0))
        return np.concatenate(parts, axis=-1)

    def harmonic_profiles(self, r, n_values):
        """Exact f_n at arbitrary radii, shape (len(n_values),) + shape(r)."""
        r = np.asarray(r, dtype=float)
        n_values = np.asarray(n_values)
        flat = r.ravel()
        out = np.zeros((n_values.size, flat.size), dtype=complex)
        for t in self.terms:
            if isinstance(t, HarmonicBump):
                hit = n_values == t.n
                if np.any(hit):
                    out[hit] += t.profile(flat)
            else:
                out += t.harmonics(flat, n_values)
        return out.reshape((n_values.size,) + r.shape)

    def singular_radii(self):
        radii = set()
        for t in self.terms:
            if isinstance(t, OffCenterBump):
                radii.update(t.singular_radii())
        return tuple(sorted(radii))

    def max_harmonic(self) -> int:
        return max((abs(t.n) for t in self.terms if isinstance(t, HarmonicBump)), default=0)

    def to_dict(self):
        return {"terms": [t.to_dict() for t in self.terms]}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d) -> "PhantomSpec":
        terms = []
        for t in d.get("terms", []):
            kind = t.get("type")
            if kind == "harmonic_bump":
                terms.append(HarmonicBump(t["n"], t.get("q", 3), _complex(t.get("amplitude", 1.0))))
            elif kind == "off_center_bump":
                terms.append(
                    OffCenterBump(
                        tuple(t["center"]), t["radius"], t.get("q", 3),
                        _complex(t.get("amplitude", 1.0)),
                    )
                )
            else:
                raise ConfigurationError(f"unknown phantom term type {kind!r}")
        return cls(tuple(terms))

    @classmethod
    def from_json(cls, text: str) -> "PhantomSpec":
        return cls.from_dict(json.loads(text))


def eval_phantom_cartesian(spec: PhantomSpec, x, y):
    """Field value of the phantom at Cartesian points; 0 outside all supports."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
    for t in spec.terms:
        out = out + t.field(x, y)
    return out


def phantom_harmonics(spec: PhantomSpec, grid: RadialGrid, n_range) -> PolarImage:
    """Circular harmonics f_n(r_j) of a phantom, exact up to rounding."""
    n_min, n_max = int(n_range[0]), int(n_range[1])
    if n_max < n_min:
        raise ConfigurationError("empty harmonic range")
    coeffs = spec.harmonic_profiles(grid.nodes, np.arange(n_min, n_max + 1))
    return PolarImage(n_min, n_max, grid, coeffs)


def default_phantom() -> PhantomSpec:
    """Harmonic bumps at n = 0, 1, -1, 2, 5 plus one off-centre bump."""
    return PhantomSpec(
        (
            HarmonicBump(0, 3, 1.0),
            HarmonicBump(1, 3, 2.0),
            HarmonicBump(-1, 3, 1.5 - 1.0j),
            HarmonicBump(2, 3, 4.0j),
            HarmonicBump(5, 3, 20.0),
            OffCenterBump((0.3, 0.0), 0.4, 3, 0.5),
        )
    )
