"""Grids, attenuation models, data containers and grid utilities.

Every container is immutable: arrays are copied on construction and marked
read-only. Uniform grids are stored canonically (node formula derived from a
count and a spacing) so that they can be rebuilt bit for bit from a file
header.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import ConfigurationError, DomainError, SizeError

__all__ = [
    "RadialGrid",
    "DetectorGrid",
    "AngleGrid",
    "FrequencyGrid",
    "ConstantAttenuation",
    "RadialAttenuation",
    "Attenuation",
    "PolarImage",
    "Sinogram",
    "HarmonicSinogram",
    "FourierSinogram",
    "interp_complex",
    "derivative_s",
]

_UNIFORM_RTOL = 1e-9


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _same_bits(a, b):
    return a.shape == b.shape and a.dtype == b.dtype and a.tobytes() == b.tobytes()


def _is_uniform(nodes):
    if nodes.size < 2:
        return True
    d = np.diff(nodes)
    return bool(np.all(np.abs(d - d.mean()) <= _UNIFORM_RTOL * abs(d.mean())))


def _symmetric_nodes(count, spacing):
    # (j - (count-1)/2) is an exact half-integer, so the nodes are exactly
    # antisymmetric under index reversal.
    return spacing * (np.arange(count) - (count - 1) / 2.0)


# --------------------------------------------------------------------------
# grids
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Radii r_1 < ... < r_J in (0, 1].

    Uniform node lists are replaced by the canonical form
    ``first + spacing * arange(count)`` (last node clipped to 1 when rounding
    pushes it a few ulps past the disk edge).
    """

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float).ravel()
        if nodes.size == 0:
            raise ConfigurationError("radial grid needs at least one node")
        if not np.all(np.isfinite(nodes)):
            raise ConfigurationError("radial grid nodes must be finite")
        if nodes.size > 1 and np.any(np.diff(nodes) <= 0):
            raise ConfigurationError("radial grid nodes must be strictly increasing")
        if nodes[0] <= 0 or nodes[-1] > 1 + 1e-12:
            raise ConfigurationError("radial grid nodes must lie in (0, 1]")
        if nodes.size > 1 and _is_uniform(nodes):
            spacing = (nodes[-1] - nodes[0]) / (nodes.size - 1)
            nodes = self._canonical(nodes.size, float(nodes[0]), spacing)
        object.__setattr__(self, "nodes", _frozen(nodes))

    @staticmethod
    def _canonical(count, first, spacing):
        nodes = first + spacing * np.arange(count)
        if nodes[-1] > 1.0 and nodes[-1] - 1.0 < 1e-12:
            nodes[-1] = 1.0
        return nodes

    @classmethod
    def uniform(cls, count: int, r_max: float = 1.0) -> "RadialGrid":
        """``count`` nodes r_j = j * r_max / count, j = 1..count."""
        if count < 1:
            raise SizeError("radial grid needs at least one node")
        h = r_max / count
        return cls(cls._canonical(count, h, h))

    @classmethod
    def from_descriptor(cls, count, first, spacing) -> "RadialGrid":
        return cls(cls._canonical(int(count), float(first), float(spacing)))

    @property
    def count(self) -> int:
        return int(self.nodes.size)

    @property
    def first(self) -> float:
        return float(self.nodes[0])

    @property
    def spacing(self) -> float:
        if self.count < 2:
            return float(self.nodes[0])
        return float((self.nodes[-1] - self.nodes[0]) / (self.count - 1))

    @property
    def is_uniform(self) -> bool:
        return _is_uniform(self.nodes)

    def __eq__(self, other):
        return isinstance(other, RadialGrid) and _same_bits(self.nodes, other.nodes)

    def __hash__(self):
        return hash(self.nodes.tobytes())


@dataclass(frozen=True, eq=False)
class DetectorGrid:
    """Uniform detector offsets symmetric about 0, spanning [-s_max, s_max]."""

    count: int = 512
    s_max: float = 1.2
    nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        count = int(self.count)
        if count < 2:
            raise SizeError("detector grid needs at least two nodes")
        if not np.isfinite(self.s_max) or self.s_max < 1.0:
            raise ConfigurationError("detector grid must reach s_max >= 1")
        object.__setattr__(self, "count", count)
        object.__setattr__(self, "s_max", float(self.s_max))
        object.__setattr__(
            self, "nodes", _frozen(_symmetric_nodes(count, 2.0 * self.s_max / (count - 1)))
        )

    @classmethod
    def from_nodes(cls, nodes) -> "DetectorGrid":
        nodes = np.asarray(nodes, dtype=float).ravel()
        if nodes.size < 2 or np.any(np.diff(nodes) <= 0):
            raise ConfigurationError("detector nodes must be strictly increasing")
        if not _is_uniform(nodes):
            raise ConfigurationError("detector grid must be uniform")
        if abs(nodes[0] + nodes[-1]) > 1e-9 * abs(nodes[-1]):
            raise ConfigurationError("detector grid must be symmetric about 0")
        return cls(nodes.size, float(nodes[-1]))

    @classmethod
    def from_descriptor(cls, count, first, spacing) -> "DetectorGrid":
        grid = cls(int(count), -float(first))
        if abs(grid.spacing - spacing) > 1e-12 * abs(spacing):
            raise ConfigurationError("inconsistent detector grid descriptor")
        return grid

    @property
    def spacing(self) -> float:
        return 2.0 * self.s_max / (self.count - 1)

    @property
    def first(self) -> float:
        return float(self.nodes[0])

    def __eq__(self, other):
        return isinstance(other, DetectorGrid) and _same_bits(self.nodes, other.nodes)

    def __hash__(self):
        return hash(self.nodes.tobytes())


@dataclass(frozen=True)
class AngleGrid:
    """K equispaced view angles 2*pi*k/K on [0, 2*pi); K even."""

    count: int = 256

    def __post_init__(self):
        count = int(self.count)
        if count < 2 or count % 2:
            raise ConfigurationError("angle count must be an even number >= 2")
        object.__setattr__(self, "count", count)

    @property
    def nodes(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.count) / self.count


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Odd-length frequency grid symmetric about 0."""

    count: int
    spacing: float
    nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        count = int(self.count)
        if count < 1 or count % 2 == 0:
            raise ConfigurationError("frequency grid needs an odd number of nodes")
        if not self.spacing > 0:
            raise ConfigurationError("frequency spacing must be positive")
        object.__setattr__(self, "count", count)
        object.__setattr__(self, "spacing", float(self.spacing))
        object.__setattr__(self, "nodes", _frozen(_symmetric_nodes(count, self.spacing)))

    @property
    def first(self) -> float:
        return float(self.nodes[0])

    def __eq__(self, other):
        return isinstance(other, FrequencyGrid) and _same_bits(self.nodes, other.nodes)

    def __hash__(self):
        return hash(self.nodes.tobytes())


# --------------------------------------------------------------------------
# attenuation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantAttenuation:
    """Constant complex attenuation coefficient mu."""

    mu: complex = 0j

    def __post_init__(self):
        mu = complex(self.mu)
        if not (np.isfinite(mu.real) and np.isfinite(mu.imag)):
            raise ConfigurationError("mu must be finite")
        object.__setattr__(self, "mu", mu)

    def negated(self) -> "ConstantAttenuation":
        return ConstantAttenuation(-self.mu)

    def __call__(self, rho):
        return np.full(np.shape(rho), self.mu, dtype=complex)


@dataclass(frozen=True, eq=False)
class RadialAttenuation:
    """Radius-dependent complex attenuation eta(r) sampled on a uniform RadialGrid.

    Evaluation between samples uses :func:`interp_complex`; radii outside
    ``[r_1 - h, r_J + h]`` raise :class:`DomainError`.
    """

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex).ravel()
        if values.shape != self.grid.nodes.shape:
            raise ConfigurationError("eta profile length must match its radial grid")
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("eta profile values must be finite")
        if not self.grid.is_uniform or self.grid.count < 4:
            raise ConfigurationError("eta profile needs a uniform grid with >= 4 nodes")
        if self.grid.nodes[-1] < 1.0 - 1e-12 or self.grid.first > self.grid.spacing * (1 + 1e-9):
            raise ConfigurationError("eta profile grid must cover (0, 1]")
        object.__setattr__(self, "values", _frozen(values, complex))

    @classmethod
    def from_function(cls, fn: Callable, grid: Union[RadialGrid, int] = 256):
        if isinstance(grid, int):
            grid = RadialGrid.uniform(grid)
        return cls(grid, np.asarray(fn(grid.nodes), dtype=complex))

    def negated(self) -> "RadialAttenuation":
        return RadialAttenuation(self.grid, -self.values)

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        h = self.grid.spacing
        lo, hi = self.grid.first - h, self.grid.nodes[-1] + h
        tol = 1e-12
        if rho.size and (rho.min() < lo - tol or rho.max() > hi + tol):
            raise DomainError(
                f"eta requested at radii [{rho.min():.6g}, {rho.max():.6g}] outside "
                f"its grid span [{lo:.6g}, {hi:.6g}]"
            )
        return interp_complex(self.grid.nodes, self.values, np.clip(rho, lo, hi))

    def __eq__(self, other):
        return (
            isinstance(other, RadialAttenuation)
            and self.grid == other.grid
            and _same_bits(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.grid, self.values.tobytes()))


Attenuation = Union[ConstantAttenuation, RadialAttenuation, None]


def _check_att(att):
    if att is not None and not isinstance(att, (ConstantAttenuation, RadialAttenuation)):
        raise ConfigurationError(f"unknown attenuation model {type(att).__name__}")


# --------------------------------------------------------------------------
# data containers
# --------------------------------------------------------------------------


def _check_nrange(n_min, n_max):
    n_min, n_max = int(n_min), int(n_max)
    if n_max < n_min:
        raise ConfigurationError("empty harmonic range")
    return n_min, n_max


def _check_values(values, shape, what):
    arr = np.asarray(values, dtype=complex)
    if arr.shape != shape:
        raise ConfigurationError(f"{what} values have shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"{what} values must be finite")
    return _frozen(arr, complex)


class _HarmonicMixin:
    @property
    def n_values(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    def index(self, n: int) -> int:
        if not self.n_min <= n <= self.n_max:
            raise ConfigurationError(f"harmonic {n} outside [{self.n_min}, {self.n_max}]")
        return n - self.n_min

    def harmonic(self, n: int) -> np.ndarray:
        return self.values[self.index(n)]


@dataclass(frozen=True, eq=False)
class PolarImage(_HarmonicMixin):
    """Circular-harmonic radial profiles f_n(r_j); ``coeffs`` has shape (N, J)."""

    n_min: int
    n_max: int
    grid: RadialGrid
    coeffs: np.ndarray

    def __post_init__(self):
        n_min, n_max = _check_nrange(self.n_min, self.n_max)
        object.__setattr__(self, "n_min", n_min)
        object.__setattr__(self, "n_max", n_max)
        shape = (n_max - n_min + 1, self.grid.count)
        object.__setattr__(self, "coeffs", _check_values(self.coeffs, shape, "polar image"))

    @property
    def values(self):
        return self.coeffs

    @classmethod
    def zeros(cls, n_min, n_max, grid):
        return cls(n_min, n_max, grid, np.zeros((n_max - n_min + 1, grid.count), complex))

    def __eq__(self, other):
        return (
            isinstance(other, PolarImage)
            and (self.n_min, self.n_max) == (other.n_min, other.n_max)
            and self.grid == other.grid
            and _same_bits(self.coeffs, other.coeffs)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Sinogram:
    """Sampled p(s_i, theta_k); ``values`` has shape (K angles, I detectors)."""

    det: DetectorGrid
    ang: AngleGrid
    att: Attenuation
    values: np.ndarray

    def __post_init__(self):
        _check_att(self.att)
        shape = (self.ang.count, self.det.count)
        object.__setattr__(self, "values", _check_values(self.values, shape, "sinogram"))

    def __eq__(self, other):
        return (
            isinstance(other, Sinogram)
            and self.det == other.det
            and self.ang == other.ang
            and self.att == other.att
            and _same_bits(self.values, other.values)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class HarmonicSinogram(_HarmonicMixin):
    """Per-harmonic profiles p_n(s_i); ``values`` has shape (N, I)."""

    n_min: int
    n_max: int
    det: DetectorGrid
    att: Attenuation
    values: np.ndarray

    def __post_init__(self):
        _check_att(self.att)
        n_min, n_max = _check_nrange(self.n_min, self.n_max)
        object.__setattr__(self, "n_min", n_min)
        object.__setattr__(self, "n_max", n_max)
        shape = (n_max - n_min + 1, self.det.count)
        object.__setattr__(self, "values", _check_values(self.values, shape, "harmonic sinogram"))

    def with_values(self, values) -> "HarmonicSinogram":
        return HarmonicSinogram(self.n_min, self.n_max, self.det, self.att, values)

    def __eq__(self, other):
        return (
            isinstance(other, HarmonicSinogram)
            and (self.n_min, self.n_max) == (other.n_min, other.n_max)
            and self.det == other.det
            and self.att == other.att
            and _same_bits(self.values, other.values)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class FourierSinogram(_HarmonicMixin):
    """Fourier transforms p~_n(omega) of the harmonic profiles; shape (N, M)."""

    n_min: int
    n_max: int
    omega: FrequencyGrid
    att: Attenuation
    values: np.ndarray

    def __post_init__(self):
        _check_att(self.att)
        n_min, n_max = _check_nrange(self.n_min, self.n_max)
        object.__setattr__(self, "n_min", n_min)
        object.__setattr__(self, "n_max", n_max)
        shape = (n_max - n_min + 1, self.omega.count)
        object.__setattr__(self, "values", _check_values(self.values, shape, "Fourier sinogram"))

    def __eq__(self, other):
        return (
            isinstance(other, FourierSinogram)
            and (self.n_min, self.n_max) == (other.n_min, other.n_max)
            and self.omega == other.omega
            and self.att == other.att
            and _same_bits(self.values, other.values)
        )

    __hash__ = None


# --------------------------------------------------------------------------
# utilities
# --------------------------------------------------------------------------


def interp_complex(nodes, values, x):
    """Local four-point (cubic) Lagrange interpolation on a uniform grid.

    ``values`` holds samples along its last axis; the result has shape
    ``values.shape[:-1] + shape(x)``. Points within one spacing beyond either
    end are extrapolated from the end stencil; anything further out is 0.
    """
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values)
    if nodes.ndim != 1 or nodes.size < 4:
        raise SizeError("cubic interpolation needs a 1-D grid with at least 4 nodes")
    if values.shape[-1] != nodes.size:
        raise ConfigurationError("profile length does not match its grid")
    if not _is_uniform(nodes):
        raise ConfigurationError("interp_complex requires a uniform grid")
    x = np.asarray(x, dtype=float)
    first = nodes[0]
    h = (nodes[-1] - nodes[0]) / (nodes.size - 1)
    pos = (x - first) / h
    inside = (pos >= -1.0 - 1e-12) & (pos <= nodes.size + 1e-12)
    k0 = np.clip(np.floor(pos).astype(np.int64) - 1, 0, nodes.size - 4)
    xi = pos - k0
    snap = np.abs(xi - np.rint(xi)) <= 64 * np.finfo(float).eps * np.maximum(1.0, np.abs(pos))
    xi = np.where(snap, np.rint(xi), xi)
    w0 = -(xi - 1) * (xi - 2) * (xi - 3) / 6.0
    w1 = xi * (xi - 2) * (xi - 3) / 2.0
    w2 = -xi * (xi - 1) * (xi - 3) / 2.0
    w3 = xi * (xi - 1) * (xi - 2) / 6.0
    out = (
        w0 * values[..., k0]
        + w1 * values[..., k0 + 1]
        + w2 * values[..., k0 + 2]
        + w3 * values[..., k0 + 3]
    )
    return np.where(inside, out, 0)


def _fd4(values, h):
    if values.shape[-1] < 5:
        raise SizeError("fourth-order differences need at least 5 nodes")
    pad = np.zeros(values.shape[:-1] + (2,), dtype=values.dtype)
    v = np.concatenate([pad, values, pad], axis=-1)
    return (v[..., :-4] - 8 * v[..., 1:-3] + 8 * v[..., 3:-1] - v[..., 4:]) / (12.0 * h)


def derivative_s(h: HarmonicSinogram) -> HarmonicSinogram:
    """Fourth-order central s-derivative with zero extension past the grid."""
    return h.with_values(_fd4(np.asarray(h.values), h.det.spacing))
