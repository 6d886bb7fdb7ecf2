"""scikit-learn style wrappers around the functional API.

Arrays in these estimators are complex harmonic tables with the harmonic
index on axis 0, i.e. shape (n_max - n_min + 1, grid count). Typed objects
(PolarImage, HarmonicSinogram, PhantomSpec) are accepted as well and are
returned as typed objects.
"""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import ConfigurationError
from .grids import (
    ConstantAttenuation,
    DetectorGrid,
    HarmonicSinogram,
    PolarImage,
    RadialAttenuation,
    RadialGrid,
    derivative_s,
)
from .inversion import InversionMethod, SeriesForm, invert
from .phantoms import PhantomSpec
from .projector import project_harmonic
from .special import BranchConvention

__all__ = [
    "check_attenuation",
    "check_harmonic_array",
    "check_n_range",
    "ERTProjector",
    "ERTReconstructor",
]


def check_n_range(n_range):
    """Validate an inclusive (n_min, n_max) pair of integers."""
    try:
        n_min, n_max = n_range
    except (TypeError, ValueError):
        raise ConfigurationError("n_range must be a pair (n_min, n_max)") from None
    if not all(isinstance(v, numbers.Integral) for v in (n_min, n_max)):
        raise ConfigurationError("n_range entries must be integers")
    if n_max < n_min:
        raise ConfigurationError("n_range is empty")
    return int(n_min), int(n_max)


def check_attenuation(mu=None, eta=None):
    """Build an attenuation model from a scalar ``mu`` or a radial ``eta``."""
    if mu is not None and eta is not None:
        raise ConfigurationError("give either mu or eta, not both")
    if eta is not None:
        if isinstance(eta, RadialAttenuation):
            return eta
        if callable(eta):
            return RadialAttenuation.from_function(eta, 256)
        raise ConfigurationError("eta must be a RadialAttenuation or a callable")
    if mu is None:
        return ConstantAttenuation(0.0)
    if isinstance(mu, ConstantAttenuation):
        return mu
    if not isinstance(mu, numbers.Number) or not np.isfinite(complex(mu)):
        raise ConfigurationError("mu must be a finite number")
    return ConstantAttenuation(complex(mu))


def check_harmonic_array(X, n_rows=None, min_cols=4, name="X"):
    """Validate a 2-D finite complex table; returns a complex ndarray."""
    arr = np.asarray(X)
    if arr.dtype == object or not np.issubdtype(arr.dtype, np.number):
        raise ConfigurationError(f"{name} must be numeric")
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ConfigurationError(f"{name} must be 2-D (harmonics, nodes), got {arr.ndim}-D")
    if n_rows is not None and arr.shape[0] != n_rows:
        raise ConfigurationError(f"{name} has {arr.shape[0]} harmonic rows, expected {n_rows}")
    if arr.shape[1] < min_cols:
        raise ConfigurationError(f"{name} needs at least {min_cols} columns")
    arr = arr.astype(complex)
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"{name} contains NaN or infinity")
    return arr


class ERTProjector(TransformerMixin, BaseEstimator):
    """Harmonic forward projector f_n(r) -> p_n(s).

    Parameters mirror :func:`project_harmonic`. ``fit`` only validates the
    configuration; the operator has no learned state.
    """

    def __init__(self, mu=0.0, eta=None, n_range=(-8, 8), detectors=512, s_max=1.2,
                 conv="C1", rtol=1e-12):
        self.mu = mu
        self.eta = eta
        self.n_range = n_range
        self.detectors = detectors
        self.s_max = s_max
        self.conv = conv
        self.rtol = rtol

    def fit(self, X=None, y=None):
        self.n_range_ = check_n_range(self.n_range)
        self.att_ = check_attenuation(self.mu, self.eta)
        self.det_ = DetectorGrid(int(self.detectors), float(self.s_max))
        self.conv_ = BranchConvention.coerce(self.conv)
        return self

    def transform(self, X):
        check_is_fitted(self, "det_")
        n_min, n_max = self.n_range_
        if isinstance(X, PhantomSpec):
            return project_harmonic(X, self.att_, self.det_, self.conv_, n_range=self.n_range_,
                                    rtol=self.rtol)
        if isinstance(X, PolarImage):
            return project_harmonic(X, self.att_, self.det_, self.conv_, rtol=self.rtol)
        arr = check_harmonic_array(X, n_max - n_min + 1)
        img = PolarImage(n_min, n_max, RadialGrid.uniform(arr.shape[1]), arr)
        return np.asarray(project_harmonic(img, self.att_, self.det_, self.conv_, rtol=self.rtol).values)


class ERTReconstructor(TransformerMixin, BaseEstimator):
    """Reconstruct f_n(r) from p_n(s) with one of the four inversion methods.

    ``transform`` differentiates in s (unless ``differentiate=False``) and
    inverts. ``score`` is minus the worst per-harmonic relative L2 error
    against reference harmonics, so larger is better as scikit-learn expects.
    """

    def __init__(self, method="unified", mu=0.0, eta=None, radial_nodes=256, s_max=1.2,
                 conv="C1", form="corrected", differentiate=True):
        self.method = method
        self.mu = mu
        self.eta = eta
        self.radial_nodes = radial_nodes
        self.s_max = s_max
        self.conv = conv
        self.form = form
        self.differentiate = differentiate

    def fit(self, X=None, y=None):
        self.method_ = InversionMethod.coerce(self.method)
        self.att_ = check_attenuation(self.mu, self.eta)
        self.grid_ = RadialGrid.uniform(int(self.radial_nodes))
        self.conv_ = BranchConvention.coerce(self.conv)
        self.form_ = SeriesForm.coerce(self.form)
        if isinstance(X, HarmonicSinogram):
            self.n_range_ = (X.n_min, X.n_max)
        elif X is not None:
            self.n_range_ = (-(np.asarray(X).shape[0] // 2), np.asarray(X).shape[0] // 2)
        return self

    def _as_sinogram(self, X):
        if isinstance(X, HarmonicSinogram):
            return X
        arr = check_harmonic_array(X, min_cols=5)
        if arr.shape[0] % 2 == 0:
            raise ConfigurationError("array input needs an odd number of rows (n = -N..N)")
        half = arr.shape[0] // 2
        det = DetectorGrid(arr.shape[1], float(self.s_max))
        return HarmonicSinogram(-half, half, det, self.att_, arr)

    def transform(self, X):
        check_is_fitted(self, "grid_")
        hs = self._as_sinogram(X)
        hp = derivative_s(hs) if self.differentiate else hs
        kw = {}
        if self.method_ in (InversionMethod.INTERIOR_SERIES, InversionMethod.EXTERIOR_SERIES):
            kw["form"] = self.form_
        img = invert(hp, self.method_, att=self.att_, grid=self.grid_, conv=self.conv_, **kw)
        return img if isinstance(X, HarmonicSinogram) else np.asarray(img.values)

    def predict(self, X):
        return self.transform(X)

    def score(self, X, y):
        rec = self.transform(X)
        rec = np.asarray(rec.values if isinstance(rec, PolarImage) else rec)
        ref = np.asarray(y.values if isinstance(y, PolarImage) else y, dtype=complex)
        if ref.shape != rec.shape:
            raise ConfigurationError(f"reference shape {ref.shape} != reconstruction {rec.shape}")
        norms = np.linalg.norm(ref, axis=1)
        errs = np.linalg.norm(rec - ref, axis=1) / np.where(norms > 0, norms, 1.0)
        return -float(np.max(errs))
