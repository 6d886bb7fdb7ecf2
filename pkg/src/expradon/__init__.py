"""Exponential Radon transform with complex attenuation.

Forward projectors, four harmonic inversion methods, range validators,
closed-form phantoms and a binary container format.
"""

from .errors import (
    AccuracyError,
    AliasingError,
    AliasingWarning,
    ConditioningWarning,
    ConfigurationError,
    DegeneratePointError,
    DomainError,
    ERTError,
    ParseError,
    SizeError,
    TruncationWarning,
    UnsupportedAttenuationError,
)
from .grids import (
    AngleGrid,
    ConstantAttenuation,
    DetectorGrid,
    FourierSinogram,
    FrequencyGrid,
    HarmonicSinogram,
    PolarImage,
    RadialAttenuation,
    RadialGrid,
    Sinogram,
    derivative_s,
    interp_complex,
)
from .special import (
    BranchConvention,
    effective_mu,
    ert_cheb_T,
    ert_cheb_TU,
    ert_cheb_U,
    orthogonality_integral,
)
from .projector import decompose_angular, fourier_in_s, project_direct, project_harmonic, synthesize_angular
from .inversion import InversionMethod, SeriesForm, assemble_image, invert, kernel_oracle, kernel_unified
from .range_checks import (
    RangeReport,
    check_evenness,
    check_fourier_evenness,
    check_moments,
    check_moments_derivative,
    check_novikov_harmonic,
)
from .phantoms import HarmonicBump, OffCenterBump, PhantomSpec, default_phantom, phantom_harmonics
from .io import dumps_ert, ert_file_size, export_csv, export_pgm, loads_ert, read_csv, read_ert, write_ert
from .estimators import ERTProjector, ERTReconstructor

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
