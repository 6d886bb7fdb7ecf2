import warnings

import numpy as np
import pytest

from expradon import (
    ConditioningWarning,
    ConstantAttenuation,
    DegeneratePointError,
    DetectorGrid,
    HarmonicBump,
    InversionMethod,
    PhantomSpec,
    RadialAttenuation,
    RadialGrid,
    UnsupportedAttenuationError,
    assemble_image,
    derivative_s,
    invert,
    kernel_oracle,
    kernel_unified,
    phantom_harmonics,
    project_harmonic,
)
from expradon.inversion import _literal_U, series_kernel
from expradon.selftest import relative_errors

MU = 0.3 + 0.2j
SPEC = PhantomSpec((HarmonicBump(0, 3, 1.0), HarmonicBump(1, 3, 2.0), HarmonicBump(-1, 3, 1 - 1j),
                    HarmonicBump(2, 3, 3j), HarmonicBump(-3, 3, 4.0)))
DET = DetectorGrid(256, 1.2)
GRID = RadialGrid.uniform(64)
NR = (-3, 3)


def data(mu, spec=SPEC):
    att = mu if isinstance(mu, RadialAttenuation) else ConstantAttenuation(mu)
    return derivative_s(project_harmonic(spec, att, DET, n_range=NR))


TRUTH = phantom_harmonics(SPEC, GRID, NR)


@pytest.mark.parametrize("n", [-3, -1, 0, 2, 5])
@pytest.mark.parametrize("r,s", [(0.6, 0.2), (0.5, -0.4), (0.5, 1.1), (0.4, -0.7)])
def test_unified_kernel_matches_contour_oracle(n, r, s):
    o = kernel_oracle(n, r, s, MU, "+" if n >= 0 else "-")
    assert abs(kernel_unified(n, r, s, MU) - o) <= 1e-9 * max(1, abs(o))


@pytest.mark.parametrize("n", [1, 2, 4])
def test_interior_series_kernel_identity(n):
    r, s = 0.7, 0.25
    closed = (-_literal_U(n, np.array(s), r, -MU) + 2 * series_kernel(n, np.array(s), r, MU)) / (2 * r)
    assert abs(closed - kernel_oracle(n, r, s, MU, "-")) <= 1e-9


def test_kernels_reject_degenerate_points():
    with pytest.raises(DegeneratePointError):
        kernel_unified(1, 0.5, 0.5, MU)
    with pytest.raises(DegeneratePointError):
        kernel_oracle(1, 0.5, -0.5, MU)


def test_unified_round_trip():
    rec = invert(data(MU), "unified", grid=GRID)
    assert max(relative_errors(rec, TRUTH).values()) <= 1e-2


def test_classical_case_recovers_radial_profile():
    spec = PhantomSpec((HarmonicBump(0, 3, 1.0),))
    rec = invert(data(0.0, spec), "unified", grid=GRID)
    truth = (1 - GRID.nodes**2) ** 3
    assert np.linalg.norm(rec.harmonic(0) - truth) <= 1e-2 * np.linalg.norm(truth)


def test_series_forms_on_outer_radii():
    far = GRID.nodes >= 0.2
    dp = data(MU)
    for method in ("interior", "exterior"):
        good = relative_errors(invert(dp, method, grid=GRID, form="corrected"), TRUTH, far)
        bad = relative_errors(invert(dp, method, grid=GRID, form="printed"), TRUTH, far)
        assert max(good.values()) <= 1e-2
        # the printed forms miss a residue and are off by O(1) for n != 0
        assert min(bad[n] for n in (-3, -1, 1, 2)) > 0.3


def test_cormack_reads_only_positive_offsets():
    dp = data(MU)
    v = np.array(dp.values)
    v[:, DET.nodes < 0] = 123.0
    a = invert(dp, "cormack", grid=GRID)
    b = invert(dp.with_values(v), "cormack", grid=GRID)
    np.testing.assert_array_equal(a.values, b.values)
    far = GRID.nodes >= 0.2
    assert max(relative_errors(a, TRUTH, far).values()) <= 1e-2


def test_cormack_radial_with_constant_profile_equals_constant():
    eta = RadialAttenuation.from_function(lambda r: MU + 0 * r, 64)
    dp = data(MU)
    a = invert(dp, "cormack", att=eta, grid=GRID)
    b = invert(dp, "cormack", grid=GRID)
    assert np.max(np.abs(a.values - b.values)) <= 1e-8 * np.max(np.abs(b.values))


def test_radial_attenuation_is_cormack_only():
    eta = RadialAttenuation.from_function(lambda r: 0.3 + 0.2 * r * r, 64)
    for method in ("unified", "interior", "exterior"):
        with pytest.raises(UnsupportedAttenuationError):
            invert(data(MU), method, att=eta, grid=GRID)


def test_exterior_series_warns_for_large_orders():
    spec = PhantomSpec((HarmonicBump(13, 3, 1.0),))
    dp = derivative_s(project_harmonic(spec, ConstantAttenuation(MU), DET, n_range=(13, 13)))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        invert(dp, "exterior", grid=RadialGrid.uniform(8))
    assert any(issubclass(w.category, ConditioningWarning) for w in caught)


def test_method_names_and_image_assembly():
    assert InversionMethod.coerce("Cormack") is InversionMethod.CORMACK_EXTERIOR
    with pytest.raises(ValueError):
        InversionMethod.coerce("fbp")
    img = assemble_image(TRUTH, n_pixels=33)
    assert img.shape == (33, 33)
    assert abs(img[16, 16] - 1.0) < 1e-2  # only f_0(0) = 1 survives at the centre
