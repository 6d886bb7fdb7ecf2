import numpy as np
import pytest

from expradon import (
    ConfigurationError,
    HarmonicBump,
    OffCenterBump,
    PhantomSpec,
    RadialGrid,
    default_phantom,
    phantom_harmonics,
)
from expradon.phantoms import eval_phantom_cartesian
from expradon.projector import evaluate_polar


def numeric_harmonics(spec, r, n_values, samples=4096):
    phi = 2 * np.pi * np.arange(samples) / samples
    x, y = r[:, None] * np.cos(phi), r[:, None] * np.sin(phi)
    f = spec(x, y)
    return np.stack([(f * np.exp(-1j * n * phi)).mean(axis=1) for n in n_values])


def test_default_phantom_covers_negative_one():
    ns = {t.n for t in default_phantom().terms if isinstance(t, HarmonicBump)}
    assert {-1, 0, 1, 2, 5} <= ns


def test_closed_form_harmonics_match_angular_quadrature():
    spec = default_phantom()
    r = np.linspace(0.01, 1.0, 57)
    ns = range(-9, 10)
    np.testing.assert_allclose(spec.harmonic_profiles(r, ns), numeric_harmonics(spec, r, ns), atol=1e-13)


def test_centered_off_center_bump_is_radial():
    spec = PhantomSpec((OffCenterBump((0.0, 0.0), 0.5, 3, 1.0),))
    prof = spec.harmonic_profiles(np.linspace(0.05, 1, 20), range(-3, 4))
    assert np.max(np.abs(np.delete(prof, 3, axis=0))) < 1e-15
    assert np.max(np.abs(prof[3])) > 0.1


def test_polar_synthesis_reproduces_field():
    spec = default_phantom()
    # the off-centre bump is only C^2 across its rim, so many harmonics are needed
    img = phantom_harmonics(spec, RadialGrid.uniform(256), (-160, 160))
    rng = np.random.default_rng(1)
    rad, ang = np.sqrt(rng.uniform(0.0, 0.97, 300)), rng.uniform(0, 2 * np.pi, 300)
    x, y = rad * np.cos(ang), rad * np.sin(ang)
    err = np.abs(evaluate_polar(img, x, y) - eval_phantom_cartesian(spec, x, y))
    assert err.max() <= 1e-6


def test_json_round_trip():
    spec = default_phantom()
    back = PhantomSpec.from_json(spec.to_json())
    assert back == spec
    x = np.linspace(-1, 1, 9)
    np.testing.assert_array_equal(back(x, x[::-1]), spec(x, x[::-1]))


def test_phantom_validation():
    with pytest.raises(ConfigurationError):
        HarmonicBump(1, 2)
    with pytest.raises(ConfigurationError):
        OffCenterBump((0.9, 0.0), 0.4)
    with pytest.raises((ConfigurationError, KeyError, ValueError)):
        PhantomSpec.from_json('{"terms": [{"type": "nonsense"}]}')
