import numpy as np
import pytest

from expradon import (
    AliasingError,
    AngleGrid,
    ConstantAttenuation,
    DetectorGrid,
    HarmonicBump,
    HarmonicSinogram,
    PhantomSpec,
    RadialAttenuation,
    RadialGrid,
    check_evenness,
    decompose_angular,
    fourier_in_s,
    phantom_harmonics,
    project_direct,
    project_harmonic,
    synthesize_angular,
)

MU = 0.3 + 0.2j


def paraboloid(x, y):
    r2 = x * x + y * y
    return np.where(r2 <= 1, 1 - r2, 0.0)


def test_direct_projection_of_paraboloid_closed_form():
    det, ang = DetectorGrid(65, 1.2), AngleGrid(4)
    p = project_direct(paraboloid, det, ang, None)
    s = det.nodes
    exact = np.where(np.abs(s) < 1, 4 / 3 * np.clip(1 - s * s, 0, None) ** 1.5, 0)
    assert np.max(np.abs(p.values - exact)) <= 1e-10


def test_direct_projection_with_real_mu_is_even():
    det, ang = DetectorGrid(64, 1.2), AngleGrid(8)
    p = project_direct(paraboloid, det, ang, ConstantAttenuation(0.5)).values
    # p(-s, theta + pi) = p(s, theta) for a radial object and real mu
    flipped = np.roll(p, -4, axis=0)[:, ::-1]
    assert np.max(np.abs(flipped - p)) <= 1e-12 * np.max(np.abs(p))


def test_radial_object_has_only_zeroth_harmonic():
    det, ang = DetectorGrid(32, 1.2), AngleGrid(16)
    h = decompose_angular(project_direct(paraboloid, det, ang, ConstantAttenuation(MU)), (-4, 4))
    others = np.delete(np.asarray(h.values), 4, axis=0)
    assert np.max(np.abs(others)) <= 1e-13 * np.max(np.abs(h.values))


def test_decompose_then_synthesize_is_identity_on_band_limited_data():
    rng = np.random.default_rng(3)
    det, ang = DetectorGrid(16, 1.2), AngleGrid(32)
    h = HarmonicSinogram(-5, 5, det, None, rng.normal(size=(11, 16)) + 1j * rng.normal(size=(11, 16)))
    back = decompose_angular(synthesize_angular(h, ang), (-5, 5))
    assert np.max(np.abs(back.values - h.values)) <= 1e-13


def test_decompose_refuses_aliased_harmonics():
    det, ang = DetectorGrid(16, 1.2), AngleGrid(8)
    sino = synthesize_angular(HarmonicSinogram(0, 0, det, None, np.ones((1, 16))), ang)
    with pytest.raises(AliasingError):
        decompose_angular(sino, (-4, 4))


@pytest.mark.parametrize("att", [ConstantAttenuation(MU),
                                 RadialAttenuation.from_function(lambda r: 0.3 + 0.2 * r * r, 64)])
def test_harmonic_projector_matches_line_integrals(att):
    spec = PhantomSpec(tuple(HarmonicBump(n, 3, a) for n, a in ((0, 1), (2, 1j), (-5, 3), (5, 2))))
    det, ang = DetectorGrid(128, 1.2), AngleGrid(64)
    a = project_harmonic(spec, att, det, n_range=(-6, 6))
    b = decompose_angular(project_direct(spec, det, ang, att), (-6, 6))
    for n in (-5, 0, 2, 5):
        assert np.linalg.norm(a.harmonic(n) - b.harmonic(n)) <= 1e-8 * np.linalg.norm(b.harmonic(n))


def test_polar_image_and_exact_harmonics_project_alike():
    spec = PhantomSpec((HarmonicBump(1, 3, 1.0), HarmonicBump(-2, 4, 0.5j)))
    det = DetectorGrid(64, 1.2)
    img = phantom_harmonics(spec, RadialGrid.uniform(256), (-2, 2))
    a = project_harmonic(img, ConstantAttenuation(MU), det)
    b = project_harmonic(spec, ConstantAttenuation(MU), det, n_range=(-2, 2))
    assert np.max(np.abs(a.values - b.values)) <= 1e-7 * np.max(np.abs(b.values))


def test_evenness_between_plus_and_minus_mu():
    spec = PhantomSpec((HarmonicBump(3, 3, 1.0), HarmonicBump(-1, 3, 2.0)))
    det = DetectorGrid(64, 1.2)
    hp = project_harmonic(spec, ConstantAttenuation(MU), det, n_range=(-3, 3))
    hm = project_harmonic(spec, ConstantAttenuation(-MU), det, n_range=(-3, 3))
    assert check_evenness(hp, hm).max_scaled() <= 1e-12


def test_fourier_transform_matches_quadrature():
    det = DetectorGrid(513, 1.2)
    s = det.nodes
    h = HarmonicSinogram(0, 0, det, None, np.where(np.abs(s) < 1, (1 - s * s) ** 2, 0)[None, :])
    ft = fourier_in_s(h)
    w = np.asarray(ft.omega.nodes)
    # grid index -> (omega, int (1 - s^2)^2 e^{-i s omega} ds by 30-digit quadrature)
    frozen = {
        1026: (0.6532226440212695, 1.0345390620346575),
        1030: (3.2661132201063476, 0.4595389454502624),
        1040: (9.798339660319042, 0.010861354213072319),
    }
    for k, (omega, val) in frozen.items():
        assert w[k] == pytest.approx(omega, rel=1e-14)
        assert abs(ft.values[0][k] - val) <= 1e-6 * abs(val)
    np.testing.assert_allclose(ft.values[0][::-1], np.conj(ft.values[0]), atol=1e-14)
