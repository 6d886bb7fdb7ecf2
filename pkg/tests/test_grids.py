import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expradon import (
    AngleGrid,
    ConfigurationError,
    ConstantAttenuation,
    DetectorGrid,
    DomainError,
    HarmonicSinogram,
    PolarImage,
    RadialAttenuation,
    RadialGrid,
    SizeError,
    derivative_s,
    interp_complex,
)


def test_radial_grid_uniform_nodes():
    g = RadialGrid.uniform(4)
    np.testing.assert_array_equal(g.nodes, [0.25, 0.5, 0.75, 1.0])
    assert g.count == 4 and g.spacing == 0.25 and g.is_uniform


@pytest.mark.parametrize("nodes", [[0.0, 0.5], [0.5, 0.4], [0.2, 1.5], [np.nan, 0.5], []])
def test_radial_grid_rejects_bad_nodes(nodes):
    with pytest.raises(ConfigurationError):
        RadialGrid(np.array(nodes, dtype=float))


def test_radial_grid_equality_is_bitwise():
    assert RadialGrid.uniform(8) == RadialGrid(np.arange(1, 9) / 8)
    assert hash(RadialGrid.uniform(8)) == hash(RadialGrid.uniform(8))
    assert RadialGrid.uniform(8) != RadialGrid.uniform(9)


def test_detector_grid_is_symmetric_and_uniform():
    for count in (2, 7, 512):
        det = DetectorGrid(count, 1.2)
        np.testing.assert_array_equal(det.nodes, -det.nodes[::-1])
        assert det.nodes[0] == -1.2 and det.nodes[-1] == 1.2
        assert DetectorGrid.from_descriptor(count, det.first, det.spacing) == det


def test_detector_grid_rejects_small_span_and_count():
    with pytest.raises(ConfigurationError):
        DetectorGrid(64, 0.9)
    with pytest.raises(SizeError):
        DetectorGrid(1, 1.2)


def test_angle_grid_requires_even_count():
    assert AngleGrid(4).nodes[1] == pytest.approx(np.pi / 2)
    with pytest.raises(ConfigurationError):
        AngleGrid(5)


@settings(max_examples=40, deadline=None)
@given(coeffs=st.lists(st.floats(-5, 5), min_size=4, max_size=4),
       x=st.lists(st.floats(-1.0, 1.0), min_size=1, max_size=20))
def test_interp_complex_is_exact_on_cubics(coeffs, x):
    nodes = np.linspace(-1.0, 1.0, 21)
    poly = np.polynomial.Polynomial(coeffs)
    vals = poly(nodes) * (1 - 2j)
    out = interp_complex(nodes, vals, np.array(x))
    np.testing.assert_allclose(out, poly(np.array(x)) * (1 - 2j), atol=1e-11)


def test_interp_complex_vanishes_far_outside():
    nodes = np.linspace(0, 1, 11)
    assert interp_complex(nodes, np.ones(11), np.array([1.5, -0.5])).tolist() == [0, 0]


def test_derivative_is_fourth_order():
    errs = []
    for count in (101, 201, 401):
        det = DetectorGrid(count, 1.2)
        s = det.nodes
        p = np.where(np.abs(s) < 1, (1 - s * s) ** 6, 0).astype(complex)
        exact = np.where(np.abs(s) < 1, -12 * s * (1 - s * s) ** 5, 0)
        h = HarmonicSinogram(0, 0, det, None, p[None, :])
        errs.append(np.max(np.abs(derivative_s(h).values[0] - exact)))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 3.7), rates


def test_containers_validate_shapes_and_values():
    g = RadialGrid.uniform(4)
    with pytest.raises(ConfigurationError):
        PolarImage(0, 1, g, np.zeros((1, 4)))
    with pytest.raises(ConfigurationError):
        PolarImage(0, 0, g, np.full((1, 4), np.nan))
    with pytest.raises(ConfigurationError):
        PolarImage(2, 1, g, np.zeros((0, 4)))
    img = PolarImage.zeros(-1, 1, g)
    assert img.harmonic(-1).shape == (4,)
    with pytest.raises(ConfigurationError):
        img.harmonic(2)


def test_radial_attenuation_domain():
    eta = RadialAttenuation.from_function(lambda r: 0.3 + 0 * r, 16)
    assert eta(np.array([0.0, 1.0]))[0] == pytest.approx(0.3)
    with pytest.raises(DomainError):
        eta(np.array([1.5]))
    with pytest.raises(ConfigurationError):
        RadialAttenuation(RadialGrid.uniform(8, 0.5), np.zeros(8))
    assert eta.negated()(np.array([0.5]))[0] == pytest.approx(-0.3)
    assert ConstantAttenuation(1j) == ConstantAttenuation(1j)
