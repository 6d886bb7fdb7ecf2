import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from expradon import (
    ConfigurationError,
    ERTProjector,
    ERTReconstructor,
    HarmonicBump,
    HarmonicSinogram,
    PhantomSpec,
    PolarImage,
    RadialAttenuation,
    RadialGrid,
    phantom_harmonics,
)
from expradon.estimators import check_attenuation, check_n_range

SPEC = PhantomSpec((HarmonicBump(0, 3, 1.0), HarmonicBump(1, 3, 2.0), HarmonicBump(-1, 3, 1j)))


def test_params_round_trip_through_clone():
    est = ERTReconstructor(method="cormack", mu=0.3 + 0.2j, radial_nodes=32)
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    twin.set_params(method="unified")
    assert est.method == "cormack"


def test_transform_before_fit_raises():
    with pytest.raises(NotFittedError):
        ERTProjector().transform(SPEC)


def test_projector_reconstructor_pipeline():
    proj = ERTProjector(mu=0.3 + 0.2j, n_range=(-1, 1), detectors=256).fit()
    hs = proj.transform(SPEC)
    assert isinstance(hs, HarmonicSinogram)
    rec = ERTReconstructor(mu=0.3 + 0.2j, radial_nodes=64).fit(hs)
    truth = phantom_harmonics(SPEC, RadialGrid.uniform(64), (-1, 1))
    assert isinstance(rec.transform(hs), PolarImage)
    assert rec.score(hs, truth) > -1e-2


def test_array_inputs_give_arrays():
    grid = RadialGrid.uniform(64)
    f = np.asarray(phantom_harmonics(SPEC, grid, (-1, 1)).values)
    p = ERTProjector(mu=0.5, n_range=(-1, 1), detectors=256).fit_transform(f)
    assert isinstance(p, np.ndarray) and p.shape == (3, 256)
    out = ERTReconstructor(mu=0.5, radial_nodes=64).fit(p).predict(p)
    assert out.shape == (3, 64)


@pytest.mark.parametrize("bad", [(3, 1), (0.5, 2), 7, ("a", 1)])
def test_bad_n_range(bad):
    with pytest.raises(ConfigurationError):
        check_n_range(bad)


def test_attenuation_validation():
    assert check_attenuation(None).mu == 0
    assert isinstance(check_attenuation(eta=lambda r: 0.2 + 0 * r), RadialAttenuation)
    for kw in ({"mu": float("nan")}, {"mu": "x"}, {"mu": 1, "eta": lambda r: r}, {"eta": 3}):
        with pytest.raises(ConfigurationError):
            check_attenuation(**kw)


def test_array_validation():
    rec = ERTReconstructor(radial_nodes=16).fit()
    with pytest.raises(ConfigurationError):
        rec.transform(np.ones((2, 16)))  # even number of harmonics
    with pytest.raises(ConfigurationError):
        rec.transform(np.full((3, 16), np.nan))
    with pytest.raises(ConfigurationError):
        ERTProjector(n_range=(-1, 1)).fit().transform(np.ones((2, 16)))
