import json

import numpy as np
import pytest

from expradon import (
    ConstantAttenuation,
    DetectorGrid,
    RadialAttenuation,
    UnsupportedAttenuationError,
    check_evenness,
    check_fourier_evenness,
    check_moments,
    check_moments_derivative,
    check_novikov_harmonic,
    default_phantom,
    derivative_s,
    fourier_in_s,
    project_harmonic,
)
from expradon.errors import ConfigurationError

MU = 0.3 + 0.2j
NR = (-4, 4)
SPEC = default_phantom()


def sino(mu, count=512):
    return project_harmonic(SPEC, ConstantAttenuation(mu), DetectorGrid(count, 1.2), n_range=NR)


H = sino(MU)
DP = derivative_s(H)


def test_forward_data_is_even():
    rep = check_evenness(H, sino(-MU))
    assert rep.passed and rep.max_scaled() < 1e-12


def test_moments_vanish_over_the_whole_line():
    assert check_moments(H, (0.0,)).max_scaled() < 1e-8
    assert check_moments_derivative(DP).max_scaled() < 1e-7


def test_truncated_moments_do_not_vanish_and_do_not_converge_to_zero():
    coarse = check_moments(sino(MU, 256), (0.3,)).max_scaled()
    fine = check_moments(sino(MU, 1024), (0.3,)).max_scaled()
    assert coarse > 1e-2 and fine > 1e-2
    assert abs(fine - coarse) < 0.1 * fine


def test_corrected_novikov_holds_where_printed_form_does_not():
    corrected = check_novikov_harmonic(DP, form="corrected")
    printed = check_novikov_harmonic(DP, form="printed")
    assert corrected.max_scaled() < 1e-6
    assert printed.max_scaled() > 1e-2


def test_fourier_evenness_for_real_attenuation():
    ft = fourier_in_s(sino(0.5))
    assert check_fourier_evenness(ft).max_scaled() < 1e-2
    with pytest.raises(UnsupportedAttenuationError):
        check_fourier_evenness(fourier_in_s(H))


def test_checks_need_constant_attenuation():
    eta = RadialAttenuation.from_function(lambda r: 0.3 + 0.2 * r * r, 64)
    hp = derivative_s(project_harmonic(SPEC, eta, DetectorGrid(128, 1.2), n_range=(-1, 1)))
    with pytest.raises(UnsupportedAttenuationError):
        check_novikov_harmonic(hp)
    with pytest.raises(ConfigurationError):
        check_moments(H, (-0.1,))


def test_checks_are_blind_to_overall_scale():
    scaled = DP.with_values(np.asarray(DP.values) * (3 - 2j))
    a = check_novikov_harmonic(DP, form="corrected").max_scaled()
    b = check_novikov_harmonic(scaled, form="corrected").max_scaled()
    assert abs(a - b) <= 1e-6 * max(a, 1e-300) + 1e-15


def test_report_serialises_and_combines():
    rep = check_evenness(H, sino(-MU)) + check_moments(H)
    d = json.loads(rep.to_json())
    assert d["passed"] is True
    assert set(d["summary"]) == {"evenness", "moments"}
    assert len(d["entries"]) == len(rep.entries)
    assert rep.worst("moments").check == "moments"
