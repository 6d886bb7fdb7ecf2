import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from expradon import (
    AngleGrid,
    ConstantAttenuation,
    DetectorGrid,
    FourierSinogram,
    FrequencyGrid,
    HarmonicSinogram,
    ParseError,
    PolarImage,
    RadialAttenuation,
    RadialGrid,
    Sinogram,
    dumps_ert,
    ert_file_size,
    export_csv,
    export_pgm,
    loads_ert,
    read_csv,
    read_ert,
    write_ert,
)

finite = st.floats(-1e300, 1e300, allow_nan=False)


def cvals(rows, cols):
    return st.tuples(arrays(float, (rows, cols), elements=finite),
                     arrays(float, (rows, cols), elements=finite)).map(lambda t: t[0] + 1j * t[1])


atts = st.one_of(
    st.none(),
    st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False).map(ConstantAttenuation),
    st.integers(4, 9).map(lambda j: RadialAttenuation.from_function(lambda r: 0.3 + 0.1j * r, j)),
)


@st.composite
def objects(draw):
    kind = draw(st.integers(0, 3))
    n_min = draw(st.integers(-5, 3))
    n_max = n_min + draw(st.integers(0, 3))
    rows = n_max - n_min + 1
    if kind == 0:
        det, ang = DetectorGrid(draw(st.integers(2, 9)), 1.2), AngleGrid(2 * draw(st.integers(1, 4)))
        return Sinogram(det, ang, draw(atts), draw(cvals(ang.count, det.count)))
    if kind == 1:
        det = DetectorGrid(draw(st.integers(2, 9)), draw(st.floats(1, 3)))
        return HarmonicSinogram(n_min, n_max, det, draw(atts), draw(cvals(rows, det.count)))
    if kind == 2:
        if draw(st.booleans()):
            grid = RadialGrid.uniform(draw(st.integers(1, 9)))
        else:
            grid = RadialGrid(np.sort(list(draw(st.sets(st.floats(0.01, 1.0), min_size=1, max_size=6)))))
        return PolarImage(n_min, n_max, grid, draw(cvals(rows, grid.count)))
    omega = FrequencyGrid(2 * draw(st.integers(0, 4)) + 1, draw(st.floats(0.01, 5)))
    return FourierSinogram(n_min, n_max, omega, draw(atts), draw(cvals(rows, omega.count)))


@settings(max_examples=150, deadline=None)
@given(objects())
def test_round_trip_is_bit_exact(obj):
    buf = dumps_ert(obj)
    assert len(buf) == ert_file_size(obj)
    back = loads_ert(buf)
    assert type(back) is type(obj) and back == obj


def test_documented_size():
    sino = Sinogram(DetectorGrid(512, 1.2), AngleGrid(360), ConstantAttenuation(0.1), np.zeros((360, 512)))
    assert ert_file_size(sino) == 16 + 40 + 16 + 512 * 360 * 16


def test_file_round_trip(tmp_path):
    obj = PolarImage(-1, 1, RadialGrid.uniform(4), np.arange(12).reshape(3, 4) * (1 + 1j))
    path = tmp_path / "img.ert"
    assert write_ert(path, obj) == path.stat().st_size
    assert read_ert(path) == obj


BASE = dumps_ert(HarmonicSinogram(0, 1, DetectorGrid(4, 1.0), ConstantAttenuation(0.5j), np.ones((2, 4))))


@pytest.mark.parametrize("buf,msg", [
    (b"XRT1" + BASE[4:], "magic"),
    (BASE[:10], "preamble"),
    (BASE[:-1], "truncated payload"),
    (BASE + b"\0", "trailing"),
    (BASE[:4] + bytes([9]) + BASE[5:], "kind"),
    (BASE[:40], "header"),
])
def test_corrupt_input_is_rejected(buf, msg):
    with pytest.raises(ParseError, match=msg):
        loads_ert(buf)


def test_csv_round_trip(tmp_path):
    obj = HarmonicSinogram(-1, 0, DetectorGrid(5, 1.0), None, np.array([[1, 2j, 3, 4, 5], [0, 1, 0, 1, 0.5j]]))
    path = tmp_path / "h.csv"
    export_csv(path, obj)
    name, axis, labels, values = read_csv(path)
    assert name == "s" and labels == ["n=-1", "n=0"]
    np.testing.assert_array_equal(axis, obj.det.nodes)
    np.testing.assert_array_equal(values, obj.values)


def test_pgm_header_and_scaling(tmp_path):
    path = tmp_path / "f.pgm"
    export_pgm(path, np.array([[0.0, 1.0, 2.0], [2.0, 1.0, 0.0]]))
    data = path.read_bytes()
    head = b"P5\n3 2\n65535\n"
    assert data.startswith(head)
    pix = np.frombuffer(data[len(head):], ">u2").reshape(2, 3)
    np.testing.assert_array_equal(pix, [[0, 32768, 65535], [65535, 32768, 0]])
