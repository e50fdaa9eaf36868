import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kkcausal.spectra import (FrequencyGrid, GridError, Spectrum, SpectrumParseError,
                              format_float, read_spectrum_csv, resample, write_spectrum_csv)


def test_grid_parse_and_spacing():
    g = FrequencyGrid.parse("-50:50:4096")
    assert (g.omega_min, g.omega_max, g.n_points) == (-50.0, 50.0, 4096)
    assert g.spacing == pytest.approx(100 / 4095)
    assert np.allclose(np.diff(g.omegas), g.spacing)
    assert str(g) == "-50:50:4096"


@pytest.mark.parametrize("text", ["a:b", "1:2", "0:1:x", "1:0:64", "0:1:15", "0:1:17",
                                  "nan:1:64", "0:inf:64", ""])
def test_grid_rejects(text):
    with pytest.raises(GridError):
        FrequencyGrid.parse(text)


def test_spectrum_invariants():
    g = FrequencyGrid(-1, 1, 16)
    with pytest.raises(ValueError):
        Spectrum(g, np.zeros(15))
    with pytest.raises(ValueError):
        Spectrum(g, np.full(16, np.nan))
    sp = Spectrum(g, np.arange(16) * (1 + 1j))
    with pytest.raises(ValueError):
        sp.values[0] = 3


def test_format_float():
    assert format_float(1.0) == "1.00000000000e+00"
    assert format_float(-1234.5678) == "-1.23456780000e+03"
    assert format_float(float("nan")) == "nan"


def test_csv_round_trip(tmp_path):
    g = FrequencyGrid(-5, 5, 64)
    w = g.omegas
    sp = Spectrum(g, 1 / (1 - 1j * w))
    path = tmp_path / "s.csv"
    write_spectrum_csv(path, sp)
    text = path.read_text()
    assert text.startswith("omega,re,im\n") and "\r" not in text
    omega, values = read_spectrum_csv(path)
    assert np.allclose(omega, w, rtol=1e-11)
    assert np.allclose(values, sp.values, rtol=1e-11)


def test_csv_comments_and_column_mapping(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("# measured\nfreq,eps1,eps2,extra\n# mid comment\n0,1,2,9\n1,3,4,9\n")
    omega, values = read_spectrum_csv(path, ("freq", "eps1", "eps2"))
    assert list(omega) == [0.0, 1.0]
    assert list(values) == [1 + 2j, 3 + 4j]


@pytest.mark.parametrize("body,line", [
    ("omega,re,im\n0,1,2\n1,x,2\n", 3),
    ("omega,re,im\n0,1,2\n0,1,2\n", 3),
    ("omega,re,im\n0,1,2\n1,1\n", 3),
    ("omega,re\n0,1\n", 1),
    ("# c\nomega,re,im\n0,1,2\n-1,1,2\n", 4),
    ("omega,re,im\n0,1,inf\n", 2),
])
def test_csv_errors_carry_line_numbers(tmp_path, body, line):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(SpectrumParseError, match=f"line {line}"):
        read_spectrum_csv(path)


def test_csv_empty(tmp_path):
    path = tmp_path / "e.csv"
    path.write_text("")
    with pytest.raises(SpectrumParseError, match="empty"):
        read_spectrum_csv(path)
    path.write_text("omega,re,im\n")
    with pytest.raises(SpectrumParseError, match="no data"):
        read_spectrum_csv(path)


def test_resample_exact_on_same_grid():
    g = FrequencyGrid(-3, 3, 64)
    v = np.exp(-g.omegas ** 2) * (1 + 2j)
    assert np.allclose(resample(g.omegas, v, g), v)


def test_resample_rejects_extrapolation():
    w = np.linspace(-1, 1, 100)
    with pytest.raises(GridError):
        resample(w, np.ones(100, complex), FrequencyGrid(-2, 1, 64))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=8, max_size=40))
def test_resample_is_shape_preserving(vals):
    # monotone data stays monotone and within range: no overshoot
    y = np.cumsum(np.abs(vals))
    w = np.linspace(0, 1, len(y))
    out = resample(w, y + 0j, FrequencyGrid(0, 1, 256)).real
    assert np.all(np.diff(out) >= -1e-9 * (1 + abs(y).max()))
    assert out.min() >= y.min() - 1e-9 and out.max() <= y.max() + 1e-9
