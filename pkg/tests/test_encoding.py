import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectral_sampler.encoding import EncodingSpec, encode, highest_pe_frequency


def test_origin_degree_two():
    spec = EncodingSpec("sinusoidal", input_dim=1, degree=2)
    np.testing.assert_array_equal(encode(spec, [0.0]), [0, 0, 1, 0, 1, 0, 1])


def test_half_degree_one():
    spec = EncodingSpec("sinusoidal", input_dim=1, degree=1)
    np.testing.assert_allclose(encode(spec, [0.5]), [0.5, 1, 0, 0, -1], atol=1e-15)


@pytest.mark.parametrize("dim,degree,expected", [(3, 5, 39), (1, 5, 13), (2, 0, 6)])
def test_sinusoidal_dim(dim, degree, expected):
    spec = EncodingSpec("sinusoidal", input_dim=dim, degree=degree)
    assert spec.output_dim == expected
    assert encode(spec, np.zeros((4, dim))).shape == (4, expected)


def test_identity_and_fourier_dims():
    assert EncodingSpec("identity", input_dim=2).output_dim == 2
    spec = EncodingSpec("gaussian-fourier", input_dim=3, sigma=10.0, features=7, seed=3)
    assert spec.output_dim == 14
    assert encode(spec, np.ones((5, 3))).shape == (5, 14)


def test_fourier_matrix_fixed_by_seed():
    a = EncodingSpec("gaussian-fourier", input_dim=2, sigma=10.0, features=64, seed=9)
    b = EncodingSpec("gaussian-fourier", input_dim=2, sigma=10.0, features=64, seed=9)
    np.testing.assert_array_equal(a.frequency_matrix, b.frequency_matrix)
    assert abs(a.frequency_matrix.std() - 10.0) < 2.0


def test_fourier_features_formula():
    spec = EncodingSpec("gaussian-fourier", input_dim=2, sigma=2.0, features=3, seed=1)
    x = np.array([0.3, -0.7])
    proj = 2 * np.pi * spec.frequency_matrix @ x
    np.testing.assert_allclose(encode(spec, x), np.concatenate([np.sin(proj), np.cos(proj)]))


@pytest.mark.parametrize("degree,freq", [(5, 16), (3, 4), (0, 0.5)])
def test_highest_pe_frequency(degree, freq):
    assert highest_pe_frequency(degree) == freq


@pytest.mark.parametrize("bad", [
    dict(kind="sinusoidal", degree=-1),
    dict(kind="gaussian-fourier", sigma=0.0),
    dict(kind="gaussian-fourier", features=0),
    dict(kind="wavelet"),
])
def test_invalid_specs(bad):
    with pytest.raises(ValueError):
        EncodingSpec(input_dim=1, **bad)


@settings(max_examples=50, deadline=None)
@given(x=st.lists(st.floats(-1, 1), min_size=3, max_size=3),
       p=st.integers(0, 5), k=st.integers(-3, 3))
def test_band_periodicity(x, p, k):
    spec = EncodingSpec("sinusoidal", input_dim=3, degree=5)
    x = np.array(x)
    shifted = x + k * 2.0 ** (1 - p)
    block = slice(3 + 6 * p, 3 + 6 * (p + 1))
    np.testing.assert_allclose(encode(spec, x)[block], encode(spec, shifted)[block], atol=1e-9)
