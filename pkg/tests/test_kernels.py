import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from phsic import (
    DimensionError,
    ParameterError,
    centered_kernel_vector,
    cosine,
    gram,
    gram_means,
    kernel_eval,
    laplacian,
    linear,
    parse_kernel,
    polynomial,
    product_of,
    rbf,
    sum_of,
)
from phsic.kernels import format_kernel, kernel_matrix

SPECS = [linear(), cosine(), rbf(1.0), rbf(0.3), laplacian(0.7), polynomial(2, 1.0),
         sum_of(rbf(1.0), linear()), product_of(cosine(), rbf(2.0))]


def test_rbf_identical_inputs():
    assert kernel_eval(rbf(1.0), [3, 4], [3, 4]) == 1.0


def test_cosine_orthogonal():
    assert kernel_eval(cosine(), [1, 0], [0, 1]) == 0.0


def test_rbf_unit_distance():
    assert kernel_eval(rbf(1.0), [0, 0], [1, 0]) == pytest.approx(0.606531, abs=1e-6)
    assert kernel_eval(rbf(1.0), [0, 0], [1, 0]) == math.exp(-0.5)


def test_laplacian_and_poly_formulas():
    assert kernel_eval(laplacian(2.0), [0, 0], [1, -2]) == pytest.approx(math.exp(-6.0))
    assert kernel_eval(polynomial(3, 1.0), [1, 2], [3, 1]) == pytest.approx(216.0)


def test_cosine_with_zero_vector_is_zero():
    assert kernel_eval(cosine(), [0, 0], [1, 1]) == 0.0


def test_length_mismatch():
    with pytest.raises(DimensionError):
        kernel_eval(linear(), [1, 2], [1, 2, 3])


def test_gram_identical_points_rbf():
    np.testing.assert_array_equal(gram(rbf(1.0), [[2.0, 1.0], [2.0, 1.0]]).values, np.ones((2, 2)))


def test_gram_orthonormal_linear():
    np.testing.assert_array_equal(gram(linear(), [[1, 0], [0, 1]]).values, np.eye(2))


def test_gram_1d_linear():
    np.testing.assert_array_equal(
        gram(linear(), [1.0, 2.0, 3.0]).values, [[1, 2, 3], [2, 4, 6], [3, 6, 9]]
    )


@pytest.mark.parametrize("spec", SPECS, ids=format_kernel)
def test_gram_symmetric_psd(spec, rng):
    X = rng.normal(size=(30, 4))
    G = gram(spec, X).values
    np.testing.assert_array_equal(G, G.T)
    assert np.linalg.eigvalsh(G).min() > -1e-9 * max(1.0, np.abs(G).max())


@pytest.mark.parametrize("spec", SPECS, ids=format_kernel)
def test_matrix_matches_pointwise(spec, rng):
    X, Y = rng.normal(size=(5, 3)), rng.normal(size=(4, 3))
    M = kernel_matrix(spec, X, Y)
    for i in range(5):
        for j in range(4):
            assert M[i, j] == pytest.approx(kernel_eval(spec, X[i], Y[j]), rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("text", ["cos", "linear", "rbf:0.5", "laplacian:2", "poly:3:0.5",
                                  "sum(rbf:1,cos)", "prod(linear,sum(cos,rbf:2))"])
def test_kernel_text_round_trip(text):
    spec = parse_kernel(text)
    assert parse_kernel(format_kernel(spec)) == spec


@pytest.mark.parametrize("text", ["", "gauss", "rbf:abc", "rbf:-1", "rbf:1:2", "sum(cos)", "poly:0:1"])
def test_kernel_text_rejects(text):
    with pytest.raises(ParameterError):
        parse_kernel(text)


def test_gram_means_1d_linear():
    m = gram_means(linear(), [1.0, 2.0, 3.0])
    np.testing.assert_allclose(m.col_means, [2, 4, 6])
    assert m.grand_mean == pytest.approx(4.0)


def test_gram_means_identical_points():
    m = gram_means(rbf(1.0), np.ones((4, 2)))
    np.testing.assert_array_equal(m.col_means, np.ones(4))
    assert m.grand_mean == 1.0


def test_centered_vector_all_identical_is_zero():
    P = np.full((5, 2), 0.3)
    v = centered_kernel_vector(rbf(1.0), P[0], P, gram_means(rbf(1.0), P))
    np.testing.assert_array_equal(v, np.zeros(5))


def test_centered_vector_1d_linear_brute_force():
    # k(3, x_i) = (3, 6, 9); row mean 6; column means (2, 4, 6); grand mean 4.
    P = np.array([1.0, 2.0, 3.0])
    v = centered_kernel_vector(linear(), [3.0], P, gram_means(linear(), P))
    np.testing.assert_allclose(v, [-1.0, 0.0, 1.0], atol=1e-15)


def test_centered_vector_matches_double_centered_gram(rng):
    P = rng.normal(size=(12, 3))
    spec = rbf(1.3)
    K = gram(spec, P).values
    H = np.eye(12) - 1.0 / 12
    HKH = H @ K @ H
    means = gram_means(spec, P)
    for i in (0, 5, 11):
        np.testing.assert_allclose(centered_kernel_vector(spec, P[i], P, means), HKH[i], atol=1e-13)


def test_centered_vector_averages_to_zero_in_sample(rng):
    P = rng.normal(size=(9, 2))
    means = gram_means(cosine(), P)
    total = sum(centered_kernel_vector(cosine(), p, P, means) for p in P)
    np.testing.assert_allclose(total, 0.0, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 12), st.integers(1, 4)),
              elements=st.floats(-5, 5, allow_nan=False)))
def test_rbf_gram_psd_property(X):
    G = gram(rbf(1.0), X).values
    assert np.all(np.diag(G) == 1.0)
    assert np.linalg.eigvalsh(G).min() > -1e-9


@pytest.mark.parametrize("spec", SPECS, ids=format_kernel)
def test_kernel_symmetric(spec, rng):
    u, v = rng.normal(size=3), rng.normal(size=3)
    assert kernel_eval(spec, u, v) == kernel_eval(spec, v, u)


def test_composites_are_elementwise(rng):
    X = rng.normal(size=(10, 3))
    a, b = rbf(0.8), cosine()
    Ga, Gb = gram(a, X).values, gram(b, X).values
    np.testing.assert_allclose(gram(sum_of(a, b), X).values, Ga + Gb, atol=1e-15)
    np.testing.assert_allclose(gram(product_of(a, b), X).values, Ga * Gb, atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 20), st.integers(0, 2**31 - 1))
def test_centered_vector_sums_to_zero_any_x(n, seed):
    r = np.random.default_rng(seed)
    P = r.normal(size=(n, 3))
    spec = SPECS[seed % len(SPECS)]
    v = centered_kernel_vector(spec, r.normal(size=3) * 3, P, gram_means(spec, P))
    assert abs(v.sum()) <= 1e-10 * max(1.0, np.abs(v).max())


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 50), st.integers(0, 2**31 - 1))
def test_random_grams_psd(n, seed):
    X = np.random.default_rng(seed).normal(size=(n, 3))
    for spec in SPECS:
        G = gram(spec, X).values
        assert np.linalg.eigvalsh(G).min() >= -1e-8 * max(1.0, np.abs(G).max())
