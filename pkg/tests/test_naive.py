import numpy as np
import pytest

from phsic import (
    InsufficientDataError,
    PairedDataset,
    fit_naive,
    gram,
    hsic_empirical,
    linear,
    rbf,
    score_naive,
)
from phsic.naive import hsic_trace, score_naive_batch, score_naive_vector_form

# Six-pair RBF fixture and values from an explicit-loop, explicit-H oracle.
X6 = [[1.029, 1.642], [1.147, -0.973], [-1.393, 0.067], [0.861, 0.509], [1.81, 0.751], [0.64, -0.731]]
Y6 = [[-1.108, 1.484], [0.049, 0.812], [-1.376, -0.436], [-1.291, -0.776], [0.903, -1.481], [-0.534, 0.164]]
IN_SAMPLE6 = [0.08684893166926494, 0.09100734222565653, 0.08207052214711999,
              0.023067509404774634, 0.11446264903340768, 0.059322590029220724]
HSIC6 = 0.07612992408490742
OOS6 = 0.008007877962060919  # x=(0.1,-0.2), y=(0.3,0.4)


@pytest.fixture
def six():
    return PairedDataset.from_vectors(X6, Y6)


def test_frozen_in_sample(six):
    m = fit_naive(six, rbf(1.0), rbf(1.0))
    np.testing.assert_allclose(score_naive_batch(m, six), IN_SAMPLE6, rtol=1e-12)


def test_frozen_out_of_sample(six):
    m = fit_naive(six, rbf(1.0), rbf(1.0))
    assert score_naive(m, [0.1, -0.2], [0.3, 0.4]) == pytest.approx(OOS6, rel=1e-12)


def test_frozen_hsic(six):
    m = fit_naive(six, rbf(1.0), rbf(1.0))
    assert hsic_empirical(m, six) == pytest.approx(HSIC6, rel=1e-12)


def test_vector_form_matches(six):
    m = fit_naive(six, rbf(1.0), rbf(1.0))
    assert score_naive_vector_form(m, [0.1, -0.2], [0.3, 0.4]) == pytest.approx(OOS6, rel=1e-12)


def test_identical_points_means():
    ds = PairedDataset.from_vectors(np.ones((4, 2)), np.ones((4, 2)))
    m = fit_naive(ds, rbf(1.0), rbf(1.0))
    np.testing.assert_array_equal(m.gram_col_means_x, np.ones(4))
    assert m.grand_mean_x == 1.0


def test_1d_linear_means(line3):
    m = fit_naive(line3, linear(), linear())
    np.testing.assert_allclose(m.gram_col_means_x, [2, 4, 6])


def test_one_pair_rejected():
    with pytest.raises(InsufficientDataError):
        fit_naive(PairedDataset.from_vectors([[1.0]], [[2.0]]), rbf(1.0), rbf(1.0))


def test_constant_y_scores_zero(rng):
    ds = PairedDataset.from_vectors(rng.normal(size=(15, 2)), np.full((15, 2), 0.5))
    m = fit_naive(ds, rbf(1.0), rbf(1.0))
    assert score_naive(m, [0.3, 0.1], [4.0, -1.0]) == 0.0


def test_trace_form_matches_mean(rng):
    ds = PairedDataset.from_vectors(rng.normal(size=(25, 3)), rng.normal(size=(25, 2)))
    m = fit_naive(ds, rbf(1.0), rbf(0.7))
    K, L = gram(rbf(1.0), ds.x_vecs).values, gram(rbf(0.7), ds.y_vecs).values
    assert hsic_empirical(m, ds) == pytest.approx(hsic_trace(K, L), abs=1e-14)


def test_perfect_dependence_positive(rng):
    x = rng.normal(size=200)
    x = (x - x.mean()) / x.std()
    ds = PairedDataset.from_vectors(x, x)
    assert hsic_empirical(fit_naive(ds, linear(), linear()), ds) > 0


def test_shuffled_hsic_is_small():
    # Permutation null: 100 shuffles set the scale, |HSIC| < 3/sqrt(n).
    rng = np.random.default_rng(7)
    n = 200
    X = rng.normal(size=(n, 2))
    Y = X @ rng.normal(size=(2, 2)) + 0.1 * rng.normal(size=(n, 2))
    values = []
    for _ in range(100):
        ds = PairedDataset.from_vectors(X, Y[rng.permutation(n)])
        values.append(hsic_empirical(fit_naive(ds, rbf(1.0), rbf(1.0)), ds))
    assert max(abs(v) for v in values) < 3 / np.sqrt(n)
    aligned = PairedDataset.from_vectors(X, Y)
    assert hsic_empirical(fit_naive(aligned, rbf(1.0), rbf(1.0)), aligned) > max(values)


def test_two_forms_agree(rng):
    for seed in range(5):
        r = np.random.default_rng(seed)
        ds = PairedDataset.from_vectors(r.normal(size=(30, 3)), r.normal(size=(30, 2)))
        m = fit_naive(ds, rbf(1.0), linear())
        for _ in range(5):
            x, y = r.normal(size=3), r.normal(size=2)
            assert score_naive(m, x, y) == pytest.approx(score_naive_vector_form(m, x, y), abs=1e-12)


def test_training_order_invariance(rng):
    ds = PairedDataset.from_vectors(rng.normal(size=(25, 2)), rng.normal(size=(25, 2)))
    perm = rng.permutation(25)
    a, b = fit_naive(ds, rbf(1.0), rbf(1.0)), fit_naive(ds.take(perm), rbf(1.0), rbf(1.0))
    x, y = rng.normal(size=2), rng.normal(size=2)
    assert score_naive(a, x, y) == pytest.approx(score_naive(b, x, y), abs=1e-14)
    assert hsic_empirical(a, ds) == pytest.approx(hsic_empirical(b, ds.take(perm)), abs=1e-14)


def test_permuting_y_only_lowers_hsic():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(150, 2))
    Y = X + 0.2 * rng.normal(size=(150, 2))
    ds = PairedDataset.from_vectors(X, Y)
    shuf = PairedDataset.from_vectors(X, Y[rng.permutation(150)])
    full = hsic_empirical(fit_naive(ds, rbf(1.0), rbf(1.0)), ds)
    null = hsic_empirical(fit_naive(shuf, rbf(1.0), rbf(1.0)), shuf)
    assert abs(null) < full / 5
