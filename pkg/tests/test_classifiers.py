import itertools

import numpy as np
import pytest
from hypothesis import example, given, settings, strategies as st

import oracles
from semgkit.classifiers import (ColumnMismatchError, evaluate, fit_standardizer, predict,
                                 train, train_knn, train_lda, train_svm, vote_nearest)
from semgkit.features import FeatureMatrix
from semgkit.modelfile import ModelFormatError, dumps, loads, model_to_dict, model_from_dict


def fm(X, y):
    return FeatureMatrix.from_arrays(np.asarray(X, float), y)


def blobs(n_per, centres, spread, seed):
    rng = np.random.default_rng(seed)
    X = np.concatenate([c + spread * rng.standard_normal((n_per, len(c))) for c in centres])
    y = np.repeat(np.arange(len(centres)), n_per)
    return X, y


# ---------------------------------------------------------------- scaler

def test_standardizer_examples():
    s = fit_standardizer(fm([[3.0, 1.0]], [0]))
    np.testing.assert_array_equal(s.mean, [3.0, 1.0])
    np.testing.assert_array_equal(s.std, [1e-12, 1e-12])
    s = fit_standardizer(fm([[-1.0], [1.0]], [0, 1]))
    assert (s.mean[0], s.std[0]) == (0.0, 1.0)
    s = fit_standardizer(fm([[1.0], [2.0], [3.0]], [0, 0, 1]))
    assert s.mean[0] == 2.0 and s.std[0] == pytest.approx(np.sqrt(2 / 3))


# ------------------------------------------------------------------- LDA

def test_lda_one_dimensional_closed_form():
    model = train_lda(fm([[-1], [0], [1], [3], [4], [5]], [0, 0, 0, 1, 1, 1]))
    assert predict(model, fm([[1.0]], [0])).tolist() == [0]
    assert predict(model, fm([[3.9]], [0])).tolist() == [1]
    queries = np.linspace(-3, 7, 201)
    queries = queries[np.abs(queries - 2.0) > 1e-3]
    got = predict(model, fm(queries[:, None], np.zeros(len(queries), int)))
    expected = [oracles.lda_1d([-1, 0, 1], [3, 4, 5], q) for q in queries]
    assert got.tolist() == expected


def test_lda_unequal_priors_closed_form():
    xa, xb = [-1.0, 0.0, 1.0, 0.5, -0.5], [2.0, 3.0, 4.0]
    model = train_lda(fm(np.array(xa + xb)[:, None], [0] * 5 + [1] * 3))
    queries = np.linspace(-2, 5, 141)
    got = predict(model, fm(queries[:, None], np.zeros(len(queries), int)))
    assert got.tolist() == [oracles.lda_1d(xa, xb, q) for q in queries]


def test_lda_tie_goes_to_lowest_class():
    model = train_lda(fm([[-1], [1], [-1], [1]], [2, 2, 5, 5]))
    assert predict(model, fm([[0.3], [-4]], [0, 0])).tolist() == [2, 2]


def test_lda_preconditions():
    with pytest.raises(ValueError):
        train_lda(fm([[0], [1], [2]], [0, 0, 0]))
    with pytest.raises(ValueError, match="fist"):
        train_lda(fm([[0], [1], [2]], [0, 0, 1]))


def test_lda_affine_invariance():
    X, y = blobs(30, [(0, 0, 0), (2, 1, 0), (0, 2, 2)], 1.0, seed=1)
    Q, _ = blobs(20, [(0, 0, 0), (2, 1, 0), (0, 2, 2)], 1.5, seed=2)
    base = predict(train_lda(fm(X, y)), fm(Q, np.zeros(len(Q), int)))
    scale, shift = np.array([7.0, 0.01, -3.0]), np.array([100.0, -2.0, 0.5])
    moved = predict(train_lda(fm(X * scale + shift, y)),
                    fm(Q * scale + shift, np.zeros(len(Q), int)))
    assert np.array_equal(base, moved)


# ------------------------------------------------------------------- KNN

def test_knn_example_and_errors():
    X = [(0, 0), (0, 1), (1, 0), (5, 5), (5, 6), (6, 5)]
    model = train_knn(fm(X, [0, 0, 0, 1, 1, 1]), k=3)
    assert predict(model, fm([(0.2, 0.2)], [0])).tolist() == [0]
    with pytest.raises(ValueError, match="k must be odd"):
        train_knn(fm(X, [0, 0, 0, 1, 1, 1]), k=4)
    with pytest.raises(ValueError):
        train_knn(fm(X, [0, 0, 0, 1, 1, 1]), k=7)


def test_knn_k1_self_match():
    X, y = blobs(25, [(0, 0), (1, 1), (0, 1)], 0.8, seed=3)
    model = train_knn(fm(X, y), k=1)
    assert np.array_equal(predict(model, fm(X, y)), y)


def test_vote_nearest_tie_rule():
    assert vote_nearest([4, 2, 6]) == 4
    assert vote_nearest([4, 2, 2]) == 2
    assert vote_nearest([3, 5, 5, 3, 1]) == 3


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(3, 120), k=st.sampled_from([1, 3, 5]),
       dims=st.integers(1, 4), grid=st.booleans())
@example(seed=82, n=59, k=5, dims=4, grid=True)   # one-ulp tie broke differently once
def test_knn_matches_brute_force(seed, n, k, dims, grid):
    rng = np.random.default_rng(seed)
    # integer grids produce plenty of exact distance ties
    X = rng.integers(0, 4, (n, dims)).astype(float) if grid else rng.standard_normal((n, dims))
    y = rng.integers(0, 7, n)
    Q = rng.integers(0, 4, (30, dims)).astype(float) if grid else rng.standard_normal((30, dims))
    k = min(k, n if n % 2 else n - 1)
    model = train_knn(fm(X, y), k=k)
    Zx, Zq = model.standardizer.transform(X), model.standardizer.transform(Q)
    assert np.array_equal(predict(model, fm(Q, np.zeros(30, int))),
                          oracles.knn(Zx, y, Zq, k))


def test_knn_brute_force_500_rows():
    X, y = blobs(72, [np.zeros(5), np.ones(5), np.r_[1, 0, 1, 0, 1], np.r_[0, 1, 0, 1, 0],
                      np.full(5, 2.0), np.r_[2, 0, 0, 0, 2], np.r_[0, 0, 2, 0, 0]], 0.9, 8)
    Q, _ = blobs(40, [np.zeros(5), np.ones(5)], 1.5, seed=9)
    model = train_knn(fm(X[:500], y[:500]), k=5)
    Zx, Zq = model.standardizer.transform(X[:500]), model.standardizer.transform(Q)
    assert np.array_equal(predict(model, fm(Q, np.zeros(len(Q), int))),
                          oracles.knn(Zx, y[:500], Zq, 5))


# ------------------------------------------------------------------- SVM

def test_svm_separable_clouds():
    X, y = blobs(40, [(0, 0), (10, 10)], 1.0, seed=4)
    model = train_svm(fm(X, y))
    assert np.array_equal(predict(model, fm(X, y)), y)


def test_svm_shared_point_is_deterministic():
    data = fm([[1.0, 1.0], [1.0, 1.0]], [0, 1])
    a = predict(train_svm(data), fm([[1.0, 1.0]], [0]))
    b = predict(train_svm(data), fm([[1.0, 1.0]], [0]))
    assert a.tolist() == b.tolist() and a[0] in (0, 1)


def test_svm_rejects_bad_c():
    with pytest.raises(ValueError):
        train_svm(fm([[0], [1]], [0, 1]), c_reg=0)


def test_svm_multiclass_pairs():
    X, y = blobs(20, [(0, 0), (5, 0), (0, 5), (5, 5)], 0.5, seed=5)
    model = train_svm(fm(X, y + 1))
    assert model.payload.pairs.tolist() == [list(p) for p in itertools.combinations(
        [1, 2, 3, 4], 2)]
    assert np.array_equal(predict(model, fm(X, y)), y + 1)


def test_svm_vote_tie_uses_margin_then_lowest_id():
    from semgkit.classifiers import SVMPayload
    # three classes, each pair vote goes a different way: a three-way tie on votes
    pay = SVMPayload(np.array([0, 1, 2]), np.array([[0, 1], [0, 2], [1, 2]]),
                     np.array([[1.0], [-1.0], [1.0]]), np.array([0.0, 0.0, 0.0]))
    # margins at z: (z, -z, z); class sums 0: z - z = 0, 1: -z + z = 0, 2: z - z = 0
    assert pay.predict(np.array([[0.5]])).tolist() == [0]
    pay2 = SVMPayload(np.array([0, 1, 2]), np.array([[0, 1], [0, 2], [1, 2]]),
                      np.array([[1.0], [-1.0], [1.0]]), np.array([0.0, 0.0, 3.0]))
    # margins (z, -z, z + 3) at z = 0.5: 0 wins (0,1), 2 wins (0,2), 1 wins (1,2)
    # sums: 0 -> 0.5 - 0.5 = 0, 1 -> -0.5 + 3.5 = 3, 2 -> 0.5 - 3.5 = -3
    assert pay2.predict(np.array([[0.5]])).tolist() == [1]


# -------------------------------------------------------- shared behaviour

@pytest.mark.parametrize("kind", ["LDA", "KNN", "SVM"])
def test_empty_input_and_permutation(kind):
    X, y = blobs(30, [(0, 0, 1), (3, 0, 1), (0, 3, 0)], 1.0, seed=6)
    model = train(kind, fm(X, y))
    assert predict(model, fm(np.zeros((0, 3)), [])).shape == (0,)
    Q, qy = blobs(15, [(0, 0, 1), (3, 0, 1), (0, 3, 0)], 1.3, seed=7)
    perm = np.random.default_rng(0).permutation(len(Q))
    full = predict(model, fm(Q, qy))
    assert np.array_equal(predict(model, fm(Q[perm], qy[perm])), full[perm])


@pytest.mark.parametrize("kind", ["LDA", "KNN", "SVM"])
def test_column_mismatch_names_column(kind):
    X, y = blobs(10, [(0, 0), (3, 3)], 0.5, seed=8)
    model = train(kind, fm(X, y))
    other = FeatureMatrix(X, y, ((1, "X", 0), (2, "Y", 0)))
    with pytest.raises(ColumnMismatchError, match="column 1"):
        predict(model, other)


@pytest.mark.parametrize("kind", ["LDA", "KNN", "SVM"])
def test_training_is_deterministic(kind):
    X, y = blobs(25, [(0, 0, 0), (1, 1, 0), (0, 1, 1)], 0.7, seed=9)
    assert dumps(train(kind, fm(X, y))) == dumps(train(kind, fm(X, y)))


def test_unknown_kind():
    with pytest.raises(ValueError, match="unknown classifier"):
        train("MLP", fm([[0], [1]], [0, 1]))


# -------------------------------------------------------------- evaluate

def test_evaluate_examples():
    truth = np.zeros(50, int)
    pred = truth.copy()
    pred[:2] = 1
    r = evaluate(pred, truth)
    assert (r.n_correct, r.n_total, r.accuracy_pct) == (48, 50, 96.0)
    r = evaluate(np.arange(7), np.arange(7))
    assert r.accuracy_pct == 100.0 and np.array_equal(r.confusion, np.eye(7, dtype=int))
    r = evaluate(np.zeros(700, int), np.repeat(np.arange(7), 100))
    assert r.accuracy_pct == pytest.approx(14.285714, abs=1e-6)
    assert "(100/700)" in r.render()
    with pytest.raises(ValueError):
        evaluate([], [])
    with pytest.raises(ValueError):
        evaluate([0, 1], [0])


@given(st.lists(st.integers(0, 6), min_size=1, max_size=100))
def test_evaluate_self_is_perfect(x):
    assert evaluate(x, x).accuracy_pct == 100.0


# ------------------------------------------------------------ model file

@pytest.mark.parametrize("kind", ["LDA", "KNN", "SVM"])
def test_model_round_trip(kind):
    X, y = blobs(20, [(0, 0, 0), (1, 1, 0), (0, 1, 1)], 0.7, seed=10)
    model = train(kind, fm(X, y))
    model.extra["sample_rate_hz"] = 200
    text = dumps(model)
    back = loads(text)
    assert dumps(back) == text
    Q, qy = blobs(10, [(0, 0, 0), (1, 1, 0)], 1.0, seed=11)
    assert np.array_equal(predict(back, fm(Q, qy)), predict(model, fm(Q, qy)))


def test_model_format_errors():
    X, y = blobs(10, [(0, 0), (3, 3)], 0.5, seed=12)
    doc = model_to_dict(train("LDA", fm(X, y)))
    with pytest.raises(ModelFormatError, match="version"):
        model_from_dict({**doc, "version": 2})
    with pytest.raises(ModelFormatError):
        model_from_dict({**doc, "format": "other"})
    with pytest.raises(ModelFormatError):
        loads("{not json")
