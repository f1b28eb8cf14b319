import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from sklearn.svm import SVC

from whiskyspec.classifiers import (
    ALGORITHMS,
    AdaBoostClassifier,
    ClassifierSpec,
    KNNClassifier,
    LDAClassifier,
    LinearSVMClassifier,
    MLPClassifier,
    QDAClassifier,
    RandomForestClassifier,
    RbfSVMClassifier,
    make_classifier,
    with_pca,
)
from whiskyspec.classifiers._base import softmax_rows
from whiskyspec.classifiers.forest import Tree, grow_tree
from whiskyspec.classifiers.svm import rbf_kernel, smo_binary
from whiskyspec._random import rng_for
from whiskyspec.exceptions import InsufficientClassData, InvalidArgument, ShapeError


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 25), st.integers(1, 6)),
              elements=st.integers(-10 ** 6, 10 ** 6).map(lambda v: v / 1024.0)),
       st.integers(0, 2 ** 31 - 1))
def test_knn_predicts_its_own_training_rows(X, seed):
    X = np.unique(X, axis=0)
    if X.shape[0] < 2:
        return
    y = np.random.default_rng(seed).integers(0, 3, X.shape[0])
    y[:2] = [0, 1]
    knn = KNNClassifier(1).fit(X, y)
    assert np.array_equal(knn.predict(X), y)


def test_knn_distance_tie_goes_to_lowest_index():
    X = np.array([[-1.0], [1.0]])
    knn = KNNClassifier(1).fit(X, np.array(["left", "right"]))
    assert knn.predict([[0.0]])[0] == "left"


def test_knn_vote_fraction():
    X = np.array([[0.0], [0.1], [0.2], [5.0]])
    knn = KNNClassifier(3).fit(X, [0, 0, 1, 1])
    np.testing.assert_allclose(knn.predict_proba([[0.05]]), [[2 / 3, 1 / 3]])


def test_lda_on_far_apart_clusters():
    rng = np.random.default_rng(21)
    y = np.repeat([0, 1], 100)
    X = rng.normal(size=(200, 2)) + np.where(y[:, None] == 1, [10.0, 0.0], [0.0, 0.0])
    order = rng.permutation(200)
    tr, te = order[:140], order[140:]
    lda = LDAClassifier().fit(X[tr], y[tr])
    assert np.mean(lda.predict(X[te]) == y[te]) == 1.0


def _gaussian_scores(X, means, covs, priors):
    out = []
    for m, S, p in zip(means, covs, priors):
        d = X - m
        maha = np.einsum("ij,jk,ik->i", d, np.linalg.inv(S), d)
        out.append(-0.5 * maha - 0.5 * np.linalg.slogdet(S)[1] + np.log(p))
    return np.array(out).T


def test_discriminants_match_direct_inverse_oracle(blobs):
    X, y = blobs
    d = X.shape[1]
    means = [X[y == c].mean(axis=0) for c in range(3)]
    priors = [np.mean(y == c) for c in range(3)]
    ridge = lambda S: S + 1e-6 * np.trace(S) / d * np.eye(d)
    covs = [ridge(np.cov(X[y == c].T)) for c in range(3)]
    qda = QDAClassifier().fit(X, y)
    np.testing.assert_allclose(qda.decision_function(X), _gaussian_scores(X, means, covs, priors), atol=1e-8)
    pooled = sum((X[y == c] - means[c]).T @ (X[y == c] - means[c]) for c in range(3)) / (len(y) - 3)
    lda = LDAClassifier().fit(X, y)
    oracle = _gaussian_scores(X, means, [ridge(pooled)] * 3, priors)
    # LDA drops the class-independent quadratic term: compare score differences
    got = lda.decision_function(X)
    np.testing.assert_allclose(got - got[:, :1], oracle - oracle[:, :1], atol=1e-8)


@pytest.mark.parametrize("cls", [LDAClassifier, QDAClassifier])
def test_single_sample_class_rejected(cls):
    X = np.array([[0.0, 1.0], [1.0, 0.0], [2.0, 2.0], [3.0, 1.0]])
    with pytest.raises(InsufficientClassData):
        cls().fit(X, [0, 0, 0, 1])


@pytest.mark.parametrize("name", sorted(ALGORITHMS))
def test_width_mismatch(name, blobs):
    X, y = blobs
    model = make_classifier(ClassifierSpec(name, {"n_estimators": 5} if name in ("RF", "AdaBoost") else {}))
    model.fit(X, y)
    with pytest.raises(ShapeError):
        model.predict(X[:, :3])


@pytest.mark.parametrize("name", sorted(ALGORITHMS))
def test_every_classifier_separates_blobs(name, blobs):
    X, y = blobs
    model = make_classifier(ClassifierSpec(name))
    acc = np.mean(model.fit(X, y).predict(X) == y)
    assert acc >= (0.9 if name == "AdaBoost" else 1.0)


def _brute_force_root(X, y, n_classes):
    """Exhaustive search of the best (feature, threshold) by weighted Gini."""
    def gini(labels):
        if labels.size == 0:
            return 0.0
        p = np.bincount(labels, minlength=n_classes) / labels.size
        return 1.0 - np.sum(p * p)

    best = (np.inf, None, None)
    for f in range(X.shape[1]):
        values = np.unique(X[:, f])
        for lo, hi in zip(values[:-1], values[1:]):
            t = 0.5 * (lo + hi)
            left = X[:, f] <= t
            score = left.sum() * gini(y[left]) + (~left).sum() * gini(y[~left])
            if score < best[0] - 1e-12:
                best = (score, f, t)
    return best[1], best[2]


def test_tree_root_split_matches_exhaustive_search():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(40, 4))
    y = (X[:, 2] + 0.3 * rng.normal(size=40) > 0).astype(int)
    tree = grow_tree(X, y, 2, 4, rng_for(0, "t"))
    f, t = _brute_force_root(X, y, 2)
    assert tree.feature[0] == f
    assert tree.threshold[0] == pytest.approx(t)


def test_tree_nested_roundtrip(blobs):
    X, y = blobs
    tree = grow_tree(X, y, 3, 8, rng_for(1, "t"))
    back = Tree.from_nested(tree.to_nested())
    np.testing.assert_array_equal(back.predict_value(X), tree.predict_value(X))
    assert back.depth() == tree.depth()


def test_forest_is_seed_deterministic(small_matrix):
    X, y = small_matrix
    a = RandomForestClassifier(10, seed=3).fit(X, y).predict_proba(X)
    b = RandomForestClassifier(10, seed=3).fit(X, y).predict_proba(X)
    c = RandomForestClassifier(10, seed=4).fit(X, y).predict_proba(X)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    np.testing.assert_allclose(a.sum(axis=1), 1.0)


def test_forest_rejects_bad_max_features(blobs):
    with pytest.raises(InvalidArgument):
        RandomForestClassifier(2, max_features="half").fit(*blobs)


def test_adaboost_stops_on_perfect_stump():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    model = AdaBoostClassifier(20).fit(X, [0, 0, 1, 1])
    assert len(model.stumps_) == 1
    assert len(list(model.staged_predict(X))) == 1


def test_adaboost_staged_predictions(blobs):
    X, y = blobs
    model = AdaBoostClassifier(10).fit(X, y)
    stages = list(model.staged_predict(X))
    assert len(stages) == len(model.stumps_)
    np.testing.assert_array_equal(stages[-1], model.predict(X))


def _kkt_violation(K, y, alpha, b, C):
    f = (alpha * y) @ K + b
    margin = y * f
    free = (alpha > 1e-8) & (alpha < C - 1e-8)
    worst = 0.0
    worst = max(worst, np.max(np.where(alpha <= 1e-8, 1.0 - margin, -np.inf)))
    worst = max(worst, np.max(np.where(alpha >= C - 1e-8, margin - 1.0, -np.inf)))
    if np.any(free):
        worst = max(worst, np.max(np.abs(margin[free] - 1.0)))
    return worst


def test_smo_solution_satisfies_kkt():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(60, 3))
    y = np.where(X[:, 0] + 0.5 * rng.normal(size=60) > 0, 1.0, -1.0)
    K = rbf_kernel(X, X, 0.5)
    alpha, b, _ = smo_binary(K, y, 1.0, tol=1e-6)
    assert abs(alpha @ y) < 1e-10
    assert _kkt_violation(K, y, alpha, b, 1.0) < 1e-5


def test_rbf_svm_agrees_with_libsvm_on_binary_problem():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(80, 4))
    y = (np.sum(X[:, :2] ** 2, axis=1) > 1.5).astype(int)
    ours = RbfSVMClassifier(C=1.0, gamma=0.25, tol=1e-6).fit(X, y)
    ref = SVC(C=1.0, gamma=0.25, tol=1e-8).fit(X, y)
    np.testing.assert_allclose(ours.decision_function(X)[:, 1], ref.decision_function(X), atol=1e-4)


def test_linear_svm_separates_with_margin(blobs):
    X, y = blobs
    svm = LinearSVMClassifier().fit(X, y)
    scores = svm.decision_function(X)
    assert np.all(np.argmax(scores, axis=1) == y)


def test_mlp_gradient_matches_finite_differences(blobs):
    X, y = blobs
    X = X[:20]
    Y = np.eye(3)[y[:20]]
    mlp = MLPClassifier(hidden_units=5, alpha=0.7)
    params = mlp._init_params(X.shape[1], 3)
    _, grads = mlp._loss_grad(X, Y, params)
    h = 1e-6
    for p, g in zip(params, grads):
        flat = p.reshape(-1)
        for i in range(0, flat.size, max(1, flat.size // 7)):
            old = flat[i]
            flat[i] = old + h
            up = mlp._loss_grad(X, Y, params)[0]
            flat[i] = old - h
            down = mlp._loss_grad(X, Y, params)[0]
            flat[i] = old
            assert g.reshape(-1)[i] == pytest.approx((up - down) / (2 * h), abs=1e-7)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(2, 30)),
              elements=st.floats(-700, 700, allow_nan=False, width=64)))
def test_softmax_rows_sum_to_one(scores):
    np.testing.assert_allclose(softmax_rows(scores).sum(axis=1), 1.0, atol=1e-12)


def test_spec_validation():
    with pytest.raises(InvalidArgument):
        ClassifierSpec("NaiveBayes")
    with pytest.raises(InvalidArgument):
        ClassifierSpec("KNN", {"depth": 3})
    spec = ClassifierSpec("RF", {"n_estimators": 7}, seed=5)
    assert ClassifierSpec.from_dict(spec.to_dict()) == spec
    model = make_classifier(spec)
    assert model.n_estimators == 7 and model.seed == 5


def test_labels_keep_their_type(blobs):
    X, y = blobs
    names = np.array(["ardbeg", "bowmore", "caol ila"])[y]
    model = with_pca(KNNClassifier(), 3).fit(X, names)
    assert set(model.predict(X)) == set(names)


def test_get_params_roundtrip():
    m = RandomForestClassifier(n_estimators=12, max_depth=4, seed=9)
    assert RandomForestClassifier(**m.get_params()).get_params() == m.get_params()
