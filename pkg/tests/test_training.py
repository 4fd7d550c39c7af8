import math

import numpy as np
import pytest

from oracles import (
    finite_difference_grad,
    logistic_oracle,
    logistic_oracle_accuracy,
    make_separable_csv,
    max_relative_error,
)
from os4ml.engine.encoders import encode, encode_target, fit_encoders
from os4ml.engine.model import DecoderWeights
from os4ml.engine.training import (
    evaluate,
    forward,
    loss_and_grad,
    predict,
    split_table,
    train,
)
from os4ml.engine import serialize
from os4ml.errors import PredictError, ShapeMismatchError, SplitError
from os4ml.ingest import SemanticType, Table, parse_csv
from os4ml.mlconfig import FeatureSpec, MLConfig, SplitSpec, TrainerSpec


def make_config(features, target, **trainer_kwargs):
    return MLConfig(
        input_features=tuple(FeatureSpec(n, t) for n, t in features),
        output_feature=FeatureSpec(*target),
        trainer=TrainerSpec(**trainer_kwargs),
    )


def random_table(rng: np.random.Generator, n: int, target_type: SemanticType) -> Table:
    cols = {
        "x1": [f"{v:.4f}" for v in rng.normal(size=n)],
        "x2": [f"{v:.4f}" for v in rng.normal(2.0, 3.0, size=n)],
    }
    if target_type == SemanticType.NUMBER:
        cols["y"] = [f"{v:.4f}" for v in rng.normal(size=n)]
    elif target_type == SemanticType.BINARY:
        cols["y"] = [str(int(v)) for v in rng.integers(0, 2, size=n)]
    else:
        cols["y"] = [f"c{v}" for v in rng.integers(0, 3, size=n)]
    return Table(cols, n)


# --- split_table -------------------------------------------------------------

def test_split_exact_fractions():
    table = Table({"a": [str(i) for i in range(100)]}, 100)
    tr, va, te = split_table(table, SplitSpec(), seed=1)
    assert (tr.row_count, va.row_count, te.row_count) == (70, 15, 15)


def test_split_train_absorbs_rounding():
    table = Table({"a": [str(i) for i in range(10)]}, 10)
    tr, va, te = split_table(table, SplitSpec(), seed=1)
    assert (tr.row_count, va.row_count, te.row_count) == (8, 1, 1)


def test_split_deterministic_and_partition():
    table = Table({"a": [str(i) for i in range(57)]}, 57)
    first = split_table(table, SplitSpec(), seed=9)
    second = split_table(table, SplitSpec(), seed=9)
    for t1, t2 in zip(first, second):
        assert t1.columns == t2.columns
    all_cells = sorted(c for part in first for c in part.columns["a"])
    assert all_cells == sorted(table.columns["a"])  # disjoint and covering


def test_split_too_few_rows():
    with pytest.raises(SplitError):
        split_table(Table({"a": ["1"] * 9}, 9), SplitSpec(), seed=0)


# --- forward ------------------------------------------------------------------

def test_forward_softmax_symmetry():
    w = DecoderWeights(np.zeros((2, 2)), np.zeros(2))
    probs = forward(np.array([[1.0, 2.0]]), w, SemanticType.CATEGORY)
    assert np.allclose(probs, [[0.5, 0.5]])


def test_forward_sigmoid_zero():
    w = DecoderWeights(np.zeros((2, 1)), np.zeros(1))
    p = forward(np.array([[3.0, -1.0]]), w, SemanticType.BINARY)
    assert p[0] == 0.5


def test_forward_constant_number_model():
    w = DecoderWeights(np.zeros((2, 1)), np.array([4.25]))
    preds = forward(np.random.default_rng(0).normal(size=(5, 2)), w, SemanticType.NUMBER)
    assert np.allclose(preds, 4.25)


def test_forward_shape_mismatch():
    w = DecoderWeights(np.zeros((3, 1)), np.zeros(1))
    with pytest.raises(ShapeMismatchError):
        forward(np.zeros((2, 2)), w, SemanticType.NUMBER)


# --- loss_and_grad -------------------------------------------------------------

def test_uniform_category_loss_is_ln_k():
    k, n, d = 4, 6, 3
    X = np.random.default_rng(1).normal(size=(n, d))
    y = np.array([0, 1, 2, 3, 0, 1])
    w = DecoderWeights(np.zeros((d, k)), np.zeros(k))
    loss, _ = loss_and_grad(X, y, w, SemanticType.CATEGORY, 0.0)
    assert math.isclose(loss, math.log(k), rel_tol=1e-12)


def test_zero_weights_zero_targets_number():
    X = np.random.default_rng(2).normal(size=(5, 2))
    y = np.zeros(5)
    w = DecoderWeights(np.zeros((2, 1)), np.zeros(1))
    loss, grad = loss_and_grad(X, y, w, SemanticType.NUMBER, 0.0)
    assert loss == 0.0
    assert (grad.W == 0).all() and (grad.b == 0).all()


@pytest.mark.parametrize("target_type", [SemanticType.NUMBER, SemanticType.BINARY, SemanticType.CATEGORY])
def test_gradient_matches_finite_differences(target_type):
    rng = np.random.default_rng(42)
    worst = 0.0
    for trial in range(40):
        n = int(rng.integers(3, 12))
        d = int(rng.integers(1, 5))
        k = int(rng.integers(2, 5)) if target_type == SemanticType.CATEGORY else 1
        X = rng.normal(size=(n, d))
        if target_type == SemanticType.NUMBER:
            y = rng.normal(size=n)
        elif target_type == SemanticType.BINARY:
            y = rng.integers(0, 2, size=n).astype(np.float64)
        else:
            y = rng.integers(0, k, size=n)
        W = rng.normal(scale=0.5, size=(d, k))
        b = rng.normal(scale=0.5, size=k)
        l2 = float(rng.choice([0.0, 1e-3, 1e-1]))
        _, grad = loss_and_grad(X, y, DecoderWeights(W, b), target_type, l2)

        def loss_at(Wp, bp):
            return loss_and_grad(X, y, DecoderWeights(Wp, bp), target_type, l2)[0]

        fd_W, fd_b = finite_difference_grad(loss_at, W, b, h=1e-5)
        worst = max(worst, max_relative_error(grad.W, fd_W), max_relative_error(grad.b, fd_b))
    assert worst < 1e-4


# --- train ----------------------------------------------------------------------

def separable_table() -> Table:
    return parse_csv(make_separable_csv(500, seed=7))


def separable_config(**kwargs) -> MLConfig:
    return make_config(
        [("f0", SemanticType.NUMBER), ("f1", SemanticType.NUMBER), ("f2", SemanticType.NUMBER)],
        ("label", SemanticType.BINARY),
        **kwargs,
    )


def test_train_separable_reaches_95_and_oracle_agrees():
    table = separable_table()
    config = separable_config()
    model = train(table, config)

    # independent oracle on the same raw data and split
    tr, _, te = split_table(table, config.split, config.trainer.seed)
    Xtr = np.array([[float(v) for v in (tr.columns[c][i] for c in ("f0", "f1", "f2"))]
                    for i in range(tr.row_count)])
    ytr = np.array([1.0 if v == "yes" else 0.0 for v in tr.columns["label"]])
    Xte = np.array([[float(v) for v in (te.columns[c][i] for c in ("f0", "f1", "f2"))]
                    for i in range(te.row_count)])
    yte = np.array([1.0 if v == "yes" else 0.0 for v in te.columns["label"]])
    oracle_acc = logistic_oracle_accuracy(Xtr, ytr, Xte, yte)

    assert oracle_acc >= 0.95, "oracle must clear the bound before it is adopted"
    assert model.metrics.test.accuracy >= 0.95


def test_train_weights_match_logistic_oracle_to_1e9():
    table = separable_table()
    config = separable_config(epochs=20, learning_rate=0.05, l2_penalty=1e-3, seed=11)
    model = train(table, config)

    tr, _, _ = split_table(table, config.split, config.trainer.seed)
    state = fit_encoders(tr, config)
    X = encode(tr, state)
    y = encode_target(tr, state)
    w, b = logistic_oracle(
        X, y, config.trainer.epochs, config.trainer.learning_rate,
        config.trainer.l2_penalty, config.trainer.seed, config.trainer.batch_size,
    )
    assert np.abs(model.weights.W[:, 0] - w).max() < 1e-9
    assert abs(model.weights.b[0] - b) < 1e-9


def test_train_vanishing_learning_rate():
    table = separable_table()
    model = train(table, separable_config(epochs=1, learning_rate=1e-12))
    assert np.abs(model.weights.W).max() < 1e-9
    preds = predict(model, table)
    assert all(abs(p["yes"] - 0.5) < 1e-9 for p in preds.probabilities)


def test_train_deterministic_bytes():
    table = separable_table()
    config = separable_config(epochs=5)
    m1 = train(table, config)
    m2 = train(table, config)
    assert serialize(m1) == serialize(m2)
    assert m1.metrics.to_payload(include_timing=False) == m2.metrics.to_payload(
        include_timing=False
    )


def test_loss_per_epoch_length_and_timing():
    table = separable_table()
    model = train(table, separable_config(epochs=7))
    assert len(model.metrics.loss_per_epoch) == 7
    assert set(model.metrics.timing) >= {"split", "fit_encoders", "encode", "descent"}


@pytest.mark.parametrize("target_type", [SemanticType.NUMBER, SemanticType.BINARY, SemanticType.CATEGORY])
def test_convex_descent_non_increasing(target_type):
    rng = np.random.default_rng(123)
    for trial in range(7):
        n = int(rng.integers(30, 80))
        table = random_table(rng, n, target_type)
        config = make_config(
            [("x1", SemanticType.NUMBER), ("x2", SemanticType.NUMBER)],
            ("y", target_type),
            epochs=15,
            learning_rate=0.01,
            batch_size=n,  # full batch
            l2_penalty=float(rng.choice([0.0, 1e-3])),
            seed=int(rng.integers(0, 2**32)),
        )
        losses = train(table, config).metrics.loss_per_epoch
        for prev, cur in zip(losses, losses[1:]):
            assert cur <= prev + 1e-12


# --- evaluate / predict -----------------------------------------------------------

def test_evaluate_train_split_matches_training_metrics():
    table = separable_table()
    config = separable_config(epochs=5)
    model = train(table, config)
    tr, _, _ = split_table(table, config.split, config.trainer.seed)
    again = evaluate(model, tr)
    assert again.loss == model.metrics.train.loss
    assert again.accuracy == model.metrics.train.accuracy


def test_evaluate_regression_perfect_predictions():
    rng = np.random.default_rng(5)
    n = 40
    x = rng.normal(size=n)
    table = Table(
        {"x": [f"{v:.6f}" for v in x], "y": [f"{v:.6f}" for v in x]}, n
    )
    config = make_config(
        [("x", SemanticType.NUMBER)], ("y", SemanticType.NUMBER),
        epochs=400, learning_rate=0.2, batch_size=n,
    )
    model = train(table, config)
    metrics = evaluate(model, table)
    assert metrics.mse < 1e-6  # converges to the identity map


def test_evaluate_missing_target_errors():
    table = separable_table()
    model = train(table, separable_config(epochs=2))
    from os4ml.errors import EvaluationError

    with pytest.raises(EvaluationError):
        evaluate(model, Table({"f0": ["1"], "f1": ["2"], "f2": ["3"]}, 1))


def test_predict_probabilities_sum_to_one():
    rng = np.random.default_rng(8)
    table = random_table(rng, 60, SemanticType.CATEGORY)
    config = make_config(
        [("x1", SemanticType.NUMBER), ("x2", SemanticType.NUMBER)],
        ("y", SemanticType.CATEGORY),
        epochs=5,
    )
    model = train(table, config)
    preds = predict(model, Table({"x1": ["0.5", "1"], "x2": ["2", "-1"]}, 2))
    for probs in preds.probabilities:
        assert abs(sum(probs.values()) - 1.0) <= 1e-9
    assert all(v in ("c0", "c1", "c2", "<unk>") for v in preds.values)


def test_predict_missing_column_named():
    table = separable_table()
    model = train(table, separable_config(epochs=2))
    with pytest.raises(PredictError) as exc:
        predict(model, Table({"f0": ["1"], "f1": ["2"]}, 1))
    assert "f2" in str(exc.value)


def test_predict_extra_columns_ignored():
    table = separable_table()
    model = train(table, separable_config(epochs=2))
    rows = Table({"f0": ["0.1"], "f1": ["0.2"], "f2": ["0.3"], "extra": ["zzz"]}, 1)
    preds = predict(model, rows)
    assert preds.values[0] in ("yes", "no")


def test_predict_consistent_with_training_row():
    table = separable_table()
    config = separable_config(epochs=10)
    model = train(table, config)
    row = Table({c: [table.columns[c][0]] for c in ("f0", "f1", "f2")}, 1)
    p1 = predict(model, row)
    p2 = predict(model, row)
    assert p1.values == p2.values and p1.probabilities == p2.probabilities
