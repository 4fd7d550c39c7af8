"""Training loop, losses, and inference for the linear decoder.

Everything is deterministic given the trainer seed: the split permutation
comes from ``default_rng(seed)``, per-epoch batch shuffling from
``default_rng(splitmix64(seed))``, and weights start at zero, so a (data,
config) pair fully determines the serialized model bytes.

Losses are the standard convex ones (MSE, binary cross-entropy, softmax
cross-entropy), each plus ``l2_penalty * ||W||^2`` with the bias excluded.
``loss_per_epoch`` records that full objective on the training split after
each epoch, which is what full-batch descent monotonically decreases.
"""

from __future__ import annotations

import time

import numpy as np

from ..errors import (
    EvaluationError,
    NumericError,
    PredictError,
    ShapeMismatchError,
    SplitError,
)
from ..ingest import SemanticType, Table
from ..mlconfig import MLConfig, SplitSpec
from .encoders import (
    BinaryEncoder,
    CategoryEncoder,
    EncoderState,
    encode,
    encode_target,
    encoded_width,
    fit_encoders,
    output_width,
    target_classes,
)
from .model import DecoderWeights, Metrics, SplitMetrics, TrainedModel
from .search_seed import splitmix64

MIN_SPLIT_ROWS = 10


def split_table(table: Table, split: SplitSpec, seed: int) -> tuple[Table, Table, Table]:
    """Seeded shuffle then contiguous partition; val/test sizes floor, train
    absorbs the rounding remainder."""
    n = table.row_count
    if n < MIN_SPLIT_ROWS:
        raise SplitError(f"need at least {MIN_SPLIT_ROWS} rows to split, got {n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_val = int(split.val * n)
    n_test = int(split.test * n)
    n_train = n - n_val - n_test
    train_idx = perm[:n_train].tolist()
    val_idx = perm[n_train:n_train + n_val].tolist()
    test_idx = perm[n_train + n_val:].tolist()
    return table.take_rows(train_idx), table.take_rows(val_idx), table.take_rows(test_idx)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    ez = np.exp(shifted)
    return ez / ez.sum(axis=1, keepdims=True)


def forward(X: np.ndarray, weights: DecoderWeights, target_type: SemanticType) -> np.ndarray:
    """Raw predictions: values for number, sigmoid probs for binary, softmax
    probability rows for category."""
    if X.shape[1] != weights.W.shape[0]:
        raise ShapeMismatchError(
            f"matrix has {X.shape[1]} dims, weights expect {weights.W.shape[0]}"
        )
    Z = X @ weights.W + weights.b
    if target_type == SemanticType.NUMBER:
        return Z[:, 0]
    if target_type == SemanticType.BINARY:
        return _sigmoid(Z[:, 0])
    return _softmax(Z)


def loss_and_grad(
    X: np.ndarray,
    y: np.ndarray,
    weights: DecoderWeights,
    target_type: SemanticType,
    l2_penalty: float,
) -> tuple[float, DecoderWeights]:
    """Loss plus its exact analytic gradient (same shapes as the weights)."""
    n = X.shape[0]
    if n == 0:
        raise ShapeMismatchError("empty batch")
    with np.errstate(over="ignore", invalid="ignore"):
        return _loss_and_grad_impl(X, y, weights, target_type, l2_penalty, n)


def _loss_and_grad_impl(X, y, weights, target_type, l2_penalty, n):
    W, b = weights.W, weights.b
    Z = X @ W + b

    if target_type == SemanticType.NUMBER:
        r = Z[:, 0] - y
        loss = float((r @ r) / n)
        gW = (2.0 / n) * (X.T @ r)[:, None]
        gb = np.asarray([float(2.0 * r.mean())])
    elif target_type == SemanticType.BINARY:
        z = Z[:, 0]
        loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
        diff = _sigmoid(z) - y
        gW = (X.T @ diff)[:, None] / n
        gb = np.asarray([float(diff.mean())])
    elif target_type == SemanticType.CATEGORY:
        m = Z.max(axis=1, keepdims=True)
        lse = m[:, 0] + np.log(np.exp(Z - m).sum(axis=1))
        idx = np.arange(n)
        loss = float(np.mean(lse - Z[idx, y]))
        P = np.exp(Z - lse[:, None])
        P[idx, y] -= 1.0
        gW = (X.T @ P) / n
        gb = P.sum(axis=0) / n
    else:
        raise ShapeMismatchError(f"no loss for target type {target_type}")

    if l2_penalty:
        loss += float(l2_penalty * (W * W).sum())
        gW = gW + 2.0 * l2_penalty * W
    if not (np.isfinite(loss) and np.isfinite(gW).all() and np.isfinite(gb).all()):
        raise NumericError("non-finite loss or gradient; trial aborted")
    return loss, DecoderWeights(gW, gb)


def _split_metrics(
    X: np.ndarray, y: np.ndarray, weights: DecoderWeights, target_type: SemanticType
) -> SplitMetrics:
    # loss here is the pure data loss so values are comparable across l2 choices
    if X.shape[0] == 0:
        if target_type == SemanticType.NUMBER:
            return SplitMetrics(loss=0.0, mse=0.0, mae=0.0)
        return SplitMetrics(loss=0.0, accuracy=0.0)
    loss, _ = loss_and_grad(X, y, weights, target_type, l2_penalty=0.0)
    preds = forward(X, weights, target_type)
    if target_type == SemanticType.NUMBER:
        r = preds - y
        return SplitMetrics(loss=loss, mse=float((r @ r) / len(r)), mae=float(np.abs(r).mean()))
    if target_type == SemanticType.BINARY:
        acc = float(((preds >= 0.5).astype(np.float64) == y).mean())
    else:
        acc = float((preds.argmax(axis=1) == y).mean())
    return SplitMetrics(loss=loss, accuracy=acc)


def train(table: Table, config: MLConfig) -> TrainedModel:
    """Split, fit encoders, run mini-batch gradient descent for exactly
    ``epochs`` passes, and measure all three splits."""
    timing: dict[str, float] = {}
    t0 = time.perf_counter()
    train_t, val_t, test_t = split_table(table, config.split, config.trainer.seed)
    timing["split"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    state = fit_encoders(train_t, config)
    timing["fit_encoders"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    X_train = encode(train_t, state)
    y_train = encode_target(train_t, state)
    X_val = encode(val_t, state)
    y_val = encode_target(val_t, state)
    X_test = encode(test_t, state)
    y_test = encode_target(test_t, state)
    timing["encode"] = time.perf_counter() - t0

    target_type = config.output_feature.type
    dims = encoded_width(state)
    width = output_width(state)
    weights = DecoderWeights(
        np.zeros((dims, width), dtype=np.float64), np.zeros(width, dtype=np.float64)
    )

    trainer = config.trainer
    batch_rng = np.random.default_rng(splitmix64(trainer.seed))
    n = X_train.shape[0]
    loss_per_epoch: list[float] = []

    t0 = time.perf_counter()
    for _ in range(trainer.epochs):
        perm = batch_rng.permutation(n)
        for start in range(0, n, trainer.batch_size):
            idx = perm[start:start + trainer.batch_size]
            _, grad = loss_and_grad(
                X_train[idx], y_train[idx], weights, target_type, trainer.l2_penalty
            )
            weights.W -= trainer.learning_rate * grad.W
            weights.b -= trainer.learning_rate * grad.b
        epoch_loss, _ = loss_and_grad(
            X_train, y_train, weights, target_type, trainer.l2_penalty
        )
        loss_per_epoch.append(epoch_loss)
    timing["descent"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    metrics = Metrics(
        train=_split_metrics(X_train, y_train, weights, target_type),
        val=_split_metrics(X_val, y_val, weights, target_type),
        test=_split_metrics(X_test, y_test, weights, target_type),
        loss_per_epoch=loss_per_epoch,
        timing=timing,
    )
    timing["evaluate"] = time.perf_counter() - t0

    return TrainedModel(config=config, encoder_state=state, weights=weights, metrics=metrics)


def evaluate(model: TrainedModel, table: Table) -> SplitMetrics:
    """Loss plus accuracy (classification) or mse/mae (regression) on the
    given rows."""
    if model.encoder_state.target_name not in table.columns:
        raise EvaluationError(
            f"target column {model.encoder_state.target_name!r} missing from table"
        )
    X = encode(table, model.encoder_state)
    y = encode_target(table, model.encoder_state)
    return _split_metrics(X, y, model.weights, model.encoder_state.target_type)


class Predictions:
    """Decoded predictions; probabilities present for classification targets."""

    def __init__(self, values: list, probabilities: list[dict[str, float]] | None):
        self.values = values
        self.probabilities = probabilities


def predict(model: TrainedModel, rows: Table) -> Predictions:
    """Predict for rows lacking the target; extra columns are ignored."""
    state = model.encoder_state
    missing = [name for name in state.features if name not in rows.columns]
    if missing:
        raise PredictError(f"missing input column(s): {missing}")
    X = encode(rows.select(list(state.features)), state)
    preds = forward(X, model.weights, state.target_type)

    if state.target_type == SemanticType.NUMBER:
        return Predictions([float(v) for v in preds], None)

    if state.target_type == SemanticType.BINARY:
        enc = state.target
        assert isinstance(enc, BinaryEncoder)
        values = [enc.positive_token if p >= 0.5 else enc.negative_token for p in preds]
        probabilities = [
            {enc.positive_token: float(p), enc.negative_token: float(1.0 - p)} for p in preds
        ]
        return Predictions(values, probabilities)

    assert isinstance(state.target, CategoryEncoder)
    classes = target_classes(state)
    values = [classes[i] for i in preds.argmax(axis=1)]
    probabilities = [
        {label: float(p) for label, p in zip(classes, row)} for row in preds
    ]
    return Predictions(values, probabilities)
