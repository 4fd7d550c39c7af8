"""Per-type feature encoders and the concatenating combiner.

Encoder widths: number 1, binary 1, category |vocab|+1 (reserved UNK slot
last), text 256 hashed bag-of-words buckets. All encoders are fitted on the
training split only. Token hashing uses crc32(token utf-8) mod 256 so every
implementation of the model format agrees byte-for-byte.
"""

from __future__ import annotations

import re
import zlib
from dataclasses import dataclass, field

import numpy as np

from ..errors import EncodeError, FitError
from ..ingest import SemanticType, Table
from ..mlconfig import MLConfig

UNK_TOKEN = "<unk>"
TEXT_BUCKETS = 256

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

_BINARY_FAMILIES = (("1", "0"), ("true", "false"), ("yes", "no"))


@dataclass
class NumberEncoder:
    mean: float
    std: float

    width = 1

    def to_payload(self) -> dict:
        return {"type": "number", "mean": self.mean, "std": self.std}


@dataclass
class BinaryEncoder:
    positive_token: str
    negative_token: str
    majority_token: str

    width = 1

    def to_payload(self) -> dict:
        return {
            "type": "binary",
            "positive_token": self.positive_token,
            "negative_token": self.negative_token,
            "majority_token": self.majority_token,
        }


@dataclass
class CategoryEncoder:
    vocabulary: list[str]

    @property
    def width(self) -> int:
        return len(self.vocabulary) + 1

    def index_of(self, token: str | None) -> int:
        if token is None:
            return len(self.vocabulary)
        try:
            return self.vocabulary.index(token)
        except ValueError:
            return len(self.vocabulary)

    def to_payload(self) -> dict:
        return {"type": "category", "vocabulary": list(self.vocabulary)}


@dataclass
class TextEncoder:
    hash_buckets: int = TEXT_BUCKETS
    normalization: str = "l2"

    @property
    def width(self) -> int:
        return self.hash_buckets

    def to_payload(self) -> dict:
        return {
            "type": "text",
            "hash_buckets": self.hash_buckets,
            "normalization": self.normalization,
        }


FeatureEncoder = NumberEncoder | BinaryEncoder | CategoryEncoder | TextEncoder


@dataclass
class EncoderState:
    """Fitted encoders, one per input feature (config order), plus the target."""

    features: dict[str, FeatureEncoder]
    target: FeatureEncoder
    target_name: str
    target_type: SemanticType
    vocab_index: dict[str, dict[str, int]] = field(default_factory=dict, repr=False)

    def to_payload(self) -> dict:
        return {
            "features": [
                {"name": name, **enc.to_payload()} for name, enc in self.features.items()
            ],
            "target": {"name": self.target_name, **self.target.to_payload()},
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "EncoderState":
        features = {}
        for raw in payload["features"]:
            features[raw["name"]] = _encoder_from_payload(raw)
        target_raw = payload["target"]
        return cls(
            features=features,
            target=_encoder_from_payload(target_raw),
            target_name=target_raw["name"],
            target_type=SemanticType(target_raw["type"]),
        )


def _encoder_from_payload(raw: dict) -> FeatureEncoder:
    kind = raw["type"]
    if kind == "number":
        return NumberEncoder(raw["mean"], raw["std"])
    if kind == "binary":
        return BinaryEncoder(raw["positive_token"], raw["negative_token"], raw["majority_token"])
    if kind == "category":
        return CategoryEncoder(list(raw["vocabulary"]))
    if kind == "text":
        return TextEncoder(raw["hash_buckets"], raw["normalization"])
    raise EncodeError(f"unknown encoder type {kind!r}")


def _fit_number(cells: list[str | None], name: str) -> NumberEncoder:
    values = []
    for c in cells:
        if c is None:
            continue
        try:
            values.append(float(c))
        except ValueError:
            raise FitError(f"column {name!r}: value {c!r} is not numeric") from None
    if not values:
        raise FitError(f"column {name!r} has no non-missing training values")
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    std = float(np.sqrt(((arr - mean) ** 2).mean()))  # population std
    return NumberEncoder(mean, std)


def _fit_binary(cells: list[str | None], name: str) -> BinaryEncoder:
    present = [c.lower() for c in cells if c is not None]
    family = None
    values = set(present)
    for pos, neg in _BINARY_FAMILIES:
        if values <= {pos, neg}:
            family = (pos, neg)
            break
    if family is None:
        raise FitError(f"column {name!r} values {sorted(values)[:5]} are not binary-codable")
    pos, neg = family
    positives = sum(1 for c in present if c == pos)
    majority = pos if positives * 2 >= len(present) else neg
    return BinaryEncoder(pos, neg, majority)


def _fit_category(cells: list[str | None]) -> CategoryEncoder:
    vocab: list[str] = []
    seen = set()
    for c in cells:
        if c is not None and c not in seen:
            seen.add(c)
            vocab.append(c)
    return CategoryEncoder(vocab)


def _fit_one(cells: list[str | None], ftype: SemanticType, name: str) -> FeatureEncoder:
    if ftype == SemanticType.NUMBER:
        return _fit_number(cells, name)
    if ftype == SemanticType.BINARY:
        return _fit_binary(cells, name)
    if ftype == SemanticType.CATEGORY:
        return _fit_category(cells)
    return TextEncoder()


def fit_encoders(train: Table, config: MLConfig) -> EncoderState:
    """Fit all input encoders and the target codec on the training split."""
    if train.row_count == 0:
        raise FitError("training split is empty")
    features: dict[str, FeatureEncoder] = {}
    for feat in config.input_features:
        if feat.name not in train.columns:
            raise FitError(f"column {feat.name!r} missing from training table")
        features[feat.name] = _fit_one(train.columns[feat.name], feat.type, feat.name)

    target_name = config.output_feature.name
    if target_name not in train.columns:
        raise FitError(f"target column {target_name!r} missing from training table")
    target = _fit_one(train.columns[target_name], config.output_feature.type, target_name)

    state = EncoderState(
        features=features,
        target=target,
        target_name=target_name,
        target_type=config.output_feature.type,
    )
    _build_vocab_index(state)
    return state


def _build_vocab_index(state: EncoderState) -> None:
    # O(1) lookups for category encoders; rebuilt after deserialization too
    state.vocab_index = {}
    for name, enc in state.features.items():
        if isinstance(enc, CategoryEncoder):
            state.vocab_index[name] = {tok: i for i, tok in enumerate(enc.vocabulary)}
    if isinstance(state.target, CategoryEncoder):
        state.vocab_index["\x00target"] = {
            tok: i for i, tok in enumerate(state.target.vocabulary)
        }


def encoded_width(state: EncoderState) -> int:
    return sum(enc.width for enc in state.features.values())


def text_bucket(token: str) -> int:
    return zlib.crc32(token.encode("utf-8")) % TEXT_BUCKETS


def _encode_column(cells: list[str | None], enc: FeatureEncoder, name: str,
                   vocab_index: dict[str, int] | None) -> np.ndarray:
    n = len(cells)
    if isinstance(enc, NumberEncoder):
        out = np.zeros((n, 1), dtype=np.float64)
        if enc.std > 0:
            for i, c in enumerate(cells):
                if c is None:
                    continue  # mean imputation z-scores to exactly 0
                try:
                    out[i, 0] = (float(c) - enc.mean) / enc.std
                except ValueError:
                    raise EncodeError(f"column {name!r}: value {c!r} is not numeric") from None
        else:
            for c in cells:
                if c is not None:
                    try:
                        float(c)
                    except ValueError:
                        raise EncodeError(
                            f"column {name!r}: value {c!r} is not numeric"
                        ) from None
        return out
    if isinstance(enc, BinaryEncoder):
        out = np.zeros((n, 1), dtype=np.float64)
        for i, c in enumerate(cells):
            token = enc.majority_token if c is None else c.lower()
            out[i, 0] = 1.0 if token == enc.positive_token else 0.0
        return out
    if isinstance(enc, CategoryEncoder):
        out = np.zeros((n, enc.width), dtype=np.float64)
        unk = len(enc.vocabulary)
        index = vocab_index if vocab_index is not None else {
            tok: i for i, tok in enumerate(enc.vocabulary)
        }
        for i, c in enumerate(cells):
            out[i, index.get(c, unk) if c is not None else unk] = 1.0
        return out
    # text: hashed bag-of-words, l2-normalized, zero vector when empty
    out = np.zeros((n, enc.width), dtype=np.float64)
    for i, c in enumerate(cells):
        if not c:
            continue
        for token in _TOKEN_RE.findall(c.lower()):
            out[i, text_bucket(token)] += 1.0
        norm = np.linalg.norm(out[i])
        if norm > 0:
            out[i] /= norm
    return out


def encode(table: Table, state: EncoderState) -> np.ndarray:
    """Concatenate per-feature encodings into a dense row-major matrix."""
    blocks = []
    for name, enc in state.features.items():
        if name not in table.columns:
            raise EncodeError(f"column {name!r} missing from table")
        blocks.append(
            _encode_column(table.columns[name], enc, name, state.vocab_index.get(name))
        )
    X = np.concatenate(blocks, axis=1) if blocks else np.zeros((table.row_count, 0))
    if not np.isfinite(X).all():
        raise EncodeError("non-finite value produced while encoding")
    return X


def encode_target(table: Table, state: EncoderState) -> np.ndarray:
    """Target vector: float values (number), 0/1 (binary), class index (category).

    Missing targets are imputed like their input counterparts: train-split
    mean, majority token, or the reserved UNK class.
    """
    name = state.target_name
    if name not in table.columns:
        raise EncodeError(f"target column {name!r} missing from table")
    cells = table.columns[name]
    enc = state.target
    if isinstance(enc, NumberEncoder):
        out = np.empty(len(cells), dtype=np.float64)
        for i, c in enumerate(cells):
            if c is None:
                out[i] = enc.mean
            else:
                try:
                    out[i] = float(c)
                except ValueError:
                    raise EncodeError(
                        f"target column {name!r}: value {c!r} is not numeric"
                    ) from None
        return out
    if isinstance(enc, BinaryEncoder):
        out = np.empty(len(cells), dtype=np.float64)
        for i, c in enumerate(cells):
            token = enc.majority_token if c is None else c.lower()
            out[i] = 1.0 if token == enc.positive_token else 0.0
        return out
    if isinstance(enc, CategoryEncoder):
        unk = len(enc.vocabulary)
        index = state.vocab_index.get("\x00target") or {
            tok: i for i, tok in enumerate(enc.vocabulary)
        }
        return np.asarray(
            [unk if c is None else index.get(c, unk) for c in cells], dtype=np.int64
        )
    raise EncodeError("text targets are unsupported")


def target_classes(state: EncoderState) -> list[str]:
    """Decoder class labels for a category target, UNK last."""
    assert isinstance(state.target, CategoryEncoder)
    return list(state.target.vocabulary) + [UNK_TOKEN]


def output_width(state: EncoderState) -> int:
    if isinstance(state.target, CategoryEncoder):
        return state.target.width
    return 1
