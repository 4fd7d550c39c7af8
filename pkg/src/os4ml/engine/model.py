"""Trained model container and its canonical, byte-deterministic wire format.

The serialized form is canonical JSON (sorted keys, compact separators,
shortest round-trip float encoding) so identical (data, config) pairs always
produce identical bytes. Wall-clock timings are runtime-only and excluded
from the canonical payload; model equality is defined over that payload.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import ModelDecodeError, UnsupportedVersionError
from ..mlconfig import MLConfig
from .encoders import EncoderState, _build_vocab_index

MODEL_VERSION = "1"
MODEL_MEDIA_TYPE = "application/os4ml-model"


@dataclass
class DecoderWeights:
    """Linear decoder: W is [dims x output_width], b is [output_width]."""

    W: np.ndarray
    b: np.ndarray

    def copy(self) -> "DecoderWeights":
        return DecoderWeights(self.W.copy(), self.b.copy())

    def to_payload(self) -> dict:
        return {
            "W": [[float(v) for v in row] for row in self.W],
            "b": [float(v) for v in self.b],
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "DecoderWeights":
        return cls(
            W=np.asarray(payload["W"], dtype=np.float64).reshape(
                len(payload["W"]), len(payload["b"])
            ),
            b=np.asarray(payload["b"], dtype=np.float64),
        )


@dataclass
class SplitMetrics:
    loss: float
    accuracy: float | None = None
    mse: float | None = None
    mae: float | None = None

    def to_payload(self) -> dict:
        out = {"loss": self.loss}
        if self.accuracy is not None:
            out["accuracy"] = self.accuracy
        if self.mse is not None:
            out["mse"] = self.mse
            out["mae"] = self.mae
        return out

    @classmethod
    def from_payload(cls, payload: dict) -> "SplitMetrics":
        return cls(
            loss=payload["loss"],
            accuracy=payload.get("accuracy"),
            mse=payload.get("mse"),
            mae=payload.get("mae"),
        )


@dataclass
class Metrics:
    train: SplitMetrics
    val: SplitMetrics
    test: SplitMetrics
    loss_per_epoch: list[float]
    timing: dict[str, float] = field(default_factory=dict)

    def to_payload(self, include_timing: bool = True) -> dict:
        out = {
            "train": self.train.to_payload(),
            "val": self.val.to_payload(),
            "test": self.test.to_payload(),
            "loss_per_epoch": list(self.loss_per_epoch),
        }
        if include_timing:
            out["timing"] = dict(self.timing)
        return out

    @classmethod
    def from_payload(cls, payload: dict) -> "Metrics":
        return cls(
            train=SplitMetrics.from_payload(payload["train"]),
            val=SplitMetrics.from_payload(payload["val"]),
            test=SplitMetrics.from_payload(payload["test"]),
            loss_per_epoch=list(payload["loss_per_epoch"]),
            timing=dict(payload.get("timing", {})),
        )


@dataclass(eq=False)
class TrainedModel:
    config: MLConfig
    encoder_state: EncoderState
    weights: DecoderWeights
    metrics: Metrics
    model_version: str = MODEL_VERSION

    def canonical_payload(self) -> dict:
        return {
            "model_version": self.model_version,
            "config": self.config.to_payload(),
            "encoders": self.encoder_state.to_payload(),
            "weights": self.weights.to_payload(),
            "metrics": self.metrics.to_payload(include_timing=False),
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, TrainedModel):
            return NotImplemented
        return self.canonical_payload() == other.canonical_payload()


def serialize(model: TrainedModel) -> bytes:
    return json.dumps(
        model.canonical_payload(), sort_keys=True, separators=(",", ":"), ensure_ascii=True
    ).encode("ascii")


def deserialize(data: bytes) -> TrainedModel:
    try:
        payload = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelDecodeError(f"model bytes are not valid: {exc}") from exc
    if not isinstance(payload, dict) or "model_version" not in payload:
        raise ModelDecodeError("model payload missing version tag")
    if payload["model_version"] != MODEL_VERSION:
        raise UnsupportedVersionError(
            f"model version {payload['model_version']!r} unsupported (expected {MODEL_VERSION})"
        )
    try:
        encoder_state = EncoderState.from_payload(payload["encoders"])
        _build_vocab_index(encoder_state)
        return TrainedModel(
            config=MLConfig.from_payload(payload["config"]),
            encoder_state=encoder_state,
            weights=DecoderWeights.from_payload(payload["weights"]),
            metrics=Metrics.from_payload(payload["metrics"]),
            model_version=payload["model_version"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelDecodeError(f"model payload malformed: {exc}") from exc
