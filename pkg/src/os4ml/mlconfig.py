"""Declarative model configuration: generated from a databag, never hand-written.

The document format is strict YAML with four top-level blocks
(input_features, output_feature, trainer, split). Unknown keys are rejected
so silently ignored typos cannot change training behavior. Trainer defaults
cover the no-search path: epochs 50, learning_rate 0.01, l2_penalty 0,
batch_size 32, seed 42, split 0.70/0.15/0.15.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import yaml

from .errors import ConfigParseError, StrictModeError, UnsupportedTargetError, ValidationError
from .errors import NotFoundError
from .ingest import Databag, SemanticType

SPLIT_TOLERANCE = 1e-9
TARGET_TYPES = (SemanticType.BINARY, SemanticType.CATEGORY, SemanticType.NUMBER)

CONFIG_MEDIA_TYPE = "application/os4ml-config"

_MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    type: SemanticType

    def to_payload(self) -> dict:
        return {"name": self.name, "type": self.type.value}


@dataclass(frozen=True)
class TrainerSpec:
    epochs: int = 50
    learning_rate: float = 0.01
    l2_penalty: float = 0.0
    batch_size: int = 32
    seed: int = 42

    def to_payload(self) -> dict:
        return {
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "l2_penalty": self.l2_penalty,
            "batch_size": self.batch_size,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class SplitSpec:
    train: float = 0.70
    val: float = 0.15
    test: float = 0.15

    def to_payload(self) -> dict:
        return {"train": self.train, "val": self.val, "test": self.test}


@dataclass(frozen=True)
class MLConfig:
    input_features: tuple[FeatureSpec, ...]
    output_feature: FeatureSpec
    trainer: TrainerSpec = field(default_factory=TrainerSpec)
    split: SplitSpec = field(default_factory=SplitSpec)

    def to_payload(self) -> dict:
        return {
            "input_features": [f.to_payload() for f in self.input_features],
            "output_feature": self.output_feature.to_payload(),
            "trainer": self.trainer.to_payload(),
            "split": self.split.to_payload(),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "MLConfig":
        return cls(
            input_features=tuple(
                FeatureSpec(f["name"], SemanticType(f["type"])) for f in payload["input_features"]
            ),
            output_feature=FeatureSpec(
                payload["output_feature"]["name"], SemanticType(payload["output_feature"]["type"])
            ),
            trainer=TrainerSpec(**payload["trainer"]),
            split=SplitSpec(**payload["split"]),
        )


@dataclass(frozen=True)
class SearchSpace:
    learning_rate_range: tuple[float, float] = (1e-4, 1e-1)
    l2_choices: tuple[float, ...] = (0.0, 1e-4, 1e-2)
    trials: int = 8

    def validate(self) -> "SearchSpace":
        violations = []
        low, high = self.learning_rate_range
        if not (low > 0 and high > 0):
            violations.append("learning_rate_range bounds must be positive")
        if not low < high:
            violations.append("learning_rate_range low must be < high")
        if any(c < 0 for c in self.l2_choices) or not self.l2_choices:
            violations.append("l2_choices must be a non-empty set of non-negative reals")
        if self.trials < 1:
            violations.append("trials must be >= 1")
        if violations:
            raise ValidationError(violations)
        return self


def default_search_space(config: MLConfig, **overrides) -> SearchSpace:
    """The fixed default space; keyword overrides replace individual fields."""
    space = SearchSpace()
    if overrides:
        space = replace(space, **overrides)
    return space.validate()


def _apply_feature_overrides(databag: Databag, entries: list, violations: list[str]):
    names = {c.name for c in databag.columns}
    selected = []
    overrode_type = False
    for entry in entries:
        if isinstance(entry, str):
            entry = {"name": entry}
        name = entry.get("name")
        if name not in names:
            violations.append(f"input feature {name!r} not in databag")
            continue
        detected = databag.column(name).detected_type
        if "type" in entry:
            wanted = SemanticType(entry["type"])
            if wanted != detected:
                overrode_type = True
            selected.append(FeatureSpec(name, wanted))
        else:
            selected.append(FeatureSpec(name, detected))
    return selected, overrode_type


def generate_config(databag: Databag, target: str, overrides: dict | None = None) -> MLConfig:
    """Build the full declarative config for a databag and target column.

    Inputs default to every non-target column with its detected type;
    overrides are applied field-wise on top. Deterministic: same databag,
    target, and overrides always yield the identical config.
    """
    overrides = overrides or {}
    try:
        target_col = databag.column(target)
    except KeyError:
        raise NotFoundError(f"target column {target!r} not in databag") from None
    if target_col.detected_type not in TARGET_TYPES:
        raise UnsupportedTargetError(
            f"target {target!r} has type {target_col.detected_type.value}; "
            "text targets are unsupported"
        )

    violations: list[str] = []
    allow_type_overrides = False
    if "input_features" in overrides:
        inputs, allow_type_overrides = _apply_feature_overrides(
            databag, overrides["input_features"], violations
        )
        inputs = [f for f in inputs if f.name != target]
    else:
        inputs = [
            FeatureSpec(c.name, c.detected_type) for c in databag.columns if c.name != target
        ]
    if violations:
        raise ValidationError(violations)

    trainer = TrainerSpec(**{**TrainerSpec().to_payload(), **overrides.get("trainer", {})})
    split = SplitSpec(**{**SplitSpec().to_payload(), **overrides.get("split", {})})

    config = MLConfig(
        input_features=tuple(inputs),
        output_feature=FeatureSpec(target, target_col.detected_type),
        trainer=trainer,
        split=split,
    )
    return validate_config(config, databag, allow_type_overrides=allow_type_overrides)


def validate_config(
    config: MLConfig, databag: Databag, *, allow_type_overrides: bool = False
) -> MLConfig:
    """Check every config invariant against the databag; aggregate all violations."""
    violations: list[str] = []
    names = {c.name for c in databag.columns}

    if not config.input_features:
        violations.append("input_features must be non-empty")
    seen = set()
    for feat in config.input_features:
        if feat.name in seen:
            violations.append(f"duplicate input feature {feat.name!r}")
        seen.add(feat.name)
        if feat.name not in names:
            violations.append(f"input feature {feat.name!r} not in databag")
        elif not allow_type_overrides and feat.type != databag.column(feat.name).detected_type:
            violations.append(
                f"input feature {feat.name!r} type {feat.type.value} does not match "
                f"detected type {databag.column(feat.name).detected_type.value}"
            )

    out = config.output_feature
    if out.name in seen:
        violations.append(f"output feature {out.name!r} also listed as input")
    if out.name not in names:
        violations.append(f"output feature {out.name!r} not in databag")
    if out.type not in TARGET_TYPES:
        violations.append(f"output feature type {out.type.value} unsupported (text targets)")

    t = config.trainer
    if t.epochs < 1:
        violations.append("trainer.epochs must be >= 1")
    if not (0 < t.learning_rate <= 1):
        violations.append("trainer.learning_rate must be in (0, 1]")
    if t.l2_penalty < 0:
        violations.append("trainer.l2_penalty must be >= 0")
    if t.batch_size < 1:
        violations.append("trainer.batch_size must be >= 1")
    if not (0 <= t.seed <= _MAX_SEED):
        violations.append("trainer.seed must fit in 64 bits")

    s = config.split
    if abs(s.train + s.val + s.test - 1.0) > SPLIT_TOLERANCE:
        violations.append(
            f"split fractions must sum to 1 (got {s.train + s.val + s.test!r})"
        )
    for frac_name, frac in (("train", s.train), ("val", s.val), ("test", s.test)):
        if frac <= 0:
            violations.append(f"split.{frac_name} must be positive")

    if violations:
        raise ValidationError(violations)
    return config


# --- document rendering ----------------------------------------------------

_FEATURE_KEYS = {"name", "type"}
_TRAINER_KEYS = {"epochs", "learning_rate", "l2_penalty", "batch_size", "seed"}
_SPLIT_KEYS = {"train", "val", "test"}
_TOP_KEYS = {"input_features", "output_feature", "trainer", "split"}


def render_config(config: MLConfig) -> bytes:
    """Emit the canonical document; parse_config(render_config(c)) == c."""
    doc = yaml.safe_dump(config.to_payload(), sort_keys=False, default_flow_style=False)
    return doc.encode("utf-8")


def _reject_unknown(mapping: dict, allowed: set[str], where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise StrictModeError(f"unknown field(s) {sorted(unknown)} in {where}")


def _parse_feature(raw, where: str) -> FeatureSpec:
    if not isinstance(raw, dict):
        raise ConfigParseError(f"{where} must be a mapping with name and type")
    _reject_unknown(raw, _FEATURE_KEYS, where)
    if "name" not in raw or "type" not in raw:
        raise ConfigParseError(f"{where} requires both name and type")
    try:
        ftype = SemanticType(raw["type"])
    except ValueError:
        raise ConfigParseError(f"{where} has unknown type {raw['type']!r}") from None
    return FeatureSpec(str(raw["name"]), ftype)


def parse_config(data: bytes) -> MLConfig:
    """Parse a strict config document; unknown fields are errors, omitted
    trainer/split blocks take all defaults."""
    try:
        raw = yaml.safe_load(data.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ConfigParseError(f"config is not UTF-8: {exc}") from exc
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        line = mark.line + 1 if mark else None
        column = mark.column + 1 if mark else None
        raise ConfigParseError(f"syntax error: {exc.problem}", line=line, column=column) from exc
    except yaml.YAMLError as exc:
        raise ConfigParseError(f"syntax error: {exc}") from exc

    if not isinstance(raw, dict):
        raise ConfigParseError("config document must be a mapping")
    _reject_unknown(raw, _TOP_KEYS, "config")

    if "input_features" not in raw or "output_feature" not in raw:
        raise ConfigParseError("config requires input_features and output_feature")
    features_raw = raw["input_features"]
    if not isinstance(features_raw, list):
        raise ConfigParseError("input_features must be a list")
    inputs = tuple(
        _parse_feature(f, f"input_features[{i}]") for i, f in enumerate(features_raw)
    )
    output = _parse_feature(raw["output_feature"], "output_feature")

    trainer_raw = raw.get("trainer") or {}
    if not isinstance(trainer_raw, dict):
        raise ConfigParseError("trainer must be a mapping")
    _reject_unknown(trainer_raw, _TRAINER_KEYS, "trainer")
    defaults = TrainerSpec().to_payload()
    merged = {**defaults, **trainer_raw}
    for key in ("epochs", "batch_size", "seed"):
        if not isinstance(merged[key], int) or isinstance(merged[key], bool):
            raise ConfigParseError(f"trainer.{key} must be an integer")
    for key in ("learning_rate", "l2_penalty"):
        if isinstance(merged[key], bool) or not isinstance(merged[key], (int, float)):
            raise ConfigParseError(f"trainer.{key} must be a number")
        merged[key] = float(merged[key])
    trainer = TrainerSpec(**merged)

    split_raw = raw.get("split") or {}
    if not isinstance(split_raw, dict):
        raise ConfigParseError("split must be a mapping")
    _reject_unknown(split_raw, _SPLIT_KEYS, "split")
    split_merged = {**SplitSpec().to_payload(), **split_raw}
    for key, value in split_merged.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigParseError(f"split.{key} must be a number")
        split_merged[key] = float(value)
    split = SplitSpec(**split_merged)

    return MLConfig(input_features=inputs, output_feature=output, trainer=trainer, split=split)
