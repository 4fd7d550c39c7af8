"""The built-in templated training pipeline:

load-databag -> generate-config -> hyperparameter-search -> train-best
-> evaluate -> store-model

Ops receive all state through params and input artifacts, so the winning
trial is re-trained bit-for-bit by train-best from its recorded sub-seed.
"""

from __future__ import annotations

import json
from dataclasses import replace
from typing import Callable

from ..engine.model import MODEL_MEDIA_TYPE, deserialize, serialize
from ..engine.search import hyperparameter_search
from ..engine.training import evaluate, split_table, train
from ..ingest import Databag, parse_csv
from ..mlconfig import (
    CONFIG_MEDIA_TYPE,
    default_search_space,
    generate_config,
    parse_config,
    render_config,
)
from ..objectstore import ObjectStore
from .engine import StepOutput
from .templates import REQUIRED, StepSpec, WorkflowTemplate

LEDGER_MEDIA_TYPE = "application/json"


def _json_output(payload: dict) -> StepOutput:
    data = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return StepOutput(data, media_type=LEDGER_MEDIA_TYPE)


def train_model_template() -> WorkflowTemplate:
    steps = [
        StepSpec(
            id="load-databag",
            op="load-databag",
            params={"databag_id": "${databag_id}"},
            outputs=("databag", "dataset"),
        ),
        StepSpec(
            id="generate-config",
            op="generate-config",
            depends_on=("load-databag",),
            params={"target": "${target}", "overrides": "${overrides}"},
            inputs={"databag": "load-databag.databag"},
            outputs=("config",),
        ),
        StepSpec(
            id="hyperparameter-search",
            op="hyperparameter-search",
            depends_on=("load-databag", "generate-config"),
            params={"trials": "${trials}"},
            inputs={"dataset": "load-databag.dataset", "config": "generate-config.config"},
            outputs=("ledger", "best_config"),
        ),
        StepSpec(
            id="train-best",
            op="train-best",
            depends_on=("load-databag", "hyperparameter-search"),
            inputs={
                "dataset": "load-databag.dataset",
                "config": "hyperparameter-search.best_config",
            },
            outputs=("model",),
        ),
        StepSpec(
            id="evaluate",
            op="evaluate",
            depends_on=("load-databag", "train-best"),
            inputs={"dataset": "load-databag.dataset", "model": "train-best.model"},
            outputs=("metrics",),
        ),
        StepSpec(
            id="store-model",
            op="store-model",
            depends_on=("train-best",),
            inputs={"model": "train-best.model"},
            outputs=("model",),
        ),
    ]
    return WorkflowTemplate(
        name="train-model",
        version="1",
        parameters={
            "databag_id": REQUIRED,
            "target": REQUIRED,
            "trials": None,
            "overrides": {},
        },
        steps=steps,
    )


def make_builtin_ops(
    databag_lookup: Callable[[str], Databag], store: ObjectStore
) -> dict[str, Callable]:
    """Built-in op implementations, closed over the platform's services."""

    def op_load_databag(params, inputs):
        databag = databag_lookup(params["databag_id"])
        raw = store.get("datasets", databag.raw_artifact)
        return {
            "databag": _json_output(databag.to_payload()),
            "dataset": StepOutput(raw, bucket="datasets", media_type="text/csv"),
        }

    def op_generate_config(params, inputs):
        databag = Databag.from_payload(json.loads(inputs["databag"]))
        config = generate_config(databag, params["target"], params.get("overrides") or {})
        return {"config": StepOutput(render_config(config), media_type=CONFIG_MEDIA_TYPE)}

    def op_search(params, inputs):
        config = parse_config(inputs["config"])
        table = parse_csv(inputs["dataset"])
        kwargs = {}
        if params.get("trials"):
            kwargs["trials"] = int(params["trials"])
        space = default_search_space(config, **kwargs)
        _, ledger = hyperparameter_search(table, config, space)
        successes = [e for e in ledger if "val_loss" in e]
        best = min(successes, key=lambda e: (e["val_loss"], e["trial"]))
        best_config = replace(
            config,
            trainer=replace(
                config.trainer,
                learning_rate=best["learning_rate"],
                l2_penalty=best["l2_penalty"],
                seed=best["seed"],
            ),
        )
        return {
            "ledger": _json_output({"trials": ledger, "best_trial": best["trial"]}),
            "best_config": StepOutput(render_config(best_config), media_type=CONFIG_MEDIA_TYPE),
        }

    def op_train_best(params, inputs):
        config = parse_config(inputs["config"])
        table = parse_csv(inputs["dataset"])
        model = train(table, config)
        return {"model": StepOutput(serialize(model), media_type=MODEL_MEDIA_TYPE)}

    def op_evaluate(params, inputs):
        model = deserialize(inputs["model"])
        table = parse_csv(inputs["dataset"])
        _, _, test_split = split_table(table, model.config.split, model.config.trainer.seed)
        test_metrics = evaluate(model, test_split)
        payload = model.metrics.to_payload(include_timing=True)
        payload["test"] = test_metrics.to_payload()
        return {"metrics": _json_output(payload)}

    def op_store_model(params, inputs):
        return {
            "model": StepOutput(inputs["model"], bucket="models", media_type=MODEL_MEDIA_TYPE)
        }

    return {
        "load-databag": op_load_databag,
        "generate-config": op_generate_config,
        "hyperparameter-search": op_search,
        "train-best": op_train_best,
        "evaluate": op_evaluate,
        "store-model": op_store_model,
    }
