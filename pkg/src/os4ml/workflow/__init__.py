"""Parameterized DAG workflows with retries, artifact passing, and journaling."""

from .templates import (
    REQUIRED,
    RetrySpec,
    StepSpec,
    WorkflowTemplate,
    bind_parameters,
    parse_template,
    render_template,
    resolve_value,
    validate_template,
)
from .journal import RunSnapshot, StepRecord, replay_events
from .engine import StepOutput, WorkflowEngine
from .builtin import make_builtin_ops, train_model_template

__all__ = [
    "REQUIRED",
    "RetrySpec",
    "StepSpec",
    "WorkflowTemplate",
    "bind_parameters",
    "parse_template",
    "render_template",
    "resolve_value",
    "validate_template",
    "RunSnapshot",
    "StepRecord",
    "replay_events",
    "StepOutput",
    "WorkflowEngine",
    "make_builtin_ops",
    "train_model_template",
]
