"""Workflow templates: parameterized step DAGs plus their validation rules.

Template documents share the strict YAML syntax of the model config.
Validation checks id uniqueness, dependency existence, acyclicity (a cycle
aborts validation immediately, naming one cycle), placeholder resolution,
input references against declared upstream outputs, and op registration.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import yaml

from ..errors import BindingError, ConfigParseError, CycleError, StrictModeError, TemplateValidationError

REQUIRED = object()  # sentinel: parameter has no default and must be bound

_PLACEHOLDER_RE = re.compile(r"\$\{([A-Za-z_][\w-]*)\}")


@dataclass(frozen=True)
class RetrySpec:
    max_retries: int = 2
    backoff_base_ms: int = 100

    def to_payload(self) -> dict:
        return {"max_retries": self.max_retries, "backoff_base_ms": self.backoff_base_ms}


@dataclass
class StepSpec:
    id: str
    op: str
    params: dict = field(default_factory=dict)
    depends_on: tuple[str, ...] = ()
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: tuple[str, ...] = ()
    retry: RetrySpec = field(default_factory=RetrySpec)

    def to_payload(self) -> dict:
        return {
            "id": self.id,
            "op": self.op,
            "params": dict(self.params),
            "depends_on": list(self.depends_on),
            "inputs": dict(self.inputs),
            "outputs": list(self.outputs),
            "retry": self.retry.to_payload(),
        }


@dataclass
class WorkflowTemplate:
    name: str
    version: str
    parameters: dict[str, object]  # name -> default, or REQUIRED
    steps: list[StepSpec]

    def step(self, step_id: str) -> StepSpec:
        for s in self.steps:
            if s.id == step_id:
                return s
        raise KeyError(step_id)


def _collect_placeholders(value) -> set[str]:
    if isinstance(value, str):
        return set(_PLACEHOLDER_RE.findall(value))
    if isinstance(value, dict):
        return set().union(*(_collect_placeholders(v) for v in value.values())) if value else set()
    if isinstance(value, list):
        return set().union(*(_collect_placeholders(v) for v in value)) if value else set()
    return set()


def resolve_value(value, parameters: dict):
    """Substitute ``${name}`` placeholders; a string that is exactly one
    placeholder resolves to the raw bound value, preserving its type."""
    if isinstance(value, str):
        full = _PLACEHOLDER_RE.fullmatch(value)
        if full:
            return parameters[full.group(1)]
        return _PLACEHOLDER_RE.sub(lambda m: str(parameters[m.group(1)]), value)
    if isinstance(value, dict):
        return {k: resolve_value(v, parameters) for k, v in value.items()}
    if isinstance(value, list):
        return [resolve_value(v, parameters) for v in value]
    return value


def _find_cycle(steps: list[StepSpec]) -> list[str] | None:
    graph = {s.id: [d for d in s.depends_on] for s in steps}
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {sid: WHITE for sid in graph}
    stack: list[str] = []

    def visit(node: str) -> list[str] | None:
        color[node] = GRAY
        stack.append(node)
        for dep in graph[node]:
            if dep not in color:
                continue
            if color[dep] == GRAY:
                return stack[stack.index(dep):]
            if color[dep] == WHITE:
                cycle = visit(dep)
                if cycle:
                    return cycle
        stack.pop()
        color[node] = BLACK
        return None

    for sid in graph:
        if color[sid] == WHITE:
            cycle = visit(sid)
            if cycle:
                return cycle
    return None


def _ancestors(steps: list[StepSpec]) -> dict[str, set[str]]:
    deps = {s.id: set(s.depends_on) for s in steps}
    result: dict[str, set[str]] = {}

    def walk(sid: str) -> set[str]:
        if sid in result:
            return result[sid]
        acc = set()
        for d in deps.get(sid, ()):
            acc.add(d)
            acc |= walk(d)
        result[sid] = acc
        return acc

    for s in steps:
        walk(s.id)
    return result


def validate_template(
    template: WorkflowTemplate, registered_ops: set[str] | None = None
) -> WorkflowTemplate:
    """Check structural integrity; aggregates violations, but a dependency
    cycle raises immediately since nothing downstream of it is meaningful."""
    violations: list[str] = []
    ids = [s.id for s in template.steps]
    dupes = {sid for sid in ids if ids.count(sid) > 1}
    if dupes:
        violations.append(f"duplicate step id(s): {sorted(dupes)}")
    id_set = set(ids)
    for s in template.steps:
        for dep in s.depends_on:
            if dep not in id_set:
                violations.append(f"step {s.id!r} depends on unknown step {dep!r}")
    if violations:
        raise TemplateValidationError(violations)

    cycle = _find_cycle(template.steps)
    if cycle:
        raise CycleError(cycle)

    ancestors = _ancestors(template.steps)
    outputs = {s.id: set(s.outputs) for s in template.steps}
    declared_params = set(template.parameters)
    for s in template.steps:
        if registered_ops is not None and s.op not in registered_ops:
            violations.append(f"step {s.id!r} uses unregistered op {s.op!r}")
        for name in sorted(_collect_placeholders(s.params)):
            if name not in declared_params:
                violations.append(
                    f"step {s.id!r} references undeclared parameter ${{{name}}}"
                )
        for local, ref in s.inputs.items():
            if "." not in ref:
                violations.append(f"step {s.id!r} input {local!r} has malformed ref {ref!r}")
                continue
            sid, oname = ref.split(".", 1)
            if sid not in id_set:
                violations.append(f"step {s.id!r} input {local!r} references unknown step {sid!r}")
            elif sid not in ancestors[s.id]:
                violations.append(
                    f"step {s.id!r} input {local!r} references {sid!r} which is not an upstream dependency"
                )
            elif oname not in outputs[sid]:
                violations.append(
                    f"step {s.id!r} input {local!r} references undeclared output {ref!r}"
                )
    if violations:
        raise TemplateValidationError(violations)
    return template


def bind_parameters(template: WorkflowTemplate, provided: dict) -> dict:
    """Merge provided values over declared defaults; strict both ways."""
    unknown = set(provided) - set(template.parameters)
    if unknown:
        raise BindingError(f"unknown parameter(s): {sorted(unknown)}")
    bound = {}
    missing = []
    for name, default in template.parameters.items():
        if name in provided:
            bound[name] = provided[name]
        elif default is REQUIRED:
            missing.append(name)
        else:
            bound[name] = default
    if missing:
        raise BindingError(f"missing required parameter(s): {sorted(missing)}")
    return bound


# --- document form ----------------------------------------------------------

_STEP_KEYS = {"id", "op", "params", "depends_on", "inputs", "outputs", "retry"}
_RETRY_KEYS = {"max_retries", "backoff_base_ms"}
_TOP_KEYS = {"name", "version", "parameters", "steps"}
_PARAM_KEYS = {"default", "required"}


def render_template(template: WorkflowTemplate) -> bytes:
    params = {}
    for name, default in template.parameters.items():
        params[name] = {"required": True} if default is REQUIRED else {"default": default}
    doc = {
        "name": template.name,
        "version": template.version,
        "parameters": params,
        "steps": [s.to_payload() for s in template.steps],
    }
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=False).encode("utf-8")


def parse_template(data: bytes) -> WorkflowTemplate:
    try:
        raw = yaml.safe_load(data.decode("utf-8"))
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        raise ConfigParseError(
            f"syntax error: {exc.problem}",
            line=mark.line + 1 if mark else None,
            column=mark.column + 1 if mark else None,
        ) from exc
    except (yaml.YAMLError, UnicodeDecodeError) as exc:
        raise ConfigParseError(f"syntax error: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigParseError("template document must be a mapping")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise StrictModeError(f"unknown field(s) {sorted(unknown)} in template")
    if "name" not in raw or "steps" not in raw:
        raise ConfigParseError("template requires name and steps")

    parameters: dict[str, object] = {}
    for pname, pspec in (raw.get("parameters") or {}).items():
        pspec = pspec or {}
        unknown = set(pspec) - _PARAM_KEYS
        if unknown:
            raise StrictModeError(f"unknown field(s) {sorted(unknown)} in parameter {pname!r}")
        if pspec.get("required"):
            parameters[pname] = REQUIRED
        else:
            parameters[pname] = pspec.get("default")

    steps = []
    for i, step_raw in enumerate(raw["steps"]):
        if not isinstance(step_raw, dict):
            raise ConfigParseError(f"steps[{i}] must be a mapping")
        unknown = set(step_raw) - _STEP_KEYS
        if unknown:
            raise StrictModeError(f"unknown field(s) {sorted(unknown)} in steps[{i}]")
        if "id" not in step_raw or "op" not in step_raw:
            raise ConfigParseError(f"steps[{i}] requires id and op")
        retry_raw = step_raw.get("retry") or {}
        unknown = set(retry_raw) - _RETRY_KEYS
        if unknown:
            raise StrictModeError(f"unknown field(s) {sorted(unknown)} in steps[{i}].retry")
        steps.append(
            StepSpec(
                id=str(step_raw["id"]),
                op=str(step_raw["op"]),
                params=step_raw.get("params") or {},
                depends_on=tuple(step_raw.get("depends_on") or ()),
                inputs=dict(step_raw.get("inputs") or {}),
                outputs=tuple(step_raw.get("outputs") or ()),
                retry=RetrySpec(**{**RetrySpec().to_payload(), **retry_raw}),
            )
        )
    return WorkflowTemplate(
        name=str(raw["name"]),
        version=str(raw.get("version", "1")),
        parameters=parameters,
        steps=steps,
    )
