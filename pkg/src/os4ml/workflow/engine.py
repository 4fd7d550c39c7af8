"""In-process DAG executor: bounded worker pool, automatic retries with
exponential backoff, artifact passing by object-store digest, and an
append-only journal from which all run state is replayed.

Ops are callables ``fn(params, inputs) -> dict[output_name, bytes|StepOutput]``
where ``inputs`` maps the step's declared local names to upstream artifact
bytes. Ops must be safe to invoke concurrently.
"""

from __future__ import annotations

import os
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConflictError, InvalidStateError, NotFoundError
from ..objectstore import ObjectStore, utc_now_iso
from .journal import STEP_TERMINAL, JournalFile, RunSnapshot, replay_events
from .templates import (
    StepSpec,
    WorkflowTemplate,
    bind_parameters,
    resolve_value,
    validate_template,
)


@dataclass
class StepOutput:
    data: bytes
    bucket: str = "artifacts"
    media_type: str = "application/octet-stream"


def _as_output(value) -> StepOutput:
    if isinstance(value, StepOutput):
        return value
    if isinstance(value, bytes):
        return StepOutput(value)
    raise TypeError(f"op outputs must be bytes or StepOutput, got {type(value).__name__}")


@dataclass
class _RunState:
    run_id: str
    journal: JournalFile
    steps: dict[str, StepSpec] = field(default_factory=dict)
    parameters: dict = field(default_factory=dict)
    status: dict[str, str] = field(default_factory=dict)  # step id -> status
    outputs: dict[str, dict[str, dict]] = field(default_factory=dict)
    launched: set[str] = field(default_factory=set)
    cancelled: bool = False
    finished: bool = False


class WorkflowEngine:
    def __init__(self, store: ObjectStore, journal_dir: str | Path, workers: int | None = None):
        self.store = store
        self.journal_dir = Path(journal_dir)
        self.journal_dir.mkdir(parents=True, exist_ok=True)
        self.workers = workers or (os.cpu_count() or 4)
        self._pool = ThreadPoolExecutor(max_workers=self.workers, thread_name_prefix="wf")
        self._ops: dict[str, object] = {}
        self._runs: dict[str, _RunState] = {}
        self._mutex = threading.RLock()
        self._recover()

    # --- registry ----------------------------------------------------------

    def register_op(self, name: str, fn) -> None:
        with self._mutex:
            if name in self._ops:
                raise ConflictError(f"op {name!r} already registered")
            self._ops[name] = fn

    def validate_template(self, template: WorkflowTemplate) -> WorkflowTemplate:
        with self._mutex:
            registered = set(self._ops)
        return validate_template(template, registered)

    # --- lifecycle ----------------------------------------------------------

    def submit(self, template: WorkflowTemplate, parameters: dict) -> RunSnapshot:
        """Persist a new run and start scheduling; returns immediately."""
        self.validate_template(template)
        bound = bind_parameters(template, parameters)
        run_id = uuid.uuid4().hex
        journal = JournalFile(self.journal_dir / f"{run_id}.jsonl")
        state = _RunState(run_id=run_id, journal=journal, parameters=bound)
        for step in template.steps:
            state.steps[step.id] = step
            state.status[step.id] = "Pending"
        with self._mutex:
            self._runs[run_id] = state
            journal.append(
                {
                    "event": "run_created",
                    "at": utc_now_iso(),
                    "run_id": run_id,
                    "template": template.name,
                    "version": template.version,
                    "parameters": bound,
                    "steps": [s.to_payload() for s in template.steps],
                }
            )
            self._schedule_locked(state)
        return self.run_status(run_id)

    def run_status(self, run_id: str) -> RunSnapshot:
        """Consistent point-in-time snapshot replayed from the journal."""
        with self._mutex:
            state = self._runs.get(run_id)
            if state is None:
                raise NotFoundError(f"no run {run_id}")
            events = list(state.journal.events)
        return replay_events(events)

    def run_ids(self) -> list[str]:
        with self._mutex:
            return sorted(self._runs)

    def cancel(self, run_id: str) -> None:
        """Stop scheduling; running steps finish their current attempt."""
        with self._mutex:
            state = self._runs.get(run_id)
            if state is None:
                raise NotFoundError(f"no run {run_id}")
            if state.finished:
                raise InvalidStateError(f"run {run_id} is already terminal")
            state.cancelled = True
            state.journal.append({"event": "run_cancelled", "at": utc_now_iso()})
            for sid, status in state.status.items():
                if status == "Pending":
                    self._mark_skipped_locked(state, sid, "cancelled")
            self._maybe_finish_locked(state)

    def wait(self, run_id: str, timeout: float = 60.0, poll: float = 0.02) -> RunSnapshot:
        deadline = time.monotonic() + timeout
        while True:
            snapshot = self.run_status(run_id)
            if snapshot.terminal:
                return snapshot
            if time.monotonic() > deadline:
                raise TimeoutError(f"run {run_id} still {snapshot.status} after {timeout}s")
            time.sleep(poll)

    def close(self) -> None:
        self._pool.shutdown(wait=True)

    # --- scheduling ---------------------------------------------------------

    def _schedule_locked(self, state: _RunState) -> None:
        if state.finished or state.cancelled:
            return
        for sid, step in state.steps.items():
            if sid in state.launched or state.status[sid] != "Pending":
                continue
            if all(state.status[d] == "Succeeded" for d in step.depends_on):
                state.launched.add(sid)
                self._pool.submit(self._execute_step, state, step)

    def _mark_skipped_locked(self, state: _RunState, sid: str, reason: str) -> None:
        state.status[sid] = "Skipped"
        state.journal.append(
            {"event": "step_skipped", "at": utc_now_iso(), "step_id": sid, "reason": reason}
        )

    def _skip_downstream_locked(self, state: _RunState, failed_sid: str) -> None:
        # transitive dependents of a failed step can never run
        changed = True
        while changed:
            changed = False
            for sid, step in state.steps.items():
                if state.status[sid] != "Pending":
                    continue
                if any(state.status[d] in ("Failed", "Skipped") for d in step.depends_on):
                    self._mark_skipped_locked(state, sid, f"upstream of {failed_sid} failed")
                    changed = True

    def _maybe_finish_locked(self, state: _RunState) -> None:
        if state.finished:
            return
        if not all(s in STEP_TERMINAL for s in state.status.values()):
            return
        if state.cancelled:
            status, error = "Cancelled", None
        elif any(s == "Failed" for s in state.status.values()):
            status, error = "Failed", "one or more steps failed"
        else:
            status, error = "Succeeded", None
        event = {"event": "run_finished", "at": utc_now_iso(), "status": status}
        if error:
            event["error"] = error
        state.journal.append(event)
        state.finished = True

    def _after_step_locked(self, state: _RunState) -> None:
        self._maybe_finish_locked(state)
        if not state.finished:
            self._schedule_locked(state)

    # --- step execution ------------------------------------------------------

    def _execute_step(self, state: _RunState, step: StepSpec) -> None:
        sid = step.id
        with self._mutex:
            if state.finished or state.status[sid] != "Pending":
                return
            params = resolve_value(step.params, state.parameters)
            refs = dict(step.inputs)
            upstream = {out_sid: dict(outs) for out_sid, outs in state.outputs.items()}
            op = self._ops[step.op]

        max_attempts = step.retry.max_retries + 1
        last_error = "cancelled"
        for attempt in range(1, max_attempts + 1):
            with self._mutex:
                if state.finished:
                    return
                if state.cancelled:
                    # no new attempt after cancellation; the step keeps its last failure
                    if attempt > 1:
                        self._fail_step_locked(state, sid, attempt - 1, last_error)
                    return
                state.status[sid] = "Running"
                state.journal.append(
                    {
                        "event": "step_started",
                        "at": utc_now_iso(),
                        "step_id": sid,
                        "attempt": attempt,
                    }
                )
            try:
                inputs = {}
                for local, ref in refs.items():
                    out_sid, oname = ref.split(".", 1)
                    located = upstream[out_sid][oname]
                    inputs[local] = self.store.get(located["bucket"], located["digest"])
                result = op(params, inputs)
                stored: dict[str, dict] = {}
                for oname in step.outputs:
                    if not isinstance(result, dict) or oname not in result:
                        raise KeyError(f"op {step.op!r} did not produce declared output {oname!r}")
                for oname in step.outputs:
                    blob = _as_output(result[oname])
                    artifact = self.store.put(blob.bucket, blob.data, blob.media_type)
                    stored[oname] = {"bucket": blob.bucket, "digest": artifact.digest}
                with self._mutex:
                    state.status[sid] = "Succeeded"
                    state.outputs[sid] = stored
                    state.journal.append(
                        {
                            "event": "step_succeeded",
                            "at": utc_now_iso(),
                            "step_id": sid,
                            "attempt": attempt,
                            "outputs": stored,
                        }
                    )
                    self._after_step_locked(state)
                return
            except Exception as exc:  # noqa: BLE001 - op failures become step outcomes
                last_error = f"{type(exc).__name__}: {exc}"
                with self._mutex:
                    if attempt < max_attempts and not state.cancelled:
                        backoff_ms = step.retry.backoff_base_ms * (2 ** (attempt - 1))
                        state.status[sid] = "Retrying"
                        state.journal.append(
                            {
                                "event": "step_retrying",
                                "at": utc_now_iso(),
                                "step_id": sid,
                                "attempt": attempt,
                                "error": last_error,
                                "backoff_ms": backoff_ms,
                            }
                        )
                    else:
                        self._fail_step_locked(state, sid, attempt, last_error)
                        return
                time.sleep(backoff_ms / 1000.0)

    def _fail_step_locked(self, state: _RunState, sid: str, attempt: int, error: str) -> None:
        state.status[sid] = "Failed"
        state.journal.append(
            {
                "event": "step_failed",
                "at": utc_now_iso(),
                "step_id": sid,
                "attempt": attempt,
                "error": error,
            }
        )
        self._skip_downstream_locked(state, sid)
        self._after_step_locked(state)

    # --- crash recovery -------------------------------------------------------

    def _recover(self) -> None:
        """Re-read every journal; non-terminal runs are closed out as Failed
        with reason "interrupted" (no step re-executes, no record duplicates)."""
        for path in sorted(self.journal_dir.glob("*.jsonl")):
            try:
                journal = JournalFile.load(path)
                snapshot = replay_events(journal.events)
            except (ValueError, KeyError):
                continue  # unreadable journal: leave the file for inspection
            state = _RunState(run_id=snapshot.id, journal=journal, finished=True)
            for sid, rec in snapshot.steps.items():
                state.status[sid] = rec.status
                state.outputs[sid] = rec.outputs
            if not snapshot.terminal:
                now = utc_now_iso()
                for sid, rec in snapshot.steps.items():
                    if rec.status in ("Running", "Retrying"):
                        journal.append(
                            {
                                "event": "step_failed",
                                "at": now,
                                "step_id": sid,
                                "attempt": rec.attempts,
                                "error": "interrupted",
                            }
                        )
                        state.status[sid] = "Failed"
                    elif rec.status == "Pending":
                        journal.append(
                            {
                                "event": "step_skipped",
                                "at": now,
                                "step_id": sid,
                                "reason": "interrupted",
                            }
                        )
                        state.status[sid] = "Skipped"
                journal.append(
                    {"event": "run_finished", "at": now, "status": "Failed", "error": "interrupted"}
                )
            self._runs[snapshot.id] = state
