"""Append-only run journal and the replay that derives run state from it.

The journal is the single source of truth: every status snapshot is a pure
replay of a consistent event prefix, which is what makes crash recovery a
matter of re-reading files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

RUN_TERMINAL = ("Succeeded", "Failed", "Cancelled")
STEP_TERMINAL = ("Succeeded", "Failed", "Skipped")


@dataclass
class StepRecord:
    id: str
    status: str = "Pending"
    attempts: int = 0
    started_at: str | None = None
    finished_at: str | None = None
    error_message: str | None = None
    outputs: dict[str, dict] = field(default_factory=dict)  # name -> {bucket, digest}

    def to_payload(self) -> dict:
        return {
            "id": self.id,
            "status": self.status,
            "attempts": self.attempts,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "error_message": self.error_message,
            "outputs": self.outputs,
        }


@dataclass
class RunSnapshot:
    id: str
    template: str
    version: str
    parameters: dict
    status: str
    steps: dict[str, StepRecord]
    created_at: str
    finished_at: str | None = None
    error: str | None = None

    @property
    def terminal(self) -> bool:
        return self.status in RUN_TERMINAL

    def to_payload(self) -> dict:
        return {
            "id": self.id,
            "template": self.template,
            "version": self.version,
            "parameters": self.parameters,
            "status": self.status,
            "steps": [rec.to_payload() for rec in self.steps.values()],
            "created_at": self.created_at,
            "finished_at": self.finished_at,
            "error": self.error,
        }


def replay_events(events: list[dict]) -> RunSnapshot:
    """Derive a point-in-time snapshot from an event prefix."""
    if not events or events[0]["event"] != "run_created":
        raise ValueError("journal must begin with run_created")
    head = events[0]
    steps = {s["id"]: StepRecord(id=s["id"]) for s in head["steps"]}
    snapshot = RunSnapshot(
        id=head["run_id"],
        template=head["template"],
        version=head["version"],
        parameters=head["parameters"],
        status="Pending",
        steps=steps,
        created_at=head["at"],
    )
    cancelled = False
    any_started = False
    for ev in events[1:]:
        kind = ev["event"]
        if kind == "step_started":
            rec = steps[ev["step_id"]]
            rec.status = "Running"
            rec.attempts = ev["attempt"]
            if rec.started_at is None:
                rec.started_at = ev["at"]
            any_started = True
        elif kind == "step_retrying":
            steps[ev["step_id"]].status = "Retrying"
            steps[ev["step_id"]].error_message = ev["error"]
        elif kind == "step_succeeded":
            rec = steps[ev["step_id"]]
            rec.status = "Succeeded"
            rec.finished_at = ev["at"]
            rec.outputs = ev["outputs"]
            rec.error_message = None
        elif kind == "step_failed":
            rec = steps[ev["step_id"]]
            rec.status = "Failed"
            rec.finished_at = ev["at"]
            rec.error_message = ev["error"]
        elif kind == "step_skipped":
            rec = steps[ev["step_id"]]
            rec.status = "Skipped"
            rec.finished_at = ev["at"]
            rec.error_message = ev.get("reason")
        elif kind == "run_cancelled":
            cancelled = True
        elif kind == "run_finished":
            snapshot.status = ev["status"]
            snapshot.finished_at = ev["at"]
            snapshot.error = ev.get("error")
    if snapshot.status not in RUN_TERMINAL:
        draining = any(rec.status in ("Running", "Retrying") for rec in steps.values())
        if draining:
            # cancelled runs stay Running until in-flight attempts finish
            snapshot.status = "Running"
        elif cancelled:
            snapshot.status = "Cancelled"
        elif any_started:
            snapshot.status = "Running"
    return snapshot


class JournalFile:
    """One append-only JSONL file per run; lines are flushed per append."""

    def __init__(self, path: Path):
        self.path = path
        self.events: list[dict] = []

    def append(self, event: dict) -> None:
        self.events.append(event)
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")
            fh.flush()

    @classmethod
    def load(cls, path: Path) -> "JournalFile":
        """Read events back; a torn trailing line (crash mid-append) truncates
        the journal to its last complete prefix instead of losing the run."""
        journal = cls(path)
        with path.open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    journal.events.append(json.loads(line))
                except json.JSONDecodeError:
                    break
        return journal
