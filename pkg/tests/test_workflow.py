import json
import threading
import time

import pytest

from os4ml.errors import (
    BindingError,
    ConflictError,
    CycleError,
    InvalidStateError,
    NotFoundError,
    TemplateValidationError,
)
from os4ml.objectstore import ObjectStore
from os4ml.workflow import (
    REQUIRED,
    RetrySpec,
    StepOutput,
    StepSpec,
    WorkflowEngine,
    WorkflowTemplate,
    parse_template,
    render_template,
    validate_template,
)

NO_BACKOFF = RetrySpec(max_retries=2, backoff_base_ms=0)


@pytest.fixture()
def engine(tmp_path):
    store = ObjectStore(tmp_path / "objectstore")
    eng = WorkflowEngine(store, tmp_path / "runs", workers=4)
    yield eng
    eng.close()


def simple_template(steps, parameters=None, name="t"):
    return WorkflowTemplate(name=name, version="1", parameters=parameters or {}, steps=steps)


def ok_op(params, inputs):
    return {}


# --- validate_template ------------------------------------------------------

def test_validate_chain_ok(engine):
    engine.register_op("noop", ok_op)
    template = simple_template(
        [
            StepSpec("a", "noop"),
            StepSpec("b", "noop", depends_on=("a",)),
            StepSpec("c", "noop", depends_on=("b",)),
        ]
    )
    assert engine.validate_template(template) is template


def test_validate_cycle_names_it():
    template = simple_template(
        [StepSpec("a", "noop", depends_on=("b",)), StepSpec("b", "noop", depends_on=("a",))]
    )
    with pytest.raises(CycleError) as exc:
        validate_template(template)
    assert set(exc.value.cycle) == {"a", "b"}


def test_validate_unknown_parameter_placeholder():
    template = simple_template([StepSpec("a", "noop", params={"x": "${nope}"})])
    with pytest.raises(TemplateValidationError) as exc:
        validate_template(template)
    assert "nope" in str(exc.value)


def test_validate_unknown_dependency():
    template = simple_template([StepSpec("a", "noop", depends_on=("ghost",))])
    with pytest.raises(TemplateValidationError) as exc:
        validate_template(template)
    assert "ghost" in str(exc.value)


def test_validate_unregistered_op(engine):
    template = simple_template([StepSpec("a", "never-registered")])
    with pytest.raises(TemplateValidationError) as exc:
        engine.validate_template(template)
    assert "never-registered" in str(exc.value)


def test_validate_input_must_reference_upstream_output():
    template = simple_template(
        [
            StepSpec("a", "noop", outputs=("out",)),
            StepSpec("b", "noop", depends_on=("a",), inputs={"x": "a.missing"}),
        ]
    )
    with pytest.raises(TemplateValidationError) as exc:
        validate_template(template)
    assert "a.missing" in str(exc.value)


def test_validate_input_from_non_ancestor():
    template = simple_template(
        [
            StepSpec("a", "noop", outputs=("out",)),
            StepSpec("b", "noop", inputs={"x": "a.out"}),  # no depends_on
        ]
    )
    with pytest.raises(TemplateValidationError):
        validate_template(template)


def test_template_document_round_trip():
    template = simple_template(
        [
            StepSpec("a", "noop", params={"k": "${p}"}, outputs=("o",)),
            StepSpec("b", "noop", depends_on=("a",), inputs={"x": "a.o"}, retry=NO_BACKOFF),
        ],
        parameters={"p": REQUIRED, "q": 5},
    )
    parsed = parse_template(render_template(template))
    assert parsed.name == template.name
    assert parsed.parameters == {"p": REQUIRED, "q": 5}
    assert [s.to_payload() for s in parsed.steps] == [s.to_payload() for s in template.steps]


# --- register_op -------------------------------------------------------------

def test_register_duplicate_conflict(engine):
    engine.register_op("x", ok_op)
    with pytest.raises(ConflictError):
        engine.register_op("x", ok_op)


# --- submit / binding ---------------------------------------------------------

def test_submit_missing_parameter(engine):
    engine.register_op("noop", ok_op)
    template = simple_template(
        [StepSpec("a", "noop", params={"t": "${target}"})],
        parameters={"target": REQUIRED},
    )
    with pytest.raises(BindingError) as exc:
        engine.submit(template, {})
    assert "target" in str(exc.value)


def test_submit_unknown_extra_parameter(engine):
    engine.register_op("noop", ok_op)
    template = simple_template([StepSpec("a", "noop")])
    with pytest.raises(BindingError):
        engine.submit(template, {"surprise": 1})


def test_submit_defaults_only(engine):
    engine.register_op("noop", ok_op)
    template = simple_template(
        [StepSpec("a", "noop", params={"n": "${n}"})], parameters={"n": 3}
    )
    run = engine.submit(template, {})
    snapshot = engine.wait(run.id)
    assert snapshot.status == "Succeeded"
    assert snapshot.parameters == {"n": 3}


# --- execution, retries, artifacts ---------------------------------------------

def test_retry_succeeds_on_third_attempt(engine):
    calls = {"n": 0}
    lock = threading.Lock()

    def flaky(params, inputs):
        with lock:
            calls["n"] += 1
            if calls["n"] <= 2:
                raise RuntimeError("transient")
        return {}

    engine.register_op("flaky", flaky)
    template = simple_template([StepSpec("a", "flaky", retry=NO_BACKOFF)])
    run = engine.submit(template, {})
    snapshot = engine.wait(run.id)
    assert snapshot.status == "Succeeded"
    assert snapshot.steps["a"].status == "Succeeded"
    assert snapshot.steps["a"].attempts == 3


def test_always_failing_marks_run_failed_and_skips_dependents(engine):
    def boom(params, inputs):
        raise RuntimeError("kaput")

    engine.register_op("boom", boom)
    engine.register_op("noop", ok_op)
    template = simple_template(
        [
            StepSpec("a", "boom", retry=NO_BACKOFF),
            StepSpec("b", "noop", depends_on=("a",)),
            StepSpec("c", "noop", depends_on=("b",)),
        ]
    )
    run = engine.submit(template, {})
    snapshot = engine.wait(run.id)
    assert snapshot.status == "Failed"
    assert snapshot.steps["a"].status == "Failed"
    assert snapshot.steps["a"].attempts == 3
    assert "kaput" in snapshot.steps["a"].error_message
    assert snapshot.steps["b"].status == "Skipped"
    assert snapshot.steps["c"].status == "Skipped"


def test_artifact_passing_by_digest(engine, tmp_path):
    def producer(params, inputs):
        return {"greeting": StepOutput(b"hello downstream", media_type="text/plain")}

    received = {}

    def consumer(params, inputs):
        received.update(inputs)
        return {}

    engine.register_op("producer", producer)
    engine.register_op("consumer", consumer)
    template = simple_template(
        [
            StepSpec("p", "producer", outputs=("greeting",)),
            StepSpec("c", "consumer", depends_on=("p",), inputs={"msg": "p.greeting"}),
        ]
    )
    run = engine.submit(template, {})
    snapshot = engine.wait(run.id)
    assert snapshot.status == "Succeeded"
    assert received["msg"] == b"hello downstream"
    digest = snapshot.steps["p"].outputs["greeting"]["digest"]
    assert engine.store.get("artifacts", digest) == b"hello downstream"


def test_step_with_no_outputs_has_empty_artifact_map(engine):
    engine.register_op("noop", ok_op)
    run = engine.submit(simple_template([StepSpec("only", "noop")]), {})
    snapshot = engine.wait(run.id)
    assert snapshot.steps["only"].outputs == {}


def test_missing_declared_output_fails_step(engine):
    engine.register_op("liar", lambda p, i: {})
    template = simple_template(
        [StepSpec("a", "liar", outputs=("promised",), retry=RetrySpec(0, 0))]
    )
    snapshot = engine.wait(engine.submit(template, {}).id)
    assert snapshot.steps["a"].status == "Failed"
    assert "promised" in snapshot.steps["a"].error_message


def test_parameter_substitution_preserves_types(engine):
    seen = {}

    def probe(params, inputs):
        seen.update(params)
        return {}

    engine.register_op("probe", probe)
    template = simple_template(
        [
            StepSpec(
                "a",
                "probe",
                params={"raw": "${obj}", "text": "value=${n}", "n": "${n}"},
            )
        ],
        parameters={"obj": REQUIRED, "n": REQUIRED},
    )
    run = engine.submit(template, {"obj": {"nested": [1, 2]}, "n": 7})
    engine.wait(run.id)
    assert seen["raw"] == {"nested": [1, 2]}
    assert seen["text"] == "value=7"
    assert seen["n"] == 7


# --- run_status / cancel ---------------------------------------------------------

def test_run_status_unknown_id(engine):
    with pytest.raises(NotFoundError):
        engine.run_status("nope")


def test_run_status_after_submit_pending_or_running(engine):
    gate = threading.Event()

    def waiter(params, inputs):
        gate.wait(5)
        return {}

    engine.register_op("waiter", waiter)
    run = engine.submit(simple_template([StepSpec("w", "waiter")]), {})
    snapshot = engine.run_status(run.id)
    assert snapshot.status in ("Pending", "Running")
    gate.set()
    assert engine.wait(run.id).status == "Succeeded"
    assert engine.run_status(run.id).finished_at is not None


def test_cancel_pending_run_skips_all_steps(tmp_path):
    store = ObjectStore(tmp_path / "objectstore")
    engine = WorkflowEngine(store, tmp_path / "runs", workers=1)
    try:
        gate = threading.Event()

        def block(params, inputs):
            gate.wait(5)
            return {}

        engine.register_op("block", block)
        engine.register_op("noop", ok_op)
        # saturate the single worker so run B stays Pending
        run_a = engine.submit(simple_template([StepSpec("hold", "block")], name="holder"), {})
        run_b = engine.submit(
            simple_template([StepSpec("x", "noop"), StepSpec("y", "noop", depends_on=("x",))]),
            {},
        )
        time.sleep(0.05)
        assert engine.run_status(run_b.id).status == "Pending"
        engine.cancel(run_b.id)
        gate.set()
        snapshot = engine.wait(run_b.id)
        assert snapshot.status == "Cancelled"
        assert all(rec.status == "Skipped" for rec in snapshot.steps.values())
        assert engine.wait(run_a.id).status == "Succeeded"
    finally:
        engine.close()


def test_cancel_terminal_run_invalid_state(engine):
    engine.register_op("noop", ok_op)
    run = engine.submit(simple_template([StepSpec("a", "noop")]), {})
    engine.wait(run.id)
    with pytest.raises(InvalidStateError):
        engine.cancel(run.id)


def test_cancel_mid_run_no_new_steps_after_cancel(engine):
    gate = threading.Event()

    def slow(params, inputs):
        gate.wait(5)
        return {}

    engine.register_op("slow", slow)
    engine.register_op("noop", ok_op)
    template = simple_template(
        [StepSpec("first", "slow"), StepSpec("second", "noop", depends_on=("first",))]
    )
    run = engine.submit(template, {})
    while engine.run_status(run.id).steps["first"].status != "Running":
        time.sleep(0.01)
    engine.cancel(run.id)
    gate.set()
    snapshot = engine.wait(run.id)
    assert snapshot.status == "Cancelled"
    assert snapshot.steps["first"].status == "Succeeded"  # finished its attempt
    assert snapshot.steps["second"].status == "Skipped"

    # journal-order check: no step_started after run_cancelled
    events = engine._runs[run.id].journal.events
    cancel_idx = next(i for i, e in enumerate(events) if e["event"] == "run_cancelled")
    assert all(e["event"] != "step_started" for e in events[cancel_idx:])


# --- journal topology invariants --------------------------------------------------

def test_topological_safety_in_journal(engine):
    engine.register_op("noop", ok_op)
    template = simple_template(
        [
            StepSpec("a", "noop"),
            StepSpec("b", "noop", depends_on=("a",)),
            StepSpec("c", "noop", depends_on=("a",)),
            StepSpec("d", "noop", depends_on=("b", "c")),
        ]
    )
    run = engine.submit(template, {})
    engine.wait(run.id)
    events = engine._runs[run.id].journal.events
    success_at = {
        e["step_id"]: i for i, e in enumerate(events) if e["event"] == "step_succeeded"
    }
    first_start = {}
    for i, e in enumerate(events):
        if e["event"] == "step_started" and e["step_id"] not in first_start:
            first_start[e["step_id"]] = i
    deps = {s.id: s.depends_on for s in template.steps}
    for sid, dep_ids in deps.items():
        for dep in dep_ids:
            assert first_start[sid] > success_at[dep]


def test_parallel_soundness_worker_limit(tmp_path):
    store = ObjectStore(tmp_path / "objectstore")
    workers = 2
    engine = WorkflowEngine(store, tmp_path / "runs", workers=workers)
    try:
        def nap(params, inputs):
            time.sleep(0.05)
            return {}

        engine.register_op("nap", nap)
        template = simple_template([StepSpec(f"s{i}", "nap") for i in range(6)])
        run = engine.submit(template, {})
        engine.wait(run.id, timeout=10)
        events = engine._runs[run.id].journal.events
        running = 0
        peak = 0
        for e in events:
            if e["event"] == "step_started":
                running += 1
                peak = max(peak, running)
            elif e["event"] in ("step_succeeded", "step_failed", "step_retrying"):
                running -= 1
        assert peak <= workers
    finally:
        engine.close()


# --- crash recovery -----------------------------------------------------------------

def test_recovery_marks_interrupted(tmp_path):
    store = ObjectStore(tmp_path / "objectstore")
    runs_dir = tmp_path / "runs"
    runs_dir.mkdir()
    # a journal mid-flight: one step running, one pending, then the process died
    events = [
        {
            "event": "run_created",
            "at": "2026-08-09T00:00:00+00:00",
            "run_id": "deadbeef",
            "template": "t",
            "version": "1",
            "parameters": {},
            "steps": [
                {"id": "a", "op": "noop", "params": {}, "depends_on": [], "inputs": {},
                 "outputs": [], "retry": {"max_retries": 2, "backoff_base_ms": 0}},
                {"id": "b", "op": "noop", "params": {}, "depends_on": ["a"], "inputs": {},
                 "outputs": [], "retry": {"max_retries": 2, "backoff_base_ms": 0}},
            ],
        },
        {"event": "step_started", "at": "2026-08-09T00:00:01+00:00", "step_id": "a", "attempt": 1},
    ]
    with (runs_dir / "deadbeef.jsonl").open("w") as fh:
        for e in events:
            fh.write(json.dumps(e) + "\n")

    engine = WorkflowEngine(store, runs_dir, workers=2)
    try:
        snapshot = engine.run_status("deadbeef")
        assert snapshot.status == "Failed"
        assert snapshot.error == "interrupted"
        assert snapshot.steps["a"].status == "Failed"
        assert snapshot.steps["a"].error_message == "interrupted"
        assert snapshot.steps["b"].status == "Skipped"
    finally:
        engine.close()


def test_recovery_preserves_completed_runs(tmp_path):
    store = ObjectStore(tmp_path / "objectstore")
    engine = WorkflowEngine(store, tmp_path / "runs", workers=2)
    engine.register_op("noop", ok_op)
    run = engine.submit(simple_template([StepSpec("a", "noop")]), {})
    before = engine.wait(run.id).to_payload()
    engine.close()

    engine2 = WorkflowEngine(store, tmp_path / "runs", workers=2)
    try:
        after = engine2.run_status(run.id).to_payload()
        assert after == before
    finally:
        engine2.close()


def test_recovery_survives_torn_trailing_line(tmp_path):
    store = ObjectStore(tmp_path / "objectstore")
    runs_dir = tmp_path / "runs"
    runs_dir.mkdir()
    head = {
        "event": "run_created",
        "at": "2026-08-09T00:00:00+00:00",
        "run_id": "torn",
        "template": "t",
        "version": "1",
        "parameters": {},
        "steps": [
            {"id": "a", "op": "noop", "params": {}, "depends_on": [], "inputs": {},
             "outputs": [], "retry": {"max_retries": 0, "backoff_base_ms": 0}},
        ],
    }
    with (runs_dir / "torn.jsonl").open("w") as fh:
        fh.write(json.dumps(head) + "\n")
        fh.write('{"event": "step_started", "at": "2026-08-09T00:0')  # crash mid-append

    engine = WorkflowEngine(store, runs_dir, workers=2)
    try:
        snapshot = engine.run_status("torn")
        assert snapshot.status == "Failed"
        assert snapshot.error == "interrupted"
        assert snapshot.steps["a"].status == "Skipped"  # torn start never counted
    finally:
        engine.close()


def test_recovery_is_idempotent_no_duplicate_records(tmp_path):
    store = ObjectStore(tmp_path / "objectstore")
    engine = WorkflowEngine(store, tmp_path / "runs", workers=2)
    engine.register_op("noop", ok_op)
    run = engine.submit(simple_template([StepSpec("a", "noop")]), {})
    engine.wait(run.id)
    engine.close()

    for _ in range(2):
        engine = WorkflowEngine(store, tmp_path / "runs", workers=2)
        engine.close()
    final = WorkflowEngine(store, tmp_path / "runs", workers=2)
    try:
        events = final._runs[run.id].journal.events
        assert sum(1 for e in events if e["event"] == "step_started") == 1
        assert sum(1 for e in events if e["event"] == "run_finished") == 1
    finally:
        final.close()
