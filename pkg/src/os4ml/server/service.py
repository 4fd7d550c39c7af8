"""Single-process composition of the platform's service boundaries.

The object store, workflow engine, and domain-record service stay behind
internal APIs so a future multi-process split keeps the same interfaces.
Solution status is never stored: it is derived from the run journal on
every read.
"""

from __future__ import annotations

import json
import uuid
from importlib import resources
from pathlib import Path

from ..engine.model import deserialize
from ..engine.training import predict as model_predict
from ..errors import ConflictError, InvalidStateError, NotFoundError, PredictError
from ..ingest import Databag, Table, build_databag
from ..mlconfig import generate_config
from ..objectstore import ObjectStore, utc_now_iso
from ..settings import PlatformConfig
from ..workflow import WorkflowEngine, make_builtin_ops, train_model_template
from .records import DocumentStore

DEMO_DATABAG_NAME = "demo-petfinder"


class PlatformServices:
    def __init__(self, config: PlatformConfig):
        self.config = config
        self.store = ObjectStore(config.object_store_root)
        data_dir = Path(config.data_dir)
        self.databags = DocumentStore(data_dir / "databags")
        self.solutions = DocumentStore(data_dir / "solutions")
        self.engine = WorkflowEngine(
            self.store, data_dir / "runs", workers=config.engine_workers
        )
        for name, fn in make_builtin_ops(self.get_databag, self.store).items():
            self.engine.register_op(name, fn)
        self.train_template = train_model_template()

    def close(self) -> None:
        self.engine.close()

    # --- databags ------------------------------------------------------------

    def create_databag(self, name: str, data: bytes) -> dict:
        databag = build_databag(name, data, self.store)
        payload = databag.to_payload()
        self.databags.put(databag.id, payload)
        return payload

    def get_databag(self, databag_id: str) -> Databag:
        return Databag.from_payload(self.databags.get(databag_id))

    def list_databags(self) -> list[dict]:
        return self.databags.list()

    def delete_databag(self, databag_id: str) -> None:
        record = self.databags.get(databag_id)
        referencing = [
            s["id"] for s in self.solutions.list() if s["databag_id"] == databag_id
        ]
        if referencing:
            raise ConflictError(
                f"databag {databag_id} is referenced by solution(s) {referencing}"
            )
        self.databags.delete(databag_id)
        digest = record["raw_artifact"]
        still_used = any(
            bag["raw_artifact"] == digest for bag in self.databags.list()
        )
        if not still_used and self.store.exists("datasets", digest):
            self.store.delete("datasets", digest)

    # --- solutions -------------------------------------------------------------

    def create_solution(
        self,
        name: str,
        databag_id: str,
        target: str,
        overrides: dict | None = None,
        trials: int | None = None,
    ) -> dict:
        databag = self.get_databag(databag_id)
        generate_config(databag, target, overrides)  # surfaces 422-class errors now
        run = self.engine.submit(
            self.train_template,
            {
                "databag_id": databag_id,
                "target": target,
                "overrides": overrides or {},
                "trials": trials,
            },
        )
        record = {
            "id": uuid.uuid4().hex,
            "name": name or f"solution-{target}",
            "databag_id": databag_id,
            "target": target,
            "run_id": run.id,
            "created_at": utc_now_iso(),
        }
        self.solutions.put(record["id"], record)
        return self.solution_view(record)

    def list_solutions(self) -> list[dict]:
        return [self.solution_view(record) for record in self.solutions.list()]

    def solution_view(self, record: dict) -> dict:
        """Project the solution record through its run journal."""
        snapshot = self.engine.run_status(record["run_id"])
        view = {
            "id": record["id"],
            "name": record["name"],
            "databag_id": record["databag_id"],
            "target": record["target"],
            "run_id": record["run_id"],
            "created_at": record["created_at"],
            "status": snapshot.status,
            "error": snapshot.error,
            "steps": [rec.to_payload() for rec in snapshot.steps.values()],
            "config": None,
            "best_model": None,
            "metrics": None,
        }
        config_step = snapshot.steps.get("generate-config")
        if config_step and config_step.status == "Succeeded":
            ref = config_step.outputs["config"]
            view["config"] = self.store.get(ref["bucket"], ref["digest"]).decode("utf-8")
        if snapshot.status == "Succeeded":
            view["best_model"] = snapshot.steps["store-model"].outputs["model"]["digest"]
            metrics_ref = snapshot.steps["evaluate"].outputs["metrics"]
            view["metrics"] = json.loads(
                self.store.get(metrics_ref["bucket"], metrics_ref["digest"])
            )
        return view

    def get_solution(self, solution_id: str) -> dict:
        return self.solution_view(self.solutions.get(solution_id))

    def solution_model_bytes(self, solution_id: str) -> tuple[bytes, str]:
        view = self.get_solution(solution_id)
        if view["status"] != "Succeeded":
            raise InvalidStateError(
                f"solution {solution_id} is {view['status']}, not Succeeded"
            )
        digest = view["best_model"]
        return self.store.get("models", digest), digest

    def predict(self, solution_id: str, rows: list[dict]) -> dict:
        data, _ = self.solution_model_bytes(solution_id)
        model = deserialize(data)
        if not rows:
            raise PredictError("no rows given")
        required = [f.name for f in model.config.input_features]
        for name in required:
            if any(name not in row for row in rows):
                raise PredictError(f"missing input column(s): ['{name}']")
        columns = {
            name: [_cell(row[name]) for row in rows] for name in required
        }
        preds = model_predict(model, Table(columns, len(rows)))
        paired = []
        for i, row in enumerate(rows):
            entry = {
                "row": row,
                "prediction": preds.values[i],
                "probabilities": preds.probabilities[i] if preds.probabilities else None,
            }
            paired.append(entry)
        return {"predictions": paired}

    # --- runs ---------------------------------------------------------------------

    def get_run(self, run_id: str) -> dict:
        return self.engine.run_status(run_id).to_payload()

    # --- demo data -------------------------------------------------------------------

    def load_demo(self) -> dict:
        """Idempotently ingest the bundled pet-adoption demo dataset."""
        for bag in self.databags.list():
            if bag["name"] == DEMO_DATABAG_NAME:
                return bag
        data = resources.files("os4ml.data").joinpath("demo_petfinder.csv").read_bytes()
        return self.create_databag(DEMO_DATABAG_NAME, data)


def _cell(value) -> str | None:
    if value is None:
        return None
    if isinstance(value, bool):
        return "true" if value else "false"
    text = str(value).strip()
    return text if text else None
