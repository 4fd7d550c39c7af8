"""HTTP/1.1 JSON REST gateway under /api/v1, bearer-token protected.

Every error body is ``{code, message, details}``. /healthz (root and under
/api/v1) is the only unauthenticated surface; the static UI bundle, when
present, is served at ``/``.
"""

from __future__ import annotations

import hmac
from importlib import resources
from pathlib import Path

from fastapi import Depends, FastAPI, File, Form, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import FileResponse, JSONResponse, Response
from pydantic import BaseModel

from .. import __version__
from ..errors import PlatformError
from .service import PlatformServices

STATUS_BY_CODE = {
    "not-found": 404,
    "conflict": 409,
    "invalid-state": 409,
    "validation-error": 422,
    "unsupported-target": 422,
    "predict-error": 422,
    "binding-error": 422,
    "encoding-error": 400,
    "shape-error": 400,
    "schema-error": 400,
    "empty-dataset": 400,
    "undetectable-column": 400,
    "ingestion-error": 400,
    "parse-error": 400,
    "strict-mode": 400,
}


def error_body(code: str, message: str, details: list | None = None) -> dict:
    return {"code": code, "message": message, "details": details or []}


class CreateSolution(BaseModel):
    databag_id: str
    target: str
    name: str = ""
    overrides: dict = {}
    trials: int | None = None


class PredictRequest(BaseModel):
    rows: list[dict]


def create_app(services: PlatformServices | None = None) -> FastAPI:
    app = FastAPI(title="os4ml", version=__version__, docs_url=None, redoc_url=None)
    app.state.services = services

    @app.exception_handler(PlatformError)
    async def platform_error_handler(request: Request, exc: PlatformError):
        status = STATUS_BY_CODE.get(exc.code, 500)
        return JSONResponse(
            status_code=status, content=error_body(exc.code, exc.message, exc.details)
        )

    @app.exception_handler(RequestValidationError)
    async def request_validation_handler(request: Request, exc: RequestValidationError):
        details = [
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()
        ]
        return JSONResponse(
            status_code=422,
            content=error_body("invalid-request", "request body or form is invalid", details),
        )

    def svc() -> PlatformServices:
        return app.state.services

    async def require_auth(request: Request) -> None:
        services = svc()
        header = request.headers.get("authorization", "")
        expected = f"Bearer {services.config.auth_token}" if services else ""
        if not services or not header or not hmac.compare_digest(header, expected):
            raise _Unauthorized()

    class _Unauthorized(Exception):
        pass

    @app.exception_handler(_Unauthorized)
    async def unauthorized_handler(request: Request, exc: _Unauthorized):
        return JSONResponse(
            status_code=401,
            content=error_body("unauthorized", "missing or invalid bearer token"),
            headers={"WWW-Authenticate": "Bearer"},
        )

    # --- health -----------------------------------------------------------------

    async def healthz():
        if svc() is None:
            return JSONResponse(
                status_code=503, content={"status": "starting", "version": __version__}
            )
        return {"status": "ok", "version": __version__}

    app.get("/healthz")(healthz)
    app.get("/api/v1/healthz")(healthz)

    # --- databags ------------------------------------------------------------------

    @app.post("/api/v1/databags", status_code=201, dependencies=[Depends(require_auth)])
    async def create_databag(name: str = Form(...), file: UploadFile = File(...)):
        data = await file.read()
        limit = svc().config.max_upload_mb * 1024 * 1024
        if len(data) > limit:
            return JSONResponse(
                status_code=413,
                content=error_body(
                    "oversize", f"upload exceeds {svc().config.max_upload_mb} MB limit"
                ),
            )
        return svc().create_databag(name, data)

    @app.get("/api/v1/databags", dependencies=[Depends(require_auth)])
    async def list_databags():
        return svc().list_databags()

    @app.get("/api/v1/databags/{databag_id}", dependencies=[Depends(require_auth)])
    async def get_databag(databag_id: str):
        return svc().databags.get(databag_id)

    @app.delete(
        "/api/v1/databags/{databag_id}",
        status_code=204,
        dependencies=[Depends(require_auth)],
    )
    async def delete_databag(databag_id: str):
        svc().delete_databag(databag_id)
        return Response(status_code=204)

    # --- solutions --------------------------------------------------------------------

    @app.post("/api/v1/solutions", status_code=202, dependencies=[Depends(require_auth)])
    async def create_solution(body: CreateSolution):
        return svc().create_solution(
            body.name, body.databag_id, body.target, body.overrides, body.trials
        )

    @app.get("/api/v1/solutions", dependencies=[Depends(require_auth)])
    async def list_solutions():
        return svc().list_solutions()

    @app.get("/api/v1/solutions/{solution_id}", dependencies=[Depends(require_auth)])
    async def get_solution(solution_id: str):
        return svc().get_solution(solution_id)

    @app.get(
        "/api/v1/solutions/{solution_id}/model", dependencies=[Depends(require_auth)]
    )
    async def download_model(solution_id: str):
        data, digest = svc().solution_model_bytes(solution_id)
        return Response(
            content=data,
            media_type="application/os4ml-model",
            headers={"X-Content-Digest": f"sha256:{digest}"},
        )

    @app.post(
        "/api/v1/solutions/{solution_id}/predict", dependencies=[Depends(require_auth)]
    )
    async def predict(solution_id: str, body: PredictRequest):
        return svc().predict(solution_id, body.rows)

    # --- runs ------------------------------------------------------------------------

    @app.get("/api/v1/runs/{run_id}", dependencies=[Depends(require_auth)])
    async def get_run(run_id: str):
        return svc().get_run(run_id)

    # --- static UI ---------------------------------------------------------------------

    static_dir = _static_dir()

    @app.get("/", include_in_schema=False)
    async def index():
        if static_dir is not None and (static_dir / "index.html").exists():
            return FileResponse(static_dir / "index.html")
        return Response(
            content="<html><body><h1>os4ml</h1><p>API at /api/v1</p></body></html>",
            media_type="text/html",
        )

    @app.get("/ui/{asset_path:path}", include_in_schema=False)
    async def ui_asset(asset_path: str):
        if static_dir is None:
            return Response(status_code=404)
        target = (static_dir / asset_path).resolve()
        if not str(target).startswith(str(static_dir.resolve())) or not target.is_file():
            return Response(status_code=404)
        return FileResponse(target)

    return app


def _static_dir() -> Path | None:
    try:
        candidate = Path(str(resources.files("os4ml").joinpath("static")))
    except (ModuleNotFoundError, TypeError):
        return None
    return candidate if candidate.is_dir() else None
