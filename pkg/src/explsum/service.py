"""Read-only HTTP service over a summary artifact.

Every response is a pure function of the loaded artifact and the request
body, serialized canonically, so replays are byte-identical. Subset
extraction needs the source matrix; without one the endpoint answers 501.
"""

from __future__ import annotations

import logging

from fastapi import FastAPI, Request, Response

from .errors import ConfigError, NotFoundError
from .formats import dumps_canonical
from .matrix import ExplanationMatrix
from .summary import (
    FilterSpec,
    SummaryArtifact,
    apply_filter,
    extract_subset,
    serialize_subset,
    serialize_summary,
    serialize_view,
)

log = logging.getLogger("explsum")


def _json_response(text: str, status: int = 200) -> Response:
    return Response(content=text, status_code=status, media_type="application/json")


def _error(status: int, message: str, offenders=None) -> Response:
    body = {"error": message}
    if offenders:
        body["offenders"] = list(offenders)
    return _json_response(dumps_canonical(body), status)


def create_app(
    artifact: SummaryArtifact, matrix: ExplanationMatrix | None = None
) -> FastAPI:
    app = FastAPI(title="explanation summary service", docs_url=None, redoc_url=None)
    summary_text = serialize_summary(artifact)

    @app.get("/health")
    async def health() -> Response:
        return _json_response(
            dumps_canonical(
                {"status": "ok", "subset_enabled": matrix is not None}
            )
        )

    @app.get("/summary")
    async def summary() -> Response:
        return _json_response(summary_text)

    @app.post("/filter")
    async def filter_endpoint(request: Request) -> Response:
        try:
            body = await request.json()
        except Exception:
            return _error(400, "request body is not valid JSON")
        if body is None:
            body = {}
        try:
            spec = FilterSpec.from_document(body)
        except ConfigError as err:
            return _error(400, str(err))
        try:
            view = apply_filter(artifact, spec)
        except NotFoundError as err:
            return _error(422, str(err), err.offenders)
        return _json_response(serialize_view(view))

    @app.post("/subset")
    async def subset_endpoint(request: Request) -> Response:
        if matrix is None:
            return _error(
                501, "subset extraction needs the service started with a matrix"
            )
        try:
            body = await request.json()
        except Exception:
            return _error(400, "request body is not valid JSON")
        if not isinstance(body, dict) or "row_cluster" not in body:
            return _error(400, "body must carry row_cluster")
        row_cluster = body.get("row_cluster")
        col_cluster = body.get("col_cluster")
        threshold = body.get("threshold", 0.0)
        if not isinstance(row_cluster, int) or isinstance(row_cluster, bool):
            return _error(400, "row_cluster must be an integer")
        if col_cluster is not None and (
            not isinstance(col_cluster, int) or isinstance(col_cluster, bool)
        ):
            return _error(400, "col_cluster must be an integer or null")
        if not isinstance(threshold, (int, float)) or isinstance(threshold, bool):
            return _error(400, "threshold must be a number")
        try:
            subset = extract_subset(
                artifact, matrix, row_cluster, col_cluster, float(threshold)
            )
        except NotFoundError as err:
            return _error(404, str(err))
        return _json_response(serialize_subset(subset))

    return app
