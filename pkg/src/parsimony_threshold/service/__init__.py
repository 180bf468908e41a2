"""HTTP service wrapping the library.

`create_app()` builds a FastAPI application whose endpoints mirror the
CLI subcommands one-to-one; the CLI is a thin client of this app (run
in-process by default, or remotely via ``serve`` + ``--server``).

Error mapping: domain validation errors (bad ranges, non-covering or
non-minimal cutsets, malformed specs) become 422; resource-limit
rejections become 413; numeric-sanity violations become 500.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..errors import HarnessError, NumericsError, ResourceLimitError, ValidationError
from .routes import router

_STATUS = (
    (ResourceLimitError, 413),
    (ValidationError, 422),
    (NumericsError, 500),
    (HarnessError, 422),
)


def _status_for(exc: HarnessError) -> int:
    for klass, code in _STATUS:
        if isinstance(exc, klass):
            return code
    return 422


def create_app() -> FastAPI:
    app = FastAPI(title="parsimony-threshold", docs_url=None, redoc_url=None)
    app.include_router(router)

    @app.exception_handler(HarnessError)
    async def _harness_error(request: Request, exc: HarnessError) -> JSONResponse:
        return JSONResponse(
            status_code=_status_for(exc),
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    return app


__all__ = ["create_app"]
