"""FastAPI application exposing the toolkit as a compute service."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from . import handlers
from .schemas import (CatalogRunRequest, CatalogRunResponse, ClassifyRequest,
                      ClassifyResponse, CurveFlowRequest, CurveFlowResponse,
                      ProbeRequest, ProbeResponse, SearchRequest,
                      SearchResponse, SelfSimilarRequest, SelfSimilarResponse,
                      TypeRequest, VerifyRequest, VerifyResponse)

app = FastAPI(
    title="clawkit",
    version=__version__,
    description=("Structural classification, conservation-law search, and "
                 "numerical verification for quasilinear third-order "
                 "evolution equations u_t = f(x,u,u_x) u_xxx + g(x,u,u_x,u_xx)."),
)


def _run(func, req):
    try:
        return func(req)
    except handlers.RequestError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/classify", response_model=ClassifyResponse)
def classify(req: ClassifyRequest) -> ClassifyResponse:
    return _run(handlers.classify, req)


@app.post("/search", response_model=SearchResponse)
def search(req: SearchRequest) -> SearchResponse:
    return _run(handlers.search, req)


@app.post("/type", response_model=SearchResponse)
def classify_equation_type(req: TypeRequest) -> SearchResponse:
    return _run(handlers.classify_equation_type, req)


@app.post("/probe", response_model=ProbeResponse)
def probe(req: ProbeRequest) -> ProbeResponse:
    return _run(handlers.probe, req)


@app.get("/catalog")
def catalog() -> list:
    return handlers.catalog_entries()


@app.post("/catalog/run", response_model=CatalogRunResponse)
def catalog_run(req: CatalogRunRequest) -> CatalogRunResponse:
    return _run(handlers.catalog_run, req)


@app.post("/verify", response_model=VerifyResponse)
def verify(req: VerifyRequest) -> VerifyResponse:
    return _run(handlers.verify, req)


@app.post("/curveflow", response_model=CurveFlowResponse)
def curveflow(req: CurveFlowRequest) -> CurveFlowResponse:
    return _run(handlers.curveflow, req)


@app.post("/selfsimilar", response_model=SelfSimilarResponse)
def self_similar(req: SelfSimilarRequest) -> SelfSimilarResponse:
    return _run(handlers.self_similar, req)
