"""Pydantic request/response models for the HTTP service and CLI."""

from __future__ import annotations

from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class EquationSpec(BaseModel):
    f: str = "1"
    g: str
    params: Dict[str, Optional[str]] = Field(default_factory=dict)


class AnsatzSpec(BaseModel):
    d_x: int = 2
    d_t: int = 2
    d_u: Optional[int] = None
    atoms: Optional[List[str]] = None


class ClassifyRequest(BaseModel):
    equation: EquationSpec


class ClassifyResponse(BaseModel):
    equation: dict
    k_vanishes: bool
    n_vanishes: Optional[bool]
    g_quadratic_in_q: bool
    normal_form_detected: Optional[str]
    predicted_obstructions: List[str]


class LawModel(BaseModel):
    rho: str
    flux: str
    order: int
    weight: int


class SearchRequest(BaseModel):
    equation: EquationSpec
    m: int = 1
    ansatz: AnsatzSpec = Field(default_factory=AnsatzSpec)


class SearchResponse(BaseModel):
    equation: dict
    ansatz: dict
    laws: List[LawModel]
    type: Optional[List[int]] = None


class TypeRequest(BaseModel):
    equation: EquationSpec
    ansatz: AnsatzSpec = Field(default_factory=AnsatzSpec)
    weight5: bool = False


class ProbeRequest(BaseModel):
    equation: EquationSpec
    max_order: int = 1
    ansatz: AnsatzSpec = Field(default_factory=AnsatzSpec)


class ProbeResponse(BaseModel):
    equation: dict
    counts: List[List[int]]
    warnings: List[str]
    note: str


class CatalogRunRequest(BaseModel):
    weight5: bool = False
    only: Optional[List[str]] = None


class CatalogRunResponse(BaseModel):
    passed: bool
    entries: List[dict]
    table: str


class VerifyRequest(BaseModel):
    equation: EquationSpec
    u0: str
    L: float = 80.0
    N: int = 512
    dt: float = 1e-3
    T: float = 1.0
    densities: Optional[List[str]] = None
    max_density_order: int = 1
    tolerance: float = 1e-6
    allow_x: bool = False
    record_every: Optional[int] = None


class VerifyResponse(BaseModel):
    equation: dict
    densities: List[str]
    times: List[float]
    values: List[List[float]]
    drifts: List[float]
    tolerance: float
    passed: bool
    indicative: bool


class CurveFlowRequest(BaseModel):
    x: Optional[str] = None
    y: Optional[str] = None
    samples: Optional[List[List[float]]] = None  # [[x0, y0], [x1, y1], ...]
    N: int = 256
    T: float = 0.5
    dt: Optional[float] = None
    filter_modes: int = 42
    redistribute: bool = True
    record_every: Optional[int] = None
    fit_self_similar: bool = False
    mkdv_check: bool = False


class MomentsRow(BaseModel):
    t: float
    length: float
    area: float
    moment_x: float
    moment_y: float
    moment_r2: float


class CurveFlowResponse(BaseModel):
    N: int
    dt: float
    moments: List[MomentsRow]
    moment_drifts: List[float]
    self_intersection_times: List[float]
    self_similar_fit: Optional[dict] = None
    mkdv_residual: Optional[float] = None
    states: List[dict]


class SelfSimilarRequest(BaseModel):
    x: str
    y: str
    N: int = 256
    a0: Optional[float] = None
    a1: float = 0.0
    a2: float = 0.0
    fit: bool = False


class SelfSimilarResponse(BaseModel):
    residual: float
    a0: float
    a1: float
    a2: float
    fitted: bool
