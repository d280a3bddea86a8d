"""Service operations over the pydantic models.

These functions are the single implementation behind both the FastAPI
routes and the command-line client; errors surface as ValueError
(bad request) so each front end can map them to its own convention.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional

import numpy as np

from .. import catalog as catalog_mod
from ..curves import (CurveTrajectory, curve_from_samples, evolve,
                      fit_self_similar, mkdv_residual, moments,
                      self_similar_residual)
from ..expr import Expr, ExprError
from ..numeval import evaluate
from ..parser import ParamTable, parse
from ..pde import integrate, monitor
from ..search import (SearchOptions, classify_type, solve_densities,
                      weight_sequence_probe)
from ..structure import EvolutionEq, structural_report, validate_equation
from .schemas import (AnsatzSpec, CatalogRunRequest, CatalogRunResponse,
                      ClassifyRequest, ClassifyResponse, CurveFlowRequest,
                      CurveFlowResponse, EquationSpec, LawModel, MomentsRow,
                      ProbeRequest, ProbeResponse, SearchRequest,
                      SearchResponse, SelfSimilarRequest, SelfSimilarResponse,
                      TypeRequest, VerifyRequest, VerifyResponse)


class RequestError(ValueError):
    """Invalid request content (maps to HTTP 422 / CLI usage error)."""


def _build_equation(spec: EquationSpec) -> EvolutionEq:
    table = ParamTable()
    for name, value in spec.params.items():
        table.register(name, None if value is None else Fraction(value))
    try:
        eq = validate_equation(parse(spec.f, table), parse(spec.g, table), table)
    except ExprError as exc:
        raise RequestError(str(exc))
    return eq


def _search_options(spec: AnsatzSpec, eq: EvolutionEq) -> SearchOptions:
    atoms = None
    if spec.atoms is not None:
        try:
            atoms = [parse(a, eq.params) for a in spec.atoms]
        except ExprError as exc:
            raise RequestError(f"bad atom expression: {exc}")
    return SearchOptions(d_x=spec.d_x, d_t=spec.d_t, d_u=spec.d_u, atoms=atoms)


def classify(req: ClassifyRequest) -> ClassifyResponse:
    eq = _build_equation(req.equation)
    report = structural_report(eq.bound())
    return ClassifyResponse(equation=eq.describe(), **report.to_dict())


def _law_models(laws) -> List[LawModel]:
    return [LawModel(**law.to_dict()) for law in laws]


def search(req: SearchRequest) -> SearchResponse:
    eq = _build_equation(req.equation)
    opts = _search_options(req.ansatz, eq)
    try:
        laws = solve_densities(eq, req.m, opts)
    except ExprError as exc:
        raise RequestError(str(exc))
    ansatz_desc = {"m": req.m, "d_x": opts.d_x, "d_t": opts.d_t,
                   "d_u": opts.d_u, "atoms": req.ansatz.atoms}
    return SearchResponse(equation=eq.describe(), ansatz=ansatz_desc,
                          laws=_law_models(laws), type=None)


def classify_equation_type(req: TypeRequest) -> SearchResponse:
    eq = _build_equation(req.equation)
    opts = _search_options(req.ansatz, eq)
    try:
        triple, by_order = classify_type(eq, opts, with_weight5=req.weight5)
    except ExprError as exc:
        raise RequestError(str(exc))
    laws = [law for order in sorted(by_order) for law in by_order[order]]
    ansatz_desc = {"d_x": opts.d_x, "d_t": opts.d_t, "d_u": opts.d_u,
                   "atoms": req.ansatz.atoms}
    return SearchResponse(equation=eq.describe(), ansatz=ansatz_desc,
                          laws=_law_models(laws), type=triple.as_list())


def probe(req: ProbeRequest) -> ProbeResponse:
    eq = _build_equation(req.equation)
    opts = _search_options(req.ansatz, eq)
    try:
        result = weight_sequence_probe(eq, req.max_order, opts)
    except ExprError as exc:
        raise RequestError(str(exc))
    return ProbeResponse(equation=eq.describe(),
                         counts=[[m, n] for m, n in result["counts"]],
                         warnings=result["warnings"], note=result["note"])


def catalog_run(req: CatalogRunRequest) -> CatalogRunResponse:
    report = catalog_mod.run_regression(weight5=req.weight5, only=req.only)
    return CatalogRunResponse(passed=report.passed,
                              entries=[r.to_dict() for r in report.results],
                              table=report.table())


def catalog_entries() -> List[dict]:
    return [entry.to_dict() for entry in catalog_mod.entries()]


def verify(req: VerifyRequest) -> VerifyResponse:
    eq = _build_equation(req.equation)
    try:
        u0_expr = parse(req.u0, eq.params)
    except ExprError as exc:
        raise RequestError(f"bad initial profile: {exc}")
    if u0_expr.jet_order() >= 0 or u0_expr.depends_on("t"):
        raise RequestError("initial profile must be a function of x only")
    grid = np.arange(req.N) * (req.L / req.N) - req.L / 2.0
    u0 = np.broadcast_to(
        np.asarray(evaluate(eq.params.apply(u0_expr), {"x": grid}), dtype=float),
        grid.shape)
    if req.densities is not None:
        rhos = [parse(d, eq.params) for d in req.densities]
        densities = [eq.params.apply(r) for r in rhos]
    else:
        densities = []
        for m in range(req.max_density_order + 1):
            for law in solve_densities(eq, m):
                if law.order == m:
                    densities.append(law.rho)
    try:
        traj = integrate(eq, u0, req.L, req.T, req.dt, allow_x=req.allow_x,
                         record_every=req.record_every)
        drift = monitor(traj, densities)
    except ExprError as exc:
        raise RequestError(str(exc))
    passed = all(d <= req.tolerance for d in drift.drifts)
    return VerifyResponse(equation=eq.describe(),
                          densities=drift.densities,
                          times=[float(t) for t in drift.times],
                          values=[[float(v) for v in row] for row in drift.values],
                          drifts=drift.drifts, tolerance=req.tolerance,
                          passed=passed, indicative=drift.indicative)


def _curve_from_request(x_text: str, y_text: str, N: int):
    table = ParamTable({"theta": None})
    try:
        fx = parse(x_text, table)
        fy = parse(y_text, table)
    except ExprError as exc:
        raise RequestError(f"bad curve expression: {exc}")
    theta = 2.0 * np.pi * np.arange(N) / N
    try:
        xs = np.broadcast_to(np.asarray(evaluate(fx, {"theta": theta}), dtype=float),
                             theta.shape)
        ys = np.broadcast_to(np.asarray(evaluate(fy, {"theta": theta}), dtype=float),
                             theta.shape)
    except ExprError as exc:
        raise RequestError(str(exc))
    try:
        return curve_from_samples(xs, ys)
    except ExprError as exc:
        raise RequestError(str(exc))


def curveflow(req: CurveFlowRequest) -> CurveFlowResponse:
    if req.samples is not None:
        try:
            xs = np.array([row[0] for row in req.samples], dtype=float)
            ys = np.array([row[1] for row in req.samples], dtype=float)
            state = curve_from_samples(xs, ys)
        except (ExprError, IndexError, ValueError) as exc:
            raise RequestError(f"bad curve samples: {exc}")
        req = req.model_copy(update={"N": state.N})
    elif req.x is not None and req.y is not None:
        state = _curve_from_request(req.x, req.y, req.N)
    else:
        raise RequestError("provide either x/y expressions or samples")
    try:
        traj: CurveTrajectory = evolve(state, req.T, dt=req.dt,
                                       record_every=req.record_every,
                                       redistribute=req.redistribute,
                                       filter_modes=req.filter_modes)
    except ExprError as exc:
        raise RequestError(str(exc))
    rows = []
    table = []
    for s in traj.states:
        mo = moments(s)
        table.append(mo.as_tuple())
        rows.append(MomentsRow(t=s.t, length=mo.length, area=mo.area,
                               moment_x=mo.moment_x, moment_y=mo.moment_y,
                               moment_r2=mo.moment_r2))
    arr = np.array(table)
    drifts = [float(np.max(np.abs(col - col[0])) / max(abs(col[0]), 1e-8))
              for col in arr.T]
    fit = None
    if req.fit_self_similar:
        a0, a1, a2, residual = fit_self_similar(traj.states[0])
        fit = {"a0": a0, "a1": a1, "a2": a2, "residual": residual}
    mkdv = None
    if req.mkdv_check:
        mkdv = mkdv_residual(traj)
    states = [{"t": s.t, "x": [float(v) for v in s.x],
               "y": [float(v) for v in s.y]} for s in traj.states]
    return CurveFlowResponse(N=req.N, dt=traj.dt, moments=rows,
                             moment_drifts=drifts,
                             self_intersection_times=traj.self_intersection_times,
                             self_similar_fit=fit, mkdv_residual=mkdv,
                             states=states)


def self_similar(req: SelfSimilarRequest) -> SelfSimilarResponse:
    state = _curve_from_request(req.x, req.y, req.N)
    if req.fit or req.a0 is None:
        a0, a1, a2, residual = fit_self_similar(state)
        return SelfSimilarResponse(residual=residual, a0=a0, a1=a1, a2=a2,
                                   fitted=True)
    residual = self_similar_residual(state, req.a0, req.a1, req.a2)
    return SelfSimilarResponse(residual=residual, a0=req.a0, a1=req.a1,
                               a2=req.a2, fitted=False)
