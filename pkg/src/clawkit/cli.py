"""Command-line front end.

Every subcommand builds the same request models the HTTP service accepts
and either executes them in process or, with --server, posts them to a
running service; the rendering and exit-code logic is identical either
way.  Exit codes: 0 success, 1 usage/configuration error, 2 mathematical
failure (regression mismatch, drift above tolerance).

A JSON config file (--config) supplies defaults for any flag, overridden
by explicit flags.  The environment variable CLAWKIT_JET_CAP overrides
the jet-order cap of the symbolic engine.
"""

from __future__ import annotations

import csv
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

import click

from .expr import ExprError
from .service import handlers
from .service.schemas import (AnsatzSpec, CatalogRunRequest, ClassifyRequest,
                              CurveFlowRequest, EquationSpec, ProbeRequest,
                              SearchRequest, SelfSimilarRequest, TypeRequest,
                              VerifyRequest)


class MathFailure(Exception):
    """A computation ran but its result violates the requested check."""


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def _parse_params(pairs) -> dict:
    out = {}
    for pair in pairs:
        if "=" in pair:
            name, value = pair.split("=", 1)
            Fraction(value)  # validate exact rational now
            out[name.strip()] = value.strip()
        else:
            out[pair.strip()] = None
    return out


def _equation_spec(f: str, g: str, params) -> EquationSpec:
    return EquationSpec(f=f, g=g, params=_parse_params(params))


def _call(ctx, endpoint: str, request, handler, response_cls=None):
    server = ctx.obj.get("server")
    if server:
        import httpx
        resp = httpx.post(server.rstrip("/") + endpoint,
                          json=request.model_dump(), timeout=None)
        if resp.status_code == 422:
            detail = resp.json().get("detail", resp.text)
            raise handlers.RequestError(str(detail))
        resp.raise_for_status()
        return resp.json()
    return handler(request).model_dump()


def _emit(data, output: Optional[str]) -> None:
    text = json.dumps(data, indent=2)
    if output and output != "-":
        Path(output).write_text(text + "\n", encoding="utf-8")
    else:
        click.echo(text)


@click.group(name="clawkit")
@click.option("--config", type=click.Path(exists=True, dir_okay=False),
              help="JSON file with default option values per subcommand.")
@click.option("--server", help="Base URL of a running clawkit service; "
                               "when set the CLI acts as a thin HTTP client.")
@click.pass_context
def cli(ctx, config, server):
    """Classify third-order evolution equations, compute their conservation
    laws, and verify conservation numerically."""
    ctx.obj = {"server": server}
    if config:
        with open(config, "rb") as fh:
            ctx.default_map = json.load(fh)


def _ansatz_options(func):
    func = click.option("--du", "d_u", type=int, default=None,
                        help="Jet-polynomial degree of the ansatz "
                             "(default: 2*order + 2, at least 3).")(func)
    func = click.option("--dt-deg", "d_t", type=int, default=2,
                        help="Polynomial degree in t of the ansatz.")(func)
    func = click.option("--dx-deg", "d_x", type=int, default=2,
                        help="Polynomial degree in x of the ansatz.")(func)
    func = click.option("--atom", "atoms", multiple=True,
                        help="Transcendental atom for the ansatz, e.g. 'exp(u)' "
                             "(default: harvested from g).")(func)
    return func


def _equation_options(func):
    func = click.option("--param", "params", multiple=True,
                        help="Parameter binding name=rational, or a bare name "
                             "to declare it free.")(func)
    func = click.option("--g", "g", required=True,
                        help="Right-hand side g(x,u,p1,p2).")(func)
    func = click.option("--f", "f", default="1", show_default=True,
                        help="Leading coefficient f(x,u,p1).")(func)
    return func


def _ansatz_spec(d_x, d_t, d_u, atoms) -> AnsatzSpec:
    return AnsatzSpec(d_x=d_x, d_t=d_t, d_u=d_u,
                      atoms=list(atoms) if atoms else None)


@cli.command()
@_equation_options
@click.option("--output", "-o", default=None, help="Write JSON here instead of stdout.")
@click.pass_context
def classify(ctx, f, g, params, output):
    """Structural report: divergence-form and secondary invariant tests."""
    req = ClassifyRequest(equation=_equation_spec(f, g, params))
    _emit(_call(ctx, "/classify", req, handlers.classify), output)


@cli.command()
@_equation_options
@_ansatz_options
@click.option("--order", "-m", type=int, default=1, show_default=True,
              help="Highest jet variable allowed in the density.")
@click.option("--output", "-o", default=None)
@click.pass_context
def search(ctx, f, g, params, order, d_x, d_t, d_u, atoms, output):
    """All independent conservation laws with densities up to the given order."""
    req = SearchRequest(equation=_equation_spec(f, g, params), m=order,
                        ansatz=_ansatz_spec(d_x, d_t, d_u, atoms))
    _emit(_call(ctx, "/search", req, handlers.search), output)


@cli.command(name="type")
@_equation_options
@_ansatz_options
@click.option("--weight5", is_flag=True, help="Also count weight-5 laws (order 3).")
@click.option("--output", "-o", default=None)
@click.pass_context
def type_cmd(ctx, f, g, params, d_x, d_t, d_u, atoms, weight5, output):
    """Type triple (n_-1, n_1, n_3): counts of laws of weight -1, 1, 3."""
    req = TypeRequest(equation=_equation_spec(f, g, params),
                      ansatz=_ansatz_spec(d_x, d_t, d_u, atoms), weight5=weight5)
    data = _call(ctx, "/type", req, handlers.classify_equation_type)
    _emit(data, output)


@cli.command()
@_equation_options
@_ansatz_options
@click.option("--max-order", type=int, default=1, show_default=True)
@click.option("--output", "-o", default=None)
@click.pass_context
def probe(ctx, f, g, params, d_x, d_t, d_u, atoms, max_order, output):
    """Exploratory counts of new laws at each order up to --max-order."""
    req = ProbeRequest(equation=_equation_spec(f, g, params), max_order=max_order,
                       ansatz=_ansatz_spec(d_x, d_t, d_u, atoms))
    _emit(_call(ctx, "/probe", req, handlers.probe), output)


@cli.group()
def catalog():
    """Classified-equation catalog."""


@catalog.command(name="list")
@click.option("--output", "-o", default=None)
@click.pass_context
def catalog_list(ctx, output):
    """Print the catalog entries."""
    server = ctx.obj.get("server")
    if server:
        import httpx
        data = httpx.get(server.rstrip("/") + "/catalog", timeout=None).json()
    else:
        data = handlers.catalog_entries()
    _emit(data, output)


@catalog.command(name="run")
@click.option("--weight5", is_flag=True,
              help="Also check the weight-5 counts where the catalog pins them.")
@click.option("--only", multiple=True, help="Entry id or family filter.")
@click.option("--output", "-o", default=None, help="Write the JSON report here.")
@click.pass_context
def catalog_run(ctx, weight5, only, output):
    """Run the full regression sweep; exits 2 on any per-entry mismatch."""
    req = CatalogRunRequest(weight5=weight5, only=list(only) or None)
    data = _call(ctx, "/catalog/run", req, handlers.catalog_run)
    click.echo(data["table"])
    if output:
        _emit(data, output)
    if not data["passed"]:
        raise MathFailure("catalog regression failed")


@cli.command()
@_equation_options
@click.option("--u0", required=True, help="Initial profile, an expression in x.")
@click.option("--length", "-L", "L", type=float, default=80.0, show_default=True)
@click.option("--grid", "-N", "N", type=int, default=512, show_default=True)
@click.option("--dt", type=float, default=1e-3, show_default=True)
@click.option("--time", "-T", "T", type=float, default=1.0, show_default=True)
@click.option("--density", "densities", multiple=True,
              help="Density expression to monitor (default: solved laws).")
@click.option("--max-density-order", type=int, default=1, show_default=True)
@click.option("--tolerance", type=float, default=1e-6, show_default=True,
              help="Maximum allowed relative drift.")
@click.option("--allow-x", is_flag=True,
              help="Compact-support mode for x-dependent g (sponge damping; "
                   "results labeled indicative).")
@click.option("--output", "-o", default=None,
              help="CSV destination (default stdout): time, I_1..I_k.")
@click.option("--report", default=None, help="Optional JSON report path.")
@click.pass_context
def verify(ctx, f, g, params, u0, L, N, dt, T, densities, max_density_order,
           tolerance, allow_x, output, report):
    """Integrate the equation and monitor conserved-integral drift."""
    req = VerifyRequest(equation=_equation_spec(f, g, params), u0=u0, L=L, N=N,
                        dt=dt, T=T, densities=list(densities) or None,
                        max_density_order=max_density_order,
                        tolerance=tolerance, allow_x=allow_x)
    data = _call(ctx, "/verify", req, handlers.verify)
    rows = [["time"] + [f"I_{i+1}" for i in range(len(data["densities"]))]]
    values = data["values"]
    for j, t in enumerate(data["times"]):
        rows.append([f"{t:.10g}"] + [f"{values[i][j]:.16e}" for i in range(len(values))])
    if output and output != "-":
        with open(output, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh).writerows(rows)
    else:
        writer = csv.writer(sys.stdout)
        writer.writerows(rows)
    if report:
        _emit(data, report)
    for name, drift in zip(data["densities"], data["drifts"]):
        click.echo(f"drift[{name}] = {drift:.3e}", err=True)
    if data["indicative"]:
        click.echo("note: compact-support mode; results are indicative", err=True)
    if not data["passed"]:
        raise MathFailure(f"conserved-integral drift exceeds {tolerance}")


def _write_svg(state_dict, path: Path) -> None:
    xs = state_dict["x"]
    ys = state_dict["y"]
    lo = min(min(xs), min(ys))
    hi = max(max(xs), max(ys))
    pad = 0.05 * (hi - lo or 1.0)
    lo, hi = lo - pad, hi + pad
    size = hi - lo
    points = " ".join(f"{x:.6g},{hi - (y - lo):.6g}" for x, y in zip(xs, ys))
    body = (f'<svg xmlns="http://www.w3.org/2000/svg" '
            f'viewBox="{lo:.6g} 0 {size:.6g} {size:.6g}" width="400" height="400">'
            f'<polygon points="{points}" fill="none" stroke="black" '
            f'stroke-width="{0.004 * size:.6g}"/></svg>\n')
    path.write_text(body, encoding="utf-8")


@cli.command()
@click.option("--x", "x_expr", default=None, help="x(theta) expression.")
@click.option("--y", "y_expr", default=None, help="y(theta) expression.")
@click.option("--samples-csv", default=None,
              help="Initial curve as a CSV of x,y samples (alternative to "
                   "--x/--y; a power-of-two number of rows).")
@click.option("--grid", "-N", "N", type=int, default=256, show_default=True)
@click.option("--time", "-T", "T", type=float, default=0.5, show_default=True)
@click.option("--dt", type=float, default=None,
              help="Time step (default: half the stability bound).")
@click.option("--filter-modes", type=int, default=42, show_default=True,
              help="Fourier modes retained in the update velocity.")
@click.option("--no-redistribute", is_flag=True,
              help="Disable the tangential redistribution velocity.")
@click.option("--states-csv", default=None, help="Write t, sample, x, y rows here.")
@click.option("--moments-csv", default=None,
              help="Write t, length, area, Mx, My, M2 rows here.")
@click.option("--svg", "svg_dir", default=None,
              help="Directory for SVG snapshots (first, middle, last).")
@click.option("--fit-self-similar", is_flag=True,
              help="Least-squares self-similarity fit of the initial curve.")
@click.option("--mkdv-check", is_flag=True,
              help="Report the curvature-evolution residual.")
@click.option("--output", "-o", default=None, help="JSON summary path.")
@click.pass_context
def curveflow(ctx, x_expr, y_expr, samples_csv, N, T, dt, filter_modes,
              no_redistribute, states_csv, moments_csv, svg_dir,
              fit_self_similar, mkdv_check, output):
    """Flow a closed curve by the arclength derivative of its curvature."""
    samples = None
    if samples_csv:
        samples = []
        with open(samples_csv, newline="", encoding="utf-8") as fh:
            for row in csv.reader(fh):
                if not row or not _is_number(row[0]):
                    continue  # header or blank line
                samples.append([float(row[0]), float(row[1])])
    elif not (x_expr and y_expr):
        raise click.UsageError("provide --x and --y, or --samples-csv")
    req = CurveFlowRequest(x=x_expr, y=y_expr, samples=samples, N=N, T=T, dt=dt,
                           filter_modes=filter_modes,
                           redistribute=not no_redistribute,
                           fit_self_similar=fit_self_similar,
                           mkdv_check=mkdv_check)
    data = _call(ctx, "/curveflow", req, handlers.curveflow)
    if states_csv:
        with open(states_csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "sample", "x", "y"])
            for state in data["states"]:
                for j, (xv, yv) in enumerate(zip(state["x"], state["y"])):
                    writer.writerow([f"{state['t']:.10g}", j,
                                     f"{xv:.16e}", f"{yv:.16e}"])
    if moments_csv:
        with open(moments_csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "length", "area", "moment_x", "moment_y",
                             "moment_r2"])
            for row in data["moments"]:
                writer.writerow([f"{row['t']:.10g}", f"{row['length']:.16e}",
                                 f"{row['area']:.16e}", f"{row['moment_x']:.16e}",
                                 f"{row['moment_y']:.16e}", f"{row['moment_r2']:.16e}"])
    if svg_dir:
        directory = Path(svg_dir)
        directory.mkdir(parents=True, exist_ok=True)
        states = data["states"]
        picks = sorted({0, len(states) // 2, len(states) - 1})
        for idx in picks:
            _write_svg(states[idx], directory / f"snapshot_{idx:04d}.svg")
    summary = {k: v for k, v in data.items() if k != "states"}
    _emit(summary, output)
    if data["self_intersection_times"]:
        click.echo("note: self-intersection detected; run flagged", err=True)


@cli.command()
@click.option("--x", "x_expr", required=True, help="x(theta) expression.")
@click.option("--y", "y_expr", required=True, help="y(theta) expression.")
@click.option("--grid", "-N", "N", type=int, default=256, show_default=True)
@click.option("--a0", type=float, default=None)
@click.option("--a1", type=float, default=0.0, show_default=True)
@click.option("--a2", type=float, default=0.0, show_default=True)
@click.option("--fit", is_flag=True, help="Fit (a0, a1, a2) by least squares.")
@click.option("--output", "-o", default=None)
@click.pass_context
def selfsimilar(ctx, x_expr, y_expr, N, a0, a1, a2, fit, output):
    """Self-similarity residual |k1^2 + k^4/4 + a2 k^2 + a1 k + a0| of a curve."""
    req = SelfSimilarRequest(x=x_expr, y=y_expr, N=N, a0=a0, a1=a1, a2=a2, fit=fit)
    _emit(_call(ctx, "/selfsimilar", req, handlers.self_similar), output)


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8787, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn
    uvicorn.run("clawkit.service.app:app", host=host, port=port)


def main(argv=None) -> int:
    try:
        cli(args=argv, standalone_mode=False, obj={})
        return 0
    except MathFailure as exc:
        click.echo(f"failure: {exc}", err=True)
        sys.exit(2)
    except (click.UsageError, handlers.RequestError) as exc:
        message = exc.format_message() if isinstance(exc, click.UsageError) else str(exc)
        click.echo(f"error: {message}", err=True)
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.exceptions.Abort:
        sys.exit(1)
    except ExprError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    sys.exit(main())
