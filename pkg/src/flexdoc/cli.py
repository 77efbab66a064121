"""Command-line frontend: validate, solve, carve, summarize, serve.

Exit codes follow one convention everywhere: 0 success, 1 domain
failure (validation diagnostics, infeasible layout, content-range
violations), 2 environment failure (unreadable input, unwritable
output, occupied port). Diagnostics and error messages go to standard
error; requested payloads go to the named output file or stdout.
"""

from __future__ import annotations

import dataclasses
import json
import socket
import sys
from pathlib import Path
from typing import Optional

import click

from .bundle import (
    BundleError,
    diagnose,
    parse_document,
    parse_preferences,
    serialize_solution,
)
from .candidates import SolverConfig
from .engine import SolveError, attempted_relaxations, solve
from .model import NEUTRAL_PREFERENCES, Document, PreferenceState, Viewport


def _read_bytes(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


def _write_bytes(path: Optional[Path], data: bytes) -> None:
    if path is None:
        sys.stdout.buffer.write(data)
        return
    try:
        path.write_bytes(data)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


def _print_diagnostics(diagnostics) -> None:
    for d in diagnostics:
        click.echo(f"{d.code} {d.path} {d.message}", err=True)


@click.group()
def main() -> None:
    """Adaptive document layout tools."""


@main.command()
@click.argument("bundle", type=click.Path(path_type=Path))
def validate(bundle: Path) -> None:
    """Check a document bundle; print one diagnostic per line."""
    diagnostics = diagnose(_read_bytes(bundle))
    _print_diagnostics(diagnostics)
    sys.exit(1 if diagnostics else 0)


def _check_pref_references(prefs: PreferenceState, document: Document) -> None:
    if prefs.forced_template is not None:
        document.template(prefs.forced_template)
    for element_id, alt_id in prefs.forced_alternatives.items():
        document.element(element_id).alternative(alt_id)
    for element_id in (*prefs.zoom_deltas, *prefs.pins):
        document.element(element_id)


@main.command(name="solve")
@click.option("--doc", "doc_path", required=True,
              type=click.Path(path_type=Path))
@click.option("--width", type=float, required=True)
@click.option("--height", type=float, required=True)
@click.option("--prefs", "prefs_path", type=click.Path(path_type=Path),
              default=None)
@click.option("--out", "out_path", type=click.Path(path_type=Path),
              default=None)
@click.option("--mode", type=click.Choice(["exhaustive", "beam"]),
              default=None)
def solve_command(doc_path: Path, width: float, height: float,
                  prefs_path: Optional[Path], out_path: Optional[Path],
                  mode: Optional[str]) -> None:
    """Solve a bundle at one viewport and write the layout JSON."""
    try:
        document = parse_document(_read_bytes(doc_path))
    except BundleError as exc:
        _print_diagnostics(exc.diagnostics)
        sys.exit(1)
    prefs = NEUTRAL_PREFERENCES
    if prefs_path is not None:
        try:
            prefs = parse_preferences(_read_bytes(prefs_path))
            _check_pref_references(prefs, document)
        except BundleError as exc:
            _print_diagnostics(exc.diagnostics)
            sys.exit(1)
        except KeyError as exc:
            click.echo(f"error: preferences reference unknown id "
                       f"{exc.args[0]!r}", err=True)
            sys.exit(1)
    if width <= 0 or height <= 0:
        click.echo("error: viewport must be positive", err=True)
        sys.exit(1)
    config = SolverConfig() if mode is None else SolverConfig(mode=mode)
    try:
        solution = solve(document, Viewport(width, height), prefs,
                         config=config)
    except SolveError as exc:
        attempted = attempted_relaxations(prefs)
        report = ", ".join(attempted) if attempted else "none available"
        click.echo(f"error: {exc} (relaxations attempted: {report})",
                   err=True)
        sys.exit(1)
    _write_bytes(out_path, serialize_solution(solution))


@main.command()
@click.argument("image", type=click.Path(path_type=Path))
@click.option("--width", type=int, required=True)
@click.option("--height", type=int, required=True)
@click.option("--out", "out_path", required=True,
              type=click.Path(path_type=Path))
def carve(image: Path, width: int, height: int, out_path: Path) -> None:
    """Seam-carve an image to exact target dimensions."""
    from .content.carving import carve as carve_raster
    from .content.raster import load_raster, png_bytes

    raw = _read_bytes(image)
    try:
        raster = load_raster(raw)
        result, _ = carve_raster(raster, width, height)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    _write_bytes(out_path, png_bytes(result))


@main.command()
@click.argument("textfile", type=click.Path(path_type=Path))
@click.option("--ratio", type=float, required=True)
def summarize(textfile: Path, ratio: float) -> None:
    """Extractively shorten a text; print it and its similarity."""
    from .content.summarize import summarize as summarize_text

    text = _read_bytes(textfile).decode("utf-8", errors="replace")
    try:
        variant = summarize_text(text, ratio)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(variant.text)
    click.echo(f"similarity {variant.similarity_to_original:.6f}")


@main.command()
@click.option("--port", type=int, default=None)
@click.option("--host", default=None)
@click.option("--asset-cache", "asset_cache", default=None,
              type=click.Path(path_type=Path))
@click.option("--session-ttl", "session_ttl", type=float, default=None)
@click.option("--time-budget-ms", "time_budget_ms", type=float, default=None)
def serve(port: Optional[int], host: Optional[str],
          asset_cache: Optional[Path], session_ttl: Optional[float],
          time_budget_ms: Optional[float]) -> None:
    """Run the HTTP service until interrupted."""
    from .service import ServiceConfig
    from .service import main as service_main

    config = ServiceConfig.from_env()
    overrides = {
        "port": port,
        "host": host,
        "asset_cache_dir": str(asset_cache) if asset_cache else None,
        "session_ttl_s": session_ttl,
        "time_budget_ms": time_budget_ms,
    }
    config = dataclasses.replace(
        config, **{k: v for k, v in overrides.items() if v is not None})
    # fail fast on an occupied port instead of letting the server loop
    # report it after startup
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((config.host, config.port))
    except OSError as exc:
        click.echo(f"error: cannot bind {config.host}:{config.port}: {exc}",
                   err=True)
        sys.exit(2)
    finally:
        probe.close()
    try:
        service_main(config)
    except KeyboardInterrupt:
        pass
    sys.exit(0)


if __name__ == "__main__":
    main()
