"""Command line entry points: chat, validate, serve."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from patter.engine import ChatEngine, ConversationEnded
from patter.flow import default_registry
from patter.knowledge import FunctionRegistry
from patter.validate import Report, load_any, reference_regexes, validate_path


def _registry_from_file(path: str | None) -> FunctionRegistry:
    """Default registry, optionally extended by a python file defining FUNCTIONS."""
    registry = default_registry()
    if path:
        namespace: dict = {}
        exec(compile(Path(path).read_text(encoding="utf-8"), path, "exec"), namespace)
        functions = namespace.get("FUNCTIONS")
        if not isinstance(functions, dict):
            raise click.ClickException(f"{path} must define a FUNCTIONS dict")
        for name, fn in functions.items():
            registry.register(str(name), fn)
    return registry


def _load_checked(spec: str, functions: str | None) -> tuple[Report, object]:
    report = validate_path(spec, _registry_from_file(functions))
    for diag in report.diagnostics:
        click.echo(diag.render(), err=True)
    if not report.ok:
        raise SystemExit(1)
    return report, report.loaded


@click.group()
def main():
    """Dialogue development framework: pattern NLU, state machines, rules."""


@main.command()
@click.argument("spec", type=click.Path(exists=True))
@click.option("--seed", type=int, default=None, help="RNG seed for reproducible runs.")
@click.option("--log", "log_path", type=click.Path(), default=None,
              help="JSON-lines file for unmatched inputs.")
@click.option("--functions", type=click.Path(exists=True), default=None,
              help="Python file defining extra FUNCTIONS.")
def chat(spec, seed, log_path, functions):
    """Interactive terminal chat over a flow or composite SPEC."""
    _, flow = _load_checked(spec, functions)
    engine = ChatEngine(flow, seed=seed, log_path=log_path)
    click.echo(f"bot: {engine.start().text}")
    while not engine.ended:
        try:
            line = input("> ")
        except EOFError:
            break
        line = line.strip()
        if line == ":quit":
            break
        if line == ":state":
            click.echo(f"[state] {engine.session.state}")
            continue
        if line == ":vars":
            for name, value in sorted(engine.variables().items()):
                click.echo(f"[var] {name} = {value}")
            continue
        if not line:
            continue
        try:
            report = engine.respond(line)
        except ConversationEnded:
            break
        click.echo(f"bot: {report.text}")
    click.echo("bye.")


@main.command()
@click.argument("spec", type=click.Path(exists=True))
@click.option("--emit-regex", is_flag=True,
              help="Print reference regexes for function-free patterns.")
@click.option("--functions", type=click.Path(exists=True), default=None)
def validate(spec, emit_regex, functions):
    """Static checks over SPEC; exit code 0 iff no errors."""
    report = validate_path(spec, _registry_from_file(functions))
    for diag in report.diagnostics:
        click.echo(diag.render())
    if emit_regex and report.loaded is not None:
        for where, regex in reference_regexes(report.loaded):
            click.echo(f"{where}: {regex}")
    errors = len(report.errors)
    warnings = len(report.diagnostics) - errors
    click.echo(f"{errors} error(s), {warnings} warning(s)")
    raise SystemExit(0 if report.ok else 1)


@main.command()
@click.argument("spec", type=click.Path(exists=True))
@click.option("--port", type=int, default=8000)
@click.option("--host", default="127.0.0.1")
@click.option("--seed", type=int, default=0, help="Root seed for per-session RNG.")
@click.option("--ui", "ui_dir", type=click.Path(exists=True), default=None,
              help="Directory of static web-client assets to serve at /.")
@click.option("--functions", type=click.Path(exists=True), default=None)
def serve(spec, port, host, seed, ui_dir, functions):
    """Run the HTTP chat service; refuses to start on validation errors."""
    import uvicorn

    from patter.server import create_app

    _, flow = _load_checked(spec, functions)
    app = create_app(flow, root_seed=seed, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
