"""Headless access to a workspace: import/export, variation surgery, button
application, and a server launcher.

Commands operate directly on the workspace file under the same advisory
lock the server takes, so scripts and the service never trample each other.
Exit codes: 0 success, 1 validation error, 2 backend error.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import click

from . import store
from .engine import WorkspaceEngine
from .errors import AbscribeError, BackendError, BackendTimeout, EmptyCompletion
from .llm import Gateway, InsertState, ModelConfig
from .service import DEFAULT_BIND, create_app, parse_bind

BACKEND_ERRORS = (BackendError, BackendTimeout, EmptyCompletion)


@dataclass
class CliContext:
    workspace_path: Path
    backend: str | None
    json_out: bool

    def config(self) -> ModelConfig:
        return ModelConfig.from_env(os.environ, backend=self.backend)


pass_cli = click.make_pass_decorator(CliContext)


@click.group()
@click.option("--workspace", "-w", type=click.Path(), default=None,
              envvar="ABSCRIBE_WORKSPACE",
              help="Workspace file (default ./workspace.abscribe.json).")
@click.option("--llm-backend", type=click.Choice(["real", "mock"]), default=None,
              help="Generation backend (default: LLM_BACKEND env or mock).")
@click.option("--json", "json_out", is_flag=True,
              help="Emit one JSON object per command.")
@click.pass_context
def main(ctx, workspace, llm_backend, json_out):
    """abscribe: keep every rewrite of a text segment, in place."""
    path = Path(workspace) if workspace else store.default_workspace_path()
    ctx.obj = CliContext(workspace_path=path, backend=llm_backend, json_out=json_out)


def _run(cli: CliContext, op, human=None):
    """Open the workspace under its lock, run one operation, emit, exit."""
    try:
        with store.workspace_lock(cli.workspace_path):
            engine = WorkspaceEngine.open(cli.workspace_path,
                                          gateway=Gateway(cli.config()))
            result = op(engine)
    except AbscribeError as exc:
        _fail(cli, exc)
    if cli.json_out:
        click.echo(json.dumps(result, ensure_ascii=False))
    elif human is not None:
        text = human(result)
        if text:
            click.echo(text)


def _fail(cli: CliContext, exc: AbscribeError):
    payload = {"code": exc.code, "message": exc.message}
    if cli.json_out:
        click.echo(json.dumps(payload, ensure_ascii=False))
    else:
        click.echo(f"error ({exc.code}): {exc.message}", err=True)
    sys.exit(2 if isinstance(exc, BACKEND_ERRORS) else 1)


# --- doc ----------------------------------------------------------------------

@main.group()
def doc():
    """Create, import, export, and flatten documents."""


@doc.command("new")
@click.option("--title", default="Untitled")
@pass_cli
def doc_new(cli, title):
    _run(cli, lambda e: e.create_document(title),
         lambda r: f"created document {r['document']['id']}")


@doc.command("import")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--title", default=None)
@pass_cli
def doc_import(cli, path, title):
    """Read UTF-8 text; one line becomes one block."""
    text = Path(path).read_text(encoding="utf-8")
    name = title if title is not None else Path(path).stem
    _run(cli, lambda e: e.create_document(name, text),
         lambda r: f"imported document {r['document']['id']}")


@doc.command("export")
@click.argument("document_id")
@click.option("--out", type=click.Path(), default=None,
              help="Destination file (default: stdout).")
@pass_cli
def doc_export(cli, document_id, out):
    def op(e):
        return {"document_id": document_id, "text": e.flatten(document_id)}
    if out is None:
        _run(cli, op, lambda r: r["text"])
    else:
        def write(e):
            result = op(e)
            Path(out).write_text(result["text"] + "\n", encoding="utf-8")
            return result
        _run(cli, write, lambda r: f"exported to {out}")


@doc.command("flatten")
@click.argument("document_id")
@click.option("--assign", multiple=True, metavar="COMPONENT:VARIATION",
              help="Override the selected variation for a component.")
@pass_cli
def doc_flatten(cli, document_id, assign):
    assignment = {}
    for entry in assign:
        component_id, sep, variation_id = entry.partition(":")
        if not sep:
            _fail(cli, AbscribeError(f"bad --assign entry {entry!r}"))
        assignment[component_id] = variation_id
    _run(cli, lambda e: {"document_id": document_id,
                         "text": e.flatten(document_id, assignment or None)},
         lambda r: r["text"])


@doc.command("list")
@pass_cli
def doc_list(cli):
    _run(cli, lambda e: {"documents": e.list_documents()},
         lambda r: "\n".join(f"{d['id']}  {d['title']}" for d in r["documents"]))


@doc.command("delete")
@click.argument("document_id")
@pass_cli
def doc_delete(cli, document_id):
    _run(cli, lambda e: e.delete_document(document_id),
         lambda r: f"deleted document {r['deleted']}")


# --- comp ----------------------------------------------------------------------

@main.group()
def comp():
    """Turn text spans into variation components."""


@comp.command("create")
@click.option("--doc", "document_id", required=True)
@click.option("--block", "block_id", required=True)
@click.option("--start", type=int, required=True)
@click.option("--end", type=int, required=True)
@pass_cli
def comp_create(cli, document_id, block_id, start, end):
    _run(cli, lambda e: e.create_component(document_id, block_id, start, end),
         lambda r: f"created component {r['component_id']} "
                   f"(variation {r['variation_id']})")


@comp.command("list")
@click.option("--doc", "document_id", required=True)
@pass_cli
def comp_list(cli, document_id):
    def render(r):
        lines = []
        for entry in r["components"]:
            lines.append(f"component {entry['component_id']} (block {entry['block_id']})")
            for v in entry["variations"]:
                marker = "*" if v["selected"] else " "
                lines.append(f"  {marker} {v['id']}  {v['text']!r}")
        return "\n".join(lines)
    _run(cli, lambda e: {"components": e.list_components(document_id)}, render)


@comp.command("dissolve")
@click.option("--doc", "document_id", required=True)
@click.option("--component", "component_id", required=True)
@pass_cli
def comp_dissolve(cli, document_id, component_id):
    _run(cli, lambda e: e.dissolve_component(document_id, component_id),
         lambda r: f"dissolved component {r['dissolved']}")


# --- var ----------------------------------------------------------------------

@main.group()
def var():
    """Add, select, edit, clone, and delete variations."""


@var.command("add")
@click.option("--doc", "document_id", required=True)
@click.option("--component", "component_id", required=True)
@click.option("--text", required=True)
@pass_cli
def var_add(cli, document_id, component_id, text):
    _run(cli, lambda e: e.add_variation(document_id, component_id, text),
         lambda r: f"added variation {r['variation_id']}")


@var.command("select")
@click.option("--doc", "document_id", required=True)
@click.option("--component", "component_id", required=True)
@click.option("--variation", "variation_id", required=True)
@pass_cli
def var_select(cli, document_id, component_id, variation_id):
    _run(cli, lambda e: e.select_variation(document_id, component_id, variation_id),
         lambda r: f"selected variation {r['selected']}")


@var.command("delete")
@click.option("--doc", "document_id", required=True)
@click.option("--component", "component_id", required=True)
@click.option("--variation", "variation_id", required=True)
@pass_cli
def var_delete(cli, document_id, component_id, variation_id):
    _run(cli, lambda e: e.delete_variation(document_id, component_id, variation_id),
         lambda r: f"deleted variation {r['deleted']}; selected {r['selected']}")


@var.command("edit")
@click.option("--doc", "document_id", required=True)
@click.option("--component", "component_id", required=True)
@click.option("--variation", "variation_id", required=True)
@click.option("--text", required=True)
@pass_cli
def var_edit(cli, document_id, component_id, variation_id, text):
    _run(cli, lambda e: e.edit_variation(document_id, component_id, variation_id, text),
         lambda r: f"edited variation {r['variation_id']}")


@var.command("clone")
@click.option("--doc", "document_id", required=True)
@click.option("--component", "component_id", required=True)
@click.option("--variation", "variation_id", required=True)
@pass_cli
def var_clone(cli, document_id, component_id, variation_id):
    _run(cli, lambda e: e.clone_variation(document_id, component_id, variation_id),
         lambda r: f"cloned into variation {r['variation_id']}")


# --- btn ----------------------------------------------------------------------

@main.group()
def btn():
    """Manage and apply reusable prompt buttons."""


@btn.command("new")
@click.option("--prompt", "prompt_text", required=True)
@pass_cli
def btn_new(cli, prompt_text):
    _run(cli, lambda e: e.create_button(prompt_text),
         lambda r: f"created button {r['button']['id']} "
                   f"labeled {r['button']['label']!r}")


@btn.command("list")
@pass_cli
def btn_list(cli):
    _run(cli, lambda e: {"buttons": e.list_buttons()},
         lambda r: "\n".join(
             f"{b['id']}  uses={b['use_count']:<3} {b['label']!r}: {b['prompt_text']}"
             for b in r["buttons"]))


@btn.command("edit")
@click.option("--button", "button_id", required=True)
@click.option("--prompt", "prompt_text", default=None)
@click.option("--label", default=None)
@pass_cli
def btn_edit(cli, button_id, prompt_text, label):
    _run(cli, lambda e: e.edit_button(button_id, prompt_text, label),
         lambda r: f"edited button {r['button']['id']}")


@btn.command("delete")
@click.option("--button", "button_id", required=True)
@pass_cli
def btn_delete(cli, button_id):
    _run(cli, lambda e: e.delete_button(button_id),
         lambda r: f"deleted button {r['deleted']}")


@btn.command("apply")
@click.option("--button", "button_id", required=True)
@click.option("--doc", "document_id", required=True)
@click.option("--component", "component_id", required=True)
@pass_cli
def btn_apply(cli, button_id, document_id, component_id):
    _run(cli, lambda e: e.apply_button(document_id, component_id, button_id),
         lambda r: f"new selected variation {r['variation_id']}: {r['text']}")


# --- insert ---------------------------------------------------------------------

@main.command("insert")
@click.option("--doc", "document_id", required=True)
@click.option("--block", "block_id", required=True)
@click.option("--offset", type=int, required=True)
@click.option("--prompt", "prompt_text", required=True)
@click.option("--accept", is_flag=True,
              help="Splice the generated text into the document.")
@pass_cli
def insert(cli, document_id, block_id, offset, prompt_text, accept):
    """Run a generation at a cursor position to completion."""
    def op(e):
        pending = e.start_insert(document_id, block_id, offset, prompt_text)
        pending.wait(timeout=e.gateway.config.timeout + 10)
        if pending.state is not InsertState.COMPLETE:
            reason = pending.failure_reason or pending.state.value
            raise BackendError(0, f"insert did not complete: {reason}")
        result = {"insert_id": pending.id, "text": pending.accumulated_text,
                  "accepted": accept}
        if accept:
            result.update(e.accept_insert(pending.id))
            result["accepted"] = True
        else:
            e.discard_insert(pending.id)
        return result
    _run(cli, op, lambda r: r["text"])


# --- serve ---------------------------------------------------------------------

@main.command("serve")
@click.option("--bind", default=DEFAULT_BIND, show_default=True)
@pass_cli
def serve(cli, bind):
    """Run the HTTP service (holds the workspace lock while serving)."""
    import uvicorn

    host, port = parse_bind(bind)
    try:
        with store.workspace_lock(cli.workspace_path):
            engine = WorkspaceEngine.open(cli.workspace_path,
                                          gateway=Gateway(cli.config()))
            app = create_app(engine)
            uvicorn.run(app, host=host, port=port, log_level="info")
    except AbscribeError as exc:
        _fail(cli, exc)


if __name__ == "__main__":
    main()
