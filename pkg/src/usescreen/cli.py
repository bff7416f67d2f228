"""Command-line interface for the screening engine.

Exit codes are part of the contract: 0 on success, 1 on validation or
usage failure, 2 when the evaluation raises a stop signal (structural
fragility anywhere, or an empty shortlist).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Optional

import click

from . import analysis, scoring, stagegate
from .economics import stress_report
from .model import PROFILE_PRESETS, DecisionProfile, ReasonCode, StopCode
from .service import ScreeningService, ServiceConfig
from .worksheet import (
    Worksheet,
    WorksheetError,
    canonical_json,
    export_report,
    load_format_reference,
    parse_profile_doc,
    parse_report,
    parse_sweep_spec,
    parse_worksheet,
    project_doc,
    project_from_doc,
    serialize_stability,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_STOP = 2


def _fail(messages) -> None:
    if isinstance(messages, str):
        messages = [messages]
    for message in messages:
        click.echo(f"error: {message}", err=True)
    raise SystemExit(EXIT_INVALID)


def _read_worksheet(path: str, strict: bool) -> Worksheet:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        _fail(str(exc))
    try:
        worksheet = parse_worksheet(text, strict=strict)
    except WorksheetError as exc:
        _fail(exc.diagnostics)
    for warning in worksheet.parse_warnings:
        click.echo(f"warning: {warning}", err=True)
    return worksheet


def _resolve_profile(
    worksheet: Worksheet, profile: Optional[str], epsilon: Optional[float]
) -> DecisionProfile:
    resolved = worksheet.profile
    if profile:
        if profile in PROFILE_PRESETS:
            resolved = PROFILE_PRESETS[profile]
        else:
            try:
                resolved = parse_profile_doc(Path(profile).read_text(encoding="utf-8"))
            except OSError as exc:
                _fail(f"--profile: {exc}")
            except WorksheetError as exc:
                _fail(exc.diagnostics)
    if epsilon is not None:
        resolved = resolved.with_overrides(borderline_epsilon=epsilon)
    return resolved


def _evaluate_worksheet(worksheet: Worksheet) -> scoring.Evaluation:
    try:
        return scoring.evaluate(worksheet.evaluation_set(), worksheet.profile)
    except (scoring.EvaluationError, ValueError) as exc:
        _fail(str(exc))


def _write_output(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out}", err=True)
    else:
        click.echo(text, nl=False)


profile_option = click.option(
    "--profile", default=None,
    help="Profile preset name or path to a profile JSON file "
         f"(presets: {', '.join(PROFILE_PRESETS)}).",
)
epsilon_option = click.option(
    "--epsilon", type=float, default=None,
    help="Override the borderline half-width around zero attractiveness.",
)
strict_option = click.option(
    "--strict/--lenient", "strict", default=True,
    help="Reject unknown worksheet fields (strict) or warn and drop them.",
)


@click.group()
def main() -> None:
    """Comparative screening of intended uses for a real-estate asset."""


@main.command()
@click.argument("worksheet_path", metavar="WORKSHEET")
@profile_option
@epsilon_option
@strict_option
@click.option("--out", default=None, help="Write the report here instead of stdout.")
def evaluate(worksheet_path: str, profile: Optional[str], epsilon: Optional[float],
             strict: bool, out: Optional[str]) -> None:
    """Evaluate WORKSHEET and emit a self-contained report document."""
    worksheet = _read_worksheet(worksheet_path, strict)
    effective = worksheet.with_profile(_resolve_profile(worksheet, profile, epsilon))
    evaluation = _evaluate_worksheet(effective)
    _write_output(export_report(effective, evaluation), out)
    if evaluation.stop_signal:
        click.echo("stop signal: structural fragility or empty shortlist", err=True)
        raise SystemExit(EXIT_STOP)


@main.command()
@click.argument("worksheet_path", metavar="WORKSHEET")
@click.argument("sweep_path", metavar="SWEEPSPEC")
@profile_option
@epsilon_option
@strict_option
@click.option("--out", default=None, help="Write the stability report here instead of stdout.")
def sensitivity(worksheet_path: str, sweep_path: str, profile: Optional[str],
                epsilon: Optional[float], strict: bool, out: Optional[str]) -> None:
    """Sweep profile weights over a grid and report ranking stability."""
    worksheet = _read_worksheet(worksheet_path, strict)
    template = _resolve_profile(worksheet, profile, epsilon)
    try:
        spec = parse_sweep_spec(Path(sweep_path).read_text(encoding="utf-8"), template)
    except OSError as exc:
        _fail(str(exc))
    except WorksheetError as exc:
        _fail(exc.diagnostics)
    try:
        report = analysis.weight_sweep(worksheet.evaluation_set(), spec)
    except (analysis.SweepError, ValueError) as exc:
        _fail(str(exc))
    _write_output(serialize_stability(report), out)


@main.command()
@click.argument("worksheet_path", metavar="WORKSHEET")
@strict_option
@click.option("--out", default=None, help="Write scenario NPVs as JSON here.")
def stress(worksheet_path: str, strict: bool, out: Optional[str]) -> None:
    """Run the minimum stress suite on every pair that carries cash flows."""
    worksheet = _read_worksheet(worksheet_path, strict)
    rows = []
    any_fragile = False
    for use in worksheet.uses:
        model = worksheet.cash_flows.get(use.id)
        if model is None:
            rows.append((use.id, None))
            continue
        report = stress_report(model)
        any_fragile = any_fragile or report.fragile
        rows.append((use.id, report))

    doc = {}
    for uid, report in rows:
        if report is None:
            click.echo(f"{uid}: not evaluated (no cash-flow model)")
            doc[uid] = None
            continue
        scenarios = "  ".join(
            f"{kind.value}={value:.2f}" for kind, value in report.scenario_npvs.items()
        )
        click.echo(
            f"{uid}: base={report.base_npv:.2f}  {scenarios}  "
            f"fragile={'yes' if report.fragile else 'no'}"
        )
        doc[uid] = {
            "base_npv": report.base_npv,
            "scenario_npvs": {kind.value: value for kind, value in report.scenario_npvs.items()},
            "fragile": report.fragile,
        }
    if out:
        Path(out).write_text(canonical_json(doc), encoding="utf-8")
    if any_fragile:
        raise SystemExit(EXIT_STOP)


@main.command()
def formats() -> None:
    """Print the bundled decision-oriented format summary."""
    reference = load_format_reference()
    header = ("format", "scale", "context", "demand", "risk", "signal")
    rows = [
        (entry.label, entry.scale, entry.context, entry.demand, entry.risk, entry.signal)
        for entry in reference.entries
    ]
    widths = [max(len(row[i]) for row in [header, *rows]) for i in range(len(header))]
    for row in [header, *rows]:
        click.echo("  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip())
        if row == header:
            click.echo("  ".join("-" * width for width in widths))
    click.echo()
    for entry in reference.entries:
        click.echo(f"{entry.label}: {entry.note}")


@main.command()
@click.argument("document_path", metavar="REPORT_OR_WORKSHEET")
@profile_option
@epsilon_option
@strict_option
@click.option("--out-dir", default="screening-report", show_default=True,
              help="Directory for the CSV matrix and figures.")
@click.option("--stability", "stability_path", default=None,
              help="Optional stability-report JSON to render alongside.")
def report(document_path: str, profile: Optional[str], epsilon: Optional[float],
           strict: bool, out_dir: str, stability_path: Optional[str]) -> None:
    """Render figures and a delimited matrix from a report (or a worksheet,
    which is evaluated first)."""
    from . import figures  # matplotlib import deferred to the render path

    try:
        text = Path(document_path).read_text(encoding="utf-8")
    except OSError as exc:
        _fail(str(exc))
    try:
        kind = json.loads(text).get("kind") if text.strip().startswith("{") else None
    except json.JSONDecodeError:
        kind = None

    if kind == "evaluation_report":
        try:
            doc = parse_report(text).doc
        except WorksheetError as exc:
            _fail(exc.diagnostics)
    else:
        worksheet = _read_worksheet(document_path, strict)
        effective = worksheet.with_profile(_resolve_profile(worksheet, profile, epsilon))
        evaluation = _evaluate_worksheet(effective)
        doc = json.loads(export_report(effective, evaluation))

    stability_doc = None
    if stability_path:
        try:
            stability_doc = json.loads(Path(stability_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            _fail(f"--stability: {exc}")

    written = figures.render_report_directory(doc, Path(out_dir), stability_doc)
    for path in written:
        click.echo(f"wrote {path}", err=True)


def _load_project(store: Path, project_id: str) -> stagegate.Project:
    path = store / "projects" / f"{project_id}.json"
    if not path.exists():
        _fail(f"no stored project {project_id!r}")
    try:
        return project_from_doc(json.loads(path.read_text(encoding="utf-8")))
    except (WorksheetError, stagegate.GateError, json.JSONDecodeError) as exc:
        _fail(str(exc))


def _save_project(store: Path, project: stagegate.Project) -> None:
    directory = store / "projects"
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{project.id}.json"
    path.write_text(canonical_json(project_doc(project)), encoding="utf-8")


def _next_timestamp(project: stagegate.Project) -> int:
    if not project.gate_history:
        return 1
    return int(project.gate_history[-1].timestamp) + 1


store_option = click.option(
    "--store", default="screening-store", show_default=True,
    help="Directory holding stored projects and worksheets.",
)


@main.group()
def gate() -> None:
    """Walk the staged decision sequence for a stored project."""


@gate.command("open")
@click.argument("worksheet_path", metavar="WORKSHEET")
@strict_option
@store_option
@click.option("--id", "project_id", default=None, help="Project id (default: derived from the asset).")
def gate_open(worksheet_path: str, strict: bool, store: str, project_id: Optional[str]) -> None:
    """Open a project at asset qualification from a worksheet's asset and uses."""
    worksheet = _read_worksheet(worksheet_path, strict)
    try:
        project = stagegate.open_project(worksheet.asset, worksheet.uses, id=project_id)
    except stagegate.GateError as exc:
        _fail(str(exc))
    _save_project(Path(store), project)
    click.echo(project.id)


def _parse_checks(checks: tuple[str, ...]) -> dict[str, bool]:
    parsed = {}
    truthy = {"true", "yes", "1"}
    falsy = {"false", "no", "0"}
    for check in checks:
        name, _, value = check.partition("=")
        value = value.strip().lower()
        if not name or value not in truthy | falsy:
            _fail(f"--check must look like name=true or name=false, got {check!r}")
        parsed[name.strip()] = value in truthy
    return parsed


def _parse_reasons(reasons: tuple[str, ...]) -> list[ReasonCode]:
    parsed = []
    for reason in reasons:
        code, _, detail = reason.partition(":")
        try:
            parsed.append(ReasonCode(code=StopCode(code.strip()), detail=detail.strip() or code))
        except ValueError:
            codes = ", ".join(c.value for c in StopCode)
            _fail(f"--reason must be CODE:detail with CODE one of {codes}")
    return parsed


@gate.command("record")
@click.argument("project_id", metavar="PROJECT")
@store_option
@click.option("--stage", "stage_name", required=True,
              type=click.Choice([stage.value for stage in stagegate.STAGE_ORDER]))
@click.option("--check", "checks", multiple=True,
              help="Checklist entry as name=true|false (repeatable).")
@click.option("--reason", "reasons", multiple=True, help="Stop reason as CODE:detail (repeatable).")
@click.option("--assume", "assumptions", multiple=True, help="Free-text assumption (repeatable).")
@click.option("--timestamp", type=float, default=None,
              help="Monotonic instant for the record (default: last + 1).")
def gate_record(project_id: str, store: str, stage_name: str, checks: tuple[str, ...],
                reasons: tuple[str, ...], assumptions: tuple[str, ...],
                timestamp: Optional[float]) -> None:
    """Append one gate decision; the verdict is derived from checks and reasons."""
    store_path = Path(store)
    project = _load_project(store_path, project_id)
    try:
        record = project.record_gate(
            stagegate.Stage(stage_name),
            _parse_checks(checks),
            _parse_reasons(reasons),
            timestamp=timestamp if timestamp is not None else _next_timestamp(project),
            assumptions=list(assumptions),
        )
    except stagegate.GateError as exc:
        _fail(str(exc))
    _save_project(store_path, project)
    if record.verdict is stagegate.Verdict.STOP:
        codes = ", ".join(reason.code.value for reason in record.reasons)
        click.echo(f"stop at {record.stage.value}: {codes}")
    else:
        click.echo(f"proceed: now at {project.current_stage.value}")


@gate.command("attach")
@click.argument("project_id", metavar="PROJECT")
@click.argument("worksheet_path", metavar="WORKSHEET")
@strict_option
@store_option
@profile_option
@epsilon_option
@click.option("--timestamp", type=float, default=None)
def gate_attach(project_id: str, worksheet_path: str, strict: bool, store: str,
                profile: Optional[str], epsilon: Optional[float],
                timestamp: Optional[float]) -> None:
    """Evaluate a worksheet and prune the project's candidates with the results."""
    store_path = Path(store)
    project = _load_project(store_path, project_id)
    worksheet = _read_worksheet(worksheet_path, strict)
    effective = worksheet.with_profile(_resolve_profile(worksheet, profile, epsilon))
    evaluation = _evaluate_worksheet(effective)
    try:
        project.attach_evaluation(
            evaluation.results,
            timestamp=timestamp if timestamp is not None else _next_timestamp(project),
        )
    except stagegate.GateError as exc:
        _fail(str(exc))
    _save_project(store_path, project)
    if project.stopped:
        click.echo("stop: every candidate use was excluded")
        raise SystemExit(EXIT_STOP)
    click.echo("candidates: " + ", ".join(use.id for use in project.candidate_uses))


@gate.command("show")
@click.argument("project_id", metavar="PROJECT")
@store_option
def gate_show(project_id: str, store: str) -> None:
    """Print the stored project document, history included."""
    project = _load_project(Path(store), project_id)
    click.echo(canonical_json(project_doc(project)), nl=False)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8765, show_default=True)
@store_option
@strict_option
@click.option("--profile", "default_profile", default="baseline", show_default=True,
              type=click.Choice(sorted(PROFILE_PRESETS)))
def serve(host: str, port: int, store: str, strict: bool, default_profile: str) -> None:
    """Run the stateless evaluation service over HTTP."""
    try:
        service = ScreeningService(
            ServiceConfig(
                host=host, port=port, store_dir=Path(store),
                strict=strict, default_profile=default_profile,
            )
        )
    except (OSError, ValueError) as exc:
        _fail(str(exc))
    click.echo(f"listening on http://{service.host}:{service.port} (store: {store})", err=True)
    try:
        service.serve_forever()
    except KeyboardInterrupt:
        service.stop()


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
