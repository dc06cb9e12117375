"""
Output rendering: plain report lines, rich tables, schema-checked JSON
"""

import logging
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional

import jsonschema
import orjson
from pydantic import BaseModel
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from app.ir.errors import ReportSchemaError
from app.models import BenchReport, QueryResult, RoArgReport, StatsReport, TaintReport

logger = logging.getLogger(__name__)

SCHEMA_PATH = Path(__file__).resolve().parents[2] / "docs" / "report.schema.json"

console = Console()
err_console = Console(stderr=True)


@lru_cache
def get_report_schema(path: str = str(SCHEMA_PATH)) -> Dict[str, Any]:
    return orjson.loads(Path(path).read_bytes())


def to_document(command: str, payload: Optional[BaseModel] = None, **extra: Any) -> Dict[str, Any]:
    """Wrap a report model into the top-level JSON document"""
    doc: Dict[str, Any] = {"command": command}
    if payload is not None:
        doc["report"] = payload.model_dump(by_alias=True, mode="json")
    for key, value in extra.items():
        if isinstance(value, BaseModel):
            value = value.model_dump(by_alias=True, mode="json")
        if value is not None:
            doc[key] = value
    return doc


def dumps_document(doc: Dict[str, Any]) -> str:
    """
    Validate against docs/report.schema.json and serialize

    Raises:
        ReportSchemaError: doc does not match the schema
    """
    try:
        jsonschema.validate(instance=doc, schema=get_report_schema())
    except jsonschema.ValidationError as e:
        path = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ReportSchemaError(f"report does not match schema at {path}: {e.message}") from e
    return orjson.dumps(doc, option=orjson.OPT_INDENT_2).decode("utf-8")


def emit_json(doc: Dict[str, Any]) -> None:
    # plain print keeps the document free of rich markup
    print(dumps_document(doc))


# --- Human-readable output ---

def render_taint(report: TaintReport) -> None:
    for t in report.tainted:
        console.print(t.line(), markup=False, highlight=False)
    for hit in report.sink_hits:
        console.print(hit.line(), markup=False, highlight=False)
    console.print(
        f"{len(report.tainted)} tainted value(s), {len(report.sink_hits)} sink hit(s)",
        markup=False, highlight=False,
    )


def render_roarg(report: RoArgReport) -> None:
    for line in report.lines():
        console.print(line, markup=False, highlight=False)


def render_query(result: QueryResult) -> None:
    console.print(result.answer, markup=False, highlight=False)


def stats_table(stats: StatsReport) -> Table:
    table = Table(title=f"{stats.target} ({stats.client})", show_header=True)
    table.add_column("Metric")
    table.add_column("Value", justify="right")
    rows = [
        ("#V-Edge", str(stats.v_edge)),
        ("#V-Vertex", str(stats.v_vertex)),
        ("Analysis time (s)", f"{stats.analysis_seconds:.4f}"),
        ("Total time (s)", f"{stats.total_seconds:.4f}"),
        ("Peak RSS (MB)", f"{stats.peak_rss_mb:.1f}"),
    ]
    for name, seconds in stats.phases.model_dump().items():
        rows.append((f"  {name} (s)", f"{seconds:.4f}"))
    h = stats.interval_sets
    rows.append(("|Π| min/q1/median/q3/max", f"{h.min:g}/{h.q1:g}/{h.median:g}/{h.q3:g}/{h.max:g}"))
    rows.append(("Values with ≤1 use (%)", f"{stats.use_counts.single_use_pct:.1f}"))
    rows.append(("Interval merge rounds", str(stats.interval_rounds)))
    rows.append(("Worklist pops", str(stats.worklist_pops)))
    rows.append(("Ψ rounds", str(stats.psi_rounds)))
    for name, value in rows:
        table.add_row(name, value)
    return table


def render_stats(stats: StatsReport) -> None:
    # stderr so report lines on stdout stay parseable
    err_console.print(stats_table(stats))


def bench_table(report: BenchReport) -> Table:
    table = Table(title=f"bench: {report.client}, preset {report.preset}, seed {report.seed}")
    for column in ("#Inst", "#Func", "#V-Vertex", "#V-Edge", "Analysis (s)", "Peak RSS (MB)", "≤1 use (%)", "median |Π|"):
        table.add_column(column, justify="right")
    for row in report.rows:
        table.add_row(
            str(row.instructions),
            str(row.functions),
            str(row.v_vertex),
            str(row.v_edge),
            f"{row.analysis_seconds:.3f}",
            f"{row.peak_rss_mb:.1f}",
            f"{row.single_use_pct:.1f}",
            f"{row.median_interval_set:g}",
        )
    return table


def render_bench(report: BenchReport) -> None:
    console.print(bench_table(report))


def render_error(message: str) -> None:
    err_console.print(f"[bold red]error:[/bold red] {escape(message)}", highlight=False)
