# app/cli/commands.py
"""
Command handlers behind the Typer app

Each handler does the work of one subcommand and raises DfiError /
OSError on failure; app/main.py maps those to exit codes.
"""

import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from app.bench.generator import PRESETS, generate_module, instruction_count
from app.cli.render import (
    emit_json, render_bench, render_query, render_roarg, render_stats, render_taint, to_document,
)
from app.cli.stats import StatsCollector, histogram, interval_set_sizes, use_count_histogram
from app.clients import create_client, load_taint_config, run_roarg, run_taint
from app.clients.taint import TaintConfig
from app.config import settings
from app.core.interproc import InterprocSolver, solve_module
from app.core.preprocess import preprocess_module
from app.ir import ensure_valid, parse_file, print_module
from app.ir.errors import ConfigError, UnknownSymbolError
from app.ir.model import Module, Value
from app.models import BenchReport, BenchRow, QueryResult

logger = logging.getLogger(__name__)

_REF_RE = re.compile(r"^@([\w.$]+):%([\w.$]+)$")


def parse_value_ref(text: str) -> Tuple[str, str]:
    """`@f:%v` -> ("f", "v")"""
    m = _REF_RE.match(text.strip())
    if m is None:
        raise UnknownSymbolError(f"malformed value reference {text!r} (expected @function:%value)")
    return m.group(1), m.group(2)


# --- preprocess ---

def cmd_preprocess(in_path: str, out_path: Optional[str]) -> str:
    """Parse, validate and preprocess; returns the printed module"""
    m = ensure_valid(parse_file(in_path))
    out = preprocess_module(m, strict=True)
    text = print_module(out)
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
        logger.info(f"✅ Wrote {out_path}")
    else:
        print(text, end="")
    return text


# --- analyze ---

def load_for_analysis(in_path: str, stats: StatsCollector) -> Module:
    """Parse, validate, preprocess if raw forms remain, validate again"""
    with stats.phase("parse"):
        m = parse_file(in_path)
    with stats.phase("verification"):
        ensure_valid(m)
    if any(f.has_raw_forms() for f in m.functions):
        with stats.phase("preprocess"):
            m = preprocess_module(m, validate=False)
        with stats.phase("verification"):
            ensure_valid(m)
    return m


def interval_dump(solver: InterprocSolver) -> Dict[str, str]:
    return {name: state.imap.dump() for name, state in solver.states.items()}


def summary_dump(solver: InterprocSolver) -> Tuple[List[str], List[str]]:
    summaries = [state.summary.render() for state in solver.states.values()]
    psi = solver.psi or solver.compute_reachable_summaries()
    return summaries, [psi.render_entry(e) for e in psi.endpoints()]


def cmd_analyze(
    in_path: str,
    client_name: str = "taint",
    config_path: Optional[str] = None,
    with_stats: bool = False,
    as_json: bool = False,
    dump_intervals: bool = False,
    dump_summaries: bool = False,
) -> Dict:
    """
    Run one client over a module and emit its report

    Returns:
        The JSON document (also built when printing human output)
    """
    stats = StatsCollector()
    m = load_for_analysis(in_path, stats)

    cfg: Optional[TaintConfig] = None
    if client_name == "taint":
        cfg = load_taint_config(config_path) if config_path else TaintConfig()
        cfg.resolve_sources(m)
        cfg.resolve_sinks(m)
    elif config_path:
        logger.warning(f"⚠️  --config is only used by the taint client; ignoring {config_path}")

    client = create_client(client_name, cfg)
    logger.info(f"🚀 Analyzing {in_path} with client '{client_name}'")
    with stats.phase("analysis"):
        solver = solve_module(m, client)
        if client_name == "taint":
            report = run_taint(m, cfg, solver)
        else:
            report = run_roarg(m, solver)

    with stats.phase("output"):
        extra: Dict = {}
        if dump_intervals:
            extra["intervals"] = interval_dump(solver)
        if dump_summaries:
            extra["summaries"], extra["psi"] = summary_dump(solver)
        stats_report = stats.report(in_path, client_name, m, solver) if with_stats else None
        doc = to_document("analyze", report, stats=stats_report, **extra)
        if as_json:
            emit_json(doc)
        else:
            if dump_intervals:
                for name, text in extra["intervals"].items():
                    print(f"@{name}:")
                    print(text)
            if dump_summaries:
                for line in extra["summaries"] + extra["psi"]:
                    print(line)
            if client_name == "taint":
                render_taint(report)
            else:
                render_roarg(report)

    if with_stats and not as_json:
        # taken again so the output phase is included
        render_stats(stats.report(in_path, client_name, m, solver))
    return doc


# --- query ---

def cmd_query(in_path: str, source: str, target: str, client_name: str = "taint", as_json: bool = False) -> QueryResult:
    """
    Answer one value-flow query `@f:%v` ⇝ `@g:%w`

    Raises:
        UnknownSymbolError: malformed reference, unknown function or value
    """
    f_name, v_name = parse_value_ref(source)
    g_name, w_name = parse_value_ref(target)
    m = load_for_analysis(in_path, StatsCollector())
    solver = solve_module(m, create_client(client_name))
    v_a: Value = solver.value(f_name, v_name)
    v_b: Value = solver.value(g_name, w_name)
    result = QueryResult(source=source, target=target, reachable=solver.query(f_name, v_a, g_name, v_b))
    if as_json:
        emit_json(to_document("query", result))
    else:
        render_query(result)
    return result


# --- bench ---

def bench_row(m: Module, client_name: str) -> BenchRow:
    stats = StatsCollector()
    with stats.phase("preprocess"):
        pre = preprocess_module(m, validate=False)
    with stats.phase("analysis"):
        solver = solve_module(pre, create_client(client_name))
        if client_name == "roarg":
            run_roarg(pre, solver)
    sizes = histogram(interval_set_sizes(solver))
    return BenchRow(
        instructions=instruction_count(m),
        functions=len(m),
        v_vertex=sum(s.imap.v_vertex for s in solver.states.values()),
        v_edge=sum(s.imap.v_edge for s in solver.states.values()),
        analysis_seconds=stats.timings["analysis"],
        peak_rss_mb=stats.peak_rss_mb,
        single_use_pct=use_count_histogram(pre).single_use_pct,
        median_interval_set=sizes.median,
    )


def run_bench(
    sizes: Optional[List[int]] = None,
    seed: Optional[int] = None,
    client_name: str = "taint",
    preset: str = "sparse",
) -> BenchReport:
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset '{preset}' (available: {', '.join(PRESETS)})")
    sizes = sizes or list(settings.bench_sizes)
    seed = settings.bench_seed if seed is None else seed
    report = BenchReport(client=client_name, preset=preset, seed=seed)
    for n in sizes:
        logger.info(f"🔁 bench: {n} instructions")
        m = generate_module(
            n,
            seed=seed,
            preset=preset,
            single_use_fraction=settings.bench_single_use_fraction,
            function_size=settings.bench_function_size,
        )
        report.rows.append(bench_row(m, client_name))
    return report


def cmd_bench(
    sizes: Optional[List[int]] = None,
    seed: Optional[int] = None,
    client_name: str = "taint",
    preset: str = "sparse",
    as_json: bool = False,
) -> BenchReport:
    report = run_bench(sizes, seed, client_name, preset)
    if as_json:
        emit_json(to_document("bench", report))
    else:
        render_bench(report)
    return report
