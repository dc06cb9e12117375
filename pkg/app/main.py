# app/main.py
import logging
from typing import Callable, List, Optional

import typer
from rich.console import Console
from rich.logging import RichHandler

from app.cli import commands
from app.cli.render import render_error
from app.config import settings
from app.ir.errors import DfiError, FixpointLimitError
from app.utils.parallel import cleanup_executor

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_IO = 2
EXIT_FIXPOINT = 3

app = typer.Typer(
    name="dfi",
    help="Interval-based value-flow analysis over .dfir modules.",
    add_completion=False,
    no_args_is_help=True,
)


def setup_logging(verbose: bool = False) -> None:
    level = logging.INFO if verbose else getattr(logging, settings.log_level.upper(), logging.WARNING)
    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(levelname)s] %(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_time=False, show_level=False, show_path=False)],
        force=True,
    )


def run_command(action: Callable[[], object]) -> None:
    """
    Run a handler and map failures to exit codes

    0 success, 1 parse/validate/config/symbol errors, 2 I/O errors,
    3 fixpoint safety cap exceeded
    """
    try:
        action()
    except FixpointLimitError as e:
        logger.error(f"❌ {e}")
        render_error(str(e))
        raise typer.Exit(EXIT_FIXPOINT)
    except DfiError as e:
        logger.error(f"❌ {e}")
        render_error(str(e))
        raise typer.Exit(EXIT_INPUT)
    except OSError as e:
        logger.error(f"❌ {e}")
        render_error(str(e))
        raise typer.Exit(EXIT_IO)
    finally:
        cleanup_executor()


@app.callback()
def main(
    threads: Optional[int] = typer.Option(None, "--threads", "-j", min=1, help="Worker threads for per-function phases (DFI_THREADS)"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log progress to stderr"),
):
    if threads is not None:
        settings.threads = threads
    setup_logging(verbose)


@app.command()
def preprocess(
    in_path: str = typer.Argument(..., help="Input .dfir file"),
    out: Optional[str] = typer.Option(None, "--out", "-o", help="Output file (stdout if omitted)"),
):
    """Rewrite store/call into dfi_store/dfi_call."""
    run_command(lambda: commands.cmd_preprocess(in_path, out))


@app.command()
def analyze(
    in_path: str = typer.Argument(..., help="Input .dfir file"),
    client: str = typer.Option("taint", "--client", "-c", help="Client analysis: taint or roarg"),
    config: Optional[str] = typer.Option(None, "--config", help="Taint sidecar with `source @f %v` / `sink @f op#K` lines"),
    stats: bool = typer.Option(False, "--stats", help="Report #V-Edge, #V-Vertex, timings, memory and histograms"),
    json_out: bool = typer.Option(False, "--json", help="Emit one schema-checked JSON document"),
    dump_intervals: bool = typer.Option(False, "--dump-intervals", help="Print every vertex's interval set"),
    dump_summaries: bool = typer.Option(False, "--dump-summaries", help="Print value-flow summaries and reachable-function summaries"),
):
    """Solve the module and run a client analysis."""
    run_command(lambda: commands.cmd_analyze(
        in_path, client, config, stats, json_out, dump_intervals, dump_summaries
    ))


@app.command()
def query(
    in_path: str = typer.Argument(..., help="Input .dfir file"),
    source: str = typer.Option(..., "--from", help="Source value, @f:%v"),
    target: str = typer.Option(..., "--to", help="Target value, @g:%w"),
    client: str = typer.Option("taint", "--client", "-c", help="Client analysis whose value flow is queried"),
    json_out: bool = typer.Option(False, "--json", help="Emit one schema-checked JSON document"),
):
    """Answer whether a value flows to another, across functions if needed."""
    run_command(lambda: commands.cmd_query(in_path, source, target, client, json_out))


@app.command()
def bench(
    sizes: Optional[List[int]] = typer.Option(None, "--sizes", help="Instruction counts (repeatable); DFI_BENCH_SIZES by default"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Generator seed"),
    client: str = typer.Option("taint", "--client", "-c", help="Client analysis: taint or roarg"),
    preset: str = typer.Option("sparse", "--preset", help="sparse or dense-callgraph"),
    json_out: bool = typer.Option(False, "--json", help="Emit one schema-checked JSON document"),
):
    """Scaling benchmark on generated modules."""
    run_command(lambda: commands.cmd_bench(sizes or None, seed, client, preset, json_out))


if __name__ == "__main__":
    app()
