# app/clients/taint.py
"""
Taint analysis client

Transfer rules over the preprocessed IR:
- dfi_store %v, %p -> %q : q -> v (the new version is tainted only by what was stored)
- add / mul            : r -> each operand
- load %p -> %v        : v -> p
- gep %p -> %q         : q -> p and p -> q (base and derived pointers share taint)
- dfi_call             : every result -> every argument (summaries refine this at solve time)

Sources are query subjects; sinks are reversed roots. Sources and sinks
come from a sidecar file:

    source @main %p
    sink @main op#4
"""

import logging
import re
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError

from app.clients.base import ClientAnalysis, Edge
from app.core.dft_engine import can_reach
from app.core.interproc import InterprocSolver, solve_module
from app.ir.errors import ConfigError
from app.ir.model import Function, Instruction, Module, Operation, Value
from app.models import SinkHit, TaintedValue, TaintReport

logger = logging.getLogger(__name__)

_SOURCE_RE = re.compile(r"^source\s+@([\w.$]+)\s+%([\w.$]+)$")
_SINK_RE = re.compile(r"^sink\s+@([\w.$]+)\s+op#(\d+)$")


class TaintSource(BaseModel):
    function: str = Field(min_length=1)
    value: str = Field(min_length=1)

    def __str__(self) -> str:
        return f"@{self.function}:%{self.value}"


class TaintSink(BaseModel):
    function: str = Field(min_length=1)
    op: int = Field(ge=0)

    def __str__(self) -> str:
        return f"@{self.function}:op#{self.op}"


class TaintConfig(BaseModel):
    sources: List[TaintSource] = Field(default_factory=list)
    sinks: List[TaintSink] = Field(default_factory=list)

    def resolve_sources(self, m: Module) -> List[Tuple[Function, Value]]:
        out = []
        for src in self.sources:
            f = _resolve_function(m, src.function, f"source {src}")
            v = f.value(src.value)
            if v is None:
                raise ConfigError(f"source {src}: no value %{src.value} in @{f.name}")
            out.append((f, v))
        return out

    def resolve_sinks(self, m: Module) -> List[Tuple[Function, int, Instruction]]:
        out = []
        for sink in self.sinks:
            f = _resolve_function(m, sink.function, f"sink {sink}")
            instructions = f.instructions()
            if sink.op >= len(instructions):
                raise ConfigError(
                    f"sink {sink}: @{f.name} has only {len(instructions)} instruction(s)"
                )
            out.append((f, sink.op, instructions[sink.op]))
        return out

    def sink_operands(self, f: Function) -> List[Value]:
        """Operands of every sink op in f, in config order"""
        instructions = f.instructions()
        out: List[Value] = []
        for sink in self.sinks:
            if sink.function != f.name or sink.op >= len(instructions):
                continue
            for v in instructions[sink.op].operands:
                if v not in out:
                    out.append(v)
        return out


def _resolve_function(m: Module, name: str, what: str) -> Function:
    f = m.get_function(name)
    if f is None:
        raise ConfigError(f"{what}: no function @{name} in module")
    return f


def parse_taint_config(text: str) -> TaintConfig:
    """
    Parse sidecar lines `source @f %v` / `sink @f op#K`

    Blank lines and lines starting with `#`, `//` or `;` are ignored.

    Raises:
        ConfigError: malformed line
    """
    sources: List[TaintSource] = []
    sinks: List[TaintSink] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("#", "//", ";")):
            continue
        try:
            m = _SOURCE_RE.match(line)
            if m:
                sources.append(TaintSource(function=m.group(1), value=m.group(2)))
                continue
            m = _SINK_RE.match(line)
            if m:
                sinks.append(TaintSink(function=m.group(1), op=int(m.group(2))))
                continue
        except ValidationError as e:
            raise ConfigError(f"line {lineno}: {e.errors()[0]['msg']}") from e
        raise ConfigError(f"line {lineno}: expected `source @f %v` or `sink @f op#K`, got {line!r}")
    return TaintConfig(sources=sources, sinks=sinks)


def load_taint_config(path: str) -> TaintConfig:
    """Read and parse a sidecar file; OSError propagates to the caller"""
    return parse_taint_config(Path(path).read_text(encoding="utf-8"))


class TaintClient(ClientAnalysis):
    """Forward taint flow encoded as reversed use->def edges"""

    def __init__(self, config: Optional[TaintConfig] = None):
        super().__init__()
        self.config = config or TaintConfig()

    def get_client_name(self) -> str:
        return "taint"

    def _transfer(self, op: Operation) -> Iterable[Edge]:
        code = op.opcode
        if code == "dfi_store":
            return [(op.results[0], op.operands[0])]
        if code in ("add", "mul"):
            return [(op.results[0], a) for a in op.operands]
        if code == "load":
            return [(op.results[0], op.operands[0])]
        if code == "gep":
            q, p = op.results[0], op.operands[0]
            return [(q, p), (p, q)]
        if code == "dfi_call":
            return [(r, a) for r in op.results for a in op.operands]
        return []

    def choose_roots(self, f: Function) -> List[Value]:
        roots = self.config.sink_operands(f)
        for v in f.exit_values():
            if v not in roots:
                roots.append(v)
        return roots


def run_taint(m: Module, cfg: TaintConfig, solved: Optional[InterprocSolver] = None) -> TaintReport:
    """
    Tainted values per source, and the sinks each source reaches

    A value is tainted by a source in the same function when the source
    reaches it through the labelled intervals. A sink operand is hit when
    the source reaches it, intra- or interprocedurally.

    Raises:
        ConfigError: source or sink does not resolve in m
    """
    sources = cfg.resolve_sources(m)
    sinks = cfg.resolve_sinks(m)
    solver = solved or solve_module(m, TaintClient(cfg))

    report = TaintReport(
        sources=[str(s) for s in cfg.sources],
        sinks=[str(s) for s in cfg.sinks],
    )
    if not sources:
        logger.info("⚠️  No taint sources configured; nothing is tainted")
        return report

    seen: Dict[Tuple[str, str], None] = {}
    for f, src in sources:
        im = solver.state(f.name).imap
        label = f"@{f.name}:%{src.name}"
        for v in f.values():
            if v is src or (f.name, v.name) in seen:
                continue
            if can_reach(im, src, v):
                seen[(f.name, v.name)] = None
                report.tainted.append(TaintedValue(function=f.name, value=v.name, source=label))

    for f, src in sources:
        label = f"@{f.name}:%{src.name}"
        for g, index, inst in sinks:
            for operand in inst.operands:
                if solver.query(f.name, src, g.name, operand):
                    report.sink_hits.append(
                        SinkHit(source=label, sink_function=g.name, sink_op=index, operand=operand.name)
                    )

    logger.info(f"✅ Taint: {len(report.tainted)} tainted value(s), {len(report.sink_hits)} sink hit(s)")
    return report
