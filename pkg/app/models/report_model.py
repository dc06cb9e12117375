from typing import Dict, List, Literal, Optional

from pydantic import Field, field_validator

from . import CamelModel

Verdict = Literal["modified", "read_only"]


# --- Statistics ---

class PhaseTimings(CamelModel):
    """Wall-clock seconds per phase"""
    parse: float = 0.0
    preprocess: float = 0.0
    analysis: float = 0.0
    verification: float = 0.0
    output: float = 0.0


class IntervalHistogram(CamelModel):
    """Distribution of |Π_v| over vertices with a non-empty interval set"""
    count: int = 0
    min: float = 0.0
    q1: float = 0.0
    median: float = 0.0
    q3: float = 0.0
    max: float = 0.0


class UseCountHistogram(CamelModel):
    """Fraction of SSA values with 0, 1, 2 and 3+ uses"""
    values: int = 0
    zero: float = 0.0
    one: float = 0.0
    two: float = 0.0
    three_or_more: float = 0.0

    @property
    def single_use_pct(self) -> float:
        return 100.0 * (self.zero + self.one)


class StatsReport(CamelModel):
    target: str
    client: str
    v_edge: int = 0
    v_vertex: int = 0
    phases: PhaseTimings = Field(default_factory=PhaseTimings)
    analysis_seconds: float = 0.0
    total_seconds: float = 0.0
    peak_rss_mb: float = 0.0
    interval_sets: IntervalHistogram = Field(default_factory=IntervalHistogram)
    use_counts: UseCountHistogram = Field(default_factory=UseCountHistogram)

    # --- Fixpoint counters ---
    interval_rounds: int = 0
    worklist_pops: int = 0
    propagations: int = 0
    psi_rounds: int = 0


# --- Taint ---

class TaintedValue(CamelModel):
    function: str
    value: str
    source: str

    def line(self) -> str:
        return f"@{self.function} %{self.value} <- {self.source}"


class SinkHit(CamelModel):
    source: str
    sink_function: str
    sink_op: int
    operand: str

    def line(self) -> str:
        return f"@{self.sink_function} op#{self.sink_op} %{self.operand}: tainted by {self.source}"


class TaintReport(CamelModel):
    client: Literal["taint"] = "taint"
    sources: List[str] = Field(default_factory=list)
    sinks: List[str] = Field(default_factory=list)
    tainted: List[TaintedValue] = Field(default_factory=list)
    sink_hits: List[SinkHit] = Field(default_factory=list)

    def tainted_names(self, function: Optional[str] = None) -> List[str]:
        return [t.value for t in self.tainted if function is None or t.function == function]


# --- Read-only arguments ---

class RoArgVerdict(CamelModel):
    function: str
    call: int
    arg: int
    callee: str
    verdict: Verdict

    def line(self) -> str:
        return f"@{self.function} call#{self.call} arg#{self.arg}: {self.verdict}"


class RoArgReport(CamelModel):
    client: Literal["roarg"] = "roarg"
    verdicts: List[RoArgVerdict] = Field(default_factory=list)

    def lines(self) -> List[str]:
        return [v.line() for v in self.verdicts]

    def counts(self) -> Dict[str, int]:
        out = {"modified": 0, "read_only": 0}
        for v in self.verdicts:
            out[v.verdict] += 1
        return out

    def verdict_of(self, function: str, call: int, arg: int) -> Optional[str]:
        for v in self.verdicts:
            if (v.function, v.call, v.arg) == (function, call, arg):
                return v.verdict
        return None


# --- Query ---

class QueryResult(CamelModel):
    source: str
    target: str
    reachable: bool

    @property
    def answer(self) -> str:
        return "reachable" if self.reachable else "unreachable"


# --- Bench ---

class BenchRow(CamelModel):
    instructions: int
    functions: int
    v_vertex: int
    v_edge: int
    analysis_seconds: float
    peak_rss_mb: float
    single_use_pct: float
    median_interval_set: float

    @field_validator("single_use_pct")
    @classmethod
    def check_pct(cls, v: float) -> float:
        if not 0.0 <= v <= 100.0:
            raise ValueError("single_use_pct must be a percentage")
        return v


class BenchReport(CamelModel):
    client: str
    preset: str
    seed: int
    rows: List[BenchRow] = Field(default_factory=list)
