"""
Core data models for interprocedural value-flow summaries
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional

from app.ir.model import Function, Operation


@dataclass(frozen=True, order=True)
class FlowPair:
    """Argument index ⇝ call-result index"""
    src: int
    dst: int

    def __str__(self) -> str:
        return f"{self.src}->{self.dst}"


@dataclass(frozen=True)
class Summary:
    """
    Value-flow summary S_f = S^R_f ∪ S^P_f of one function

    Result indices follow dfi_call numbering: the return value (if any)
    is index 0, then one result per pointer argument in argument order.
    """

    func: str
    returns: FrozenSet[FlowPair] = frozenset()
    pointers: FrozenSet[FlowPair] = frozenset()

    @property
    def pairs(self) -> FrozenSet[FlowPair]:
        return self.returns | self.pointers

    def __iter__(self):
        return iter(sorted(self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def covers(self, other: "Summary") -> bool:
        return other.returns <= self.returns and other.pointers <= self.pointers

    def render(self) -> str:
        r = ",".join(str(p) for p in sorted(self.returns))
        p = ",".join(str(p) for p in sorted(self.pointers))
        return f"@{self.func}: R{{{r}}} P{{{p}}}"

    def __str__(self) -> str:
        return self.render()


def result_slot(params_are_ptr: List[bool], returns_value: bool, arg_index: int) -> int:
    """O(p): result index of the pointer argument at arg_index"""
    offset = 1 if returns_value else 0
    return offset + sum(1 for is_ptr in params_are_ptr[:arg_index] if is_ptr)


def identity_pairs(f: Function) -> FrozenSet[FlowPair]:
    """I(p) ⇝ O(p) for every pointer parameter"""
    kinds = [p.is_ptr for p in f.params]
    returns_value = f.return_type is not None
    return frozenset(
        FlowPair(i, result_slot(kinds, returns_value, i)) for i, is_ptr in enumerate(kinds) if is_ptr
    )


def conservative_summary(name: str, param_types: List[str], return_type: Optional[str]) -> Summary:
    """Every argument ⇝ every result; used for callees without a body"""
    kinds = [t == "ptr" for t in param_types]
    returns_value = return_type is not None
    n_results = (1 if returns_value else 0) + sum(kinds)
    returns = frozenset(FlowPair(i, 0) for i in range(len(kinds))) if returns_value else frozenset()
    pointers = frozenset(
        FlowPair(i, d) for i in range(len(kinds)) for d in range(1 if returns_value else 0, n_results)
    )
    return Summary(name, returns, pointers)


def summary_edges(site: Operation, summary: Summary) -> List[tuple]:
    """Reversed edges result[dst] -> operand[src] justified by a callee summary"""
    out = []
    for pair in sorted(summary.pairs):
        if pair.src >= len(site.operands) or pair.dst >= len(site.results):
            continue
        out.append((site.results[pair.dst], site.operands[pair.src]))
    return out


@dataclass(frozen=True, order=True)
class Endpoint:
    """ε^i_f: the i-th argument of function f"""
    func: str
    index: int

    def __str__(self) -> str:
        return f"{self.func}#{self.index}"


@dataclass
class ReachableFunctionSummary:
    """Ψ: endpoint -> endpoints transitively receiving its value"""

    table: Dict[Endpoint, Dict[Endpoint, None]] = field(default_factory=dict)

    def get(self, endpoint: Endpoint) -> List[Endpoint]:
        return list(self.table.get(endpoint, {}))

    def add(self, endpoint: Endpoint, targets: Iterable[Endpoint]) -> bool:
        row = self.table.setdefault(endpoint, {})
        before = len(row)
        for t in targets:
            row.setdefault(t, None)
        return len(row) != before

    def endpoints(self) -> List[Endpoint]:
        return list(self.table)

    def render_entry(self, endpoint: Endpoint) -> str:
        return f"{endpoint} -> {{{', '.join(str(t) for t in self.get(endpoint))}}}"

    def render(self) -> str:
        return "\n".join(self.render_entry(e) for e in self.table)
