"""
Interprocedural value-flow solver
- Per-function summaries S_f = S^R_f ∪ S^P_f
- Two-phase summary propagation into callers
- FIFO worklist to a fixpoint (recursion included)
- Reachable-function summaries Ψ and the two-stage cross-function query
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Deque, Dict, List, Optional, Set

import networkx as nx

from app.config import settings
from app.core.dft_engine import IntervalMap, VfGraph, build_graph, build_intervals, can_reach
from app.core.models import (
    Endpoint, FlowPair, ReachableFunctionSummary, Summary,
    conservative_summary, identity_pairs, result_slot, summary_edges,
)
from app.ir.errors import ArityMismatchError, FixpointLimitError, PreprocessError, UnknownSymbolError
from app.ir.model import Function, Module, Operation, Value
from app.utils.parallel import run_parallel

logger = logging.getLogger(__name__)


def summary_roots(f: Function) -> List[Value]:
    """Reversed roots every client needs for summaries"""
    return f.exit_values()


def compute_summary(f: Function, im: IntervalMap, roots: List[Value]) -> Summary:
    """
    Summarize f from its labelled interval map

    S^R: I(p) ⇝ 0 for every parameter reaching a returned value.
    S^P: for every root τ that is a fresh version of a pointer parameter,
    every parameter p and pointer parameter k (p ≠ k) that both reach τ
    give I(p) ⇝ O(k); plus I(p) ⇝ O(p) for every pointer parameter. A
    pointer version counts as reached by the pointer it renames. Returned
    values only feed S^R.

    Args:
        f: The function
        im: Its interval map
        roots: Reversed roots τ considered for S^P
    """
    kinds = [p.is_ptr for p in f.params]
    returns_value = f.return_type is not None

    returns: Set[FlowPair] = set()
    if returns_value:
        rets = f.return_values()
        for i, p in enumerate(f.params):
            if any(can_reach(im, p, r) for r in rets):
                returns.add(FlowPair(i, 0))

    origin: Dict[Value, Value] = {}
    versions_of = f.pointer_versions()
    for pointer in f.ptr_params:
        for v in versions_of.get(pointer, []):
            origin[v] = pointer

    pointers: Set[FlowPair] = set(identity_pairs(f))
    for tau in roots:
        if tau not in origin:
            continue
        reaching = [
            i for i, p in enumerate(f.params)
            if origin.get(tau) is p or can_reach(im, p, tau)
        ]
        for i in reaching:
            for k in reaching:
                if k != i and kinds[k]:
                    pointers.add(FlowPair(i, result_slot(kinds, returns_value, k)))

    return Summary(f.name, frozenset(returns), frozenset(pointers))


@dataclass
class FunctionState:
    function: Function
    graph: VfGraph
    imap: IntervalMap
    summary: Summary
    roots: List[Value]


class InterprocSolver:
    """
    Central solver running the worklist algorithm over a module

    Responsibilities:
    - Build each function's vf-graph and interval map
    - Recompute summaries and propagate them to callers
    - Compute reachable-function summaries Ψ after convergence
    - Answer intra- and interprocedural reachability queries
    """

    def __init__(self, module: Module, client):
        self.module = module
        self.client = client
        self.states: Dict[str, FunctionState] = {}
        self.call_graph = nx.DiGraph()
        self.psi: Optional[ReachableFunctionSummary] = None
        self._external: Dict[str, Summary] = {}
        self._order = {f.name: i for i, f in enumerate(module.functions)}

        # Counters reported by --stats
        self.worklist_pops = 0
        self.propagations = 0
        self.psi_rounds = 0

        for f in module.functions:
            if f.has_raw_forms():
                raise PreprocessError(f"@{f.name} still has store/call ops; preprocess the module first")
        for f in module.functions:
            self.call_graph.add_node(f.name)
        for f in module.functions:
            for site in f.call_sites():
                if self.module.get_function(site.callee) is not None:
                    self.call_graph.add_edge(f.name, site.callee)

    # ------------------------------------------------------------------ #
    # Summaries of callees
    # ------------------------------------------------------------------ #

    def callee_summary(self, name: str) -> Summary:
        state = self.states.get(name)
        if state is not None:
            return state.summary
        if name not in self._external:
            sig = self.module.signature(name)
            if sig is None:
                raise UnknownSymbolError(f"call to unknown function @{name}")
            logger.info(f"⚠️  @{name} has no body; using a conservative summary")
            self._external[name] = conservative_summary(name, *sig)
        return self._external[name]

    def _call_edges(self, site: Operation):
        summary = self.callee_summary(site.callee)
        self._check_arity(site, summary)
        return summary_edges(site, summary)

    @staticmethod
    def _check_arity(site: Operation, summary: Summary) -> None:
        for pair in summary.pairs:
            if pair.src >= len(site.operands) or pair.dst >= len(site.results):
                raise ArityMismatchError(
                    f"call to @{site.callee} has {len(site.operands)} argument(s) / "
                    f"{len(site.results)} result(s); summary pair {pair} does not fit"
                )

    def callers(self, name: str) -> List[str]:
        return sorted(self.call_graph.predecessors(name), key=self._order.get)

    # ------------------------------------------------------------------ #
    # Algorithm
    # ------------------------------------------------------------------ #

    def _build_state(self, f: Function) -> FunctionState:
        graph = build_graph(f, self.client, call_edges=self._call_edges)
        roots = summary_roots(f)
        for r in roots:
            graph.add_root(r)
        imap = build_intervals(graph)
        return FunctionState(f, graph, imap, self.states[f.name].summary, roots)

    def initialize(self) -> None:
        functions = self.module.functions
        # identity pairs hold for every summary, so they seed the call edges
        for f in functions:
            seed = Summary(f.name, frozenset(), identity_pairs(f))
            self.states[f.name] = FunctionState(f, VfGraph(f), IntervalMap(VfGraph(f)), seed, [])
        built = run_parallel(self._build_state, functions, settings.threads)
        for state in built:
            self.states[state.function.name] = state

    def propagate_summary(self, summary: Summary, caller: str) -> bool:
        """
        Fold a callee summary into every call site of it in caller

        Phase 1 labels each actual argument from a fresh reversed root;
        phase 2 adds result -> actual and merges the actual's interval
        set into the result and its ancestors. Returns True if any of the
        caller's interval sets grew.
        """
        state = self.states[caller]
        im = state.imap
        changed = False
        for site in state.function.call_sites():
            if site.callee != summary.func:
                continue
            self._check_arity(site, summary)
            for pair in sorted(summary.pairs):
                actual = site.operands[pair.src]
                result = site.results[pair.dst]
                if im.is_visited(result) and not im.is_visited(actual):
                    im.extend([actual])
                    changed = True
                if im.add_edge(result, actual) and im.is_visited(result):
                    changed = True
        if im.settle():
            changed = True
        self.propagations += 1
        return changed

    def solve(self) -> "InterprocSolver":
        """Worklist loop: recompute S_f, propagate to callers on change"""
        logger.info(f"🚀 Solving {len(self.module.functions)} function(s) with client '{self.client.client_name}'")
        self.initialize()

        worklist: Deque[str] = deque(f.name for f in self.module.functions)
        queued: Set[str] = set(worklist)
        limit = settings.max_fixpoint_rounds * max(1, len(worklist))

        while worklist:
            self.worklist_pops += 1
            if self.worklist_pops > limit:
                raise FixpointLimitError(f"worklist did not drain after {limit} pops")
            name = worklist.popleft()
            queued.discard(name)
            state = self.states[name]

            computed = compute_summary(state.function, state.imap, state.roots)
            merged = Summary(
                name,
                state.summary.returns | computed.returns,
                state.summary.pointers | computed.pointers,
            )
            if merged == state.summary:
                continue
            if settings.check_monotonic:
                assert merged.covers(state.summary), f"summary of @{name} shrank"
            state.summary = merged
            logger.debug(f"🔁 {merged.render()}")

            for caller in self.callers(name):
                self.propagate_summary(merged, caller)
                if caller not in queued:
                    worklist.append(caller)
                    queued.add(caller)

        logger.info(
            f"✅ Worklist drained after {self.worklist_pops} pop(s), {self.propagations} propagation(s)"
        )
        return self

    # ------------------------------------------------------------------ #
    # Reachable-function summaries
    # ------------------------------------------------------------------ #

    def _internal_sites(self, f: Function) -> List[Operation]:
        return [s for s in f.call_sites() if s.callee in self.states]

    def compute_reachable_summaries(self) -> ReachableFunctionSummary:
        """Ψ(ε) for every endpoint, propagated to callers until stable"""
        for state in self.states.values():
            actuals = [a for site in self._internal_sites(state.function) for a in site.operands]
            state.imap.extend(actuals)
            state.imap.settle()

        direct: Dict[Endpoint, List[Endpoint]] = {}
        for f in self.module.functions:
            im = self.states[f.name].imap
            sites = self._internal_sites(f)
            for i, p in enumerate(f.params):
                row: Dict[Endpoint, None] = {}
                for site in sites:
                    for j, actual in enumerate(site.operands):
                        if can_reach(im, p, actual):
                            row.setdefault(Endpoint(site.callee, j), None)
                direct[Endpoint(f.name, i)] = list(row)

        psi = ReachableFunctionSummary()
        for endpoint in direct:
            psi.table[endpoint] = {}

        worklist: Deque[str] = deque(f.name for f in self.module.functions)
        queued: Set[str] = set(worklist)
        limit = settings.max_fixpoint_rounds * max(1, len(worklist))
        while worklist:
            self.psi_rounds += 1
            if self.psi_rounds > limit:
                raise FixpointLimitError(f"Ψ propagation did not converge after {limit} rounds")
            name = worklist.popleft()
            queued.discard(name)
            f = self.states[name].function
            changed = False
            for i in range(len(f.params)):
                endpoint = Endpoint(name, i)
                before = set(psi.table[endpoint])
                targets: List[Endpoint] = list(direct[endpoint])
                for d in direct[endpoint]:
                    targets.extend(psi.get(d))
                if psi.add(endpoint, targets):
                    changed = True
                    if settings.check_monotonic:
                        assert before <= set(psi.table[endpoint]), f"Ψ({endpoint}) shrank"
            if changed:
                for caller in self.callers(name):
                    if caller not in queued:
                        worklist.append(caller)
                        queued.add(caller)

        self.psi = psi
        logger.info(f"✅ Ψ stable after {self.psi_rounds} round(s)")
        return psi

    # ------------------------------------------------------------------ #
    # Queries
    # ------------------------------------------------------------------ #

    def state(self, name: str) -> FunctionState:
        state = self.states.get(name)
        if state is None:
            raise UnknownSymbolError(f"unknown function @{name}")
        return state

    def value(self, func: str, name: str) -> Value:
        v = self.state(func).function.value(name)
        if v is None:
            raise UnknownSymbolError(f"unknown value %{name} in @{func}")
        return v

    def query(self, f: str, v_a: Value, g: str, v_b: Value) -> bool:
        """
        v_a (in f) ⇝ v_b (in g)

        Same function: plain can_reach. Otherwise stage 1 collects the
        callee endpoints of f that v_a reaches, stage 2 looks for an
        endpoint of g in those endpoints or their Ψ from which v_b is
        reachable inside g.
        """
        source = self.state(f)
        target = self.state(g)
        if f == g:
            return can_reach(source.imap, v_a, v_b)
        if self.psi is None:
            self.compute_reachable_summaries()
        if not source.imap.interval_set(v_a) or not target.imap.interval_set(v_b):
            return False

        stage1: Dict[Endpoint, None] = {}
        for site in self._internal_sites(source.function):
            for j, actual in enumerate(site.operands):
                if can_reach(source.imap, v_a, actual):
                    stage1.setdefault(Endpoint(site.callee, j), None)

        params = target.function.params
        for endpoint in stage1:
            for candidate in [endpoint] + self.psi.get(endpoint):
                if candidate.func != g:
                    continue
                if can_reach(target.imap, params[candidate.index], v_b):
                    return True
        return False


def solve_module(m: Module, client) -> InterprocSolver:
    """Run the interprocedural worklist algorithm; returns the solved state"""
    return InterprocSolver(m, client).solve()


def propagate_summary(summary: Summary, caller: Function, state: InterprocSolver) -> bool:
    return state.propagate_summary(summary, caller.name)


def compute_reachable_summaries(m: Module, state: InterprocSolver) -> ReachableFunctionSummary:
    return state.compute_reachable_summaries()


def query_interproc(f: str, v_a: Value, g: str, v_b: Value, state: InterprocSolver) -> bool:
    return state.query(f, v_a, g, v_b)
