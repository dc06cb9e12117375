"""
Reversed depth-first-tree interval engine

Builds the client's use->def value-flow graph for one function, labels it
with DFT intervals from the client's reversed roots and merges interval
sets across non-tree edges until nothing changes. Reachability is then a
subsumption check between two interval sets.

Phases:
- 1: iterative DFS from the pseudo root (roots in client order), <s,e>
     timestamps per vertex, Π_v = {<s_v,e_v>}
- 2: classify non-tree edges by interval arithmetic (cross/back/forward)
- 3: cross edge -> merge Π_dst into the source and its tree ancestors;
     back edge -> merge Π_dst into every vertex of the source's SCC;
     repeated until no Π changes

The map can be extended later (new roots, new edges) which is how
interprocedural summaries are folded into a caller.
"""

import logging
from typing import (
    Callable, Dict, Hashable, Iterable, Iterator, List, Literal, Optional, Set, Tuple,
)

from app.config import settings
from app.core.intervals import EMPTY, Interval, IntervalSet, set_subsumes, set_subsumes_naive
from app.ir.errors import FixpointLimitError, UnknownSymbolError
from app.ir.model import Function, Instruction, Operation, Value

logger = logging.getLogger(__name__)

Vertex = Hashable
Edge = Tuple[Vertex, Vertex]
EdgeKind = Literal["tree", "cross", "back", "forward"]


def _label(v: Vertex) -> str:
    return repr(v) if isinstance(v, Value) else str(v)


class VfGraph:
    """Reversed value-flow graph: edges point from a use to the def it reads"""

    def __init__(self, function: Optional[Function] = None):
        self.function = function
        self.succ: Dict[Vertex, List[Vertex]] = {}
        self.roots: List[Vertex] = []
        self._edges: Set[Edge] = set()

    @property
    def vertices(self) -> List[Vertex]:
        return list(self.succ)

    def __contains__(self, v: Vertex) -> bool:
        return v in self.succ

    def add_vertex(self, v: Vertex) -> None:
        if v not in self.succ:
            self.succ[v] = []

    def add_edge(self, u: Vertex, w: Vertex) -> bool:
        if (u, w) in self._edges:
            return False
        self.add_vertex(u)
        self.add_vertex(w)
        self._edges.add((u, w))
        self.succ[u].append(w)
        return True

    def has_edge(self, u: Vertex, w: Vertex) -> bool:
        return (u, w) in self._edges

    def add_root(self, v: Vertex) -> None:
        if v not in self.succ:
            raise UnknownSymbolError(f"root {_label(v)} is not a vertex of the graph")
        if v not in self.roots:
            self.roots.append(v)

    def edges(self) -> Iterator[Edge]:
        for u, outs in self.succ.items():
            for w in outs:
                yield (u, w)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    @classmethod
    def from_edges(cls, edges: Iterable[Edge], roots: Iterable[Vertex] = (), vertices: Iterable[Vertex] = ()) -> "VfGraph":
        g = cls()
        for v in vertices:
            g.add_vertex(v)
        for u, w in edges:
            g.add_edge(u, w)
        for r in roots:
            g.add_vertex(r)
            g.add_root(r)
        return g


def build_graph(
    f: Function,
    client,
    call_edges: Optional[Callable[[Operation], Iterable[Edge]]] = None,
) -> VfGraph:
    """
    Build the client's reversed vf-graph of f

    Args:
        f: a preprocessed function
        client: ClientAnalysis supplying transfer() and choose_roots()
        call_edges: optional override for dfi_call edges (summary-derived)

    Raises:
        UnknownSymbolError: the client emitted an edge to a value outside f
    """
    g = VfGraph(function=f)
    for v in f.values():
        g.add_vertex(v)
    for inst in f.instructions():
        if call_edges is not None and isinstance(inst, Operation) and inst.opcode == "dfi_call":
            edges = call_edges(inst)
        else:
            edges = client.transfer(inst)
        for u, w in edges:
            if u not in g or w not in g:
                bad = u if u not in g else w
                raise UnknownSymbolError(f"client edge references {_label(bad)} outside @{f.name}")
            g.add_edge(u, w)
    for root in client.choose_roots(f):
        g.add_root(root)
    return g


def strongly_connected_components(vertices: Iterable[Vertex], succ: Callable[[Vertex], List[Vertex]]) -> List[List[Vertex]]:
    """Iterative Tarjan; components come out in reverse topological order"""
    index: Dict[Vertex, int] = {}
    low: Dict[Vertex, int] = {}
    on_stack: Set[Vertex] = set()
    stack: List[Vertex] = []
    out: List[List[Vertex]] = []
    counter = 0

    for root in vertices:
        if root in index:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        work = [(root, iter(succ(root)))]
        while work:
            v, it = work[-1]
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ(w))))
                    break
                if w in on_stack and index[w] < low[v]:
                    low[v] = index[w]
            else:
                work.pop()
                if work:
                    u = work[-1][0]
                    if low[v] < low[u]:
                        low[u] = low[v]
                if low[v] == index[v]:
                    component = []
                    while True:
                        x = stack.pop()
                        on_stack.discard(x)
                        component.append(x)
                        if x == v:
                            break
                    out.append(component)
    return out


class IntervalMap:
    """
    Per-vertex interval sets for one vf-graph, plus the DFT that produced
    them (parents, single intervals, edge classes) and visit counters.

    Unvisited vertices have Π = ∅.
    """

    def __init__(self, graph: VfGraph):
        self.graph = graph
        self.pi: Dict[Vertex, IntervalSet] = {}
        self.interval: Dict[Vertex, Interval] = {}
        self.parent: Dict[Vertex, Optional[Vertex]] = {}
        self.edge_kind: Dict[Edge, EdgeKind] = {}
        self.rounds = 0
        self._clock = 0
        self._visited_edges = 0
        self._merge_edges: List[Edge] = []
        self._scc_id: Dict[Vertex, int] = {}
        self._scc_members: List[List[Vertex]] = []
        self._scc_dirty = True

    # ------------------------------------------------------------------ #
    # Queries
    # ------------------------------------------------------------------ #

    @property
    def v_vertex(self) -> int:
        """#V-Vertex: vertices with a non-empty interval set"""
        return len(self.pi)

    @property
    def v_edge(self) -> int:
        """#V-Edge: distinct edges traversed out of visited vertices"""
        return self._visited_edges

    def is_visited(self, v: Vertex) -> bool:
        return v in self.pi

    def interval_set(self, v: Vertex) -> IntervalSet:
        if v not in self.graph:
            raise UnknownSymbolError(f"{_label(v)} is not a vertex of this function")
        return self.pi.get(v, EMPTY)

    def ancestors(self, v: Vertex) -> List[Vertex]:
        out = []
        p = self.parent.get(v)
        while p is not None:
            out.append(p)
            p = self.parent.get(p)
        return out

    def scc_of(self, v: Vertex) -> List[Vertex]:
        if self._scc_dirty:
            self._compute_scc()
        cid = self._scc_id.get(v)
        return [v] if cid is None else self._scc_members[cid]

    def edges_of_kind(self, kind: EdgeKind) -> List[Edge]:
        return [e for e, k in self.edge_kind.items() if k == kind]

    # ------------------------------------------------------------------ #
    # Phase 1 / 2
    # ------------------------------------------------------------------ #

    def extend(self, roots: Iterable[Vertex]) -> bool:
        """DFS from every unvisited root, continuing the timestamp clock"""
        grew = False
        fresh: List[Edge] = []
        for root in roots:
            if root not in self.graph:
                raise UnknownSymbolError(f"root {_label(root)} is not a vertex of this function")
            if root in self.pi:
                continue
            self._dfs(root, fresh)
            grew = True
        for edge in fresh:
            self._classify(edge)
        return grew

    def _dfs(self, root: Vertex, nontree: List[Edge]) -> None:
        succ = self.graph.succ
        start: Dict[Vertex, int] = {}
        t = self._clock
        start[root] = t
        self.parent[root] = None
        self.pi[root] = EMPTY
        t += 1
        stack = [(root, iter(succ[root]))]
        while stack:
            v, it = stack[-1]
            for w in it:
                self._visited_edges += 1
                if w not in self.pi:
                    self.parent[w] = v
                    self.pi[w] = EMPTY
                    self.edge_kind[(v, w)] = "tree"
                    start[w] = t
                    t += 1
                    stack.append((w, iter(succ[w])))
                    break
                nontree.append((v, w))
            else:
                stack.pop()
                iv = Interval(start[v], t)
                t += 1
                self.interval[v] = iv
                self.pi[v] = IntervalSet.single(iv.s, iv.e)
        self._clock = t
        self._scc_dirty = True

    def _classify(self, edge: Edge) -> EdgeKind:
        u, w = edge
        k, l = self.interval[u], self.interval[w]
        if l.e < k.s or k.e < l.s:
            kind: EdgeKind = "cross"
        elif l.s <= k.s and l.e >= k.e:
            kind = "back"
        else:
            kind = "forward"
        self.edge_kind[edge] = kind
        if kind != "forward":
            self._merge_edges.append(edge)
        if kind == "back":
            self._scc_dirty = True
        return kind

    def add_edge(self, u: Vertex, w: Vertex) -> bool:
        """Insert an edge after labelling; returns True if the graph grew"""
        if not self.graph.add_edge(u, w):
            return False
        if u in self.pi:
            self._visited_edges += 1
            if w not in self.pi:
                self.extend([w])
            self._classify((u, w))
            self._scc_dirty = True
        return True

    # ------------------------------------------------------------------ #
    # Phase 3
    # ------------------------------------------------------------------ #

    def _compute_scc(self) -> None:
        succ = self.graph.succ
        components = strongly_connected_components(list(self.pi), lambda v: succ[v])
        self._scc_id = {}
        self._scc_members = []
        for component in components:
            if len(component) == 1 and not self.graph.has_edge(component[0], component[0]):
                continue
            cid = len(self._scc_members)
            self._scc_members.append(component)
            for v in component:
                self._scc_id[v] = cid
        self._scc_dirty = False

    def _merge_up(self, v: Optional[Vertex], incoming: IntervalSet) -> bool:
        """Merge into v and its tree ancestors; stops at the first one already covering it"""
        changed = False
        while v is not None:
            current = self.pi[v]
            merged = current.merge(incoming)
            if merged is current:
                break
            self.pi[v] = merged
            changed = True
            v = self.parent[v]
        return changed

    def settle(self) -> bool:
        """Run the phase-3 merge loop to a fixpoint; True if any Π grew"""
        if self._scc_dirty:
            self._compute_scc()
        grew = False
        rounds = 0
        while True:
            rounds += 1
            if rounds > settings.max_fixpoint_rounds:
                raise FixpointLimitError(f"interval merge did not converge after {rounds - 1} rounds")
            changed = False
            pending: Dict[int, IntervalSet] = {}
            for u, w in self._merge_edges:
                if self.edge_kind[(u, w)] == "cross":
                    if self._merge_up(u, self.pi[w]):
                        changed = True
                else:
                    cid = self._scc_id.get(u)
                    if cid is None:
                        continue
                    pending[cid] = pending.get(cid, EMPTY).merge(self.pi[w])
            for cid, incoming in pending.items():
                for member in self._scc_members[cid]:
                    if self._merge_up(member, incoming):
                        changed = True
            if not changed:
                break
            grew = True
        self.rounds += rounds
        return grew

    # ------------------------------------------------------------------ #
    # Output
    # ------------------------------------------------------------------ #

    def dump(self) -> str:
        incoming: Dict[Vertex, List[str]] = {}
        for (u, w), kind in self.edge_kind.items():
            incoming.setdefault(w, []).append(kind)
        lines = []
        for v in self.graph.vertices:
            parent = self.parent.get(v)
            lines.append(
                f"{_label(v)}: {self.pi.get(v, EMPTY)} "
                f"parent={_label(parent) if parent is not None else '-'} "
                f"in=[{','.join(incoming.get(v, []))}]"
            )
        return "\n".join(lines)


def build_intervals(g: VfGraph) -> IntervalMap:
    """Label g from its roots and merge across non-tree edges to a fixpoint"""
    im = IntervalMap(g)
    im.extend(g.roots)
    im.settle()
    logger.debug(
        f"Labelled {im.v_vertex} vertices / {im.v_edge} edges in {im.rounds} round(s)"
    )
    return im


def can_reach(im: IntervalMap, v_i: Vertex, v_j: Vertex) -> bool:
    """
    v_i ⇝ v_j: value flows from v_i (def side) to v_j (use side), i.e.
    Π_{v_j} subsumes Π_{v_i} and both are non-empty.

    Raises:
        UnknownSymbolError: either vertex is not in the function
    """
    pi_i = im.interval_set(v_i)
    pi_j = im.interval_set(v_j)
    if not pi_i or not pi_j:
        return False
    if settings.fast_subsumption:
        return set_subsumes(pi_j, pi_i)
    return set_subsumes_naive(pi_j, pi_i)
