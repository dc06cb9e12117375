"""
Dominator tree over a function's control-flow graph
"""

from typing import Dict, List, Optional, Tuple

import networkx as nx

from app.ir.model import Block, Function, Instruction, Terminator, Value


def cfg_graph(f: Function) -> nx.DiGraph:
    g = nx.DiGraph()
    for b in f.blocks:
        g.add_node(b.label)
    for b in f.blocks:
        for succ in b.successors():
            if f.block(succ) is not None:
                g.add_edge(b.label, succ)
    return g


class DominatorTree:
    """
    Immediate dominators of reachable blocks plus pre/post numbering of
    the tree, so dominance is an interval containment check.
    """

    def __init__(self, f: Function):
        self.function = f
        self.idom: Dict[str, str] = {}
        self.children: Dict[str, List[str]] = {b.label: [] for b in f.blocks}
        self._pre: Dict[str, int] = {}
        self._post: Dict[str, int] = {}
        if f.entry is None:
            return

        entry = f.entry.label
        self.idom = dict(nx.immediate_dominators(cfg_graph(f), entry))
        order = {b.label: i for i, b in enumerate(f.blocks)}
        for node, parent in sorted(self.idom.items(), key=lambda kv: order[kv[0]]):
            if node != parent:
                self.children[parent].append(node)

        clock = 0
        stack: List[Tuple[str, int]] = [(entry, 0)]
        self._pre[entry] = clock
        while stack:
            node, i = stack.pop()
            kids = self.children[node]
            if i < len(kids):
                stack.append((node, i + 1))
                clock += 1
                self._pre[kids[i]] = clock
                stack.append((kids[i], 0))
            else:
                clock += 1
                self._post[node] = clock

    def is_reachable(self, label: str) -> bool:
        return label in self._pre

    def dominates(self, a: str, b: str) -> bool:
        """Block a dominates block b (reflexive)"""
        if a not in self._pre or b not in self._pre:
            return False
        return self._pre[a] <= self._pre[b] and self._post[a] >= self._post[b]

    def strictly_dominates(self, a: str, b: str) -> bool:
        return a != b and self.dominates(a, b)

    def preorder(self) -> List[Block]:
        labels = sorted(self._pre, key=self._pre.get)
        return [self.function.block(label) for label in labels]


def instruction_positions(f: Function) -> Dict[int, Tuple[str, int]]:
    """id(instruction) -> (block label, index); terminators sit after the last op"""
    positions: Dict[int, Tuple[str, int]] = {}
    for b in f.blocks:
        for i, inst in enumerate(b.instructions()):
            positions[id(inst)] = (b.label, i)
    return positions


def definition_position(v: Value, positions: Dict[int, Tuple[str, int]]) -> Optional[Tuple[str, int]]:
    if v.block is None:
        return None
    if v.def_op is None:
        return (v.block.label, -1)
    return positions.get(id(v.def_op))


def position_dominates(
    tree: DominatorTree, definition: Tuple[str, int], use: Tuple[str, int], strict: bool = True
) -> bool:
    """A program point dominates another (same block: earlier index)"""
    (db, di), (ub, ui) = definition, use
    if db == ub:
        return di < ui if strict else di <= ui
    return tree.strictly_dominates(db, ub)


def use_position(user: Instruction, positions: Dict[int, Tuple[str, int]]) -> Tuple[str, int]:
    if isinstance(user, Terminator) and user.block is not None:
        return (user.block.label, len(user.block.ops))
    return positions[id(user)]
