"""
Reference implementations used only by the tests

- explicit:   plain BFS reachability and a Floyd-Warshall closure
- dominators: naive iterative dominator sets
- interp:     concrete interpreter for straight-line and branching code
- inline:     bounded inlining of dfi_call sites
- generators: seeded random graphs and modules

None of these import the interval engine or the interprocedural solver.
"""

from .dominators import naive_dominators
from .explicit import (
    ExplicitGraph, floyd_warshall_closure, oracle_reach, reachable_from, reaching, transitive_closure,
)
from .generators import random_call_module, random_digraph, random_forest, random_straight_line
from .inline import inline_expand
from .interp import InterpreterTrap, Outcome, interpret

__all__ = [
    "naive_dominators",
    "ExplicitGraph", "floyd_warshall_closure", "oracle_reach", "reachable_from", "reaching", "transitive_closure",
    "random_call_module", "random_digraph", "random_forest", "random_straight_line",
    "inline_expand",
    "InterpreterTrap", "Outcome", "interpret",
]
