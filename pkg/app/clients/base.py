# app/clients/base.py
"""
Base class for client analyses plugged into the DFT engine
"""

import logging
from abc import ABC, abstractmethod
from typing import Iterable, List, Tuple

from app.ir.errors import UnknownSymbolError
from app.ir.model import Function, Instruction, Operation, Terminator, Value

Edge = Tuple[Value, Value]


class ClientAnalysis(ABC):
    """
    Base class for all client analyses

    Provides:
    - Block-argument edges at branches (the meet at join points)
    - Edge sanity checks against the op's own operands and results
    - Default reversed roots (function exits)

    Subclasses supply the per-opcode transfer rules.
    """

    def __init__(self):
        self.client_name = self.get_client_name()
        self.logger = logging.getLogger(f"client.{self.client_name}")

    @abstractmethod
    def get_client_name(self) -> str:
        """Return client name (must match the registry key)"""
        pass

    @abstractmethod
    def _transfer(self, op: Operation) -> Iterable[Edge]:
        """
        Reversed use->def edges for one non-terminator op

        Args:
            op: Operation in preprocessed form

        Returns:
            Edges (use, def) over op's own operands and results
        """
        pass

    def transfer(self, inst: Instruction) -> List[Edge]:
        """
        Edges for any instruction

        This is the PUBLIC method called by the engine
        """
        if isinstance(inst, Terminator):
            return self._branch_edges(inst)
        edges = list(self._transfer(inst))
        own = {id(v) for v in inst.operands} | {id(v) for v in inst.results}
        for u, w in edges:
            if id(u) not in own or id(w) not in own:
                raise UnknownSymbolError(f"{self.client_name}: edge {u!r}->{w!r} leaves {inst.opcode}")
        return edges

    def _branch_edges(self, term: Terminator) -> List[Edge]:
        """Block parameter <- value passed by the branch"""
        function = term.block.function if term.block is not None else None
        if function is None:
            return []
        edges: List[Edge] = []
        for target in term.targets:
            dest = function.block(target.label)
            if dest is None:
                continue
            for param, passed in zip(dest.args, target.args):
                edges.append((param, passed))
        return edges

    def choose_roots(self, f: Function) -> List[Value]:
        """Reversed roots T_f; defaults to the function's exits"""
        return f.exit_values()
