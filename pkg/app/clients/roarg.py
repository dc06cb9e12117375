# app/clients/roarg.py
"""
Read-only argument analysis client

A pointer argument p of a dfi_call is modified at that call site if some
other argument can reach the call result standing for p (index O(p)).
The traversal follows pointer def-use chains and, for a dfi_store, both
the stored value and the pointer it renames.
"""

import logging
from typing import Iterable, List, Optional

from app.clients.base import ClientAnalysis, Edge
from app.core.dft_engine import can_reach
from app.core.interproc import InterprocSolver, solve_module
from app.ir.model import Function, Module, Operation, Value
from app.models import RoArgReport, RoArgVerdict

logger = logging.getLogger(__name__)


class RoArgClient(ClientAnalysis):

    def get_client_name(self) -> str:
        return "roarg"

    def _transfer(self, op: Operation) -> Iterable[Edge]:
        code = op.opcode
        if code == "dfi_store":
            q = op.results[0]
            return [(q, op.operands[0]), (q, op.operands[1])]
        if code == "gep":
            return [(op.results[0], op.operands[0])]
        if code == "load":
            return [(op.results[0], op.operands[0])]
        if code in ("add", "mul"):
            return [(op.results[0], a) for a in op.operands]
        if code == "dfi_call":
            return [(r, a) for r in op.results for a in op.operands]
        return []

    def choose_roots(self, f: Function) -> List[Value]:
        """Pointer results of every call site, then the function's exits"""
        roots: List[Value] = []
        for site in f.call_sites():
            offset = site.return_offset()
            for r in site.results[offset:]:
                if r not in roots:
                    roots.append(r)
        for v in f.exit_values():
            if v not in roots:
                roots.append(v)
        return roots


def site_verdicts(solver: InterprocSolver, f: Function, index: int, site: Operation) -> List[RoArgVerdict]:
    """
    One verdict per pointer argument of a single dfi_call

    p is modified when another argument reaches O(p) in the caller's
    labelled graph. The callee's summary pairs are edges of that graph, and
    so are aliases formed before the call (q reaching p through a gep).
    """
    im = solver.state(f.name).imap
    out = []
    for j in site.ptr_arg_positions():
        p = site.operands[j]
        slot = site.result_slot(j)
        result = site.results[slot]
        modified = False
        for i, q in enumerate(site.operands):
            if i == j or q is p:
                continue
            if can_reach(im, q, result):
                modified = True
                break
        out.append(RoArgVerdict(
            function=f.name,
            call=index,
            arg=j,
            callee=site.callee,
            verdict="modified" if modified else "read_only",
        ))
    return out


def run_roarg(m: Module, solved: Optional[InterprocSolver] = None) -> RoArgReport:
    """Verdict for every pointer argument of every call site in m"""
    solver = solved or solve_module(m, RoArgClient())
    report = RoArgReport()
    for f in m.functions:
        for index, site in enumerate(f.call_sites()):
            report.verdicts.extend(site_verdicts(solver, f, index, site))
    counts = report.counts()
    logger.info(f"✅ RoArg: {counts['modified']} modified, {counts['read_only']} read-only")
    return report
