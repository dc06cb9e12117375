"""
Preprocessing passes: store -> dfi_store, call -> dfi_call

Every strong store and every pointer argument of a call gets a fresh
pointer version. Uses of the old pointer that the rewriting op strictly
dominates are renamed to the fresh version, so memory effects become
ordinary def-use chains. Uses outside the dominated region keep the old
name; no block arguments are threaded through joins.
"""

import logging
from typing import Dict, List, Optional, Set, Tuple

from app.config import settings
from app.ir.dominance import DominatorTree, instruction_positions, position_dominates, use_position
from app.ir.errors import ArityMismatchError, PreprocessError, UnknownSymbolError
from app.ir.model import Block, Function, Module, Operation, Value
from app.ir.validator import ensure_valid
from app.utils.parallel import run_parallel

logger = logging.getLogger(__name__)


class _Renamer:
    """Fresh names and dominance-scoped use rewriting for one function"""

    def __init__(self, f: Function):
        self.f = f
        self.tree = DominatorTree(f)
        self.positions = instruction_positions(f)
        self.names: Set[str] = {v.name for v in f.values()}

    def fresh(self, base: str, type: str) -> Value:
        k = 0
        while f"{base}{k}" in self.names:
            k += 1
        name = f"{base}{k}"
        self.names.add(name)
        return Value(name, type)

    def blocks(self) -> List[Block]:
        """Dominator-tree preorder, then unreachable blocks in source order"""
        ordered = self.tree.preorder()
        seen = {id(b) for b in ordered}
        return ordered + [b for b in self.f.blocks if id(b) not in seen]

    def rename_dominated(self, old: Value, new: Value, at: Operation) -> int:
        """Point every use of old strictly dominated by `at` to new"""
        here = self.positions[id(at)]
        kept: List[Tuple] = []
        moved = 0
        for user, index in old.uses:
            if user is not at and position_dominates(self.tree, here, use_position(user, self.positions)):
                if isinstance(user, Operation):
                    user.operands[index] = new
                else:
                    user.set_operand(index, new)
                new.uses.append((user, index))
                moved += 1
            else:
                kept.append((user, index))
        old.uses = kept
        return moved

    def attach(self, op: Operation, results: List[Value]) -> None:
        op.results = results
        for i, r in enumerate(results):
            r.def_kind = "result"
            r.index = i
            r.def_op = op
            r.block = op.block


def expand_stores(f: Function) -> Function:
    """
    Replace every store with a dfi_store producing a fresh pointer version

    Returns a new function; f is not modified. Functions without stores
    come back structurally identical.
    """
    g = f.clone()
    if not any(op.opcode == "store" for op in g.operations()):
        return g

    renamer = _Renamer(g)
    count = 0
    for block in renamer.blocks():
        for op in block.ops:
            if op.opcode != "store":
                continue
            pointer = op.operands[1]
            version = renamer.fresh(Function.pointer_origin(pointer).name, "ptr")
            op.opcode = "dfi_store"
            renamer.attach(op, [version])
            renamer.rename_dominated(pointer, version, op)
            count += 1

    logger.debug(f"@{g.name}: {count} store(s) -> dfi_store")
    return g


def _check_arity(site: Operation, m: Module) -> Tuple[List[str], Optional[str]]:
    sig = m.signature(site.callee)
    if sig is None:
        raise UnknownSymbolError(f"call to unknown function @{site.callee}")
    param_types, return_type = sig
    if len(site.operands) != len(param_types):
        raise ArityMismatchError(
            f"@{site.callee} takes {len(param_types)} argument(s), call passes {len(site.operands)}"
        )
    if return_type is None and site.results:
        raise ArityMismatchError(f"@{site.callee} returns nothing but the call binds a result")
    return param_types, return_type


def expand_calls(f: Function, m: Module) -> Function:
    """
    Replace every call with a dfi_call

    Results are [return value if the callee has one] followed by one
    fresh pointer per pointer argument, in argument order. A pointer
    passed twice is renamed to the version of its first occurrence.

    Raises:
        UnknownSymbolError: callee not defined or declared in m
        ArityMismatchError: argument count differs from the callee's
    """
    g = f.clone()
    if not any(op.opcode == "call" for op in g.operations()):
        return g

    renamer = _Renamer(g)
    count = 0
    for block in renamer.blocks():
        for op in block.ops:
            if op.opcode != "call":
                continue
            _, return_type = _check_arity(op, m)
            results = list(op.results)
            if return_type is not None and not results:
                results.append(renamer.fresh("r", return_type))

            firsts: Dict[int, Value] = {}
            renames: List[Tuple[Value, Value]] = []
            for arg in op.operands:
                if not arg.is_ptr:
                    continue
                version = renamer.fresh(Function.pointer_origin(arg).name, "ptr")
                results.append(version)
                if id(arg) not in firsts:
                    firsts[id(arg)] = version
                    renames.append((arg, version))

            op.opcode = "dfi_call"
            renamer.attach(op, results)
            for pointer, version in renames:
                renamer.rename_dominated(pointer, version, op)
            count += 1

    logger.debug(f"@{g.name}: {count} call(s) -> dfi_call")
    return g


def preprocess_function(f: Function, m: Module) -> Function:
    return expand_calls(expand_stores(f), m)


def preprocess_module(m: Module, strict: bool = False, validate: bool = True) -> Module:
    """
    Run both passes on every function of m

    Args:
        m: A validated module
        strict: Refuse input that already contains dfi_store / dfi_call
        validate: Validate the result

    Raises:
        PreprocessError: strict and dfi forms are present
        IRValidationError: the result does not validate
    """
    if strict and any(f.has_dfi_forms() for f in m.functions):
        raise PreprocessError("dfi forms present")

    functions = run_parallel(lambda f: preprocess_function(f, m), m.functions, settings.threads)
    out = Module(functions, list(m.externs.values()))
    if validate:
        ensure_valid(out)
    logger.info(f"✅ Preprocessed {len(out)} function(s)")
    return out
