"""
Structural validator: types, arity, SSA dominance, branch arguments, use lists
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Set, Tuple

from app.ir.dominance import (
    DominatorTree, definition_position, instruction_positions, position_dominates, use_position,
)
from app.ir.errors import IRValidationError
from app.ir.model import Function, Module, Operation, Terminator, Value

# opcode -> (operand types, result types); None = variable
_FIXED_SHAPES: Dict[str, Tuple[Tuple[str, ...], Tuple[str, ...]]] = {
    "const": ((), ("int",)),
    "add": (("int", "int"), ("int",)),
    "mul": (("int", "int"), ("int",)),
    "alloca": ((), ("ptr",)),
    "load": (("ptr",), ("int",)),
    "store": (("int", "ptr"), ()),
    "dfi_store": (("int", "ptr"), ("ptr",)),
    "gep": (("ptr",), ("ptr",)),
}


@dataclass(frozen=True)
class Diagnostic:
    function: str
    message: str
    block: Optional[str] = None

    def __str__(self) -> str:
        where = f"@{self.function}" + (f" ^{self.block}" if self.block else "")
        return f"{where}: {self.message}"


class _FunctionChecker:
    def __init__(self, m: Module, f: Function):
        self.m = m
        self.f = f
        self.out: List[Diagnostic] = []

    def report(self, message: str, block: Optional[str] = None) -> None:
        self.out.append(Diagnostic(self.f.name, message, block))

    def run(self) -> List[Diagnostic]:
        f = self.f
        if not f.blocks:
            self.report("function has no blocks")
            return self.out
        self.check_single_definition()
        for b in f.blocks:
            for op in b.ops:
                self.check_operation(op, b.label)
            self.check_terminator(b.terminator, b.label)
        self.check_entry()
        self.check_dominance()
        self.check_uses()
        return self.out

    def check_single_definition(self) -> None:
        seen: Set[str] = set()
        for v in self.f.values():
            if v.name in seen:
                self.report(f"%{v.name} defined more than once")
            seen.add(v.name)

    def check_operation(self, op: Operation, label: str) -> None:
        shape = _FIXED_SHAPES.get(op.opcode)
        if shape is not None:
            operand_types, result_types = shape
            if len(op.operands) != len(operand_types):
                self.report(f"{op.opcode} expects {len(operand_types)} operand(s), got {len(op.operands)}", label)
            else:
                for i, (v, want) in enumerate(zip(op.operands, operand_types)):
                    if v.type != want:
                        self.report(f"{op.opcode} operand {i} (%{v.name}) must be {want}, got {v.type}", label)
            if len(op.results) != len(result_types):
                self.report(f"{op.opcode} expects {len(result_types)} result(s), got {len(op.results)}", label)
            else:
                for r, want in zip(op.results, result_types):
                    if r.type != want:
                        self.report(f"{op.opcode} result %{r.name} must be {want}, got {r.type}", label)
            if op.opcode == "const" and not isinstance(op.attrs.get("value"), int):
                self.report("const needs an integer literal", label)
            if op.opcode == "gep" and not isinstance(op.attrs.get("offset"), int):
                self.report("gep needs an integer offset", label)
            return
        self.check_call(op, label)

    def check_call(self, op: Operation, label: str) -> None:
        callee = op.callee
        sig = self.m.signature(callee) if callee else None
        if sig is None:
            self.report(f"call to unknown function @{callee}", label)
            return
        param_types, return_type = sig
        if len(op.operands) != len(param_types):
            self.report(f"@{callee} expects {len(param_types)} argument(s), got {len(op.operands)}", label)
            return
        for i, (v, want) in enumerate(zip(op.operands, param_types)):
            if v.type != want:
                self.report(f"argument {i} to @{callee} must be {want}, got {v.type}", label)
        expected = [return_type] if return_type else []
        if op.opcode == "dfi_call":
            expected += ["ptr"] * sum(1 for t in param_types if t == "ptr")
        got = [r.type for r in op.results]
        if op.opcode == "call" and not return_type and got:
            self.report(f"@{callee} returns nothing but the call has results", label)
        elif got != expected and not (op.opcode == "call" and not got):
            self.report(f"{op.opcode} @{callee} results {got} do not match {expected}", label)

    def check_terminator(self, term: Optional[Terminator], label: str) -> None:
        if term is None:
            self.report("block has no terminator", label)
            return
        if term.opcode == "return":
            ret = self.f.return_type
            if ret is None and term.value is not None:
                self.report("void function returns a value", label)
            elif ret is not None and term.value is None:
                self.report(f"return needs a {ret} value", label)
            elif ret is not None and term.value.type != ret:
                self.report(f"returned %{term.value.name} must be {ret}", label)
            return
        if term.opcode == "cond_br" and term.value is not None and term.value.type != "int":
            self.report("cond_br condition must be int", label)
        for target in term.targets:
            block = self.f.block(target.label)
            if block is None:
                self.report(f"branch to unknown block ^{target.label}", label)
                continue
            if len(target.args) != len(block.args):
                self.report(
                    f"^{target.label} takes {len(block.args)} argument(s), branch passes {len(target.args)}",
                    label,
                )
                continue
            for passed, param in zip(target.args, block.args):
                if passed.type != param.type:
                    self.report(
                        f"branch argument %{passed.name} is {passed.type}, ^{target.label} expects {param.type}",
                        label,
                    )

    def check_entry(self) -> None:
        entry = self.f.entry.label
        for b in self.f.blocks:
            if entry in b.successors():
                self.report(f"entry block ^{entry} has a predecessor", b.label)

    def check_dominance(self) -> None:
        tree = DominatorTree(self.f)
        positions = instruction_positions(self.f)
        for b in self.f.blocks:
            if not tree.is_reachable(b.label):
                continue
            for inst in b.instructions():
                use = use_position(inst, positions)
                for v in inst.operands:
                    if v.def_kind == "param":
                        continue
                    definition = definition_position(v, positions)
                    if definition is None or not position_dominates(tree, definition, use):
                        self.report(f"use of %{v.name} is not dominated by its definition", b.label)

    def check_uses(self) -> None:
        expected: Dict[int, List[Tuple[int, int]]] = {}
        for inst in self.f.instructions():
            for i, v in enumerate(inst.operands):
                expected.setdefault(id(v), []).append((id(inst), i))
        for v in self.f.values():
            stored = sorted((id(u), i) for u, i in v.uses)
            if stored != sorted(expected.get(id(v), [])):
                self.report(f"use list of %{v.name} is stale")


def validate(m: Module) -> List[Diagnostic]:
    """Return every structural problem in m; an empty list means m is valid"""
    out: List[Diagnostic] = []
    names: Set[str] = set()
    for f in m.functions:
        if f.name in names:
            out.append(Diagnostic(f.name, "duplicate function name"))
        names.add(f.name)
        out.extend(_FunctionChecker(m, f).run())
    return out


def ensure_valid(m: Module) -> Module:
    diagnostics = validate(m)
    if diagnostics:
        raise IRValidationError(diagnostics)
    return m
