"""
In-memory data model of the .dfir SSA intermediate representation

Only top-level values are Values. Address-taken storage is reached
through ptr-typed Values; the preprocessing passes give every strong
store and every call a fresh pointer version so that memory effects
show up as plain def-use chains.
"""

from typing import Any, Dict, Iterator, List, Literal, Optional, Tuple, Union

ValueType = Literal["int", "ptr"]
Opcode = Literal[
    "const", "add", "mul", "alloca", "load", "store", "dfi_store", "gep", "call", "dfi_call"
]
TerminatorKind = Literal["return", "br", "cond_br"]
DefKind = Literal["param", "block_arg", "result"]

VALUE_TYPES: Tuple[str, ...] = ("int", "ptr")
OPCODES: Tuple[str, ...] = (
    "const", "add", "mul", "alloca", "load", "store", "dfi_store", "gep", "call", "dfi_call"
)
TERMINATORS: Tuple[str, ...] = ("return", "br", "cond_br")
RAW_FORMS = frozenset({"store", "call"})
DFI_FORMS = frozenset({"dfi_store", "dfi_call"})
CALL_FORMS = frozenset({"call", "dfi_call"})


class Value:
    """An SSA value: function parameter, block argument or operation result"""

    __slots__ = ("name", "type", "def_kind", "index", "block", "def_op", "uses")

    def __init__(self, name: str, type: ValueType, def_kind: DefKind = "result", index: int = 0):
        self.name = name
        self.type = type
        self.def_kind = def_kind
        # param / block-arg position, or result position for op results
        self.index = index
        self.block: Optional["Block"] = None
        self.def_op: Optional["Operation"] = None
        self.uses: List[Tuple["Instruction", int]] = []

    @property
    def is_ptr(self) -> bool:
        return self.type == "ptr"

    def __repr__(self) -> str:
        return f"%{self.name}"


class Operation:
    """A non-terminator instruction"""

    __slots__ = ("opcode", "operands", "results", "attrs", "block")

    def __init__(
        self,
        opcode: Opcode,
        operands: Optional[List[Value]] = None,
        results: Optional[List[Value]] = None,
        attrs: Optional[Dict[str, Any]] = None,
    ):
        self.opcode = opcode
        self.operands: List[Value] = list(operands or [])
        self.results: List[Value] = list(results or [])
        self.attrs: Dict[str, Any] = dict(attrs or {})
        self.block: Optional["Block"] = None
        for i, result in enumerate(self.results):
            result.def_kind = "result"
            result.index = i
            result.def_op = self

    @property
    def callee(self) -> Optional[str]:
        return self.attrs.get("callee")

    @property
    def is_call(self) -> bool:
        return self.opcode in CALL_FORMS

    def ptr_arg_positions(self) -> List[int]:
        """Operand positions holding pointers (call forms)"""
        return [i for i, v in enumerate(self.operands) if v.is_ptr]

    def return_offset(self) -> int:
        """1 if result 0 of a dfi_call is the callee's return value, else 0"""
        if self.opcode != "dfi_call":
            return len(self.results)
        return len(self.results) - len(self.ptr_arg_positions())

    def result_slot(self, arg_position: int) -> int:
        """Result index O(p) for the pointer argument at arg_position"""
        positions = self.ptr_arg_positions()
        if arg_position not in positions:
            raise ValueError(f"operand {arg_position} of {self.opcode} is not a pointer")
        return self.return_offset() + positions.index(arg_position)

    def pointer_argument_for(self, result: Value) -> Optional[Value]:
        """The pointer this result is a fresh version of, if any"""
        if self.opcode == "dfi_store":
            return self.operands[1]
        if self.opcode == "dfi_call":
            rank = result.index - self.return_offset()
            if rank < 0:
                return None
            return self.operands[self.ptr_arg_positions()[rank]]
        return None

    def __repr__(self) -> str:
        from app.ir.printer import format_instruction
        return format_instruction(self)


class BranchTarget:
    __slots__ = ("label", "args")

    def __init__(self, label: str, args: Optional[List[Value]] = None):
        self.label = label
        self.args: List[Value] = list(args or [])


class Terminator:
    """return / br / cond_br closing a block"""

    __slots__ = ("opcode", "value", "targets", "block")

    def __init__(
        self,
        opcode: TerminatorKind,
        value: Optional[Value] = None,
        targets: Optional[List[BranchTarget]] = None,
    ):
        self.opcode = opcode
        # returned value for return, condition for cond_br
        self.value = value
        self.targets: List[BranchTarget] = list(targets or [])
        self.block: Optional["Block"] = None

    @property
    def operands(self) -> List[Value]:
        flat = [self.value] if self.value is not None else []
        for target in self.targets:
            flat.extend(target.args)
        return flat

    @property
    def results(self) -> List[Value]:
        return []

    def set_operand(self, index: int, value: Value) -> None:
        if self.value is not None:
            if index == 0:
                self.value = value
                return
            index -= 1
        for target in self.targets:
            if index < len(target.args):
                target.args[index] = value
                return
            index -= len(target.args)
        raise IndexError(index)

    def __repr__(self) -> str:
        from app.ir.printer import format_instruction
        return format_instruction(self)


Instruction = Union[Operation, Terminator]


def set_operand(user: Instruction, index: int, value: Value) -> None:
    if isinstance(user, Terminator):
        user.set_operand(index, value)
    else:
        user.operands[index] = value


class Block:
    def __init__(self, label: str, args: Optional[List[Value]] = None):
        self.label = label
        self.function: Optional["Function"] = None
        self.args: List[Value] = []
        self.ops: List[Operation] = []
        self.terminator: Optional[Terminator] = None
        for arg in args or []:
            self.add_arg(arg)

    def add_arg(self, value: Value) -> Value:
        value.def_kind = "block_arg"
        value.index = len(self.args)
        value.block = self
        self.args.append(value)
        return value

    def append(self, op: Operation) -> Operation:
        op.block = self
        for result in op.results:
            result.block = self
        self.ops.append(op)
        return op

    def set_terminator(self, term: Terminator) -> Terminator:
        term.block = self
        self.terminator = term
        return term

    def instructions(self) -> List[Instruction]:
        items: List[Instruction] = list(self.ops)
        if self.terminator is not None:
            items.append(self.terminator)
        return items

    def successors(self) -> List[str]:
        if self.terminator is None:
            return []
        return [t.label for t in self.terminator.targets]

    def __repr__(self) -> str:
        return f"^{self.label}"


class Function:
    def __init__(
        self,
        name: str,
        params: Optional[List[Value]] = None,
        return_type: Optional[ValueType] = None,
    ):
        self.name = name
        self.params: List[Value] = []
        self.blocks: List[Block] = []
        self.return_type = return_type
        for param in params or []:
            self.add_param(param)

    def add_param(self, value: Value) -> Value:
        value.def_kind = "param"
        value.index = len(self.params)
        self.params.append(value)
        return value

    def add_block(self, block: Block) -> Block:
        block.function = self
        self.blocks.append(block)
        if len(self.blocks) == 1:
            for param in self.params:
                param.block = block
        return block

    @property
    def entry(self) -> Optional[Block]:
        return self.blocks[0] if self.blocks else None

    def block(self, label: str) -> Optional[Block]:
        for b in self.blocks:
            if b.label == label:
                return b
        return None

    @property
    def ptr_params(self) -> List[Value]:
        return [p for p in self.params if p.is_ptr]

    def values(self) -> List[Value]:
        """Every value in definition order: params, then per block args and results"""
        out = list(self.params)
        for b in self.blocks:
            out.extend(b.args)
            for op in b.ops:
                out.extend(op.results)
        return out

    def value(self, name: str) -> Optional[Value]:
        for v in self.values():
            if v.name == name:
                return v
        return None

    def operations(self) -> Iterator[Operation]:
        for b in self.blocks:
            yield from b.ops

    def instructions(self) -> List[Instruction]:
        """Ops and terminators in block order; op#K indexes this list"""
        out: List[Instruction] = []
        for b in self.blocks:
            out.extend(b.instructions())
        return out

    def call_sites(self) -> List[Operation]:
        """call / dfi_call ops in order; call#K indexes this list"""
        return [op for op in self.operations() if op.is_call]

    def return_values(self) -> List[Value]:
        out: List[Value] = []
        for b in self.blocks:
            t = b.terminator
            if t is not None and t.opcode == "return" and t.value is not None and t.value not in out:
                out.append(t.value)
        return out

    @staticmethod
    def pointer_origin(value: Value) -> Value:
        """Follow fresh pointer versions back to the pointer they rename"""
        seen = set()
        while value.def_op is not None and id(value) not in seen:
            seen.add(id(value))
            previous = value.def_op.pointer_argument_for(value)
            if previous is None:
                break
            value = previous
        return value

    def pointer_versions(self) -> Dict[Value, List[Value]]:
        """Origin pointer -> fresh versions (dfi_store / dfi_call results), in definition order"""
        origins: Dict[Value, Value] = {}
        versions: Dict[Value, List[Value]] = {}
        for v in self.values():
            op = v.def_op
            if op is None or op.opcode not in DFI_FORMS or not v.is_ptr:
                continue
            previous = op.pointer_argument_for(v)
            if previous is None:
                continue
            origin = origins.get(previous) or self.pointer_origin(previous)
            origins[v] = origin
            versions.setdefault(origin, []).append(v)
        return versions

    def exit_values(self) -> List[Value]:
        """Returned values, then every fresh version of a pointer parameter"""
        roots = list(self.return_values())
        versions = self.pointer_versions()
        for p in self.ptr_params:
            for v in versions.get(p, []):
                if v not in roots:
                    roots.append(v)
        return roots

    def clone(self, name: Optional[str] = None) -> "Function":
        """Deep copy with the same value names; use lists are rebuilt"""
        mapping: Dict[int, Value] = {}

        def fresh(v: Value) -> Value:
            copy = Value(v.name, v.type)
            mapping[id(v)] = copy
            return copy

        def mapped(v: Value) -> Value:
            return mapping[id(v)]

        g = Function(name or self.name, [fresh(p) for p in self.params], self.return_type)
        blocks = []
        for b in self.blocks:
            nb = Block(b.label, [fresh(a) for a in b.args])
            g.add_block(nb)
            blocks.append((b, nb))
            for op in b.ops:
                for r in op.results:
                    fresh(r)
        for b, nb in blocks:
            for op in b.ops:
                nb.append(Operation(
                    op.opcode,
                    [mapped(v) for v in op.operands],
                    [mapped(r) for r in op.results],
                    op.attrs,
                ))
            t = b.terminator
            if t is not None:
                nb.set_terminator(Terminator(
                    t.opcode,
                    mapped(t.value) if t.value is not None else None,
                    [BranchTarget(tg.label, [mapped(a) for a in tg.args]) for tg in t.targets],
                ))
        g.rebuild_uses()
        return g

    def has_raw_forms(self) -> bool:
        return any(op.opcode in RAW_FORMS for op in self.operations())

    def has_dfi_forms(self) -> bool:
        return any(op.opcode in DFI_FORMS for op in self.operations())

    def rebuild_uses(self) -> None:
        for v in self.values():
            v.uses = []
        for inst in self.instructions():
            for i, operand in enumerate(inst.operands):
                operand.uses.append((inst, i))

    def structure(self) -> tuple:
        """Name-based structural form used for equality checks"""
        blocks = []
        for b in self.blocks:
            ops = tuple(
                (
                    op.opcode,
                    tuple(v.name for v in op.operands),
                    tuple((r.name, r.type) for r in op.results),
                    tuple(sorted(op.attrs.items())),
                )
                for op in b.ops
            )
            t = b.terminator
            term = None
            if t is not None:
                term = (
                    t.opcode,
                    t.value.name if t.value is not None else None,
                    tuple((tg.label, tuple(a.name for a in tg.args)) for tg in t.targets),
                )
            blocks.append((b.label, tuple((a.name, a.type) for a in b.args), ops, term))
        return (
            self.name,
            tuple((p.name, p.type) for p in self.params),
            self.return_type,
            tuple(blocks),
        )

    def __repr__(self) -> str:
        return f"@{self.name}"


class ExternDecl:
    """Signature of a callee defined outside the module"""

    def __init__(self, name: str, param_types: List[ValueType], return_type: Optional[ValueType] = None):
        self.name = name
        self.param_types = list(param_types)
        self.return_type = return_type

    def structure(self) -> tuple:
        return (self.name, tuple(self.param_types), self.return_type)


class Module:
    def __init__(self, functions: Optional[List[Function]] = None, externs: Optional[List[ExternDecl]] = None):
        self.functions: List[Function] = list(functions or [])
        self.externs: Dict[str, ExternDecl] = {}
        for ext in externs or []:
            self.externs[ext.name] = ext

    def get_function(self, name: str) -> Optional[Function]:
        for f in self.functions:
            if f.name == name:
                return f
        return None

    def is_external(self, name: str) -> bool:
        return name in self.externs and self.get_function(name) is None

    def signature(self, name: str) -> Optional[Tuple[List[ValueType], Optional[ValueType]]]:
        """(param types, return type) of a defined or external function"""
        f = self.get_function(name)
        if f is not None:
            return [p.type for p in f.params], f.return_type
        ext = self.externs.get(name)
        if ext is not None:
            return list(ext.param_types), ext.return_type
        return None

    def structure(self) -> tuple:
        return (
            tuple(f.structure() for f in self.functions),
            tuple(sorted(e.structure() for e in self.externs.values())),
        )

    def __len__(self) -> int:
        return len(self.functions)
