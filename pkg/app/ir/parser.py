"""
Parser for the .dfir textual SSA form

    # comment
    extern @sink(int)
    func @f(%a: int, %p: ptr) -> int {
    ^entry:
      %v = load %p : int
      %r = add %v, 3 : int
      return %r
    }

Inline integer literals are desugared into explicit const operations.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from app.ir.errors import DuplicateValueError, IRSyntaxError, UseBeforeDefError
from app.ir.model import (
    OPCODES, TERMINATORS, VALUE_TYPES,
    Block, BranchTarget, ExternDecl, Function, Module, Operation, Terminator, Value,
)

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(
    r"""
     (?P<ws>\s+)
    |(?P<value>%[A-Za-z0-9_.]+)
    |(?P<symbol>@[A-Za-z0-9_.]+)
    |(?P<label>\^[A-Za-z0-9_.]+)
    |(?P<arrow>->)
    |(?P<int>-?\d+)
    |(?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    |(?P<punct>[(),:={}])
    """,
    re.VERBOSE,
)
_NAME_RE = re.compile(r"%([A-Za-z0-9_.]+)")


@dataclass
class _Token:
    kind: str
    text: str
    column: int


@dataclass
class _RawOperand:
    name: Optional[str]
    literal: Optional[int]
    line: int
    column: int


@dataclass
class _RawInst:
    opcode: str
    line: int
    results: List[Tuple[str, int]] = field(default_factory=list)
    types: Optional[List[str]] = None
    operands: List[_RawOperand] = field(default_factory=list)
    targets: List[Tuple[str, List[_RawOperand], int]] = field(default_factory=list)
    attrs: Dict[str, object] = field(default_factory=dict)


@dataclass
class _RawBlock:
    label: str
    line: int
    args: List[Tuple[str, str, int]] = field(default_factory=list)
    insts: List[_RawInst] = field(default_factory=list)


@dataclass
class _RawFunction:
    name: str
    line: int
    params: List[Tuple[str, str, int]] = field(default_factory=list)
    return_type: Optional[str] = None
    blocks: List[_RawBlock] = field(default_factory=list)


class _Cursor:
    """Token cursor over one source line"""

    def __init__(self, text: str, line: int):
        self.line = line
        self.tokens: List[_Token] = []
        self.pos = 0
        self.end_column = len(text) + 1
        i = 0
        while i < len(text):
            m = _TOKEN_RE.match(text, i)
            if m is None:
                raise IRSyntaxError(f"unexpected character {text[i]!r}", line, i + 1)
            if m.lastgroup != "ws":
                self.tokens.append(_Token(m.lastgroup, m.group(), i + 1))
            i = m.end()

    def peek(self) -> Optional[_Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def column(self) -> int:
        tok = self.peek()
        return tok.column if tok else self.end_column

    def fail(self, message: str, expected: Optional[str] = None) -> IRSyntaxError:
        return IRSyntaxError(message, self.line, self.column(), expected)

    def take(self, kind: str, expected: str) -> _Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            found = f"'{tok.text}'" if tok else "end of line"
            raise self.fail(f"unexpected {found}", expected)
        self.pos += 1
        return tok

    def punct(self, text: str) -> _Token:
        tok = self.peek()
        if tok is None or tok.text != text:
            found = f"'{tok.text}'" if tok else "end of line"
            raise self.fail(f"unexpected {found}", f"'{text}'")
        self.pos += 1
        return tok

    def accept(self, text: str) -> bool:
        tok = self.peek()
        if tok is not None and tok.text == text:
            self.pos += 1
            return True
        return False

    def finish(self) -> None:
        if not self.at_end():
            tok = self.peek()
            raise self.fail(f"unexpected '{tok.text}'", "end of line")

    def type_name(self) -> str:
        tok = self.take("ident", "type (int | ptr)")
        if tok.text not in VALUE_TYPES:
            self.pos -= 1
            raise self.fail(f"unknown type '{tok.text}'", "int | ptr")
        return tok.text

    def typed_names(self) -> List[Tuple[str, str, int]]:
        """'(' [%name ':' type (',' ...)*] ')'"""
        out: List[Tuple[str, str, int]] = []
        self.punct("(")
        if self.accept(")"):
            return out
        while True:
            tok = self.take("value", "%name")
            self.punct(":")
            out.append((tok.text[1:], self.type_name(), tok.column))
            if self.accept(")"):
                return out
            self.punct(",")

    def operand(self) -> _RawOperand:
        tok = self.peek()
        if tok is not None and tok.kind == "value":
            self.pos += 1
            return _RawOperand(tok.text[1:], None, self.line, tok.column)
        if tok is not None and tok.kind == "int":
            self.pos += 1
            return _RawOperand(None, int(tok.text), self.line, tok.column)
        raise self.fail("missing operand", "%value or integer literal")

    def operand_list(self, closer: Optional[str] = None) -> List[_RawOperand]:
        out: List[_RawOperand] = []
        if closer is not None and self.accept(closer):
            return out
        if closer is None and (self.at_end() or self.peek().text == ":"):
            return out
        while True:
            out.append(self.operand())
            if closer is not None and self.accept(closer):
                return out
            if not self.accept(","):
                if closer is not None:
                    raise self.fail("unterminated operand list", f"',' or '{closer}'")
                return out

    def target(self) -> Tuple[str, List[_RawOperand], int]:
        tok = self.take("label", "^label")
        args: List[_RawOperand] = []
        if self.accept("("):
            args = self.operand_list(")")
        return tok.text[1:], args, tok.column


class _NameAllocator:
    """Fresh value names for desugared literals"""

    def __init__(self, used: Set[str]):
        self.used = used
        self.counter = 0

    def next(self) -> str:
        while f"c{self.counter}" in self.used:
            self.counter += 1
        name = f"c{self.counter}"
        self.used.add(name)
        return name


def _parse_instruction(cur: _Cursor) -> _RawInst:
    results: List[Tuple[str, int]] = []
    if any(t.text == "=" for t in cur.tokens):
        while True:
            tok = cur.take("value", "%result")
            results.append((tok.text[1:], tok.column))
            if cur.accept("="):
                break
            cur.punct(",")

    op_tok = cur.take("ident", "opcode")
    opcode = op_tok.text
    if opcode not in OPCODES and opcode not in TERMINATORS:
        cur.pos -= 1
        raise cur.fail(f"unknown opcode '{opcode}'", " | ".join(OPCODES + TERMINATORS))
    inst = _RawInst(opcode=opcode, line=cur.line, results=results)

    if opcode in TERMINATORS:
        if results:
            raise IRSyntaxError(f"{opcode} produces no results", cur.line, results[0][1])
        if opcode == "return":
            if not cur.at_end():
                inst.operands.append(cur.operand())
        elif opcode == "br":
            inst.targets.append(cur.target())
        else:
            inst.operands.append(cur.operand())
            cur.punct(",")
            inst.targets.append(cur.target())
            cur.punct(",")
            inst.targets.append(cur.target())
        cur.finish()
        return inst

    if opcode == "const":
        inst.attrs["value"] = int(cur.take("int", "integer literal").text)
    elif opcode == "alloca":
        pass
    elif opcode == "gep":
        inst.operands.append(cur.operand())
        cur.punct(",")
        inst.attrs["offset"] = int(cur.take("int", "integer offset").text)
    elif opcode in ("call", "dfi_call"):
        inst.attrs["callee"] = cur.take("symbol", "@callee").text[1:]
        cur.punct("(")
        inst.operands = cur.operand_list(")")
    else:
        inst.operands = cur.operand_list()

    if cur.accept(":"):
        inst.types = [cur.type_name()]
        while cur.accept(","):
            inst.types.append(cur.type_name())
        if len(inst.types) != len(results):
            raise IRSyntaxError(
                f"{len(results)} result(s) but {len(inst.types)} type(s)", cur.line, cur.column()
            )
    cur.finish()
    return inst


_INFERRED_TYPES = {
    "const": "int", "add": "int", "mul": "int", "load": "int",
    "alloca": "ptr", "gep": "ptr", "dfi_store": "ptr",
}


class _FunctionBuilder:
    def __init__(self, raw: _RawFunction, names: _NameAllocator, pending: List[Tuple[Value, Operation]]):
        self.raw = raw
        self.names = names
        self.pending = pending
        self.env: Dict[str, Value] = {}
        self.sites: Dict[str, Tuple[int, int]] = {}

    def define(self, name: str, type: str, line: int, column: int, site: Tuple[int, int]) -> Value:
        if name in self.env:
            raise DuplicateValueError(f"duplicate definition of %{name}", line, column)
        v = Value(name, type)
        self.env[name] = v
        self.sites[name] = site
        return v

    def resolve(self, opnd: _RawOperand, bi: int, ii: int, block: Block) -> Value:
        if opnd.literal is not None:
            v = Value(self.names.next(), "int")
            block.append(Operation("const", [], [v], {"value": opnd.literal}))
            return v
        v = self.env.get(opnd.name)
        if v is None:
            raise UseBeforeDefError(f"use of undefined value %{opnd.name}", opnd.line, opnd.column)
        dbi, dii = self.sites[opnd.name]
        if dbi == bi and dii >= ii:
            raise UseBeforeDefError(f"%{opnd.name} used before its definition", opnd.line, opnd.column)
        return v

    def build(self) -> Function:
        raw = self.raw
        f = Function(raw.name, return_type=raw.return_type)
        for name, type, col in raw.params:
            f.add_param(self.define(name, type, raw.line, col, (-1, -1)))

        labels: Set[str] = set()
        results: Dict[Tuple[int, int], List[Value]] = {}
        for bi, rb in enumerate(raw.blocks):
            if rb.label in labels:
                raise IRSyntaxError(f"duplicate block ^{rb.label}", rb.line, 1)
            labels.add(rb.label)
            block = f.add_block(Block(rb.label))
            for name, type, col in rb.args:
                block.add_arg(self.define(name, type, rb.line, col, (bi, -1)))
            for ii, inst in enumerate(rb.insts):
                values = []
                for k, (name, col) in enumerate(inst.results):
                    if inst.types is not None:
                        type = inst.types[k]
                    else:
                        type = _INFERRED_TYPES.get(inst.opcode, "int")
                    values.append(self.define(name, type, inst.line, col, (bi, ii)))
                results[(bi, ii)] = values

        for bi, rb in enumerate(raw.blocks):
            block = f.blocks[bi]
            for ii, inst in enumerate(rb.insts):
                operands = [self.resolve(o, bi, ii, block) for o in inst.operands]
                if inst.opcode in TERMINATORS:
                    targets = [
                        BranchTarget(label, [self.resolve(o, bi, ii, block) for o in args])
                        for label, args, _ in inst.targets
                    ]
                    value = operands[0] if operands else None
                    block.set_terminator(Terminator(inst.opcode, value, targets))
                    continue
                op = Operation(inst.opcode, operands, results[(bi, ii)], inst.attrs)
                block.append(op)
                if op.is_call and inst.types is None:
                    for r in op.results:
                        self.pending.append((r, op))
        f.rebuild_uses()
        return f


def _fix_call_types(m: Module, pending: List[Tuple[Value, Operation]]) -> None:
    for value, op in pending:
        sig = m.signature(op.callee)
        if sig is None:
            continue
        _, return_type = sig
        if value.index < op.return_offset() or op.opcode == "call":
            value.type = return_type or "int"
        else:
            value.type = "ptr"


def parse_module(text: str) -> Module:
    """
    Parse .dfir text into a Module

    Raises:
        IRSyntaxError: malformed text (line/column + expected token)
        DuplicateValueError: a value id defined twice in one function
        UseBeforeDefError: a value used before or without a definition
    """
    names = _NameAllocator(set(_NAME_RE.findall(text)))
    pending: List[Tuple[Value, Operation]] = []
    m = Module()
    current: Optional[_RawFunction] = None

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0]
        if not line.strip():
            continue
        cur = _Cursor(line, lineno)
        head = cur.peek()

        if current is None:
            if head.kind == "ident" and head.text == "extern":
                cur.pos += 1
                name = cur.take("symbol", "@name").text[1:]
                cur.punct("(")
                types: List[str] = []
                if not cur.accept(")"):
                    while True:
                        types.append(cur.type_name())
                        if cur.accept(")"):
                            break
                        cur.punct(",")
                ret = cur.type_name() if cur.accept("->") else None
                cur.finish()
                if name in m.externs or m.get_function(name) is not None:
                    raise IRSyntaxError(f"duplicate function @{name}", lineno, head.column)
                m.externs[name] = ExternDecl(name, types, ret)
                continue
            if head.kind == "ident" and head.text == "func":
                cur.pos += 1
                name_tok = cur.take("symbol", "@name")
                current = _RawFunction(name_tok.text[1:], lineno)
                if m.get_function(current.name) is not None or current.name in m.externs:
                    raise IRSyntaxError(f"duplicate function @{current.name}", lineno, name_tok.column)
                current.params = cur.typed_names()
                if cur.accept("->"):
                    current.return_type = cur.type_name()
                cur.punct("{")
                cur.finish()
                continue
            raise cur.fail(f"unexpected '{head.text}'", "'func' or 'extern'")

        if head.text == "}":
            cur.pos += 1
            cur.finish()
            m.functions.append(_FunctionBuilder(current, names, pending).build())
            current = None
            continue

        if head.kind == "label":
            cur.pos += 1
            block = _RawBlock(head.text[1:], lineno)
            if cur.peek() is not None and cur.peek().text == "(":
                block.args = cur.typed_names()
            cur.punct(":")
            cur.finish()
            current.blocks.append(block)
            continue

        if not current.blocks:
            current.blocks.append(_RawBlock("entry", lineno))
        block = current.blocks[-1]
        if block.insts and block.insts[-1].opcode in TERMINATORS:
            raise cur.fail("instruction after terminator", "'^label' or '}'")
        block.insts.append(_parse_instruction(cur))

    if current is not None:
        raise IRSyntaxError(f"unterminated function @{current.name}", current.line, 1, "'}'")

    _fix_call_types(m, pending)
    logger.debug(f"Parsed {len(m.functions)} function(s), {len(m.externs)} extern(s)")
    return m


def parse_file(path: str) -> Module:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_module(fh.read())
