"""
Deterministic printer for .dfir modules; its output is the normative form
"""

from typing import List

from app.ir.model import Block, ExternDecl, Function, Instruction, Module, Operation, Terminator


def _values(values) -> str:
    return ", ".join(repr(v) for v in values)


def _target(label: str, args) -> str:
    if not args:
        return f"^{label}"
    return f"^{label}({_values(args)})"


def format_instruction(inst: Instruction) -> str:
    if isinstance(inst, Terminator):
        if inst.opcode == "return":
            return "return" if inst.value is None else f"return {inst.value!r}"
        if inst.opcode == "br":
            target = inst.targets[0]
            return f"br {_target(target.label, target.args)}"
        t, f = inst.targets
        return f"cond_br {inst.value!r}, {_target(t.label, t.args)}, {_target(f.label, f.args)}"

    op: Operation = inst
    if op.opcode == "const":
        body = f"const {op.attrs['value']}"
    elif op.opcode == "alloca":
        body = "alloca"
    elif op.opcode == "gep":
        body = f"gep {op.operands[0]!r}, {op.attrs['offset']}"
    elif op.is_call:
        body = f"{op.opcode} @{op.callee}({_values(op.operands)})"
    else:
        body = f"{op.opcode} {_values(op.operands)}"

    if not op.results:
        return body
    types = ", ".join(r.type for r in op.results)
    return f"{_values(op.results)} = {body} : {types}"


def format_block(block: Block) -> List[str]:
    header = f"^{block.label}"
    if block.args:
        header += "(" + ", ".join(f"{a!r}: {a.type}" for a in block.args) + ")"
    lines = [header + ":"]
    lines.extend(f"  {format_instruction(inst)}" for inst in block.instructions())
    return lines


def format_function(f: Function) -> str:
    params = ", ".join(f"{p!r}: {p.type}" for p in f.params)
    ret = f" -> {f.return_type}" if f.return_type else ""
    lines = [f"func @{f.name}({params}){ret} {{"]
    for block in f.blocks:
        lines.extend(format_block(block))
    lines.append("}")
    return "\n".join(lines)


def format_extern(ext: ExternDecl) -> str:
    ret = f" -> {ext.return_type}" if ext.return_type else ""
    return f"extern @{ext.name}({', '.join(ext.param_types)}){ret}"


def print_module(m: Module) -> str:
    """Render m as .dfir text; an empty module renders as an empty string

    Externs come first, sorted and on adjacent lines; functions follow,
    one blank line apart.
    """
    chunks = []
    if m.externs:
        chunks.append("\n".join(format_extern(m.externs[name]) for name in sorted(m.externs)))
    chunks.extend(format_function(f) for f in m.functions)
    if not chunks:
        return ""
    return "\n\n".join(chunks) + "\n"
