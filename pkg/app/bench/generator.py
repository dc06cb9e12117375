"""
Seeded generator of synthetic modules for the scaling benchmark

Functions are straight-line and written in raw form (store / call); the
benchmark preprocesses them like any other input. The generator keeps
the share of values with at most one use near a target fraction:

- int values are either single-use or "hubs" with 2-4 planned uses;
  a new int becomes a hub only while hubs stay under 1 - target of
  all values produced so far, and operand picks drain hubs first
- every pointer version is used at most once: per memory slot the ops
  are stores and calls, and a load or gep ends the slot

Presets:
- sparse: few calls, callees always later in the module (acyclic)
- dense-callgraph: many calls concentrated on a small hot set of
  callees, cycles and self-recursion allowed
"""

import logging
import random
from dataclasses import dataclass
from typing import Dict, List, Optional

from app.ir.model import Block, Function, Module, Operation, Terminator, Value

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Preset:
    name: str
    call_weight: float
    hot_fraction: float
    allow_cycles: bool


PRESETS: Dict[str, Preset] = {
    "sparse": Preset("sparse", call_weight=0.04, hot_fraction=1.0, allow_cycles=False),
    "dense-callgraph": Preset("dense-callgraph", call_weight=0.15, hot_fraction=0.1, allow_cycles=True),
}


@dataclass(frozen=True)
class Signature:
    name: str
    int_params: int
    ptr_params: int
    returns: bool


class _Body:
    """Emits one function body while tracking planned use counts"""

    def __init__(self, rng: random.Random, sig: Signature, target: float):
        self.rng = rng
        self.sig = sig
        self.target = target
        self.counter = 0
        self.total = 0
        self.multi = 0
        self.singles: List[Value] = []
        self.hubs: Dict[int, List] = {}
        self.slots: List[Value] = []
        self.function = Function(sig.name, return_type="int" if sig.returns else None)
        self.block = Block("entry")
        self.emitted = 0

        for i in range(sig.int_params):
            self.offer(self.function.add_param(Value(f"x{i}", "int")))
        for i in range(sig.ptr_params):
            p = self.function.add_param(Value(f"q{i}", "ptr"))
            self.total += 1
            self.slots.append(p)
        self.function.add_block(self.block)

    # --- value bookkeeping ---

    def name(self, prefix: str) -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    def offer(self, v: Value) -> None:
        """Register a new int value as single-use or hub"""
        self.total += 1
        if self.multi + 1 <= (1.0 - self.target) * self.total:
            self.multi += 1
            self.hubs[id(v)] = [v, self.rng.randint(2, 4)]
        else:
            self.singles.append(v)

    def count_pointer(self) -> None:
        self.total += 1

    def emit(self, op: Operation) -> Operation:
        self.block.append(op)
        self.emitted += 1
        return op

    def take_int(self) -> Value:
        if self.hubs:
            key = self.rng.choice(list(self.hubs))
            entry = self.hubs[key]
            entry[1] -= 1
            if entry[1] == 0:
                del self.hubs[key]
            return entry[0]
        if self.singles:
            return self.singles.pop(self.rng.randrange(len(self.singles)))
        c = Value(self.name("c"), "int")
        self.emit(Operation("const", [], [c], {"value": self.rng.randint(0, 99)}))
        self.total += 1
        return c

    def take_slot(self, exclude: List[Value]) -> Value:
        choices = [s for s in self.slots if all(s is not e for e in exclude)]
        if choices:
            return self.rng.choice(choices)
        m = Value(self.name("m"), "ptr")
        self.emit(Operation("alloca", [], [m]))
        self.count_pointer()
        self.slots.append(m)
        return m

    def end_slot(self, slot: Value) -> None:
        self.slots = [s for s in self.slots if s is not slot]

    # --- op kinds ---

    def arith(self) -> None:
        a, b = self.take_int(), self.take_int()
        r = Value(self.name("t"), "int")
        self.emit(Operation(self.rng.choice(("add", "mul")), [a, b], [r]))
        self.offer(r)

    def const(self) -> None:
        c = Value(self.name("c"), "int")
        self.emit(Operation("const", [], [c], {"value": self.rng.randint(0, 99)}))
        self.offer(c)

    def store(self) -> None:
        v = self.take_int()
        slot = self.take_slot([])
        self.emit(Operation("store", [v, slot]))
        # the fresh version made by preprocessing
        self.count_pointer()

    def load(self) -> None:
        slot = self.take_slot([])
        r = Value(self.name("l"), "int")
        self.emit(Operation("load", [slot], [r]))
        self.end_slot(slot)
        self.offer(r)

    def gep(self) -> None:
        slot = self.take_slot([])
        g = Value(self.name("g"), "ptr")
        self.emit(Operation("gep", [slot], [g], {"offset": self.rng.randint(1, 8)}))
        self.end_slot(slot)
        self.count_pointer()
        self.slots.append(g)

    def call(self, callee: Signature) -> None:
        args: List[Value] = [self.take_int() for _ in range(callee.int_params)]
        ptrs: List[Value] = []
        for _ in range(callee.ptr_params):
            ptrs.append(self.take_slot(ptrs))
        results: List[Value] = []
        if callee.returns:
            results.append(Value(self.name("r"), "int"))
        self.emit(Operation("call", args + ptrs, results, {"callee": callee.name}))
        for _ in ptrs:
            self.count_pointer()
        for r in results:
            self.offer(r)

    def finish(self) -> Function:
        value = self.take_int() if self.sig.returns else None
        self.block.set_terminator(Terminator("return", value))
        self.emitted += 1
        self.function.rebuild_uses()
        return self.function


def _signatures(rng: random.Random, count: int) -> List[Signature]:
    return [
        Signature(
            name=f"fn{i}",
            int_params=rng.randint(1, 3),
            ptr_params=rng.randint(0, 2),
            returns=rng.random() < 0.8,
        )
        for i in range(count)
    ]


def _pick_callee(rng: random.Random, index: int, sigs: List[Signature], preset: Preset) -> Optional[Signature]:
    if preset.allow_cycles:
        hot = max(1, int(len(sigs) * preset.hot_fraction))
        return sigs[rng.randrange(hot)]
    later = sigs[index + 1:]
    return rng.choice(later) if later else None


def generate_function(
    rng: random.Random,
    index: int,
    sigs: List[Signature],
    size: int,
    preset: Preset,
    single_use_fraction: float,
) -> Function:
    body = _Body(rng, sigs[index], single_use_fraction)
    weights = {
        "arith": 0.55,
        "const": 0.05,
        "store": 0.14,
        "load": 0.12,
        "gep": 0.04,
        "call": preset.call_weight,
    }
    kinds = list(weights)
    shares = [weights[k] for k in kinds]
    while body.emitted < size - 1:
        kind = rng.choices(kinds, weights=shares)[0]
        if kind == "call":
            callee = _pick_callee(rng, index, sigs, preset)
            if callee is None:
                body.arith()
            else:
                body.call(callee)
        else:
            getattr(body, kind)()
    return body.finish()


def generate_module(
    instructions: int,
    seed: int = 0,
    preset: str = "sparse",
    single_use_fraction: float = 0.85,
    function_size: int = 120,
) -> Module:
    """
    Raw-form module with about `instructions` instructions

    The same arguments always give the same module.

    Raises:
        ValueError: unknown preset
    """
    if preset not in PRESETS:
        raise ValueError(f"unknown preset '{preset}' (available: {', '.join(PRESETS)})")
    rng = random.Random(seed * 1_000_003 + instructions)
    count = max(1, instructions // max(2, function_size))
    sigs = _signatures(rng, count)
    functions = [
        generate_function(rng, i, sigs, function_size, PRESETS[preset], single_use_fraction)
        for i in range(count)
    ]
    m = Module(functions)
    logger.debug(f"Generated {count} function(s), preset {preset}, seed {seed}")
    return m


def instruction_count(m: Module) -> int:
    return sum(len(f.instructions()) for f in m.functions)
