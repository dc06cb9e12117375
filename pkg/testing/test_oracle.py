# testing/test_oracle.py
"""
Checks on the reference implementations the other tests lean on

1. Explicit reachability: chain, disconnected vertices, BFS against
   Floyd-Warshall on random graphs, reaching() is the reverse of reachable_from()
2. Naive dominator sets agree with the dominator tree on random CFGs
3. Interpreter: arithmetic, branches, traps
4. Inlining: depth 0 is a copy, one-way links for pointer results, same results as the call
"""

import random

import pytest

from app.clients import TaintClient
from app.core.preprocess import preprocess_module
from app.ir import Block, BranchTarget, Function, Module, Terminator, Value, parse_module, validate
from app.ir.dominance import DominatorTree
from oracle import (
    ExplicitGraph, InterpreterTrap, floyd_warshall_closure, inline_expand, interpret, naive_dominators,
    oracle_reach, random_call_module, random_digraph, reachable_from, reaching, transitive_closure,
)


def test_chain():
    g = ExplicitGraph.from_edges([(0, 1), (1, 2), (2, 3)])
    assert reachable_from(g, 0) == {0, 1, 2, 3}
    assert reachable_from(g, 2) == {2, 3}
    assert oracle_reach(g, 3, 0)
    assert not oracle_reach(g, 0, 3)


def test_disconnected_vertices():
    g = ExplicitGraph.from_edges([(0, 1)], vertices=[0, 1, 2])
    assert reachable_from(g, 2) == {2}
    assert reaching(g, 2) == {2}
    assert not oracle_reach(g, 2, 0)


@pytest.mark.parametrize("seed", range(5))
def test_bfs_matches_floyd_warshall(seed):
    rng = random.Random(seed)
    for _ in range(10):
        vertices, edges = random_digraph(rng, rng.randint(1, 60), density=rng.choice((0.5, 1.5, 3.0)))
        g = ExplicitGraph.from_edges(edges, vertices)
        assert transitive_closure(g) == floyd_warshall_closure(g)


@pytest.mark.slow
def test_bfs_matches_floyd_warshall_large():
    rng = random.Random(99)
    vertices, edges = random_digraph(rng, 200, density=1.2)
    g = ExplicitGraph.from_edges(edges, vertices)
    assert transitive_closure(g) == floyd_warshall_closure(g)


def test_reaching_reverses_reachable_from():
    rng = random.Random(4)
    vertices, edges = random_digraph(rng, 40)
    g = ExplicitGraph.from_edges(edges, vertices)
    for target in vertices:
        assert reaching(g, target) == {v for v in vertices if target in reachable_from(g, v)}


def _random_cfg(rng, n_blocks):
    """One int param %c; every block ends in return, br or cond_br to a random block"""
    f = Function("cfg", return_type="int")
    c = f.add_param(Value("c", "int"))
    labels = [f"b{i}" for i in range(n_blocks)]
    blocks = [f.add_block(Block(label)) for label in labels]
    for block in blocks:
        kind = rng.choice(("return", "br", "cond_br", "cond_br"))
        if kind == "return":
            block.set_terminator(Terminator("return", c))
        elif kind == "br":
            block.set_terminator(Terminator("br", targets=[BranchTarget(rng.choice(labels))]))
        else:
            targets = [BranchTarget(rng.choice(labels)), BranchTarget(rng.choice(labels))]
            block.set_terminator(Terminator("cond_br", c, targets))
    f.rebuild_uses()
    return f


@pytest.mark.parametrize("seed", range(5))
def test_dominators_agree(seed):
    rng = random.Random(seed)
    for _ in range(50):
        f = _random_cfg(rng, rng.randint(1, 12))
        dom = naive_dominators(f)
        tree = DominatorTree(f)
        for b in f.blocks:
            assert tree.is_reachable(b.label) == (b.label in dom)
        for label, doms in dom.items():
            assert doms == {other for other in dom if tree.dominates(other, label)}, label


BRANCHY = """
func @f(%c: int, %a: int, %b: int) -> int {
^entry:
  cond_br %c, ^left, ^right
^left:
  %x = add %a, %b : int
  br ^join(%x)
^right:
  %y = mul %a, %b : int
  br ^join(%y)
^join(%v: int):
  return %v
}
"""


def test_interpret_branches(parse):
    f = parse(BRANCHY).get_function("f")
    assert interpret(f, [1, 3, 4]).value == 7
    assert interpret(f, [0, 3, 4]).value == 12


def test_interpret_memory(fixture_text, parse):
    m = parse(fixture_text("two_stores.dfir"))
    out = interpret(m.get_function("f"), [("cell", 0), 2, 5], m)
    assert out.value == 7
    assert out.loads == [2, 5]


def test_uninitialized_load_traps(parse):
    f = parse("func @f() -> int {\n^entry:\n  %m = alloca\n  %v = load %m : int\n  return %v\n}\n").get_function("f")
    with pytest.raises(InterpreterTrap, match="uninitialized"):
        interpret(f, [])


def test_external_callee_traps(parse):
    m = parse("extern @ext(int) -> int\n\nfunc @f(%a: int) -> int {\n^entry:\n  %r = call @ext(%a)\n  return %r\n}\n")
    with pytest.raises(InterpreterTrap, match="no body"):
        interpret(m.get_function("f"), [1], m)


def test_step_limit_traps():
    f = parse_module("func @f() {\n^entry:\n  br ^entry\n}\n").get_function("f")
    with pytest.raises(InterpreterTrap, match="step limit"):
        interpret(f, [])


def test_inline_depth_zero_is_a_copy(fixture_text, preprocessed):
    m = preprocessed(fixture_text("mutual_recursion.dfir"))
    copy = inline_expand(m, depth=0)
    assert copy.structure() == m.structure()
    assert copy.get_function("f") is not m.get_function("f")


def test_inline_wires_pointer_results(fixture_text, preprocessed):
    m = preprocessed(fixture_text("callee_store.dfir"))
    f = inline_expand(m, depth=1).get_function("f")
    assert not f.call_sites()
    link = f.value("p1").def_op
    assert link.opcode == "gep" and link.attrs["offset"] == 0
    assert link.operands[0].name == "i1.g.p0"
    assert f.value("v").def_op.operands[0] is f.value("p1")
    assert f.value("i1.g.p0").def_op.operands[1] is f.value("p0")
    assert validate(Module([f])) == []
    assert interpret(f, [("cell", 0), 1]).value == 5


@pytest.mark.parametrize("seed", range(5))
def test_inlining_preserves_results(seed):
    rng = random.Random(seed)
    for _ in range(20):
        m = preprocess_module(random_call_module(rng, n_functions=rng.randint(2, 6), levels=3))
        inlined = inline_expand(m, depth=2)
        main = inlined.get_function("main")
        assert not main.call_sites()
        args = [rng.randint(-5, 5) if not p.is_ptr else (f"arg{i}", 0) for i, p in enumerate(main.params)]
        try:
            expected = interpret(m.get_function("main"), args, m)
        except InterpreterTrap:
            with pytest.raises(InterpreterTrap):
                interpret(main, args)
            continue
        got = interpret(main, args)
        assert got.value == expected.value
        assert got.loads == expected.loads


GEP_AFTER_CALL = """
func @keep(%k: ptr) {
^entry:
  %t = load %k : int
  return
}

func @main(%q: ptr) -> int {
^entry:
  call @keep(%q)
  %g = gep %q, 1
  %v = load %g : int
  return %v
}
"""


def test_inlined_pointer_result_is_one_way(preprocessed):
    m = preprocessed(GEP_AFTER_CALL)
    f = inline_expand(m, depth=1).get_function("main")
    assert not f.call_sites()
    q, q0, g = f.value("q"), f.value("q0"), f.value("g")
    assert g.def_op.operands[0] is q0
    graph = ExplicitGraph.from_function(f, TaintClient())
    # the gep on the version after the call never flows back before it
    assert oracle_reach(graph, q, q0)
    assert oracle_reach(graph, g, q0)
    assert not oracle_reach(graph, g, q)
    assert validate(Module([f])) == []
