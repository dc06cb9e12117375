# testing/test_clients.py
"""
Taint and read-only argument clients

1. Transfer rules per opcode for both clients; block arguments at joins
2. transfer() is pure and rejects edges leaving the op
3. Sidecar config parsing and resolution errors
4. Taint reports on fixtures; no missed taint on random functions;
   more sources never taint less
5. RoArg verdicts on fixtures; one verdict per pointer argument
6. Client registry
"""

import random

import pytest

from app.clients import (
    ClientAnalysis, ClientRegistry, RoArgClient, TaintClient, create_client, load_all_clients,
    load_taint_config, parse_taint_config, run_roarg, run_taint,
)
from app.clients.taint import TaintSource
from app.core.dft_engine import build_graph
from app.core.interproc import solve_module
from app.core.models import FlowPair
from app.core.preprocess import preprocess_module
from app.ir import ConfigError, Module, Operation, UnknownSymbolError, Value
from oracle import ExplicitGraph, random_call_module, random_straight_line, reaching


@pytest.fixture
def values():
    """Fresh named values: values("p:ptr", "v:int")"""

    def _values(*specs):
        out = []
        for spec in specs:
            name, kind = spec.split(":")
            out.append(Value(name, kind))
        return out

    return _values


def test_taint_transfer_rules(values):
    client = TaintClient()
    v, p, q = values("v:int", "p:ptr", "q:ptr")
    assert client.transfer(Operation("dfi_store", [v, p], [q])) == [(q, v)]

    a, b, r = values("a:int", "b:int", "r:int")
    assert client.transfer(Operation("add", [a, b], [r])) == [(r, a), (r, b)]
    assert client.transfer(Operation("mul", [a, b], [r])) == [(r, a), (r, b)]

    p, loaded = values("p:ptr", "l:int")
    assert client.transfer(Operation("load", [p], [loaded])) == [(loaded, p)]

    p, g = values("p:ptr", "g:ptr")
    assert client.transfer(Operation("gep", [p], [g], {"offset": 1})) == [(g, p), (p, g)]

    c, = values("c:int")
    assert client.transfer(Operation("const", [], [c], {"value": 4})) == []

    x, p, r, p0 = values("x:int", "p:ptr", "r:int", "p0:ptr")
    call = Operation("dfi_call", [x, p], [r, p0], {"callee": "g"})
    assert client.transfer(call) == [(r, x), (r, p), (p0, x), (p0, p)]


def test_roarg_transfer_rules(values):
    client = RoArgClient()
    v, p, q = values("v:int", "p:ptr", "q:ptr")
    assert client.transfer(Operation("dfi_store", [v, p], [q])) == [(q, v), (q, p)]

    p, g = values("p:ptr", "g:ptr")
    assert client.transfer(Operation("gep", [p], [g], {"offset": 2})) == [(g, p)]

    p, loaded = values("p:ptr", "l:int")
    assert client.transfer(Operation("load", [p], [loaded])) == [(loaded, p)]

    a, r = values("a:int", "r:int")
    assert client.transfer(Operation("add", [a, a], [r])) == [(r, a), (r, a)]

    c, = values("c:int")
    assert client.transfer(Operation("const", [], [c], {"value": 0})) == []


JOIN = """
func @f(%c: int, %a: int, %b: int) -> int {
^entry:
  cond_br %c, ^left, ^right
^left:
  br ^join(%a)
^right:
  br ^join(%b)
^join(%v: int):
  return %v
}
"""


@pytest.mark.parametrize("client", [TaintClient(), RoArgClient()], ids=["taint", "roarg"])
def test_block_arguments_meet_at_join(client, parse):
    f = parse(JOIN).get_function("f")
    g = build_graph(f, client)
    v, a, b = f.value("v"), f.value("a"), f.value("b")
    assert g.has_edge(v, a)
    assert g.has_edge(v, b)
    assert not g.has_edge(v, f.value("c"))


def test_transfer_is_pure(fixture_text, preprocessed):
    f = preprocessed(fixture_text("two_stores.dfir")).get_function("f")
    for client in (TaintClient(), RoArgClient()):
        for inst in f.instructions():
            assert client.transfer(inst) == client.transfer(inst)


class _LeakyClient(ClientAnalysis):
    def __init__(self, outsider):
        self.outsider = outsider
        super().__init__()

    def get_client_name(self) -> str:
        return "leaky"

    def _transfer(self, op):
        return [(r, self.outsider) for r in op.results]


def test_edge_leaving_the_op_is_rejected(values):
    a, r, stranger = values("a:int", "r:int", "s:int")
    with pytest.raises(UnknownSymbolError, match="leaves add"):
        _LeakyClient(stranger).transfer(Operation("add", [a, a], [r]))


def test_foreign_call_edge_rejected(preprocessed):
    m = preprocessed("func @g(%p: ptr) {\n^entry:\n  return\n}\n\n"
                     "func @f(%p: ptr) {\n^entry:\n  call @g(%p)\n  return\n}\n")
    f = m.get_function("f")
    stranger = m.get_function("g").params[0]
    with pytest.raises(UnknownSymbolError):
        build_graph(f, TaintClient(), call_edges=lambda site: [(site.results[0], stranger)])


# ---------------------------------------------------------------------- #
# Config
# ---------------------------------------------------------------------- #

def test_parse_config():
    cfg = parse_taint_config("// header\nsource @main %p\n\n; note\nsink @main op#4\n")
    assert [str(s) for s in cfg.sources] == ["@main:%p"]
    assert [str(s) for s in cfg.sinks] == ["@main:op#4"]


def test_parse_config_hash_comments():
    cfg = parse_taint_config("# header\n  # indented note\nsource @main %p\nsink @main op#4\n")
    assert [str(s) for s in cfg.sources] == ["@main:%p"]
    assert [str(s) for s in cfg.sinks] == ["@main:op#4"]


def test_config_bad_line_reports_line_number():
    with pytest.raises(ConfigError, match="line 2"):
        parse_taint_config("source @main %p\nsauce @main %p\n")


def test_config_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_taint_config(str(tmp_path / "missing.cfg"))


def test_config_resolution_errors(fixture_text, preprocessed):
    m = preprocessed(fixture_text("load_add.dfir"))
    with pytest.raises(ConfigError, match="no value %nope"):
        parse_taint_config("source @main %nope\n").resolve_sources(m)
    with pytest.raises(ConfigError, match="no function @other"):
        parse_taint_config("source @other %p\n").resolve_sources(m)
    with pytest.raises(ConfigError, match="has only 5 instruction"):
        parse_taint_config("sink @main op#5\n").resolve_sinks(m)


def test_sinks_are_roots(fixture_path, fixture_text, preprocessed):
    cfg = load_taint_config(fixture_path("load_add.cfg"))
    f = preprocessed(fixture_text("load_add.dfir")).get_function("main")
    assert [v.name for v in TaintClient(cfg).choose_roots(f)] == ["3", "p1"]


# ---------------------------------------------------------------------- #
# Taint
# ---------------------------------------------------------------------- #

def test_taint_load_add(fixture_path, fixture_text, preprocessed):
    cfg = load_taint_config(fixture_path("load_add.cfg"))
    report = run_taint(preprocessed(fixture_text("load_add.dfir")), cfg)
    assert report.tainted_names() == ["1", "3"]
    assert all(t.source == "@main:%p" for t in report.tainted)
    assert [(h.sink_op, h.operand) for h in report.sink_hits] == [(4, "3")]
    assert report.sink_hits[0].line() == "@main op#4 %3: tainted by @main:%p"


def test_taint_through_callee(fixture_path, fixture_text, preprocessed):
    cfg = load_taint_config(fixture_path("call_chain.cfg"))
    m = preprocessed(fixture_text("call_chain.dfir"))
    report = run_taint(m, cfg)
    assert "x" in report.tainted_names("main")
    assert [(h.sink_function, h.sink_op, h.operand) for h in report.sink_hits] == [("main", 2, "x")]


def test_taint_without_sources(fixture_text, preprocessed):
    report = run_taint(preprocessed(fixture_text("load_add.dfir")), parse_taint_config(""))
    assert report.tainted == []
    assert report.sink_hits == []


@pytest.mark.parametrize("seed", range(5))
def test_no_missed_taint(seed):
    rng = random.Random(seed)
    for _ in range(40):
        f = random_straight_line(rng, rng.randint(2, 30))
        m = preprocess_module(Module([f]))
        out = m.get_function(f.name)
        cfg = parse_taint_config(f"source @{f.name} %x0\n")
        solver = solve_module(m, TaintClient(cfg))
        tainted = set(run_taint(m, cfg, solved=solver).tainted_names())

        im = solver.state(f.name).imap
        graph = ExplicitGraph.from_function(out, TaintClient())
        for v in reaching(graph, out.value("x0")):
            if v.name != "x0" and im.is_visited(v):
                assert v.name in tainted, v.name


@pytest.mark.parametrize("seed", range(3))
def test_more_sources_never_taint_less(seed):
    rng = random.Random(seed)
    for _ in range(20):
        f = random_straight_line(rng, rng.randint(4, 25), n_params=3)
        m = preprocess_module(Module([f]))
        one = parse_taint_config(f"source @{f.name} %x0\n")
        both = one.model_copy(update={"sources": one.sources + [TaintSource(function=f.name, value="x1")]})
        small = {(t.function, t.value) for t in run_taint(m, one).tainted}
        large = {(t.function, t.value) for t in run_taint(m, both).tainted}
        assert small <= large


# ---------------------------------------------------------------------- #
# Read-only arguments
# ---------------------------------------------------------------------- #

def test_roarg_copy_through(fixture_text, preprocessed):
    report = run_roarg(preprocessed(fixture_text("copy_through.dfir")))
    assert report.verdict_of("main", 0, 0) == "modified"
    assert report.verdict_of("main", 0, 1) == "modified"
    assert report.lines() == ["@main call#0 arg#0: modified", "@main call#0 arg#1: modified"]
    assert report.counts() == {"modified": 2, "read_only": 0}


PEEK = """
func @peek(%k: ptr, %r: ptr) -> int {
^entry:
  %t = load %k : int
  return %t
}

func @main(%a: ptr, %b: ptr) -> int {
^entry:
  %v = call @peek(%a, %b)
  return %v
}
"""


def test_roarg_peek_is_read_only(preprocessed):
    report = run_roarg(preprocessed(PEEK))
    assert report.verdict_of("main", 0, 0) == "read_only"
    assert report.verdict_of("main", 0, 1) == "read_only"
    assert report.verdict_of("main", 0, 2) is None


ALIASED = """
func @peek(%k: ptr, %r: ptr) -> int {
^entry:
  %t = load %k : int
  return %t
}

func @main(%q: ptr) -> int {
^entry:
  %p = gep %q, 1
  %v = call @peek(%p, %q)
  return %v
}
"""


def test_roarg_alias_before_call_is_modified(preprocessed):
    m = preprocessed(ALIASED)
    solver = solve_module(m, RoArgClient())
    assert solver.state("peek").summary.pointers == frozenset({FlowPair(0, 1), FlowPair(1, 2)})
    report = run_roarg(m, solved=solver)
    # %q reaches O(%p) through the gep even though @peek has no cross pair
    assert report.verdict_of("main", 0, 0) == "modified"
    assert report.verdict_of("main", 0, 1) == "read_only"


def test_roarg_roots_start_with_call_results(preprocessed):
    f = preprocessed(PEEK).get_function("main")
    assert [v.name for v in RoArgClient().choose_roots(f)] == ["a0", "b0", "v"]


@pytest.mark.parametrize("seed", range(5))
def test_one_verdict_per_pointer_argument(seed):
    rng = random.Random(seed)
    for _ in range(20):
        m = preprocess_module(random_call_module(rng, n_functions=rng.randint(2, 6)))
        report = run_roarg(m)
        expected = [
            (f.name, k, j)
            for f in m.functions
            for k, site in enumerate(f.call_sites())
            for j in site.ptr_arg_positions()
        ]
        assert [(v.function, v.call, v.arg) for v in report.verdicts] == expected
        assert {v.verdict for v in report.verdicts} <= {"modified", "read_only"}


# ---------------------------------------------------------------------- #
# Registry
# ---------------------------------------------------------------------- #

def test_registry():
    registry = load_all_clients()
    assert registry is ClientRegistry()
    assert set(registry.list_clients()) >= {"taint", "roarg"}
    assert isinstance(create_client("roarg"), RoArgClient)

    cfg = parse_taint_config("source @main %p\n")
    client = create_client("taint", cfg)
    assert isinstance(client, TaintClient)
    assert client.config is cfg
    assert client.client_name == "taint"


def test_unknown_client():
    with pytest.raises(UnknownSymbolError, match="available: "):
        create_client("alias")


def test_registered_extra_client():
    registry = load_all_clients()
    registry.register("roarg2", RoArgClient)
    try:
        assert isinstance(create_client("roarg2"), RoArgClient)
    finally:
        registry.clients.pop("roarg2")
