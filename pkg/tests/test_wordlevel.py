import itertools
import random

import pytest

from gatescope import boolfunc as bf
from gatescope import gen
from gatescope.cones import cone_functions
from gatescope.dataflow import recover_registers
from gatescope.errors import WidthCapError
from gatescope.gen import Builder
from gatescope.wordlevel import (
    ADD,
    CONST_MUL,
    COUNTER,
    SHIFT_REG,
    SUB,
    UNKNOWN,
    VERIFIED,
    Anchor,
    WordCandidate,
    candidates_from_dataflow,
    find_anchors,
    identify_module,
    propagate,
)


def exhaustive_word_check(netlist, module, input_words, semantics):
    """Independent oracle: evaluate the recovered cone rows exhaustively."""
    funcs = cone_functions(
        netlist, module.result, cut_nets=frozenset().union(*input_words)
    )
    widths = [len(w) for w in module.operands]
    for values in itertools.product(*[range(1 << w) for w in widths]):
        env = {}
        for word, value in zip(module.operands, values):
            for i, nid in enumerate(word):
                env[f"n{nid}"] = (value >> i) & 1
        got = 0
        for i, nid in enumerate(module.result):
            got |= bf.evaluate(funcs[nid], env) << i
        assert got == semantics(*values) % (1 << len(module.result)), values


@pytest.mark.parametrize("width", [4, 8])
def test_ripple_adder_identified(width):
    rng = random.Random(width)
    nl, a, b, outs = gen.ripple_adder(width, rng=rng)
    cand = WordCandidate.combinational(
        [{n.id for n in a}, {n.id for n in b}], {n.id for n in outs}
    )
    module = identify_module(nl, cand)
    assert module.kind == ADD
    assert module.verification == VERIFIED
    assert len(module.result) == width + 1
    # recovered orders follow the carry chain: check against construction
    assert list(module.operands[0]) in ([n.id for n in a], [n.id for n in b])
    exhaustive_word_check(
        nl, module, [{n.id for n in a}, {n.id for n in b}], lambda x, y: x + y
    )


def test_subtractor_identified():
    nl, a, b, outs = gen.ripple_subtractor(4, rng=random.Random(2))
    cand = WordCandidate.combinational(
        [{n.id for n in a}, {n.id for n in b}], {n.id for n in outs}
    )
    module = identify_module(nl, cand)
    assert module.kind == SUB
    assert module.verification == VERIFIED
    x_word = [n.id for n in a]
    y_word = [n.id for n in b]
    if list(module.operands[0]) == x_word:
        semantics = lambda x, y: x - y
    else:
        semantics = lambda x, y: y - x
    exhaustive_word_check(
        nl, module, [{n.id for n in a}, {n.id for n in b}], semantics
    )


def test_const_multiplier_identified():
    nl, x, outs = gen.const_multiplier(4, 3, rng=random.Random(9))
    cand = WordCandidate.combinational([{n.id for n in x}], {n.id for n in outs})
    module = identify_module(nl, cand)
    assert module.kind == CONST_MUL
    assert module.constant == 3
    assert module.verification == VERIFIED
    assert list(module.operands[0]) == [n.id for n in x]
    exhaustive_word_check(nl, module, [{n.id for n in x}], lambda x_: x_ * 3)


def test_counter_identified():
    nl, info = gen.up_counter(3, rng=random.Random(4))
    cand = WordCandidate.sequential(g.id for g in info["gates"])
    module = identify_module(nl, cand)
    assert module.kind == COUNTER
    assert module.step == 1
    assert module.verification == VERIFIED
    # order follows the carry chain
    assert list(module.result) == [n.id for n in info["q_nets"]]


def test_counter_step_three():
    nl, info = gen.up_counter(4, step=3, rng=random.Random(5))
    module = identify_module(
        nl, WordCandidate.sequential(g.id for g in info["gates"])
    )
    assert module.kind == COUNTER
    assert module.step == 3


def test_shift_register_identified():
    nl, info = gen.shift_register(8, rng=random.Random(6))
    module = identify_module(
        nl, WordCandidate.sequential(g.id for g in info["gates"])
    )
    assert module.kind == SHIFT_REG
    assert module.verification == VERIFIED
    assert list(module.result) == [n.id for n in info["q_nets"]]


def test_parallel_inverters_unknown():
    b = Builder("invs")
    ins = [b.input(f"x{i}") for i in range(4)]
    outs = [b.output(b.not_(net)) for net in ins]
    cand = WordCandidate.combinational(
        [{n.id for n in ins}], {n.id for n in outs}
    )
    module = identify_module(b.netlist, cand)
    assert module.kind == UNKNOWN


def test_width_cap():
    b = Builder("wide")
    ins = [b.input(f"x{i}") for i in range(13)]
    outs = [b.output(b.not_(net)) for net in ins]
    with pytest.raises(WidthCapError):
        identify_module(
            b.netlist,
            WordCandidate.combinational(
                [{n.id for n in ins}], {n.id for n in outs}
            ),
        )


def test_input_set_order_invariance():
    nl, a, b, outs = gen.ripple_adder(4, rng=random.Random(8))
    sets = [{n.id for n in a}, {n.id for n in b}]
    m1 = identify_module(
        nl, WordCandidate.combinational(sets, {n.id for n in outs})
    )
    m2 = identify_module(
        nl, WordCandidate.combinational(sets[::-1], {n.id for n in outs})
    )
    assert m1.kind == m2.kind == ADD
    assert {m1.operands[0], m1.operands[1]} == {m2.operands[0], m2.operands[1]}
    assert m1.result == m2.result


@pytest.mark.parametrize(
    "maker,kind",
    [
        (lambda rng: gen.ripple_adder(4, rng=rng)[0:1], ADD),
    ],
)
def test_permuted_wire_variants_recover_orders(maker, kind):
    # four shuffles per kind: net creation order differs, recovery must not
    for seed in range(4):
        rng = random.Random(100 + seed)
        nl, a, b, outs = gen.ripple_adder(4, rng=rng)
        module = identify_module(
            nl,
            WordCandidate.combinational(
                [{n.id for n in a}, {n.id for n in b}], {n.id for n in outs}
            ),
        )
        assert module.kind == ADD
        ops = {tuple(n.id for n in a), tuple(n.id for n in b)}
        assert set(module.operands) == ops
        assert module.result == tuple(n.id for n in outs)


def adder_between_registers(seed, width=4):
    """Registers A and B feed a ripple adder into register C; the FFs are
    created in shuffled order so id order differs from bit order.  A and B
    load under distinct enables, as operand registers usually do; without
    that they would be structurally symmetric and merge bit-by-bit."""
    rng = random.Random(seed)
    b = Builder("addpipe")
    clock = b.input("clk")
    en_a = b.input("en_a")
    en_b = b.input("en_b")
    ga, qa = gen.register_word(b, width, clock, cell="DFFE", prefix="a", rng=rng)
    gb, qb = gen.register_word(b, width, clock, cell="DFFE", prefix="b", rng=rng)
    gc, qc = gen.register_word(b, width + 1, clock, prefix="c", rng=rng)
    for g in ga:
        b.netlist.connect(g.id, "E", en_a.id)
    for g in gb:
        b.netlist.connect(g.id, "E", en_b.id)
    for g in ga + gb:
        b.netlist.connect(g.id, "D", b.input(f"d{g.id}").id)
    carry = None
    sums = []
    for i in range(width):
        p = b.xor(qa[i], qb[i])
        g_net = b.and_(qa[i], qb[i])
        if carry is None:
            sums.append(p)
            carry = g_net
        else:
            sums.append(b.xor(p, carry))
            carry = b.or_(g_net, b.and_(p, carry))
    sums.append(carry)
    for i in range(width + 1):
        b.netlist.connect(gc[i].id, "D", sums[i].id)
    return b, clock, (ga, qa), (gb, qb), (gc, qc)


def test_find_anchors_from_verified_add():
    b, clock, (ga, qa), (gb, qb), (gc, qc) = adder_between_registers(1)
    graph = recover_registers(b.netlist)
    cand = WordCandidate.combinational(
        [{n.id for n in qa}, {n.id for n in qb}],
        {b.netlist.gate(g.id).connections["D"] for g in gc},
    )
    module = identify_module(b.netlist, cand)
    assert module.kind == ADD
    anchors = find_anchors(b.netlist, graph, [module])
    assert len(anchors) == 3  # two operands and the result
    sources = {a.source for a in anchors}
    assert any("operand" in s for s in sources)
    assert any("result" in s for s in sources)


def test_find_anchors_shift_chain():
    nl, info = gen.shift_register(4, rng=random.Random(3))
    graph = recover_registers(nl)
    anchors = find_anchors(nl, graph)
    assert len(anchors) == 1
    assert anchors[0].word == tuple(n.id for n in info["q_nets"])


def test_find_anchors_empty():
    b = Builder("none")
    x = b.input("x")
    b.output(b.not_(x))
    graph = recover_registers(b.netlist)
    assert find_anchors(b.netlist, graph) == []


def test_propagate_orders_source_and_sink_registers():
    b, clock, (ga, qa), (gb, qb), (gc, qc) = adder_between_registers(7)
    graph = recover_registers(b.netlist)
    cand = WordCandidate.combinational(
        [{n.id for n in qa}, {n.id for n in qb}],
        {b.netlist.gate(g.id).connections["D"] for g in gc},
    )
    module = identify_module(b.netlist, cand)
    anchors = find_anchors(b.netlist, graph, [module])
    assignment = propagate(b.netlist, graph, anchors)
    by_members = {frozenset(g.members): gid for gid, g in graph.groups.items()}
    a_gid = by_members[frozenset(g.id for g in ga)]
    c_gid = by_members[frozenset(g.id for g in gc)]
    # operand order is the arithmetic order; the register inherits it
    assert list(assignment.orders[a_gid]) == [g.id for g in ga]
    assert list(assignment.orders[c_gid]) == [g.id for g in gc]
    assert assignment.confidence[a_gid] == ("anchor",)


def test_propagate_through_intermediate_register():
    # shift register (anchor) -> capture register (direct bit link) ->
    # second capture register, reachable only through the first one's order
    rng = random.Random(12)
    b = Builder("prop")
    clock = b.input("clk")
    sg, sq = gen.register_word(b, 4, clock, prefix="s", rng=rng)
    si = b.input("si")
    for i in range(4):
        b.netlist.connect(sg[i].id, "D", (si if i == 0 else sq[i - 1]).id)
    capture = b.input("capture")
    cg, cq = gen.register_word(b, 4, clock, cell="DFFE", prefix="c", rng=rng)
    hold = b.input("hold")
    dg, dq = gen.register_word(b, 4, clock, cell="DFFE", prefix="d", rng=rng)
    for i in range(4):
        b.netlist.connect(cg[i].id, "E", capture.id)
        b.netlist.connect(cg[i].id, "D", b.not_(sq[i]).id)
        b.netlist.connect(dg[i].id, "E", hold.id)
        b.netlist.connect(dg[i].id, "D", b.not_(cq[i]).id)
    graph = recover_registers(b.netlist)
    anchors = find_anchors(b.netlist, graph)
    assert anchors, "shift chain not detected"
    assignment = propagate(b.netlist, graph, anchors)
    by_members = {frozenset(g.members): gid for gid, g in graph.groups.items()}
    s_gid = by_members[frozenset(g.id for g in sg)]
    c_gid = by_members[frozenset(g.id for g in cg)]
    d_gid = by_members[frozenset(g.id for g in dg)]
    assert list(assignment.orders[s_gid]) == [g.id for g in sg]
    assert list(assignment.orders[c_gid]) == [g.id for g in cg]
    assert list(assignment.orders[d_gid]) == [g.id for g in dg]
    assert assignment.confidence[c_gid] == ("anchor",)
    assert assignment.confidence[d_gid] == ("propagated", 1)


def test_propagate_conflict_drops_order():
    rng = random.Random(5)
    b = Builder("conflict")
    clock = b.input("clk")
    rg, rq = gen.register_word(b, 3, clock, prefix="r", rng=rng)
    for g in rg:
        b.netlist.connect(g.id, "D", b.input(f"d{g.id}").id)
    graph = recover_registers(b.netlist)
    gid = next(iter(graph.groups))
    a1 = Anchor(tuple(n.id for n in rq), "first")
    a2 = Anchor(tuple(n.id for n in reversed(rq)), "second")
    assignment = propagate(b.netlist, graph, [a1, a2])
    assert gid not in assignment.orders
    assert assignment.confidence[gid] == ("conflict",)
    assert set(assignment.conflicts[gid]) == {"first", "second"}


def test_propagate_monotone_and_idempotent():
    b, clock, (ga, qa), (gb, qb), (gc, qc) = adder_between_registers(9)
    graph = recover_registers(b.netlist)
    cand = WordCandidate.combinational(
        [{n.id for n in qa}, {n.id for n in qb}],
        {b.netlist.gate(g.id).connections["D"] for g in gc},
    )
    module = identify_module(b.netlist, cand)
    anchors = find_anchors(b.netlist, graph, [module])
    partial = propagate(b.netlist, graph, anchors[:1])
    full = propagate(b.netlist, graph, anchors)
    for gid, order in partial.orders.items():
        if gid not in full.conflicts:
            assert full.orders[gid] == order
    again = propagate(b.netlist, graph, anchors)
    assert again.orders == full.orders


def test_groups_without_anchor_paths_absent():
    rng = random.Random(21)
    b = Builder("apart")
    clock = b.input("clk")
    rg, rq = gen.register_word(b, 4, clock, prefix="iso", rng=rng)
    for g in rg:
        b.netlist.connect(g.id, "D", b.input(f"d{g.id}").id)
    sg, sq = gen.register_word(b, 4, clock, prefix="s", rng=rng)
    si = b.input("si")
    for i in range(4):
        b.netlist.connect(sg[i].id, "D", (si if i == 0 else sq[i - 1]).id)
    graph = recover_registers(b.netlist)
    anchors = find_anchors(b.netlist, graph)
    assignment = propagate(b.netlist, graph, anchors)
    by_members = {frozenset(g.members): gid for gid, g in graph.groups.items()}
    iso_gid = by_members[frozenset(g.id for g in rg)]
    assert iso_gid not in assignment.orders
    assert iso_gid not in assignment.confidence


def test_candidates_from_dataflow_cover_adder():
    b, clock, (ga, qa), (gb, qb), (gc, qc) = adder_between_registers(13)
    graph = recover_registers(b.netlist)
    cands = candidates_from_dataflow(b.netlist, graph)
    kinds = []
    for cand in cands:
        module = identify_module(b.netlist, cand)
        kinds.append(module.kind)
    assert ADD in kinds
