"""Word-level module identification and bit-order propagation.

``identify_module`` proves that a candidate word group implements an adder,
subtractor, constant multiplier, counter or shift register: bit orders are
recovered from input-support growth (with a bounded permutation fallback for
ties), then every output bit is checked against the template's bit function
through the equivalence engine.  A verified result is sound; templates that
fail or exceed the solver budget are reported distinctly.

``propagate`` pushes known bit orders (from verified modules and shift
chains) onto unordered register groups along one-bit-wide combinational
paths, iterating to a fixpoint.  Two anchors implying different orders for
one group leave it unordered with the conflict recorded.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import boolfunc as bf
from .cones import cone_functions
from .equiv import EquivConfig, equivalent
from .errors import WidthCapError
from .library import INPUT

WIDTH_CAP = 12
_TIE_ARRANGEMENT_CAP = 24
_FALLBACK_WIDTH_CAP = 6

ADD = "ADD"
SUB = "SUB"
CONST_MUL = "CONST_MUL"
COUNTER = "COUNTER"
SHIFT_REG = "SHIFT_REG"
UNKNOWN = "UNKNOWN"

VERIFIED = "verified"
INCONCLUSIVE = "inconclusive"
FAILED = "failed"

# word-level proofs stay exhaustive well past the default threshold; a
# 12-bit two-operand template peaks at 25 variables
_EQUIV = EquivConfig(brute_force_max_vars=26, conflict_budget=200_000)


@dataclass(frozen=True)
class WordCandidate:
    """Unordered net-id words to analyze.

    ``inputs``/``output`` describe a combinational word function;
    ``group_members`` (FF gate ids) instead requests one-step sequential
    analysis (counter / shift register) of a register group.
    """

    inputs: tuple = ()
    output: frozenset = frozenset()
    group_members: tuple = ()

    @staticmethod
    def combinational(input_words, output_word):
        return WordCandidate(
            inputs=tuple(frozenset(w) for w in input_words),
            output=frozenset(output_word),
        )

    @staticmethod
    def sequential(members):
        return WordCandidate(group_members=tuple(sorted(members)))


@dataclass(frozen=True)
class IdentifiedModule:
    kind: str
    operands: tuple = ()  # ordered net-id tuples, LSB first
    result: tuple = ()  # ordered net ids, LSB first
    constant: int | None = None
    step: int | None = None
    direction: str | None = None
    verification: str = FAILED
    note: str = ""

    @property
    def verified(self):
        return self.verification == VERIFIED


def _support_ids(func):
    return frozenset(int(name[1:]) for name in bf.support(func))


def _ordered_by_support(funcs_by_net):
    """Output nets grouped into support-size ties, ascending."""
    sizes = {}
    for nid, f in funcs_by_net.items():
        sizes.setdefault(len(_support_ids(f)), []).append(nid)
    return [sorted(sizes[k]) for k in sorted(sizes)]


def _tie_arrangements(tie_groups):
    """All output orders consistent with ascending support size."""
    pools = [list(itertools.permutations(g)) for g in tie_groups]
    total = 1
    for p in pools:
        total *= len(p)
        if total > _TIE_ARRANGEMENT_CAP:
            return None
    return [
        [nid for chunk in combo for nid in chunk]
        for combo in itertools.product(*pools)
    ]


def _adder_bits(a_vars, b_vars, width, *, subtract=False):
    """Per-bit template functions plus the final carry/borrow."""
    bits = []
    carry = None
    for i in range(width):
        a, b = a_vars[i], b_vars[i]
        p = bf.xor(a, b)
        if carry is None:
            bits.append(p)
            carry = bf.and_(bf.not_(a), b) if subtract else bf.and_(a, b)
        else:
            bits.append(bf.xor(p, carry))
            if subtract:
                carry = bf.or_(bf.and_(bf.not_(a), b), bf.and_(carry, bf.not_(p)))
            else:
                carry = bf.or_(bf.and_(a, b), bf.and_(p, carry))
    return bits, carry


def _const_mul_bits(x_vars, constant, out_width):
    """Bits of (x * constant) mod 2^out_width as Boolean functions."""
    acc = [bf.ZERO] * out_width
    width = len(x_vars)
    for shift in range(constant.bit_length()):
        if not (constant >> shift) & 1:
            continue
        term = [
            x_vars[i - shift] if 0 <= i - shift < width else bf.ZERO
            for i in range(out_width)
        ]
        new = []
        carry = bf.ZERO
        for i in range(out_width):
            s = bf.simplify(bf.xor(acc[i], term[i], carry))
            carry = bf.simplify(
                bf.or_(bf.and_(acc[i], term[i]), bf.and_(carry, bf.xor(acc[i], term[i])))
            )
            new.append(s)
        acc = new
    return acc


def _check_bits(funcs, templates):
    """Equivalence of every recovered bit function against its template."""
    saw_inconclusive = False
    for got, want in zip(funcs, templates):
        res = equivalent(got, want, _EQUIV)
        if res.status == "inconclusive":
            saw_inconclusive = True
        elif res.status != "equal":
            return FAILED
    return INCONCLUSIVE if saw_inconclusive else VERIFIED


def _split_operand_orders(output_order, funcs, word_a, word_b):
    """Operand orders from support growth; None when deltas do not split."""
    a_order, b_order = [], []
    seen = frozenset()
    for nid in output_order:
        delta = _support_ids(funcs[nid]) - seen
        seen |= delta
        if not delta:
            continue  # carry-style bit: no new support
        in_a = sorted(delta & word_a)
        in_b = sorted(delta & word_b)
        if len(in_a) != 1 or len(in_b) != 1 or len(delta) != 2:
            return None
        a_order.append(in_a[0])
        b_order.append(in_b[0])
    return a_order, b_order


def _try_two_operand(funcs, output_order, word_a, word_b, subtract):
    split = _split_operand_orders(output_order, funcs, word_a, word_b)
    if split is None:
        return None
    a_order, b_order = split
    width = len(a_order)
    m = len(output_order)
    if m not in (width, width + 1):
        return None
    a_vars = [bf.var(f"n{nid}") for nid in a_order]
    b_vars = [bf.var(f"n{nid}") for nid in b_order]
    bits, carry = _adder_bits(a_vars, b_vars, width, subtract=subtract)
    templates = list(bits)
    if m == width + 1:
        templates.append(carry)
    verdict = _check_bits([funcs[nid] for nid in output_order], templates)
    if verdict == FAILED:
        return None
    kind = SUB if subtract else ADD
    return IdentifiedModule(
        kind=kind,
        operands=(tuple(a_order), tuple(b_order)),
        result=tuple(output_order),
        verification=verdict,
        note=f"{kind} template over {width} bits"
        + (" with carry out" if m == width + 1 else ""),
    )


def _try_const_mul(funcs, output_order, word):
    # derive the input order from singleton support growth
    x_order = []
    seen = frozenset()
    for nid in output_order:
        delta = _support_ids(funcs[nid]) - seen
        seen |= delta
        if not delta:
            continue
        if len(delta) != 1:
            return None
        x_order.append(next(iter(delta)))
    if set(x_order) != set(word):
        return None
    width = len(x_order)
    m = len(output_order)
    # the constant is the output at x = 1
    env = {f"n{nid}": 0 for nid in word}
    env[f"n{x_order[0]}"] = 1
    constant = 0
    for i, nid in enumerate(output_order):
        constant |= bf.evaluate(funcs[nid], env) << i
    if constant < 1 or constant > (1 << width):
        return None
    x_vars = [bf.var(f"n{nid}") for nid in x_order]
    templates = _const_mul_bits(x_vars, constant, m)
    verdict = _check_bits([funcs[nid] for nid in output_order], templates)
    if verdict == FAILED:
        return None
    return IdentifiedModule(
        kind=CONST_MUL,
        operands=(tuple(x_order),),
        result=tuple(output_order),
        constant=constant,
        verification=verdict,
        note=f"x * {constant} over {width} -> {m} bits",
    )


def _state_functions(netlist, members):
    """Composed next-state functions per FF over n<q-net> boundary vars."""
    next_fns = {}
    q_net = {}
    for gid in members:
        gate = netlist.gate(gid)
        spec = gate.type.ff
        for pin, binding in spec.output_binding.items():
            if binding == "state" and pin in gate.connections:
                q_net[gid] = gate.connections[pin]
                break
        else:
            return None, None
        pin_nets = {}
        for pin in sorted(bf.support(spec.next_state) - {spec.state_var}):
            nid = gate.connections.get(pin)
            if nid is None:
                return None, None
            pin_nets[pin] = nid
        funcs = cone_functions(netlist, set(pin_nets.values()))
        composed = bf.substitute_all(
            spec.next_state, {pin: funcs[nid] for pin, nid in pin_nets.items()}
        )
        if spec.state_var in bf.support(composed):
            composed = bf.substitute(
                composed, spec.state_var, bf.var(f"n{q_net[gid]}")
            )
        next_fns[gid] = bf.simplify(composed)
    return next_fns, q_net


def _try_counter(netlist, members):
    next_fns, q_net = _state_functions(netlist, members)
    if next_fns is None:
        return None
    q_ids = set(q_net.values())
    for f in next_fns.values():
        if not _support_ids(f) <= q_ids:
            return None  # external data feeds the word: not a counter
    funcs_by_q = {q_net[gid]: next_fns[gid] for gid in members}
    tie_groups = _ordered_by_support(funcs_by_q)
    arrangements = _tie_arrangements(tie_groups)
    if arrangements is None:
        return None
    for output_order in arrangements:
        width = len(output_order)
        env = {f"n{nid}": 0 for nid in q_ids}
        step = 0
        for i, nid in enumerate(output_order):
            step |= bf.evaluate(funcs_by_q[nid], env) << i
        if step == 0:
            continue
        x_vars = [bf.var(f"n{nid}") for nid in output_order]
        const_vars = [bf.const((step >> i) & 1) for i in range(width)]
        bits, _ = _adder_bits(x_vars, const_vars, width)
        templates = [bf.simplify(t) for t in bits]
        verdict = _check_bits([funcs_by_q[nid] for nid in output_order], templates)
        if verdict == FAILED:
            continue
        by_q = {q: gid for gid, q in q_net.items()}
        return IdentifiedModule(
            kind=COUNTER,
            operands=(tuple(output_order),),
            result=tuple(output_order),
            step=step,
            verification=verdict,
            note=f"state + {step} over {width} bits; "
            f"ff order {[by_q[nid] for nid in output_order]}",
        )
    return None


def _try_shift_reg(netlist, members):
    next_fns, q_net = _state_functions(netlist, members)
    if next_fns is None:
        return None
    by_q = {q: gid for gid, q in q_net.items()}
    source_of = {}
    heads = []
    for gid in members:
        f = next_fns[gid]
        if f.op == "var":
            src_net = int(f.name.split("@")[0][1:])
            if src_net in by_q:
                source_of[gid] = by_q[src_net]
                continue
        deps = _support_ids(f) & set(by_q)
        if deps:
            return None  # mixes state bits: not a plain shift
        heads.append(gid)
    if len(heads) != 1:
        return None
    chain = [heads[0]]
    remaining = dict(source_of)
    by_source = {}
    for dst, src in source_of.items():
        if src in by_source:
            return None
        by_source[src] = dst
    while chain[-1] in by_source:
        nxt = by_source[chain[-1]]
        if nxt in chain:
            return None
        chain.append(nxt)
    if len(chain) != len(members):
        return None
    order = tuple(q_net[gid] for gid in chain)
    return IdentifiedModule(
        kind=SHIFT_REG,
        operands=(order,),
        result=order,
        direction="left",
        verification=VERIFIED,
        note=f"chain of {len(chain)} flip-flops, serial input at bit 0",
    )


def identify_module(netlist, candidate) -> IdentifiedModule:
    """Classify and verify a word candidate; UNKNOWN when nothing proves."""
    if candidate.group_members:
        if len(candidate.group_members) > WIDTH_CAP:
            raise WidthCapError(
                f"group of {len(candidate.group_members)} exceeds the "
                f"{WIDTH_CAP}-bit analysis cap"
            )
        for attempt in (_try_counter, _try_shift_reg):
            result = attempt(netlist, candidate.group_members)
            if result is not None:
                return result
        return IdentifiedModule(kind=UNKNOWN, note="no sequential template verified")

    words = [frozenset(w) for w in candidate.inputs]
    output = sorted(candidate.output)
    if any(len(w) > WIDTH_CAP for w in words) or len(output) > WIDTH_CAP + 1:
        raise WidthCapError(f"word wider than {WIDTH_CAP} bits")
    cut = frozenset().union(*words) if words else frozenset()
    funcs = cone_functions(netlist, output, cut_nets=cut)
    for nid in output:
        if not _support_ids(funcs[nid]) <= cut:
            return IdentifiedModule(
                kind=UNKNOWN, note=f"output {nid} depends outside the input words"
            )
    tie_groups = _ordered_by_support({nid: funcs[nid] for nid in output})
    arrangements = _tie_arrangements(tie_groups)
    if arrangements is None and all(len(w) <= _FALLBACK_WIDTH_CAP for w in words):
        arrangements = [list(p) for p in itertools.permutations(output)]
    if arrangements is None:
        return IdentifiedModule(kind=UNKNOWN, note="too many tie arrangements")
    saw_inconclusive = False
    for output_order in arrangements:
        attempts = []
        if len(words) == 2 and len(words[0]) == len(words[1]):
            attempts.append(
                lambda oo: _try_two_operand(funcs, oo, words[0], words[1], False)
            )
            attempts.append(
                lambda oo: _try_two_operand(funcs, oo, words[0], words[1], True)
            )
            attempts.append(
                lambda oo: _try_two_operand(funcs, oo, words[1], words[0], True)
            )
        if len(words) == 1:
            attempts.append(lambda oo: _try_const_mul(funcs, oo, words[0]))
        for attempt in attempts:
            result = attempt(output_order)
            if result is not None and result.verification == VERIFIED:
                return result
            if result is not None and result.verification == INCONCLUSIVE:
                saw_inconclusive = True
    if saw_inconclusive:
        return IdentifiedModule(
            kind=UNKNOWN,
            verification=INCONCLUSIVE,
            note="a template matched structurally but the proof hit solver caps",
        )
    return IdentifiedModule(kind=UNKNOWN, note="no arithmetic template verified")


# ---------------------------------------------------------------------------
# anchors and propagation


@dataclass(frozen=True)
class Anchor:
    word: tuple  # ordered net ids, LSB first
    source: str


def find_anchors(netlist, dataflow_graph, identified=()):
    """Ordered words implying a bit order: verified module operands/results
    plus shift chains detected directly in the register groups."""
    anchors = []
    seen = set()

    def add(word, source):
        word = tuple(word)
        if len(word) >= 2 and word not in seen:
            seen.add(word)
            anchors.append(Anchor(word, source))

    for module in identified:
        if not module.verified:
            continue
        for k, operand in enumerate(module.operands):
            add(operand, f"{module.kind} operand {k}")
        add(module.result, f"{module.kind} result")
    if dataflow_graph is not None:
        for group in sorted(dataflow_graph.groups.values(), key=lambda g: g.id):
            if len(group.members) > WIDTH_CAP:
                continue
            chain = _try_shift_reg(netlist, group.members)
            if chain is not None:
                add(chain.result, f"shift chain in {group.name}")
    return anchors


@dataclass
class BitOrderAssignment:
    orders: dict = field(default_factory=dict)  # group id -> tuple of FF ids
    confidence: dict = field(default_factory=dict)  # group id -> tuple
    conflicts: dict = field(default_factory=dict)  # group id -> source tuple


def _forward_bit_candidates(netlist, net_id, data_pins_of):
    """FFs reachable from this net along one-bit-wide combinational paths.

    The anchor net itself may fan out (register outputs usually do); every
    intermediate net must have exactly one sink so the bit cannot spread.
    """
    found = set()
    net = netlist.net(net_id)
    for ep in sorted(net.sinks):
        current_ep = ep
        for _ in range(64):
            gate = netlist.gate(current_ep.gate)
            if gate.is_sequential:
                if current_ep.pin in data_pins_of.get(gate.id, ()):
                    found.add(gate.id)
                break
            outs = [
                gate.connections[p]
                for p in gate.type.output_pins
                if p in gate.connections
            ]
            if len(outs) != 1:
                break
            out_net = netlist.net(outs[0])
            sinks = sorted(out_net.sinks)
            if out_net.global_output or len(sinks) != 1:
                break
            current_ep = sinks[0]
    return found


def _backward_bit_link(netlist, net_id):
    """FF driving this net through single-input gates only."""
    current = net_id
    for _ in range(64):
        net = netlist.net(current)
        driver = net.driver
        if driver is None:
            return None
        gate = netlist.gate(driver.gate)
        if gate.is_sequential:
            binding = gate.type.ff.output_binding.get(driver.pin)
            return gate.id if binding is not None else None
        ins = [
            gate.connections[p]
            for p in gate.type.input_pins
            if p in gate.connections
        ]
        if len(ins) != 1:
            return None
        current = ins[0]
    return None


def _anchor_order_for_group(netlist, group, anchor, data_pins_of, q_of):
    """Complete FF order implied by the anchor for this group, or None."""
    if len(anchor.word) != len(group.members):
        return None
    members = set(group.members)
    mapping = {}
    for pos, nid in enumerate(anchor.word):
        found = None
        direct = q_of.get(nid)
        if direct in members:
            found = direct
        if found is None:
            forward = _forward_bit_candidates(netlist, nid, data_pins_of) & members
            if len(forward) == 1:
                found = next(iter(forward))
        if found is None:
            back = _backward_bit_link(netlist, nid)
            if back in members:
                found = back
        if found is None or found in mapping:
            return None
        mapping[found] = pos
    if set(mapping) != members:
        return None
    return tuple(sorted(mapping, key=mapping.get))


def propagate(netlist, dataflow_graph, anchors) -> BitOrderAssignment:
    """Fixpoint propagation of anchor orders onto register groups."""
    from .dataflow import classify_ff_pins

    data_pins_of = {}
    q_of = {}
    for gate in netlist.gates.values():
        if not gate.is_sequential:
            continue
        _, _, _, data = classify_ff_pins(gate)
        data_pins_of[gate.id] = data
        for pin, binding in gate.type.ff.output_binding.items():
            nid = gate.connections.get(pin)
            if nid is not None and binding == "state":
                q_of[nid] = gate.id

    assignment = BitOrderAssignment()
    sources = {}  # group id -> {order: [source...]}
    queue = [(a, 0) for a in anchors]
    qi = 0
    while qi < len(queue):
        anchor, dist = queue[qi]
        qi += 1
        for group in sorted(dataflow_graph.groups.values(), key=lambda g: g.id):
            if group.id in assignment.conflicts:
                continue
            order = _anchor_order_for_group(
                netlist, group, anchor, data_pins_of, q_of
            )
            if order is None:
                continue
            per_group = sources.setdefault(group.id, {})
            per_group.setdefault(order, []).append(anchor.source)
            if len(per_group) > 1:
                assignment.conflicts[group.id] = tuple(
                    sorted(src for lst in per_group.values() for src in lst)
                )
                assignment.orders.pop(group.id, None)
                assignment.confidence[group.id] = ("conflict",)
                continue
            if group.id not in assignment.orders:
                assignment.orders[group.id] = order
                assignment.confidence[group.id] = (
                    ("anchor",) if dist == 0 else ("propagated", dist)
                )
                # an ordered group becomes an anchor itself
                q_word = []
                for gid in order:
                    gate = netlist.gate(gid)
                    for pin, binding in gate.type.ff.output_binding.items():
                        if binding == "state" and pin in gate.connections:
                            q_word.append(gate.connections[pin])
                            break
                if len(q_word) == len(order):
                    queue.append(
                        (Anchor(tuple(q_word), f"order of {group.name}"), dist + 1)
                    )
    return assignment


def serialize_identified(modules) -> dict:
    return {
        "modules": [
            {
                "kind": m.kind,
                "operands": [list(w) for w in m.operands],
                "result": list(m.result),
                "constant": m.constant,
                "step": m.step,
                "direction": m.direction,
                "verification": m.verification,
                "note": m.note,
            }
            for m in modules
        ]
    }


def serialize_bitorder(assignment) -> dict:
    return {
        "orders": {str(gid): list(order) for gid, order in assignment.orders.items()},
        "confidence": {
            str(gid): list(conf) for gid, conf in assignment.confidence.items()
        },
        "conflicts": {
            str(gid): list(src) for gid, src in assignment.conflicts.items()
        },
    }


def candidates_from_dataflow(netlist, dataflow_graph):
    """Word candidates derived from recovered register structure."""
    candidates = []
    preds = {}
    for (src, dst), _bits in dataflow_graph.edges.items():
        if src != dst:
            preds.setdefault(dst, set()).add(src)
    for gid in sorted(dataflow_graph.groups):
        group = dataflow_graph.groups[gid]
        if len(group.members) <= WIDTH_CAP:
            candidates.append(WordCandidate.sequential(group.members))
        src_ids = sorted(preds.get(gid, ()))
        words = []
        ok = True
        for sid in src_ids:
            src_group = dataflow_graph.groups[sid]
            if len(src_group.members) > WIDTH_CAP:
                ok = False
                break
            q_word = set()
            for fid in src_group.members:
                gate = netlist.gate(fid)
                for pin, binding in gate.type.ff.output_binding.items():
                    if binding == "state" and pin in gate.connections:
                        q_word.add(gate.connections[pin])
            words.append(frozenset(q_word))
        if not ok or not words or len(words) > 2:
            continue
        from .dataflow import classify_ff_pins

        output = set()
        for fid in group.members:
            gate = netlist.gate(fid)
            _, _, _, data = classify_ff_pins(gate)
            for pin in data:
                nid = gate.connections.get(pin)
                if nid is not None:
                    output.add(nid)
        if len(output) > WIDTH_CAP + 1:
            continue
        candidates.append(WordCandidate.combinational(words, output))
    return candidates
