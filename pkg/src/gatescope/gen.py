"""Synthetic netlist builders: demo cell library, arithmetic fixtures,
random designs with known ground truth, and a toy round cipher.

These power the demos and the verification suite.  Builders create nets in
deliberately shuffled orders when given an RNG so that recovered bit orders
cannot accidentally coincide with id order.
"""

from __future__ import annotations

import re

from .library import parse_liberty
from .netlist import Netlist
from .sboxes import present_sbox

DEMO_LIBERTY = """
library (gsdemo) {
  cell (INV) {
    pin (A) { direction : input; }
    pin (Y) { direction : output; function : "!A"; }
  }
  cell (BUF) {
    pin (A) { direction : input; }
    pin (Y) { direction : output; function : "A"; }
  }
  cell (AND2) {
    pin (A) { direction : input; }
    pin (B) { direction : input; }
    pin (Y) { direction : output; function : "A & B"; }
  }
  cell (OR2) {
    pin (A) { direction : input; }
    pin (B) { direction : input; }
    pin (Y) { direction : output; function : "A | B"; }
  }
  cell (NAND2) {
    pin (A) { direction : input; }
    pin (B) { direction : input; }
    pin (Y) { direction : output; function : "!(A & B)"; }
  }
  cell (NOR2) {
    pin (A) { direction : input; }
    pin (B) { direction : input; }
    pin (Y) { direction : output; function : "!(A | B)"; }
  }
  cell (XOR2) {
    pin (A) { direction : input; }
    pin (B) { direction : input; }
    pin (Y) { direction : output; function : "A ^ B"; }
  }
  cell (XNOR2) {
    pin (A) { direction : input; }
    pin (B) { direction : input; }
    pin (Y) { direction : output; function : "!(A ^ B)"; }
  }
  cell (AND3) {
    pin (A) { direction : input; }
    pin (B) { direction : input; }
    pin (C) { direction : input; }
    pin (Y) { direction : output; function : "A & B & C"; }
  }
  cell (MUX2) {
    pin (A) { direction : input; }
    pin (B) { direction : input; }
    pin (S) { direction : input; }
    pin (Y) { direction : output; function : "(!S & A) | (S & B)"; }
  }
  cell (TIE0) {
    pin (Y) { direction : output; function : "0"; }
  }
  cell (TIE1) {
    pin (Y) { direction : output; function : "1"; }
  }
  cell (DFF) {
    ff (IQ, IQN) {
      next_state : "D";
      clocked_on : "CK";
    }
    pin (D) { direction : input; }
    pin (CK) { direction : input; clock : true; }
    pin (Q) { direction : output; function : "IQ"; }
    pin (QN) { direction : output; function : "IQN"; }
  }
  cell (DFFE) {
    ff (IQ, IQN) {
      next_state : "(E & D) | (!E & IQ)";
      clocked_on : "CK";
    }
    pin (D) { direction : input; }
    pin (E) { direction : input; }
    pin (CK) { direction : input; clock : true; }
    pin (Q) { direction : output; function : "IQ"; }
  }
  cell (DFFR) {
    ff (IQ, IQN) {
      next_state : "D";
      clocked_on : "CK";
      clear : "!RN";
    }
    pin (D) { direction : input; }
    pin (RN) { direction : input; }
    pin (CK) { direction : input; clock : true; }
    pin (Q) { direction : output; function : "IQ"; }
    pin (QN) { direction : output; function : "IQN"; }
  }
  cell (DFFS) {
    ff (IQ, IQN) {
      next_state : "D";
      clocked_on : "CK";
      preset : "!SN";
    }
    pin (D) { direction : input; }
    pin (SN) { direction : input; }
    pin (CK) { direction : input; clock : true; }
    pin (Q) { direction : output; function : "IQ"; }
  }
}
"""

_demo_library = None


def demo_library():
    global _demo_library
    if _demo_library is None:
        _demo_library = parse_liberty(DEMO_LIBERTY, "gsdemo.lib")
    return _demo_library


class Builder:
    """Thin convenience layer over the netlist construction API."""

    def __init__(self, name="fixture", library=None):
        self.netlist = Netlist(name, library or demo_library())
        self._ties = {}
        self._n = 0

    def _fresh(self, prefix):
        self._n += 1
        return f"{prefix}_{self._n}"

    def net(self, name=None):
        return self.netlist.add_net(name or self._fresh("n"))

    def input(self, name):
        net = self.netlist.add_net(name)
        net.global_input = True
        return net

    def output(self, net):
        net.global_output = True
        return net

    def const(self, value):
        """A net tied to 0 or 1 (one tie cell per constant)."""
        if value not in self._ties:
            gate = self.netlist.add_gate(self._fresh(f"tie{value}"), f"TIE{value}")
            net = self.net(f"const{value}_{self._n}")
            self.netlist.connect(gate.id, "Y", net.id)
            self._ties[value] = net
        return self._ties[value]

    def cell(self, type_name, name=None, **pin_nets):
        gate = self.netlist.add_gate(name or self._fresh(type_name.lower()), type_name)
        for pin, net in pin_nets.items():
            if net is not None:
                self.netlist.connect(gate.id, pin, net.id)
        return gate

    def op(self, type_name, *inputs, name=None):
        """Instantiate a combinational cell, returning its output net."""
        gate_type = self.netlist.library.require(type_name)
        out = self.net()
        pins = dict(zip(gate_type.input_pins, inputs))
        pins[gate_type.output_pins[0]] = out
        self.cell(type_name, name=name, **pins)
        return out

    def xor(self, a, b):
        return self.op("XOR2", a, b)

    def and_(self, a, b):
        return self.op("AND2", a, b)

    def or_(self, a, b):
        return self.op("OR2", a, b)

    def not_(self, a):
        return self.op("INV", a)

    def mux(self, sel, a0, a1):
        """a0 when sel=0, a1 when sel=1."""
        return self.op("MUX2", a0, a1, sel)


def _maybe_shuffled(items, rng):
    items = list(items)
    if rng is not None:
        rng.shuffle(items)
    return items


# ---------------------------------------------------------------------------
# arithmetic fixtures


def ripple_adder(width, *, carry_out=True, rng=None, name="adder"):
    """a + b over ``width`` bits; returns (netlist, a, b, outputs) LSB first.

    Net creation order is shuffled under ``rng`` so bit order differs from
    id order.
    """
    b = Builder(name)
    order = _maybe_shuffled(range(width), rng)
    a_nets = [None] * width
    b_nets = [None] * width
    for i in order:
        a_nets[i] = b.input(f"a[{i}]")
        b_nets[i] = b.input(f"b[{i}]")
    outs = []
    carry = None
    for i in range(width):
        p = b.xor(a_nets[i], b_nets[i])
        g = b.and_(a_nets[i], b_nets[i])
        if carry is None:
            s = b.op("BUF", p)
            carry = g
        else:
            s = b.xor(p, carry)
            carry = b.or_(g, b.and_(p, carry))
        outs.append(b.output(s))
    if carry_out:
        outs.append(b.output(b.op("BUF", carry)))
    return b.netlist, a_nets, b_nets, outs


def ripple_subtractor(width, *, rng=None, name="subtractor"):
    """a - b (two's complement, borrow chain); no borrow-out."""
    b = Builder(name)
    order = _maybe_shuffled(range(width), rng)
    a_nets = [None] * width
    b_nets = [None] * width
    for i in order:
        a_nets[i] = b.input(f"a[{i}]")
        b_nets[i] = b.input(f"b[{i}]")
    outs = []
    borrow = None
    for i in range(width):
        p = b.xor(a_nets[i], b_nets[i])
        if borrow is None:
            d = b.op("BUF", p)
            borrow = b.and_(b.not_(a_nets[i]), b_nets[i])
        else:
            d = b.xor(p, borrow)
            borrow = b.or_(
                b.and_(b.not_(a_nets[i]), b_nets[i]),
                b.and_(borrow, b.not_(p)),
            )
        outs.append(b.output(d))
    return b.netlist, a_nets, b_nets, outs


def const_multiplier(width, constant, *, rng=None, name="constmul"):
    """x * constant, full product width; returns (netlist, x, outputs)."""
    if constant < 1:
        raise ValueError("constant must be positive")
    out_width = max(1, ((2**width - 1) * constant).bit_length())
    b = Builder(name)
    order = _maybe_shuffled(range(width), rng)
    x_nets = [None] * width
    for i in order:
        x_nets[i] = b.input(f"x[{i}]")

    def padded(shift):
        bits = []
        for i in range(out_width):
            j = i - shift
            bits.append(x_nets[j] if 0 <= j < width else b.const(0))
        return bits

    acc = None
    for shift in range(constant.bit_length()):
        if not (constant >> shift) & 1:
            continue
        term = padded(shift)
        if acc is None:
            acc = term
            continue
        new_acc = []
        carry = None
        for i in range(out_width):
            p = b.xor(acc[i], term[i])
            g = b.and_(acc[i], term[i])
            if carry is None:
                new_acc.append(p)
                carry = g
            else:
                new_acc.append(b.xor(p, carry))
                carry = b.or_(g, b.and_(p, carry))
        acc = new_acc
    outs = [b.output(b.op("BUF", net)) for net in acc]
    return b.netlist, x_nets, outs


def register_word(b, width, clock, *, cell="DFF", prefix="r", rng=None):
    """A word of flip-flops with D left open; returns (gates, q_nets) LSB first."""
    order = _maybe_shuffled(range(width), rng)
    gates = [None] * width
    q_nets = [None] * width
    for i in order:
        q = b.net(f"{prefix}_q[{i}]")
        gates[i] = b.cell(cell, name=f"{prefix}_{i}", CK=clock, Q=q)
        q_nets[i] = q
    return gates, q_nets


def up_counter(width, step=1, *, rng=None, name="counter"):
    """Clocked counter with async reset; returns (netlist, info).

    info: clock, reset_n, gates, q_nets (LSB first).
    """
    b = Builder(name)
    clock = b.input("clk")
    reset_n = b.input("rst_n")
    gates, q_nets = register_word(b, width, clock, cell="DFFR", prefix="cnt", rng=rng)
    for g in gates:
        b.netlist.connect(g.id, "RN", reset_n.id)
    carry = None
    for i in range(width):
        k = b.const((step >> i) & 1)
        p = b.xor(q_nets[i], k)
        g_net = b.and_(q_nets[i], k)
        if carry is None:
            s = p
            carry = g_net
        else:
            s = b.xor(p, carry)
            carry = b.or_(g_net, b.and_(p, carry))
        b.netlist.connect(gates[i].id, "D", s.id)
        b.output(q_nets[i])
    return b.netlist, {
        "clock": clock,
        "reset_n": reset_n,
        "gates": gates,
        "q_nets": q_nets,
    }


def shift_register(width, *, rng=None, name="shiftreg"):
    """Serial-in shift chain; returns (netlist, info)."""
    b = Builder(name)
    clock = b.input("clk")
    serial_in = b.input("si")
    order = _maybe_shuffled(range(width), rng)
    gates = [None] * width
    q_nets = [None] * width
    for i in order:
        q = b.net(f"sr_q[{i}]")
        gates[i] = b.cell("DFF", name=f"sr_{i}", CK=clock, Q=q)
        q_nets[i] = q
    for i in range(width):
        src = serial_in if i == 0 else q_nets[i - 1]
        b.netlist.connect(gates[i].id, "D", src.id)
    b.output(q_nets[-1])
    return b.netlist, {
        "clock": clock,
        "serial_in": serial_in,
        "gates": gates,
        "q_nets": q_nets,
    }


def sbox_circuit(b, input_nets, table):
    """Synthesize a substitution table as shared mux trees; returns outputs.

    Shannon decomposition over the inputs (last input splits first) with a
    memo keyed on the residual truth vector, so equal subfunctions share
    gates across the output bits of this table.
    """
    n = len(input_nets)
    if len(table) != 1 << n:
        raise ValueError("table size does not match input count")
    m = max(table).bit_length() or 1
    memo = {}

    def synth(vec):
        if vec in memo:
            return memo[vec]
        if all(v == vec[0] for v in vec):
            net = b.const(vec[0])
        else:
            k = len(vec).bit_length() - 1  # number of remaining inputs
            half = len(vec) // 2
            low = synth(vec[:half])
            high = synth(vec[half:])
            net = b.mux(input_nets[k - 1], low, high)
        memo[vec] = net
        return net

    outputs = []
    for j in range(m):
        vec = tuple((table[x] >> j) & 1 for x in range(1 << n))
        outputs.append(synth(vec))
    return outputs


# ---------------------------------------------------------------------------
# random designs


def random_netlist(rng, max_gates=500, name="random"):
    """Arbitrary consistent netlist for round-trip tests.

    Includes markers, a module tree, groupings and deliberately odd states
    (dangling nets, unconnected pins); not necessarily lint-clean.
    """
    b = Builder(name)
    nl = b.netlist
    types = ["INV", "BUF", "AND2", "OR2", "XOR2", "NAND2", "MUX2", "DFF", "DFFE", "TIE0"]
    nets = [b.net() for _ in range(rng.randint(5, 40))]
    n_gates = rng.randint(1, max_gates)
    for i in range(n_gates):
        g = b.cell(rng.choice(types), name=f"g{i}")
        for pin in g.type.input_pins:
            if rng.random() < 0.85:
                nl.connect(g.id, pin, rng.choice(nets).id)
        for pin in g.type.output_pins:
            if rng.random() < 0.8:
                net = b.net()
                nets.append(net)
                nl.connect(g.id, pin, net.id)
    for net in rng.sample(nets, min(len(nets), 4)):
        net.global_input = True
    for net in rng.sample(nets, min(len(nets), 3)):
        net.global_output = True
    # a small random module tree
    all_gates = list(nl.gates)
    modules = [nl.top_module]
    for i in range(rng.randint(0, 4)):
        parent = rng.choice(modules)
        pool = [g for g in nl.module(parent).gates]
        take = rng.sample(pool, min(len(pool), rng.randint(0, 5)))
        mod = nl.create_module(f"m{i}", parent, take)
        modules.append(mod.id)
    for i in range(rng.randint(0, 3)):
        grouping = nl.create_grouping(
            f"grp{i}", (rng.randint(0, 255), rng.randint(0, 255), rng.randint(0, 255))
        )
        for gid in rng.sample(all_gates, min(len(all_gates), 3)):
            nl.assign_to_grouping(grouping.id, "gate", gid)
        nl.assign_to_grouping(grouping.id, "net", rng.choice(nets).id)
    return nl


def random_combinational(rng, n_inputs, n_gates, name="randcomb"):
    """Layered random combinational netlist; returns (netlist, inputs, outputs)."""
    b = Builder(name)
    inputs = [b.input(f"in{i}") for i in range(n_inputs)]
    pool = list(inputs)
    types1 = ["INV", "BUF"]
    types2 = ["AND2", "OR2", "XOR2", "NAND2", "NOR2", "XNOR2"]
    for _ in range(n_gates):
        if rng.random() < 0.2:
            out = b.op(rng.choice(types1), rng.choice(pool))
        else:
            out = b.op(rng.choice(types2), rng.choice(pool), rng.choice(pool))
        pool.append(out)
    outputs = []
    for net in pool[len(inputs):]:
        if not net.sinks:
            outputs.append(b.output(net))
    return b.netlist, inputs, outputs


def random_sequential(rng, n_ffs, n_comb_gates, n_inputs=3, name="randseq"):
    """Single-clock random sequential fixture.

    Returns (netlist, info) with info holding clock, inputs, ffs, q_nets.
    Every FF data input is driven by a combinational cloud over FF outputs
    and the external inputs.
    """
    b = Builder(name)
    clock = b.input("clk")
    inputs = [b.input(f"in{i}") for i in range(n_inputs)]
    kinds = ["DFF"] * 6 + ["DFFE"] * 2 + ["DFFR"] * 2
    ffs = []
    q_nets = []
    for i in range(n_ffs):
        kind = rng.choice(kinds)
        q = b.net(f"q{i}")
        pins = {"CK": clock, "Q": q}
        g = b.cell(kind, name=f"ff{i}", **pins)
        ffs.append(g)
        q_nets.append(q)
    pool = q_nets + inputs
    types2 = ["AND2", "OR2", "XOR2", "NAND2", "NOR2", "XNOR2"]
    for _ in range(n_comb_gates):
        if rng.random() < 0.15:
            out = b.op("INV", rng.choice(pool))
        else:
            out = b.op(rng.choice(types2), rng.choice(pool), rng.choice(pool))
        pool.append(out)
    comb_only = pool[len(q_nets) + len(inputs):] or q_nets
    for i, g in enumerate(ffs):
        b.netlist.connect(g.id, "D", rng.choice(comb_only).id)
        if g.type_name == "DFFE":
            b.netlist.connect(g.id, "E", rng.choice(inputs).id)
        elif g.type_name == "DFFR":
            # keep async clear deasserted so symbolic execution stays legal
            b.netlist.connect(g.id, "RN", b.const(1).id)
    b.output(rng.choice(q_nets))
    return b.netlist, {
        "clock": clock,
        "inputs": inputs,
        "ffs": ffs,
        "q_nets": q_nets,
    }


def uniform_word_mix(b, src_bits, dst_width, offset=0):
    """Mix a word into ``dst_width`` bits with uniform fan-in and fan-out.

    Destination bit i is the XOR of the source bits whose index is congruent
    to i+offset modulo dst_width (lcm slicing): every source bit feeds the
    same number of sinks and every destination bit has the same in-degree,
    so recovery signatures stay uniform across the words.
    """
    w_src = len(src_bits)
    span = _lcm(w_src, dst_width)
    out = []
    for i in range(dst_width):
        taps = [
            src_bits[(i + offset + t * dst_width) % w_src]
            for t in range(span // dst_width)
        ]
        acc = taps[0]
        for tap in taps[1:]:
            acc = b.xor(acc, tap)
        out.append(acc)
    return out


def _lcm(a, bb):
    import math

    return a * bb // math.gcd(a, bb)


def register_design(rng, name="regdesign"):
    """Pipeline/feedback register design with known word-level partition.

    Returns (netlist, ground_truth) where ground_truth is a list of
    frozensets of FF gate ids, one per register.  Stage-to-stage wiring is
    degree-uniform so the intended partition is recoverable; genuinely
    symmetric layouts are avoided by construction.
    """
    b = Builder(name)
    clock = b.input("clk")
    n_regs = rng.randint(2, 10)
    widths = [rng.choice([4, 8, 12, 16, 24, 32]) for _ in range(n_regs)]
    enables = []
    for r in range(n_regs):
        if rng.random() < 0.4:
            enables.append(b.input(f"en{r}"))
        else:
            enables.append(None)
    regs = []
    for r, width in enumerate(widths):
        cell = "DFFE" if enables[r] is not None else "DFF"
        gates, q_nets = register_word(b, width, clock, cell=cell, prefix=f"reg{r}", rng=rng)
        if enables[r] is not None:
            for g in gates:
                b.netlist.connect(g.id, "E", enables[r].id)
        regs.append({"gates": gates, "q": q_nets, "width": width})

    ext_in = [b.input(f"din{i}") for i in range(widths[0])]

    # stage 0 loads external data, optionally folded with a feedback tap;
    # stage r loads stage r-1 through a per-hop style, uniform across the
    # word the way synthesis would emit it
    for r, reg in enumerate(regs):
        width = reg["width"]
        if r == 0:
            sources = list(ext_in)
            if n_regs > 1 and rng.random() < 0.5:
                feedback = regs[rng.randrange(1, n_regs)]
                taps = uniform_word_mix(b, feedback["q"], width, offset=1)
                sources = [b.xor(sources[i], taps[i]) for i in range(width)]
            for i in range(width):
                b.netlist.connect(reg["gates"][i].id, "D", sources[i].id)
            continue
        styles = ["mix", "inv"]
        if widths[r - 1] == width:
            styles.append("wire")
        if r >= 2:
            styles.append("skip")
        style = rng.choice(styles)
        base = uniform_word_mix(b, regs[r - 1]["q"], width)
        if style == "wire":
            sources = base
        elif style == "inv":
            sources = [b.not_(net) for net in base]
        elif style == "mix":
            shifted = uniform_word_mix(b, regs[r - 1]["q"], width, offset=3)
            sources = [b.xor(base[i], shifted[i]) for i in range(width)]
        else:  # skip: fold in the register two stages back
            other = uniform_word_mix(b, regs[r - 2]["q"], width, offset=1)
            sources = [b.xor(base[i], other[i]) for i in range(width)]
        for i in range(width):
            b.netlist.connect(reg["gates"][i].id, "D", sources[i].id)
    for i in range(regs[-1]["width"]):
        b.output(regs[-1]["q"][i])
    ground_truth = [frozenset(g.id for g in reg["gates"]) for reg in regs]
    return b.netlist, ground_truth


# ---------------------------------------------------------------------------
# the toy round cipher with an optional key-leak path


def toy_cipher(trojan, *, rng=None, name=None):
    """16-bit round-based cipher; the trojan variant leaks the key register
    into the ciphertext register when the plaintext matches a magic value.

    Returns (netlist, info) with register gate-id sets for key, plaintext,
    state and ciphertext.
    """
    width = 16
    magic = 0xB5A3
    b = Builder(name or ("cipher_trojan" if trojan else "cipher_clean"))
    clock = b.input("clk")
    load_key = b.input("load_key")
    load_pt = b.input("load_pt")
    start = b.input("start")
    key_in = [b.input(f"key_in[{i}]") for i in range(width)]
    pt_in = [b.input(f"pt_in[{i}]") for i in range(width)]

    key_g, key_q = register_word(b, width, clock, cell="DFFE", prefix="key", rng=rng)
    pt_g, pt_q = register_word(b, width, clock, cell="DFFE", prefix="pt", rng=rng)
    st_g, st_q = register_word(b, width, clock, cell="DFF", prefix="st", rng=rng)
    ct_g, ct_q = register_word(b, width, clock, cell="DFF", prefix="ct", rng=rng)
    for g in key_g:
        b.netlist.connect(g.id, "E", load_key.id)
    for g in pt_g:
        b.netlist.connect(g.id, "E", load_pt.id)
    for i in range(width):
        b.netlist.connect(key_g[i].id, "D", key_in[i].id)
        b.netlist.connect(pt_g[i].id, "D", pt_in[i].id)

    # round function: substitute nibbles of state ^ key, then rotate left 1
    mixed = [b.xor(st_q[i], key_q[i]) for i in range(width)]
    table = present_sbox()
    subbed = []
    for nib in range(width // 4):
        ins = mixed[4 * nib : 4 * nib + 4]
        subbed.extend(sbox_circuit(b, ins, table))
    rotated = [subbed[(i - 1) % width] for i in range(width)]
    for i in range(width):
        d = b.mux(start, rotated[i], pt_q[i])
        b.netlist.connect(st_g[i].id, "D", d.id)

    if trojan:
        # trigger: plaintext register equals the magic constant
        terms = []
        for i in range(width):
            bit = pt_q[i] if (magic >> i) & 1 else b.not_(pt_q[i])
            terms.append(bit)
        trigger = terms[0]
        for t in terms[1:]:
            trigger = b.and_(trigger, t)
        for i in range(width):
            leak = b.mux(trigger, st_q[i], key_q[i])
            b.netlist.connect(ct_g[i].id, "D", leak.id)
    else:
        for i in range(width):
            b.netlist.connect(ct_g[i].id, "D", st_q[i].id)
    for i in range(width):
        b.output(ct_q[i])

    info = {
        "clock": clock,
        "magic": magic,
        "key": frozenset(g.id for g in key_g),
        "plaintext": frozenset(g.id for g in pt_g),
        "state": frozenset(g.id for g in st_g),
        "ciphertext": frozenset(g.id for g in ct_g),
    }
    return b.netlist, info


# ---------------------------------------------------------------------------
# structural-verilog writer for CLI fixtures


_VERILOG_ID = re.compile(r"^[A-Za-z_][A-Za-z0-9_$]*$")


def _vname(name):
    if _VERILOG_ID.match(name) and name not in ("module", "input", "output", "wire", "assign"):
        return name
    return f"\\{name} "


def to_structural_verilog(netlist, module_name=None) -> str:
    """Flat structural-Verilog text for a netlist (fixture plumbing).

    Modules and groupings are not emitted; names are escaped as needed.
    """
    lines = []
    inputs = sorted(
        (n for n in netlist.nets.values() if n.global_input), key=lambda n: n.id
    )
    outputs = sorted(
        (n for n in netlist.nets.values() if n.global_output and not n.global_input),
        key=lambda n: n.id,
    )
    ports = [_vname(n.name) for n in inputs + outputs]
    lines.append(f"module {module_name or _vname(netlist.name)} ({', '.join(ports)});")
    for n in inputs:
        lines.append(f"  input {_vname(n.name)};")
    for n in outputs:
        lines.append(f"  output {_vname(n.name)};")
    for n in sorted(netlist.nets.values(), key=lambda n: n.id):
        if n.global_input or n.global_output:
            continue
        lines.append(f"  wire {_vname(n.name)};")
    for g in sorted(netlist.gates.values(), key=lambda g: g.id):
        conns = ", ".join(
            f".{pin}({_vname(netlist.net(nid).name)})"
            for pin, nid in sorted(g.connections.items())
        )
        lines.append(f"  {g.type_name} {_vname(g.name)} ({conns});")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"
