"""Structural (gate-level) Verilog parsing.

Supported subset: one module with a plain port-name header,
``input``/``output``/``wire`` declarations (scalar and ranged), cell
instantiations with named port connections, and constant assigns.  Ranged
declarations expand to per-bit nets named ``name[i]``.  ``assign a = b``
inserts a buffer cell when the library has one; ``assign a = 1'b0/1'b1`` and
constant port connections use constant-source cells, synthesized as TIE0 /
TIE1 types when the library lacks them.

Behavioral constructs (always, initial, reg, parameters, generate) are
rejected with a located unsupported-construct error.  Undeclared scalar nets
referenced in connections are created implicitly, Verilog-style; the lint
pass flags them if they end up undriven.
"""

from __future__ import annotations

import re

from . import boolfunc as bf
from .errors import UnsupportedConstructError, VerilogError
from .library import (
    INPUT,
    OUTPUT,
    PROP_BUFFER_LIKE,
    PROP_COMBINATIONAL,
    PROP_CONSTANT_SOURCE,
    GateType,
)
from .netlist import Netlist

_BEHAVIORAL = {
    "always", "always_ff", "always_comb", "initial", "reg", "if", "case",
    "for", "while", "generate", "genvar", "parameter", "localparam",
    "function", "task", "specify", "defparam", "integer", "real", "inout",
}

TIE0_NAME = "TIE0"
TIE1_NAME = "TIE1"


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self):
        return f"{self.text!r}@{self.line}:{self.col}"


_CONST_RE = re.compile(r"^(\d+)'([bBdDhH])([0-9a-fA-FxXzZ_]+)$")
_PUNCT = "(),;.=[]{}#:"


def _tokenize(text, filename):
    tokens = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end < 0:
                raise VerilogError("unterminated comment", filename, line, col)
            skipped = text[i : end + 2]
            line += skipped.count("\n")
            col = 1 if "\n" in skipped else col + len(skipped)
            i = end + 2
            continue
        if c == "\\":  # escaped identifier, terminated by whitespace
            j = i + 1
            while j < n and text[j] not in " \t\r\n":
                j += 1
            tokens.append(_Token("ident", text[i + 1 : j], line, col))
            col += j - i
            i = j
            continue
        if c in _PUNCT:
            tokens.append(_Token(c, c, line, col))
            i += 1
            col += 1
            continue
        j = i
        while j < n and text[j] not in _PUNCT and text[j] not in " \t\r\n\\":
            j += 1
        word = text[i:j]
        # keep N'b0 style constants as one token even though ' is not punct
        tokens.append(_Token("word", word, line, col))
        col += j - i
        i = j
    return tokens


class _Parser:
    def __init__(self, text, library, filename):
        self.tokens = _tokenize(text, filename)
        self.pos = 0
        self.filename = filename
        self.library = library
        self.netlist = None
        self.nets_by_name = {}
        self.port_names = []
        self.declared = {}  # name -> ("input"|"output"|"wire", low, high|None)
        self.tie_gates = {}  # constant value -> gate id driving it
        self.tie_counter = 0

    # -- token plumbing ------------------------------------------------------

    def error(self, message, token=None, cls=VerilogError):
        tok = token or self.peek() or _Token("eof", "", 0, 0)
        raise cls(message, self.filename, tok.line, tok.col)

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, kind=None, text=None):
        tok = self.peek()
        if tok is None:
            raise VerilogError("unexpected end of file", self.filename, 0, 0)
        if kind and tok.kind != kind:
            self.error(f"expected {kind!r}, got {tok.text!r}", tok)
        if text and tok.text != text:
            self.error(f"expected {text!r}, got {tok.text!r}", tok)
        self.pos += 1
        return tok

    def take_name(self):
        tok = self.take()
        if tok.kind not in ("word", "ident"):
            self.error(f"expected an identifier, got {tok.text!r}", tok)
        return tok

    # -- net management --------------------------------------------------------

    def _create_net(self, name, token):
        if name in self.nets_by_name:
            self.error(f"net name collision on {name!r}", token)
        net = self.netlist.add_net(name)
        self.nets_by_name[name] = net
        return net

    def _declared_nets(self, name):
        _, low, high = self.declared[name]
        if low is None:
            return [self.nets_by_name[name]]
        return [self.nets_by_name[f"{name}[{i}]"] for i in range(low, high + 1)]

    def declare(self, kind, name, low, high, token):
        if name in self.declared:
            prev_kind, plow, phigh = self.declared[name]
            # `input a; wire a;` style redeclaration is tolerated
            if (plow, phigh) != (low, high):
                self.error(f"conflicting redeclaration of {name!r}", token)
            if kind != "wire" and prev_kind != "wire" and kind != prev_kind:
                self.error(f"conflicting redeclaration of {name!r}", token)
            if kind == "wire":
                return
            self.declared[name] = (kind, low, high)
        else:
            self.declared[name] = (kind, low, high)
            if low is None:
                self._create_net(name, token)
            else:
                for i in range(low, high + 1):
                    self._create_net(f"{name}[{i}]", token)
        for net in self._declared_nets(name):
            if kind == INPUT:
                net.global_input = True
            elif kind == OUTPUT:
                net.global_output = True

    def resolve_net(self, name, index, token):
        key = name if index is None else f"{name}[{index}]"
        if key in self.nets_by_name:
            return self.nets_by_name[key]
        if name in self.declared:
            _, low, _ = self.declared[name]
            if index is None and low is not None:
                self.error(
                    f"{name!r} is a bus; connect a single bit like {name}[0]", token
                )
            self.error(f"index {index} out of range for {name!r}", token)
        if index is None:
            # implicit scalar net
            self.declared[name] = ("wire", None, None)
            return self._create_net(name, token)
        self.error(f"unknown net {key!r}", token)

    # -- constants and buffers -------------------------------------------------

    def _constant_type(self, value):
        name = TIE1_NAME if value else TIE0_NAME
        found = None
        for gt in self.library:
            if PROP_CONSTANT_SOURCE not in gt.properties or gt.input_pins:
                continue
            out = gt.output_pins[0]
            if bf.simplify(gt.output_functions[out]).constant_value == value:
                found = gt
                break
        if found is None:
            found = GateType(
                name=name,
                pins=(("Y", OUTPUT),),
                output_functions={"Y": bf.const(value)},
                properties=frozenset({PROP_COMBINATIONAL, PROP_CONSTANT_SOURCE}),
            )
            self.library = self.library.with_gate_types([found])
            self.netlist.library = self.library
        return found

    def constant_net(self, value, token):
        """A net driven by a constant-source gate (one per constant)."""
        if value in self.tie_gates:
            gate = self.netlist.gate(self.tie_gates[value])
            out_pin = gate.type.output_pins[0]
            return self.netlist.net(gate.connections[out_pin])
        gt = self._constant_type(value)
        self.tie_counter += 1
        gate = self.netlist.add_gate(f"_tie{value}_{self.tie_counter}", gt.name)
        net = self._create_net(f"_const{value}", token)
        self.netlist.connect(gate.id, gt.output_pins[0], net.id)
        self.tie_gates[value] = gate.id
        return net

    def parse_const(self, token):
        m = _CONST_RE.match(token.text)
        if not m:
            return None
        base = m.group(2).lower()
        digits = m.group(3).replace("_", "")
        try:
            value = int(digits, {"b": 2, "d": 10, "h": 16}[base])
        except ValueError:
            self.error(f"bad constant {token.text!r}", token)
        if value not in (0, 1):
            self.error(
                f"only single-bit constants 0/1 are supported, got {token.text!r}",
                token,
                UnsupportedConstructError,
            )
        return value

    # -- grammar ----------------------------------------------------------------

    def parse(self) -> Netlist:
        self.take("word", "module")
        name_tok = self.take_name()
        self.netlist = Netlist(name_tok.text, self.library)
        tok = self.peek()
        if tok and tok.kind == "(":
            self.take("(")
            while self.peek() and self.peek().kind != ")":
                tok = self.take()
                if tok.kind == ",":
                    continue
                if tok.kind not in ("word", "ident"):
                    self.error(f"unexpected {tok.text!r} in port list", tok)
                if tok.text in ("input", "output", "inout", "wire"):
                    self.error(
                        "ANSI-style port declarations are not supported; "
                        "declare directions in the module body",
                        tok,
                        UnsupportedConstructError,
                    )
                self.port_names.append(tok.text)
            self.take(")")
        self.take(";")
        while True:
            tok = self.peek()
            if tok is None:
                self.error("missing endmodule")
            if tok.text == "endmodule":
                self.take()
                break
            if tok.text in ("input", "output", "wire"):
                self.parse_declaration()
            elif tok.text == "assign":
                self.parse_assign()
            elif tok.text in _BEHAVIORAL:
                self.error(
                    f"unsupported construct {tok.text!r} (structural netlists only)",
                    tok,
                    UnsupportedConstructError,
                )
            elif tok.kind in ("word", "ident"):
                self.parse_instantiation()
            else:
                self.error(f"unexpected {tok.text!r}", tok)
        if self.peek() is not None:
            self.error("input after endmodule")
        undeclared_ports = [
            p
            for p in self.port_names
            if p not in self.declared or self.declared[p][0] not in (INPUT, OUTPUT)
        ]
        if undeclared_ports:
            raise VerilogError(
                f"ports without direction declaration: {', '.join(undeclared_ports)}",
                self.filename,
                1,
                1,
            )
        return self.netlist

    def _int_token(self):
        tok = self.take("word")
        try:
            return int(tok.text)
        except ValueError:
            self.error(f"expected a number, got {tok.text!r}", tok)

    def parse_declaration(self):
        kind_tok = self.take()
        kind = {"input": INPUT, "output": OUTPUT, "wire": "wire"}[kind_tok.text]
        low = high = None
        tok = self.peek()
        if tok and tok.kind == "[":
            self.take("[")
            msb = self._int_token()
            self.take(":")
            lsb = self._int_token()
            self.take("]")
            low, high = min(msb, lsb), max(msb, lsb)
        while True:
            name_tok = self.take_name()
            self.declare(kind, name_tok.text, low, high, name_tok)
            nxt = self.take()
            if nxt.kind == ";":
                return
            if nxt.kind != ",":
                self.error(f"expected ',' or ';', got {nxt.text!r}", nxt)

    def parse_net_ref(self):
        """name, name[idx], or a 0/1 constant; returns the Net."""
        tok = self.take()
        if tok.kind == "word":
            value = self.parse_const(tok)
            if value is not None:
                return self.constant_net(value, tok)
        if tok.kind not in ("word", "ident"):
            self.error(f"expected a net reference, got {tok.text!r}", tok)
        index = None
        nxt = self.peek()
        if nxt and nxt.kind == "[":
            self.take("[")
            index = self._int_token()
            if self.peek() and self.peek().kind == ":":
                self.error(
                    "part-selects are not supported",
                    self.peek(),
                    UnsupportedConstructError,
                )
            index = int(index)
            self.take("]")
        return self.resolve_net(tok.text, index, tok)

    def parse_assign(self):
        self.take("word", "assign")
        target = self.parse_net_ref()
        self.take("=")
        tok = self.peek()
        if tok is None:
            self.error("unterminated assign")
        value = self.parse_const(tok) if tok.kind == "word" else None
        if value is not None:
            self.take()
            gt = self._constant_type(value)
            gate = self.netlist.add_gate(f"_assign_tie_{target.name}", gt.name)
            self.netlist.connect(gate.id, gt.output_pins[0], target.id)
        else:
            source = self.parse_net_ref()
            buf = None
            for gt in self.library:
                if PROP_BUFFER_LIKE in gt.properties:
                    buf = gt
                    break
            if buf is None:
                self.error(
                    "assign between nets needs a buffer-like cell in the library",
                    tok,
                )
            gate = self.netlist.add_gate(f"_assign_buf_{target.name}", buf.name)
            self.netlist.connect(gate.id, buf.input_pins[0], source.id)
            self.netlist.connect(gate.id, buf.output_pins[0], target.id)
        self.take(";")

    def parse_instantiation(self):
        type_tok = self.take_name()
        gate_type = self.library.get(type_tok.text)
        if gate_type is None:
            self.error(f"unknown cell type {type_tok.text!r}", type_tok)
        name_tok = self.take_name()
        self.take("(")
        gate = self.netlist.add_gate(name_tok.text, gate_type.name)
        first = True
        while True:
            tok = self.peek()
            if tok is None:
                self.error("unterminated instantiation", name_tok)
            if tok.kind == ")":
                self.take(")")
                break
            if not first:
                self.take(",")
                if self.peek() and self.peek().kind == ")":
                    self.take(")")
                    break
            first = False
            dot = self.peek()
            if dot.kind != ".":
                self.error(
                    "positional port connections are not supported; use .PIN(net)",
                    dot,
                    UnsupportedConstructError,
                )
            self.take(".")
            pin_tok = self.take_name()
            if gate_type.pin_direction(pin_tok.text) is None:
                self.error(
                    f"cell {gate_type.name!r} has no port {pin_tok.text!r}", pin_tok
                )
            self.take("(")
            if self.peek() and self.peek().kind == ")":
                self.take(")")  # unconnected pin
                continue
            if self.peek() and self.peek().kind == "{":
                self.error(
                    "concatenations are not supported",
                    self.peek(),
                    UnsupportedConstructError,
                )
            net = self.parse_net_ref()
            self.netlist.connect(gate.id, pin_tok.text, net.id)
            self.take(")")
        self.take(";")


def parse_verilog(text, library, filename="<verilog>") -> Netlist:
    """Parse structural Verilog against ``library`` into a fresh netlist.

    Gate ids are assigned in source order; ranged wires expand to per-bit
    nets.  The returned netlist's library may extend the given one with
    synthesized TIE cells when constants are used.
    """
    parser = _Parser(text, library, filename)
    return parser.parse()
