"""Standard-cell gate libraries parsed from a liberty-format subset.

Only what reverse engineering needs is consumed: ``library``, ``cell``,
``pin`` (direction, function) and ``ff`` (next_state, clocked_on, clear,
preset) groups.  Timing, power and every other attribute are skipped with a
warning.  Level-sensitive ``latch`` groups are rejected because downstream
simulation defines edge semantics only.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from . import boolfunc as bf
from .errors import LibertyError

log = logging.getLogger(__name__)

INPUT = "input"
OUTPUT = "output"

PROP_COMBINATIONAL = "combinational"
PROP_SEQUENTIAL = "sequential"
PROP_BUFFER_LIKE = "buffer_like"
PROP_CONSTANT_SOURCE = "constant_source"


@dataclass(frozen=True)
class FlipFlopSpec:
    """Edge-triggered storage semantics of a sequential cell.

    ``next_state`` may reference the state variable itself (enable-style
    hold paths); ``clock``, ``clear`` and ``preset`` range over input pins
    only.  ``output_binding`` maps each output pin to ``"state"`` or
    ``"negated"``.
    """

    state_var: str
    state_var_neg: str
    next_state: bf.BooleanFunction
    clock: bf.BooleanFunction
    clear: bf.BooleanFunction | None = None
    preset: bf.BooleanFunction | None = None
    output_binding: dict = field(default_factory=dict)


@dataclass(frozen=True)
class GateType:
    """One cell: pin list, per-output functions, optional flip-flop spec."""

    name: str
    pins: tuple  # of (name, direction)
    output_functions: dict  # output pin -> BooleanFunction over input pins
    ff: FlipFlopSpec | None = None
    properties: frozenset = frozenset()

    @property
    def input_pins(self):
        return tuple(p for p, d in self.pins if d == INPUT)

    @property
    def output_pins(self):
        return tuple(p for p, d in self.pins if d == OUTPUT)

    def pin_direction(self, pin):
        for p, d in self.pins:
            if p == pin:
                return d
        return None

    @property
    def is_sequential(self):
        return PROP_SEQUENTIAL in self.properties

    @property
    def is_combinational(self):
        return PROP_COMBINATIONAL in self.properties


class GateLibrary:
    """Immutable name -> GateType catalog."""

    def __init__(self, name, gate_types):
        self.name = name
        self.gate_types = dict(gate_types)

    def get(self, name):
        return self.gate_types.get(name)

    def require(self, name) -> GateType:
        gt = self.gate_types.get(name)
        if gt is None:
            raise KeyError(f"unknown gate type {name!r} in library {self.name!r}")
        return gt

    def __contains__(self, name):
        return name in self.gate_types

    def __iter__(self):
        return iter(self.gate_types.values())

    def __len__(self):
        return len(self.gate_types)

    def with_gate_types(self, extra) -> "GateLibrary":
        """A new library extending this one (used for synthesized tie cells)."""
        merged = dict(self.gate_types)
        for gt in extra:
            if gt.name in merged:
                raise ValueError(f"gate type {gt.name!r} already present")
            merged[gt.name] = gt
        return GateLibrary(self.name, merged)


def lookup(library, name):
    """Gate type by name, or None."""
    return library.get(name)


# ---------------------------------------------------------------------------
# liberty tokenizer / group parser


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col


_PUNCT = "{}();:,"


def _tokenize(text, filename):
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(text)
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
        if c == "\\" and i + 1 < n and text[i + 1] == "\n":
            line += 1
            col = 1
            i += 2
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end < 0:
                raise LibertyError("unterminated comment", filename, line, col)
            skipped = text[i : end + 2]
            line += skipped.count("\n")
            col = 1 if "\n" in skipped else col + len(skipped)
            i = end + 2
            continue
        if c == '"':
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise LibertyError("unterminated string", filename, line, col)
                j += 1
            if j >= n:
                raise LibertyError("unterminated string", filename, line, col)
            tokens.append(_Token("string", text[i + 1 : j], line, col))
            col += j + 1 - i
            i = j + 1
            continue
        if c in _PUNCT:
            tokens.append(_Token(c, c, line, col))
            i += 1
            col += 1
            continue
        j = i
        while j < n and text[j] not in _PUNCT and text[j] not in ' \t\r\n"':
            j += 1
        tokens.append(_Token("word", text[i:j], line, col))
        col += j - i
        i = j
    return tokens


@dataclass
class _Group:
    name: str
    args: list
    attributes: list  # (name, value, line, col)
    groups: list
    line: int
    col: int


class _GroupParser:
    def __init__(self, tokens, filename):
        self.tokens = tokens
        self.filename = filename
        self.pos = 0

    def error(self, message, token=None):
        tok = token or self.peek()
        line = tok.line if tok else 0
        col = tok.col if tok else 0
        raise LibertyError(message, self.filename, line, col)

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, kind=None):
        tok = self.peek()
        if tok is None:
            raise LibertyError("unexpected end of file", self.filename, 0, 0)
        if kind and tok.kind != kind:
            self.error(f"expected {kind!r}, got {tok.text!r}", tok)
        self.pos += 1
        return tok

    def parse_group(self):
        name_tok = self.take("word")
        self.take("(")
        args = []
        while self.peek() and self.peek().kind != ")":
            tok = self.take()
            if tok.kind == ",":
                continue
            args.append(tok.text)
        self.take(")")
        nxt = self.peek()
        if nxt is None:
            self.error("expected '{' or ';'", name_tok)
        if nxt.kind == ";":
            # complex attribute, e.g. values(...); treated as an attribute
            self.take(";")
            return _Group(name_tok.text, args, [], [], name_tok.line, name_tok.col), True
        self.take("{")
        group = _Group(name_tok.text, args, [], [], name_tok.line, name_tok.col)
        while True:
            tok = self.peek()
            if tok is None:
                self.error("unexpected end of file inside group", name_tok)
            if tok.kind == "}":
                self.take("}")
                if self.peek() and self.peek().kind == ";":
                    self.take(";")
                return group, False
            word = self.take("word")
            sep = self.peek()
            if sep and sep.kind == ":":
                self.take(":")
                value_parts = []
                while self.peek() and self.peek().kind not in (";", "}"):
                    value_parts.append(self.take().text)
                if self.peek() and self.peek().kind == ";":
                    self.take(";")
                group.attributes.append(
                    (word.text, " ".join(value_parts), word.line, word.col)
                )
            elif sep and sep.kind == "(":
                self.pos -= 1
                sub, was_attr = self.parse_group()
                if was_attr:
                    group.attributes.append((sub.name, None, sub.line, sub.col))
                else:
                    group.groups.append(sub)
            else:
                self.error(f"expected ':' or '(' after {word.text!r}", word)


# ---------------------------------------------------------------------------
# semantic pass


_KNOWN_PIN_ATTRS = {"direction", "function", "clock"}


def _compile_function(text, allowed, filename, line, col, context):
    try:
        f = bf.parse(text)
    except Exception as exc:
        raise LibertyError(f"bad function in {context}: {exc}", filename, line, col) from None
    bad = bf.support(f) - allowed
    if bad:
        raise LibertyError(
            f"{context} references undeclared pin(s): {', '.join(sorted(bad))}",
            filename,
            line,
            col,
        )
    return f


def _build_gate_type(cell, filename):
    if not cell.args:
        raise LibertyError("cell without a name", filename, cell.line, cell.col)
    name = cell.args[0]
    pins = []
    functions_raw = {}
    ff_group = None
    for sub in cell.groups:
        if sub.name == "pin":
            if not sub.args:
                raise LibertyError("pin without a name", filename, sub.line, sub.col)
            pin_name = sub.args[0]
            if any(p == pin_name for p, _ in pins):
                raise LibertyError(
                    f"duplicate pin {pin_name!r} in cell {name!r}",
                    filename,
                    sub.line,
                    sub.col,
                )
            direction = None
            function = None
            for attr, value, line, col in sub.attributes:
                if attr == "direction":
                    if value not in (INPUT, OUTPUT):
                        raise LibertyError(
                            f"unsupported pin direction {value!r}", filename, line, col
                        )
                    direction = value
                elif attr == "function":
                    function = (value, line, col)
                elif attr not in _KNOWN_PIN_ATTRS:
                    log.warning(
                        "%s:%d:%d: skipping pin attribute %r", filename, line, col, attr
                    )
            if direction is None:
                raise LibertyError(
                    f"pin {pin_name!r} has no direction", filename, sub.line, sub.col
                )
            pins.append((pin_name, direction))
            if function is not None:
                functions_raw[pin_name] = function
        elif sub.name == "ff":
            if ff_group is not None:
                raise LibertyError(
                    f"cell {name!r} has more than one ff group", filename, sub.line, sub.col
                )
            ff_group = sub
        elif sub.name == "latch":
            raise LibertyError(
                f"cell {name!r} is a latch; level-sensitive cells are not supported",
                filename,
                sub.line,
                sub.col,
            )
        else:
            log.warning(
                "%s:%d:%d: skipping group %r in cell %r",
                filename,
                sub.line,
                sub.col,
                sub.name,
                name,
            )
    for attr, _, line, col in cell.attributes:
        log.warning("%s:%d:%d: skipping cell attribute %r", filename, line, col, attr)

    input_pins = {p for p, d in pins if d == INPUT}
    output_pins = [p for p, d in pins if d == OUTPUT]
    if not output_pins:
        raise LibertyError(f"cell {name!r} has no output pins", filename, cell.line, cell.col)

    ff = None
    if ff_group is not None:
        if len(ff_group.args) != 2:
            raise LibertyError(
                "ff group needs two state variable names",
                filename,
                ff_group.line,
                ff_group.col,
            )
        state_var, state_var_neg = ff_group.args
        attrs = {a: (v, line, col) for a, v, line, col in ff_group.attributes}
        if "next_state" not in attrs or "clocked_on" not in attrs:
            raise LibertyError(
                f"ff group of cell {name!r} needs next_state and clocked_on",
                filename,
                ff_group.line,
                ff_group.col,
            )
        for extra in set(attrs) - {"next_state", "clocked_on", "clear", "preset"}:
            v = attrs.pop(extra)
            log.warning("%s:%d:%d: skipping ff attribute %r", filename, v[1], v[2], extra)
        next_state = _compile_function(
            attrs["next_state"][0],
            input_pins | {state_var},
            filename,
            attrs["next_state"][1],
            attrs["next_state"][2],
            f"next_state of {name!r}",
        )
        clock = _compile_function(
            attrs["clocked_on"][0],
            input_pins,
            filename,
            attrs["clocked_on"][1],
            attrs["clocked_on"][2],
            f"clocked_on of {name!r}",
        )
        clear = preset = None
        if "clear" in attrs:
            clear = _compile_function(
                attrs["clear"][0], input_pins, filename,
                attrs["clear"][1], attrs["clear"][2], f"clear of {name!r}",
            )
        if "preset" in attrs:
            preset = _compile_function(
                attrs["preset"][0], input_pins, filename,
                attrs["preset"][1], attrs["preset"][2], f"preset of {name!r}",
            )
        binding = {}
        for pin_name in output_pins:
            if pin_name not in functions_raw:
                raise LibertyError(
                    f"output pin {pin_name!r} of sequential cell {name!r} has no function",
                    filename,
                    cell.line,
                    cell.col,
                )
            text, line, col = functions_raw.pop(pin_name)
            f = _compile_function(
                text,
                {state_var, state_var_neg},
                filename,
                line,
                col,
                f"output {pin_name!r} of {name!r}",
            )
            s = bf.simplify(f)
            if s == bf.var(state_var):
                binding[pin_name] = "state"
            elif s == bf.var(state_var_neg) or s == bf.not_(bf.var(state_var)):
                binding[pin_name] = "negated"
            else:
                raise LibertyError(
                    f"output {pin_name!r} of sequential cell {name!r} must be the "
                    f"state variable or its negation",
                    filename,
                    line,
                    col,
                )
        ff = FlipFlopSpec(state_var, state_var_neg, next_state, clock, clear, preset, binding)
        output_functions = {}
    else:
        output_functions = {}
        for pin_name in output_pins:
            if pin_name not in functions_raw:
                raise LibertyError(
                    f"output pin {pin_name!r} of cell {name!r} has no function",
                    filename,
                    cell.line,
                    cell.col,
                )
            text, line, col = functions_raw.pop(pin_name)
            output_functions[pin_name] = _compile_function(
                text, input_pins, filename, line, col, f"output {pin_name!r} of {name!r}"
            )
    if functions_raw:
        stray = next(iter(functions_raw))
        raise LibertyError(
            f"input pin {stray!r} of cell {name!r} carries a function",
            filename,
            cell.line,
            cell.col,
        )

    properties = set()
    if ff is not None:
        properties.add(PROP_SEQUENTIAL)
    else:
        properties.add(PROP_COMBINATIONAL)
        if all(bf.simplify(f).is_constant for f in output_functions.values()):
            properties.add(PROP_CONSTANT_SOURCE)
        if len(input_pins) == 1 and len(output_pins) == 1:
            only_out = output_functions[output_pins[0]]
            if bf.simplify(only_out) == bf.var(next(iter(input_pins))):
                properties.add(PROP_BUFFER_LIKE)

    return GateType(
        name=name,
        pins=tuple(pins),
        output_functions=output_functions,
        ff=ff,
        properties=frozenset(properties),
    )


def parse_liberty(text, filename="<liberty>") -> GateLibrary:
    """Parse a liberty-subset document into a :class:`GateLibrary`."""
    tokens = _tokenize(text, filename)
    if not tokens:
        raise LibertyError("empty library file", filename, 1, 1)
    parser = _GroupParser(tokens, filename)
    top, was_attr = parser.parse_group()
    if was_attr or top.name != "library":
        raise LibertyError(
            "expected a top-level library group", filename, top.line, top.col
        )
    if parser.peek() is not None:
        parser.error("trailing input after library group")
    lib_name = top.args[0] if top.args else "library"
    gate_types = {}
    for sub in top.groups:
        if sub.name != "cell":
            log.warning(
                "%s:%d:%d: skipping library group %r", filename, sub.line, sub.col, sub.name
            )
            continue
        gt = _build_gate_type(sub, filename)
        if gt.name in gate_types:
            raise LibertyError(
                f"duplicate cell name {gt.name!r}", filename, sub.line, sub.col
            )
        gate_types[gt.name] = gt
    for attr, _, line, col in top.attributes:
        log.warning("%s:%d:%d: skipping library attribute %r", filename, line, col, attr)
    return GateLibrary(lib_name, gate_types)


def dump_liberty(library) -> str:
    """Debug dump of a library; re-parsing it reproduces the same model."""
    out = [f"library ({library.name}) {{"]
    for gt in library:
        out.append(f"  cell ({gt.name}) {{")
        if gt.ff is not None:
            out.append(f"    ff ({gt.ff.state_var}, {gt.ff.state_var_neg}) {{")
            out.append(f'      next_state : "{bf.to_string(gt.ff.next_state)}";')
            out.append(f'      clocked_on : "{bf.to_string(gt.ff.clock)}";')
            if gt.ff.clear is not None:
                out.append(f'      clear : "{bf.to_string(gt.ff.clear)}";')
            if gt.ff.preset is not None:
                out.append(f'      preset : "{bf.to_string(gt.ff.preset)}";')
            out.append("    }")
        for pin, direction in gt.pins:
            out.append(f"    pin ({pin}) {{")
            out.append(f"      direction : {direction};")
            if pin in gt.output_functions:
                out.append(f'      function : "{bf.to_string(gt.output_functions[pin])}";')
            elif gt.ff is not None and pin in gt.ff.output_binding:
                state = gt.ff.state_var if gt.ff.output_binding[pin] == "state" else gt.ff.state_var_neg
                out.append(f'      function : "{state}";')
            out.append("    }")
        out.append("  }")
    out.append("}")
    return "\n".join(out) + "\n"
