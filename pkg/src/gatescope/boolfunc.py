"""Boolean function trees: construction, evaluation, rewriting, truth tables.

Functions are immutable expression graphs over named variables with node
kinds ``0``, ``1``, ``var``, ``not``, ``and``, ``or``, ``xor`` (the last three
n-ary with at least two children).  Sub-expressions may be shared; every
traversal in this module walks the graph as a DAG, so composition-heavy
callers (cone extraction, sequential unrolling) stay linear in the number of
distinct nodes.

The text form uses ``!``, ``&``, ``^``, ``|`` and parentheses, with ``!``
binding tightest and ``|`` loosest; ``parse`` accepts that grammar plus the
gate-library synonyms ``'`` (postfix not), ``*`` and ``+``.

Variable naming conventions used by the netlist-level passes:
``n<net-id>`` for boundary nets, ``s<gate-id>`` for flip-flop initial state,
``n<net-id>@<cycle>`` for per-cycle symbolic inputs.
"""

from __future__ import annotations

import re

from .errors import (
    EvaluationError,
    FunctionSyntaxError,
    TooManyVariablesError,
)

TRUTH_TABLE_VAR_CAP = 20

_NARY = ("and", "or", "xor")


class BooleanFunction:
    """One node of an immutable Boolean expression graph.

    Build instances through the module-level factories (:func:`var`,
    :func:`const`, :func:`not_`, :func:`and_`, :func:`or_`, :func:`xor`) or
    the ``& | ^ ~`` operators; the constructor performs no restructuring.
    """

    __slots__ = ("op", "name", "args", "_hash")

    def __init__(self, op, name=None, args=()):
        if op in _NARY and len(args) < 2:
            raise ValueError(f"{op} node needs at least two children")
        if op == "var" and not name:
            raise ValueError("variable name must be non-empty")
        self.op = op
        self.name = name
        self.args = tuple(args)
        self._hash = hash((op, name, tuple(a._hash for a in self.args)))

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, BooleanFunction):
            return NotImplemented
        if self._hash != other._hash or self.op != other.op or self.name != other.name:
            return False
        if len(self.args) != len(other.args):
            return False
        return all(a == b for a, b in zip(self.args, other.args))

    def __hash__(self):
        return self._hash

    def __and__(self, other):
        return and_(self, other)

    def __or__(self, other):
        return or_(self, other)

    def __xor__(self, other):
        return xor(self, other)

    def __invert__(self):
        return not_(self)

    def __str__(self):
        return to_string(self)

    def __repr__(self):
        return f"BooleanFunction({to_string(self)})"

    @property
    def is_constant(self):
        return self.op in ("0", "1")

    @property
    def constant_value(self):
        if not self.is_constant:
            raise ValueError("not a constant")
        return int(self.op)


ZERO = BooleanFunction("0")
ONE = BooleanFunction("1")


def const(value) -> BooleanFunction:
    return ONE if value else ZERO


def var(name) -> BooleanFunction:
    return BooleanFunction("var", name=name)


def not_(f) -> BooleanFunction:
    return BooleanFunction("not", args=(f,))


def and_(*args) -> BooleanFunction:
    if not args:
        raise ValueError("and_ needs at least one argument")
    return args[0] if len(args) == 1 else BooleanFunction("and", args=args)


def or_(*args) -> BooleanFunction:
    if not args:
        raise ValueError("or_ needs at least one argument")
    return args[0] if len(args) == 1 else BooleanFunction("or", args=args)


def xor(*args) -> BooleanFunction:
    if not args:
        raise ValueError("xor needs at least one argument")
    return args[0] if len(args) == 1 else BooleanFunction("xor", args=args)


def postorder(f):
    """Distinct nodes of ``f``, children before parents, each exactly once."""
    seen = set()
    order = []
    stack = [(f, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for a in node.args:
            stack.append((a, False))
    return order


def support(f):
    """The set of variable names ``f`` depends on syntactically."""
    names = set()
    for node in postorder(f):
        if node.op == "var":
            names.add(node.name)
    return names


def node_count(f):
    """Number of distinct nodes in the expression graph."""
    return len(postorder(f))


def evaluate(f, assignment) -> int:
    """Evaluate ``f`` under a complete 0/1 variable assignment."""
    values = {}
    for node in postorder(f):
        if node.op == "0":
            v = 0
        elif node.op == "1":
            v = 1
        elif node.op == "var":
            try:
                v = 1 if assignment[node.name] else 0
            except KeyError:
                raise EvaluationError(f"no value for variable {node.name!r}") from None
        elif node.op == "not":
            v = 1 - values[id(node.args[0])]
        elif node.op == "and":
            v = 1
            for a in node.args:
                v &= values[id(a)]
        elif node.op == "or":
            v = 0
            for a in node.args:
                v |= values[id(a)]
        else:  # xor
            v = 0
            for a in node.args:
                v ^= values[id(a)]
        values[id(node)] = v
    return values[id(f)]


def _var_mask(index, k):
    # Bit x of the mask is bit `index` of the row number x.
    block = ((1 << (1 << index)) - 1) << (1 << index)
    width = 1 << (index + 1)
    total = 1 << k
    m = block
    while width < total:
        m |= m << width
        width <<= 1
    return m


def truth_table_int(f, order):
    """Truth table of ``f`` as an integer bit mask over ``2**len(order)`` rows.

    Bit x of the result is the value of ``f`` on the assignment where
    variable ``order[i]`` takes bit i of x.  All rows are computed at once
    with word-parallel integer operations.
    """
    k = len(order)
    full = (1 << (1 << k)) - 1
    index = {name: i for i, name in enumerate(order)}
    values = {}
    for node in postorder(f):
        if node.op == "0":
            v = 0
        elif node.op == "1":
            v = full
        elif node.op == "var":
            try:
                v = _var_mask(index[node.name], k)
            except KeyError:
                raise EvaluationError(f"variable {node.name!r} not in order") from None
        elif node.op == "not":
            v = full ^ values[id(node.args[0])]
        elif node.op == "and":
            v = full
            for a in node.args:
                v &= values[id(a)]
        elif node.op == "or":
            v = 0
            for a in node.args:
                v |= values[id(a)]
        else:
            v = 0
            for a in node.args:
                v ^= values[id(a)]
        values[id(node)] = v
    return values[id(f)]


class TruthTable:
    """Exhaustive evaluation of a function over an explicit variable order.

    Row x assigns bit i of x to ``variables[i]`` (variable 0 is the least
    significant index bit).  The 2^k output bits are stored packed.
    """

    __slots__ = ("variables", "bits")

    def __init__(self, variables, bits):
        self.variables = tuple(variables)
        self.bits = bits

    def __len__(self):
        return 1 << len(self.variables)

    def __getitem__(self, row):
        if not 0 <= row < len(self):
            raise IndexError(row)
        return (self.bits >> row) & 1

    def to_list(self):
        return [(self.bits >> i) & 1 for i in range(len(self))]

    def __eq__(self, other):
        return (
            isinstance(other, TruthTable)
            and self.variables == other.variables
            and self.bits == other.bits
        )

    def __repr__(self):
        return f"TruthTable({self.variables}, {self.to_list()})"


def truth_table(f, order=None) -> TruthTable:
    """Exhaustively evaluate ``f``; at most ``TRUTH_TABLE_VAR_CAP`` variables.

    The variable order defaults to sorted support names.
    """
    if order is None:
        order = sorted(support(f))
    else:
        order = list(order)
        missing = support(f) - set(order)
        if missing:
            raise EvaluationError(f"order misses variables: {sorted(missing)}")
    if len(order) > TRUTH_TABLE_VAR_CAP:
        raise TooManyVariablesError(
            f"{len(order)} variables exceed the {TRUTH_TABLE_VAR_CAP}-variable cap"
        )
    return TruthTable(order, truth_table_int(f, order))


def substitute(f, name, replacement) -> BooleanFunction:
    """Replace every occurrence of variable ``name`` with ``replacement``."""
    return substitute_all(f, {name: replacement})


def substitute_all(f, mapping) -> BooleanFunction:
    """Parallel substitution of several variables; unmapped nodes are shared."""
    if not mapping:
        return f
    out = {}
    for node in postorder(f):
        if node.op == "var" and node.name in mapping:
            out[id(node)] = mapping[node.name]
        elif node.args:
            new_args = tuple(out[id(a)] for a in node.args)
            if all(n is o for n, o in zip(new_args, node.args)):
                out[id(node)] = node
            else:
                out[id(node)] = BooleanFunction(node.op, node.name, new_args)
        else:
            out[id(node)] = node
    return out[id(f)]


def rename(f, name_map) -> BooleanFunction:
    """Rename variables according to ``name_map`` (missing names unchanged)."""
    return substitute_all(f, {old: var(new) for old, new in name_map.items()})


def _dedupe(args):
    seen = []
    for a in args:
        if not any(a == s for s in seen):
            seen.append(a)
    return seen


def _simplify_and_or(op, args):
    absorbing = ZERO if op == "and" else ONE
    neutral = ONE if op == "and" else ZERO
    inner_op = "or" if op == "and" else "and"
    flat = []
    for a in args:
        if a.op == op:
            flat.extend(a.args)
        else:
            flat.append(a)
    kept = []
    for a in flat:
        if a == absorbing:
            return absorbing
        if a == neutral:
            continue
        kept.append(a)
    kept = _dedupe(kept)
    # complementary pair: x together with !x collapses the whole node
    for a in kept:
        if a.op == "not" and any(a.args[0] == b for b in kept):
            return absorbing
    # absorption: AND(x, OR(x, y)) -> x and its dual
    kept = [
        a
        for a in kept
        if not (a.op == inner_op and any(b is not a and any(c == b for c in a.args) for b in kept))
    ]
    if not kept:
        return neutral
    if len(kept) == 1:
        return kept[0]
    return BooleanFunction(op, args=kept)


def _simplify_xor(args):
    flat = []
    parity = 0
    for a in args:
        if a.op == "xor":
            flat.extend(a.args)
        else:
            flat.append(a)
    kept = []
    for a in flat:
        if a == ONE:
            parity ^= 1
        elif a == ZERO:
            continue
        else:
            kept.append(a)
    # identical pairs cancel
    remaining = []
    for a in kept:
        for i, b in enumerate(remaining):
            if a == b:
                del remaining[i]
                break
        else:
            remaining.append(a)
    # x ^ !x contributes a constant 1
    changed = True
    while changed:
        changed = False
        for a in remaining:
            if a.op != "not":
                continue
            for b in remaining:
                if b is not a and a.args[0] == b:
                    remaining.remove(a)
                    remaining.remove(b)
                    parity ^= 1
                    changed = True
                    break
            if changed:
                break
    if not remaining:
        return const(parity)
    if len(remaining) == 1:
        core = remaining[0]
    else:
        core = BooleanFunction("xor", args=remaining)
    return _simplify_not(core) if parity else core


def _simplify_not(arg):
    if arg == ZERO:
        return ONE
    if arg == ONE:
        return ZERO
    if arg.op == "not":
        return arg.args[0]
    return BooleanFunction("not", args=(arg,))


def _simplify_pass(f):
    out = {}
    changed = False
    for node in postorder(f):
        if not node.args:
            out[id(node)] = node
            continue
        new_args = tuple(out[id(a)] for a in node.args)
        if node.op == "not":
            new = _simplify_not(new_args[0])
        elif node.op == "xor":
            new = _simplify_xor(new_args)
        else:
            new = _simplify_and_or(node.op, new_args)
        if new is node or new == node:
            new = node
        else:
            changed = True
        out[id(node)] = new
    return out[id(f)], changed


_MAX_SIMPLIFY_PASSES = 8


def simplify(f) -> BooleanFunction:
    """Rule-based rewriting to a fixpoint.

    Applies constant folding, double negation, flattening, idempotence,
    absorption and xor-cancellation.  The result is equivalent to the input
    and never has more nodes; no canonical form is attempted.
    """
    current = f
    for _ in range(_MAX_SIMPLIFY_PASSES):
        current, changed = _simplify_pass(current)
        if not changed:
            break
    return current


_PRECEDENCE = {"or": 1, "xor": 2, "and": 3, "not": 4}
_OP_SYMBOL = {"or": " | ", "xor": " ^ ", "and": " & "}


def to_string(f) -> str:
    """Render as infix text with minimal parentheses (parseable back)."""
    texts = {}
    for node in postorder(f):
        if node.op in ("0", "1"):
            texts[id(node)] = node.op
        elif node.op == "var":
            texts[id(node)] = node.name
        elif node.op == "not":
            child = node.args[0]
            t = texts[id(child)]
            if child.op in _OP_SYMBOL:
                t = f"({t})"
            texts[id(node)] = f"!{t}"
        else:
            parts = []
            for a in node.args:
                t = texts[id(a)]
                if a.op in _OP_SYMBOL and _PRECEDENCE[a.op] < _PRECEDENCE[node.op]:
                    t = f"({t})"
                parts.append(t)
            texts[id(node)] = _OP_SYMBOL[node.op].join(parts)
    return texts[id(f)]


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_\[\]@.]*)|(?P<const>[01])"
    r"|(?P<op>[!'&*|+^()]))"
)


class _FunctionParser:
    """Recursive-descent parser for the infix grammar (plus liberty synonyms)."""

    def __init__(self, text):
        self.text = text
        self.tokens = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m:
                if text[pos:].strip():
                    raise FunctionSyntaxError(
                        f"unexpected character {text[pos:].strip()[0]!r} in {text!r}"
                    )
                break
            self.tokens.append(m.group().strip())
            pos = m.end()
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def parse(self):
        f = self.parse_or()
        if self.peek() is not None:
            raise FunctionSyntaxError(f"trailing input at {self.peek()!r} in {self.text!r}")
        return f

    def parse_or(self):
        terms = [self.parse_xor()]
        while self.peek() in ("|", "+"):
            self.take()
            terms.append(self.parse_xor())
        return or_(*terms)

    def parse_xor(self):
        terms = [self.parse_and()]
        while self.peek() == "^":
            self.take()
            terms.append(self.parse_and())
        return xor(*terms)

    def parse_and(self):
        terms = [self.parse_unary()]
        while self.peek() in ("&", "*"):
            self.take()
            terms.append(self.parse_unary())
        return and_(*terms)

    def parse_unary(self):
        tok = self.take()
        if tok is None:
            raise FunctionSyntaxError(f"unexpected end of input in {self.text!r}")
        if tok == "!":
            f = not_(self.parse_unary())
        elif tok == "(":
            f = self.parse_or()
            if self.take() != ")":
                raise FunctionSyntaxError(f"missing ')' in {self.text!r}")
        elif tok in ("0", "1"):
            f = const(int(tok))
        elif tok in ("&", "*", "|", "+", "^", ")", "'"):
            raise FunctionSyntaxError(f"unexpected {tok!r} in {self.text!r}")
        else:
            f = var(tok)
        while self.peek() == "'":
            self.take()
            f = not_(f)
        return f


def parse(text) -> BooleanFunction:
    """Parse an infix function string."""
    if not text or not text.strip():
        raise FunctionSyntaxError("empty function string")
    return _FunctionParser(text).parse()


def cofactor(f, name, value) -> BooleanFunction:
    """Shannon cofactor: ``f`` with variable ``name`` pinned to 0 or 1."""
    return simplify(substitute(f, name, const(value)))
