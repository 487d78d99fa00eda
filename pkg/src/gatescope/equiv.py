"""Equivalence checking for Boolean functions.

Two functions are compared by testing satisfiability of their XOR
difference.  Small combined supports are settled exhaustively with
word-parallel truth tables; larger ones go through a Tseitin transformation
to CNF and a DPLL-style search bounded by a conflict budget.  A blown budget
yields ``inconclusive`` — never a wrong verdict.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import boolfunc as bf

DEFAULT_BRUTE_FORCE_MAX_VARS = 14
DEFAULT_CONFLICT_BUDGET = 50_000


@dataclass(frozen=True)
class EquivConfig:
    """Resource caps for :func:`equivalent`.

    ``brute_force_max_vars``: combined-support size up to which the check is
    an exhaustive truth table.  ``conflict_budget``: DPLL conflicts allowed
    beyond that before declaring the check inconclusive.
    """

    brute_force_max_vars: int = DEFAULT_BRUTE_FORCE_MAX_VARS
    conflict_budget: int = DEFAULT_CONFLICT_BUDGET


DEFAULT_CONFIG = EquivConfig()

EQUAL = "equal"
DIFFERENT = "different"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class EquivResult:
    status: str
    counterexample: dict | None = None

    @property
    def is_equal(self):
        return self.status == EQUAL

    def __bool__(self):
        raise TypeError("use .is_equal or .status; truthiness is ambiguous")


def _full_assignment(partial, names):
    return {n: partial.get(n, 0) for n in names}


def equivalent(f, g, config=None) -> EquivResult:
    """Check ``f == g`` for all assignments.

    Returns ``equal``, or ``different`` with a concrete assignment over the
    union support on which the two functions disagree, or ``inconclusive``
    when the configured search budget runs out.
    """
    config = config or DEFAULT_CONFIG
    names = sorted(bf.support(f) | bf.support(g))
    diff = bf.simplify(bf.xor(f, g))
    if diff == bf.ZERO:
        return EquivResult(EQUAL)
    if diff == bf.ONE:
        return EquivResult(DIFFERENT, _full_assignment({}, names))
    diff_names = sorted(bf.support(diff))
    if len(diff_names) <= config.brute_force_max_vars:
        table = bf.truth_table_int(diff, diff_names)
        if table == 0:
            return EquivResult(EQUAL)
        row = (table & -table).bit_length() - 1
        partial = {n: (row >> i) & 1 for i, n in enumerate(diff_names)}
        return EquivResult(DIFFERENT, _full_assignment(partial, names))
    status, model = _solve(diff, config.conflict_budget)
    if status == "unsat":
        return EquivResult(EQUAL)
    if status == "unknown":
        return EquivResult(INCONCLUSIVE)
    return EquivResult(DIFFERENT, _full_assignment(model, names))


def tseitin(f):
    """CNF encoding of ``f`` with one solver variable per graph node.

    Returns ``(num_vars, clauses, var_ids)`` where ``clauses`` asserts the
    node definitions plus the root being true, and ``var_ids`` maps input
    variable names to solver variables (1-based).
    """
    clauses = []
    var_ids = {}
    node_lit = {}
    counter = 0

    def fresh():
        nonlocal counter
        counter += 1
        return counter

    for node in bf.postorder(f):
        if node.op == "var":
            if node.name not in var_ids:
                var_ids[node.name] = fresh()
            node_lit[id(node)] = var_ids[node.name]
        elif node.op in ("0", "1"):
            v = fresh()
            clauses.append((v,) if node.op == "1" else (-v,))
            node_lit[id(node)] = v
        elif node.op == "not":
            node_lit[id(node)] = -node_lit[id(node.args[0])]
        elif node.op == "and":
            t = fresh()
            lits = [node_lit[id(a)] for a in node.args]
            for a in lits:
                clauses.append((-t, a))
            clauses.append(tuple([t] + [-a for a in lits]))
            node_lit[id(node)] = t
        elif node.op == "or":
            t = fresh()
            lits = [node_lit[id(a)] for a in node.args]
            for a in lits:
                clauses.append((t, -a))
            clauses.append(tuple([-t] + lits))
            node_lit[id(node)] = t
        else:  # xor, folded pairwise
            lits = [node_lit[id(a)] for a in node.args]
            acc = lits[0]
            for b in lits[1:]:
                t = fresh()
                clauses.append((-t, acc, b))
                clauses.append((-t, -acc, -b))
                clauses.append((t, -acc, b))
                clauses.append((t, acc, -b))
                acc = t
            node_lit[id(node)] = acc
    root = node_lit[id(f)]
    clauses.append((root,))
    return counter, clauses, var_ids


def dpll(num_vars, clauses, conflict_budget):
    """Chronological-backtracking DPLL with unit propagation.

    Returns ``("sat", model)``, ``("unsat", None)`` or ``("unknown", None)``
    once more than ``conflict_budget`` conflicts occurred.
    """
    assign = [None] * (num_vars + 1)
    occurs = [[] for _ in range(2 * num_vars + 2)]

    def lit_index(lit):
        return 2 * abs(lit) + (0 if lit > 0 else 1)

    for ci, clause in enumerate(clauses):
        for lit in clause:
            occurs[lit_index(lit)].append(ci)

    counts = [0] * (num_vars + 1)
    for clause in clauses:
        for lit in clause:
            counts[abs(lit)] += 1
    branch_order = sorted(range(1, num_vars + 1), key=lambda v: (-counts[v], v))

    trail = []  # (var, value, is_decision)
    conflicts = 0

    def value_of(lit):
        v = assign[abs(lit)]
        if v is None:
            return None
        return v if lit > 0 else not v

    _MANY = object()  # clause has two or more free literals

    def propagate(start):
        # process every assignment from trail[start:] once, including the
        # implications appended while the loop runs
        i = start
        while i < len(trail):
            v = trail[i][0]
            i += 1
            false_lit = -v if assign[v] else v
            for ci in occurs[lit_index(false_lit)]:
                clause = clauses[ci]
                unassigned = None
                satisfied = False
                for lit in clause:
                    lv = value_of(lit)
                    if lv is True:
                        satisfied = True
                        break
                    if lv is None:
                        if unassigned is not None:
                            unassigned = _MANY
                            break
                        unassigned = lit
                if satisfied or unassigned is _MANY:
                    continue
                if unassigned is None:
                    return False  # conflict
                uv = abs(unassigned)
                assign[uv] = unassigned > 0
                trail.append((uv, assign[uv], False))
        return True

    # assert unit clauses up front
    for clause in clauses:
        if len(clause) == 1:
            lit = clause[0]
            v = abs(lit)
            want = lit > 0
            if assign[v] is None:
                assign[v] = want
                trail.append((v, want, False))
            elif assign[v] != want:
                return "unsat", None
    if not propagate(0):
        return "unsat", None

    def next_decision():
        for v in branch_order:
            if assign[v] is None:
                return v
        return None

    tried_both = []
    while True:
        v = next_decision()
        if v is None:
            model = {i: bool(assign[i]) for i in range(1, num_vars + 1)}
            return "sat", model
        assign[v] = False
        trail.append((v, False, True))
        tried_both.append(False)
        while not propagate(len(trail) - 1):
            conflicts += 1
            if conflicts > conflict_budget:
                return "unknown", None
            # backtrack to the last decision that still has a value to try
            while True:
                while trail and not trail[-1][2]:
                    dv, _, _ = trail.pop()
                    assign[dv] = None
                if not trail:
                    return "unsat", None
                dv, _, _ = trail.pop()
                assign[dv] = None
                flipped = tried_both.pop()
                if not flipped:
                    assign[dv] = True
                    trail.append((dv, True, True))
                    tried_both.append(True)
                    break


def _solve(diff, conflict_budget):
    num_vars, clauses, var_ids = tseitin(diff)
    status, model = dpll(num_vars, clauses, conflict_budget)
    if status != "sat":
        return status, None
    assignment = {name: int(model[vid]) for name, vid in var_ids.items()}
    # the model must really witness a difference; guards against solver bugs
    assert bf.evaluate(diff, assignment) == 1
    return "sat", assignment
