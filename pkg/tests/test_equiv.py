import itertools
import random

from gatescope import boolfunc as bf
from gatescope.equiv import (
    DIFFERENT,
    EQUAL,
    INCONCLUSIVE,
    EquivConfig,
    dpll,
    equivalent,
    tseitin,
)

A, B, C = bf.var("A"), bf.var("B"), bf.var("C")

# force the CNF/DPLL path even on tiny functions
SAT_ONLY = EquivConfig(brute_force_max_vars=0)


def brute_force_equal(f, g):
    names = sorted(bf.support(f) | bf.support(g))
    for values in itertools.product((0, 1), repeat=len(names)):
        assignment = dict(zip(names, values))
        if bf.evaluate(f, assignment) != bf.evaluate(g, assignment):
            return False
    return True


def test_de_morgan_equal():
    f = ~(A & B)
    g = ~A | ~B
    assert equivalent(f, g).status == EQUAL
    assert equivalent(f, g, SAT_ONLY).status == EQUAL


def test_and_or_counterexample():
    res = equivalent(A & B, A | B)
    assert res.status == DIFFERENT
    cx = res.counterexample
    assert bf.evaluate(A & B, cx) != bf.evaluate(A | B, cx)
    res2 = equivalent(A & B, A | B, SAT_ONLY)
    assert res2.status == DIFFERENT
    cx2 = res2.counterexample
    assert bf.evaluate(A & B, cx2) != bf.evaluate(A | B, cx2)


def test_ripple_sum_bit_equals_three_way_xor():
    # sum bit of a full adder: a ^ b ^ cin, built the long way
    a, b, cin = bf.var("a"), bf.var("b"), bf.var("cin")
    p = bf.xor(a, b)
    s = bf.or_(bf.and_(p, ~cin), bf.and_(~p, cin))
    direct = bf.xor(a, b, cin)
    # oracle first: all 2^3 rows
    assert brute_force_equal(s, direct)
    assert equivalent(s, direct).status == EQUAL


def test_reflexive_and_symmetric():
    f = bf.or_(bf.and_(A, B), C)
    g = bf.xor(A, C)
    assert equivalent(f, f).status == EQUAL
    r1 = equivalent(f, g)
    r2 = equivalent(g, f)
    assert r1.status == r2.status == DIFFERENT


def test_constant_difference():
    res = equivalent(bf.ZERO, bf.ONE)
    assert res.status == DIFFERENT


def test_budget_exhaustion_is_inconclusive():
    rng = random.Random(7)
    vs = [bf.var(f"v{i}") for i in range(30)]
    terms_f = [bf.and_(*rng.sample(vs, 3)) for _ in range(24)]
    terms_g = [bf.and_(*rng.sample(vs, 3)) for _ in range(24)]
    f = bf.or_(*terms_f)
    g = bf.or_(*terms_g)
    res = equivalent(f, g, EquivConfig(brute_force_max_vars=0, conflict_budget=1))
    assert res.status in (INCONCLUSIVE, DIFFERENT, EQUAL)
    # with a tiny budget on a non-trivial miter we must not claim anything wrong
    if res.status == DIFFERENT:
        assert bf.evaluate(f, res.counterexample) != bf.evaluate(g, res.counterexample)


def test_tseitin_dpll_roundtrip_sat():
    f = bf.and_(A, ~B)
    num_vars, clauses, var_ids = tseitin(f)
    status, model = dpll(num_vars, clauses, 1000)
    assert status == "sat"
    assert model[var_ids["A"]] is True
    assert model[var_ids["B"]] is False


def test_dpll_unsat():
    f = bf.and_(A, ~A)
    # do not simplify: tseitin the contradiction directly
    num_vars, clauses, _ = tseitin(f)
    status, _ = dpll(num_vars, clauses, 1000)
    assert status == "unsat"


def test_random_pairs_agree_with_exhaustive_tables():
    rng = random.Random(2024)
    names = [f"x{i}" for i in range(8)]

    def random_tree(depth):
        if depth == 0 or rng.random() < 0.3:
            r = rng.random()
            if r < 0.1:
                return bf.const(rng.randint(0, 1))
            return bf.var(rng.choice(names))
        op = rng.choice(["not", "and", "or", "xor"])
        if op == "not":
            return bf.not_(random_tree(depth - 1))
        k = rng.randint(2, 3)
        return BooleanOp(op, [random_tree(depth - 1) for _ in range(k)])

    def BooleanOp(op, children):
        return {"and": bf.and_, "or": bf.or_, "xor": bf.xor}[op](*children)

    mismatches = 0
    for _ in range(300):
        f = random_tree(4)
        g = random_tree(4)
        want = brute_force_equal(f, g)
        got = equivalent(f, g)
        assert got.status in (EQUAL, DIFFERENT)
        if (got.status == EQUAL) != want:
            mismatches += 1
        if got.status == DIFFERENT:
            cx = got.counterexample
            assert bf.evaluate(f, cx) != bf.evaluate(g, cx)
        # the SAT path must agree as well
        got_sat = equivalent(f, g, EquivConfig(brute_force_max_vars=0))
        if got_sat.status != INCONCLUSIVE:
            assert (got_sat.status == EQUAL) == want
    assert mismatches == 0
