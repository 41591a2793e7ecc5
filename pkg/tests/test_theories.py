import itertools

import pytest

from tgw.errors import PreconditionError, ResourceCapError
from tgw.formula import (FALSE, TRUE, Eq, VarRef, conj, free_vars, neg,
                         parse_formula, render_formula)
from tgw.theories import (CompleteType, canonical_form, decide_sentence,
                          diagrams_over, eliminate_quantifiers,
                          enumerate_types, get_theory, is_consistent,
                          set_partitions)


def qe(text, theory):
    t = get_theory(theory)
    return eliminate_quantifiers(parse_formula(text, t.signature), t)


def decide(text, theory):
    t = get_theory(theory)
    return decide_sentence(parse_formula(text, t.signature), t)


# -- independent brute-force oracle over raw bit tables ----------------------
# A raw diagram assigns a bit to every ordered pair for each relation and to
# every unordered pair for equality.  Admissibility is checked on the raw
# bits, without the package's class-based representation.

def brute_force_count(theory_id, m):
    eq_pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
    rel_pairs = [(i, j) for i in range(m) for j in range(m)]

    def eqv(eqbits, i, j):
        if i == j:
            return True
        return eqbits[(min(i, j), max(i, j))]

    count = 0
    for eqchoice in itertools.product((False, True), repeat=len(eq_pairs)):
        eqbits = dict(zip(eq_pairs, eqchoice))
        # equality must be transitive (reflexive/symmetric by encoding)
        if any(eqv(eqbits, i, j) and eqv(eqbits, j, k) and not eqv(eqbits, i, k)
               for i in range(m) for j in range(m) for k in range(m)):
            continue
        if theory_id == "pureset":
            count += 1
            continue
        for relchoice in itertools.product((False, True), repeat=len(rel_pairs)):
            rel = dict(zip(rel_pairs, relchoice))
            if not congruent(rel, eqbits, eqv, m):
                continue
            if theory_id == "dlo" and dlo_ok(rel, eqbits, eqv, m):
                count += 1
            elif theory_id == "randomgraph" and graph_ok(rel, eqbits, eqv, m):
                count += 1
            elif theory_id == "equivinf" and equiv_ok(rel, eqbits, eqv, m):
                count += 1
    return count


def congruent(rel, eqbits, eqv, m):
    for i in range(m):
        for j in range(m):
            for i2 in range(m):
                for j2 in range(m):
                    if eqv(eqbits, i, i2) and eqv(eqbits, j, j2):
                        if rel[(i, j)] != rel[(i2, j2)]:
                            return False
    return True


def dlo_ok(rel, eqbits, eqv, m):
    for i in range(m):
        for j in range(m):
            if eqv(eqbits, i, j):
                if rel[(i, j)]:
                    return False
            elif rel[(i, j)] == rel[(j, i)]:
                return False
            for k in range(m):
                if rel[(i, j)] and rel[(j, k)] and not rel[(i, k)]:
                    return False
    return True


def graph_ok(rel, eqbits, eqv, m):
    return all(not rel[(i, j)] if eqv(eqbits, i, j) else rel[(i, j)] == rel[(j, i)]
               for i in range(m) for j in range(m))


def equiv_ok(rel, eqbits, eqv, m):
    for i in range(m):
        for j in range(m):
            if eqv(eqbits, i, j) and not rel[(i, j)]:
                return False
            if rel[(i, j)] != rel[(j, i)]:
                return False
            for k in range(m):
                if rel[(i, j)] and rel[(j, k)] and not rel[(i, k)]:
                    return False
    return True


@pytest.mark.parametrize("theory,n,expected", [
    ("pureset", 2, 2), ("pureset", 3, 5),
    ("dlo", 2, 3), ("dlo", 3, 13),
    ("randomgraph", 2, 3), ("randomgraph", 3, 15),
    ("equivinf", 2, 3), ("equivinf", 3, 12),
])
def test_enumerate_matches_brute_force(theory, n, expected):
    got = enumerate_types(theory, 1, n)
    assert len(got) == expected
    assert brute_force_count(theory, n) == expected


def test_enumerate_deterministic_and_distinct():
    a = enumerate_types("dlo", 1, 3)
    b = enumerate_types("dlo", 1, 3)
    assert [t.key() for t in a] == [t.key() for t in b]
    assert len({t.key() for t in a}) == len(a)


def test_enumerate_level_zero():
    assert len(enumerate_types("dlo", 1, 0)) == 1


def test_enumerate_cap():
    with pytest.raises(ResourceCapError):
        enumerate_types("randomgraph", 2, 7)


def test_enumerate_with_constraint():
    got = enumerate_types("dlo", 1, 2, parse_formula("lt(x0,x1)", get_theory("dlo").signature))
    assert len(got) == 1


def test_type_monotone_refinement():
    # each (1,n)-type extends to at least one (1,n+1)-type
    for theory in ("pureset", "dlo", "randomgraph", "equivinf"):
        small = enumerate_types(theory, 1, 2)
        big = enumerate_types(theory, 1, 3)
        restricted = {t.restrict((0,), 2).key() for t in big}
        assert {t.key() for t in small} <= restricted


# -- quantifier elimination --------------------------------------------------

def test_qe_dlo_between():
    assert qe("exists y0.(lt(x0,y0) & lt(y0,x1))", "dlo") == \
        parse_formula("lt(x0,x1)", get_theory("dlo").signature)


def test_qe_pureset_witness():
    assert qe("exists y0. eq(y0,x0)", "pureset") == TRUE


def test_qe_randomgraph_extension():
    f = qe("exists y0.(adj(x0,y0) & !adj(x1,y0) & !eq(y0,x0) & !eq(y0,x1))",
           "randomgraph")
    assert f == neg(Eq(VarRef(0, 0), VarRef(0, 1)))


def test_qe_unsupported_theory():
    with pytest.raises(PreconditionError):
        get_theory("zfc")


def test_decide_dlo_unbounded():
    assert decide("forall x0. exists y0. lt(x0,y0)", "dlo") is True


def test_decide_pureset_no_singleton():
    assert decide("exists x0. forall y0. eq(x0,y0)", "pureset") is False


def test_decide_randomgraph_symmetry():
    assert decide("forall x0. forall x1. (adj(x0,x1) -> adj(x1,x0))",
                  "randomgraph") is True


def test_decide_equivinf():
    assert decide("forall x0. exists y0. (equiv(x0,y0) & !eq(x0,y0))", "equivinf") is True
    assert decide("forall x0. exists y0. !equiv(x0,y0)", "equivinf") is True
    assert decide("forall x0. forall x1. equiv(x0,x1)", "equivinf") is False


def test_decide_requires_sentence():
    with pytest.raises(PreconditionError):
        decide("lt(x0,x1)", "dlo")


def test_qe_dlo_negation_expansion():
    # not(x0 < x1) is x1 < x0 or x0 = x1
    f = qe("exists y0. (!lt(y0,x0) & lt(y0,x1))", "dlo")
    # a witness not below x0 but below x1 exists iff x0 < x1
    assert f == parse_formula("lt(x0,x1)", get_theory("dlo").signature)


# -- QE agreement with truth over small rational samples (dlo) ---------------

DLO_CORPUS = [
    "exists y0.(lt(x0,y0) & lt(y0,x1))",
    "forall y0.(lt(x0,y0) -> lt(x1,y0))",
    "exists y0.(lt(y0,x0) | eq(y0,x1))",
    "exists y0. forall y1. (lt(y0,y1) -> lt(x0,y1))",
    "(!lt(x0,x1) & !eq(x0,x1))",
]


def eval_dlo(f, assignment):
    from fractions import Fraction
    from tgw.formula import And, Atom, Bot, Eq, Exists, Forall, Implies, Not, Or, Top

    def go(g, asg):
        if isinstance(g, Top):
            return True
        if isinstance(g, Bot):
            return False
        if isinstance(g, Atom):
            return asg[g.args[0]] < asg[g.args[1]]
        if isinstance(g, Eq):
            return asg[g.lhs] == asg[g.rhs]
        if isinstance(g, Not):
            return not go(g.sub, asg)
        if isinstance(g, And):
            return all(go(c, asg) for c in g.children)
        if isinstance(g, Or):
            return any(go(c, asg) for c in g.children)
        if isinstance(g, Implies):
            return not go(g.lhs, asg) or go(g.rhs, asg)
        vals = sorted(set(asg.values()))
        cands = set(vals)
        cands |= {a + (b - a) / 2 for a, b in zip(vals, vals[1:])}
        if vals:
            cands |= {vals[0] - 1, vals[-1] + 1}
        else:
            cands = {Fraction(0)}
        if isinstance(g, Exists):
            return any(go(g.body, {**asg, g.var: c}) for c in sorted(cands))
        return all(go(g.body, {**asg, g.var: c}) for c in sorted(cands))

    return go(f, dict(assignment))


def test_qe_sound_on_rational_samples():
    from fractions import Fraction
    sig = get_theory("dlo").signature
    points = [Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2)]
    for text in DLO_CORPUS:
        f = parse_formula(text, sig)
        g = eliminate_quantifiers(f, "dlo")
        assert free_vars(g) <= free_vars(f) | set()
        for a in points:
            for b in points:
                asg = {VarRef(0, 0): a, VarRef(0, 1): b}
                assert eval_dlo(f, asg) == eval_dlo(g, asg), text


# -- consistency and canonical forms -----------------------------------------

def test_is_consistent_examples():
    sig = get_theory("dlo").signature
    t = enumerate_types("dlo", 1, 2, parse_formula("lt(x0,x1)", sig))[0]
    assert is_consistent(t, "dlo", parse_formula("lt(x1,x0)", sig)) is False
    t2 = enumerate_types("pureset", 1, 2, parse_formula("!eq(x0,x1)",
                         get_theory("pureset").signature))[0]
    assert is_consistent(t2, "pureset") is True

    rg = get_theory("randomgraph")
    t3 = [t for t in enumerate_types("randomgraph", 1, 2)
          if t.satisfies_qf(parse_formula("(adj(x0,x1) & !eq(x0,x1))", rg.signature))][0]
    extra = parse_formula(
        "exists y0.(adj(x0,y0) & !adj(x1,y0) & !eq(y0,x0) & !eq(y0,x1))", rg.signature)
    assert is_consistent(t3, rg, extra) is True


def test_diagram_formula_roundtrip():
    for theory in ("pureset", "dlo", "randomgraph", "equivinf"):
        for t in enumerate_types(theory, 1, 3):
            sat = [u for u in enumerate_types(theory, 1, 3)
                   if u.satisfies_qf(t.diagram_formula())]
            assert [u.key() for u in sat] == [t.key()]


def test_canonical_form_semantic_identity():
    sig = get_theory("dlo").signature
    a = parse_formula("!lt(x0,x1)", sig)
    b = parse_formula("(lt(x1,x0) | eq(x0,x1))", sig)
    assert canonical_form(a, "dlo") == canonical_form(b, "dlo")
    c = parse_formula("(lt(x0,x1) & lt(x1,x0))", sig)
    assert canonical_form(c, "dlo") == FALSE


def test_canonical_form_drops_dummies():
    sig = get_theory("pureset").signature
    f = parse_formula("(eq(x0,x1) | !eq(x0,x1))", sig)
    assert canonical_form(f, "pureset") == TRUE
    g = parse_formula("(eq(x0,x1) & eq(x2,x2))", sig)
    assert free_vars(canonical_form(g, "pureset")) == {VarRef(0, 0), VarRef(0, 1)}


def test_canonical_form_idempotent():
    sig = get_theory("randomgraph").signature
    corpus = ["adj(x0,y0)", "!adj(x0,y0)", "(adj(x0,x1) | eq(x0,x1))",
              "exists y0. adj(x0,y0)"]
    for text in corpus:
        c = canonical_form(parse_formula(text, sig), "randomgraph")
        assert canonical_form(c, "randomgraph") == c


def test_set_partitions_bell():
    assert len(list(set_partitions(4))) == 15
